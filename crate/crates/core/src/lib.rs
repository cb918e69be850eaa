//! Computability workbench core.
//!
//! A small partial-recursive language over the naturals with an acceptable
//! numbering, an exact-cost evaluator, recursion-theorem tooling, staged
//! enumerable sets, a handful of represented topological spaces, and
//! resource-bounded description complexity built on top of them.

pub mod nat;
pub mod term;
pub mod machine;
pub mod complexity;
pub mod constructions;
pub mod lambda;
pub mod library;
pub mod recursion;
pub mod spaces;
pub mod stage;
