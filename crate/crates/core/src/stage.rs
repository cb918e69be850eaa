//! Computably enumerable sets with explicit staging.
//!
//! A staged set fixes, for every stage `s`, a finite view of its elements.
//! Views grow monotonically with the stage and their union is the set. The
//! same staging is available in two forms: Rust-side queries for oracles
//! and ground truth, and a compiled presentation program so that toy
//! programs can ask the exact same questions.
//!
//! Presentation programs take `pair(x, t)` and return `1` or `0` according
//! to whether `x` is in the stage-`t` view. They are total: every query
//! halts, at a fuel cost that grows with `t` but never depends on whether
//! the answer is yes.

use std::rc::Rc;

use crate::lambda::{compile_fn, e, CompiledFn};
use crate::library;
use crate::machine::{eval, EvalOutcome};
use crate::nat::Nat;
use crate::term::{encode, Term};

#[derive(Debug, Clone)]
pub enum StagedSet {
    /// The halting domain of a program: `x` is a member from the stage
    /// equal to the program's halting step count on `x`. Untying the entry
    /// stage from the value of `x` lets even astronomically large members
    /// be observed early; `view` clamps to small values separately so that
    /// views stay finite.
    Program { code: Nat },
    /// Finitely many fixed elements, each visible from its own stage on.
    /// Values may be astronomically large.
    Explicit { entries: Vec<(Nat, u64)> },
    /// Every natural number; `x` enters the view at stage `x`.
    All,
    Empty,
}

impl StagedSet {
    pub fn program(code: &Nat) -> StagedSet {
        StagedSet::Program { code: code.clone() }
    }

    pub fn explicit(entries: Vec<(Nat, u64)>) -> StagedSet {
        StagedSet::Explicit { entries }
    }

    /// Small values, all visible from stage 0.
    pub fn of_values(values: impl IntoIterator<Item = u64>) -> StagedSet {
        StagedSet::Explicit {
            entries: values.into_iter().map(|v| (Nat::small(v), 0)).collect(),
        }
    }

    pub fn contains_at(&self, x: &Nat, stage: u64) -> bool {
        match self {
            StagedSet::Program { code } => {
                crate::machine::eval_code(code, x, stage).halted()
            }
            StagedSet::Explicit { entries } => entries
                .iter()
                .any(|(v, st)| *st <= stage && v == x),
            StagedSet::All => x.to_u64().is_some_and(|v| v <= stage),
            StagedSet::Empty => false,
        }
    }

    /// Least stage at which `x` is visible, if that happens by `limit`.
    pub fn first_stage(&self, x: &Nat, limit: u64) -> Option<u64> {
        match self {
            StagedSet::Program { code } => {
                match crate::machine::eval_code(code, x, limit) {
                    EvalOutcome::Halted { steps, .. } => Some(steps),
                    EvalOutcome::OutOfFuel => None,
                }
            }
            StagedSet::Explicit { entries } => entries
                .iter()
                .filter(|(v, st)| *st <= limit && v == x)
                .map(|(_, st)| *st)
                .min(),
            StagedSet::All => x.to_u64().filter(|v| *v <= limit),
            StagedSet::Empty => None,
        }
    }

    /// The stage-`s` view, sorted and deduplicated: members observable by
    /// stage `s` whose values also fit under `s`, so the view is finite.
    pub fn view(&self, stage: u64) -> Vec<Nat> {
        let mut out = match self {
            StagedSet::Program { code } => (0..=stage)
                .map(Nat::small)
                .filter(|n| crate::machine::eval_code(code, n, stage).halted())
                .collect(),
            StagedSet::Explicit { entries } => entries
                .iter()
                .filter(|(_, st)| *st <= stage)
                .map(|(v, _)| v.clone())
                .collect(),
            StagedSet::All => (0..=stage).map(Nat::small).collect(),
            StagedSet::Empty => Vec::new(),
        };
        out.sort();
        out.dedup();
        out
    }

    /// A program whose halting domain is exactly this set, forgetting the
    /// staging. Useful wherever a set must be passed around as a single
    /// code.
    pub fn domain_code(&self) -> Nat {
        match self {
            StagedSet::Program { code } => code.clone(),
            StagedSet::Explicit { entries } => {
                let mut values: Vec<Nat> = entries.iter().map(|(v, _)| v.clone()).collect();
                values.sort();
                values.dedup();
                halts_on_values(&values).code
            }
            // The zero program halts everywhere; mu over succ nowhere.
            StagedSet::All => encode(&Term::zero()),
            StagedSet::Empty => encode(&Term::mu(Term::succ())),
        }
    }

    /// Compiles the membership queries into a toy program on `pair(x, t)`.
    pub fn presentation(&self) -> CompiledFn {
        let x = || e::fst(e::var("z"));
        let t = || e::snd(e::var("z"));
        let body = match self {
            StagedSet::Program { code } => {
                // Halting within t steps, checked by running the
                // step-bounded interpreter in-language.
                let sim = e::raw(
                    library::step_eval().term,
                    e::pair(e::kn(code), e::pair(x(), t())),
                );
                e::if0(sim, e::k(0), e::k(1))
            }
            StagedSet::Explicit { entries } => {
                let mut acc = e::k(0);
                for (v, st) in entries.iter().rev() {
                    let here = e::if0(
                        e::raw(library::le().term, e::pair(e::k(*st), t())),
                        acc.clone(),
                        e::k(1),
                    );
                    acc = e::if0(
                        e::raw(library::eq().term, e::pair(x(), e::kn(v))),
                        acc,
                        here,
                    );
                }
                acc
            }
            StagedSet::All => e::raw(library::le().term, e::pair(x(), t())),
            StagedSet::Empty => e::k(0),
        };
        compile_fn("z", &body)
    }
}

/// A program that halts exactly on the listed values, by chained equality
/// tests with a diverging fallthrough.
pub fn halts_on_values(values: &[Nat]) -> CompiledFn {
    let mut acc = e::raw(Term::mu(Term::succ()), e::k(0));
    for v in values.iter().rev() {
        acc = e::if0(
            e::raw(library::eq().term, e::pair(e::var("n"), e::kn(v))),
            acc,
            e::k(0),
        );
    }
    compile_fn("n", &acc)
}

/// Runs a total boolean program on `pair(x, stage)`, growing fuel until it
/// halts. Panics if the program is not boolean or burns past the cap, so
/// misuse shows up as a loud failure rather than a wrong answer.
pub fn query_program(p: &Rc<Term>, x: &Nat, stage: u64) -> bool {
    let z = Nat::pair(x, &Nat::small(stage));
    let mut fuel: u64 = 1 << 14;
    loop {
        match eval(p, &z, fuel) {
            EvalOutcome::Halted { value, .. } => {
                return match value.to_u64() {
                    Some(0) => false,
                    Some(1) => true,
                    _ => panic!("query program returned a non-boolean"),
                }
            }
            EvalOutcome::OutOfFuel => {
                assert!(fuel < (1 << 42), "query program still running at the fuel cap");
                fuel = fuel.saturating_mul(8);
            }
        }
    }
}
