//! Self-referential program construction.
//!
//! Everything here rides on one fact about the numbering: `smn` is pure
//! pairing arithmetic, and the same arithmetic is expressible inside the
//! toy language (`library::smn_self`). Diagonalizing a helper against its
//! own code then yields programs that can inspect their own index, fixed
//! points of arbitrary code transformers, and parameterized families of
//! self-knowing programs.

use std::rc::Rc;

use crate::lambda::{compile_fn, e, CompiledFn};
use crate::library;
use crate::machine::{eval_code, EvalOutcome};
use crate::nat::Nat;
use crate::term::{encode, smn, Term};

/// Builds a program that receives its own index.
///
/// `body` must expect inputs of the shape `pair(q, n)`. The returned code
/// `e` satisfies `phi_e(n) = phi_body(pair(e, n))` on every input, with a
/// fixed harness overhead in steps that does not depend on `body` or `n`.
pub fn quine_with(body: &Rc<Term>) -> Nat {
    // G(q, n) = body(smn(q, q), n); with cG its code, e = smn(cG, cG)
    // unfolds to body(e, n).
    let diag = Term::comp(library::smn_self().term, Term::fst());
    let g = Term::comp(body.clone(), Term::pair(diag, Term::snd()));
    let cg = encode(&g);
    smn(&cg, &cg)
}

/// A program whose output on every input is its own code.
pub fn quine() -> Nat {
    quine_with(&Term::fst())
}

/// Result of building a fixed point, with a bounded probe of the
/// transformer's behavior on it.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    /// Code `e` with `phi_e = phi_{phi_f(e)}`.
    pub code: Nat,
    /// `phi_f(e)` evaluated with the probe fuel. Diagnostics only: the
    /// identity above holds regardless, but if the transformer diverges on
    /// `e` then `phi_e` diverges on every input too.
    pub transformed: EvalOutcome,
}

/// Fixed point of a code transformer, given as the code `f` of a program
/// mapping codes to codes: produces `e` such that running `e` routes every
/// input through `phi_{phi_f(e)}`.
pub fn fixed_point(transformer: &Nat, probe_fuel: u64) -> FixedPoint {
    // G(q, n) = U(U(f, smn(q, q)), n); e = smn(cG, cG) makes the inner
    // universal call recompute f(e) on the machine before dispatching n.
    let diag = Term::comp(library::smn_self().term, Term::fst());
    let inner = Term::comp(Term::univ(), Term::pair(Term::lit_nat(transformer), diag));
    let g = Term::comp(Term::univ(), Term::pair(inner, Term::snd()));
    let cg = encode(&g);
    let code = smn(&cg, &cg);
    let transformed = eval_code(transformer, &code, probe_fuel);
    FixedPoint { code, transformed }
}

/// A family of programs, one per parameter value, each of which receives
/// its own final code alongside the parameter.
#[derive(Debug, Clone)]
pub struct RecursiveFamily {
    base: Nat,
    /// Toy program computing `a -> member(a)`, for handing the map itself
    /// to other programs.
    pub generator: CompiledFn,
}

impl RecursiveFamily {
    /// The member code for parameter `a`. Running it on `n` evaluates the
    /// family body on `pair(member(a), pair(a, n))`.
    pub fn member(&self, param: &Nat) -> Nat {
        smn(&self.base, param)
    }
}

/// Builds the family generated by `body`, which must expect inputs of the
/// shape `pair(q, pair(a, n))`: `q` is bound to the member code for `a`.
pub fn recursive_family(body: &Rc<Term>) -> RecursiveFamily {
    // H(q, (a, n)) = body(smn(smn(q, q), a), (a, n)); with h its code and
    // base = smn(h, h), member(a) = smn(base, a) unfolds to
    // body(member(a), (a, n)).
    let rewrap = compile_fn(
        "x",
        &e::pair(
            e::code_smn(
                e::raw(library::smn_self().term, e::fst(e::var("x"))),
                e::fst(e::snd(e::var("x"))),
            ),
            e::snd(e::var("x")),
        ),
    );
    let h_term = Term::comp(body.clone(), rewrap.term);
    let h = encode(&h_term);
    let base = smn(&h, &h);
    let generator = compile_fn("a", &e::code_smn(e::kn(&base), e::var("a")));
    RecursiveFamily { base, generator }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::eval;
    use crate::term::{c_lit, decode};

    const FUEL: u64 = 1_000_000;

    fn run_value(code: &Nat, x: &Nat) -> Nat {
        match eval_code(code, x, FUEL) {
            EvalOutcome::Halted { value, .. } => value,
            EvalOutcome::OutOfFuel => panic!("expected halt"),
        }
    }

    fn run_steps(code: &Nat, x: &Nat) -> u64 {
        match eval_code(code, x, FUEL) {
            EvalOutcome::Halted { steps, .. } => steps,
            EvalOutcome::OutOfFuel => panic!("expected halt"),
        }
    }

    #[test]
    fn quine_outputs_its_own_code() {
        let e = quine();
        for x in [0u64, 5, 1000] {
            assert_eq!(run_value(&e, &Nat::small(x)), e);
        }
        // The code is huge but still decodes structurally.
        assert_eq!(encode(&decode(&e)), e);
        assert!(e.bits_upper_bound() > 64);
    }

    #[test]
    fn quine_harness_overhead_is_constant() {
        let bodies = [Term::fst(), Term::snd(), Term::id()];
        let mut overheads = Vec::new();
        for body in &bodies {
            let e = quine_with(body);
            for x in [0u64, 9] {
                let x = Nat::small(x);
                let direct = eval(body, &Nat::pair(&e, &x), FUEL);
                let via = eval_code(&e, &x, FUEL);
                assert_eq!(via.value(), direct.value());
                overheads.push(via.steps().unwrap() - direct.steps().unwrap());
            }
        }
        overheads.dedup();
        assert_eq!(overheads.len(), 1, "overhead varies: {overheads:?}");
    }

    #[test]
    fn constant_transformer_fixes_on_the_constant_program() {
        // phi_f(x) = c where c codes a program adding two.
        let c = encode(&Term::comp(Term::succ(), Term::succ()));
        let f = c_lit(&c);
        let fp = fixed_point(&f, 1_000);
        match &fp.transformed {
            EvalOutcome::Halted { value, steps } => {
                assert_eq!(value, &c);
                assert_eq!(*steps, 1);
            }
            EvalOutcome::OutOfFuel => panic!("probe should halt"),
        }
        assert_eq!(run_value(&fp.code, &Nat::small(5)), Nat::small(7));
    }

    #[test]
    fn literal_wrapping_transformer_reproduces_the_code() {
        // phi_f(e) = c_lit(e), so the fixed point prints itself.
        let f = compile_fn("x", &e::code_lit(e::var("x")));
        let fp = fixed_point(&f.code, 100_000);
        assert!(fp.transformed.halted());
        assert_eq!(run_value(&fp.code, &Nat::small(9)), fp.code);
    }

    #[test]
    fn divergent_transformer_still_yields_a_code_that_diverges() {
        // Code 11 is mu(succ): diverges on every input.
        let fp = fixed_point(&Nat::small(11), 10_000);
        assert!(!fp.transformed.halted());
        assert!(!eval_code(&fp.code, &Nat::zero(), 50_000).halted());
    }

    #[test]
    fn family_members_know_their_code_and_parameter() {
        let fam = recursive_family(&Term::id());
        let mut seen = Vec::new();
        for a in [0u64, 3, 17] {
            let a = Nat::small(a);
            let ea = fam.member(&a);
            let n = Nat::small(4);
            let expect = Nat::pair(&ea, &Nat::pair(&a, &n));
            assert_eq!(run_value(&ea, &n), expect);
            // The toy generator computes the same member code.
            assert_eq!(eval(&fam.generator.term, &a, FUEL).value(), Some(&ea));
            seen.push(ea);
        }
        assert!(seen[0] != seen[1] && seen[1] != seen[2]);
    }

    #[test]
    fn family_member_can_branch_on_its_parameter() {
        // a = 0: return n + 1; otherwise: return own code.
        let body = compile_fn(
            "x",
            &e::if0(
                e::fst(e::snd(e::var("x"))),
                e::succ(e::snd(e::snd(e::var("x")))),
                e::fst(e::var("x")),
            ),
        );
        let fam = recursive_family(&body.term);
        let e0 = fam.member(&Nat::zero());
        assert_eq!(run_value(&e0, &Nat::small(7)), Nat::small(8));
        let e1 = fam.member(&Nat::one());
        assert_eq!(run_value(&e1, &Nat::small(7)), e1);
        // Member step counts do not depend on the parameter's magnitude.
        let big = fam.member(&Nat::small(1 << 40));
        assert_eq!(
            run_steps(&e1, &Nat::small(7)),
            run_steps(&big, &Nat::small(7))
        );
    }
}
