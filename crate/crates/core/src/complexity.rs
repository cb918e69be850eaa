//! Stage-indexed upper approximations of three description complexities,
//! plus exhaustive brute-force oracles at desk scale.
//!
//! The three measures, all over the same numbering:
//!
//! * minimal index: the least `e` with `phi_e(0) = n`;
//! * program length: the bit-length of that least `e`;
//! * monotone: for a finite binary string `u`, the bit-length of the least
//!   `e` with `phi_e(i) = u(i)` for every `i < |u|`.
//!
//! Each `*_upper(target, stage)` scans codes `e <= stage` with fuel `stage`.
//! The candidate pool and the fuel both grow with the stage, so each bound
//! is nonincreasing in the stage and converges to the true value from above.
//!
//! One fact does a lot of quiet work here: bit-length is nondecreasing in
//! the code, so the first qualifying code in an ascending scan is at once
//! the minimal index and a minimal-bit-length witness. Every search below
//! may therefore stop at its first hit.

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::machine::{eval_code, EvalOutcome};
use crate::nat::Nat;
use crate::spaces;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ComplexityKind {
    MinIndex,
    ProgramLength,
    Monotone,
}

impl ComplexityKind {
    pub fn name(self) -> &'static str {
        match self {
            ComplexityKind::MinIndex => "min-index",
            ComplexityKind::ProgramLength => "program-length",
            ComplexityKind::Monotone => "monotone",
        }
    }
}

/// An upper bound on a target's complexity together with the search stage
/// that produced it. Stage 0 marks a bound that was asserted rather than
/// measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComplexityBound {
    pub kind: ComplexityKind,
    pub value: u64,
    pub stage: u64,
}

/// Largest index any point with complexity <= k can be forced to have:
/// measured by least index the bound is k itself; measured by bit-length,
/// every code of bit-length <= k is below 2^k.
pub fn index_bound(kind: ComplexityKind, k: u64) -> Nat {
    match kind {
        ComplexityKind::MinIndex => Nat::small(k),
        ComplexityKind::ProgramLength | ComplexityKind::Monotone => {
            if k < 64 {
                Nat::small((1u64 << k) - 1)
            } else {
                Nat::from_biguint((BigUint::one() << k) - 1u32)
            }
        }
    }
}

/// Bit length of a code, with the convention `bitlen(0) = 1`.
pub fn bitlen_u64(n: u64) -> u64 {
    if n == 0 {
        1
    } else {
        64 - u64::from(n.leading_zeros())
    }
}

/// Least `e <= pool` with `phi_e(0) = n` within `fuel` steps.
fn scan_value(n: &Nat, pool: u64, fuel: u64) -> Option<u64> {
    let zero = Nat::zero();
    for e in 0..=pool {
        let code = Nat::small(e);
        if let EvalOutcome::Halted { value, .. } = eval_code(&code, &zero, fuel) {
            if value == *n {
                return Some(e);
            }
        }
    }
    None
}

/// Least `e <= pool` with `phi_e(i) = u(i)` for every `i < |u|`, each run
/// within `fuel` steps.
fn scan_sequence(u: &[bool], pool: u64, fuel: u64) -> Option<u64> {
    'codes: for e in 0..=pool {
        let code = Nat::small(e);
        for (i, &bit) in u.iter().enumerate() {
            let want = u64::from(bit);
            match eval_code(&code, &Nat::small(i as u64), fuel) {
                EvalOutcome::Halted { value, .. } if value.to_u64() == Some(want) => {}
                _ => continue 'codes,
            }
        }
        return Some(e);
    }
    None
}

/// Stage-`s` upper bound on the minimal index of a program outputting `n`.
pub fn c_upper(n: &Nat, stage: u64) -> Option<u64> {
    scan_value(n, stage, stage)
}

/// Stage-`s` upper bound on the bit-length of a shortest program
/// outputting `n`.
pub fn k_upper(n: &Nat, stage: u64) -> Option<u64> {
    scan_value(n, stage, stage).map(bitlen_u64)
}

/// Stage-`s` upper bound on the monotone complexity of the finite binary
/// string `u`.
pub fn km_upper(u: &[bool], stage: u64) -> Option<u64> {
    scan_sequence(u, stage, stage).map(bitlen_u64)
}

/// What the brute-force oracle is asked to describe.
#[derive(Debug, Clone)]
pub enum Target {
    Value(Nat),
    Sequence(Vec<bool>),
}

/// The oracle's answer at the requested fuel and at double that fuel. The
/// value is trustworthy only when the two agree; a search that is still
/// finding shorter witnesses as fuel grows has not settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub at_fuel: Option<u64>,
    pub at_double: Option<u64>,
}

impl OracleReport {
    pub fn stable(&self) -> bool {
        self.at_fuel == self.at_double
    }

    /// The settled answer, or `None` when doubling the fuel changed it.
    /// Note a stable "unreachable" also reports `None`; disambiguate with
    /// `stable()` if that case matters.
    pub fn stable_value(&self) -> Option<u64> {
        if self.stable() {
            self.at_fuel
        } else {
            None
        }
    }
}

/// Exhaustive minimum over all codes <= `code_bound`, run twice (at `fuel`
/// and at `2 * fuel`) so the caller can check the answer has settled.
/// Desk scale only: `code_bound <= 1e5`, `fuel <= 1e6`.
pub fn exact_oracle(
    kind: ComplexityKind,
    target: &Target,
    code_bound: u64,
    fuel: u64,
) -> OracleReport {
    assert!(code_bound <= 100_000, "oracle is desk scale: code_bound <= 1e5");
    assert!(fuel <= 1_000_000, "oracle is desk scale: fuel <= 1e6");
    let run = |f: u64| -> Option<u64> {
        match (kind, target) {
            (ComplexityKind::MinIndex, Target::Value(n)) => scan_value(n, code_bound, f),
            (ComplexityKind::ProgramLength, Target::Value(n)) => {
                scan_value(n, code_bound, f).map(bitlen_u64)
            }
            (ComplexityKind::Monotone, Target::Sequence(u)) => {
                scan_sequence(u, code_bound, f).map(bitlen_u64)
            }
            (ComplexityKind::Monotone, Target::Value(_)) => {
                panic!("monotone complexity takes a binary string target")
            }
            (_, Target::Sequence(_)) => {
                panic!("value complexities take a natural target")
            }
        }
    };
    OracleReport {
        at_fuel: run(fuel),
        at_double: run(fuel.saturating_mul(2)),
    }
}

/// The code of the canonical name of infinity in the extended naturals,
/// and its exact bit-length. Both are fixed by the encoding, so they are
/// build-time constants in effect; computing them here keeps them honest.
pub fn infinity_constants() -> (Nat, u64) {
    let code = spaces::infinity_name().code;
    let bits = code
        .try_to_biguint(8_000_000)
        .expect("infinity name stays materializable")
        .bits();
    (code, bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nat::SeededRng;
    use crate::spaces::{markov_name_of, Point};
    use crate::term::{encode, Term};

    #[test]
    fn minimal_index_of_five_is_the_literal() {
        let lit5 = encode(&Term::lit(5));
        assert_eq!(lit5, Nat::small(22));
        // Codes 0..22 on input 0 only ever output values below 5, so the
        // literal itself is the minimal index.
        assert_eq!(c_upper(&Nat::small(5), 1_000), Some(22));
        assert_eq!(k_upper(&Nat::small(5), 1_000), Some(5));
    }

    #[test]
    fn upper_bounds_shrink_as_stages_grow() {
        for n in 0..=20u64 {
            let target = Nat::small(n);
            let mut last_c = None;
            let mut last_k = None;
            for stage in [10, 100, 1_000] {
                let c = c_upper(&target, stage);
                let k = k_upper(&target, stage);
                if let (Some(prev), Some(now)) = (last_c, c) {
                    assert!(now <= prev, "c bound rose for n={n}");
                }
                if let (Some(prev), Some(now)) = (last_k, k) {
                    assert!(now <= prev, "k bound rose for n={n}");
                }
                if c.is_some() {
                    last_c = c;
                }
                if k.is_some() {
                    last_k = k;
                }
            }
            assert!(last_c.is_some(), "n={n} never reached by stage 1000");
        }
    }

    #[test]
    fn zero_is_free_and_lengths_start_at_one() {
        assert_eq!(c_upper(&Nat::zero(), 100), Some(0));
        assert_eq!(k_upper(&Nat::zero(), 100), Some(1));
        for n in 0..=10u64 {
            if let Some(k) = k_upper(&Nat::small(n), 2_000) {
                assert!(k >= 1);
            }
        }
    }

    #[test]
    fn monotone_bounds_respect_prefixes() {
        // Zero (code 0) outputs 0 on every input, so every all-zero string
        // has monotone complexity 1, as does the empty string.
        assert_eq!(km_upper(&[], 100), Some(1));
        for n in 1..=8 {
            assert_eq!(km_upper(&vec![false; n], 2_000), Some(1));
        }
        let strings: Vec<Vec<bool>> = (0..20u64)
            .map(|i| (0..5).map(|b| (i >> b) & 1 == 1).collect())
            .collect();
        for u in &strings {
            let full = km_upper(u, 4_000);
            for cut in 0..u.len() {
                let part = km_upper(&u[..cut], 4_000);
                if let (Some(p), Some(f)) = (part, full) {
                    assert!(p <= f, "prefix bound exceeded full bound for {u:?}");
                }
            }
        }
    }

    #[test]
    fn oracle_settles_on_reachable_targets_and_reports_misses() {
        let report = exact_oracle(ComplexityKind::MinIndex, &Target::Value(Nat::zero()), 100, 10_000);
        assert!(report.stable());
        assert_eq!(report.stable_value(), Some(0));

        // No code below 10 outputs 123456789 in 100 steps or in 200.
        let miss = exact_oracle(
            ComplexityKind::MinIndex,
            &Target::Value(Nat::small(123_456_789)),
            10,
            100,
        );
        assert!(miss.stable());
        assert_eq!(miss.at_fuel, None);
    }

    #[test]
    fn minimal_indices_are_one_to_one() {
        let mut seen = std::collections::BTreeMap::new();
        for n in 0..=15u64 {
            let report = exact_oracle(
                ComplexityKind::MinIndex,
                &Target::Value(Nat::small(n)),
                10_000,
                100_000,
            );
            assert!(report.stable(), "oracle unsettled for n={n}");
            let e = report.stable_value().expect("small naturals are reachable");
            if let Some(m) = seen.insert(e, n) {
                panic!("codes collide: {m} and {n} share minimal index {e}");
            }
        }
    }

    #[test]
    fn staged_bounds_agree_with_the_oracle_in_the_limit() {
        for n in 0..=12u64 {
            let target = Nat::small(n);
            let report = exact_oracle(
                ComplexityKind::MinIndex,
                &Target::Value(target.clone()),
                10_000,
                100_000,
            );
            let truth = report.stable_value().expect("reachable");
            assert_eq!(c_upper(&target, 100_000.max(truth)), Some(truth));
        }
    }

    #[test]
    fn random_targets_are_right_ce() {
        let mut rng = SeededRng::new(0x5eed_c0de);
        for _ in 0..100 {
            let n = Nat::small(rng.below(40));
            let mut last: Option<u64> = None;
            for stage in [30, 100, 400, 1_600] {
                if let Some(now) = c_upper(&n, stage) {
                    if let Some(prev) = last {
                        assert!(now <= prev);
                    }
                    last = Some(now);
                }
            }
        }
    }

    #[test]
    fn index_bounds_match_the_kinds() {
        assert_eq!(index_bound(ComplexityKind::MinIndex, 7), Nat::small(7));
        assert_eq!(index_bound(ComplexityKind::ProgramLength, 3), Nat::small(7));
        assert_eq!(index_bound(ComplexityKind::ProgramLength, 1), Nat::small(1));
        assert_eq!(index_bound(ComplexityKind::Monotone, 3), Nat::small(7));
        let big = index_bound(ComplexityKind::ProgramLength, 70);
        assert_eq!(big.bitlen(), 70);
        for k in 1..=16u64 {
            for kind in [
                ComplexityKind::MinIndex,
                ComplexityKind::ProgramLength,
                ComplexityKind::Monotone,
            ] {
                assert!(index_bound(kind, k) <= index_bound(kind, k + 1));
            }
        }
    }

    #[test]
    fn infinity_constants_match_the_markov_name() {
        let (c_inf, k_inf) = infinity_constants();
        let again = infinity_constants();
        assert_eq!(c_inf, again.0);
        assert_eq!(k_inf, again.1);
        assert_eq!(c_inf, markov_name_of(&Point::NbarInfinity).code);
        assert!(k_inf > 64, "infinity is not a toy constant");
        assert_eq!(c_inf.bitlen(), k_inf);
    }
}
