//! Diagonalization against any finite list of enumerable collections.
//!
//! Each listed collection must contain the infinite point and is sampled
//! along a growing sequence of finite members. Taking, at argument `k`,
//! one past the maximum of the first `k+1` sequences yields a growth
//! function `f`, and the diagonal collection keeps exactly the points at
//! or above `f` of their own least-index complexity. The diagonal is
//! semidecidable in the same budgeted sense as everything here, contains
//! the infinite point, yet provably differs from every listed collection:
//! for a sample value `x` taken at a position its own complexity
//! dominates, `f(C(x))` runs past `x` itself.

use std::rc::Rc;

use crate::complexity::{c_upper, exact_oracle, ComplexityKind, Target};
use crate::nat::Nat;
use crate::spaces::{infinity_name, Space};
use crate::stage::StagedSet;

use super::dense::DenseSequence;
use super::order::NbarQuery;
use super::{NbarFeed, RefutationWitness, Semidecider, Verdict};

/// Values the sampling sequences range over. Keeping the window small
/// keeps every exact-complexity question inside desk scale.
const WINDOW: u64 = 64;

/// Positions of a name read per run of the diagonal test.
const STREAM_CAP: u64 = 4096;

/// Per-value fuel for the exact-complexity questions the witness chain
/// asks; all sampled values are tiny, their least indexes settle early.
const ORACLE_FUEL: u64 = 10_000;
const ORACLE_CODES: u64 = 4_096;

/// What the witness search produced for one listed collection.
#[derive(Debug)]
pub enum EnumOutcome {
    Witness(RefutationWitness),
    /// No sampled position closed the inequality chain within the window.
    Exhausted { probed: u64 },
}

/// The diagonal collection: a membership test plus, per listed
/// collection, a point separating the two, or a bounded report.
pub struct AntiEnum {
    pub spec: Semidecider<NbarQuery>,
    pub outcomes: Vec<EnumOutcome>,
    /// Per collection, the sampled finite members in increasing order.
    pub tables: Vec<Vec<u64>>,
}

/// `f(k)`: one past the largest `k`-th sample among the first `k+1`
/// sequences (all of them once the list is exhausted). `None` when some
/// required sequence was not sampled that far.
fn growth(tables: &[Vec<u64>], k: u64) -> Option<u64> {
    let hi = (tables.len() as u64 - 1).min(k);
    let mut best = 0;
    for table in &tables[..=hi as usize] {
        best = best.max(*table.get(k as usize)?);
    }
    Some(best + 1)
}

/// Builds the diagonal over the listed collections. Each entry presents a
/// collection of extended naturals as a staged set of name codes; it must
/// admit the canonical name of the infinite point within `budget`, and its
/// finite members are sampled through the canonical dense names of the
/// value window at the same budget. The witness search then walks each
/// sample sequence looking for a position whose value's settled least
/// index dominates both the position and the sequence number; the first
/// such value lies in the listed collection but provably below the
/// diagonal's growth gate.
pub fn anti_enumeration(e_list: &[StagedSet], budget: u64) -> AntiEnum {
    assert!(!e_list.is_empty(), "need at least one listed collection");
    let inf_code = infinity_name().code;
    let mut tables: Vec<Vec<u64>> = Vec::new();
    for (i, gate) in e_list.iter().enumerate() {
        assert!(
            gate.first_stage(&inf_code, budget).is_some(),
            "collection {i} does not admit the infinite point within {budget}"
        );
        let ds = DenseSequence::new(Space::ExtendedNats, gate.clone());
        // The halving clock reaches only logarithmically many dense
        // indexes, so the table probes each candidate name directly under
        // the stage budget instead of waiting for the dovetail.
        let table: Vec<u64> = (0..=WINDOW)
            .filter(|v| gate.first_stage(&ds.member(2 * v), budget).is_some())
            .collect();
        tables.push(table);
    }

    let outcomes = tables
        .iter()
        .enumerate()
        .map(|(i, table)| witness_for(i as u64, table, &tables))
        .collect();

    let tables_rc = Rc::new(tables.clone());
    let spec = Semidecider::new("nbar-bounded", move |q: &NbarQuery, run_budget: u64| {
        let (m, mut feed) = match q {
            NbarQuery::K(kn) => (kn.bound.value, NbarFeed::stream(&kn.name)),
            // Any least-index bound derivable from a code length sits far
            // beyond the sampling window, so bare codes get no shortcut.
            NbarQuery::Markov(mn) => (u64::MAX, NbarFeed::domain(&mn.code)),
        };
        let gate = growth(&tables_rc, m);
        let mut s = 1u64;
        let mut pinned: Option<u64> = None;
        loop {
            for c in feed.poll(s.min(STREAM_CAP)) {
                let v = if c % 2 == 1 { (c - 1) / 2 } else { c / 2 };
                // Revealed at or past the gate for the carried bound: the
                // point dominates its own growth value.
                if gate.is_some_and(|g| v >= g) {
                    return Verdict::Accepted { stage: s };
                }
                if c % 2 == 0 {
                    pinned = Some(v);
                }
            }
            if let Some(v) = pinned {
                let fired = c_upper(&Nat::small(v), s)
                    .and_then(|c| growth(&tables_rc, c))
                    .is_some_and(|g| g <= v);
                if fired {
                    return Verdict::Accepted { stage: s };
                }
            }
            if s >= run_budget {
                return Verdict::NotYet { budget: run_budget };
            }
            s = (s * 2).min(run_budget);
        }
    });

    AntiEnum {
        spec,
        outcomes,
        tables,
    }
}

/// Walks sequence `i` for a position `k` whose sample `x` has settled
/// least index at least `max(k, i)`; then `f(C(x))` exceeds `x` while `x`
/// sits in collection `i` by construction.
fn witness_for(i: u64, table: &[u64], tables: &[Vec<u64>]) -> EnumOutcome {
    for (k, &x) in table.iter().enumerate() {
        let report = exact_oracle(
            ComplexityKind::MinIndex,
            &Target::Value(Nat::small(x)),
            ORACLE_CODES,
            ORACLE_FUEL,
        );
        let Some(c) = report.stable_value() else {
            continue;
        };
        if c < (k as u64).max(i) {
            continue;
        }
        let Some(g) = growth(tables, c) else {
            continue;
        };
        if g > x {
            let mut w = RefutationWitness {
                violated: format!(
                    "collection {i} and the diagonal disagree at {x}: listed member, growth gate {g} stays above it"
                ),
                transcript: Vec::new(),
            };
            w.note("collection", i);
            w.note("sample position", k);
            w.note("witness value", x);
            w.note("settled least index", c);
            w.note("growth at that index", g);
            return EnumOutcome::Witness(w);
        }
    }
    EnumOutcome::Exhausted {
        probed: table.len() as u64,
    }
}
