//! Orders carved out of watched sets, and the membership test they gate
//! on the extended naturals.
//!
//! The scan side turns a watched set into a threshold table: for each
//! complexity bound `k` it waits for a cone of the infinite point to fire
//! and records how far out along the tail sets that cone starts. A point
//! beyond threshold `p(k)` whose complexity is within `k` then lies in
//! the watched collection, so the step order `h(n) = least i with
//! p(i) > n` keeps every sufficiently compressible point inside it. The
//! test side goes the other way: given an order and a point with a known
//! complexity bound, membership in the compressibility region is accepted
//! either because the point is revealed past where the order clears the
//! bound, or because a staged length bound drops under the order's value
//! at the revealed point.

use crate::complexity::k_upper;
use crate::lambda::{compile_fn, e, CompiledFn};
use crate::machine::eval_code;
use crate::nat::Nat;
use crate::spaces::{KName, MarkovName, Point, Type2Name};
use crate::stage::StagedSet;

use super::extension::{k_cone_search, KQuery};
use super::{NbarFeed, Semidecider, Verdict};

/// A nondecreasing step function behind a compiled index, together with
/// the threshold table it was built from.
pub struct ComputableOrder {
    pub h: CompiledFn,
    /// Position `k` holds the tail cutoff found for bound `k`.
    pub p: Vec<u64>,
    /// Set when some bound's scan exhausted its budget; the table is
    /// truncated at the first stalled bound.
    pub diagnostic: Option<String>,
}

impl ComputableOrder {
    /// Host-side value: the number of thresholds at or below `n`, which
    /// for a nondecreasing table is the least position whose threshold
    /// exceeds `n`.
    pub fn value(&self, n: u64) -> u64 {
        self.p.iter().filter(|&&t| t <= n).count() as u64
    }
}

/// The threshold table as a program: the least position whose cutoff
/// exceeds the input, read off a chain of constant comparisons.
/// Thresholds of zero can never exceed the input and drop out.
fn compile_order(p: &[u64]) -> CompiledFn {
    let mut body = e::k(p.len() as u64);
    for (i, &t) in p.iter().enumerate().rev() {
        if t == 0 {
            continue;
        }
        assert!(t <= 512, "cutoff {t} too large to bake into a comparison chain");
        // n monus (t - 1) = 0 exactly when n < t.
        body = e::if0(e::predk(e::var("n"), t - 1), e::k(i as u64), body);
    }
    compile_fn("n", &body)
}

/// Scans the watched set for cones of the infinite point at every bound
/// up to `k_max` and turns the cone cutoffs into a nondecreasing step
/// order. A cone that fired for bound `k` certifies that every point from
/// its cutoff on with complexity within `k` is in the watched collection,
/// which is exactly the containment the returned order promises. A bound
/// whose scan exhausts `budget` stops the table with a diagnostic; that
/// is the observable shape of the infinite point not being a member.
pub fn friedberg_order(
    i_set: &StagedSet,
    pool: &[Nat],
    k_max: u64,
    budget: u64,
) -> ComputableOrder {
    let infinity = Type2Name::curated(&Point::NbarInfinity);
    let mut p: Vec<u64> = Vec::new();
    let mut diagnostic = None;
    for k in 0..=k_max {
        let q = KQuery {
            k,
            name: infinity.clone(),
        };
        match k_cone_search(i_set, pool, &q, budget) {
            Some((els, _)) => {
                // Cones the infinite point's stream contains consist of
                // tail-set codes; the cone starts where the farthest one
                // does.
                let far = els
                    .iter()
                    .filter(|c| *c % 2 == 1)
                    .map(|c| (c - 1) / 2)
                    .max()
                    .unwrap_or(0);
                let floor = p.last().copied().unwrap_or(0);
                p.push((far + 1).max(floor));
            }
            None => {
                diagnostic = Some(format!(
                    "no cone of the infinite point fired for bound {k} within clock {budget}"
                ));
                break;
            }
        }
    }
    ComputableOrder {
        h: compile_order(&p),
        p,
        diagnostic,
    }
}

/// A point of the extended naturals handed to the membership test either
/// with an explicit complexity bound or as a bare domain code the bound
/// is derived from.
#[derive(Debug, Clone)]
pub enum NbarQuery {
    K(KName),
    Markov(MarkovName),
}

/// Slack covering the uniform cost of turning a halting-domain code into
/// an output program for the point it names; the tests check it against
/// measured length bounds on the probe points.
const INDEX_BOUND_SLACK: u64 = 64;

/// Fuel for evaluating the order itself; orders are comparison chains or
/// similar shallow programs, far below this.
const ORDER_FUEL: u64 = 1 << 20;

/// How far the order is probed for totality, monotonicity and for
/// clearing the complexity bound.
const PROBE_MAX: u64 = 4096;

/// Positions of the name stream read per run.
const STREAM_CAP: u64 = 4096;

/// Membership test for the compressibility region of the order `h`: the
/// points whose shortest-program length stays under the order's value.
///
/// Each query carries a complexity bound `m` for its point, explicit in
/// the bounded variant and derived from the domain code's length in the
/// bare variant. Since `h` is an order, any point at or past
/// `N = least n with h(n) > m` is in the region outright, so a revealed
/// tail set starting there, or a revealed singleton there, accepts. A
/// singleton revealed below `N` pins the point to a concrete value `v`,
/// and acceptance waits for a staged length bound on `v` to drop below
/// `h(v)`. The order must be total, nondecreasing, and clear `m` within
/// the probe window.
pub fn nbar_friedberg(h: &Nat) -> Semidecider<NbarQuery> {
    let h = h.clone();
    Semidecider::new("nbar-friedberg", move |q: &NbarQuery, budget: u64| {
        let h_at = |n: u64| -> u64 {
            eval_code(&h, &Nat::small(n), ORDER_FUEL)
                .value()
                .and_then(|v| v.to_u64())
                .expect("order index must be total with small values on the probe window")
        };
        let (m, mut feed) = match q {
            NbarQuery::K(kn) => (kn.bound.value, NbarFeed::stream(&kn.name)),
            // Codes are never materialized; the tracked length upper
            // bound is itself a sound complexity bound for the point.
            NbarQuery::Markov(mn) => (
                2 * mn.code.bits_upper_bound() + INDEX_BOUND_SLACK,
                NbarFeed::domain(&mn.code),
            ),
        };
        // The reveal route needs the first point where the order clears
        // the bound; when that sits beyond the probe window (loose derived
        // bounds), only the pinned-value route can accept.
        let mut prev = 0;
        let mut cut = None;
        for n in 0..=PROBE_MAX {
            let v = h_at(n);
            assert!(v >= prev, "order must be nondecreasing on the probe window");
            prev = v;
            if v > m {
                cut = Some(n);
                break;
            }
        }

        let mut s = 1u64;
        let mut pinned: Option<u64> = None;
        loop {
            for c in feed.poll(s.min(STREAM_CAP)) {
                let v = if c % 2 == 1 { (c - 1) / 2 } else { c / 2 };
                if cut.is_some_and(|n| v >= n) {
                    return Verdict::Accepted { stage: s };
                }
                if c % 2 == 0 {
                    pinned = Some(v);
                }
            }
            if let Some(v) = pinned {
                if k_upper(&Nat::small(v), s).is_some_and(|b| b < h_at(v)) {
                    return Verdict::Accepted { stage: s };
                }
            }
            if s >= budget {
                return Verdict::NotYet { budget };
            }
            s = (s * 2).min(budget);
        }
    })
}
