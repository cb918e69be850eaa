//! Difference hierarchies out of nested staged sets.
//!
//! A chain is a list of staged sets, each stage-wise contained in the one
//! before it. Every chain member watches all levels for its own code: it
//! starts out with the bounded halting domain of its first slot, and each
//! time its code is detected one level deeper it freezes what it has and
//! switches to the next slot, ending with the final program once every
//! level has fired. Scanning all parameters then yields one effective
//! open set per level, nested like the chain, and the alternating
//! difference of those opens is the set the chain describes.

use std::rc::Rc;

use thiserror::Error;

use crate::complexity::{index_bound, ComplexityKind};
use crate::lambda::{compile_fn, e, CompiledFn, Expr};
use crate::library;
use crate::nat::Nat;
use crate::recursion::{recursive_family, RecursiveFamily};
use crate::spaces::{power_index_of_set, Point, Space};
use crate::stage::StagedSet;
use crate::term::Term;

use super::{
    dovetail_reach, pad_depth2_guard, shape_param, spin, stall, StageCache, StagedOpenSet,
};

#[derive(Debug, Error, PartialEq)]
pub enum ChainError {
    #[error("a chain needs at least one level")]
    Empty,
    #[error(
        "chain is not stage-wise nested: probe {probe} is in level {} but not level \
         {level} at stage {stage}",
        .level + 1
    )]
    NotNested {
        level: usize,
        probe: String,
        stage: u64,
    },
}

/// The right-nested parameter packing one slot program per level plus the
/// final program.
pub fn chain_param(slots: &[Nat], b: &Nat) -> Nat {
    let mut acc = b.clone();
    for s in slots.iter().rev() {
        acc = Nat::pair(s, &acc);
    }
    acc
}

/// Inverse of `chain_param` on the slot part, used to read scanned
/// candidates as tuples.
fn decode_slots(v: &Nat, levels: usize) -> Vec<Nat> {
    let mut out = Vec::with_capacity(levels);
    let mut cur = v.clone();
    for _ in 0..levels - 1 {
        let (h, t) = cur.unpair();
        out.push(h);
        cur = t;
    }
    out.push(cur);
    out
}

/// The case table with one watch level per chain set. Level `i` searches
/// for the least stage at which either the watched set contains `q` or
/// the input has entered the bounded halting domain of slot `i`; a domain
/// hit halts, a detection falls through to the next level, and the last
/// level defers to running `b`. The level-0 binders keep the same names
/// as the single-level table so a one-link chain compiles to the very
/// same code.
fn chain_body(q: &Expr, slots: &[Expr], b: &Expr, m: &Expr, pres: &[Rc<Term>]) -> Expr {
    assert_eq!(slots.len(), pres.len());
    let le = library::le().term;
    let sim = library::step_eval().term;
    let mut acc = e::let_("r", e::apply(b.clone(), m.clone()), e::k(0));
    for i in (0..slots.len()).rev() {
        let detect = |t: Expr| e::raw(pres[i].clone(), e::pair(q.clone(), t));
        let a = &slots[i];
        // 0 exactly when m <= t and slot i halts on m within t steps.
        let wa_stop = |t: Expr| {
            e::if0(
                e::raw(le.clone(), e::pair(m.clone(), t.clone())),
                e::k(1),
                e::if0(
                    e::raw(sim.clone(), e::pair(a.clone(), e::pair(m.clone(), t))),
                    e::k(1),
                    e::k(0),
                ),
            )
        };
        let (tn, cn) = if i == 0 {
            ("t".to_string(), "T".to_string())
        } else {
            (format!("t{i}"), format!("T{i}"))
        };
        acc = e::let_(
            &cn,
            e::mu_min(
                &tn,
                e::if0(detect(e::var(&tn)), wa_stop(e::var(&tn)), e::k(0)),
            ),
            e::if0(
                detect(e::var(&cn)),
                e::k(0),
                e::if0(wa_stop(e::var(&cn)), e::k(0), acc),
            ),
        );
    }
    acc
}

/// A recursive family watching a whole chain.
#[derive(Debug)]
pub struct NceFamily {
    pub family: RecursiveFamily,
    pub chain: Vec<StagedSet>,
}

impl NceFamily {
    pub fn levels(&self) -> usize {
        self.chain.len()
    }

    /// Member code for the given slot programs and final program.
    pub fn member(&self, slots: &[Nat], b: &Nat) -> Nat {
        assert_eq!(slots.len(), self.chain.len(), "one slot per level");
        self.family.member(&chain_param(slots, b))
    }
}

/// Builds the family after checking stage-wise nesting on the given probe
/// grid: whenever a deeper level contains a probe at some stage, every
/// shallower level must contain it at that stage too.
pub fn nce_family(
    chain: &[StagedSet],
    probes: &[Nat],
    probe_stages: &[u64],
) -> Result<NceFamily, ChainError> {
    if chain.is_empty() {
        return Err(ChainError::Empty);
    }
    for level in 0..chain.len() - 1 {
        for probe in probes {
            for &stage in probe_stages {
                if chain[level + 1].contains_at(probe, stage)
                    && !chain[level].contains_at(probe, stage)
                {
                    return Err(ChainError::NotNested {
                        level,
                        probe: probe.display_compact(),
                        stage,
                    });
                }
            }
        }
    }
    let pres: Vec<CompiledFn> = chain.iter().map(|s| s.presentation()).collect();
    let pres_terms: Vec<Rc<Term>> = pres.iter().map(|p| p.term.clone()).collect();
    let q = e::fst(e::var("x"));
    let param = e::fst(e::snd(e::var("x")));
    let m = e::snd(e::snd(e::var("x")));
    let mut slots = Vec::with_capacity(chain.len());
    let mut rest = param;
    for _ in 0..chain.len() - 1 {
        slots.push(e::fst(rest.clone()));
        rest = e::snd(rest);
    }
    slots.push(e::fst(rest.clone()));
    let b = e::snd(rest);
    let body = chain_body(&q, &slots, &b, &m, &pres_terms);
    let compiled = compile_fn("x", &body);
    Ok(NceFamily {
        family: recursive_family(&compiled.term),
        chain: chain.to_vec(),
    })
}

/// Scan state shared by all levels of one chain scan.
struct ChainEngine {
    fam: NceFamily,
    pool: Vec<Vec<Nat>>,
    caches: Vec<StageCache>,
}

impl ChainEngine {
    fn tuple(&self, j: u64) -> Vec<Nat> {
        match self.pool.get(j as usize) {
            Some(t) => t.clone(),
            None => decode_slots(
                &Nat::small(j - self.pool.len() as u64),
                self.fam.levels(),
            ),
        }
    }

    /// Cones justified within clock budget `s` at the 1-based `level`:
    /// a candidate tuple fires once every member with a final program
    /// under the index bound has entered the watched set of that level,
    /// and contributes the union of its slot-domain views frozen at the
    /// per-level firing stages.
    fn emitted(&self, s: u64, k: u64, level: usize) -> Vec<Nat> {
        let b_cap = index_bound(ComplexityKind::MinIndex, k)
            .to_u64()
            .expect("index bound stays small for scans");
        let mut out = Vec::new();
        let mut j = 0u64;
        while let Some(t_max) = dovetail_reach(s, j) {
            let tuple = self.tuple(j);
            let mut cuts = vec![0u64; level];
            let mut all = true;
            'members: for b in 0..=b_cap {
                let member = self.fam.member(&tuple, &Nat::small(b));
                for lv in (0..level).rev() {
                    // Deepest level first: a miss there is the cheap
                    // common case and the shallower stages are needed
                    // anyway for the frozen views.
                    match self.caches[lv].first_stage(
                        (j, b),
                        &self.fam.chain[lv],
                        &member,
                        t_max,
                    ) {
                        Some(t) => cuts[lv] = cuts[lv].max(t),
                        None => {
                            all = false;
                            break 'members;
                        }
                    }
                }
            }
            if all {
                let mut els: Vec<u64> = Vec::new();
                for (lv, cut) in cuts.iter().enumerate() {
                    let w = StagedSet::program(&tuple[lv]).view(*cut);
                    els.extend(
                        w.iter()
                            .map(|v| v.to_u64().expect("view values fit in a word")),
                    );
                }
                els.sort_unstable();
                els.dedup();
                out.push(power_index_of_set(&els));
            }
            j += 1;
        }
        out
    }
}

/// One effective open set per chain level, nested like the chain. All
/// levels share one scan engine, so their firing stages agree.
pub fn nce_scan(fam: NceFamily, k: u64, pool: &[Vec<Nat>]) -> Vec<StagedOpenSet> {
    for tuple in pool {
        assert_eq!(tuple.len(), fam.levels(), "pool tuples match the chain");
    }
    let levels = fam.levels();
    let caches = (0..levels).map(|_| StageCache::new()).collect();
    let engine = Rc::new(ChainEngine {
        fam,
        pool: pool.to_vec(),
        caches,
    });
    (1..=levels)
        .map(|level| {
            let eng = engine.clone();
            StagedOpenSet::new(Space::PowerSet, move |s| eng.emitted(s, k, level))
        })
        .collect()
}

/// Membership in the alternating difference of nested opens: the point
/// belongs exactly when the deepest level containing it is odd, counting
/// levels from one.
pub fn difference_contains(
    levels: &[StagedOpenSet],
    p: &Point,
    stage: u64,
    probe: u64,
) -> bool {
    levels
        .iter()
        .rposition(|u| u.contains_point(p, stage, probe))
        .is_some_and(|i| i % 2 == 0)
}

/// Staged sets forming a padded chain: level `lv` of a `slots`-level
/// chain accepts the specialization codes whose slots 0 through `lv` are
/// all doubly padded, with the final program under `b_cap`. The checks
/// for level `lv` are a strict prefix of the checks for level `lv + 1`,
/// so the sets are stage-wise nested by construction.
pub fn padded_chain_set(slots: usize, level: usize, b_cap: u64, stall_steps: u64) -> StagedSet {
    assert!(level < slots);
    let proj = |i: usize| {
        let mut acc = e::var("p");
        for _ in 0..i {
            acc = e::snd(acc);
        }
        e::fst(acc)
    };
    let b_proj = {
        let mut acc = e::var("p");
        for _ in 0..slots {
            acc = e::snd(acc);
        }
        acc
    };
    let mut body = stall(stall_steps, e::k(0));
    for lv in (1..=level).rev() {
        body = pad_depth2_guard(proj(lv), body);
    }
    body = e::if0(e::predk(b_proj, b_cap), body, spin());
    body = pad_depth2_guard(proj(0), body);
    let full = e::let_("p", shape_param(e::var("x")), body);
    StagedSet::program(&compile_fn("x", &full).code)
}
