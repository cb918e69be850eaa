//! Staged constructions over the toy numbering: effective open sets built
//! stage by stage, semidecision procedures with explicit budgets, oracle
//! interfaces, and refutation harnesses. Everything here is a pure
//! function of its inputs and a stage number, so runs replay exactly.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::Serialize;

use crate::lambda::{compile_fn, e, Expr};
use crate::machine::{eval_code, EvalOutcome};
use crate::nat::Nat;
use crate::spaces::{Point, Space, Type2Name};
use crate::stage::StagedSet;
use crate::term::Term;

mod antienum;
mod chain;
mod dense;
mod extension;
mod friedberg;
mod order;
mod sigma2;

pub use antienum::{anti_enumeration, AntiEnum, EnumOutcome};
pub use chain::{
    chain_param, difference_contains, nce_family, nce_scan, padded_chain_set, ChainError,
    NceFamily,
};
pub use dense::{canonical_dense, dense_nonempty, DenseSequence};
pub use extension::{
    extension_reference, k_cone_search, lemma_ext_family, lemma_ext_uk,
    markov_to_k_semidecider, pi02_hull, ExtensionFamily, KQuery,
};
pub use friedberg::{
    friedberg_cantor, notsigma2_semidecider, smallest_zeros_slack, FriedbergRun, NotSigma2Run,
};
pub use order::{friedberg_order, nbar_friedberg, ComputableOrder, NbarQuery};
pub use sigma2::{sigma2_builder, PairSeq, SetDesc};

// ---------------------------------------------------------------------
// Domain types.

/// An effective open set presented stage by stage: `emitted(s)` is the
/// finite list of basis codes justified so far, nondecreasing in `s`, and
/// the union over all stages is the set being enumerated.
pub struct StagedOpenSet {
    pub space: Space,
    emit: Box<dyn Fn(u64) -> Vec<Nat>>,
}

impl StagedOpenSet {
    pub fn new(space: Space, emit: impl Fn(u64) -> Vec<Nat> + 'static) -> StagedOpenSet {
        StagedOpenSet {
            space,
            emit: Box::new(emit),
        }
    }

    /// Basis codes emitted by stage `s`, sorted and deduplicated.
    pub fn emitted(&self, stage: u64) -> Vec<Nat> {
        let mut out = (self.emit)(stage);
        out.sort();
        out.dedup();
        out
    }

    /// Whether the point sits in some emitted basis element, probing
    /// basis membership up to `probe` steps.
    pub fn contains_point(&self, p: &Point, stage: u64, probe: u64) -> bool {
        self.emitted(stage)
            .iter()
            .any(|i| crate::spaces::point_in_basis(p, i, probe))
    }
}

/// Outcome of a budgeted semidecision run. Acceptance records the stage
/// at which the evidence appeared and is never revoked at larger budgets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Accepted { stage: u64 },
    NotYet { budget: u64 },
}

impl Verdict {
    pub fn accepted(&self) -> bool {
        matches!(self, Verdict::Accepted { .. })
    }

    pub fn stage(&self) -> Option<u64> {
        match self {
            Verdict::Accepted { stage } => Some(*stage),
            Verdict::NotYet { .. } => None,
        }
    }
}

/// A semidecision procedure: reads an input presentation and a budget,
/// answers `Accepted(stage)` or `NotYet`. The mode tag names what kind
/// of presentation the input is (stream, single code, code plus bound).
pub struct Semidecider<I> {
    pub mode: &'static str,
    run: Box<dyn Fn(&I, u64) -> Verdict>,
}

impl<I> Semidecider<I> {
    pub fn new(mode: &'static str, run: impl Fn(&I, u64) -> Verdict + 'static) -> Semidecider<I> {
        Semidecider {
            mode,
            run: Box::new(run),
        }
    }

    pub fn run(&self, input: &I, budget: u64) -> Verdict {
        (self.run)(input, budget)
    }
}

/// Incremental reader for a name of an extended natural. A stream name is
/// consumed position by position; a bare domain code is run on every basis
/// index under the clock instead, since a finite filter's stream would
/// block on positions it never fills.
pub(crate) enum NbarFeed {
    Stream { name: Type2Name, cursor: u64 },
    Domain { set: StagedSet, last: u64 },
}

impl NbarFeed {
    pub(crate) fn stream(name: &Type2Name) -> NbarFeed {
        NbarFeed::Stream {
            name: name.clone(),
            cursor: 0,
        }
    }

    pub(crate) fn domain(code: &Nat) -> NbarFeed {
        NbarFeed::Domain {
            set: StagedSet::program(code),
            last: 0,
        }
    }

    /// Basis codes newly visible at `clock`; clocks must not decrease
    /// across calls.
    pub(crate) fn poll(&mut self, clock: u64) -> Vec<u64> {
        match self {
            NbarFeed::Stream { name, cursor } => {
                let mut out = Vec::new();
                while *cursor < clock {
                    out.push(
                        name.nth(*cursor)
                            .to_u64()
                            .expect("basis codes of the extended naturals stay small"),
                    );
                    *cursor += 1;
                }
                out
            }
            NbarFeed::Domain { set, last } => {
                if clock <= *last {
                    return Vec::new();
                }
                *last = clock;
                set.view(clock).iter().filter_map(|v| v.to_u64()).collect()
            }
        }
    }
}

/// A transcript proving that a candidate procedure violated its contract:
/// replaying the recorded scenario reproduces the violation step for step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefutationWitness {
    pub violated: String,
    pub transcript: Vec<(String, String)>,
}

impl RefutationWitness {
    pub fn note(&mut self, label: &str, value: impl ToString) {
        self.transcript.push((label.to_string(), value.to_string()));
    }
}

/// Answers halting queries about self-application. The exact variant
/// carries pinned answers for a finite universe of codes; the bounded
/// variant runs the code on itself for `s` steps and reports whether it
/// halted, which under-approximates the true answers.
pub enum OracleIface {
    ExactOnUniverse { answers: Vec<(Nat, bool)> },
    StageBounded { s: u64 },
}

impl OracleIface {
    pub fn query(&self, code: &Nat) -> bool {
        match self {
            OracleIface::ExactOnUniverse { answers } => answers
                .iter()
                .find(|(c, _)| c == code)
                .map(|(_, v)| *v)
                .unwrap_or_else(|| panic!("oracle queried outside its universe")),
            OracleIface::StageBounded { s } => eval_code(code, code, *s).halted(),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            OracleIface::ExactOnUniverse { .. } => "exact-on-universe",
            OracleIface::StageBounded { .. } => "stage-bounded",
        }
    }
}

// ---------------------------------------------------------------------
// The dovetail schedule.
//
// Enumerations that search over all codes grant candidate `j` a fuel
// budget of `s >> j` at clock value `s`: the total fuel handed out is at
// most `2s`, so the clock really is a bound on elementary steps, every
// candidate's budget is unbounded in `s`, and the front of the scan gets
// fuel at full clock rate.

/// First clock value at which candidate `j` has been granted `t` steps.
pub fn dovetail_stage(j: u64, t: u64) -> u64 {
    if j >= 64 || t.leading_zeros() < j as u32 {
        return u64::MAX;
    }
    t << j
}

/// Fuel granted to candidate `j` within clock budget `s`, if any.
pub fn dovetail_reach(s: u64, j: u64) -> Option<u64> {
    if j >= 64 {
        return None;
    }
    match s >> j {
        0 => None,
        t => Some(t),
    }
}

/// The `j`-th candidate code of a scan: listed pool codes first, then the
/// naturals in order. Any enumeration of all codes is a legal scan order;
/// front-loading the pool only reschedules when each candidate is tried.
pub fn scan_candidate(pool: &[Nat], j: u64) -> Nat {
    pool.get(j as usize)
        .cloned()
        .unwrap_or_else(|| Nat::small(j - pool.len() as u64))
}

// ---------------------------------------------------------------------
// Padding-marked staged sets.
//
// Specialization produces codes of the shape comp(base, pair-of(lit p, id));
// the parameter p can be dug out of such a code with a few dozen machine
// steps no matter how large the base is. The sets below accept exactly
// the codes whose parameter wears a marker: an `a` part under at least
// two layers of padding (comp(id, .) wrappers). Scanned small codes can
// never collide with the marker, because a doubly padded value is at
// least in the millions, so membership is known entirely by construction.

/// Expression digging the specialization parameter out of `x`.
/// Produces garbage (that the guards then reject) on other shapes.
fn shape_param(x: Expr) -> Expr {
    // comp(u, v) encodes as pair(pair(u, v), 2) + 7 and the specialized
    // argument v as pair(lit p, 7) + 7 with lit p = pair(p, 0) + 7.
    let arg = e::snd(e::fst(e::predk(x, 7)));
    let lp = e::fst(e::predk(arg, 7));
    e::fst(e::predk(lp, 7))
}

fn spin() -> Expr {
    e::raw(Term::mu(Term::succ()), e::k(0))
}

/// Continue with `then` when the (small) value equals `v`, diverge
/// otherwise. Equality of a runtime value against a small constant is two
/// saturating subtractions, far cheaper than the general comparator.
fn eq_small_guard(x: Expr, v: u64, then: Expr) -> Expr {
    if v == 0 {
        return e::if0(x, then, spin());
    }
    e::if0(
        e::predk(x.clone(), v),
        e::if0(e::predk(x, v - 1), spin(), then),
        spin(),
    )
}

/// Guard: continue with `then` when `a` unwraps to a second padding
/// layer, diverge otherwise. pad(c) encodes as pair(pair(3, c), 2) + 7.
fn pad_depth2_guard(a: Expr, then: Expr) -> Expr {
    let inner = e::snd(e::fst(e::predk(a, 7)));
    let head = e::fst(e::fst(e::predk(inner, 7)));
    eq_small_guard(head, 3, then)
}

/// Burns a fixed number of steps so that membership is observed at a
/// controlled stage, late enough for the views taken at that stage to
/// have interesting content.
fn stall(steps: u64, then: Expr) -> Expr {
    if steps == 0 {
        then
    } else {
        e::let_("stall", e::predk(e::k(steps), steps), then)
    }
}

/// Members: specialization codes with parameter pair(a, b) where `a` is
/// doubly padded and `b <= b_cap`. Entry stage is the (small, uniform)
/// running time of the shape test plus the stall.
pub fn padded_param_set(b_cap: u64, stall_steps: u64) -> StagedSet {
    let body = e::let_(
        "p",
        shape_param(e::var("x")),
        pad_depth2_guard(
            e::fst(e::var("p")),
            e::if0(
                e::predk(e::snd(e::var("p")), b_cap),
                stall(stall_steps, e::k(0)),
                spin(),
            ),
        ),
    );
    StagedSet::program(&compile_fn("x", &body).code)
}

/// Members: specialization codes whose whole parameter is doubly padded.
pub fn padded_single_set(stall_steps: u64) -> StagedSet {
    let body = e::let_(
        "p",
        shape_param(e::var("x")),
        pad_depth2_guard(e::var("p"), stall(stall_steps, e::k(0))),
    );
    StagedSet::program(&compile_fn("x", &body).code)
}

/// Members: specialization codes with parameter pair(i, a), `a` doubly
/// padded and `i` drawn from the listed values. The allowed values must
/// be small for the chained constant comparisons to stay cheap.
pub fn indexed_padded_set(allowed: &[u64], stall_steps: u64) -> StagedSet {
    let mut check = spin();
    for i in allowed.iter().rev() {
        // i == v: both saturating differences vanish.
        let hit = stall(stall_steps, e::k(0));
        let ival = e::fst(e::var("p"));
        check = if *i == 0 {
            e::if0(ival, hit, check)
        } else {
            e::if0(
                e::predk(ival.clone(), *i),
                e::if0(e::predk(ival, *i - 1), check.clone(), hit),
                check,
            )
        };
    }
    let body = e::let_(
        "p",
        shape_param(e::var("x")),
        pad_depth2_guard(e::snd(e::var("p")), check),
    );
    StagedSet::program(&compile_fn("x", &body).code)
}

/// A program halting exactly on the listed small values, each within a
/// few dozen steps. Chained constant comparisons keep the halting times
/// far below marker detection stages, so views taken at detection see
/// the whole intended domain.
pub fn halts_on_smalls(values: &[u64]) -> Nat {
    let mut acc = spin();
    for v in values.iter().rev() {
        let x = e::var("x");
        acc = if *v == 0 {
            e::if0(x, e::k(0), acc)
        } else {
            e::if0(
                e::predk(x.clone(), *v),
                e::if0(e::predk(x, *v - 1), acc.clone(), e::k(0)),
                acc,
            )
        };
    }
    compile_fn("x", &acc).code
}

/// Wraps a code in `layers` layers of padding: same behavior, and the
/// result carries the marker the padded sets above look for.
pub fn padded_marker(code: &Nat, layers: u64) -> Nat {
    let mut out = code.clone();
    for _ in 0..layers {
        out = crate::term::pad(&out);
    }
    out
}

// ---------------------------------------------------------------------
// Shared helpers.

/// Rust-side mirror of `shape_param`: the parameter of a specialization
/// code, when the code has that shape.
pub fn specialization_param(code: &Nat) -> Option<(Nat, Nat)> {
    let c = checked_unpad7(code)?;
    let (uv, tag) = c.unpair();
    if tag.to_u64() != Some(2) {
        return None;
    }
    let (_, arg) = uv.unpair();
    let g = checked_unpad7(&arg)?;
    let (lp, tag2) = g.unpair();
    if tag2.to_u64() != Some(7) {
        return None;
    }
    let inner = checked_unpad7(&lp)?;
    let (p, z) = inner.unpair();
    if !z.is_zero() {
        return None;
    }
    let (a, b) = p.unpair();
    Some((a, b))
}

fn checked_unpad7(n: &Nat) -> Option<Nat> {
    let mut out = n.clone();
    for _ in 0..7 {
        if out.is_zero() {
            return None;
        }
        out = out.pred();
    }
    Some(out)
}

/// First stages of a whole family slice: `first_stage` of each member
/// code within the fuel limit, memoized across growing limits.
pub struct StageCache {
    seen: RefCell<HashMap<(u64, u64), CacheEntry>>,
}

#[derive(Clone, Copy)]
enum CacheEntry {
    Found(u64),
    TriedUpTo(u64),
}

impl StageCache {
    pub fn new() -> StageCache {
        StageCache {
            seen: RefCell::new(HashMap::new()),
        }
    }

    /// `first_stage` of `code` in `set` under `limit`, recomputing only
    /// when a previous attempt used less fuel than is now available.
    pub fn first_stage(
        &self,
        key: (u64, u64),
        set: &StagedSet,
        code: &Nat,
        limit: u64,
    ) -> Option<u64> {
        match self.seen.borrow().get(&key) {
            Some(CacheEntry::Found(t)) => return Some(*t),
            Some(CacheEntry::TriedUpTo(l)) if *l >= limit => return None,
            _ => {}
        }
        let found = set.first_stage(code, limit);
        self.seen.borrow_mut().insert(
            key,
            match found {
                Some(t) => CacheEntry::Found(t),
                None => CacheEntry::TriedUpTo(limit),
            },
        );
        found
    }
}

impl Default for StageCache {
    fn default() -> Self {
        StageCache::new()
    }
}

/// Decodes a basis code into a human-readable label for traces.
pub fn basis_label(space: Space, i: &Nat) -> String {
    space.describe_basis(i)
}

/// The diverging program used wherever a branch must reject by looping.
pub fn diverging_code() -> Nat {
    crate::term::encode(&Term::mu(Term::succ()))
}

/// Evaluates a code as a total function on small inputs, growing fuel
/// until it halts; panics past the cap so misuse is loud.
pub fn eval_total(code: &Nat, x: &Nat) -> Nat {
    let mut fuel = 1 << 12;
    loop {
        match eval_code(code, x, fuel) {
            EvalOutcome::Halted { value, .. } => return value,
            EvalOutcome::OutOfFuel => {
                assert!(fuel < (1 << 40), "supposedly total code never halted");
                fuel *= 8;
            }
        }
    }
}

/// A compiled expression applying `code` to the variable of a one-argument
/// function body; convenience for handwritten reference programs.
pub fn apply_code(code: &Nat, x: Expr) -> Expr {
    e::apply(e::kn(code), x)
}
