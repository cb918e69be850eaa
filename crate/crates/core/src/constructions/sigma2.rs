//! Point sets carved out by growing pair sequences.
//!
//! A pair sequence assigns to every index `n` and stage `s` a pair of
//! simple open sets `(U, V)` that only ever grow with the stage; the set
//! it describes holds the points avoiding every difference `U minus V` in
//! the limit. The builder below turns a single program into such a
//! sequence: even pairs pin the named point's filter to the program's
//! halting domain, and odd pairs gate the whole construction on auxiliary
//! staged evidence about the program itself.

use crate::machine::eval_code;
use crate::nat::Nat;
use crate::spaces::{point_in_basis, Point, Space};
use crate::stage::StagedSet;

/// The three shapes a pair component takes: nothing, one basis element,
/// or the whole space.
#[derive(Debug, Clone, PartialEq)]
pub enum SetDesc {
    Empty,
    Basis(Nat),
    Whole,
}

impl SetDesc {
    pub fn contains(&self, p: &Point, probe: u64) -> bool {
        match self {
            SetDesc::Empty => false,
            SetDesc::Basis(i) => point_in_basis(p, i, probe),
            SetDesc::Whole => true,
        }
    }

    /// Growth order: `Empty` below everything, `Whole` above everything,
    /// basis elements only comparable to themselves.
    fn le(&self, other: &SetDesc) -> bool {
        match (self, other) {
            (SetDesc::Empty, _) | (_, SetDesc::Whole) => true,
            (SetDesc::Basis(a), SetDesc::Basis(b)) => a == b,
            _ => false,
        }
    }
}

/// A staged sequence of set pairs. `pair_at(n, s)` is defined for
/// `n < 2 * levels` and each component is nondecreasing in `s`.
pub struct PairSeq {
    pub space: Space,
    pub levels: u64,
    pair_at: Box<dyn Fn(u64, u64) -> (SetDesc, SetDesc)>,
}

impl PairSeq {
    pub fn new(
        space: Space,
        levels: u64,
        pair_at: impl Fn(u64, u64) -> (SetDesc, SetDesc) + 'static,
    ) -> PairSeq {
        PairSeq {
            space,
            levels,
            pair_at: Box::new(pair_at),
        }
    }

    pub fn pair_at(&self, n: u64, stage: u64) -> (SetDesc, SetDesc) {
        assert!(n < 2 * self.levels, "pair index out of range");
        (self.pair_at)(n, stage)
    }

    /// Whether the point avoids every difference at this stage: for each
    /// pair, membership in `U` must come with membership in `V`.
    pub fn contains(&self, p: &Point, stage: u64, probe: u64) -> bool {
        (0..2 * self.levels).all(|n| {
            let (u, v) = self.pair_at(n, stage);
            !u.contains(p, probe) || v.contains(p, probe)
        })
    }

    /// Checks that both components only grow along the given stages.
    pub fn monotone_on(&self, stages: &[u64]) -> bool {
        (0..2 * self.levels).all(|n| {
            stages.windows(2).all(|w| {
                let (u0, v0) = self.pair_at(n, w[0]);
                let (u1, v1) = self.pair_at(n, w[1]);
                u0.le(&u1) && v0.le(&v1)
            })
        })
    }
}

/// Builds the pair sequence describing the points whose neighborhood
/// filter, restricted to basis indices below `levels`, is exactly the
/// halting domain of `i`. Even pair `2m` starts as `(B_m, empty)` and
/// relaxes to `(whole, B_m)` once `m` enters the domain; odd pair
/// `2m + 1` starts as `(whole, empty)` and empties out once both
/// auxiliary sets at its level contain `i`.
pub fn sigma2_builder(
    i: &Nat,
    levels: u64,
    space: Space,
    p_levels: &[StagedSet],
    q_levels: &[StagedSet],
) -> PairSeq {
    assert_eq!(p_levels.len(), q_levels.len(), "auxiliary levels pair up");
    let i = i.clone();
    let p_levels = p_levels.to_vec();
    let q_levels = q_levels.to_vec();
    PairSeq::new(space, levels, move |n, s| {
        let m = n / 2;
        if n % 2 == 0 {
            if eval_code(&i, &Nat::small(m), s).halted() {
                (SetDesc::Whole, SetDesc::Basis(Nat::small(m)))
            } else {
                (SetDesc::Basis(Nat::small(m)), SetDesc::Empty)
            }
        } else {
            match (p_levels.get(m as usize), q_levels.get(m as usize)) {
                (Some(p), Some(q)) if !(p.contains_at(&i, s) && q.contains_at(&i, s)) => {
                    (SetDesc::Whole, SetDesc::Empty)
                }
                _ => (SetDesc::Whole, SetDesc::Whole),
            }
        }
    })
}
