//! Dense sequences of curated points filtered by a staged index set.
//!
//! Every basis element has a canonical inhabitant, so listing those
//! inhabitants in basis order gives a dense sequence for the whole space.
//! The sequence below additionally looks up each inhabitant's single-code
//! name in a staged set, and only reveals the inhabitants whose names
//! have appeared: the result enumerates a dense subset of whatever point
//! set the staged names describe, and emptiness of that set shows up as
//! the scan never firing.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::nat::Nat;
use crate::spaces::{
    baire_seq_of, cantor_string_of, markov_name_of, point_in_basis, power_set_of_index,
    Point, Space,
};
use crate::stage::StagedSet;

use super::{dovetail_reach, dovetail_stage, Semidecider, StageCache, Verdict};

/// The canonical inhabitant of basis element `a`: the point that extends
/// the basis constraint in the laziest way. It lies in `B_a` for every
/// space and every index.
pub fn canonical_dense(space: Space, a: u64) -> Point {
    let i = Nat::small(a);
    match space {
        Space::Sierpinski => Point::SierpTop,
        Space::ExtendedNats => Point::NbarFinite(a / 2),
        Space::Cantor => Point::CantorTail {
            prefix: cantor_string_of(&i).expect("small index"),
            tail: false,
        },
        Space::Baire => Point::BaireTail {
            prefix: baire_seq_of(&i)
                .expect("small index")
                .iter()
                .map(|v| v.to_u64().expect("small entries"))
                .collect(),
            tail: 0,
        },
        Space::PowerSet => Point::power_finite(power_set_of_index(&i).expect("small index")),
    }
}

/// The basis-ordered dense sequence, gated by a staged set of name codes.
pub struct DenseSequence {
    pub space: Space,
    i_set: StagedSet,
    names: RefCell<HashMap<u64, Nat>>,
    cache: StageCache,
}

impl DenseSequence {
    pub fn new(space: Space, i_set: StagedSet) -> DenseSequence {
        DenseSequence {
            space,
            i_set,
            names: RefCell::new(HashMap::new()),
            cache: StageCache::new(),
        }
    }

    /// The single-code name of the canonical inhabitant of `B_a`.
    pub fn member(&self, a: u64) -> Nat {
        if let Some(code) = self.names.borrow().get(&a) {
            return code.clone();
        }
        let code = markov_name_of(&canonical_dense(self.space, a)).code;
        self.names.borrow_mut().insert(a, code.clone());
        code
    }

    /// Basis indices whose inhabitants have been revealed within the
    /// clock budget: index `a` fires once its name is seen in the staged
    /// set within the fuel the dovetail grants position `a`.
    pub fn emitted(&self, s: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut a = 0u64;
        while let Some(t_max) = dovetail_reach(s, a) {
            let name = self.member(a);
            if self
                .cache
                .first_stage((a, 0), &self.i_set, &name, t_max)
                .is_some()
            {
                out.push(a);
            }
            a += 1;
        }
        out
    }

    /// The revealed points themselves.
    pub fn points(&self, s: u64) -> Vec<Point> {
        self.emitted(s)
            .into_iter()
            .map(|a| canonical_dense(self.space, a))
            .collect()
    }

    /// Whether some revealed point lies in the given basis element.
    pub fn covers(&self, basis: &Nat, s: u64, probe: u64) -> bool {
        self.points(s)
            .iter()
            .any(|p| point_in_basis(p, basis, probe))
    }

    /// The exact clock value at which the first index fires within the
    /// budget, if any.
    fn first_firing(&self, budget: u64) -> Option<u64> {
        let mut best: Option<u64> = None;
        let mut a = 0u64;
        while let Some(t_max) = dovetail_reach(budget, a) {
            if let Some(t) = self.cache.first_stage((a, 0), &self.i_set, &self.member(a), t_max)
            {
                let clock = dovetail_stage(a, t.max(1));
                best = Some(best.map_or(clock, |b| b.min(clock)));
            }
            a += 1;
        }
        best.filter(|c| *c <= budget)
    }
}

/// Semidecides nonemptiness of the gated sequence: accept at the first
/// clock value where some inhabitant is revealed.
pub fn dense_nonempty(seq: std::rc::Rc<DenseSequence>) -> Semidecider<()> {
    Semidecider::new("dense-scan", move |(), budget| {
        match seq.first_firing(budget) {
            Some(stage) => Verdict::Accepted { stage },
            None => Verdict::NotYet { budget },
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::rc::Rc;

    use crate::term::{encode, Term};

    fn full_gate() -> StagedSet {
        StagedSet::program(&encode(&Term::zero()))
    }

    #[test]
    fn canonical_inhabitants_live_in_their_basis_elements() {
        for space in Space::ALL {
            for a in 0..12u64 {
                let p = canonical_dense(space, a);
                assert!(
                    point_in_basis(&p, &Nat::small(a), 10_000),
                    "space {} basis {a}",
                    space.name()
                );
            }
        }
    }

    #[test]
    fn an_open_gate_reveals_the_basis_order_prefix() {
        let seq = DenseSequence::new(Space::ExtendedNats, full_gate());
        assert_eq!(seq.emitted(64), vec![0, 1, 2, 3, 4, 5, 6]);
        let sd = dense_nonempty(Rc::new(seq));
        assert_eq!(sd.run(&(), 100), Verdict::Accepted { stage: 1 });
    }

    #[test]
    fn density_holds_on_probe_basis_elements() {
        for space in [Space::ExtendedNats, Space::Cantor, Space::Baire] {
            let seq = DenseSequence::new(space, full_gate());
            for b in 0..10u64 {
                assert!(
                    seq.covers(&Nat::small(b), 2_000, 10_000),
                    "space {} basis {b}",
                    space.name()
                );
            }
        }
    }

    #[test]
    fn a_closed_gate_never_fires() {
        let seq = DenseSequence::new(Space::ExtendedNats, StagedSet::Empty);
        assert!(seq.emitted(100_000).is_empty());
        let sd = dense_nonempty(Rc::new(seq));
        assert_eq!(sd.run(&(), 100_000), Verdict::NotYet { budget: 100_000 });
    }

    #[test]
    fn a_curated_gate_reveals_exactly_the_matching_inhabitants() {
        // Gate holding only the name of the point 2: basis elements {2}
        // and [2, inf] share that canonical inhabitant, everything else
        // stays hidden.
        let name2 = markov_name_of(&Point::NbarFinite(2)).code;
        let gate = StagedSet::explicit(vec![(name2.clone(), 0)]);
        let seq = DenseSequence::new(Space::ExtendedNats, gate);
        assert_eq!(seq.emitted(20_000), vec![4, 5]);
        for p in seq.points(20_000) {
            assert_eq!(p, Point::NbarFinite(2));
            assert_eq!(markov_name_of(&p).code, name2);
        }
        assert!(seq.covers(&Nat::small(4), 20_000, 1_000));
        assert!(seq.covers(&Nat::small(3), 20_000, 1_000)); // [1, inf] contains 2
        assert!(!seq.covers(&Nat::small(2), 20_000, 1_000)); // {1} does not
    }
}
