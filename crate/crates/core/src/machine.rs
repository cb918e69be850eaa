//! The evaluator and its exact cost model.
//!
//! Programs run on an explicit stack of continuation frames, so evaluation
//! depth is bounded by memory rather than the thread stack, and every run is
//! charged a deterministic number of steps:
//!
//!   - 1 step each time a constructor is dispatched on an argument;
//!   - 1 extra step at the start of every `Mu` iteration, including y = 0;
//!   - `Univ` costs its own dispatch step only; decoding and unpairing are
//!     free, so running code `e` through `Univ` costs exactly 1 more step
//!     than running `e` directly.
//!
//! Consequences worth pinning: `smn(e, x)` adds exactly 4 steps, `pad(e)`
//! adds exactly 2, and halting is monotone in fuel with an exact threshold
//! at the step count reported by `Halted`.

use std::rc::Rc;

use crate::nat::Nat;
use crate::term::{decode, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalOutcome {
    Halted { value: Nat, steps: u64 },
    OutOfFuel,
}

impl EvalOutcome {
    pub fn value(&self) -> Option<&Nat> {
        match self {
            EvalOutcome::Halted { value, .. } => Some(value),
            EvalOutcome::OutOfFuel => None,
        }
    }

    pub fn halted(&self) -> bool {
        matches!(self, EvalOutcome::Halted { .. })
    }

    pub fn steps(&self) -> Option<u64> {
        match self {
            EvalOutcome::Halted { steps, .. } => Some(*steps),
            EvalOutcome::OutOfFuel => None,
        }
    }
}

enum Kont {
    /// Waiting on the left component; holds the right term and the argument.
    PairRight(Rc<Term>, Nat),
    /// Waiting on the right component; holds the finished left value.
    PairLeft(Nat),
    /// Waiting on the inner result of a composition; holds the outer term.
    CompOuter(Rc<Term>),
    /// Waiting on the scrutinee; holds both branches and the argument.
    If(Rc<Term>, Rc<Term>, Nat),
    /// Waiting on the body value of a search; holds body, argument, and the
    /// candidate currently under test.
    MuIter(Rc<Term>, Nat, Nat),
}

/// Runs `t` on `x` with the given fuel. Deterministic: equal inputs give
/// equal outcomes, including the exact step count.
pub fn eval(t: &Rc<Term>, x: &Nat, fuel: u64) -> EvalOutcome {
    let mut steps: u64 = 0;
    let mut stack: Vec<Kont> = Vec::new();
    let mut term = t.clone();
    let mut arg = x.clone();

    'eval: loop {
        steps += 1;
        if steps > fuel {
            return EvalOutcome::OutOfFuel;
        }
        let mut value = match &*term {
            Term::Zero => Nat::zero(),
            Term::Succ => arg.succ(),
            Term::Pred => arg.pred(),
            Term::Id => arg.clone(),
            Term::Fst => arg.unpair().0,
            Term::Snd => arg.unpair().1,
            Term::Lit(n) => n.clone(),
            Term::Univ => {
                let (code, inner) = arg.unpair();
                term = decode(&code);
                arg = inner;
                continue 'eval;
            }
            Term::Comp(f, g) => {
                stack.push(Kont::CompOuter(f.clone()));
                term = g.clone();
                continue 'eval;
            }
            Term::Pair(a, b) => {
                stack.push(Kont::PairRight(b.clone(), arg.clone()));
                term = a.clone();
                continue 'eval;
            }
            Term::If0(c, a, b) => {
                stack.push(Kont::If(a.clone(), b.clone(), arg.clone()));
                term = c.clone();
                continue 'eval;
            }
            Term::Mu(body) => {
                steps += 1;
                if steps > fuel {
                    return EvalOutcome::OutOfFuel;
                }
                let y = Nat::zero();
                stack.push(Kont::MuIter(body.clone(), arg.clone(), y.clone()));
                let probe = Nat::pair(&arg, &y);
                term = body.clone();
                arg = probe;
                continue 'eval;
            }
        };

        loop {
            match stack.pop() {
                None => return EvalOutcome::Halted { value, steps },
                Some(Kont::CompOuter(f)) => {
                    term = f;
                    arg = value;
                    continue 'eval;
                }
                Some(Kont::PairRight(b, saved)) => {
                    stack.push(Kont::PairLeft(value));
                    term = b;
                    arg = saved;
                    continue 'eval;
                }
                Some(Kont::PairLeft(left)) => {
                    value = Nat::pair(&left, &value);
                }
                Some(Kont::If(a, b, saved)) => {
                    term = if value.is_zero() { a } else { b };
                    arg = saved;
                    continue 'eval;
                }
                Some(Kont::MuIter(body, saved, y)) => {
                    if value.is_zero() {
                        value = y;
                    } else {
                        steps += 1;
                        if steps > fuel {
                            return EvalOutcome::OutOfFuel;
                        }
                        let y1 = y.succ();
                        let probe = Nat::pair(&saved, &y1);
                        term = body.clone();
                        stack.push(Kont::MuIter(body, saved, y1));
                        arg = probe;
                        continue 'eval;
                    }
                }
            }
        }
    }
}

/// Runs the program with the given code.
pub fn eval_code(e: &Nat, x: &Nat, fuel: u64) -> EvalOutcome {
    eval(&decode(e), x, fuel)
}

pub fn halts_code(e: &Nat, x: &Nat, fuel: u64) -> bool {
    eval_code(e, x, fuel).halted()
}
