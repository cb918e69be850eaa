//! A small expression compiler targeting the term language.
//!
//! Hand-assembling nontrivial programs out of `Comp`/`Pair`/`If0` is
//! miserable, so constructions write `Expr` trees with named variables and
//! compile them. The scheme:
//!
//!   - environments are nested pairs grown on the right: binding a value v
//!     turns env into `pair(env, v)`, so variable i levels up is
//!     `Snd . Fst^i`;
//!   - `Mu` extends the environment exactly the same way the evaluator
//!     does (`pair(env, y)`), so a search binder is just another binding;
//!   - a compiled function receives `pair(base, input)` where `base` is the
//!     code of its own body for recursive functions and 0 otherwise.
//!
//! Recursion is self-application: for body G the function is
//! `Comp(G, Pair(Lit(code G), Id))`, and a recursive call on argument v
//! runs `Univ(pair(q, pair(q, v)))` where q is the stashed code of G. No
//! arithmetic ever touches the magnitude of the codes involved, only
//! pairing, so recursive functions cost the same no matter how large their
//! own code is.

use std::rc::Rc;

use crate::nat::Nat;
use crate::term::{encode, Term};

#[derive(Debug, Clone)]
pub enum Expr {
    /// Named variable bound by `Let`, `MuMin`, or the function argument.
    Var(String),
    /// Constant.
    Konst(Nat),
    Succ(Box<Expr>, u64),
    Pred(Box<Expr>, u64),
    Pair(Box<Expr>, Box<Expr>),
    Fst(Box<Expr>),
    Snd(Box<Expr>),
    /// `If0(c, a, b)`: a when c = 0, b otherwise.
    If0(Box<Expr>, Box<Expr>, Box<Expr>),
    Let(String, Box<Expr>, Box<Expr>),
    /// Least value of the bound variable making the body 0.
    MuMin(String, Box<Expr>),
    /// Recursive call; only valid under `compile_rec_fn`.
    SelfCall(Box<Expr>),
    /// Call a finished program by its code.
    CallCode(Nat, Box<Expr>),
    /// `Apply(f, x)`: run code f on x through the universal program.
    Apply(Box<Expr>, Box<Expr>),
    /// Post-compose a fixed unary term.
    Raw(Rc<Term>, Box<Expr>),
}

/// Builder shorthands; constructions read much better through these.
pub mod e {
    use super::*;

    pub fn var(n: &str) -> Expr {
        Expr::Var(n.to_string())
    }

    pub fn k(n: u64) -> Expr {
        Expr::Konst(Nat::small(n))
    }

    pub fn kn(n: &Nat) -> Expr {
        Expr::Konst(n.clone())
    }

    pub fn succ(x: Expr) -> Expr {
        Expr::Succ(Box::new(x), 1)
    }

    pub fn succk(x: Expr, k: u64) -> Expr {
        Expr::Succ(Box::new(x), k)
    }

    pub fn pred(x: Expr) -> Expr {
        Expr::Pred(Box::new(x), 1)
    }

    pub fn predk(x: Expr, k: u64) -> Expr {
        Expr::Pred(Box::new(x), k)
    }

    pub fn pair(a: Expr, b: Expr) -> Expr {
        Expr::Pair(Box::new(a), Box::new(b))
    }

    pub fn fst(x: Expr) -> Expr {
        Expr::Fst(Box::new(x))
    }

    pub fn snd(x: Expr) -> Expr {
        Expr::Snd(Box::new(x))
    }

    pub fn if0(c: Expr, a: Expr, b: Expr) -> Expr {
        Expr::If0(Box::new(c), Box::new(a), Box::new(b))
    }

    pub fn let_(n: &str, v: Expr, body: Expr) -> Expr {
        Expr::Let(n.to_string(), Box::new(v), Box::new(body))
    }

    pub fn mu_min(n: &str, body: Expr) -> Expr {
        Expr::MuMin(n.to_string(), Box::new(body))
    }

    pub fn self_call(x: Expr) -> Expr {
        Expr::SelfCall(Box::new(x))
    }

    pub fn call(code: &Nat, x: Expr) -> Expr {
        Expr::CallCode(code.clone(), Box::new(x))
    }

    pub fn apply(f: Expr, x: Expr) -> Expr {
        Expr::Apply(Box::new(f), Box::new(x))
    }

    pub fn raw(t: Rc<Term>, x: Expr) -> Expr {
        Expr::Raw(t, Box::new(x))
    }

    // Code-building arithmetic, mirroring the numbering. These compute the
    // code of a composite program from component code values at run time
    // using pairing and a few successors only.

    /// Value-level `c_lit`: code of `Lit(x)` from the value x.
    pub fn code_lit(x: Expr) -> Expr {
        succk(pair(x, k(0)), 7)
    }

    /// Value-level `c_mu`.
    pub fn code_mu(t: Expr) -> Expr {
        succk(pair(t, k(1)), 7)
    }

    /// Value-level `c_comp`.
    pub fn code_comp(f: Expr, g: Expr) -> Expr {
        succk(pair(pair(f, g), k(2)), 7)
    }

    /// Value-level `c_pair`.
    pub fn code_pair(a: Expr, b: Expr) -> Expr {
        succk(pair(a, succk(b, 4)), 7)
    }

    /// Value-level `smn`: code of `Comp(e, Pair(Lit x, Id))`.
    pub fn code_smn(ecode: Expr, x: Expr) -> Expr {
        code_comp(ecode, code_pair(code_lit(x), k(3)))
    }
}

struct Compiler {
    /// Innermost binding last. The function argument sits at the bottom.
    names: Vec<String>,
    recursive: bool,
}

impl Compiler {
    fn fst_chain(n: u64) -> Rc<Term> {
        let mut t = Term::fst();
        for _ in 1..n {
            t = Term::comp(Term::fst(), t);
        }
        t
    }

    fn var_term(&self, name: &str) -> Rc<Term> {
        let pos = self
            .names
            .iter()
            .rposition(|n| n == name)
            .unwrap_or_else(|| panic!("unbound variable `{name}`"));
        let depth = (self.names.len() - 1 - pos) as u64;
        if depth == 0 {
            Term::snd()
        } else {
            Term::comp(Term::snd(), Self::fst_chain(depth))
        }
    }

    /// Projects the self-code slot out of the environment.
    fn self_slot(&self) -> Rc<Term> {
        Self::fst_chain(self.names.len() as u64)
    }

    fn compile(&mut self, ex: &Expr) -> Rc<Term> {
        match ex {
            Expr::Var(n) => self.var_term(n),
            Expr::Konst(n) => Term::lit_nat(n),
            Expr::Succ(x, k) => {
                let mut t = self.compile(x);
                for _ in 0..*k {
                    t = Term::comp(Term::succ(), t);
                }
                t
            }
            Expr::Pred(x, k) => {
                let mut t = self.compile(x);
                for _ in 0..*k {
                    t = Term::comp(Term::pred(), t);
                }
                t
            }
            Expr::Pair(a, b) => Term::pair(self.compile(a), self.compile(b)),
            Expr::Fst(x) => Term::comp(Term::fst(), self.compile(x)),
            Expr::Snd(x) => Term::comp(Term::snd(), self.compile(x)),
            Expr::If0(c, a, b) => {
                Term::if0(self.compile(c), self.compile(a), self.compile(b))
            }
            Expr::Let(n, v, body) => {
                let vt = self.compile(v);
                self.names.push(n.clone());
                let bt = self.compile(body);
                self.names.pop();
                Term::comp(bt, Term::pair(Term::id(), vt))
            }
            Expr::MuMin(n, body) => {
                self.names.push(n.clone());
                let bt = self.compile(body);
                self.names.pop();
                Term::mu(bt)
            }
            Expr::SelfCall(x) => {
                assert!(self.recursive, "SelfCall outside a recursive function");
                let q = self.self_slot();
                let xt = self.compile(x);
                Term::comp(
                    Term::univ(),
                    Term::pair(q.clone(), Term::pair(q, xt)),
                )
            }
            Expr::CallCode(code, x) => Term::comp(
                Term::univ(),
                Term::pair(Term::lit_nat(code), self.compile(x)),
            ),
            Expr::Apply(f, x) => Term::comp(
                Term::univ(),
                Term::pair(self.compile(f), self.compile(x)),
            ),
            Expr::Raw(t, x) => Term::comp(t.clone(), self.compile(x)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompiledFn {
    pub term: Rc<Term>,
    pub code: Nat,
}

impl CompiledFn {
    fn finish(term: Rc<Term>) -> CompiledFn {
        let code = encode(&term);
        CompiledFn { term, code }
    }
}

/// Compiles `arg -> body` with no recursion.
pub fn compile_fn(arg: &str, body: &Expr) -> CompiledFn {
    let mut c = Compiler {
        names: vec![arg.to_string()],
        recursive: false,
    };
    let g = c.compile(body);
    CompiledFn::finish(Term::comp(
        g,
        Term::pair(Term::zero(), Term::id()),
    ))
}

/// Compiles `arg -> body` where the body may `SelfCall`. The compiled
/// function carries its own helper code as a literal and recursive calls
/// re-enter through the universal program.
pub fn compile_rec_fn(arg: &str, body: &Expr) -> CompiledFn {
    let mut c = Compiler {
        names: vec![arg.to_string()],
        recursive: true,
    };
    let g = c.compile(body);
    let g_code = encode(&g);
    CompiledFn::finish(Term::comp(
        g,
        Term::pair(Term::lit_nat(&g_code), Term::id()),
    ))
}

#[cfg(test)]
mod tests {
    use super::e::*;
    use super::*;
    use crate::machine::{eval, EvalOutcome};
    use crate::term::smn;

    const FUEL: u64 = 1_000_000;

    fn run_ok(f: &CompiledFn, x: &Nat) -> Nat {
        match eval(&f.term, x, FUEL) {
            EvalOutcome::Halted { value, .. } => value,
            EvalOutcome::OutOfFuel => panic!("out of fuel"),
        }
    }

    #[test]
    fn constants_variables_lets() {
        let f = compile_fn("x", &succ(var("x")));
        assert_eq!(run_ok(&f, &Nat::small(7)), Nat::small(8));

        let g = compile_fn("x", &let_("y", succk(var("x"), 3), pair(var("y"), var("x"))));
        assert_eq!(
            run_ok(&g, &Nat::small(2)),
            Nat::pair(&Nat::small(5), &Nat::small(2))
        );

        // Shadowing picks the innermost binding.
        let h = compile_fn(
            "x",
            &let_("x", k(10), let_("x", succ(var("x")), var("x"))),
        );
        assert_eq!(run_ok(&h, &Nat::small(3)), Nat::small(11));
    }

    #[test]
    fn mu_min_finds_least_zero() {
        let g = compile_fn("x", &mu_min("y", if0(predk(var("y"), 2), k(1), k(0))));
        // body = 0 first when y - 2 > 0, i.e. y = 3.
        assert_eq!(run_ok(&g, &Nat::small(0)), Nat::small(3));

        // The search sees outer bindings.
        let h = compile_fn(
            "x",
            &let_(
                "t",
                succ(var("x")),
                mu_min("y", if0(predk(var("y"), 4), var("t"), k(0))),
            ),
        );
        // accepts first at y = 5 (t >= 1 blocks earlier y).
        assert_eq!(run_ok(&h, &Nat::small(9)), Nat::small(5));
    }

    #[test]
    fn recursive_monus_terminates_with_the_right_values() {
        // monus(pair(a, b)) = a - b, clamped at 0.
        let body = let_(
            "a",
            fst(var("in")),
            let_(
                "b",
                snd(var("in")),
                if0(
                    var("b"),
                    var("a"),
                    if0(
                        var("a"),
                        k(0),
                        self_call(pair(pred(var("a")), pred(var("b")))),
                    ),
                ),
            ),
        );
        let monus = compile_rec_fn("in", &body);
        for (a, b) in [(9u64, 3u64), (3, 9), (0, 0), (14, 14), (40, 1)] {
            let got = run_ok(&monus, &Nat::pair(&Nat::small(a), &Nat::small(b)));
            assert_eq!(got, Nat::small(a.saturating_sub(b)), "monus({a},{b})");
        }
    }

    #[test]
    fn call_code_links_finished_programs() {
        let double_in_unary = compile_rec_fn(
            "n",
            &if0(
                var("n"),
                k(0),
                succk(self_call(pred(var("n"))), 2),
            ),
        );
        assert_eq!(run_ok(&double_in_unary, &Nat::small(6)), Nat::small(12));

        let shifted = compile_fn("n", &succ(call(&double_in_unary.code, var("n"))));
        assert_eq!(run_ok(&shifted, &Nat::small(5)), Nat::small(11));
    }

    #[test]
    fn runtime_code_builders_match_the_meta_numbering() {
        // A program computing smn(a, x) from its input pair must agree with
        // the meta-level smn on the nose.
        let f = compile_fn("in", &code_smn(fst(var("in")), snd(var("in"))));
        for (a, x) in [(0u64, 0u64), (129, 41), (6, 6), (75, 1000)] {
            let got = run_ok(&f, &Nat::pair(&Nat::small(a), &Nat::small(x)));
            assert_eq!(got, smn(&Nat::small(a), &Nat::small(x)), "smn({a},{x})");
        }
        // And on astronomically large codes, structurally.
        let mut big = Nat::small(3);
        for _ in 0..40 {
            big = crate::term::c_comp(&big, &big);
        }
        let got = run_ok(&f, &Nat::pair(&big, &Nat::small(9)));
        assert_eq!(got, smn(&big, &Nat::small(9)));
    }

    #[test]
    fn apply_routes_through_the_universal_program() {
        let succ_code = encode(&Term::succ());
        let f = compile_fn("x", &apply(kn(&succ_code), succ(var("x"))));
        assert_eq!(run_ok(&f, &Nat::small(5)), Nat::small(7));
    }

    #[test]
    #[should_panic(expected = "unbound variable")]
    fn unbound_variables_fail_loudly() {
        compile_fn("x", &var("nope"));
    }
}
