//! Five effective topological spaces with numbered bases, curated points,
//! and the three ways of naming a point.
//!
//! Basis codings are fixed once and for all:
//!
//! * extended naturals (`nbar`): `B_{2n} = {n}`, `B_{2n+1} = [n, inf]`;
//! * Cantor space (`cantor`): `B_i` is the cylinder of the i-th binary
//!   string in length-lex order (`u_0` is the empty string);
//! * Baire space (`baire`): `B_i` is the cylinder of the finite sequence
//!   coded by i, with `nil = 0` and `cons(h, t) = pair(h, t) + 1`;
//! * power set of the naturals with the Scott topology (`pown`): `B_i` is
//!   the upper set of the finite set whose members are the binary digits
//!   of i;
//! * Sierpinski space (`sierp`): `B_0` is the whole space and `B_i = {top}`
//!   for every i >= 1.
//!
//! A point is named three ways. A Type-2 name is a total enumeration of
//! the point's neighborhood filter, queried one position at a time. A
//! Markov name is a single code whose halting domain is the filter. A
//! K-name wraps a Type-2 name together with an upper bound on how hard the
//! point is to describe.

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::complexity::ComplexityBound;
use crate::lambda::{compile_fn, compile_rec_fn, e, CompiledFn, Expr};
use crate::library;
use crate::machine::eval_code;
use crate::nat::Nat;
use crate::stage::StagedSet;
use crate::term::Term;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    Sierpinski,
    ExtendedNats,
    Cantor,
    Baire,
    PowerSet,
}

impl Space {
    pub const ALL: [Space; 5] = [
        Space::Sierpinski,
        Space::ExtendedNats,
        Space::Cantor,
        Space::Baire,
        Space::PowerSet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Space::Sierpinski => "sierp",
            Space::ExtendedNats => "nbar",
            Space::Cantor => "cantor",
            Space::Baire => "baire",
            Space::PowerSet => "pown",
        }
    }

    /// Human description of a basis element, for traces and diagnostics.
    pub fn describe_basis(self, i: &Nat) -> String {
        match self {
            Space::Sierpinski => match i.to_u64() {
                Some(0) => "whole space".to_string(),
                _ => "{top}".to_string(),
            },
            Space::ExtendedNats => match i.to_u64() {
                Some(v) if v % 2 == 0 => format!("{{{}}}", v / 2),
                Some(v) => format!("[{}, inf]", (v - 1) / 2),
                None => format!("basis#{}", i.digest_hex()),
            },
            Space::Cantor => match cantor_string_of(i) {
                Some(bits) => format!("[{}]", bit_string(&bits)),
                None => format!("basis#{}", i.digest_hex()),
            },
            Space::Baire => match baire_seq_of(i) {
                Some(seq) => {
                    let parts: Vec<String> =
                        seq.iter().map(|n| n.display_compact()).collect();
                    format!("[{}]", parts.join(","))
                }
                None => format!("basis#{}", i.digest_hex()),
            },
            Space::PowerSet => match power_set_of_index(i) {
                Some(els) => {
                    let parts: Vec<String> = els.iter().map(u64::to_string).collect();
                    format!("up{{{}}}", parts.join(","))
                }
                None => format!("basis#{}", i.digest_hex()),
            },
        }
    }
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

// ---------------------------------------------------------------------
// Basis index arithmetic.

/// Index of a binary string in length-lex order: read `1` followed by the
/// string as a binary numeral, then subtract one.
pub fn cantor_index_of(bits: &[bool]) -> Nat {
    let mut v = BigUint::one();
    for b in bits {
        v = (&v << 1) + u64::from(*b);
    }
    Nat::from_biguint(v - 1u32)
}

/// Inverse of `cantor_index_of`; `None` when the index is too large to
/// materialize.
pub fn cantor_string_of(i: &Nat) -> Option<Vec<bool>> {
    let v = i.try_to_biguint(4096)? + 1u32;
    let n = v.bits();
    let mut out = Vec::with_capacity(n as usize - 1);
    for pos in (0..n - 1).rev() {
        out.push(v.bit(pos));
    }
    Some(out)
}

/// Code of a finite sequence: `nil = 0`, `cons(h, t) = pair(h, t) + 1`.
pub fn seq_code(items: &[Nat]) -> Nat {
    let mut acc = Nat::zero();
    for h in items.iter().rev() {
        acc = Nat::pair(h, &acc).succ();
    }
    acc
}

/// Decodes a finite-sequence code; `None` if it unreasonably long.
pub fn baire_seq_of(i: &Nat) -> Option<Vec<Nat>> {
    let mut out = Vec::new();
    let mut cur = i.clone();
    while !cur.is_zero() {
        if out.len() > 100_000 {
            return None;
        }
        let (h, t) = cur.pred().unpair();
        out.push(h);
        cur = t;
    }
    Some(out)
}

/// The finite set whose members are the binary digits of the index.
pub fn power_set_of_index(i: &Nat) -> Option<Vec<u64>> {
    let v = i.try_to_biguint(100_000)?;
    Some((0..v.bits()).filter(|p| v.bit(*p)).collect())
}

/// Index of a finite set of naturals; elements must be below 4096 to keep
/// the index materializable.
pub fn power_index_of_set(els: &[u64]) -> Nat {
    let mut v = BigUint::ZERO;
    for a in els {
        assert!(*a < 4096, "finite-set element too large for an index");
        v.set_bit(*a, true);
    }
    Nat::from_biguint(v)
}

// ---------------------------------------------------------------------
// Curated points.

#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    NbarFinite(u64),
    NbarInfinity,
    /// The sequence `prefix` followed by `tail` forever.
    CantorTail { prefix: Vec<bool>, tail: bool },
    /// Same shape over the naturals.
    BaireTail { prefix: Vec<u64>, tail: u64 },
    /// A finite subset of the naturals; elements below 64.
    PowerFinite(Vec<u64>),
    /// The halting domain of a program, as a subset of the naturals.
    PowerProgram { code: Nat },
    /// The full set of naturals.
    PowerAll,
    SierpTop,
    SierpBot,
}

impl Point {
    pub fn space(&self) -> Space {
        match self {
            Point::NbarFinite(_) | Point::NbarInfinity => Space::ExtendedNats,
            Point::CantorTail { .. } => Space::Cantor,
            Point::BaireTail { .. } => Space::Baire,
            Point::PowerFinite(_) | Point::PowerProgram { .. } | Point::PowerAll => {
                Space::PowerSet
            }
            Point::SierpTop | Point::SierpBot => Space::Sierpinski,
        }
    }

    pub fn power_finite(mut els: Vec<u64>) -> Point {
        assert!(els.iter().all(|a| *a < 64), "curated finite sets stay below 64");
        els.sort_unstable();
        els.dedup();
        Point::PowerFinite(els)
    }

    /// Bit `m` of a Cantor-space point.
    pub fn cantor_bit(&self, m: u64) -> bool {
        match self {
            Point::CantorTail { prefix, tail } => {
                usize::try_from(m).ok().and_then(|m| prefix.get(m).copied()).unwrap_or(*tail)
            }
            _ => panic!("not a Cantor point"),
        }
    }

    /// Value at position `m` of a Baire-space point.
    pub fn baire_value(&self, m: u64) -> u64 {
        match self {
            Point::BaireTail { prefix, tail } => {
                usize::try_from(m).ok().and_then(|m| prefix.get(m).copied()).unwrap_or(*tail)
            }
            _ => panic!("not a Baire point"),
        }
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Point::NbarFinite(n) => write!(f, "nbar:{n}"),
            Point::NbarInfinity => write!(f, "nbar:inf"),
            Point::CantorTail { prefix, tail } => {
                write!(f, "cantor:")?;
                if !prefix.is_empty() {
                    write!(f, "{} ", bit_string(prefix))?;
                }
                write!(f, "{}^w", u64::from(*tail))
            }
            Point::BaireTail { prefix, tail } => {
                write!(f, "baire:")?;
                for v in prefix {
                    write!(f, "{v} ")?;
                }
                write!(f, "{tail}^w")
            }
            Point::PowerFinite(els) => {
                let parts: Vec<String> = els.iter().map(u64::to_string).collect();
                write!(f, "pown:{{{}}}", parts.join(","))
            }
            Point::PowerProgram { code } => write!(f, "pown:idx({})", code.display_compact()),
            Point::PowerAll => write!(f, "pown:all"),
            Point::SierpTop => write!(f, "sierp:top"),
            Point::SierpBot => write!(f, "sierp:bot"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PointParseError {
    #[error("unknown space prefix in `{0}`; expected nbar:/cantor:/baire:/pown:/sierp:")]
    UnknownSpace(String),
    #[error("malformed point `{0}`: {1}")]
    Malformed(String, &'static str),
}

/// Parses the curated-point syntax: `nbar:5`, `nbar:inf`, `cantor:0^w`,
/// `cantor:0^5 1^w`, `baire:1 2 0^w`, `pown:{1,3}`, `pown:idx(12)`,
/// `pown:all`, `sierp:top`, `sierp:bot`.
pub fn parse_point(s: &str) -> Result<Point, PointParseError> {
    let bad = |why: &'static str| PointParseError::Malformed(s.to_string(), why);
    let (space, rest) = s
        .split_once(':')
        .ok_or_else(|| PointParseError::UnknownSpace(s.to_string()))?;
    match space {
        "nbar" => {
            if rest == "inf" {
                Ok(Point::NbarInfinity)
            } else {
                rest.parse::<u64>()
                    .map(Point::NbarFinite)
                    .map_err(|_| bad("expected a natural number or `inf`"))
            }
        }
        "sierp" => match rest {
            "top" => Ok(Point::SierpTop),
            "bot" => Ok(Point::SierpBot),
            _ => Err(bad("expected `top` or `bot`")),
        },
        "pown" => {
            if rest == "all" {
                Ok(Point::PowerAll)
            } else if let Some(inner) = rest.strip_prefix("idx(").and_then(|r| r.strip_suffix(')')) {
                let code = Nat::from_decimal(inner)
                    .ok_or_else(|| bad("idx(...) takes a decimal code"))?;
                Ok(Point::PowerProgram { code })
            } else if let Some(inner) = rest.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
                let mut els = Vec::new();
                for part in inner.split(',').filter(|p| !p.trim().is_empty()) {
                    let v: u64 = part
                        .trim()
                        .parse()
                        .map_err(|_| bad("set elements are naturals"))?;
                    if v >= 64 {
                        return Err(bad("set elements must be below 64"));
                    }
                    els.push(v);
                }
                Ok(Point::power_finite(els))
            } else {
                Err(bad("expected `{..}`, `idx(..)` or `all`"))
            }
        }
        "cantor" => {
            let (prefix, tail) = parse_tail_blocks(rest, &bad)?;
            let mut bits = Vec::new();
            for v in prefix {
                if v > 1 {
                    return Err(bad("cantor symbols are bits"));
                }
                bits.push(v == 1);
            }
            if tail > 1 {
                return Err(bad("cantor symbols are bits"));
            }
            Ok(Point::CantorTail { prefix: bits, tail: tail == 1 })
        }
        "baire" => {
            let (prefix, tail) = parse_tail_blocks(rest, &bad)?;
            Ok(Point::BaireTail { prefix, tail })
        }
        _ => Err(PointParseError::UnknownSpace(s.to_string())),
    }
}

/// Blocks `v`, `v^count`, and a final `v^w`, whitespace separated.
fn parse_tail_blocks(
    rest: &str,
    bad: &dyn Fn(&'static str) -> PointParseError,
) -> Result<(Vec<u64>, u64), PointParseError> {
    let mut prefix = Vec::new();
    let mut tail: Option<u64> = None;
    for block in rest.split_whitespace() {
        if tail.is_some() {
            return Err(bad("nothing may follow the `^w` block"));
        }
        if let Some((v, rep)) = block.split_once('^') {
            let v: u64 = v.parse().map_err(|_| bad("symbols are naturals"))?;
            if rep == "w" {
                tail = Some(v);
            } else {
                let n: u64 = rep.parse().map_err(|_| bad("bad repeat count"))?;
                if n > 10_000 {
                    return Err(bad("repeat count too large"));
                }
                prefix.extend(std::iter::repeat_n(v, n as usize));
            }
        } else {
            let v: u64 = block.parse().map_err(|_| bad("symbols are naturals"))?;
            prefix.push(v);
        }
    }
    match tail {
        Some(t) => Ok((prefix, t)),
        None => Err(bad("missing final `^w` block")),
    }
}

// ---------------------------------------------------------------------
// Ground-truth membership and filters.

/// Whether the point lies in basis element `i`. Exact for every point
/// shape except `PowerProgram`, where domain membership is answered by
/// stage: set bits of `i` must halt within `stage` steps.
pub fn point_in_basis(p: &Point, i: &Nat, stage: u64) -> bool {
    match p {
        Point::NbarFinite(m) => match i.try_to_biguint(4096) {
            Some(v) => {
                let odd = v.bit(0);
                let half: BigUint = v >> 1;
                match u64::try_from(&half) {
                    Ok(n) => {
                        if odd {
                            n <= *m
                        } else {
                            n == *m
                        }
                    }
                    Err(_) => false,
                }
            }
            None => panic!("basis index too large to classify"),
        },
        Point::NbarInfinity => match i.try_to_biguint(4096) {
            Some(v) => v.bit(0),
            None => panic!("basis index too large to classify"),
        },
        Point::CantorTail { prefix, tail } => match cantor_string_of(i) {
            Some(bits) => bits.iter().enumerate().all(|(m, b)| {
                *b == prefix.get(m).copied().unwrap_or(*tail)
            }),
            None => panic!("basis index too large to classify"),
        },
        Point::BaireTail { prefix, tail } => match baire_seq_of(i) {
            Some(seq) => seq.iter().enumerate().all(|(m, h)| {
                h.to_u64() == Some(prefix.get(m).copied().unwrap_or(*tail))
            }),
            None => panic!("basis index too large to classify"),
        },
        Point::PowerFinite(els) => match power_set_of_index(i) {
            Some(need) => need.iter().all(|a| els.contains(a)),
            None => panic!("basis index too large to classify"),
        },
        Point::PowerProgram { code } => match power_set_of_index(i) {
            Some(need) => need
                .iter()
                .all(|a| eval_code(code, &Nat::small(*a), stage).halted()),
            None => panic!("basis index too large to classify"),
        },
        Point::PowerAll => true,
        Point::SierpTop => true,
        Point::SierpBot => i.is_zero(),
    }
}

fn diverge() -> Expr {
    e::raw(Term::mu(Term::succ()), e::k(0))
}

/// Halts exactly on odd inputs.
/// The canonical name of the point at infinity: halts exactly on odd
/// inputs. Written as one flat recursion so its code stays materializable;
/// the code and its bit-length are frozen constants elsewhere.
pub fn infinity_name() -> CompiledFn {
    compile_rec_fn(
        "i",
        &e::if0(
            e::var("i"),
            diverge(),
            e::if0(
                e::pred(e::var("i")),
                e::k(0),
                e::self_call(e::predk(e::var("i"), 2)),
            ),
        ),
    )
}

/// Halts exactly on indices of prefixes of the sequence `prefix tail^w`.
///
/// Walks the sequence keeping `v = index(current prefix) + 1`; each step
/// doubles and adds the next bit, so reaching index `i` costs on the order
/// of `i` toy steps.
fn cantor_prefix_name(prefix: &[bool], tail: bool) -> CompiledFn {
    let addf = library::add().term;
    let dbl = |x: Expr| e::raw(addf.clone(), e::pair(x.clone(), x));
    let target = || e::fst(e::var("z"));
    let v = || e::fst(e::snd(e::var("z")));
    let bits = || e::snd(e::snd(e::var("z")));
    let tail_step = if tail { e::succ(dbl(v())) } else { dbl(v()) };
    let walk = compile_rec_fn(
        "z",
        &e::if0(
            e::raw(library::eq().term, e::pair(v(), target())),
            // Not there yet: extend the prefix by one bit.
            e::if0(
                bits(),
                e::self_call(e::pair(target(), e::pair(tail_step, e::k(0)))),
                e::let_(
                    "cell",
                    e::pred(bits()),
                    e::self_call(e::pair(
                        target(),
                        e::pair(
                            e::raw(
                                addf.clone(),
                                e::pair(dbl(v()), e::fst(e::var("cell"))),
                            ),
                            e::snd(e::var("cell")),
                        ),
                    )),
                ),
            ),
            e::k(0),
        ),
    );
    let bit_items: Vec<Nat> = prefix.iter().map(|b| Nat::small(u64::from(*b))).collect();
    let bits_const = seq_code(&bit_items);
    compile_fn(
        "i",
        &e::call(
            &walk.code,
            e::pair(
                e::succ(e::var("i")),
                e::pair(e::k(1), e::kn(&bits_const)),
            ),
        ),
    )
}

/// Halts exactly on sequence codes that are prefixes of `prefix tail^w`.
fn baire_prefix_name(prefix: &[u64], tail: u64) -> CompiledFn {
    let code = || e::fst(e::var("z"));
    let pl = || e::snd(e::var("z"));
    let walk = compile_rec_fn(
        "z",
        &e::if0(
            code(),
            e::k(0),
            e::let_(
                "cell",
                e::pred(code()),
                e::let_(
                    // pair(expected value, rest of the stored prefix)
                    "want",
                    e::if0(pl(), e::pair(e::k(tail), e::k(0)), e::pred(pl())),
                    e::if0(
                        e::raw(
                            library::eq().term,
                            e::pair(e::fst(e::var("cell")), e::fst(e::var("want"))),
                        ),
                        diverge(),
                        e::self_call(e::pair(
                            e::snd(e::var("cell")),
                            e::snd(e::var("want")),
                        )),
                    ),
                ),
            ),
        ),
    );
    let items: Vec<Nat> = prefix.iter().map(|v| Nat::small(*v)).collect();
    let pl_const = seq_code(&items);
    compile_fn(
        "i",
        &e::call(&walk.code, e::pair(e::var("i"), e::kn(&pl_const))),
    )
}

/// Halts on `i` exactly when every binary digit of `i` is in the halting
/// domain of `code`: waits on each required member in turn.
fn power_wait_name(code: &Nat) -> CompiledFn {
    let i = || e::fst(e::var("z"));
    let j = || e::snd(e::var("z"));
    let step = |pre: Expr| {
        e::let_(
            "_wait",
            pre,
            e::self_call(e::pair(
                e::raw(library::div2().term, i()),
                e::succ(j()),
            )),
        )
    };
    let walk = compile_rec_fn(
        "z",
        &e::if0(
            i(),
            e::k(0),
            e::if0(
                e::raw(library::odd().term, i()),
                step(e::k(0)),
                step(e::call(code, j())),
            ),
        ),
    );
    compile_fn("i", &e::call(&walk.code, e::pair(e::var("i"), e::k(0))))
}

/// The point's neighborhood filter as a staged set of basis indices.
pub fn point_filter(p: &Point) -> StagedSet {
    match p {
        Point::NbarFinite(m) => {
            let mut els = vec![Nat::small(2 * m)];
            els.extend((0..=*m).map(|j| Nat::small(2 * j + 1)));
            StagedSet::explicit(els.into_iter().map(|v| (v, 0)).collect())
        }
        Point::NbarInfinity => StagedSet::program(&infinity_name().code),
        Point::CantorTail { prefix, tail } => {
            StagedSet::program(&cantor_prefix_name(prefix, *tail).code)
        }
        Point::BaireTail { prefix, tail } => {
            StagedSet::program(&baire_prefix_name(prefix, *tail).code)
        }
        Point::PowerFinite(els) => {
            let mask = power_index_of_set(els).to_u64().expect("small mask");
            let mut subs = Vec::new();
            let mut s = mask;
            loop {
                subs.push((Nat::small(s), 0));
                if s == 0 {
                    break;
                }
                s = (s - 1) & mask;
            }
            StagedSet::explicit(subs)
        }
        Point::PowerProgram { code } => StagedSet::program(&power_wait_name(code).code),
        Point::PowerAll => StagedSet::All,
        Point::SierpTop => StagedSet::All,
        Point::SierpBot => StagedSet::explicit(vec![(Nat::zero(), 0)]),
    }
}

// ---------------------------------------------------------------------
// Names.

/// A name that is a single code: its halting domain is the filter.
#[derive(Debug, Clone)]
pub struct MarkovName {
    pub space: Space,
    pub code: Nat,
}

pub fn markov_name_of(p: &Point) -> MarkovName {
    MarkovName {
        space: p.space(),
        code: point_filter(p).domain_code(),
    }
}

/// A name that is a total stream of basis indices covering the filter.
#[derive(Debug, Clone)]
pub enum NameSource {
    Curated(Point),
    /// A total program; position `j` of the stream is its value at `j`.
    Program { code: Nat },
}

#[derive(Debug, Clone)]
pub struct Type2Name {
    pub source: NameSource,
}

impl Type2Name {
    pub fn curated(p: &Point) -> Type2Name {
        Type2Name {
            source: NameSource::Curated(p.clone()),
        }
    }

    pub fn from_code(code: &Nat) -> Type2Name {
        Type2Name {
            source: NameSource::Program { code: code.clone() },
        }
    }

    /// Position `j` of the stream.
    pub fn nth(&self, j: u64) -> Nat {
        match &self.source {
            NameSource::Curated(p) => curated_nth(p, j),
            NameSource::Program { code } => {
                let mut fuel: u64 = 1 << 14;
                loop {
                    match eval_code(code, &Nat::small(j), fuel) {
                        crate::machine::EvalOutcome::Halted { value, .. } => return value,
                        crate::machine::EvalOutcome::OutOfFuel => {
                            assert!(fuel < (1 << 42), "name program stuck at position {j}");
                            fuel = fuel.saturating_mul(8);
                        }
                    }
                }
            }
        }
    }

    /// Bit `m` of the Cantor point this name describes: scans the stream
    /// for a cylinder deep enough to pin the bit down.
    pub fn cantor_bit(&self, m: u64) -> bool {
        if let NameSource::Curated(p) = &self.source {
            return p.cantor_bit(m);
        }
        for j in 0..1_000_000u64 {
            if let Some(bits) = cantor_string_of(&self.nth(j)) {
                if bits.len() as u64 > m {
                    return bits[m as usize];
                }
            }
        }
        panic!("stream never pinned down bit {m}");
    }
}

/// Deterministic total enumeration of a curated point's filter.
fn curated_nth(p: &Point, j: u64) -> Nat {
    match p {
        Point::NbarFinite(_) | Point::PowerFinite(_) | Point::SierpBot => {
            let els = point_filter(p).view(u64::MAX >> 1);
            els[(j % els.len() as u64) as usize].clone()
        }
        Point::NbarInfinity => Nat::small(2 * j + 1),
        Point::CantorTail { prefix, tail } => {
            let bits: Vec<bool> = (0..j)
                .map(|m| {
                    usize::try_from(m)
                        .ok()
                        .and_then(|m| prefix.get(m).copied())
                        .unwrap_or(*tail)
                })
                .collect();
            cantor_index_of(&bits)
        }
        Point::BaireTail { prefix, tail } => {
            let items: Vec<Nat> = (0..j)
                .map(|m| {
                    Nat::small(
                        usize::try_from(m)
                            .ok()
                            .and_then(|m| prefix.get(m).copied())
                            .unwrap_or(*tail),
                    )
                })
                .collect();
            seq_code(&items)
        }
        Point::PowerProgram { .. } => {
            // Dovetail pairs (i, s): emit i once its required members have
            // all halted within s steps; otherwise emit the safe index 0.
            let (i, s) = Nat::small(j).unpair();
            let stage = s.to_u64().unwrap_or(0);
            if point_in_basis(p, &i, stage) {
                i
            } else {
                Nat::zero()
            }
        }
        Point::PowerAll | Point::SierpTop => Nat::small(j),
    }
}

/// A Type-2 name together with a complexity bound for the named point.
#[derive(Debug, Clone)]
pub struct KName {
    pub bound: ComplexityBound,
    pub name: Type2Name,
}

// ---------------------------------------------------------------------
// Basis intersections.

/// Indices whose basis elements cover `B_i` intersect `B_j` exactly.
/// Empty when the intersection is empty.
pub fn intersect_cover(space: Space, i: &Nat, j: &Nat) -> Vec<Nat> {
    match space {
        Space::Sierpinski => {
            if i.is_zero() {
                vec![j.clone()]
            } else if j.is_zero() {
                vec![i.clone()]
            } else {
                vec![Nat::one()]
            }
        }
        Space::ExtendedNats => {
            let a = i.to_u64().expect("index too large");
            let b = j.to_u64().expect("index too large");
            let (sing, tail) = match (a % 2 == 0, b % 2 == 0) {
                (true, true) => return if a == b { vec![i.clone()] } else { vec![] },
                (false, false) => {
                    return vec![Nat::small(2 * (a / 2).max(b / 2) + 1)];
                }
                (true, false) => (a / 2, b / 2),
                (false, true) => (b / 2, a / 2),
            };
            if sing >= tail {
                vec![Nat::small(2 * sing)]
            } else {
                vec![]
            }
        }
        Space::Cantor => {
            let u = cantor_string_of(i).expect("index too large");
            let v = cantor_string_of(j).expect("index too large");
            let n = u.len().min(v.len());
            if u[..n] == v[..n] {
                vec![if u.len() >= v.len() { i.clone() } else { j.clone() }]
            } else {
                vec![]
            }
        }
        Space::Baire => {
            let u = baire_seq_of(i).expect("index too large");
            let v = baire_seq_of(j).expect("index too large");
            let n = u.len().min(v.len());
            if u[..n] == v[..n] {
                vec![if u.len() >= v.len() { i.clone() } else { j.clone() }]
            } else {
                vec![]
            }
        }
        Space::PowerSet => {
            let a = i.try_to_biguint(100_000).expect("index too large");
            let b = j.try_to_biguint(100_000).expect("index too large");
            vec![Nat::from_biguint(a | b)]
        }
    }
}

/// A code whose halting domain enumerates `intersect_cover(space, i, j)`.
pub fn basis_intersect(space: Space, i: &Nat, j: &Nat) -> Nat {
    let cover = intersect_cover(space, i, j);
    StagedSet::explicit(cover.into_iter().map(|v| (v, 0)).collect()).domain_code()
}

// ---------------------------------------------------------------------
// The diagonal numbering of the Sierpinski space.

/// Reads a code as a Sierpinski point: top exactly when the program halts
/// on its own code. The bool reports certainty: a halt inside the fuel is
/// definitive, anything else is only "bot as far as we looked".
pub fn sierp_point_of_code(code: &Nat, fuel: u64) -> (Point, bool) {
    if eval_code(code, code, fuel).halted() {
        (Point::SierpTop, true)
    } else {
        (Point::SierpBot, false)
    }
}

/// From a diagonal code to a Markov name of the same point: the domain is
/// `{0}` plus everything else exactly when the code halts on itself.
pub fn sierp_nu_to_markov(code: &Nat) -> Nat {
    compile_fn(
        "n",
        &e::if0(
            e::var("n"),
            e::k(0),
            e::let_("_wait", e::call(code, e::kn(code)), e::k(0)),
        ),
    )
    .code
}

/// From a Markov name of a Sierpinski point back to a diagonal code: the
/// result halts on its own code (on anything) exactly when some index
/// >= 1 is in the name's domain.
pub fn sierp_markov_to_nu(name: &Nat) -> Nat {
    compile_fn(
        "z",
        &e::mu_min(
            "y",
            e::if0(
                e::raw(
                    library::step_eval().term,
                    e::pair(
                        e::kn(name),
                        e::pair(e::succ(e::fst(e::var("y"))), e::snd(e::var("y"))),
                    ),
                ),
                e::k(1),
                e::k(0),
            ),
        ),
    )
    .code
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::eval_code;

    const FUEL: u64 = 1_000_000;

    fn sample_points() -> Vec<Point> {
        vec![
            Point::NbarFinite(2),
            Point::NbarInfinity,
            Point::CantorTail { prefix: vec![], tail: false },
            Point::CantorTail { prefix: vec![false, false, true], tail: true },
            Point::BaireTail { prefix: vec![2, 0, 1], tail: 0 },
            Point::power_finite(vec![1, 3]),
            Point::PowerProgram { code: infinity_name().code },
            Point::PowerAll,
            Point::SierpTop,
            Point::SierpBot,
        ]
    }

    fn probe_indices(p: &Point) -> Vec<Nat> {
        match p.space() {
            Space::Cantor => (0..15).map(Nat::small).collect(),
            Space::Baire => {
                let mut v: Vec<Nat> = vec![
                    seq_code(&[]),
                    seq_code(&[Nat::small(2)]),
                    seq_code(&[Nat::small(1)]),
                    seq_code(&[Nat::small(2), Nat::small(0)]),
                    seq_code(&[Nat::small(2), Nat::small(0), Nat::small(1)]),
                    seq_code(&[Nat::small(2), Nat::small(1)]),
                    seq_code(&[Nat::small(2), Nat::small(0), Nat::small(1), Nat::small(0)]),
                ];
                v.push(Nat::small(3));
                v
            }
            _ => (0..12).map(Nat::small).collect(),
        }
    }

    #[test]
    fn cantor_indexing_is_length_lex() {
        let strings: [&[bool]; 8] = [
            &[],
            &[false],
            &[true],
            &[false, false],
            &[false, true],
            &[true, false],
            &[true, true],
            &[false, false, false],
        ];
        for (i, s) in strings.iter().enumerate() {
            assert_eq!(cantor_index_of(s), Nat::small(i as u64));
            assert_eq!(cantor_string_of(&Nat::small(i as u64)).unwrap(), s.to_vec());
        }
        for i in 0..200u64 {
            let s = cantor_string_of(&Nat::small(i)).unwrap();
            assert_eq!(cantor_index_of(&s), Nat::small(i));
        }
    }

    #[test]
    fn nbar_filter_matches_the_expected_indices() {
        let f = point_filter(&Point::NbarFinite(2));
        let mut got = f.view(1000);
        got.sort();
        let want: Vec<Nat> = [1u64, 3, 4, 5].into_iter().map(Nat::small).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn filters_agree_with_membership_ground_truth() {
        for p in sample_points() {
            let filter = point_filter(&p);
            for i in probe_indices(&p) {
                let truth = point_in_basis(&p, &i, 100_000);
                let staged = filter.first_stage(&i, 2_000_000).is_some();
                assert_eq!(staged, truth, "point={p} i={}", i.display_compact());
            }
        }
    }

    #[test]
    fn markov_names_halt_exactly_on_the_filter() {
        for p in sample_points() {
            let name = markov_name_of(&p);
            assert_eq!(name.space, p.space());
            for i in probe_indices(&p) {
                let truth = point_in_basis(&p, &i, 100_000);
                assert_eq!(
                    eval_code(&name.code, &i, FUEL).halted(),
                    truth,
                    "point={p} i={}",
                    i.display_compact()
                );
            }
        }
    }

    #[test]
    fn type2_streams_stay_inside_and_exhaust_the_filter() {
        for p in sample_points() {
            let name = Type2Name::curated(&p);
            let mut seen = Vec::new();
            // The dovetailed stream for program-backed sets reaches index
            // i only at position pair(i, halting stage), so scan deeper.
            let depth = if matches!(p, Point::PowerProgram { .. }) { 20_000 } else { 200 };
            for j in 0..depth {
                let i = name.nth(j);
                assert!(
                    point_in_basis(&p, &i, 1_000_000),
                    "stream left the filter: point={p} j={j}"
                );
                seen.push(i);
            }
            // Every small filter element shows up.
            for i in probe_indices(&p) {
                if point_in_basis(&p, &i, 50) && i.to_u64().is_some_and(|v| v < 8) {
                    assert!(seen.contains(&i), "point={p} missing {}", i.display_compact());
                }
            }
        }
    }

    #[test]
    fn type2_bit_extraction_reads_through_the_stream() {
        let p = Point::CantorTail { prefix: vec![false, false, true], tail: true };
        let curated = Type2Name::curated(&p);
        for m in 0..6 {
            assert_eq!(curated.cantor_bit(m), p.cantor_bit(m));
        }
        // A program-backed stream listing the same cylinders.
        let steps: Vec<Nat> = (0..8).map(|j| curated.nth(j)).collect();
        let prog = {
            use crate::lambda::e;
            // nth(j) by chained comparisons against j, falling back to 0.
            let mut acc = e::k(0);
            for (j, v) in steps.iter().enumerate().rev() {
                acc = e::if0(
                    e::raw(
                        library::eq().term,
                        e::pair(e::var("j"), e::k(j as u64)),
                    ),
                    acc,
                    e::kn(v),
                );
            }
            compile_fn("j", &acc)
        };
        let backed = Type2Name::from_code(&prog.code);
        for m in 0..6 {
            assert_eq!(backed.cantor_bit(m), p.cantor_bit(m));
        }
    }

    #[test]
    fn intersections_cover_exactly_on_sample_triples() {
        for p in sample_points() {
            let space = p.space();
            let probes = probe_indices(&p);
            for i in &probes {
                for j in &probes {
                    let cover = intersect_cover(space, i, j);
                    let in_both = point_in_basis(&p, i, 100_000)
                        && point_in_basis(&p, j, 100_000);
                    let in_cover = cover
                        .iter()
                        .any(|k| point_in_basis(&p, k, 100_000));
                    assert_eq!(
                        in_both,
                        in_cover,
                        "space={space:?} i={} j={}",
                        i.display_compact(),
                        j.display_compact()
                    );
                }
            }
        }
    }

    #[test]
    fn intersection_codes_enumerate_the_cover() {
        let i = Nat::small(4);
        let j = Nat::small(3);
        let code = basis_intersect(Space::ExtendedNats, &i, &j);
        // {2} intersect [1, inf] = {2} = B_4.
        assert!(eval_code(&code, &Nat::small(4), FUEL).halted());
        assert!(!eval_code(&code, &Nat::small(3), 50_000).halted());
        assert!(!eval_code(&code, &Nat::small(2), 50_000).halted());

        let disjoint = basis_intersect(Space::Cantor, &Nat::small(1), &Nat::small(2));
        assert!(!eval_code(&disjoint, &Nat::zero(), 50_000).halted());

        // Upper sets intersect by union of the finite obligations.
        let cover = intersect_cover(Space::PowerSet, &Nat::small(0b101), &Nat::small(0b110));
        assert_eq!(cover, vec![Nat::small(0b111)]);
    }

    #[test]
    fn point_syntax_round_trips() {
        let cases = [
            "nbar:5",
            "nbar:inf",
            "cantor:0^w",
            "cantor:001 1^w",
            "baire:2 0 1 0^w",
            "pown:{1,3}",
            "pown:all",
            "sierp:top",
            "sierp:bot",
        ];
        for s in cases {
            let p = parse_point(s).unwrap();
            assert_eq!(parse_point(&p.to_string()).unwrap(), p, "{s}");
        }
        assert_eq!(
            parse_point("cantor:0^5 1^w").unwrap(),
            Point::CantorTail { prefix: vec![false; 5], tail: true }
        );
        assert!(matches!(
            parse_point("pown:idx(12)").unwrap(),
            Point::PowerProgram { .. }
        ));
        for bad in ["nbar:x", "cantor:2^w", "cantor:0^5", "pown:{64}", "blah:3", "sierp:up"] {
            assert!(parse_point(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sierpinski_conversions_track_self_halting() {
        // Code 0 halts on itself; code 11 never halts.
        let halter = Nat::zero();
        let looper = Nat::small(11);
        assert_eq!(sierp_point_of_code(&halter, 1000), (Point::SierpTop, true));
        assert_eq!(sierp_point_of_code(&looper, 1000).0, Point::SierpBot);

        let m_top = sierp_nu_to_markov(&halter);
        for i in [0u64, 1, 5] {
            assert!(eval_code(&m_top, &Nat::small(i), FUEL).halted());
        }
        let m_bot = sierp_nu_to_markov(&looper);
        assert!(eval_code(&m_bot, &Nat::zero(), FUEL).halted());
        assert!(!eval_code(&m_bot, &Nat::small(1), 100_000).halted());

        let nu_top = sierp_markov_to_nu(&markov_name_of(&Point::SierpTop).code);
        assert!(eval_code(&nu_top, &nu_top, FUEL).halted());
        let nu_bot = sierp_markov_to_nu(&markov_name_of(&Point::SierpBot).code);
        assert!(!eval_code(&nu_bot, &nu_bot, 200_000).halted());
    }
}
