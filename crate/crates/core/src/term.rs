//! The exp-log term language: hash-consed immutable DAG nodes, canonical
//! normalization, a parser/printer pair, and syntactic tower levels.
//!
//! Normalization is deliberately conservative.  The only semantic rewrite is
//! exp(log(t;k)) -> t, which holds on every branch; log(exp(t);0) -> t is
//! *not* applied because it needs Im(t) in (-pi, pi], and branch indices are
//! never collapsed.  Levels computed here are therefore upper bounds for
//! tower membership, never minimality claims.

use crate::algebraic::{self, AlgId};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtOrd};
use std::sync::{Arc, Mutex};

#[derive(thiserror::Error, Debug)]
pub enum TermError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("logarithm of zero")]
    LogOfZero,
    #[error("0^e undefined for e <= 0")]
    ZeroPower,
    #[error("t^0 with no syntactic nonzero witness for t")]
    AmbiguousZeroPower,
    #[error("unknown registry name '{0}'")]
    UnknownName(String),
    #[error("exponent overflow")]
    Overflow,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TermNode {
    Rational(BigRational),
    AlgebraicLeaf(AlgId),
    Sum(Vec<Term>),
    Product(Vec<Term>),
    IntPow(Term, i64),
    Exp(Term),
    Log(Term, i64),
}

#[derive(Debug)]
pub struct TermData {
    pub id: u64,
    pub node: TermNode,
}

/// Interned, normalized term.  Structural equality is id equality.
#[derive(Clone, Debug)]
pub struct Term(Arc<TermData>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}
impl Eq for Term {}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.id.hash(state);
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        term_order(self, other)
    }
}

// interner key mirrors TermNode but children are ids, so hashing is shallow
#[derive(Clone, PartialEq, Eq, Hash)]
enum Key {
    Rational(BigRational),
    Alg(AlgId),
    Sum(Vec<u64>),
    Product(Vec<u64>),
    IntPow(u64, i64),
    Exp(u64),
    Log(u64, i64),
}

static INTERN: Lazy<Mutex<HashMap<Key, Term>>> = Lazy::new(|| Mutex::new(HashMap::new()));
static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn key_of(node: &TermNode) -> Key {
    match node {
        TermNode::Rational(q) => Key::Rational(q.clone()),
        TermNode::AlgebraicLeaf(a) => Key::Alg(*a),
        TermNode::Sum(cs) => Key::Sum(cs.iter().map(|t| t.0.id).collect()),
        TermNode::Product(cs) => Key::Product(cs.iter().map(|t| t.0.id).collect()),
        TermNode::IntPow(b, e) => Key::IntPow(b.0.id, *e),
        TermNode::Exp(t) => Key::Exp(t.0.id),
        TermNode::Log(t, k) => Key::Log(t.0.id, *k),
    }
}

fn intern(node: TermNode) -> Term {
    let key = key_of(&node);
    let mut tab = INTERN.lock().unwrap();
    if let Some(t) = tab.get(&key) {
        return t.clone();
    }
    let id = NEXT_ID.fetch_add(1, AtOrd::Relaxed);
    let t = Term(Arc::new(TermData { id, node }));
    tab.insert(key, t.clone());
    t
}

impl Term {
    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn node(&self) -> &TermNode {
        &self.0.node
    }

    // -- constructors; children must already be normalized (always true for
    //    terms built through this API), and the result is normalized --

    pub fn rational(q: BigRational) -> Term {
        intern(TermNode::Rational(q))
    }

    pub fn integer(n: i64) -> Term {
        Term::rational(BigRational::from(BigInt::from(n)))
    }

    pub fn zero() -> Term {
        Term::integer(0)
    }

    pub fn one() -> Term {
        Term::integer(1)
    }

    /// Leaf for a registry constant (registry entries have degree >= 2, so
    /// the leaf is never secretly rational).
    pub fn algebraic(id: AlgId) -> Term {
        intern(TermNode::AlgebraicLeaf(id))
    }

    pub fn sum(children: Vec<Term>) -> Term {
        let mut flat: Vec<Term> = Vec::new();
        let mut rat = BigRational::zero();
        for c in children {
            match c.node() {
                TermNode::Sum(cs) => {
                    for s in cs {
                        match s.node() {
                            TermNode::Rational(q) => rat += q,
                            _ => flat.push(s.clone()),
                        }
                    }
                }
                TermNode::Rational(q) => rat += q,
                _ => flat.push(c),
            }
        }
        if !rat.is_zero() {
            flat.push(Term::rational(rat));
        }
        flat.sort();
        match flat.len() {
            0 => Term::zero(),
            1 => flat.pop().unwrap(),
            _ => intern(TermNode::Sum(flat)),
        }
    }

    pub fn product(children: Vec<Term>) -> Term {
        let mut items: Vec<Term> = Vec::new();
        let mut coeff = BigRational::one();
        for c in children {
            match c.node() {
                TermNode::Product(cs) => {
                    for s in cs {
                        match s.node() {
                            TermNode::Rational(q) => coeff *= q,
                            _ => items.push(s.clone()),
                        }
                    }
                }
                TermNode::Rational(q) => coeff *= q,
                _ => items.push(c),
            }
        }
        if coeff.is_zero() {
            return Term::zero();
        }
        // collect like factors into integer powers
        let mut grouped: Vec<(Term, i128)> = Vec::new();
        for it in items {
            let (base, e) = match it.node() {
                TermNode::IntPow(b, e) => (b.clone(), *e as i128),
                _ => (it, 1i128),
            };
            match grouped.iter_mut().find(|(b, _)| *b == base) {
                Some((_, acc)) => *acc += e,
                None => grouped.push((base, e)),
            }
        }
        let mut flat: Vec<Term> = Vec::new();
        for (base, e) in grouped {
            if e == 0 {
                // x^a * x^-a = 1: the surviving normal form presumes the
                // factors were individually well-defined, hence nonzero
                continue;
            }
            let e = i64::try_from(e).expect("exponent overflow in product");
            if e == 1 {
                flat.push(base);
            } else {
                flat.push(intern(TermNode::IntPow(base, e)));
            }
        }
        if !coeff.is_one() || flat.is_empty() {
            flat.push(Term::rational(coeff));
        }
        flat.sort();
        match flat.len() {
            0 => Term::one(),
            1 => flat.pop().unwrap(),
            _ => intern(TermNode::Product(flat)),
        }
    }

    pub fn neg(&self) -> Term {
        Term::product(vec![Term::integer(-1), self.clone()])
    }

    pub fn ipow(&self, e: i64) -> Result<Term, TermError> {
        if e == 1 {
            return Ok(self.clone());
        }
        match self.node() {
            TermNode::Rational(q) => {
                if q.is_zero() {
                    return if e > 0 { Ok(Term::zero()) } else { Err(TermError::ZeroPower) };
                }
                let ua = e.unsigned_abs();
                if ua > 1 << 20 {
                    return Err(TermError::Overflow);
                }
                let p = num_traits::pow::pow(q.clone(), ua as usize);
                Ok(Term::rational(if e < 0 { p.recip() } else { p }))
            }
            _ if e == 0 => {
                if self.syntactically_nonzero() {
                    Ok(Term::one())
                } else {
                    Err(TermError::AmbiguousZeroPower)
                }
            }
            TermNode::IntPow(b, e2) => {
                let prod = e.checked_mul(*e2).ok_or(TermError::Overflow)?;
                b.ipow(prod)
            }
            TermNode::Product(cs) => {
                let parts: Result<Vec<Term>, TermError> = cs.iter().map(|c| c.ipow(e)).collect();
                Ok(Term::product(parts?))
            }
            _ => Ok(intern(TermNode::IntPow(self.clone(), e))),
        }
    }

    pub fn exp(&self) -> Term {
        match self.node() {
            // exp(log z + 2*pi*i*k) = z on every branch
            TermNode::Log(u, _) => u.clone(),
            TermNode::Rational(q) if q.is_zero() => Term::one(),
            _ => intern(TermNode::Exp(self.clone())),
        }
    }

    pub fn log(&self, branch: i64) -> Result<Term, TermError> {
        match self.node() {
            TermNode::Rational(q) if q.is_zero() => Err(TermError::LogOfZero),
            _ => Ok(intern(TermNode::Log(self.clone(), branch))),
        }
    }

    /// Conservative syntactic nonzero check (no numerics).
    pub fn syntactically_nonzero(&self) -> bool {
        match self.node() {
            TermNode::Rational(q) => !q.is_zero(),
            TermNode::AlgebraicLeaf(_) => true, // irreducible of degree >= 2
            TermNode::Exp(_) => true,
            TermNode::IntPow(b, _) => b.syntactically_nonzero(),
            TermNode::Product(cs) => cs.iter().all(|c| c.syntactically_nonzero()),
            // log z + 2*pi*i*k = 0 needs k = 0 and z = 1
            TermNode::Log(u, k) => {
                *k != 0 || matches!(u.node(), TermNode::Rational(q) if !q.is_one())
            }
            TermNode::Sum(_) => false,
        }
    }

    /// Rebuild bottom-up through the normalizing constructors.  Identity on
    /// terms built through this API (exercised by tests).
    pub fn normalize(&self) -> Term {
        match self.node() {
            TermNode::Rational(_) | TermNode::AlgebraicLeaf(_) => self.clone(),
            TermNode::Sum(cs) => Term::sum(cs.iter().map(|c| c.normalize()).collect()),
            TermNode::Product(cs) => Term::product(cs.iter().map(|c| c.normalize()).collect()),
            TermNode::IntPow(b, e) => b.normalize().ipow(*e).expect("was well-formed"),
            TermNode::Exp(t) => t.normalize().exp(),
            TermNode::Log(t, k) => t.normalize().log(*k).expect("was well-formed"),
        }
    }

    // -- tower levels (upper bounds; absent = no syntactic witness) --

    /// Level n certifying membership in E_n; None when a Log survives.
    pub fn e_level(&self) -> Option<u32> {
        match self.node() {
            TermNode::Rational(_) | TermNode::AlgebraicLeaf(_) => Some(0),
            TermNode::Exp(u) => u.e_level().map(|l| l + 1),
            TermNode::Log(..) => None,
            TermNode::IntPow(b, _) => b.e_level(),
            TermNode::Sum(cs) | TermNode::Product(cs) => {
                cs.iter().map(|c| c.e_level()).try_fold(0, |m, l| l.map(|l| m.max(l)))
            }
        }
    }

    /// Level n certifying membership in L_n; None when an Exp survives.
    pub fn l_level(&self) -> Option<u32> {
        match self.node() {
            TermNode::Rational(_) | TermNode::AlgebraicLeaf(_) => Some(0),
            TermNode::Log(u, _) => u.l_level().map(|l| l + 1),
            TermNode::Exp(..) => None,
            TermNode::IntPow(b, _) => b.l_level(),
            TermNode::Sum(cs) | TermNode::Product(cs) => {
                cs.iter().map(|c| c.l_level()).try_fold(0, |m, l| l.map(|l| m.max(l)))
            }
        }
    }

    /// Direct children, in stored order.
    pub fn children(&self) -> Vec<Term> {
        match self.node() {
            TermNode::Rational(_) | TermNode::AlgebraicLeaf(_) => vec![],
            TermNode::Sum(cs) | TermNode::Product(cs) => cs.clone(),
            TermNode::IntPow(b, _) => vec![b.clone()],
            TermNode::Exp(t) | TermNode::Log(t, _) => vec![t.clone()],
        }
    }

    /// All distinct subterms, post-order (children before parents).
    pub fn subterms(&self) -> Vec<Term> {
        fn walk(t: &Term, seen: &mut std::collections::HashSet<u64>, out: &mut Vec<Term>) {
            if !seen.insert(t.id()) {
                return;
            }
            for c in t.children() {
                walk(&c, seen, out);
            }
            out.push(t.clone());
        }
        let mut out = Vec::new();
        walk(self, &mut std::collections::HashSet::new(), &mut out);
        out
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.node(), TermNode::Rational(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self.node() {
            TermNode::Rational(q) => Some(q),
            _ => None,
        }
    }
}

/// The constant i*pi as a term: log(-1; 0).
pub fn i_pi() -> Term {
    Term::integer(-1).log(0).unwrap()
}

/// The constant pi as a term: (-1) * i * (i*pi).
pub fn pi() -> Term {
    let i = algebraic::lookup_name("i").expect("builtin");
    Term::product(vec![Term::integer(-1), Term::algebraic(i), i_pi()])
}

/// The constant e as a term: exp(1).
pub fn euler_e() -> Term {
    Term::one().exp()
}

// ---------------------------------------------------------------------------
// total term order: node-kind rank, then recursive lexicographic, then branch

fn rank(n: &TermNode) -> u8 {
    match n {
        TermNode::Rational(_) => 0,
        TermNode::AlgebraicLeaf(_) => 1,
        TermNode::Exp(_) => 2,
        TermNode::Log(..) => 3,
        TermNode::IntPow(..) => 4,
        TermNode::Product(_) => 5,
        TermNode::Sum(_) => 6,
    }
}

pub fn term_order(a: &Term, b: &Term) -> Ordering {
    if a.id() == b.id() {
        return Ordering::Equal;
    }
    let (na, nb) = (a.node(), b.node());
    rank(na).cmp(&rank(nb)).then_with(|| match (na, nb) {
        (TermNode::Rational(x), TermNode::Rational(y)) => x.cmp(y),
        (TermNode::AlgebraicLeaf(x), TermNode::AlgebraicLeaf(y)) => x.cmp(y),
        (TermNode::Exp(x), TermNode::Exp(y)) => term_order(x, y),
        (TermNode::Log(x, j), TermNode::Log(y, k)) => term_order(x, y).then(j.cmp(k)),
        (TermNode::IntPow(x, j), TermNode::IntPow(y, k)) => term_order(x, y).then(j.cmp(k)),
        (TermNode::Sum(xs), TermNode::Sum(ys)) | (TermNode::Product(xs), TermNode::Product(ys)) => {
            for (x, y) in xs.iter().zip(ys.iter()) {
                let c = term_order(x, y);
                if c != Ordering::Equal {
                    return c;
                }
            }
            xs.len().cmp(&ys.len())
        }
        _ => unreachable!("rank disambiguates kinds"),
    })
}

// ---------------------------------------------------------------------------
// printer: fully parenthesized normal forms

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            TermNode::Rational(q) => write!(f, "{}", q),
            TermNode::AlgebraicLeaf(a) => write!(f, "alg({})", algebraic::display_name(*a)),
            TermNode::Sum(cs) => {
                write!(f, "(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{}", c)?;
                }
                write!(f, ")")
            }
            TermNode::Product(cs) => {
                write!(f, "(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    write!(f, "{}", c)?;
                }
                write!(f, ")")
            }
            TermNode::IntPow(b, e) => write!(f, "({} ^ {})", b, e),
            TermNode::Exp(t) => write!(f, "exp({})", t),
            TermNode::Log(t, k) => write!(f, "log({}; {})", t, k),
        }
    }
}

// ---------------------------------------------------------------------------
// parser: recursive descent over the grammar in the module docs

pub fn parse(text: &str) -> Result<Term, TermError> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let t = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(t)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> TermError {
        TermError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<(), TermError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Term, TermError> {
        let mut parts = vec![self.prod()?];
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    parts.push(self.prod()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    parts.push(self.prod()?.neg());
                }
                _ => break,
            }
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Term::sum(parts) })
    }

    fn prod(&mut self) -> Result<Term, TermError> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(b'*') {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Term::product(parts) })
    }

    fn unary(&mut self) -> Result<Term, TermError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            Ok(self.unary()?.neg())
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Term, TermError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.signed_int()?;
            base.ipow(e)
        } else {
            Ok(base)
        }
    }

    fn signed_int(&mut self) -> Result<i64, TermError> {
        self.skip_ws();
        let start = self.pos;
        if self.s.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let d0 = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == d0 {
            return Err(self.err("expected integer"));
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse::<i64>()
            .map_err(|_| self.err("integer out of range"))
    }

    fn atom(&mut self) -> Result<Term, TermError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let t = self.expr()?;
                self.eat(b')')?;
                Ok(t)
            }
            Some(c) if c.is_ascii_digit() => self.rational(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            _ => Err(self.err("expected term")),
        }
    }

    fn rational(&mut self) -> Result<Term, TermError> {
        let n = self.big_digits()?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let d = self.big_digits()?;
            if d.is_zero() {
                return Err(self.err("zero denominator"));
            }
            Ok(Term::rational(BigRational::new(n, d)))
        } else {
            Ok(Term::rational(BigRational::from(n)))
        }
    }

    fn big_digits(&mut self) -> Result<BigInt, TermError> {
        self.skip_ws();
        let d0 = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == d0 {
            return Err(self.err("expected digits"));
        }
        Ok(std::str::from_utf8(&self.s[d0..self.pos]).unwrap().parse().unwrap())
    }

    fn ident(&mut self) -> Result<Term, TermError> {
        self.skip_ws();
        let d0 = self.pos;
        while self.pos < self.s.len()
            && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.s[d0..self.pos]).unwrap().to_string();
        match name.as_str() {
            "exp" => {
                self.eat(b'(')?;
                let t = self.expr()?;
                self.eat(b')')?;
                Ok(t.exp())
            }
            "log" => {
                self.eat(b'(')?;
                let t = self.expr()?;
                let k = if self.peek() == Some(b';') {
                    self.pos += 1;
                    self.signed_int()?
                } else {
                    0 // principal branch when omitted
                };
                self.eat(b')')?;
                t.log(k)
            }
            "alg" => {
                self.eat(b'(')?;
                self.skip_ws();
                let n0 = self.pos;
                while self.pos < self.s.len()
                    && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let aname = std::str::from_utf8(&self.s[n0..self.pos]).unwrap().to_string();
                self.eat(b')')?;
                resolve_alg(&aname)
            }
            "pi" => Ok(pi()),
            "e" => Ok(euler_e()),
            "i" => Ok(Term::algebraic(algebraic::lookup_name("i").expect("builtin"))),
            _ => Err(TermError::Parse {
                pos: d0,
                msg: format!("unknown identifier '{}'", name),
            }),
        }
    }
}

fn resolve_alg(name: &str) -> Result<Term, TermError> {
    if let Some(id) = algebraic::lookup_name(name) {
        return Ok(Term::algebraic(id));
    }
    // unnamed constants print as alg(aN); accept that spelling back
    if let Some(num) = name.strip_prefix('a') {
        if let Ok(id) = num.parse::<AlgId>() {
            if (id as usize) < algebraic::entries().len() {
                return Ok(Term::algebraic(id));
            }
        }
    }
    Err(TermError::UnknownName(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sqrt2() -> Term {
        Term::algebraic(algebraic::lookup_name("sqrt2").unwrap())
    }

    #[test]
    fn rational_folding() {
        let t = Term::sum(vec![Term::integer(1), Term::integer(2)]);
        assert_eq!(t, Term::integer(3));
        let p = Term::product(vec![Term::integer(6), Term::rational(BigRational::new(1.into(), 2.into()))]);
        assert_eq!(p, Term::integer(3));
    }

    #[test]
    fn exp_log_cancellation() {
        let t = Term::integer(2).log(0).unwrap().exp();
        assert_eq!(t, Term::integer(2));
        // any branch cancels
        let t = Term::integer(2).log(5).unwrap().exp();
        assert_eq!(t, Term::integer(2));
        // but log(exp(t)) never rewrites
        let u = euler_e().log(0).unwrap();
        assert!(matches!(u.node(), TermNode::Log(..)));
    }

    #[test]
    fn like_factor_collection() {
        let e = euler_e();
        let t = Term::product(vec![e.clone(), e.clone()]);
        assert_eq!(t, e.ipow(2).unwrap());
        let cancel = Term::product(vec![e.clone(), e.ipow(-1).unwrap()]);
        assert_eq!(cancel, Term::one());
    }

    #[test]
    fn log_of_zero_rejected() {
        assert!(matches!(Term::zero().log(0), Err(TermError::LogOfZero)));
        assert!(matches!(parse("log(0; 0)"), Err(TermError::LogOfZero)));
        assert!(matches!(parse("log(1 + -1; 0)"), Err(TermError::LogOfZero)));
    }

    #[test]
    fn parse_examples() {
        let t = parse("exp(exp(1))").unwrap();
        assert_eq!(t, euler_e().exp());
        let t = parse("log(-1; 0)").unwrap();
        assert_eq!(t, i_pi());
        let t = parse("exp(log(2; 0))").unwrap();
        assert_eq!(t, Term::integer(2));
    }

    #[test]
    fn parse_sugar() {
        assert_eq!(parse("pi").unwrap(), pi());
        assert_eq!(parse("e").unwrap(), euler_e());
        assert_eq!(parse("log(pi)").unwrap(), pi().log(0).unwrap());
        assert_eq!(parse("i * i").unwrap(), parse("i^2").unwrap());
    }

    #[test]
    fn levels() {
        assert_eq!(euler_e().e_level(), Some(1));
        assert_eq!(Term::integer(7).e_level(), Some(0));
        assert_eq!(Term::integer(7).l_level(), Some(0));
        let e3 = euler_e().exp().exp();
        assert_eq!(e3.e_level(), Some(3));
        assert_eq!(e3.l_level(), None);
        assert_eq!(i_pi().l_level(), Some(1));
        assert_eq!(i_pi().e_level(), None);
        assert_eq!(pi().l_level(), Some(1));
        assert_eq!(sqrt2().e_level(), Some(0));
        assert_eq!(sqrt2().l_level(), Some(0));
        // log log pi has level 3
        let llp = pi().log(0).unwrap().log(0).unwrap();
        assert_eq!(llp.l_level(), Some(3));
        // mixed terms get neither level
        let mixed = Term::sum(vec![euler_e(), i_pi()]);
        assert_eq!(mixed.e_level(), None);
        assert_eq!(mixed.l_level(), None);
    }

    #[test]
    fn order_is_total_and_kind_ranked() {
        assert_eq!(term_order(&Term::integer(1), &euler_e()), Ordering::Less);
        assert_eq!(term_order(&euler_e(), &euler_e()), Ordering::Equal);
        let mut v = vec![euler_e(), Term::integer(2), i_pi()];
        v.sort();
        assert_eq!(v, vec![Term::integer(2), euler_e(), i_pi()]);
    }

    #[test]
    fn hash_consing_shares_nodes() {
        let a = parse("exp(1) + exp(1) * exp(1)").unwrap();
        let b = Term::sum(vec![euler_e(), euler_e().ipow(2).unwrap()]);
        assert_eq!(a.id(), b.id());
    }

    #[test]
    fn printer_round_trip_on_samples() {
        for s in [
            "exp(exp(1))",
            "log(-1; 0)",
            "(1/2 + exp(1) + (exp(1) ^ 2))",
            "(3 * alg(sqrt2) * log(2; -1))",
            "((exp(1) + exp(exp(1))) ^ 3)",
            "log(log(-1; 0); 2)",
            "(-1 * alg(i))",
        ] {
            let t = parse(s).unwrap();
            assert_eq!(parse(&t.to_string()).unwrap(), t, "round trip through '{}'", t);
        }
    }

    #[test]
    fn zero_power_rules() {
        assert!(matches!(Term::zero().ipow(-1), Err(TermError::ZeroPower)));
        assert_eq!(euler_e().ipow(0).unwrap(), Term::one());
        let unknown = Term::sum(vec![euler_e(), i_pi()]);
        assert!(matches!(unknown.ipow(0), Err(TermError::AmbiguousZeroPower)));
    }

    // random normalized terms (small, exp-log flavored)
    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            (-4i64..5).prop_map(Term::integer),
            (1i64..5, 1i64..5).prop_map(|(n, d)| Term::rational(BigRational::new(n.into(), d.into()))),
            Just(sqrt2()),
            Just(Term::algebraic(algebraic::lookup_name("i").unwrap())),
        ];
        leaf.prop_recursive(4, 24, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 2..4).prop_map(Term::sum),
                prop::collection::vec(inner.clone(), 2..4).prop_map(Term::product),
                (inner.clone(), prop_oneof![-3i64..0, 2i64..4])
                    .prop_map(|(t, e)| t.ipow(e).unwrap_or_else(|_| Term::one())),
                inner.clone().prop_map(|t| t.exp()),
                (inner, -2i64..3)
                    .prop_map(|(t, k)| t.log(k).unwrap_or_else(|_| i_pi())),
            ]
        })
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(t in arb_term()) {
            prop_assert_eq!(t.normalize(), t.clone());
        }

        #[test]
        fn print_parse_round_trip(t in arb_term()) {
            prop_assert_eq!(parse(&t.to_string()).unwrap(), t.clone());
        }

        #[test]
        fn no_exp_of_log_survives(t in arb_term()) {
            for s in t.subterms() {
                if let TermNode::Exp(u) = s.node() {
                    prop_assert!(!matches!(u.node(), TermNode::Log(..)));
                }
            }
        }

        #[test]
        fn sums_and_products_are_flat_and_sorted(t in arb_term()) {
            for s in t.subterms() {
                match s.node() {
                    TermNode::Sum(cs) => {
                        prop_assert!(cs.len() >= 2);
                        prop_assert!(cs.windows(2).all(|w| term_order(&w[0], &w[1]) != Ordering::Greater));
                        prop_assert!(!cs.iter().any(|c| matches!(c.node(), TermNode::Sum(_))));
                        prop_assert!(cs.iter().filter(|c| c.is_rational()).count() <= 1);
                    }
                    TermNode::Product(cs) => {
                        prop_assert!(cs.len() >= 2);
                        prop_assert!(cs.windows(2).all(|w| term_order(&w[0], &w[1]) != Ordering::Greater));
                        prop_assert!(!cs.iter().any(|c| matches!(c.node(), TermNode::Product(_))));
                        prop_assert!(cs.iter().filter(|c| c.is_rational()).count() <= 1);
                    }
                    TermNode::IntPow(_, e) => prop_assert!(*e != 0),
                    _ => {}
                }
            }
        }
    }
}
