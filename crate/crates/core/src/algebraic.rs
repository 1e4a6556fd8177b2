//! Algebraic constants as minimal polynomial + isolating complex box, with a
//! global named registry and degree-capped exact arithmetic.
//!
//! Arithmetic goes through resultants: the result's minimal polynomial is a
//! factor of a resultant, and the right factor/root is picked by shrinking a
//! ball enclosure of the value until exactly one certified root disk meets it.
//! Root disks come from Aberth refinement plus the a-posteriori bound
//! |root - z| <= deg * |f(z)/f'(z)|, evaluated in ball arithmetic so the radii
//! are rigorous.

use crate::ball::{
    bf_from_bigint, bf_from_ratio, bf_to_rational, pow2, strictly_positive, with_consts, Ball,
    RAD_PREC,
};
use crate::poly::{factor, IntPoly};
use astro_float::{BigFloat, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

const RM: RoundingMode = RoundingMode::ToEven;
const UP: RoundingMode = RoundingMode::FromZero;

/// Escalation ceiling for working precision (bits).
const MAX_PREC: usize = 1 << 19;

pub type AlgId = u32;

#[derive(thiserror::Error, Debug)]
pub enum AlgError {
    #[error("polynomial is reducible and the box meets roots of distinct factors: {0:?}")]
    Reducible(Vec<IntPoly>),
    #[error("box does not isolate exactly one root: {0}")]
    NonIsolating(String),
    #[error("degree cap {cap} exceeded (needed {needed})")]
    DegreeCap { cap: usize, needed: usize },
    #[error("inversion of zero")]
    InvertZero,
    #[error("precision escalation exhausted")]
    PrecisionExhausted,
    #[error("registry: {0}")]
    Registry(String),
}

/// A rectangle in the complex plane with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexBox {
    pub re_lo: BigRational,
    pub re_hi: BigRational,
    pub im_lo: BigRational,
    pub im_hi: BigRational,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl ComplexBox {
    pub fn new(re_lo: BigRational, re_hi: BigRational, im_lo: BigRational, im_hi: BigRational) -> Self {
        assert!(re_lo <= re_hi && im_lo <= im_hi, "degenerate box");
        ComplexBox { re_lo, re_hi, im_lo, im_hi }
    }

    /// Convenience constructor from integer fractions (tests, builtins).
    pub fn from_i64(re: (i64, i64, i64, i64), im: (i64, i64, i64, i64)) -> Self {
        ComplexBox::new(rat(re.0, re.1), rat(re.2, re.3), rat(im.0, im.1), rat(im.2, im.3))
    }

    pub fn max_side(&self) -> BigRational {
        let w = &self.re_hi - &self.re_lo;
        let h = &self.im_hi - &self.im_lo;
        if w >= h { w } else { h }
    }

    pub fn contains_rational_point(&self, re: &BigRational, im: &BigRational) -> bool {
        *re >= self.re_lo && *re <= self.re_hi && *im >= self.im_lo && *im <= self.im_hi
    }

    pub fn contains_box(&self, o: &ComplexBox) -> bool {
        o.re_lo >= self.re_lo && o.re_hi <= self.re_hi && o.im_lo >= self.im_lo && o.im_hi <= self.im_hi
    }

    fn disk_rationals(c: &Cpx, r: &BigFloat) -> (BigRational, BigRational, BigRational) {
        (bf_to_rational(&c.re), bf_to_rational(&c.im), bf_to_rational(r))
    }

    /// Disk entirely inside the box (exact: BigFloats are dyadic).
    pub fn contains_disk(&self, c: &Cpx, r: &BigFloat) -> bool {
        let (cr, ci, rr) = Self::disk_rationals(c, r);
        &cr - &rr >= self.re_lo
            && &cr + &rr <= self.re_hi
            && &ci - &rr >= self.im_lo
            && &ci + &rr <= self.im_hi
    }

    /// Disk's bounding square misses the box entirely.
    pub fn disjoint_from_disk(&self, c: &Cpx, r: &BigFloat) -> bool {
        let (cr, ci, rr) = Self::disk_rationals(c, r);
        &cr + &rr < self.re_lo
            || &cr - &rr > self.re_hi
            || &ci + &rr < self.im_lo
            || &ci - &rr > self.im_hi
    }

    pub fn from_disk(c: &Cpx, r: &BigFloat) -> Self {
        let (cr, ci, rr) = Self::disk_rationals(c, r);
        ComplexBox::new(&cr - &rr, &cr + &rr, &ci - &rr, &ci + &rr)
    }

    pub fn intersect(&self, o: &ComplexBox) -> Option<ComplexBox> {
        let re_lo = self.re_lo.clone().max(o.re_lo.clone());
        let re_hi = self.re_hi.clone().min(o.re_hi.clone());
        let im_lo = self.im_lo.clone().max(o.im_lo.clone());
        let im_hi = self.im_hi.clone().min(o.im_hi.clone());
        if re_lo <= re_hi && im_lo <= im_hi {
            Some(ComplexBox { re_lo, re_hi, im_lo, im_hi })
        } else {
            None
        }
    }

    pub fn negated(&self) -> ComplexBox {
        ComplexBox {
            re_lo: -self.re_hi.clone(),
            re_hi: -self.re_lo.clone(),
            im_lo: -self.im_hi.clone(),
            im_hi: -self.im_lo.clone(),
        }
    }

    /// Scale by a nonzero real rational.
    pub fn scaled(&self, q: &BigRational) -> ComplexBox {
        let b = ComplexBox {
            re_lo: &self.re_lo * q,
            re_hi: &self.re_hi * q,
            im_lo: &self.im_lo * q,
            im_hi: &self.im_hi * q,
        };
        if q.is_negative() {
            ComplexBox {
                re_lo: b.re_hi.clone(),
                re_hi: b.re_lo.clone(),
                im_lo: b.im_hi.clone(),
                im_hi: b.im_lo.clone(),
            }
        } else {
            b
        }
    }

    /// Translate by a real rational.
    pub fn shifted(&self, q: &BigRational) -> ComplexBox {
        ComplexBox {
            re_lo: &self.re_lo + q,
            re_hi: &self.re_hi + q,
            im_lo: self.im_lo.clone(),
            im_hi: self.im_hi.clone(),
        }
    }

    pub fn to_ball(&self, prec: usize) -> Ball {
        Ball::from_box(&self.re_lo, &self.re_hi, &self.im_lo, &self.im_hi, prec)
    }

    /// `re_lo,re_hi,im_lo,im_hi` as used by registry files.
    pub fn registry_string(&self) -> String {
        format!("{},{},{},{}", self.re_lo, self.re_hi, self.im_lo, self.im_hi)
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!("expected 4 comma-separated rationals, got {}", parts.len()));
        }
        let mut vals = Vec::with_capacity(4);
        for p in parts {
            vals.push(p.parse::<BigRational>().map_err(|e| format!("bad rational '{}': {}", p, e))?);
        }
        let im_hi = vals.pop().unwrap();
        let im_lo = vals.pop().unwrap();
        let re_hi = vals.pop().unwrap();
        let re_lo = vals.pop().unwrap();
        if re_lo > re_hi || im_lo > im_hi {
            return Err("box endpoints out of order".into());
        }
        Ok(ComplexBox { re_lo, re_hi, im_lo, im_hi })
    }
}

/// Immutable registry entry.
#[derive(Clone, Debug)]
pub struct AlgebraicConst {
    pub id: AlgId,
    pub name: Option<String>,
    pub min_poly: IntPoly,
    pub bbox: ComplexBox,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AlgValue {
    Rational(BigRational),
    Algebraic(AlgId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Mul,
    Neg,
    Inv,
}

struct Registry {
    items: Vec<AlgebraicConst>,
    names: HashMap<String, AlgId>,
}

static DEGREE_CAP: AtomicUsize = AtomicUsize::new(64);

pub fn degree_cap() -> usize {
    DEGREE_CAP.load(Ordering::Relaxed)
}

pub fn set_degree_cap(cap: usize) {
    DEGREE_CAP.store(cap.max(2), Ordering::Relaxed);
}

static REGISTRY: Lazy<RwLock<Registry>> = Lazy::new(|| {
    let mut reg = Registry { items: Vec::new(), names: HashMap::new() };
    // x^2 + 1 with the upper root: the imaginary unit
    reg.items.push(AlgebraicConst {
        id: 0,
        name: Some("i".into()),
        min_poly: IntPoly::from_i64(&[1, 0, 1]),
        bbox: ComplexBox::from_i64((-1, 2, 1, 2), (1, 2, 3, 2)),
    });
    reg.names.insert("i".into(), 0);
    // x^2 - 2 with the positive root
    reg.items.push(AlgebraicConst {
        id: 1,
        name: Some("sqrt2".into()),
        min_poly: IntPoly::from_i64(&[-2, 0, 1]),
        bbox: ComplexBox::from_i64((1, 1, 2, 1), (-1, 2, 1, 2)),
    });
    reg.names.insert("sqrt2".into(), 1);
    RwLock::new(reg)
});

pub fn get(id: AlgId) -> AlgebraicConst {
    REGISTRY.read().unwrap().items[id as usize].clone()
}

pub fn lookup_name(name: &str) -> Option<AlgId> {
    REGISTRY.read().unwrap().names.get(name).copied()
}

pub fn entries() -> Vec<AlgebraicConst> {
    REGISTRY.read().unwrap().items.clone()
}

/// Registry name if any, else a stable synthetic one.
pub fn display_name(id: AlgId) -> String {
    match get(id).name {
        Some(n) => n,
        None => format!("a{}", id),
    }
}

// ---------------------------------------------------------------------------
// complex floating point (plain, nearest-rounded; used for iteration only)

#[derive(Clone, Debug)]
pub struct Cpx {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Cpx {
    fn zero(p: usize) -> Self {
        Cpx { re: BigFloat::new(p), im: BigFloat::new(p) }
    }

    fn add(&self, o: &Cpx, p: usize) -> Cpx {
        Cpx { re: self.re.add(&o.re, p, RM), im: self.im.add(&o.im, p, RM) }
    }

    fn sub(&self, o: &Cpx, p: usize) -> Cpx {
        Cpx { re: self.re.sub(&o.re, p, RM), im: self.im.sub(&o.im, p, RM) }
    }

    fn mul(&self, o: &Cpx, p: usize) -> Cpx {
        let re = self.re.mul(&o.re, p, RM).sub(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.re.mul(&o.im, p, RM).add(&self.im.mul(&o.re, p, RM), p, RM);
        Cpx { re, im }
    }

    fn div(&self, o: &Cpx, p: usize) -> Option<Cpx> {
        let n2 = o.re.mul(&o.re, p, RM).add(&o.im.mul(&o.im, p, RM), p, RM);
        if n2.is_zero() {
            return None;
        }
        let re = self.re.mul(&o.re, p, RM).add(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.im.mul(&o.re, p, RM).sub(&self.re.mul(&o.im, p, RM), p, RM);
        Some(Cpx { re: re.div(&n2, p, RM), im: im.div(&n2, p, RM) })
    }

    fn abs(&self, p: usize) -> BigFloat {
        self.re
            .mul(&self.re, p, RM)
            .add(&self.im.mul(&self.im, p, RM), p, RM)
            .sqrt(p, RM)
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Exact ball (zero radius) around this point.
    fn to_exact_ball(&self, p: usize) -> Ball {
        Ball {
            re: self.re.clone(),
            im: self.im.clone(),
            rad: BigFloat::new(RAD_PREC),
            prec: p,
        }
    }
}

fn horner(cs: &[BigFloat], z: &Cpx, p: usize) -> Cpx {
    let mut acc = Cpx::zero(p);
    for c in cs.iter().rev() {
        acc = acc.mul(z, p);
        acc.re = acc.re.add(c, p, RM);
    }
    acc
}

/// Horner evaluation of an integer polynomial at an exact complex point,
/// in ball arithmetic (rigorous enclosure).
fn horner_ball(f: &IntPoly, zb: &Ball, p: usize) -> Ball {
    let mut acc = Ball::exact_zero(p);
    for c in f.coeffs.iter().rev() {
        acc = acc.mul(zb);
        let cb = ball_from_bigint(c, p);
        acc = acc.add(&cb);
    }
    acc
}

fn ball_from_bigint(c: &BigInt, p: usize) -> Ball {
    let re = bf_from_bigint(c, p);
    let rad = match re.exponent() {
        Some(e) if !re.is_zero() => pow2(e as i64 - p as i64 + 1),
        _ => BigFloat::new(RAD_PREC),
    };
    Ball { re, im: BigFloat::new(p), rad, prec: p }
}

// ---------------------------------------------------------------------------
// certified root isolation

/// Aberth-Ehrlich simultaneous refinement of all roots of `f` (squarefree).
fn aberth(f: &IntPoly, p: usize) -> Vec<Cpx> {
    let d = f.deg();
    let cs: Vec<BigFloat> = f.coeffs.iter().map(|c| bf_from_bigint(c, p)).collect();
    let fd = f.derivative();
    let ds: Vec<BigFloat> = fd.coeffs.iter().map(|c| bf_from_bigint(c, p)).collect();
    let radius = bf_from_ratio(&f.cauchy_bound(), p);
    let mut zs: Vec<Cpx> = Vec::with_capacity(d);
    with_consts(|cc| {
        let pi = cc.pi(p, RM);
        let two_pi = pi.mul(&BigFloat::from_word(2, p), p, RM);
        for j in 0..d {
            // irrational-ish angle offset avoids symmetric stalling
            let frac = (j as f64 + 0.3819660112) / d as f64;
            let th = two_pi.mul(&BigFloat::from_f64(frac, p), p, RM);
            let (s, c) = (th.sin(p, RM, cc), th.cos(p, RM, cc));
            zs.push(Cpx { re: radius.mul(&c, p, RM), im: radius.mul(&s, p, RM) });
        }
    });
    let thresh_exp = -(p as i64) + 8;
    let max_iters = 64 + 8 * d + p / 4;
    for _ in 0..max_iters {
        let mut moved = false;
        for j in 0..d {
            let z = zs[j].clone();
            let fz = horner(&cs, &z, p);
            if fz.is_zero() {
                continue;
            }
            let dz = horner(&ds, &z, p);
            let w = match fz.div(&dz, p) {
                Some(w) => w,
                None => {
                    // landed on a critical point: nudge and retry next sweep
                    zs[j].re = zs[j].re.add(&pow2(-8), p, RM);
                    moved = true;
                    continue;
                }
            };
            let mut s = Cpx::zero(p);
            let one = Cpx { re: BigFloat::from_word(1, p), im: BigFloat::new(p) };
            let mut collision = false;
            for (k, zk) in zs.iter().enumerate() {
                if k == j {
                    continue;
                }
                match one.div(&z.sub(zk, p), p) {
                    Some(t) => s = s.add(&t, p),
                    None => {
                        collision = true;
                        break;
                    }
                }
            }
            if collision {
                zs[j].im = zs[j].im.add(&pow2(-8), p, RM);
                moved = true;
                continue;
            }
            let denom = one.sub(&w.mul(&s, p), p);
            let corr = w.div(&denom, p).unwrap_or(w);
            let scale = BigFloat::from_word(1, RAD_PREC).add(&z.abs(RAD_PREC), RAD_PREC, RM);
            let small = corr
                .abs(RAD_PREC)
                .cmp(&scale.mul(&pow2(thresh_exp), RAD_PREC, RM))
                .map_or(false, |c| c <= 0);
            zs[j] = z.sub(&corr, p);
            if !small {
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    zs
}

/// A-posteriori disk radius: deg * |f(z)/f'(z)| (upper bound via balls).
/// The closed disk of this radius around z contains at least one root.
fn certify_disk(f: &IntPoly, fd: &IntPoly, z: &Cpx, p: usize) -> Option<BigFloat> {
    let zb = z.to_exact_ball(p);
    let fb = horner_ball(f, &zb, p);
    let db = horner_ball(fd, &zb, p);
    let dlb = db.abs_lb();
    if !strictly_positive(&dlb) {
        return None;
    }
    let q = fb.abs_ub().div(&dlb, RAD_PREC, UP);
    let r = q.mul(&BigFloat::from_word(f.deg() as u64, RAD_PREC), RAD_PREC, UP);
    // pad so dyadic conversion downstream stays an over-estimate
    Some(r.mul(&BigFloat::from_word(1, RAD_PREC).add(&pow2(-30), RAD_PREC, UP), RAD_PREC, UP))
}

/// All roots of squarefree `f` as pairwise-disjoint certified disks, or None
/// if certification fails at this precision (caller escalates).
pub fn certified_roots(f: &IntPoly, p: usize) -> Option<Vec<(Cpx, BigFloat)>> {
    let d = f.deg();
    if d == 0 {
        return Some(vec![]);
    }
    let zs = aberth(f, p);
    let fd = f.derivative();
    let mut out = Vec::with_capacity(d);
    for z in &zs {
        out.push((z.clone(), certify_disk(f, &fd, z, p)?));
    }
    // d disjoint disks, each holding >= 1 of the d roots: exactly one each
    for i in 0..d {
        for j in i + 1..d {
            let diff = out[i].0.to_exact_ball(p).sub(&out[j].0.to_exact_ball(p));
            let lb = diff.abs_lb();
            let sum = out[i].1.add(&out[j].1, RAD_PREC, UP);
            if lb.cmp(&sum).map_or(true, |c| c <= 0) {
                return None;
            }
        }
    }
    Some(out)
}

fn ball_from_disk(c: &Cpx, r: &BigFloat, out_prec: usize) -> Ball {
    let mut re = c.re.clone();
    let mut im = c.im.clone();
    re.set_precision(out_prec, RM).expect("set_precision");
    im.set_precision(out_prec, RM).expect("set_precision");
    let mut rad = r.clone();
    for x in [&re, &im] {
        if let Some(e) = x.exponent() {
            if !x.is_zero() {
                rad = rad.add(&pow2(e as i64 - out_prec as i64 + 1), RAD_PREC, UP);
            }
        }
    }
    Ball { re, im, rad, prec: out_prec }
}

// ---------------------------------------------------------------------------
// construction and identification

fn escalate(mut p: usize) -> impl Iterator<Item = usize> {
    p = p.max(64);
    std::iter::from_fn(move || {
        if p > MAX_PREC {
            None
        } else {
            let cur = p;
            p *= 2;
            Some(cur)
        }
    })
}

/// Construct from a polynomial and an isolating box; dedups into the registry.
pub fn make_algebraic(poly: &IntPoly, bbox: &ComplexBox) -> Result<AlgValue, AlgError> {
    make_algebraic_named(poly, bbox, None)
}

pub fn make_algebraic_named(
    poly: &IntPoly,
    bbox: &ComplexBox,
    name: Option<&str>,
) -> Result<AlgValue, AlgError> {
    if poly.is_zero() || poly.deg() == 0 {
        return Err(AlgError::NonIsolating("constant polynomial has no roots".into()));
    }
    let cap = degree_cap();
    if poly.deg() > 4 * cap.max(64) {
        return Err(AlgError::DegreeCap { cap, needed: poly.deg() });
    }
    let f = poly.primitive();
    let factors = factor(&f);
    for p in escalate(128) {
        let mut selected: Vec<(usize, Cpx, BigFloat)> = Vec::new();
        let mut crossing = false;
        let mut certified = true;
        'factors: for (fi, (g, _)) in factors.iter().enumerate() {
            match certified_roots(g, p) {
                None => {
                    certified = false;
                    break 'factors;
                }
                Some(roots) => {
                    for (c, r) in roots {
                        if bbox.contains_disk(&c, &r) {
                            selected.push((fi, c, r));
                        } else if !bbox.disjoint_from_disk(&c, &r) {
                            crossing = true;
                        }
                    }
                }
            }
        }
        if !certified || crossing {
            continue;
        }
        return match selected.len() {
            0 => Err(AlgError::NonIsolating("box contains no root".into())),
            1 => {
                let (fi, c, r) = selected.pop().unwrap();
                finalize_root(&factors[fi].0, &c, &r, name)
            }
            n => {
                let fis: std::collections::BTreeSet<usize> =
                    selected.iter().map(|(fi, _, _)| *fi).collect();
                if fis.len() > 1 {
                    Err(AlgError::Reducible(factors.iter().map(|(g, _)| g.clone()).collect()))
                } else {
                    Err(AlgError::NonIsolating(format!("box contains {} roots", n)))
                }
            }
        };
    }
    Err(AlgError::PrecisionExhausted)
}

fn finalize_root(
    g: &IntPoly,
    c: &Cpx,
    r: &BigFloat,
    name: Option<&str>,
) -> Result<AlgValue, AlgError> {
    if g.deg() == 1 {
        // root of c1*x + c0
        let v = -BigRational::new(g.coeff(0), g.coeff(1));
        return Ok(AlgValue::Rational(v));
    }
    let cap = degree_cap();
    if g.deg() > cap {
        return Err(AlgError::DegreeCap { cap, needed: g.deg() });
    }
    insert_dedup(g.clone(), ComplexBox::from_disk(c, r), name).map(AlgValue::Algebraic)
}

/// Do two isolating boxes for the same irreducible polynomial pin the same
/// root?  Decidable: disks shrink below the (positive) root separation.
fn same_root(g: &IntPoly, b1: &ComplexBox, b2: &ComplexBox) -> Result<bool, AlgError> {
    for p in escalate(128) {
        if let Some(roots) = certified_roots(g, p) {
            let hit = |b: &ComplexBox| -> Vec<usize> {
                roots
                    .iter()
                    .enumerate()
                    .filter(|(_, (c, r))| !b.disjoint_from_disk(c, r))
                    .map(|(i, _)| i)
                    .collect()
            };
            let (h1, h2) = (hit(b1), hit(b2));
            if h1.len() == 1 && h2.len() == 1 {
                return Ok(h1[0] == h2[0]);
            }
        }
    }
    Err(AlgError::PrecisionExhausted)
}

fn insert_dedup(g: IntPoly, bbox: ComplexBox, name: Option<&str>) -> Result<AlgId, AlgError> {
    // find an existing entry for the same root (outside the lock: root
    // isolation can be slow)
    let existing: Vec<(AlgId, ComplexBox)> = {
        let reg = REGISTRY.read().unwrap();
        reg.items
            .iter()
            .filter(|e| e.min_poly == g)
            .map(|e| (e.id, e.bbox.clone()))
            .collect()
    };
    let mut found = None;
    for (id, eb) in &existing {
        if *eb == bbox || same_root(&g, eb, &bbox)? {
            found = Some(*id);
            break;
        }
    }
    let mut reg = REGISTRY.write().unwrap();
    let id = match found {
        Some(id) => id,
        None => {
            let id = reg.items.len() as AlgId;
            reg.items.push(AlgebraicConst {
                id,
                name: name.map(str::to_owned),
                min_poly: g,
                bbox,
            });
            id
        }
    };
    if let Some(n) = name {
        match reg.names.get(n) {
            Some(&other) if other != id => {
                return Err(AlgError::Registry(format!(
                    "name '{}' already bound to a different constant",
                    n
                )));
            }
            _ => {
                reg.names.insert(n.to_owned(), id);
                if reg.items[id as usize].name.is_none() {
                    reg.items[id as usize].name = Some(n.to_owned());
                }
            }
        }
    }
    Ok(id)
}

/// Rigorous ball enclosure of the constant at (at least) the given precision.
pub fn enclosure(id: AlgId, prec: usize) -> Ball {
    let ent = get(id);
    let prec = prec.max(64);
    for p in escalate(prec) {
        if let Some(roots) = certified_roots(&ent.min_poly, p) {
            let hits: Vec<&(Cpx, BigFloat)> = roots
                .iter()
                .filter(|(c, r)| !ent.bbox.disjoint_from_disk(c, r))
                .collect();
            if hits.len() == 1 {
                return ball_from_disk(&hits[0].0, &hits[0].1, prec);
            }
        }
    }
    // sound but coarse fallback
    ent.bbox.to_ball(prec)
}

/// Sub-box of the stored box still isolating the root, max side <= target.
pub fn refine_box(id: AlgId, target: &BigRational) -> Result<ComplexBox, AlgError> {
    assert!(target.is_positive(), "target radius must be positive");
    let ent = get(id);
    let start =
        (target.denom().bits() as i64 - target.numer().bits() as i64 + 64).max(64) as usize;
    for p in escalate(start) {
        if let Some(roots) = certified_roots(&ent.min_poly, p) {
            let hits: Vec<&(Cpx, BigFloat)> = roots
                .iter()
                .filter(|(c, r)| !ent.bbox.disjoint_from_disk(c, r))
                .collect();
            if hits.len() == 1 {
                let (c, r) = hits[0];
                if let Some(ib) = ComplexBox::from_disk(c, r).intersect(&ent.bbox) {
                    if ib.max_side() <= *target {
                        return Ok(ib);
                    }
                }
            }
        }
    }
    Err(AlgError::PrecisionExhausted)
}

// ---------------------------------------------------------------------------
// field arithmetic

/// Identify which root of which candidate polynomial the value is, by
/// shrinking a ball enclosure of the value until one certified disk remains.
fn identify_root(
    rpoly: &IntPoly,
    value: impl Fn(usize) -> Option<Ball>,
) -> Result<AlgValue, AlgError> {
    let factors = factor(&rpoly.primitive());
    for p in escalate(128) {
        let vb = match value(p) {
            Some(vb) => vb,
            None => continue,
        };
        let mut hits: Vec<(&IntPoly, Cpx, BigFloat)> = Vec::new();
        let mut certified = true;
        'factors: for (g, _) in &factors {
            match certified_roots(g, p) {
                None => {
                    certified = false;
                    break 'factors;
                }
                Some(roots) => {
                    for (c, r) in roots {
                        let cb = Ball {
                            re: c.re.clone(),
                            im: c.im.clone(),
                            rad: r.clone(),
                            prec: p,
                        };
                        if cb.overlaps(&vb) {
                            hits.push((g, c, r));
                        }
                    }
                }
            }
        }
        if certified && hits.len() == 1 {
            let (g, c, r) = hits.remove(0);
            return finalize_root(g, &c, &r, None);
        }
    }
    Err(AlgError::PrecisionExhausted)
}

/// g(t - y) as a polynomial in y, for integer t.
fn shift_sub(g: &IntPoly, t: &BigInt) -> IntPoly {
    // Horner in (t - y)
    let lin = IntPoly::new(vec![t.clone(), BigInt::from(-1)]);
    let mut acc = IntPoly::zero();
    for c in g.coeffs.iter().rev() {
        acc = acc.mul(&lin).add(&IntPoly::constant(c.clone()));
    }
    acc
}

/// y^deg(g) * g(t / y) as a polynomial in y, for integer t.
fn homogenize_at(g: &IntPoly, t: &BigInt) -> IntPoly {
    let d = g.deg();
    let mut cs = vec![BigInt::zero(); d + 1];
    let mut tp = BigInt::one();
    for j in 0..=d {
        cs[d - j] = g.coeff(j) * &tp;
        tp *= t;
    }
    IntPoly::new(cs)
}

/// Interpolate the integer polynomial of degree <= n-1 through
/// (points[i], values[i]) (Lagrange over the rationals; result is integral).
fn interpolate(points: &[BigInt], values: &[BigInt]) -> IntPoly {
    let n = points.len();
    let mut acc: Vec<BigRational> = vec![BigRational::zero(); n];
    for i in 0..n {
        // basis polynomial prod_{j != i} (x - x_j) / (x_i - x_j)
        let mut num = vec![BigRational::one()];
        let mut den = BigRational::one();
        for (j, xj) in points.iter().enumerate() {
            if j == i {
                continue;
            }
            let mut next = vec![BigRational::zero(); num.len() + 1];
            for (k, c) in num.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * BigRational::from(xj.clone());
            }
            num = next;
            den *= BigRational::from(&points[i] - xj);
        }
        let w = BigRational::from(values[i].clone()) / den;
        for (k, c) in num.iter().enumerate() {
            acc[k] += c * &w;
        }
    }
    let coeffs: Vec<BigInt> = acc
        .into_iter()
        .map(|c| {
            debug_assert!(c.denom().is_one(), "interpolation must be integral");
            c.to_integer()
        })
        .collect();
    IntPoly::new(coeffs)
}

/// Resultant-based polynomial for alpha + beta or alpha * beta, by
/// evaluation at integer points and interpolation.
fn combine_poly(f: &IntPoly, g: &IntPoly, mul: bool) -> IntPoly {
    let d = f.deg() * g.deg();
    let points: Vec<BigInt> = (0..=d as i64).map(BigInt::from).collect();
    let values: Vec<BigInt> = points
        .iter()
        .map(|t| {
            let gy = if mul { homogenize_at(g, t) } else { shift_sub(g, t) };
            f.resultant(&gy)
        })
        .collect();
    interpolate(&points, &values)
}

pub fn field_op(op: FieldOp, a: AlgId, b: Option<AlgId>) -> Result<AlgValue, AlgError> {
    match op {
        FieldOp::Neg => neg(a),
        FieldOp::Inv => inv(a),
        FieldOp::Add => add(a, b.expect("add needs two operands")),
        FieldOp::Mul => mul(a, b.expect("mul needs two operands")),
    }
}

pub fn neg(a: AlgId) -> Result<AlgValue, AlgError> {
    let ent = get(a);
    let mut g = ent.min_poly.compose_neg().primitive();
    if g.lc().is_negative() {
        g = g.neg();
    }
    insert_dedup(g, ent.bbox.negated(), None).map(AlgValue::Algebraic)
}

pub fn inv(a: AlgId) -> Result<AlgValue, AlgError> {
    let ent = get(a);
    // registry entries have degree >= 2, so the constant term is nonzero
    // and the value is nonzero
    debug_assert!(!ent.min_poly.coeff(0).is_zero());
    let mut g = ent.min_poly.reversed().primitive();
    if g.lc().is_negative() {
        g = g.neg();
    }
    let cands = vec![(g.clone(), 1u32)];
    identify_from_factors(&cands, |p| enclosure(a, p).inv())
}

pub fn add(a: AlgId, b: AlgId) -> Result<AlgValue, AlgError> {
    let (ea, eb) = (get(a), get(b));
    cap_guard(ea.min_poly.deg() * eb.min_poly.deg())?;
    let rp = combine_poly(&ea.min_poly, &eb.min_poly, false);
    identify_root(&rp, |p| Some(enclosure(a, p).add(&enclosure(b, p))))
}

pub fn mul(a: AlgId, b: AlgId) -> Result<AlgValue, AlgError> {
    let (ea, eb) = (get(a), get(b));
    cap_guard(ea.min_poly.deg() * eb.min_poly.deg())?;
    let rp = combine_poly(&ea.min_poly, &eb.min_poly, true);
    identify_root(&rp, |p| Some(enclosure(a, p).mul(&enclosure(b, p))))
}

fn cap_guard(bound: usize) -> Result<(), AlgError> {
    // the true result degree could be smaller, but the resultant work is
    // bounded by the product, so refuse early
    let cap = degree_cap();
    if bound > cap * cap.max(8) {
        return Err(AlgError::DegreeCap { cap, needed: bound });
    }
    Ok(())
}

/// Like identify_root but for an already-factored candidate list.
fn identify_from_factors(
    factors: &[(IntPoly, u32)],
    value: impl Fn(usize) -> Option<Ball>,
) -> Result<AlgValue, AlgError> {
    for p in escalate(128) {
        let vb = match value(p) {
            Some(vb) => vb,
            None => continue,
        };
        let mut hits: Vec<(&IntPoly, Cpx, BigFloat)> = Vec::new();
        let mut certified = true;
        for (g, _) in factors {
            match certified_roots(g, p) {
                None => {
                    certified = false;
                    break;
                }
                Some(roots) => {
                    for (c, r) in roots {
                        let cb = Ball {
                            re: c.re.clone(),
                            im: c.im.clone(),
                            rad: r.clone(),
                            prec: p,
                        };
                        if cb.overlaps(&vb) {
                            hits.push((g, c, r));
                        }
                    }
                }
            }
        }
        if certified && hits.len() == 1 {
            let (g, c, r) = hits.remove(0);
            return finalize_root(g, &c, &r, None);
        }
    }
    Err(AlgError::PrecisionExhausted)
}

/// alpha * q for nonzero rational q (exact polynomial transform, no
/// root-finding).
pub fn mul_rational(a: AlgId, q: &BigRational) -> Result<AlgValue, AlgError> {
    assert!(!q.is_zero(), "scaling by zero is not a field element map");
    let ent = get(a);
    let d = ent.min_poly.deg();
    let (n, m) = (q.numer().clone(), q.denom().clone());
    // f(x*m/n) * n^d has integer coefficients c_i * m^i * n^(d-i)
    let mut cs = Vec::with_capacity(d + 1);
    let mut mp = BigInt::one();
    for i in 0..=d {
        let np = n.pow((d - i) as u32);
        cs.push(ent.min_poly.coeff(i) * &mp * np);
        mp *= &m;
    }
    let mut g = IntPoly::new(cs).primitive();
    if g.lc().is_negative() {
        g = g.neg();
    }
    insert_dedup(g, ent.bbox.scaled(q), None).map(AlgValue::Algebraic)
}

/// alpha + q for rational q (exact polynomial transform).
pub fn add_rational(a: AlgId, q: &BigRational) -> Result<AlgValue, AlgError> {
    let ent = get(a);
    // f(x - q) over the rationals, then clear denominators
    let lin = [-q.clone(), BigRational::one()];
    let mut acc: Vec<BigRational> = vec![BigRational::zero()];
    for c in ent.min_poly.coeffs.iter().rev() {
        // acc = acc * (x - q) + c
        let mut next = vec![BigRational::zero(); acc.len() + 1];
        for (k, ac) in acc.iter().enumerate() {
            next[k] += ac * &lin[0];
            next[k + 1] += ac * &lin[1];
        }
        while next.len() > 1 && next.last().unwrap().is_zero() {
            next.pop();
        }
        next[0] += BigRational::from(c.clone());
        acc = next;
    }
    let mut den = BigInt::one();
    for c in &acc {
        den = num_integer::lcm(den, c.denom().clone());
    }
    let cs: Vec<BigInt> = acc
        .iter()
        .map(|c| (c * BigRational::from(den.clone())).to_integer())
        .collect();
    let mut g = IntPoly::new(cs).primitive();
    if g.lc().is_negative() {
        g = g.neg();
    }
    insert_dedup(g, ent.bbox.shifted(q), None).map(AlgValue::Algebraic)
}

// ---------------------------------------------------------------------------
// registry files

/// Load `name : coeff_0,...,coeff_d : re_lo,re_hi,im_lo,im_hi` lines.
/// Blank lines and `#` comments are skipped.
pub fn load_registry_str(text: &str) -> Result<Vec<(String, AlgId)>, AlgError> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(AlgError::Registry(format!(
                "line {}: expected 'name : coeffs : box'",
                ln + 1
            )));
        }
        let name = parts[0];
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(AlgError::Registry(format!("line {}: bad name '{}'", ln + 1, name)));
        }
        let coeffs: Result<Vec<BigInt>, _> =
            parts[1].split(',').map(|c| c.trim().parse::<BigInt>()).collect();
        let coeffs = coeffs
            .map_err(|e| AlgError::Registry(format!("line {}: bad coefficient: {}", ln + 1, e)))?;
        let bbox = ComplexBox::parse(parts[2])
            .map_err(|e| AlgError::Registry(format!("line {}: {}", ln + 1, e)))?;
        match make_algebraic_named(&IntPoly::new(coeffs), &bbox, Some(name))? {
            AlgValue::Algebraic(id) => out.push((name.to_owned(), id)),
            AlgValue::Rational(q) => {
                return Err(AlgError::Registry(format!(
                    "line {}: '{}' is the rational {} — registry entries must be irrational",
                    ln + 1,
                    name,
                    q
                )));
            }
        }
    }
    Ok(out)
}

pub fn load_registry_file(path: &std::path::Path) -> Result<Vec<(String, AlgId)>, AlgError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AlgError::Registry(format!("{}: {}", path.display(), e)))?;
    load_registry_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn sqrt2_id() -> AlgId {
        lookup_name("sqrt2").unwrap()
    }

    fn i_id() -> AlgId {
        lookup_name("i").unwrap()
    }

    #[test]
    fn sqrt2_squared_is_two() {
        let s = sqrt2_id();
        assert_eq!(mul(s, s).unwrap(), AlgValue::Rational(BigRational::from(BigInt::from(2))));
    }

    #[test]
    fn sqrt2_plus_negation_is_zero() {
        let s = sqrt2_id();
        let n = match neg(s).unwrap() {
            AlgValue::Algebraic(id) => id,
            v => panic!("neg(sqrt2) should stay algebraic, got {:?}", v),
        };
        assert_eq!(add(s, n).unwrap(), AlgValue::Rational(BigRational::zero()));
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = i_id();
        assert_eq!(mul(i, i).unwrap(), AlgValue::Rational(-BigRational::one()));
    }

    #[test]
    fn non_isolating_box_rejected() {
        let f = IntPoly::from_i64(&[-2, 0, 1]);
        let b = ComplexBox::from_i64((-2, 1, 2, 1), (-1, 1, 1, 1));
        match make_algebraic(&f, &b) {
            Err(AlgError::NonIsolating(_)) => {}
            other => panic!("expected non-isolating error, got {:?}", other),
        }
    }

    #[test]
    fn reducible_box_spanning_factors_rejected() {
        // (x^2-2)(x^2-3), box holding sqrt2 and sqrt3
        let f = IntPoly::from_i64(&[-2, 0, 1]).mul(&IntPoly::from_i64(&[-3, 0, 1]));
        let b = ComplexBox::from_i64((1, 1, 2, 1), (-1, 2, 1, 2));
        match make_algebraic(&f, &b) {
            Err(AlgError::Reducible(fs)) => assert_eq!(fs.len(), 2),
            other => panic!("expected reducible error, got {:?}", other),
        }
    }

    #[test]
    fn reducible_poly_with_isolating_box_ok() {
        // same product, box only around sqrt2: resolves and dedups onto builtin
        let f = IntPoly::from_i64(&[-2, 0, 1]).mul(&IntPoly::from_i64(&[-3, 0, 1]));
        let b = ComplexBox::from_i64((5, 4, 3, 2), (-1, 4, 1, 4));
        assert_eq!(make_algebraic(&f, &b).unwrap(), AlgValue::Algebraic(sqrt2_id()));
    }

    #[test]
    fn dedup_identifies_same_root() {
        let f = IntPoly::from_i64(&[-2, 0, 1]);
        let b = ComplexBox::from_i64((7, 5, 29, 20), (-1, 8, 1, 8));
        assert_eq!(make_algebraic(&f, &b).unwrap(), AlgValue::Algebraic(sqrt2_id()));
    }

    #[test]
    fn inverse_roundtrip() {
        let s = sqrt2_id();
        let inv_s = match inv(s).unwrap() {
            AlgValue::Algebraic(id) => id,
            v => panic!("1/sqrt2 should be algebraic, got {:?}", v),
        };
        assert_eq!(get(inv_s).min_poly, IntPoly::from_i64(&[-1, 0, 2]));
        assert_eq!(mul(s, inv_s).unwrap(), AlgValue::Rational(BigRational::one()));
    }

    #[test]
    fn sum_of_sqrt2_with_itself() {
        let s = sqrt2_id();
        match add(s, s).unwrap() {
            AlgValue::Algebraic(id) => {
                assert_eq!(get(id).min_poly, IntPoly::from_i64(&[-8, 0, 1]));
            }
            v => panic!("2*sqrt2 should be algebraic, got {:?}", v),
        }
    }

    #[test]
    fn rational_scaling() {
        let s = sqrt2_id();
        let v = mul_rational(s, &rat(3, 2)).unwrap();
        match v {
            AlgValue::Algebraic(id) => {
                // (3/2 * sqrt2)^2 = 9/2, min poly 2x^2 - 9
                assert_eq!(get(id).min_poly, IntPoly::from_i64(&[-9, 0, 2]));
            }
            v => panic!("expected algebraic, got {:?}", v),
        }
        let sh = add_rational(s, &rat(1, 1)).unwrap();
        match sh {
            AlgValue::Algebraic(id) => {
                // (x-1)^2 - 2 = x^2 - 2x - 1
                assert_eq!(get(id).min_poly, IntPoly::from_i64(&[-1, -2, 1]));
            }
            v => panic!("expected algebraic, got {:?}", v),
        }
    }

    #[test]
    fn refine_cube_root_of_two() {
        let f = IntPoly::from_i64(&[-2, 0, 0, 1]);
        let b = ComplexBox::from_i64((1, 1, 2, 1), (-1, 2, 1, 2));
        let id = match make_algebraic(&f, &b).unwrap() {
            AlgValue::Algebraic(id) => id,
            v => panic!("expected algebraic, got {:?}", v),
        };
        let target = BigRational::new(BigInt::from(1), BigInt::from(10u64).pow(10));
        let bx = refine_box(id, &target).unwrap();
        assert!(bx.max_side() <= target);
        assert!(get(id).bbox.contains_box(&bx));
        // independently computed decimal expansion of 2^(1/3)
        let lo = "12599210498".parse::<BigInt>().unwrap();
        let scale = BigInt::from(10u64).pow(10);
        let olo = BigRational::new(lo.clone(), scale.clone());
        let ohi = BigRational::new(lo + 1, scale);
        assert!(bx.re_lo >= olo - target.clone() && bx.re_hi <= ohi + target);
    }

    #[test]
    fn enclosure_of_i_is_tight() {
        let b = enclosure(i_id(), 128);
        let re = crate::ball::bf_to_f64(&b.re);
        let im = crate::ball::bf_to_f64(&b.im);
        assert!(re.abs() < 1e-30 && (im - 1.0).abs() < 1e-30);
        assert!(b.certainly_nonzero());
    }

    #[test]
    fn min_poly_vanishes_on_enclosure() {
        for id in [i_id(), sqrt2_id()] {
            let ent = get(id);
            for prec in [64usize, 128, 256] {
                let b = enclosure(id, prec);
                let fb = horner_ball(&ent.min_poly, &b, prec);
                assert!(
                    !fb.certainly_nonzero(),
                    "min poly must contain 0 on the enclosure (id {}, prec {})",
                    id,
                    prec
                );
            }
        }
    }

    #[test]
    fn registry_text_roundtrip() {
        let text = "\n# golden ratio\nphi : -1,-1,1 : 1,2,-1/2,1/2\n";
        let loaded = load_registry_str(text).unwrap();
        assert_eq!(loaded.len(), 1);
        let id = loaded[0].1;
        assert_eq!(lookup_name("phi"), Some(id));
        let b = enclosure(id, 64);
        let v = crate::ball::bf_to_f64(&b.re);
        assert!((v - 1.618033988749895).abs() < 1e-12);
        // re-loading is idempotent
        let again = load_registry_str("phi : -1,-1,1 : 1,2,-1/2,1/2").unwrap();
        assert_eq!(again[0].1, id);
    }

    #[test]
    fn refine_box_narrows_i() {
        let t = rat(1, 10);
        let bx = refine_box(i_id(), &t).unwrap();
        assert!(bx.max_side() <= t);
        assert!(bx.contains_rational_point(&rat(0, 1), &rat(1, 1)));
    }

    #[test]
    fn interpolation_is_exact() {
        let f = IntPoly::from_i64(&[3, -7, 0, 5]);
        let points: Vec<BigInt> = (0..=3).map(BigInt::from).collect();
        let values: Vec<BigInt> = points.iter().map(|t| f.eval_int(t)).collect();
        assert_eq!(interpolate(&points, &values), f);
    }

    #[test]
    fn registry_string_parse_roundtrip() {
        let b = ComplexBox::from_i64((-3, 2, 7, 5), (0, 1, 11, 4));
        assert_eq!(ComplexBox::parse(&b.registry_string()).unwrap(), b);
    }

    #[test]
    fn aberth_handles_clustered_roots() {
        // (x^2 - 2)(x^2 - 2x + 1 - tiny) style stress: Wilkinson-ish product
        let mut f = IntPoly::from_i64(&[1]);
        for k in 1..=6i64 {
            f = f.mul(&IntPoly::from_i64(&[-k, 1]));
        }
        let roots = certified_roots(&f, 256).expect("certification");
        assert_eq!(roots.len(), 6);
        let mut res: Vec<f64> = roots
            .iter()
            .map(|(c, _)| crate::ball::bf_to_f64(&c.re))
            .collect();
        res.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (k, r) in res.iter().enumerate() {
            assert!((r - (k as f64 + 1.0)).abs() < 1e-40, "root {} off: {}", k, r);
        }
        let radius_ok = roots
            .iter()
            .all(|(_, r)| bf_to_rational(r).to_f64().unwrap_or(1.0) < 1e-20);
        assert!(radius_ok);
    }
}
