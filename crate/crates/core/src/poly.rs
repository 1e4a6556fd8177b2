//! Dense univariate polynomials over the integers: exact arithmetic,
//! primitive-PRS gcd, resultants, squarefree decomposition and Zassenhaus
//! factorization.  Degrees stay desk-scale (the registry caps them), so the
//! implementations favor clarity over asymptotics.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Polynomial with integer coefficients, `coeffs[i]` multiplying `x^i`.
/// The highest stored coefficient is nonzero; the zero polynomial stores
/// an empty vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntPoly {
    pub coeffs: Vec<BigInt>,
}

impl std::fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", c)?,
                1 => write!(f, "{}*x", c)?,
                _ => write!(f, "{}*x^{}", c, i)?,
            }
        }
        Ok(())
    }
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: vec![] }
    }

    pub fn constant(c: BigInt) -> Self {
        IntPoly::new(vec![c])
    }

    pub fn from_i64(cs: &[i64]) -> Self {
        IntPoly::new(cs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// x - c
    pub fn linear_root(c: &BigRational) -> Self {
        // denominator * x - numerator, primitive
        IntPoly::new(vec![-c.numer().clone(), c.denom().clone()]).primitive()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports None.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn deg(&self) -> usize {
        self.degree().expect("degree of zero polynomial")
    }

    pub fn lc(&self) -> &BigInt {
        self.coeffs.last().expect("lc of zero polynomial")
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn neg(&self) -> Self {
        IntPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + other.coeff(i));
        }
        IntPoly::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        IntPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Multiply by x^k.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); k];
        out.extend(self.coeffs.iter().cloned());
        IntPoly::new(out)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return IntPoly::zero();
        }
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + BigRational::from(c.clone());
        }
        acc
    }

    /// gcd of all coefficients, nonnegative.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        g
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut g = self.content();
        if self.lc().is_negative() {
            g = -g;
        }
        IntPoly::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    /// Reverse coefficients: x^d * p(1/x).
    pub fn reversed(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        IntPoly::new(c)
    }

    /// p(-x), sign-normalized is up to the caller.
    pub fn compose_neg(&self) -> Self {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    /// Exact division over Q[x]; Some(q) when `self = q * d` with q integral.
    pub fn divides_exact(&self, d: &Self) -> Option<IntPoly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(IntPoly::zero());
        }
        let (sd, dd) = (self.degree()?, d.deg());
        if sd < dd {
            return None;
        }
        let mut rem: Vec<BigRational> = self
            .coeffs
            .iter()
            .map(|c| BigRational::from(c.clone()))
            .collect();
        let dlc = BigRational::from(d.lc().clone());
        let mut q = vec![BigRational::zero(); sd - dd + 1];
        for k in (0..=sd - dd).rev() {
            let c = rem[k + dd].clone() / &dlc;
            if !c.is_zero() {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    let sub = &c * BigRational::from(dc.clone());
                    rem[k + i] -= sub;
                }
            }
            q[k] = c;
        }
        if rem.iter().any(|r| !r.is_zero()) {
            return None;
        }
        if q.iter().any(|c| !c.is_integer()) {
            return None;
        }
        Some(IntPoly::new(q.into_iter().map(|c| c.to_integer()).collect()))
    }

    /// Pseudo-remainder of self by d.
    pub fn pseudo_rem(&self, d: &Self) -> IntPoly {
        let dd = d.deg();
        let mut r = self.clone();
        while !r.is_zero() && r.deg() >= dd {
            let k = r.deg() - dd;
            let rl = r.lc().clone();
            r = r.scale(d.lc()).sub(&d.shift_up(k).scale(&rl));
        }
        r
    }

    /// Primitive gcd over Z[x].
    pub fn gcd_poly(&self, other: &Self) -> IntPoly {
        if self.is_zero() {
            return other.primitive();
        }
        if other.is_zero() {
            return self.primitive();
        }
        let (mut a, mut b) = if self.deg() >= other.deg() {
            (self.primitive(), other.primitive())
        } else {
            (other.primitive(), self.primitive())
        };
        loop {
            let r = a.pseudo_rem(&b);
            if r.is_zero() {
                let cg = self.content().gcd(&other.content());
                return b.scale(&cg);
            }
            if r.degree() == Some(0) {
                let cg = self.content().gcd(&other.content());
                return IntPoly::constant(cg);
            }
            a = b;
            b = r.primitive();
        }
    }

    /// Squarefree part (primitive).
    pub fn squarefree_part(&self) -> IntPoly {
        let p = self.primitive();
        if p.degree().map_or(true, |d| d <= 1) {
            return p;
        }
        let g = p.gcd_poly(&p.derivative());
        if g.degree() == Some(0) {
            return p;
        }
        p.divides_exact(&g)
            .expect("gcd divides")
            .primitive()
    }

    /// Resultant via fraction-free Bareiss elimination on the Sylvester matrix.
    pub fn resultant(&self, other: &Self) -> BigInt {
        if self.is_zero() || other.is_zero() {
            return BigInt::zero();
        }
        let m = self.deg();
        let n = other.deg();
        if m == 0 {
            return self.lc().pow(n as u32);
        }
        if n == 0 {
            return other.lc().pow(m as u32);
        }
        let size = m + n;
        let mut a = vec![vec![BigInt::zero(); size]; size];
        for row in 0..n {
            for (i, c) in self.coeffs.iter().enumerate() {
                a[row][row + m - i] = c.clone();
            }
        }
        for row in 0..m {
            for (i, c) in other.coeffs.iter().enumerate() {
                a[n + row][row + n - i] = c.clone();
            }
        }
        bareiss_det(a)
    }

    /// |disc| = |res(f, f')| / |lc|; zero iff not squarefree.
    pub fn abs_discriminant(&self) -> BigInt {
        let d = self.derivative();
        if d.is_zero() {
            return BigInt::zero();
        }
        let r = self.resultant(&d);
        (r / self.lc()).abs()
    }

    /// Cauchy root bound: every complex root has |z| < 1 + max|a_i|/|lc|.
    pub fn cauchy_bound(&self) -> BigRational {
        let lc = BigRational::from(self.lc().abs());
        let mut mx = BigRational::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let r = BigRational::from(c.abs());
            if r > mx {
                mx = r;
            }
        }
        BigRational::one() + mx / lc
    }

    /// Conservative lower bound on the minimal distance between distinct
    /// roots of a squarefree polynomial (Mahler-style, using
    /// |disc| >= 1 for integer squarefree input).  Returned as log2.
    pub fn root_separation_log2(&self) -> i64 {
        let d = self.deg() as f64;
        if d < 2.0 {
            return 0;
        }
        let disc_bits = {
            let dsc = self.abs_discriminant();
            if dsc.is_zero() {
                return i64::MIN / 2; // not squarefree; caller must handle
            }
            (dsc.bits() as i64) - 1
        };
        let norm2_log2: f64 = {
            let mut s = 0.0f64;
            for c in &self.coeffs {
                let b = c.bits() as f64;
                let v = 2.0f64.powf(b.min(500.0));
                s += v * v;
            }
            s.log2() / 2.0 + 1.0
        };
        let lb = 0.5 * (disc_bits as f64) + 0.5 * (3.0f64).log2()
            - ((d + 2.0) / 2.0) * d.log2()
            - (d - 1.0) * norm2_log2;
        lb.floor() as i64 - 2
    }
}

/// Fraction-free determinant (Bareiss).
fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let swap = (k + 1..n).find(|&r| !a[r][k].is_zero());
            match swap {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

// ---------------------------------------------------------------------------
// Arithmetic mod a small prime
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct ZpPoly {
    p: u64,
    c: Vec<u64>, // trimmed
}

fn addm(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}
fn subm(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}
fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}
fn powm(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, a, p);
        }
        a = mulm(a, a, p);
        e >>= 1;
    }
    r
}
fn invm(a: u64, p: u64) -> u64 {
    powm(a, p - 2, p)
}

impl ZpPoly {
    fn new(p: u64, mut c: Vec<u64>) -> Self {
        while c.last() == Some(&0) {
            c.pop();
        }
        ZpPoly { p, c }
    }
    fn from_int(p: u64, f: &IntPoly) -> Self {
        let pm = BigInt::from(p);
        ZpPoly::new(
            p,
            f.coeffs
                .iter()
                .map(|c| {
                    let r = c.mod_floor(&pm);
                    r.to_u64().unwrap()
                })
                .collect(),
        )
    }
    fn zero(p: u64) -> Self {
        ZpPoly { p, c: vec![] }
    }
    fn one(p: u64) -> Self {
        ZpPoly { p, c: vec![1] }
    }
    fn x(p: u64) -> Self {
        ZpPoly { p, c: vec![0, 1] }
    }
    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    fn deg(&self) -> usize {
        self.c.len().saturating_sub(1)
    }
    fn lc(&self) -> u64 {
        *self.c.last().unwrap()
    }
    fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = invm(self.lc(), self.p);
        ZpPoly::new(self.p, self.c.iter().map(|&a| mulm(a, inv, self.p)).collect())
    }
    fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let mut out = vec![0u64; n];
        for (i, v) in out.iter_mut().enumerate() {
            let a = self.c.get(i).copied().unwrap_or(0);
            let b = o.c.get(i).copied().unwrap_or(0);
            *v = subm(a, b, self.p);
        }
        ZpPoly::new(self.p, out)
    }
    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return ZpPoly::zero(self.p);
        }
        let mut out = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                out[i + j] = addm(out[i + j], mulm(a, b, self.p), self.p);
            }
        }
        ZpPoly::new(self.p, out)
    }
    fn rem(&self, d: &Self) -> Self {
        let mut r = self.clone();
        let dd = d.deg();
        let dinv = invm(d.lc(), self.p);
        while !r.is_zero() && r.deg() >= dd && !(r.deg() == 0 && dd == 0) {
            let k = r.deg() - dd;
            let c = mulm(r.lc(), dinv, self.p);
            let mut sub = vec![0u64; k];
            sub.extend(d.c.iter().map(|&a| mulm(a, c, self.p)));
            r = r.sub(&ZpPoly::new(self.p, sub));
            if dd == 0 {
                return ZpPoly::zero(self.p);
            }
        }
        r
    }
    fn div_exact(&self, d: &Self) -> Self {
        // long division, remainder assumed zero
        let mut r = self.clone();
        let dd = d.deg();
        let dinv = invm(d.lc(), self.p);
        let mut q = vec![0u64; self.c.len().saturating_sub(d.c.len()) + 1];
        while !r.is_zero() && r.deg() >= dd {
            let k = r.deg() - dd;
            let c = mulm(r.lc(), dinv, self.p);
            q[k] = c;
            let mut sub = vec![0u64; k];
            sub.extend(d.c.iter().map(|&a| mulm(a, c, self.p)));
            r = r.sub(&ZpPoly::new(self.p, sub));
            if dd == 0 {
                break;
            }
        }
        ZpPoly::new(self.p, q)
    }
    fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }
    fn derivative(&self) -> Self {
        if self.c.len() <= 1 {
            return ZpPoly::zero(self.p);
        }
        ZpPoly::new(
            self.p,
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| mulm(c, (i as u64) % self.p, self.p))
                .collect(),
        )
    }
    /// self^e mod m, with a BigUint exponent.
    fn powmod_big(&self, e: &BigUint, m: &Self) -> Self {
        let mut result = ZpPoly::one(self.p);
        let mut base = self.rem(m);
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                result = result.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
        }
        result
    }
}

/// Distinct-degree then equal-degree factorization of a squarefree monic
/// polynomial mod p.  Deterministically seeded Cantor-Zassenhaus.
fn factor_mod_p(f: &ZpPoly) -> Vec<ZpPoly> {
    let p = f.p;
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    let mut rest = f.monic();
    let mut h = ZpPoly::x(p);
    let mut d = 0usize;
    while !rest.is_zero() && rest.deg() > 0 {
        d += 1;
        if rest.deg() < 2 * d {
            out.push(rest.clone());
            break;
        }
        // h = x^(p^d) mod rest
        h = h.powmod_big(&BigUint::from(p), &rest);
        let g = rest.gcd(&h.sub(&ZpPoly::x(p)));
        if g.deg() > 0 {
            // g is a product of irreducibles of degree d
            edf(&g, d, &mut out, &mut rng);
            rest = rest.div_exact(&g).monic();
            h = h.rem(&rest);
        }
    }
    out
}

fn edf(g: &ZpPoly, d: usize, out: &mut Vec<ZpPoly>, rng: &mut ChaCha8Rng) {
    let p = g.p;
    if g.deg() == d {
        out.push(g.monic());
        return;
    }
    // p odd: split with r^((p^d-1)/2) - 1
    let e = (BigUint::from(p).pow(d as u32) - 1u32) / 2u32;
    loop {
        let rc: Vec<u64> = (0..g.deg()).map(|_| rng.gen_range(0..p)).collect();
        let r = ZpPoly::new(p, rc);
        if r.is_zero() {
            continue;
        }
        let s = r.powmod_big(&e, g).sub(&ZpPoly::one(p));
        let h = g.gcd(&s);
        if h.deg() > 0 && h.deg() < g.deg() {
            edf(&h, d, out, rng);
            edf(&g.div_exact(&h).monic(), d, out, rng);
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// Hensel lifting and Zassenhaus recombination
// ---------------------------------------------------------------------------

/// Coefficients in the symmetric range (-m/2, m/2].
fn symmetric(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

#[derive(Clone)]
struct ModPoly {
    m: BigInt,
    c: Vec<BigInt>, // reduced mod m, trimmed
}

impl ModPoly {
    fn new(m: &BigInt, mut c: Vec<BigInt>) -> Self {
        for v in &mut c {
            *v = v.mod_floor(m);
        }
        while c.last().map_or(false, |v| v.is_zero()) {
            c.pop();
        }
        ModPoly { m: m.clone(), c }
    }
    fn from_int(m: &BigInt, f: &IntPoly) -> Self {
        ModPoly::new(m, f.coeffs.clone())
    }
    fn to_int_symmetric(&self) -> IntPoly {
        IntPoly::new(self.c.iter().map(|c| symmetric(c, &self.m)).collect())
    }
    fn deg(&self) -> usize {
        self.c.len().saturating_sub(1)
    }
    fn mul(&self, o: &Self) -> Self {
        if self.c.is_empty() || o.c.is_empty() {
            return ModPoly::new(&self.m, vec![]);
        }
        let mut out = vec![BigInt::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ModPoly::new(&self.m, out)
    }
    fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let mut out = vec![BigInt::zero(); n];
        for (i, v) in out.iter_mut().enumerate() {
            let a = self.c.get(i).cloned().unwrap_or_else(BigInt::zero);
            let b = o.c.get(i).cloned().unwrap_or_else(BigInt::zero);
            *v = a - b;
        }
        ModPoly::new(&self.m, out)
    }
    fn scale(&self, k: &BigInt) -> Self {
        ModPoly::new(&self.m, self.c.iter().map(|c| c * k).collect())
    }
}

/// Factor a primitive squarefree polynomial with positive leading
/// coefficient into irreducible primitive factors over Z.
fn factor_squarefree(f: &IntPoly) -> Vec<IntPoly> {
    let d = f.deg();
    if d <= 1 {
        return vec![f.clone()];
    }
    // pick an odd prime where f stays squarefree and lc is a unit
    let primes: &[u64] = &[
        3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
        97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181,
        191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271,
    ];
    let mut chosen = None;
    let mut best: Option<(usize, u64, Vec<ZpPoly>)> = None;
    for &p in primes {
        if (f.lc() % BigInt::from(p)).is_zero() {
            continue;
        }
        let fp = ZpPoly::from_int(p, f).monic();
        if fp.gcd(&fp.derivative()).deg() != 0 {
            continue;
        }
        let fs = factor_mod_p(&fp);
        if fs.len() == 1 {
            return vec![f.clone()]; // irreducible mod p => irreducible over Z
        }
        if best.as_ref().map_or(true, |(n, _, _)| fs.len() < *n) {
            best = Some((fs.len(), p, fs));
        }
        chosen = Some(());
        if best.as_ref().unwrap().0 <= 2 {
            break;
        }
    }
    let (_, p, mut modular) = best.expect("no usable prime found for factorization");
    let _ = chosen;
    // sort for determinism
    modular.sort_by(|a, b| (a.deg(), &a.c).cmp(&(b.deg(), &b.c)));

    // coefficient bound for factors of f (Mignotte-flavored, generous)
    let norm1: BigInt = f.coeffs.iter().map(|c| c.abs()).sum();
    let bound: BigInt = (BigInt::one() << (d + 2)) * norm1 * f.lc().abs();
    // lift to p^k with p^k > 2*bound
    let pk_target: BigInt = &bound * 2 + 1;
    let mut pk = BigInt::from(p);
    while pk <= pk_target {
        pk = &pk * p;
    }
    let lifted = hensel_lift_all(f, p, &modular, &pk);

    // Zassenhaus recombination
    let mut factors_out = Vec::new();
    let mut rem_poly = f.clone();
    let mut avail: Vec<ModPoly> = lifted;
    let mut subset_size = 1usize;
    'outer: while 2 * subset_size <= avail.len() {
        let idxs: Vec<usize> = (0..avail.len()).collect();
        for combo in combinations(&idxs, subset_size) {
            let mut prod = ModPoly::new(&pk, vec![rem_poly.lc().clone()]);
            for &i in &combo {
                prod = prod.mul(&avail[i]);
            }
            let cand = prod.to_int_symmetric().primitive();
            if cand.degree().map_or(false, |dd| dd >= 1) {
                if let Some(q) = rem_poly.divides_exact(&cand) {
                    factors_out.push(cand);
                    rem_poly = q.primitive();
                    let keep: Vec<ModPoly> = avail
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !combo.contains(i))
                        .map(|(_, m)| m.clone())
                        .collect();
                    avail = keep;
                    continue 'outer;
                }
            }
        }
        subset_size += 1;
    }
    if rem_poly.degree().map_or(false, |dd| dd >= 1) {
        factors_out.push(rem_poly);
    }
    factors_out.sort_by(|a, b| (a.deg(), &a.coeffs).cmp(&(b.deg(), &b.coeffs)));
    factors_out
}

/// Lift the factorization f = lc * prod(modular) from mod p to mod pk.
/// Returns monic factors mod pk.
fn hensel_lift_all(f: &IntPoly, p: u64, modular: &[ZpPoly], pk: &BigInt) -> Vec<ModPoly> {
    if modular.len() == 1 {
        return vec![ModPoly::new(
            pk,
            modular[0].c.iter().map(|&c| BigInt::from(c)).collect(),
        )];
    }
    // split factors in two halves g, h and lift the pair, then recurse
    let half = modular.len() / 2;
    let gp = modular[..half]
        .iter()
        .fold(ZpPoly::one(p), |acc, m| acc.mul(m));
    let hp = modular[half..]
        .iter()
        .fold(ZpPoly::one(p), |acc, m| acc.mul(m));
    // make f monic mod p^k by scaling with lc^{-1}: work with monic image
    let (g_lift, h_lift) = hensel_pair(f, p, &gp, &hp, pk);
    // recurse: need integer polys congruent to the halves
    let g_int = g_lift.to_int_symmetric();
    let h_int = h_lift.to_int_symmetric();
    let mut out = hensel_lift_monic(&g_int, p, &modular[..half], pk);
    out.extend(hensel_lift_monic(&h_int, p, &modular[half..], pk));
    out
}

fn hensel_lift_monic(f: &IntPoly, p: u64, modular: &[ZpPoly], pk: &BigInt) -> Vec<ModPoly> {
    if modular.len() == 1 {
        return vec![ModPoly::from_int(pk, f)];
    }
    let half = modular.len() / 2;
    let gp = modular[..half]
        .iter()
        .fold(ZpPoly::one(p), |acc, m| acc.mul(m));
    let hp = modular[half..]
        .iter()
        .fold(ZpPoly::one(p), |acc, m| acc.mul(m));
    let (g_lift, h_lift) = hensel_pair(f, p, &gp, &hp, pk);
    let g_int = g_lift.to_int_symmetric();
    let h_int = h_lift.to_int_symmetric();
    let mut out = hensel_lift_monic(&g_int, p, &modular[..half], pk);
    out.extend(hensel_lift_monic(&h_int, p, &modular[half..], pk));
    out
}

/// Lift f ≡ lc(f)*g*h (mod p), with monic coprime g,h mod p, to mod pk.
/// Returns monic (g*, h*) with f ≡ lc(f)*g*h* (mod pk).
fn hensel_pair(f: &IntPoly, p: u64, gp: &ZpPoly, hp: &ZpPoly, pk: &BigInt) -> (ModPoly, ModPoly) {
    // Bezout: s*g + t*h = 1 mod p
    let (s0, t0) = bezout_mod_p(gp, hp);
    let pb = BigInt::from(p);
    let mut modulus = pb.clone();
    let mut g = ModPoly::new(&modulus, gp.c.iter().map(|&c| BigInt::from(c)).collect());
    let mut h = ModPoly::new(&modulus, hp.c.iter().map(|&c| BigInt::from(c)).collect());
    let mut s = ModPoly::new(&modulus, s0.c.iter().map(|&c| BigInt::from(c)).collect());
    let mut t = ModPoly::new(&modulus, t0.c.iter().map(|&c| BigInt::from(c)).collect());
    // monic target: f_monic = f / lc mod p^j (lc invertible)
    while modulus < *pk {
        let next = (&modulus * &modulus).min(pk.clone());
        let lc_inv = mod_inverse(f.lc(), &next);
        let f_monic = ModPoly::from_int(&next, f).scale(&lc_inv);
        let gl = ModPoly::new(&next, g.c.clone());
        let hl = ModPoly::new(&next, h.c.clone());
        let sl = ModPoly::new(&next, s.c.clone());
        let tl = ModPoly::new(&next, t.c.clone());
        // e = f_monic - g*h  (divisible by modulus)
        let e = f_monic.sub(&gl.mul(&hl));
        // g' = g + e*t mod g? Use the standard update with division:
        // q, r such that s*e = q*h + r
        let se = sl.mul(&e);
        let (q, r) = modpoly_divmod(&se, &hl);
        let g_new = modpoly_add(&gl, &modpoly_add(&tl.mul(&e), &q.mul(&gl)));
        let h_new = modpoly_add(&hl, &r);
        // refresh Bezout: b = s*g' + t*h' - 1
        let b = modpoly_sub_one(&modpoly_add(&sl.mul(&g_new), &tl.mul(&h_new)), &next);
        let sb = sl.mul(&b);
        let (c, dd) = modpoly_divmod(&sb, &h_new);
        let s_new = modpoly_sub(&sl, &dd);
        let t_new = modpoly_sub(&modpoly_sub(&tl, &tl.mul(&b)), &c.mul(&g_new));
        g = g_new;
        h = h_new;
        s = s_new;
        t = t_new;
        modulus = next;
    }
    (g, h)
}

fn modpoly_add(a: &ModPoly, b: &ModPoly) -> ModPoly {
    let n = a.c.len().max(b.c.len());
    let mut out = vec![BigInt::zero(); n];
    for (i, v) in out.iter_mut().enumerate() {
        *v = a.c.get(i).cloned().unwrap_or_else(BigInt::zero)
            + b.c.get(i).cloned().unwrap_or_else(BigInt::zero);
    }
    ModPoly::new(&a.m, out)
}
fn modpoly_sub(a: &ModPoly, b: &ModPoly) -> ModPoly {
    a.sub(b)
}
fn modpoly_sub_one(a: &ModPoly, m: &BigInt) -> ModPoly {
    let mut c = a.c.clone();
    if c.is_empty() {
        c.push(BigInt::zero());
    }
    c[0] -= 1;
    ModPoly::new(m, c)
}

/// Division with remainder by a monic divisor mod m.
fn modpoly_divmod(a: &ModPoly, d: &ModPoly) -> (ModPoly, ModPoly) {
    debug_assert!(d.c.last().map_or(false, |c| c.is_one()));
    let mut r = a.c.clone();
    let dd = d.deg();
    let mut q = vec![BigInt::zero(); a.c.len().saturating_sub(dd)];
    let mut top = r.len();
    while top > dd {
        let k = top - 1 - dd;
        let c = r[top - 1].clone().mod_floor(&a.m);
        if !c.is_zero() {
            q[k] = c.clone();
            for (i, dc) in d.c.iter().enumerate() {
                r[k + i] -= &c * dc;
            }
        }
        r[top - 1] = BigInt::zero();
        top -= 1;
    }
    (ModPoly::new(&a.m, q), ModPoly::new(&a.m, r))
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    e.x.mod_floor(m)
}

fn bezout_mod_p(g: &ZpPoly, h: &ZpPoly) -> (ZpPoly, ZpPoly) {
    // extended Euclid over Z_p[x]
    let p = g.p;
    let (mut r0, mut r1) = (g.clone(), h.clone());
    let (mut s0, mut s1) = (ZpPoly::one(p), ZpPoly::zero(p));
    let (mut t0, mut t1) = (ZpPoly::zero(p), ZpPoly::one(p));
    while !r1.is_zero() {
        // quotient of r0 by r1
        let q = zp_div(&r0, &r1);
        let r2 = r0.sub(&q.mul(&r1));
        let s2 = s0.sub(&q.mul(&s1));
        let t2 = t0.sub(&q.mul(&t1));
        r0 = r1;
        r1 = r2;
        s0 = s1;
        s1 = s2;
        t0 = t1;
        t1 = t2;
    }
    // r0 = gcd (a unit when g,h coprime); scale to 1
    let inv = invm(r0.lc(), p);
    let scale = |z: &ZpPoly| ZpPoly::new(p, z.c.iter().map(|&c| mulm(c, inv, p)).collect());
    (scale(&s0), scale(&t0))
}

fn zp_div(a: &ZpPoly, d: &ZpPoly) -> ZpPoly {
    let p = a.p;
    let mut r = a.clone();
    let dd = d.deg();
    if a.is_zero() || a.deg() < dd {
        return ZpPoly::zero(p);
    }
    let dinv = invm(d.lc(), p);
    let mut q = vec![0u64; a.deg() - dd + 1];
    while !r.is_zero() && r.deg() >= dd {
        let k = r.deg() - dd;
        let c = mulm(r.lc(), dinv, p);
        q[k] = c;
        let mut sub = vec![0u64; k];
        sub.extend(d.c.iter().map(|&x| mulm(x, c, p)));
        r = r.sub(&ZpPoly::new(p, sub));
        if dd == 0 {
            break;
        }
    }
    ZpPoly::new(p, q)
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

/// Full factorization into irreducible primitive factors with multiplicity.
/// The unit/content is dropped; factors have positive leading coefficients.
pub fn factor(f: &IntPoly) -> Vec<(IntPoly, u32)> {
    assert!(!f.is_zero(), "factor of zero polynomial");
    let mut out: Vec<(IntPoly, u32)> = Vec::new();
    let mut p = f.primitive();
    // split off x^k
    let k = p.coeffs.iter().take_while(|c| c.is_zero()).count();
    if k > 0 {
        out.push((IntPoly::from_i64(&[0, 1]), k as u32));
        p = IntPoly::new(p.coeffs[k..].to_vec());
    }
    if p.degree() == Some(0) {
        return out;
    }
    // squarefree decomposition by repeated gcd
    let mut mult = 1u32;
    while p.degree().map_or(false, |d| d >= 1) {
        let sqf = p.squarefree_part();
        for fac in factor_squarefree(&sqf) {
            // count multiplicity of fac in p
            let mut m = 0u32;
            let mut q = p.clone();
            while let Some(nq) = q.divides_exact(&fac) {
                m += 1;
                q = nq;
            }
            if m > 0 {
                out.push((fac.clone(), m));
                for _ in 0..m {
                    p = p.divides_exact(&fac).unwrap().primitive();
                }
            }
        }
        mult += 1;
        if mult > 64 {
            break;
        }
    }
    out.sort_by(|a, b| (a.0.deg(), &a.0.coeffs).cmp(&(b.0.deg(), &b.0.coeffs)));
    out
}

/// True iff the primitive part of f is irreducible over Q (degree >= 1).
pub fn is_irreducible(f: &IntPoly) -> bool {
    match f.degree() {
        None | Some(0) => false,
        Some(1) => true,
        _ => {
            let p = f.primitive();
            if p.squarefree_part().deg() != p.deg() {
                return false;
            }
            factor_squarefree(&p).len() == 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(cs: &[i64]) -> IntPoly {
        IntPoly::from_i64(cs)
    }

    #[test]
    fn mul_and_divides() {
        let a = p(&[-2, 0, 1]); // x^2-2
        let b = p(&[-3, 0, 1]); // x^2-3
        let c = a.mul(&b);
        assert_eq!(c.divides_exact(&a), Some(b.clone()));
        assert_eq!(c.divides_exact(&b), Some(a.clone()));
        assert_eq!(c.divides_exact(&p(&[1, 1])), None);
    }

    #[test]
    fn gcd_primitive() {
        let a = p(&[-2, 0, 1]);
        let b = p(&[-3, 0, 1]);
        let f = a.mul(&b);
        let g = a.mul(&p(&[1, 1]));
        assert_eq!(f.gcd_poly(&g), a);
    }

    #[test]
    fn resultant_quadratics() {
        // res(x^2-2, x^2-3) = (2-3)^2 = 1
        assert_eq!(p(&[-2, 0, 1]).resultant(&p(&[-3, 0, 1])), BigInt::from(1));
        // res(x-2, x-3) = -1 (2-3 up to convention)
        let r = p(&[-2, 1]).resultant(&p(&[-3, 1]));
        assert_eq!(r.abs(), BigInt::from(1));
        // shared root => 0
        assert_eq!(
            p(&[-2, 0, 1]).resultant(&p(&[-2, 0, 1])),
            BigInt::from(0)
        );
    }

    #[test]
    fn factor_product_of_quadratics() {
        let f = p(&[-2, 0, 1]).mul(&p(&[-3, 0, 1]));
        let fs = factor(&f);
        assert_eq!(fs.len(), 2);
        assert!(fs.iter().any(|(g, m)| *m == 1 && *g == p(&[-2, 0, 1])));
        assert!(fs.iter().any(|(g, m)| *m == 1 && *g == p(&[-3, 0, 1])));
    }

    #[test]
    fn factor_x4_plus_1_irreducible() {
        // reducible mod every prime, irreducible over Z: exercises recombination
        let f = p(&[1, 0, 0, 0, 1]);
        assert!(is_irreducible(&f));
        let fs = factor(&f);
        assert_eq!(fs, vec![(f, 1)]);
    }

    #[test]
    fn factor_with_multiplicity_and_content() {
        let f = p(&[-1, 0, 1]).mul(&p(&[-1, 0, 1])).scale(&BigInt::from(6)); // 6(x-1)^2(x+1)^2
        let fs = factor(&f);
        assert_eq!(
            fs,
            vec![(p(&[-1, 1]), 2), (p(&[1, 1]), 2)]
        );
    }

    #[test]
    fn factor_cyclotomic_mix() {
        // (x^2+x+1)(x^2+1)(x-5)
        let f = p(&[1, 1, 1]).mul(&p(&[1, 0, 1])).mul(&p(&[-5, 1]));
        let fs = factor(&f);
        assert_eq!(fs.len(), 3);
        assert!(fs.iter().all(|(_, m)| *m == 1));
        assert!(fs.contains(&(p(&[1, 1, 1]), 1)));
        assert!(fs.contains(&(p(&[1, 0, 1]), 1)));
        assert!(fs.contains(&(p(&[-5, 1]), 1)));
    }

    #[test]
    fn squarefree_part_strips_powers() {
        let f = p(&[-2, 0, 1]).mul(&p(&[-2, 0, 1])).mul(&p(&[7, 1]));
        assert_eq!(f.squarefree_part(), p(&[-2, 0, 1]).mul(&p(&[7, 1])));
    }

    #[test]
    fn non_monic_factorization() {
        // (2x-1)(3x+5)
        let f = p(&[-1, 2]).mul(&p(&[5, 3]));
        let fs = factor(&f);
        assert_eq!(fs.len(), 2);
        assert!(fs.contains(&(p(&[-1, 2]), 1)));
        assert!(fs.contains(&(p(&[5, 3]), 1)));
    }

    #[test]
    fn separation_bound_sane() {
        let f = p(&[-2, 0, 1]);
        let lg = f.root_separation_log2();
        // roots are +-sqrt(2), separation ~2.83, bound must be below that
        assert!(lg <= 2);
        assert!(lg > -200);
    }
}
