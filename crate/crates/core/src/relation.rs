//! Integer-relation search: all-integer LLL reduction on the scaled relation
//! lattice, with post-hoc ball-arithmetic verification of any hit and
//! symbolic confirmation before a relation is ever called real.
//!
//! A returned vector is evidence, not a theorem: `find_integer_relation`
//! guarantees only the threshold inequality |sum q_i v_i| <= 2^(-p/2) at the
//! stated precision.  `falsify_linear_independence` upgrades a hit to a
//! confirmed counterexample only when the combination normalizes to zero
//! symbolically, or its exponential image collapses to the exact constant 1
//! with the combination bounded inside the principal strip.

use crate::ball::{pow2, Ball};
use crate::numeric::{eval, obviously_zero, NumError};
use crate::term::Term;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(thiserror::Error, Debug)]
pub enum RelError {
    #[error("insufficient precision: need {needed} bits, have {got}")]
    InsufficientPrecision { needed: usize, got: usize },
    #[error(transparent)]
    Eval(#[from] NumError),
}

/// Nearest-integer division, b > 0.
fn rounded_div(a: &BigInt, b: &BigInt) -> BigInt {
    let num = a * 2i32 + b;
    let den = b * 2i32;
    num.div_floor(&den)
}

/// All-integer LLL (delta = 3/4) on the given basis rows.
pub fn lll_reduce(rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let n = rows.len();
    if n <= 1 {
        return rows;
    }
    // 1-indexed working arrays, following the classical integral formulation
    let mut b: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    b.push(Vec::new());
    b.extend(rows);
    let mut d: Vec<BigInt> = vec![BigInt::one(); n + 1];
    let mut lam: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n + 1]; n + 1];

    fn dot(x: &[BigInt], y: &[BigInt]) -> BigInt {
        x.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    fn red(b: &mut [Vec<BigInt>], lam: &mut [Vec<BigInt>], d: &[BigInt], k: usize, l: usize) {
        if (&lam[k][l] * 2i32).abs() > d[l] {
            let q = rounded_div(&lam[k][l], &d[l]);
            for idx in 0..b[k].len() {
                let t = &b[k][idx] - &q * &b[l][idx];
                b[k][idx] = t;
            }
            lam[k][l] = &lam[k][l] - &q * &d[l];
            for i in 1..l {
                lam[k][i] = &lam[k][i] - &q * &lam[l][i];
            }
        }
    }

    let mut kmax = 1usize;
    d[1] = dot(&b[1], &b[1]);
    let mut k = 2usize;
    while k <= n {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = dot(&b[k], &b[j]);
                for i in 1..j {
                    u = (&d[i] * &u - &lam[k][i] * &lam[j][i]) / &d[i - 1];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    d[k] = u;
                    assert!(d[k].is_positive(), "basis rows must be independent");
                }
            }
        }
        red(&mut b, &mut lam, &d, k, k - 1);
        let lhs = BigInt::from(4) * &d[k] * &d[k - 2];
        let rhs =
            BigInt::from(3) * &d[k - 1] * &d[k - 1] - BigInt::from(4) * &lam[k][k - 1] * &lam[k][k - 1];
        if lhs < rhs {
            // SWAP(k)
            b.swap(k, k - 1);
            for j in 1..=k.saturating_sub(2) {
                let t = lam[k][j].clone();
                lam[k][j] = lam[k - 1][j].clone();
                lam[k - 1][j] = t;
            }
            let lamv = lam[k][k - 1].clone();
            let bval = (&d[k - 2] * &d[k] + &lamv * &lamv) / &d[k - 1];
            for i in k + 1..=kmax {
                let t = lam[i][k].clone();
                lam[i][k] = (&d[k] * &lam[i][k - 1] - &lamv * &t) / &d[k - 1];
                lam[i][k - 1] = (&bval * &t + &lamv * &lam[i][k]) / &d[k];
            }
            d[k - 1] = bval;
            k = std::cmp::max(2, k - 1);
        } else {
            for l in (1..k.saturating_sub(1)).rev() {
                red(&mut b, &mut lam, &d, k, l);
            }
            k += 1;
        }
    }
    b.remove(0);
    b
}

/// Search for small integers q (not all zero, |q_i| <= max_height) with
/// |sum q_i v_i| <= 2^(-p/2), where p is the common precision.  The returned
/// vector is gcd-normalized with its first nonzero entry positive.
pub fn find_integer_relation(
    values: &[Ball],
    max_height: u64,
) -> Result<Option<Vec<BigInt>>, RelError> {
    let n = values.len();
    if n == 0 {
        return Ok(None);
    }
    let p = values.iter().map(|b| b.prec).min().unwrap();
    let hbits = (64 - max_height.leading_zeros()) as usize;
    let needed = 4 * hbits * n;
    if p < needed {
        return Err(RelError::InsufficientPrecision { needed, got: p });
    }
    // the scale must stay below both the precision and the enclosure radii,
    // or the lattice would encode noise
    let mut s = p as i64 - 16;
    for v in values {
        if !v.rad.is_zero() {
            if let Some(e) = v.rad.exponent() {
                s = s.min(-(e as i64) - 16);
            }
        }
    }
    if s < needed as i64 / 2 {
        return Err(RelError::InsufficientPrecision {
            needed,
            got: s.max(0) as usize,
        });
    }
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for (i, v) in values.iter().enumerate() {
        let (re, im) = v.mid_scaled_int(s);
        let mut row = vec![BigInt::zero(); n + 2];
        row[i] = BigInt::one();
        row[n] = re;
        row[n + 1] = im;
        rows.push(row);
    }
    let reduced = lll_reduce(rows);
    let thresh = pow2(-(p as i64) / 2);
    let height = BigInt::from(max_height);
    for row in &reduced {
        let q = &row[..n];
        if q.iter().all(|c| c.is_zero()) {
            continue;
        }
        if q.iter().any(|c| c.abs() > height) {
            continue;
        }
        if residual_within(values, q, &thresh) {
            return Ok(Some(normalize_vector(q)));
        }
    }
    Ok(None)
}

/// Post-hoc soundness check: |sum q_i v_i| <= thresh, via ball arithmetic.
fn residual_within(values: &[Ball], q: &[BigInt], thresh: &astro_float::BigFloat) -> bool {
    let p = values.iter().map(|b| b.prec).min().unwrap();
    let mut acc = Ball::exact_zero(p);
    for (qi, v) in q.iter().zip(values) {
        if qi.is_zero() {
            continue;
        }
        let c = Ball::from_rational(&BigRational::from(qi.clone()), p);
        acc = acc.add(&c.mul(v));
    }
    acc.abs_ub().cmp(thresh).map_or(false, |c| c <= 0)
}

fn normalize_vector(q: &[BigInt]) -> Vec<BigInt> {
    let mut g = BigInt::zero();
    for c in q {
        g = g.gcd(c);
    }
    if g.is_zero() {
        g = BigInt::one();
    }
    let mut out: Vec<BigInt> = q.iter().map(|c| c / &g).collect();
    if let Some(first) = out.iter().find(|c| !c.is_zero()) {
        if first.is_negative() {
            for c in &mut out {
                *c = -c.clone();
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfirmKind {
    /// sum q_i t_i normalized to the exact rational 0
    LinearFold,
    /// prod exp(t_i)^{q_i} normalized to the exact rational 1 and the sum is
    /// bounded inside the principal strip, forcing it to be exactly 0
    MonomialIdentity,
}

#[derive(Clone, Debug)]
pub enum FalsifyOutcome {
    /// symbolically confirmed rational linear relation: independence refuted
    Confirmed { coeffs: Vec<BigInt>, kind: ConfirmKind },
    /// numerically plausible relation that resisted symbolic confirmation
    Unconfirmed(Vec<BigInt>),
    Absent,
}

/// The exact linear combination sum q_i t_i as a term.
pub fn combination_term(terms: &[Term], q: &[BigInt]) -> Term {
    let parts = terms
        .iter()
        .zip(q)
        .filter(|(_, qi)| !qi.is_zero())
        .map(|(t, qi)| Term::product(vec![Term::rational(BigRational::from(qi.clone())), t.clone()]))
        .collect();
    Term::sum(parts)
}

/// Symbolic confirmation of a candidate relation.
pub fn confirm_relation(terms: &[Term], q: &[BigInt]) -> Option<ConfirmKind> {
    let lin = combination_term(terms, q);
    if lin.as_rational().map_or(false, |r| r.is_zero()) || obviously_zero(&lin) {
        return Some(ConfirmKind::LinearFold);
    }
    // exponential image: exp is a homomorphism from sums to products
    let mut parts = Vec::new();
    for (t, qi) in terms.iter().zip(q) {
        if qi.is_zero() {
            continue;
        }
        let e: i64 = i64::try_from(qi.clone()).ok()?;
        parts.push(t.exp().ipow(e).ok()?);
    }
    let mono = Term::product(parts);
    if mono == Term::one() {
        // exp(lin) = 1 means lin is a multiple of 2*pi*i; rule out the
        // nonzero multiples numerically (|2*pi*i| > 6)
        if let Ok(b) = eval(&lin, 64) {
            let six = astro_float::BigFloat::from_word(6, 64);
            if b.abs_ub().cmp(&six).map_or(false, |c| c < 0) {
                return Some(ConfirmKind::MonomialIdentity);
            }
        }
    }
    None
}

/// Evaluate, search, and attempt symbolic confirmation.
pub fn falsify_linear_independence(
    terms: &[Term],
    prec: usize,
    max_height: u64,
) -> Result<FalsifyOutcome, RelError> {
    let values: Result<Vec<Ball>, NumError> = terms.iter().map(|t| eval(t, prec)).collect();
    let values = values?;
    match find_integer_relation(&values, max_height)? {
        None => Ok(FalsifyOutcome::Absent),
        Some(q) => match confirm_relation(terms, &q) {
            Some(kind) => Ok(FalsifyOutcome::Confirmed { coeffs: q, kind }),
            None => Ok(FalsifyOutcome::Unconfirmed(q)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn logs_236() -> Vec<Term> {
        vec![
            parse("log(2; 0)").unwrap(),
            parse("log(3; 0)").unwrap(),
            parse("log(6; 0)").unwrap(),
        ]
    }

    #[test]
    fn finds_log_2_3_6_relation() {
        let terms = logs_236();
        let out = falsify_linear_independence(&terms, 200, 100).unwrap();
        match out {
            FalsifyOutcome::Confirmed { coeffs, kind } => {
                let want: Vec<BigInt> = [1, 1, -1].iter().map(|&x| BigInt::from(x)).collect();
                assert_eq!(coeffs, want);
                assert_eq!(kind, ConfirmKind::MonomialIdentity);
            }
            other => panic!("expected confirmed relation, got {:?}", other),
        }
    }

    #[test]
    fn one_and_pi_have_no_small_relation() {
        let terms = vec![parse("1").unwrap(), parse("pi").unwrap()];
        let out = falsify_linear_independence(&terms, 200, 10_000).unwrap();
        assert!(matches!(out, FalsifyOutcome::Absent), "got {:?}", out);
    }

    #[test]
    fn insufficient_precision_reported() {
        let terms = vec![parse("1").unwrap(), parse("pi").unwrap()];
        match falsify_linear_independence(&terms, 64, u64::MAX / 2) {
            Err(RelError::InsufficientPrecision { .. }) => {}
            other => panic!("expected precision error, got {:?}", other),
        }
    }

    #[test]
    fn planted_relations_are_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b9);
        let base: Vec<Ball> = [2i64, 3, 5, 7]
            .iter()
            .map(|&k| eval(&parse(&format!("log({}; 0)", k)).unwrap(), 512).unwrap())
            .collect();
        for _ in 0..10 {
            // plant v5 = q1 v1 + ... + q4 v4 with gcd-1 heights <= 1000
            let mut q: Vec<i64> = (0..4).map(|_| rng.gen_range(-1000i64..=1000)).collect();
            q[0] = 1; // force primitivity
            let p = 512;
            let mut v5 = Ball::exact_zero(p);
            for (qi, v) in q.iter().zip(&base) {
                let c = Ball::from_rational(&BigRational::from(BigInt::from(*qi)), p);
                v5 = v5.add(&c.mul(v));
            }
            let mut values = base.clone();
            values.push(v5);
            let got = find_integer_relation(&values, 1000)
                .unwrap()
                .expect("planted relation must be found");
            let want: Vec<BigInt> = q
                .iter()
                .map(|&x| BigInt::from(x))
                .chain(std::iter::once(BigInt::from(-1)))
                .collect();
            assert_eq!(got, normalize_vector(&want));
        }
    }

    #[test]
    fn returned_vectors_satisfy_threshold() {
        let terms = logs_236();
        let values: Vec<Ball> = terms.iter().map(|t| eval(t, 256).unwrap()).collect();
        let q = find_integer_relation(&values, 100).unwrap().unwrap();
        assert!(residual_within(&values, &q, &pow2(-128)));
    }

    #[test]
    fn lll_shortens_a_planted_vector() {
        // rows spanning Z^3 with one short hidden combination
        let rows = vec![
            vec![BigInt::from(1), BigInt::from(0), BigInt::from(12345)],
            vec![BigInt::from(0), BigInt::from(1), BigInt::from(12344)],
            vec![BigInt::from(0), BigInt::from(0), BigInt::from(20000)],
        ];
        let red = lll_reduce(rows);
        // (1, -1, 1) has squared norm 3; LLL must find something comparable
        let min_norm: BigInt = red
            .iter()
            .map(|r| r.iter().map(|c| c * c).sum::<BigInt>())
            .min()
            .unwrap();
        assert!(min_norm <= BigInt::from(12));
    }
}
