//! Complex ball arithmetic: midpoint-radius enclosures at a stated working
//! precision.  Midpoints are astro-float `BigFloat`s rounded to nearest;
//! every operation adds explicit ulp slack to the radius, so the true value
//! of the represented quantity always stays inside the ball (assuming the
//! underlying primitives round to nearest, which astro-float guarantees).
//!
//! Exact zero is never concluded here: a ball can certify "nonzero", never
//! "zero".

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::cell::RefCell;

/// Precision used for radius bookkeeping.
pub const RAD_PREC: usize = 64;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

pub fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// 2^k as a BigFloat.
pub fn pow2(k: i64) -> BigFloat {
    let mut x = BigFloat::from_word(1, RAD_PREC);
    debug_assert!(k + 1 <= i32::MAX as i64 && k + 1 >= i32::MIN as i64);
    x.set_exponent((k + 1) as i32);
    x
}

/// Upper bound on the rounding error of a nearest-rounded result `x` at
/// precision `p`: one full ulp (the true error is at most half an ulp).
fn ulp(x: &BigFloat, p: usize) -> BigFloat {
    match x.exponent() {
        Some(e) => pow2(e as i64 - p as i64),
        None => BigFloat::new(RAD_PREC), // exact zero results carry no error
    }
}

/// Add `n` ulps of `x` to a radius, then bump by one radius-ulp so the
/// low-precision radius arithmetic itself stays an upper bound.
fn rad_with_ulps(rad: &BigFloat, xs: &[(&BigFloat, usize)], n: usize) -> BigFloat {
    let mut r = rad.clone();
    for (x, p) in xs {
        let u = ulp(x, *p);
        for _ in 0..n {
            r = r.add(&u, RAD_PREC, RoundingMode::FromZero);
        }
    }
    bump(&r)
}

/// r * (1 + 2^-40): absorbs nearest-rounding slop in radius computations.
fn bump(r: &BigFloat) -> BigFloat {
    if r.is_zero() {
        return r.clone();
    }
    let e = r.exponent().unwrap_or(0) as i64;
    r.add(&pow2(e - 40), RAD_PREC, RoundingMode::FromZero)
}

fn rad_add(a: &BigFloat, b: &BigFloat) -> BigFloat {
    bump(&a.add(b, RAD_PREC, RM))
}

fn rad_mul(a: &BigFloat, b: &BigFloat) -> BigFloat {
    bump(&a.mul(b, RAD_PREC, RM))
}

/// Convert a BigInt to a BigFloat exactly (then rounded to `p` bits).
pub fn bf_from_bigint(n: &BigInt, p: usize) -> BigFloat {
    if n.is_zero() {
        return BigFloat::new(p);
    }
    let bits = n.bits();
    let words = ((bits + 63) / 64) as usize;
    let shift = words as u64 * 64 - bits;
    let shifted: BigInt = n.abs() << shift;
    let digits = shifted.magnitude().to_u64_digits();
    let sign = if n.is_negative() { Sign::Neg } else { Sign::Pos };
    let mut x = BigFloat::from_words(&digits, sign, bits as i32);
    x.set_precision(p.max(64), RM).expect("set precision");
    x
}

/// Rational to BigFloat at precision `p`; the result errs by at most one ulp.
pub fn bf_from_ratio(q: &BigRational, p: usize) -> BigFloat {
    let num = bf_from_bigint(q.numer(), p + 64);
    let den = bf_from_bigint(q.denom(), p + 64);
    num.div(&den, p, RM)
}

/// A complex enclosure: the represented value lies within `rad` of
/// `re + i*im` (Euclidean distance), with midpoint precision `prec` bits.
#[derive(Clone, Debug)]
pub struct Ball {
    pub re: BigFloat,
    pub im: BigFloat,
    pub rad: BigFloat,
    pub prec: usize,
}

impl Ball {
    pub fn exact_zero(prec: usize) -> Self {
        Ball {
            re: BigFloat::new(prec),
            im: BigFloat::new(prec),
            rad: BigFloat::new(RAD_PREC),
            prec,
        }
    }

    pub fn from_rational(q: &BigRational, prec: usize) -> Self {
        let re = bf_from_ratio(q, prec);
        // dyadic rationals that fit the precision convert exactly; checking
        // keeps e.g. the -1 inside log(-1; 0) off the branch-cut inflation
        let rad = if &bf_to_rational(&re) == q {
            BigFloat::new(RAD_PREC)
        } else {
            rad_with_ulps(&BigFloat::new(RAD_PREC), &[(&re, prec)], 2)
        };
        Ball {
            re,
            im: BigFloat::new(prec),
            rad,
            prec,
        }
    }

    /// Build from rational rectangle endpoints (used for algebraic boxes).
    pub fn from_box(
        re_lo: &BigRational,
        re_hi: &BigRational,
        im_lo: &BigRational,
        im_hi: &BigRational,
        prec: usize,
    ) -> Self {
        let two = BigRational::from(BigInt::from(2));
        let rc = (re_lo + re_hi) / &two;
        let ic = (im_lo + im_hi) / &two;
        let re = bf_from_ratio(&rc, prec);
        let im = bf_from_ratio(&ic, prec);
        // half-diagonal, computed on rationals then rounded generously
        let hw = (re_hi - re_lo) / &two;
        let hh = (im_hi - im_lo) / &two;
        let diag2 = &hw * &hw + &hh * &hh;
        let d = bf_from_ratio(&diag2, RAD_PREC).sqrt(RAD_PREC, RM);
        let rad = rad_with_ulps(&bump(&bump(&d)), &[(&re, prec), (&im, prec)], 2);
        Ball { re, im, rad, prec }
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    /// Upper bound on |midpoint|.
    pub fn mid_abs_ub(&self) -> BigFloat {
        let r2 = self.re.mul(&self.re, RAD_PREC, RM);
        let i2 = self.im.mul(&self.im, RAD_PREC, RM);
        bump(&bump(&r2.add(&i2, RAD_PREC, RM).sqrt(RAD_PREC, RM)))
    }

    /// Lower bound on |midpoint|: max(|re|, |im|) minus one ulp.
    pub fn mid_abs_lb(&self) -> BigFloat {
        let a = abs_bf(&self.re);
        let b = abs_bf(&self.im);
        let m = a.max(&b);
        let out = m.sub(&ulp(&m, RAD_PREC), RAD_PREC, RM);
        if out.is_negative() {
            BigFloat::new(RAD_PREC)
        } else {
            out
        }
    }

    /// Upper bound on |value| over the whole ball.
    pub fn abs_ub(&self) -> BigFloat {
        rad_add(&self.mid_abs_ub(), &self.rad)
    }

    /// Lower bound on |value| over the ball; zero when 0 may be inside.
    pub fn abs_lb(&self) -> BigFloat {
        let lb = self.mid_abs_lb();
        let out = lb.sub(&self.rad, RAD_PREC, RM);
        let out = out.sub(&ulp(&lb, RAD_PREC), RAD_PREC, RM);
        if out.is_negative() {
            BigFloat::new(RAD_PREC)
        } else {
            out
        }
    }

    /// True when the enclosure certainly excludes zero.
    pub fn certainly_nonzero(&self) -> bool {
        strictly_positive(&self.abs_lb())
    }

    pub fn add(&self, other: &Ball) -> Ball {
        let p = self.prec.min(other.prec);
        let re = self.re.add(&other.re, p, RM);
        let im = self.im.add(&other.im, p, RM);
        let rad = rad_with_ulps(&rad_add(&self.rad, &other.rad), &[(&re, p), (&im, p)], 2);
        Ball { re, im, rad, prec: p }
    }

    pub fn neg(&self) -> Ball {
        Ball {
            re: self.re.neg(),
            im: self.im.neg(),
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Ball) -> Ball {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Ball) -> Ball {
        let p = self.prec.min(other.prec);
        let ac = self.re.mul(&other.re, p, RM);
        let bd = self.im.mul(&other.im, p, RM);
        let ad = self.re.mul(&other.im, p, RM);
        let bc = self.im.mul(&other.re, p, RM);
        let re = ac.sub(&bd, p, RM);
        let im = ad.add(&bc, p, RM);
        // |a| rb + |b| ra + ra rb
        let ma = self.mid_abs_ub();
        let mb = other.mid_abs_ub();
        let mut rad = rad_mul(&ma, &other.rad);
        rad = rad_add(&rad, &rad_mul(&mb, &self.rad));
        rad = rad_add(&rad, &rad_mul(&self.rad, &other.rad));
        let rad = rad_with_ulps(&rad, &[(&re, p), (&im, p), (&ac, p), (&ad, p)], 4);
        Ball { re, im, rad, prec: p }
    }

    /// Reciprocal; None when the ball may contain zero.
    pub fn inv(&self) -> Option<Ball> {
        let lb = self.abs_lb();
        if !strictly_positive(&lb) {
            return None;
        }
        let p = self.prec;
        let r2 = self.re.mul(&self.re, p, RM);
        let i2 = self.im.mul(&self.im, p, RM);
        let n = r2.add(&i2, p, RM);
        let re = self.re.div(&n, p, RM);
        let im = self.im.neg().div(&n, p, RM);
        // |1/z - 1/mid| <= rad / (|mid| * |z|) <= rad / (mid_lb * lb)
        let mid_lb = self.mid_abs_lb();
        let denom = mid_lb.mul(&lb, RAD_PREC, RM);
        let prop = bump(&bump(&self.rad.div(&denom, RAD_PREC, RM)));
        let rad = rad_with_ulps(&prop, &[(&re, p), (&im, p), (&n, p)], 4);
        Some(Ball { re, im, rad, prec: p })
    }

    /// Integer power by repeated squaring; negative exponents go through inv.
    pub fn ipow(&self, e: i64) -> Option<Ball> {
        if e == 0 {
            return Some(Ball {
                re: BigFloat::from_word(1, self.prec),
                im: BigFloat::new(self.prec),
                rad: BigFloat::new(RAD_PREC),
                prec: self.prec,
            });
        }
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc: Option<Ball> = None;
        let mut sq = base;
        loop {
            if n & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(a) => a.mul(&sq),
                });
            }
            n >>= 1;
            if n == 0 {
                break;
            }
            sq = sq.mul(&sq);
        }
        acc
    }

    /// exp(z) with a first-derivative error bound.
    pub fn exp(&self) -> Ball {
        let p = self.prec;
        let (ea, s, c) = with_consts(|cc| {
            let ea = self.re.exp(p, RM, cc);
            let s = self.im.sin(p, RM, cc);
            let c = self.im.cos(p, RM, cc);
            (ea, s, c)
        });
        let re = ea.mul(&c, p, RM);
        let im = ea.mul(&s, p, RM);
        // |exp(z) - exp(mid)| <= |exp(mid)| * (e^rad - 1) <= |exp(mid)| *
        // rad * e^rad; the latter form avoids the catastrophic cancellation
        // of e^rad - 1 for tiny radii
        let growth = with_consts(|cc| {
            let er = self.rad.exp(RAD_PREC, RM, cc);
            rad_mul(&bump(&self.rad), &bump(&er))
        });
        let mag = bump(&abs_bf(&ea));
        let prop = rad_mul(&mag, &growth);
        let rad = rad_with_ulps(&prop, &[(&re, p), (&im, p), (&ea, p)], 4);
        Ball { re, im, rad, prec: p }
    }

    /// log(z) on branch k: principal log plus 2*pi*i*k.
    ///
    /// Returns None when the enclosure may contain 0 (caller escalates
    /// precision).  When the enclosure crosses the negative real axis the
    /// imaginary radius is inflated by 2*pi instead of erroring.
    pub fn log_branch(&self, k: i64) -> Option<Ball> {
        let lb = self.abs_lb();
        if !strictly_positive(&lb) {
            return None;
        }
        let p = self.prec;
        let r2 = self.re.mul(&self.re, p, RM);
        let i2 = self.im.mul(&self.im, p, RM);
        let n = r2.add(&i2, p, RM);
        let (half_ln, arg, two_pi) = with_consts(|cc| {
            let l = n.ln(p, RM, cc);
            let half = l.div(&BigFloat::from_word(2, p), p, RM);
            let pi = cc.pi(p, RM);
            let arg = atan2(&self.im, &self.re, &pi, p, cc);
            let two_pi = pi.mul(&BigFloat::from_word(2, p), p, RM);
            (half, arg, two_pi)
        });
        let re = half_ln;
        let im = if k == 0 {
            arg
        } else {
            let offs = two_pi.mul(&BigFloat::from_i64(k, p), p, RM);
            arg.add(&offs, p, RM)
        };
        // Lipschitz bound 1/|z| on the slit plane
        let mut rad = bump(&bump(&self.rad.div(&lb, RAD_PREC, RM)));
        if self.crosses_negative_axis() {
            // principal arg may jump by up to 2*pi across the cut
            let tp = bump(&two_pi.clone());
            rad = rad_add(&rad, &tp);
        }
        let rad = rad_with_ulps(&rad, &[(&re, p), (&im, p), (&n, p)], 4);
        Some(Ball { re, im, rad, prec: p })
    }

    /// Does the enclosure straddle the branch cut {re <= 0, im = 0}?  The
    /// principal argument only jumps when the ball holds points on *both*
    /// sides of the axis, so |im| must be strictly below the radius; a ball
    /// sitting exactly on the negative axis (e.g. the exact -1) is fine.
    fn crosses_negative_axis(&self) -> bool {
        let im_straddles = abs_bf(&self.im).cmp(&self.rad).map_or(true, |c| c < 0);
        let re_ok = self.re.cmp(&self.rad).map_or(true, |c| c <= 0);
        im_straddles && re_ok
    }

    /// Upper bound on the distance between the midpoints of two balls.
    pub fn mid_distance_ub(&self, other: &Ball) -> BigFloat {
        let dr = self.re.sub(&other.re, RAD_PREC, RM);
        let di = self.im.sub(&other.im, RAD_PREC, RM);
        let d2 = dr.mul(&dr, RAD_PREC, RM).add(&di.mul(&di, RAD_PREC, RM), RAD_PREC, RM);
        bump(&bump(&bump(&d2.sqrt(RAD_PREC, RM))))
    }

    /// Two sound enclosures of the same value must overlap.
    pub fn overlaps(&self, other: &Ball) -> bool {
        let d = self.mid_distance_ub(other);
        let s = rad_add(&self.rad, &other.rad);
        // allow the slack we ourselves introduced when bounding the distance
        let s = rad_with_ulps(&s, &[(&d, RAD_PREC)], 8);
        d.cmp(&s).map_or(true, |c| c <= 0)
    }

    /// Midpoint scaled by 2^shift and truncated to integers (re, im).
    pub fn mid_scaled_int(&self, shift: i64) -> (BigInt, BigInt) {
        (bf_scaled_int(&self.re, shift), bf_scaled_int(&self.im, shift))
    }

    /// Decimal rendering of the midpoint, for humans.
    pub fn display(&self) -> String {
        let re = bf_to_f64(&self.re);
        let im = bf_to_f64(&self.im);
        let rad = bf_to_f64(&self.rad);
        if im == 0.0 {
            format!("{:.12} (+/- {:.3e})", re, rad)
        } else {
            format!("{:.12} + {:.12}i (+/- {:.3e})", re, im, rad)
        }
    }
}

/// astro-float's zero answers `is_positive()`, so test explicitly.
pub fn strictly_positive(x: &BigFloat) -> bool {
    !x.is_zero() && !x.is_negative()
}

pub fn abs_bf(x: &BigFloat) -> BigFloat {
    let mut y = x.clone();
    y.set_sign(Sign::Pos);
    y
}

/// Principal-value argument from exact component signs.
fn atan2(y: &BigFloat, x: &BigFloat, pi: &BigFloat, p: usize, cc: &mut Consts) -> BigFloat {
    if x.is_zero() {
        let half_pi = pi.div(&BigFloat::from_word(2, p), p, RM);
        return if y.is_negative() { half_pi.neg() } else { half_pi };
    }
    let base = y.div(x, p, RM).atan(p, RM, cc);
    if x.is_positive() {
        base
    } else if y.is_negative() {
        base.sub(pi, p, RM)
    } else {
        base.add(pi, p, RM)
    }
}

/// floor-ish (truncated) value of x * 2^shift as a BigInt.
pub fn bf_scaled_int(x: &BigFloat, shift: i64) -> BigInt {
    if x.is_zero() {
        return BigInt::zero();
    }
    let (words, _n, sign, exp, _inexact) = x.as_raw_parts().expect("finite");
    let total_bits = words.len() as i64 * 64;
    let mut v = words
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, &w| (acc << 64u32) | BigInt::from(w));
    let sh = exp as i64 + shift - total_bits;
    if sh >= 0 {
        v <<= sh as u64;
    } else {
        v >>= (-sh) as u64;
    }
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

/// Exact conversion: BigFloats are dyadic rationals.
pub fn bf_to_rational(x: &BigFloat) -> BigRational {
    if x.is_zero() {
        return BigRational::zero();
    }
    let (words, _n, sign, exp, _) = x.as_raw_parts().expect("finite");
    let total_bits = words.len() as i64 * 64;
    let mant = words
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, &w| (acc << 64u32) | BigInt::from(w));
    let mant = if sign == Sign::Neg { -mant } else { mant };
    let sh = exp as i64 - total_bits;
    if sh >= 0 {
        BigRational::from(mant << sh as u64)
    } else {
        BigRational::new(mant, BigInt::from(1) << (-sh) as u64)
    }
}

pub fn bf_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let (words, _n, sign, exp, _) = x.as_raw_parts().expect("finite");
    let top = words.last().copied().unwrap_or(0) as f64 / 2f64.powi(64);
    let second = if words.len() > 1 {
        words[words.len() - 2] as f64 / 2f64.powi(128)
    } else {
        0.0
    };
    let m = top + second;
    let v = m * 2f64.powi(exp.clamp(-1000, 1000));
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exp_of_one_is_e() {
        let one = Ball::from_rational(&BigRational::one(), 128);
        let e = one.exp();
        let v = bf_to_f64(&e.re);
        assert!((v - std::f64::consts::E).abs() < 1e-12);
        assert!(bf_to_f64(&e.rad) < 1e-30);
        assert!(e.certainly_nonzero());
    }

    #[test]
    fn log_of_minus_one_is_i_pi() {
        let m1 = Ball::from_rational(&rational(-1, 1), 128);
        let l = m1.log_branch(0).unwrap();
        assert!(bf_to_f64(&l.re).abs() < 1e-30);
        assert!((bf_to_f64(&l.im) - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn log_branch_offset() {
        let two = Ball::from_rational(&rational(2, 1), 128);
        let l0 = two.log_branch(0).unwrap();
        let l1 = two.log_branch(1).unwrap();
        let diff = bf_to_f64(&l1.im) - bf_to_f64(&l0.im);
        assert!((diff - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn mul_matches_known_product() {
        // (1+2i)(3-i) = 5 + 5i
        let a = Ball {
            re: BigFloat::from_i64(1, 128),
            im: BigFloat::from_i64(2, 128),
            rad: BigFloat::new(RAD_PREC),
            prec: 128,
        };
        let b = Ball {
            re: BigFloat::from_i64(3, 128),
            im: BigFloat::from_i64(-1, 128),
            rad: BigFloat::new(RAD_PREC),
            prec: 128,
        };
        let c = a.mul(&b);
        assert!((bf_to_f64(&c.re) - 5.0).abs() < 1e-12);
        assert!((bf_to_f64(&c.im) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn exp_log_round_trip_overlaps() {
        let q = rational(7, 3);
        let x = Ball::from_rational(&q, 192);
        let y = x.log_branch(0).unwrap().exp();
        assert!(x.overlaps(&y));
        let d = y.mid_distance_ub(&x);
        assert!(d.is_zero() || d.exponent().map_or(true, |e| e < -150));
    }

    #[test]
    fn refinement_shrinks_radius() {
        let q = rational(10, 7);
        let coarse = Ball::from_rational(&q, 64).log_branch(0).unwrap();
        let fine = Ball::from_rational(&q, 512).log_branch(0).unwrap();
        assert!(coarse.overlaps(&fine));
        let ec = coarse.rad.exponent().unwrap();
        let ef = fine.rad.exponent().unwrap();
        assert!(ef < ec - 100);
    }

    #[test]
    fn inv_of_ball_containing_zero_is_none() {
        let z = Ball {
            re: BigFloat::from_f64(1e-10, 64),
            im: BigFloat::new(64),
            rad: BigFloat::from_f64(1.0, RAD_PREC),
            prec: 64,
        };
        assert!(z.inv().is_none());
        assert!(!z.certainly_nonzero());
    }

    #[test]
    fn branch_cut_inflation() {
        // ball straddling the cut near -1
        let z = Ball {
            re: BigFloat::from_i64(-1, 128),
            im: BigFloat::new(128),
            rad: BigFloat::from_f64(1e-6, RAD_PREC),
            prec: 128,
        };
        let l = z.log_branch(0).unwrap();
        // radius must cover the 2*pi jump
        assert!(bf_to_f64(&l.rad) > 6.0);
    }

    #[test]
    fn scaled_int_extraction() {
        let x = BigFloat::from_f64(2.5, 128);
        assert_eq!(bf_scaled_int(&x, 2), BigInt::from(10));
        assert_eq!(bf_scaled_int(&x.neg(), 2), BigInt::from(-10));
        let q = Ball::from_rational(&rational(1, 3), 256);
        let (r, i) = q.mid_scaled_int(30);
        assert_eq!(r, BigInt::from((1i64 << 30) / 3));
        assert_eq!(i, BigInt::zero());
    }

    #[test]
    fn ipow_negative_exponent() {
        let two = Ball::from_rational(&rational(2, 1), 128);
        let inv8 = two.ipow(-3).unwrap();
        assert!((bf_to_f64(&inv8.re) - 0.125).abs() < 1e-12);
    }
}
