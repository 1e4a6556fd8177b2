//! Ball-arithmetic evaluation of terms and the nonzeroness certifier.
//!
//! Policy: start at the requested precision (min 64 bits), double whenever an
//! enclosure is too coarse (log of a ball containing 0, inversion of a ball
//! containing 0), cap at 2^18 bits.  Zero is never concluded numerically;
//! only symbolic collection may establish exact zero.

use crate::algebraic;
use crate::ball::Ball;
use crate::term::{Term, TermNode};
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::HashMap;

/// Hard ceiling for working precision (bits).
pub const PREC_CAP: usize = 1 << 18;

#[derive(thiserror::Error, Debug)]
pub enum NumError {
    #[error("precision escalation failed at {0} bits")]
    PrecisionExhausted(usize),
}

/// Sound complex enclosure of the term's value at >= `prec` bits.
pub fn eval(t: &Term, prec: usize) -> Result<Ball, NumError> {
    let mut p = prec.max(64);
    loop {
        let mut memo = HashMap::new();
        if let Some(b) = try_eval(t, p, &mut memo) {
            return Ok(b);
        }
        if p >= PREC_CAP {
            return Err(NumError::PrecisionExhausted(p));
        }
        p = (p * 2).min(PREC_CAP);
    }
}

fn try_eval(t: &Term, p: usize, memo: &mut HashMap<u64, Ball>) -> Option<Ball> {
    if let Some(b) = memo.get(&t.id()) {
        return Some(b.clone());
    }
    let b = match t.node() {
        TermNode::Rational(q) => Ball::from_rational(q, p),
        TermNode::AlgebraicLeaf(a) => algebraic::enclosure(*a, p),
        TermNode::Sum(cs) => {
            let mut acc = Ball::exact_zero(p);
            for c in cs {
                acc = acc.add(&try_eval(c, p, memo)?);
            }
            acc
        }
        TermNode::Product(cs) => {
            let mut acc = Ball::from_rational(&BigRational::from_integer(1.into()), p);
            for c in cs {
                acc = acc.mul(&try_eval(c, p, memo)?);
            }
            acc
        }
        TermNode::IntPow(base, e) => try_eval(base, p, memo)?.ipow(*e)?,
        TermNode::Exp(u) => try_eval(u, p, memo)?.exp(),
        TermNode::Log(u, k) => try_eval(u, p, memo)?.log_branch(*k)?,
    };
    memo.insert(t.id(), b.clone());
    Some(b)
}

/// Certificate that a term's value is nonzero, with the precision at which
/// the enclosure excluded 0.
#[derive(Clone, Debug)]
pub struct NonzeroCert {
    pub term: Term,
    pub prec: usize,
}

/// Cheap sound zero test: rational coefficients distributed over sums
/// cancel coefficient-wise (`x - x` and `q*(a+b) - q*a - q*b` patterns,
/// which sum normalization deliberately does not collect).
pub fn obviously_zero(t: &Term) -> bool {
    fn accumulate(acc: &mut HashMap<Vec<u64>, BigRational>, coeff: BigRational, t: &Term) {
        match t.node() {
            TermNode::Rational(q) => {
                *acc.entry(vec![]).or_insert_with(BigRational::zero) += coeff * q;
            }
            TermNode::Sum(cs) => {
                for c in cs {
                    accumulate(acc, coeff.clone(), c);
                }
            }
            TermNode::Product(cs) => {
                let mut coeff = coeff;
                let mut rest = Vec::new();
                for f in cs {
                    match f.node() {
                        TermNode::Rational(q) => coeff *= q,
                        _ => rest.push(f.clone()),
                    }
                }
                // a lone sum under a rational scalar distributes exactly
                if rest.len() == 1 && matches!(rest[0].node(), TermNode::Sum(_)) {
                    accumulate(acc, coeff, &rest[0]);
                } else {
                    let key: Vec<u64> = rest.iter().map(|r| r.id()).collect();
                    *acc.entry(key).or_insert_with(BigRational::zero) += coeff;
                }
            }
            _ => {
                *acc.entry(vec![t.id()]).or_insert_with(BigRational::zero) += coeff;
            }
        }
    }
    let mut acc = HashMap::new();
    accumulate(&mut acc, BigRational::from_integer(1.into()), t);
    acc.values().all(|q| q.is_zero())
}

/// Escalate precision (64 bits, 12 doublings) until the enclosure excludes 0.
/// Returns None for anything that may be zero — never certifies zero.
pub fn certify_nonzero(t: &Term) -> Option<NonzeroCert> {
    if let Some(q) = t.as_rational() {
        return if q.is_zero() {
            None
        } else {
            Some(NonzeroCert { term: t.clone(), prec: 0 })
        };
    }
    if obviously_zero(t) {
        return None;
    }
    let mut p = 64usize;
    for _ in 0..=12 {
        let mut memo = HashMap::new();
        if let Some(b) = try_eval(t, p, &mut memo) {
            if b.certainly_nonzero() {
                return Some(NonzeroCert { term: t.clone(), prec: p });
            }
        }
        p *= 2;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::bf_to_f64;
    use crate::term::{euler_e, i_pi, parse, pi};

    #[test]
    fn eval_i_pi() {
        let b = eval(&i_pi(), 128).unwrap();
        assert!(bf_to_f64(&b.re).abs() < 1e-30);
        assert!((bf_to_f64(&b.im) - std::f64::consts::PI).abs() < 1e-15);
        assert!(bf_to_f64(&b.rad) < 2f64.powi(-100));
    }

    #[test]
    fn eval_e() {
        let b = eval(&euler_e(), 64).unwrap();
        assert!((bf_to_f64(&b.re) - std::f64::consts::E).abs() < 1e-15);
        assert!(bf_to_f64(&b.im).abs() < 1e-15);
    }

    #[test]
    fn eval_log_log_pi() {
        let t = pi().log(0).unwrap().log(0).unwrap();
        let b = eval(&t, 256).unwrap();
        // independently computed: log(log(pi)) = 0.13516870162052962769995...
        assert!((bf_to_f64(&b.re) - 0.135168701620529627).abs() < 1e-15);
        assert!(bf_to_f64(&b.im).abs() < 1e-30);
    }

    #[test]
    fn refinement_shrinks_consistently() {
        let t = parse("exp(alg(sqrt2)) + log(3; 1) * pi").unwrap();
        let coarse = eval(&t, 64).unwrap();
        let fine = eval(&t, 512).unwrap();
        assert!(coarse.overlaps(&fine));
        assert!(bf_to_f64(&fine.rad) < bf_to_f64(&coarse.rad));
    }

    #[test]
    fn certify_e_minus_three() {
        // e - 3 = -0.28171817154... (independently computed)
        let t = parse("e + -3").unwrap();
        let c = certify_nonzero(&t).expect("nonzero");
        assert!(c.prec >= 64);
        let b = eval(&t, 64).unwrap();
        assert!((bf_to_f64(&b.re) + 0.281718171540954764).abs() < 1e-14);
    }

    #[test]
    fn never_certifies_cancelled_sums() {
        // x - x with x not collectible by sum normalization
        let x = parse("exp(alg(sqrt2)) * log(5; 0)").unwrap();
        let z = crate::term::Term::sum(vec![x.clone(), x.neg()]);
        assert!(obviously_zero(&z));
        assert!(certify_nonzero(&z).is_none());
        // and exp(log 2) - 2 dies in normalization already
        let t = parse("exp(log(2; 0)) + -2").unwrap();
        assert!(t.as_rational().map_or(false, |q| q.is_zero()));
        assert!(certify_nonzero(&t).is_none());
    }

    #[test]
    fn certify_i_pi_fast() {
        let c = certify_nonzero(&i_pi()).expect("i*pi is nonzero");
        assert_eq!(c.prec, 64);
    }

    #[test]
    fn log_near_cut_stays_sound() {
        // log(-1 + tiny imaginary wiggle; 0): enclosure of the argument
        // crosses the cut at low precision; radius must absorb the jump
        let t = parse("log(-1 + 1/100000000000000000000 * i; 0)").unwrap();
        let b = eval(&t, 64).unwrap();
        let fine = eval(&t, 512).unwrap();
        assert!(b.overlaps(&fine));
        assert!((bf_to_f64(&fine.im) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn square_of_sqrt2_minus_two_never_certified() {
        // value-zero but not syntactically zero: the enclosure always
        // contains 0, so escalation runs out without certifying
        let t = parse("alg(sqrt2)^2 + -2").unwrap();
        assert!(!obviously_zero(&t));
        let mut memo = HashMap::new();
        for p in [64usize, 256, 1024] {
            memo.clear();
            let b = try_eval(&t, p, &mut memo).unwrap();
            assert!(!b.certainly_nonzero());
        }
    }
}
