//! Deterministic random term generators for test suites (enabled with the
//! `test-support` feature).  All generators go through the normalizing
//! constructors, so outputs are always valid normal forms.

use crate::algebraic;
use crate::term::Term;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

fn leaf(rng: &mut impl Rng, allow_alg: bool) -> Term {
    match rng.gen_range(0..if allow_alg { 4 } else { 3 }) {
        0 => Term::integer(rng.gen_range(-4i64..=5)),
        1 => Term::rational(BigRational::new(
            BigInt::from(rng.gen_range(1i64..=7)),
            BigInt::from(rng.gen_range(2i64..=7)),
        )),
        2 => Term::integer(rng.gen_range(2i64..=9)),
        _ => Term::algebraic(
            algebraic::lookup_name(if rng.gen_bool(0.5) { "sqrt2" } else { "i" }).unwrap(),
        ),
    }
}

fn combine(rng: &mut impl Rng, parts: Vec<Term>) -> Term {
    if rng.gen_bool(0.5) {
        Term::sum(parts)
    } else {
        Term::product(parts)
    }
}

/// Random term over Exp/Sum/Product/IntPow (no Log nodes), depth-bounded.
pub fn random_exp_term(rng: &mut impl Rng, depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng, true);
    }
    match rng.gen_range(0..4) {
        0 => random_exp_term(rng, depth - 1).exp(),
        1 | 2 => {
            let k = rng.gen_range(2..=3);
            let parts = (0..k).map(|_| random_exp_term(rng, depth - 1)).collect();
            combine(rng, parts)
        }
        _ => {
            let b = random_exp_term(rng, depth - 1);
            let e = *[-2i64, -1, 2, 3].get(rng.gen_range(0..4)).unwrap();
            b.ipow(e).unwrap_or_else(|_| b.exp())
        }
    }
}

/// Random term over Log/Sum/Product/IntPow (no Exp nodes), depth-bounded.
pub fn random_log_term(rng: &mut impl Rng, depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng, true);
    }
    match rng.gen_range(0..4) {
        0 => {
            let u = random_log_term(rng, depth - 1);
            let k = rng.gen_range(-2i64..=2);
            u.log(k).unwrap_or_else(|_| Term::integer(2).log(k).unwrap())
        }
        1 | 2 => {
            let k = rng.gen_range(2..=3);
            let parts = (0..k).map(|_| random_log_term(rng, depth - 1)).collect();
            combine(rng, parts)
        }
        _ => {
            let b = random_log_term(rng, depth - 1);
            let e = *[-2i64, -1, 2, 3].get(rng.gen_range(0..4)).unwrap();
            b.ipow(e)
                .unwrap_or_else(|_| Term::integer(3).log(0).unwrap())
        }
    }
}

/// Random mixed term (both Exp and Log may survive), depth-bounded.
pub fn random_term(rng: &mut impl Rng, depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.2) {
        return leaf(rng, true);
    }
    match rng.gen_range(0..5) {
        0 => random_term(rng, depth - 1).exp(),
        1 => {
            let u = random_term(rng, depth - 1);
            let k = rng.gen_range(-2i64..=2);
            u.log(k).unwrap_or_else(|_| Term::integer(2).log(k).unwrap())
        }
        2 | 3 => {
            let k = rng.gen_range(2..=3);
            let parts = (0..k).map(|_| random_term(rng, depth - 1)).collect();
            combine(rng, parts)
        }
        _ => {
            let b = random_term(rng, depth - 1);
            let e = *[-2i64, -1, 2, 3].get(rng.gen_range(0..4)).unwrap();
            b.ipow(e).unwrap_or_else(|_| leaf(rng, true))
        }
    }
}

/// A value-zero sum that normalization does not collapse: t*q + t*(-q) style
/// cancellations around a random core term.
pub fn random_zero_identity(rng: &mut impl Rng, depth: u32) -> Term {
    let core = random_term(rng, depth);
    let q = BigRational::new(
        BigInt::from(rng.gen_range(1i64..=9)),
        BigInt::from(rng.gen_range(1i64..=9)),
    );
    let plus = Term::product(vec![Term::rational(q.clone()), core.clone()]);
    let minus = Term::product(vec![Term::rational(-q), core]);
    Term::sum(vec![plus, minus])
}
