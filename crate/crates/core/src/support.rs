//! Support-set extraction: for a term sitting at level n of one tower,
//! produce the finite set one level down that generates it, together with a
//! re-checkable syntactic certificate.
//!
//! The extracted property is deliberately stronger than "algebraic over the
//! generated field": every maximal Exp-subterm (resp. Log-subterm) of the
//! subject and of every collected element has its argument (resp. itself)
//! inside the set.  "Generated by" implies "algebraic over", and the
//! syntactic form is decidable and exactly what the disjointness replay
//! consumes.
//!
//! Harvesting is outermost-first, then recurses into the harvested
//! arguments, mirroring the level-by-level cascade; the union over all
//! levels is returned.

use crate::term::{term_order, Term, TermNode};
use std::collections::HashSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportKind {
    ExpSupport,
    LogSupport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactRole {
    Subject,
    Element,
}

/// One re-checkable closure fact: what was harvested from `about`.
#[derive(Clone, Debug)]
pub struct ClosureFact {
    pub role: FactRole,
    /// the subject or one of the elements
    pub about: Term,
    /// exp side: arguments of the maximal Exp-subterms of `about`;
    /// log side: maximal Log-subterms of the exp-image of `about`
    pub harvested: Vec<Term>,
    /// log side: l_level of the exp-image (must be <= level_witness)
    pub exp_image_level: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct SupportSet {
    pub kind: SupportKind,
    pub subject: Term,
    /// sorted under the term order
    pub elements: Vec<Term>,
    /// the n-1 bound: every element lives at most here
    pub level_witness: u32,
    pub certificate: Vec<ClosureFact>,
}

#[derive(thiserror::Error, Debug)]
pub enum SupportError {
    #[error("term has no e-level (a Log survives normalization)")]
    UndefinedELevel,
    #[error("term has no l-level (an Exp survives normalization)")]
    UndefinedLLevel,
    #[error("term is algebraic (level 0); the lemma needs level >= 1")]
    LevelZero,
}

/// Arguments of the maximal Exp-subterms: harvest outermost-first, do not
/// descend into a harvested argument.
pub fn max_exp_args(t: &Term) -> Vec<Term> {
    fn walk(t: &Term, seen: &mut HashSet<u64>, out: &mut Vec<Term>) {
        if !seen.insert(t.id()) {
            return;
        }
        if let TermNode::Exp(u) = t.node() {
            out.push(u.clone());
            return;
        }
        for c in t.children() {
            walk(&c, seen, out);
        }
    }
    let mut out = Vec::new();
    walk(t, &mut HashSet::new(), &mut out);
    dedup_sorted(out)
}

/// Maximal Log-subterms (the Log nodes themselves), outermost-first.
pub fn max_log_subterms(t: &Term) -> Vec<Term> {
    fn walk(t: &Term, seen: &mut HashSet<u64>, out: &mut Vec<Term>) {
        if !seen.insert(t.id()) {
            return;
        }
        if matches!(t.node(), TermNode::Log(..)) {
            out.push(t.clone());
            return;
        }
        for c in t.children() {
            walk(&c, seen, out);
        }
    }
    let mut out = Vec::new();
    walk(t, &mut HashSet::new(), &mut out);
    dedup_sorted(out)
}

fn dedup_sorted(mut v: Vec<Term>) -> Vec<Term> {
    v.sort_by(term_order);
    v.dedup();
    v
}

/// Level-by-level cascade for a term at e-level n >= 1: the union of the
/// per-level argument sets, each one level further down.
pub fn exp_support(x: &Term) -> Result<SupportSet, SupportError> {
    let n = x.e_level().ok_or(SupportError::UndefinedELevel)?;
    if n == 0 {
        return Err(SupportError::LevelZero);
    }
    let mut elements: Vec<Term> = Vec::new();
    let mut certificate = Vec::new();
    let mut queue: Vec<Term> = vec![x.clone()];
    let mut processed: HashSet<u64> = HashSet::new();
    while let Some(t) = queue.pop() {
        if !processed.insert(t.id()) {
            continue;
        }
        let args = max_exp_args(&t);
        for a in &args {
            if !elements.contains(a) {
                elements.push(a.clone());
            }
            queue.push(a.clone());
        }
        certificate.push(ClosureFact {
            role: if t == *x { FactRole::Subject } else { FactRole::Element },
            about: t,
            harvested: args,
            exp_image_level: None,
        });
    }
    Ok(SupportSet {
        kind: SupportKind::ExpSupport,
        subject: x.clone(),
        elements: dedup_sorted(elements),
        level_witness: n - 1,
        certificate,
    })
}

/// Dual cascade for a term at l-level n >= 1: collect every Log-subterm c;
/// exp(c) normalizes to c's argument, which lies one level down, and its own
/// Log-subterms are collected recursively.
pub fn log_support(x: &Term) -> Result<SupportSet, SupportError> {
    let n = x.l_level().ok_or(SupportError::UndefinedLLevel)?;
    if n == 0 {
        return Err(SupportError::LevelZero);
    }
    let mut elements: Vec<Term> = Vec::new();
    let mut certificate = Vec::new();
    let top = max_log_subterms(x);
    certificate.push(ClosureFact {
        role: FactRole::Subject,
        about: x.clone(),
        harvested: top.clone(),
        exp_image_level: None,
    });
    let mut queue = top;
    let mut processed: HashSet<u64> = HashSet::new();
    while let Some(c) = queue.pop() {
        if !processed.insert(c.id()) {
            continue;
        }
        let image = match c.node() {
            TermNode::Log(u, _) => u.clone(),
            _ => unreachable!("only Log nodes are collected"),
        };
        let inner = max_log_subterms(&image);
        for l in &inner {
            queue.push(l.clone());
        }
        if !elements.contains(&c) {
            elements.push(c.clone());
        }
        certificate.push(ClosureFact {
            role: FactRole::Element,
            about: c,
            harvested: inner,
            exp_image_level: image.l_level(),
        });
    }
    Ok(SupportSet {
        kind: SupportKind::LogSupport,
        subject: x.clone(),
        elements: dedup_sorted(elements),
        level_witness: n - 1,
        certificate,
    })
}

/// Re-check every invariant from scratch (used by the trace checker and
/// after deserialization).  Returns all diagnostics, not just the first.
pub fn verify_closure(s: &SupportSet) -> (bool, Vec<String>) {
    let mut diags = Vec::new();
    let level = match s.kind {
        SupportKind::ExpSupport => s.subject.e_level(),
        SupportKind::LogSupport => s.subject.l_level(),
    };
    let n = match level {
        None => {
            diags.push("subject has no level in the claimed tower".into());
            return (false, diags);
        }
        Some(0) => {
            // boundary: an algebraic subject with nothing to support
            if s.elements.is_empty() && s.level_witness == 0 {
                return (true, diags);
            }
            diags.push("level-0 subject with nonempty support".into());
            return (false, diags);
        }
        Some(n) => n,
    };
    if s.level_witness != n - 1 {
        diags.push(format!(
            "level witness {} does not match subject level {} - 1",
            s.level_witness, n
        ));
    }
    let mut sorted = s.elements.clone();
    sorted.sort_by(term_order);
    sorted.dedup();
    if sorted != s.elements {
        diags.push("elements are not sorted and distinct".into());
    }
    let contains = |t: &Term| s.elements.contains(t);
    match s.kind {
        SupportKind::ExpSupport => {
            for a in &s.elements {
                match a.e_level() {
                    Some(l) if l <= s.level_witness => {}
                    _ => diags.push(format!("element {} exceeds level witness", a)),
                }
            }
            for about in std::iter::once(&s.subject).chain(s.elements.iter()) {
                for arg in max_exp_args(about) {
                    if !contains(&arg) {
                        diags.push(format!("Exp-argument {} not in A", arg));
                    }
                }
            }
        }
        SupportKind::LogSupport => {
            for c in &s.elements {
                let image = match c.node() {
                    TermNode::Log(u, _) => u.clone(),
                    _ => {
                        diags.push(format!("element {} is not a Log node", c));
                        continue;
                    }
                };
                match image.l_level() {
                    Some(l) if l <= s.level_witness => {}
                    _ => diags.push(format!("exp-image {} exceeds level witness", image)),
                }
                for l in max_log_subterms(&image) {
                    if !contains(&l) {
                        diags.push(format!("Log-subterm {} not in C", l));
                    }
                }
            }
            for l in max_log_subterms(&s.subject) {
                if !contains(&l) {
                    diags.push(format!("Log-subterm {} not in C", l));
                }
            }
        }
    }
    // certificate facts must reproduce under recomputation and cover
    // the subject
    if !s
        .certificate
        .iter()
        .any(|f| f.role == FactRole::Subject && f.about == s.subject)
    {
        diags.push("certificate does not cover the subject".into());
    }
    for f in &s.certificate {
        let recomputed = match (s.kind, f.role) {
            (SupportKind::ExpSupport, _) => max_exp_args(&f.about),
            (SupportKind::LogSupport, FactRole::Subject) => max_log_subterms(&f.about),
            (SupportKind::LogSupport, FactRole::Element) => match f.about.node() {
                TermNode::Log(u, _) => max_log_subterms(u),
                _ => {
                    diags.push(format!("log-side element fact about non-Log {}", f.about));
                    continue;
                }
            },
        };
        if recomputed != f.harvested {
            diags.push(format!("stale certificate fact about {}", f.about));
        }
    }
    (diags.is_empty(), diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{euler_e, i_pi, parse, pi, Term};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Oracle: the cascade union equals the set of arguments of *all*
    /// Exp-subterms anywhere in the DAG.
    fn all_exp_args(t: &Term) -> Vec<Term> {
        let mut out: Vec<Term> = t
            .subterms()
            .iter()
            .filter_map(|s| match s.node() {
                crate::term::TermNode::Exp(u) => Some(u.clone()),
                _ => None,
            })
            .collect();
        out.sort_by(term_order);
        out.dedup();
        out
    }

    fn all_log_subterms(t: &Term) -> Vec<Term> {
        let mut out: Vec<Term> = t
            .subterms()
            .iter()
            .filter(|s| matches!(s.node(), crate::term::TermNode::Log(..)))
            .cloned()
            .collect();
        out.sort_by(term_order);
        out.dedup();
        out
    }

    #[test]
    fn cascade_on_triple_exp() {
        let t = euler_e().exp().exp(); // e^(e^e)
        let s = exp_support(&t).unwrap();
        let want = vec![Term::one(), euler_e(), euler_e().exp()];
        assert_eq!(s.elements, {
            let mut w = want;
            w.sort_by(term_order);
            w
        });
        assert_eq!(s.level_witness, 2);
        assert!(verify_closure(&s).0);
    }

    #[test]
    fn single_step_base_case() {
        let s = exp_support(&euler_e()).unwrap();
        assert_eq!(s.elements, vec![Term::one()]);
        assert_eq!(s.level_witness, 0);
        assert!(verify_closure(&s).0);
    }

    #[test]
    fn two_parallel_exps() {
        let t = parse("exp(1) + exp(alg(sqrt2))").unwrap();
        let s = exp_support(&t).unwrap();
        assert_eq!(s.elements, vec![Term::one(), parse("alg(sqrt2)").unwrap()]);
        assert!(verify_closure(&s).0);
    }

    #[test]
    fn log_support_of_i_pi() {
        let s = log_support(&i_pi()).unwrap();
        assert_eq!(s.elements, vec![i_pi()]);
        assert_eq!(s.level_witness, 0);
        assert!(verify_closure(&s).0);
    }

    #[test]
    fn log_support_of_log_pi() {
        let t = pi().log(0).unwrap();
        let s = log_support(&t).unwrap();
        assert_eq!(s.elements, vec![i_pi(), t.clone()]);
        assert_eq!(s.level_witness, 1);
        assert!(verify_closure(&s).0);
        // the exp-images land one level down
        for f in &s.certificate {
            if let Some(l) = f.exp_image_level {
                assert!(l <= 1);
            }
        }
    }

    #[test]
    fn level_zero_and_mixed_rejected() {
        assert!(matches!(log_support(&Term::integer(5)), Err(SupportError::LevelZero)));
        assert!(matches!(exp_support(&Term::integer(5)), Err(SupportError::LevelZero)));
        assert!(matches!(exp_support(&i_pi()), Err(SupportError::UndefinedELevel)));
        assert!(matches!(log_support(&euler_e()), Err(SupportError::UndefinedLLevel)));
    }

    #[test]
    fn tampering_is_detected() {
        let t = euler_e().exp().exp();
        let mut s = exp_support(&t).unwrap();
        s.elements.retain(|e| *e != euler_e());
        let (ok, diags) = verify_closure(&s);
        assert!(!ok);
        assert!(diags.iter().any(|d| d.contains("not in A")));
    }

    #[test]
    fn random_exp_terms_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let t = crate::testgen::random_exp_term(&mut rng, 5);
            if t.e_level().unwrap_or(0) == 0 {
                continue;
            }
            let s = exp_support(&t).unwrap();
            let (ok, diags) = verify_closure(&s);
            assert!(ok, "closure failed for {}: {:?}", t, diags);
            assert_eq!(s.elements, all_exp_args(&t), "oracle mismatch for {}", t);
        }
    }

    #[test]
    fn random_log_terms_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..60 {
            let t = crate::testgen::random_log_term(&mut rng, 5);
            if t.l_level().unwrap_or(0) == 0 {
                continue;
            }
            let s = log_support(&t).unwrap();
            let (ok, diags) = verify_closure(&s);
            assert!(ok, "closure failed for {}: {:?}", t, diags);
            assert_eq!(s.elements, all_log_subterms(&t), "oracle mismatch for {}", t);
        }
    }

    #[test]
    fn subterm_support_is_monotone() {
        let t = parse("exp(exp(1) + exp(alg(sqrt2))) * exp(2)").unwrap();
        let whole = exp_support(&t).unwrap();
        let sub = exp_support(&parse("exp(exp(1) + exp(alg(sqrt2)))").unwrap()).unwrap();
        for e in &sub.elements {
            assert!(whole.elements.contains(e));
        }
    }
}
