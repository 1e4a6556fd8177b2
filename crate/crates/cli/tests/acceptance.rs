//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line.  Criteria 1-4 and 9 drive the compiled binary; the
//! property suites use the library directly.

use explog_core::ball::pow2;
use explog_core::engine::{
    schanuel_apply, trdeg_bound, KnowledgeBase, OverField, Provenance, Statement,
};
use explog_core::numeric::{certify_nonzero, eval};
use explog_core::relation::{combination_term, confirm_relation, find_integer_relation};
use explog_core::support::{exp_support, log_support, verify_closure};
use explog_core::term::{parse, Term};
use explog_core::testgen::{random_exp_term, random_log_term, random_zero_identity};
use explog_core::trace::check_trace;
use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::process::Command;
use std::time::{Duration, Instant};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_explog"))
}

fn tmp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("explog-acceptance-{}-{}", std::process::id(), name))
}

fn report(criterion: &str, r: Result<(), String>) {
    match r {
        Ok(()) => println!("{}: pass", criterion),
        Err(e) => {
            println!("{}: fail ({})", criterion, e);
            panic!("{}: {}", criterion, e);
        }
    }
}

fn trace_lines(path: &std::path::Path) -> Result<Vec<serde_json::Value>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
        .collect()
}

fn prove(target: &str, extra: &[&str], out: &std::path::Path) -> Result<Duration, String> {
    let start = Instant::now();
    let st = bin()
        .arg("prove")
        .arg(target)
        .args(extra)
        .arg("--out")
        .arg(out)
        .status()
        .map_err(|e| e.to_string())?;
    let took = start.elapsed();
    if !st.success() {
        return Err(format!("prove {} exited with {:?}", target, st.code()));
    }
    Ok(took)
}

fn checked_trace(path: &std::path::Path) -> Result<(), String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let v = check_trace(&text).map_err(|e| e.to_string())?;
    if v.valid {
        Ok(())
    } else {
        Err(format!("trace invalid: {:?}", v.failure))
    }
}

#[test]
fn criterion_01_cor4_replay() {
    report("criterion 01 (cor4 depth-5 replay)", (|| {
        let out = tmp("c1.jsonl");
        let took = prove("cor4", &["--depth", "5"], &out)?;
        if took > Duration::from_secs(5) {
            return Err(format!("took {:?}", took));
        }
        checked_trace(&out)?;
        let lines = trace_lines(&out)?;
        let last = lines.last().ok_or("empty trace")?;
        if last["conclusion"]["stmt"] != "algebraically-independent" {
            return Err("final step is not algebraic independence".into());
        }
        let terms = last["conclusion"]["terms"].as_array().ok_or("no terms")?;
        if terms.len() != 5 {
            return Err(format!("expected 5 tower elements, got {}", terms.len()));
        }
        if last["provenance"] != "conditional-on-sc" {
            return Err(format!("provenance {}", last["provenance"]));
        }
        Ok(())
    })());
}

#[test]
fn criterion_02_cor3_replay() {
    report("criterion 02 (cor3 depth-4 replay)", (|| {
        let out = tmp("c2.jsonl");
        let took = prove("cor3", &["--depth", "4"], &out)?;
        if took > Duration::from_secs(5) {
            return Err(format!("took {:?}", took));
        }
        checked_trace(&out)?;
        let lines = trace_lines(&out)?;
        let last = lines.last().ok_or("empty trace")?;
        if last["conclusion"]["stmt"] != "algebraically-independent"
            || last["provenance"] != "conditional-on-sc"
        {
            return Err("wrong final step".into());
        }
        let terms = last["conclusion"]["terms"].as_array().ok_or("no terms")?;
        if terms.len() != 5 {
            return Err(format!("expected 5 tower elements, got {}", terms.len()));
        }
        if !terms.iter().any(|t| t.as_str() == Some("log(-1; 0)")) {
            return Err("i*pi missing from the conclusion".into());
        }
        if !lines.iter().any(|l| l["rule"] == "reduce-linear-to-monomial") {
            return Err("no reduce-linear-to-monomial step".into());
        }
        Ok(())
    })());
}

#[test]
fn criterion_03_cor2_replay() {
    report("criterion 03 (cor2 replay)", (|| {
        let out = tmp("c3.jsonl");
        prove("cor2", &[], &out)?;
        checked_trace(&out)?;
        let lines = trace_lines(&out)?;
        let has = |stmt: &str, term: &str| {
            lines.iter().any(|l| {
                l["conclusion"]["stmt"] == stmt
                    && l["conclusion"]["term"].as_str() == Some(term)
                    && l["provenance"] == "conditional-on-sc"
            })
        };
        if !has("not-member-e", "(-1 * alg(i) * log(-1; 0))") {
            return Err("NotMemberE(pi) missing".into());
        }
        if !has("not-member-l", "exp(1)") {
            return Err("NotMemberL(e) missing".into());
        }
        let witness = lines.iter().any(|l| {
            l["conclusion"]["stmt"] == "member-l"
                && l["conclusion"]["term"].as_str() == Some("log(-1; 0)")
                && l["conclusion"]["level"] == 1
        });
        if !witness {
            return Err("MemberL(i*pi, 1) witness missing".into());
        }
        Ok(())
    })());
}

#[test]
fn criterion_04_theorem_replay() {
    report("criterion 04 (theorem replay and step deletion)", (|| {
        let out = tmp("c4.jsonl");
        prove("theorem", &["--m", "1", "--n", "1"], &out)?;
        checked_trace(&out)?;
        let lines = trace_lines(&out)?;
        for rule in [
            "support-closure",
            "basis-select",
            "assume-witness",
            "assume",
            "disjoint-split",
            "reduce-linear-to-monomial",
            "monomial-triviality",
            "discharge-reductio",
            "schanuel",
            "trdeg-transfer",
            "trdeg-upper",
            "lang-converse",
            "disjointness-contradiction",
            "discharge-disjointness",
        ] {
            if !lines.iter().any(|l| l["rule"] == rule) {
                return Err(format!("pipeline stage `{}` missing", rule));
            }
        }
        if lines.iter().filter(|l| l["rule"] == "trdeg-transfer").count() < 3 {
            return Err("trdeg chain too short".into());
        }
        // every single step is load-bearing
        let text = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
        let raw: Vec<&str> = text.lines().collect();
        for del in 1..raw.len() {
            let mutated: Vec<&str> = raw
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != del)
                .map(|(_, l)| *l)
                .collect();
            let v = check_trace(&mutated.join("\n")).map_err(|e| e.to_string())?;
            if v.valid {
                return Err(format!("deleting step line {} leaves the trace valid", del));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_05_support_closures() {
    report("criterion 05 (support-set property suite)", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(501);
        let mut done = 0;
        while done < 200 {
            let d = rng.gen_range(1..=5);
            let t = random_exp_term(&mut rng, d);
            if t.e_level().map_or(true, |l| l == 0) {
                continue;
            }
            let s = exp_support(&t).map_err(|e| format!("exp_support({}): {}", t, e))?;
            let (ok, diags) = verify_closure(&s);
            if !ok {
                return Err(format!("exp closure fails for {}: {:?}", t, diags));
            }
            done += 1;
        }
        let mut done = 0;
        while done < 200 {
            let d = rng.gen_range(1..=5);
            let t = random_log_term(&mut rng, d);
            if t.l_level().map_or(true, |l| l == 0) {
                continue;
            }
            let s = log_support(&t).map_err(|e| format!("log_support({}): {}", t, e))?;
            let (ok, diags) = verify_closure(&s);
            if !ok {
                return Err(format!("log closure fails for {}: {:?}", t, diags));
            }
            done += 1;
        }
        let s = exp_support(&parse("exp(exp(exp(1)))").unwrap()).map_err(|e| e.to_string())?;
        let want = vec![
            parse("1").unwrap(),
            parse("exp(1)").unwrap(),
            parse("exp(exp(1))").unwrap(),
        ];
        if s.elements != want {
            return Err(format!("support of e^(e^e) is {:?}", s.elements));
        }
        Ok(())
    })());
}

#[test]
fn criterion_06_monomial_consistency() {
    report("criterion 06 (monomial-reduction ball consistency)", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(601);
        let mut done = 0;
        'outer: while done < 100 {
            let k = rng.gen_range(2..=4usize);
            let terms: Vec<Term> = (0..k).map(|_| random_log_term(&mut rng, 2)).collect();
            let q: Vec<i64> = (0..k)
                .map(|_| {
                    let v = rng.gen_range(1..=50i64);
                    if rng.gen_bool(0.5) {
                        -v
                    } else {
                        v
                    }
                })
                .collect();
            let qb: Vec<BigInt> = q.iter().map(|&v| BigInt::from(v)).collect();
            let lhs = combination_term(&terms, &qb).exp();
            let mut parts = Vec::new();
            for (t, &qi) in terms.iter().zip(&q) {
                match t.exp().ipow(qi) {
                    Ok(p) => parts.push(p),
                    Err(_) => continue 'outer,
                }
            }
            let rhs = Term::product(parts);
            for prec in [128usize, 256, 512] {
                let (a, b) = match (eval(&lhs, prec), eval(&rhs, prec)) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => continue 'outer,
                };
                if !a.overlaps(&b) {
                    return Err(format!(
                        "balls disagree at {} bits for q={:?} over {:?}",
                        prec, q, terms
                    ));
                }
            }
            done += 1;
        }
        Ok(())
    })());
}

#[test]
fn criterion_07_trdeg_oracle() {
    report("criterion 07 (trdeg oracle equivalence)", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(701);
        let universe: Vec<Term> = [2u32, 3, 5, 7, 11, 13, 17, 19]
            .iter()
            .map(|p| parse(&format!("log({}; 0)", p)).unwrap())
            .collect();
        for round in 0..500 {
            let n = rng.gen_range(1..=8usize);
            let s: Vec<Term> = universe[..n].to_vec();
            let mut kb = KnowledgeBase::new();
            let mut deps: Vec<(usize, Vec<usize>)> = Vec::new();
            for _ in 0..rng.gen_range(0..=6) {
                let x = rng.gen_range(0..n);
                let k = rng.gen_range(1..=3.min(n));
                let mut w: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
                w.sort_unstable();
                w.dedup();
                let wt: Vec<Term> = w.iter().map(|&i| s[i].clone()).collect();
                kb.derive("input", &[], Statement::AlgebraicOver(s[x].clone(), wt))
                    .map_err(|e| e.to_string())?;
                deps.push((x, w));
            }
            let (_, hi) = trdeg_bound(&kb, &s);
            // brute force over subsets: saturate the declared dependencies
            let mut best = n;
            for mask in 0u32..(1 << n) {
                let mut have: HashSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                loop {
                    let before = have.len();
                    for (x, w) in &deps {
                        if w.iter().all(|i| have.contains(i)) {
                            have.insert(*x);
                        }
                    }
                    if have.len() == before {
                        break;
                    }
                }
                if have.len() == n {
                    best = best.min(mask.count_ones() as usize);
                }
            }
            if hi != best {
                return Err(format!(
                    "round {}: trdeg upper {} but brute force {} (deps {:?})",
                    round, hi, best, deps
                ));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_08_relation_detection() {
    report("criterion 08 (relation detection)", (|| {
        let logs: Vec<Term> = [2u32, 3, 6]
            .iter()
            .map(|k| parse(&format!("log({}; 0)", k)).unwrap())
            .collect();
        let start = Instant::now();
        let values: Vec<_> = logs
            .iter()
            .map(|t| eval(t, 200).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let q = find_integer_relation(&values, 100)
            .map_err(|e| e.to_string())?
            .ok_or("no relation for {log2, log3, log6}")?;
        if start.elapsed() > Duration::from_secs(1) {
            return Err(format!("took {:?}", start.elapsed()));
        }
        let target = [BigInt::from(1), BigInt::from(1), BigInt::from(-1)];
        let matches = q == target || q.iter().map(|c| -c).collect::<Vec<_>>() == target;
        if !matches {
            return Err(format!("found {:?} instead of (1, 1, -1)", q));
        }
        if confirm_relation(&logs, &q).is_none() {
            return Err("symbolic confirmation failed".into());
        }
        // planted relations over prime logarithms
        let mut rng = ChaCha8Rng::seed_from_u64(801);
        let pool: Vec<Term> = [2u32, 3, 5, 7, 11]
            .iter()
            .map(|p| parse(&format!("log({}; 0)", p)).unwrap())
            .collect();
        for round in 0..100 {
            let k = rng.gen_range(2..=5usize);
            let base: Vec<Term> = pool[..k].to_vec();
            let coeffs: Vec<BigInt> = (0..k)
                .map(|_| {
                    let v = rng.gen_range(1..=1000i64);
                    BigInt::from(if rng.gen_bool(0.5) { -v } else { v })
                })
                .collect();
            // the last term is the exact combination, so (coeffs, -1) is a
            // true relation among k + 1 <= 6 terms
            let planted = combination_term(&base, &coeffs);
            let mut terms = base.clone();
            terms.push(planted);
            let values: Vec<_> = terms
                .iter()
                .map(|t| eval(t, 512).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            let q = find_integer_relation(&values, 1000)
                .map_err(|e| e.to_string())?
                .ok_or_else(|| format!("round {}: planted relation not found", round))?;
            // whatever was found must be a genuine relation
            let resid = eval(&combination_term(&terms, &q), 512).map_err(|e| e.to_string())?;
            let small = resid
                .abs_ub()
                .cmp(&pow2(-100))
                .map_or(false, |c| c <= 0);
            if !small {
                return Err(format!("round {}: recovered {:?} is not a relation", round, q));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_09_negative_search() {
    report("criterion 09 (negative relation search)", (|| {
        let start = Instant::now();
        let out = bin()
            .args([
                "relate",
                "1",
                "log(-1;0)",
                "log(pi)",
                "log(log(pi))",
                "--height",
                "10000",
                "--prec",
                "1000",
            ])
            .output()
            .map_err(|e| e.to_string())?;
        let took = start.elapsed();
        if took > Duration::from_secs(30) {
            return Err(format!("took {:?}", took));
        }
        if out.status.code() != Some(2) {
            return Err(format!(
                "exit {:?}, stdout {:?}, stderr {:?}",
                out.status.code(),
                String::from_utf8_lossy(&out.stdout),
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        if !String::from_utf8_lossy(&out.stdout).contains("absent") {
            return Err("expected `absent`".into());
        }
        Ok(())
    })());
}

#[test]
fn criterion_10_soundness_gate() {
    report("criterion 10 (provenance soundness gate)", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(1001);
        let pool: Vec<Term> = [2u32, 3, 5, 7, 11, 13]
            .iter()
            .map(|p| parse(&format!("log({}; 0)", p)).unwrap())
            .collect();
        for _ in 0..1000 {
            let mut kb = KnowledgeBase::new();
            // seed: a couple of heuristic and exact facts
            let k = rng.gen_range(1..=3usize);
            let mut s: Vec<Term> = (0..k).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
            s.sort_by(explog_core::term::term_order);
            s.dedup();
            let heur = kb
                .derive("li-numeric-absent", &[], Statement::QLinearlyIndependent(s.clone()))
                .map_err(|e| e.to_string())?;
            let one = Term::one();
            let exact = kb
                .derive("nonzero", &[], Statement::QLinearlyIndependent(vec![one.clone()]))
                .map_err(|e| e.to_string())?;
            // random derivation attempts over the growing store
            for _ in 0..rng.gen_range(1..=8) {
                let ids: Vec<usize> = (0..kb.len()).collect();
                let pick = ids[rng.gen_range(0..ids.len())];
                match kb.fact(pick).map(|f| f.statement.clone()) {
                    Some(Statement::QLinearlyIndependent(t)) => {
                        let _ = schanuel_apply(&mut kb, &t, pick);
                    }
                    Some(Statement::TrdegAtLeast(t, n)) => {
                        // project onto a subset of matching size (usually
                        // fails the leftover check; that's fine)
                        let sub: Vec<Term> = t.iter().take(n).cloned().collect();
                        let _ = kb.derive(
                            "ai-from-trdeg",
                            &[pick],
                            Statement::AlgebraicallyIndependent(sub, OverField::Q),
                        );
                        let _ = kb.derive(
                            "trdeg-transfer",
                            &[pick],
                            Statement::TrdegAtLeast(t.clone(), n),
                        );
                    }
                    Some(Statement::AlgebraicallyIndependent(t, OverField::Q)) => {
                        let _ = kb.derive(
                            "ai-over-qbar",
                            &[pick],
                            Statement::AlgebraicallyIndependent(t.clone(), OverField::Qbar),
                        );
                        let _ = kb.derive(
                            "li-from-ai",
                            &[pick],
                            Statement::QLinearlyIndependent(t),
                        );
                    }
                    _ => {}
                }
            }
            let _ = (heur, exact);
            // global audit: provenance is exactly the max of floor and
            // premises, so nothing Exact or ConditionalOnSC sits above a
            // HeuristicNumeric ancestor
            for f in kb.facts() {
                for &p in &f.premises {
                    let pf = kb.fact(p).ok_or("dangling premise")?;
                    if pf.provenance == Provenance::HeuristicNumeric
                        && f.provenance != Provenance::HeuristicNumeric
                    {
                        return Err(format!(
                            "fact {} ({}) is {} from heuristic premise {}",
                            f.id,
                            f.rule,
                            f.provenance.label(),
                            p
                        ));
                    }
                }
            }
        }
        // the numeric kernel never certifies an exact zero
        let mut rng = ChaCha8Rng::seed_from_u64(1002);
        let mut done = 0;
        while done < 100 {
            let z = random_zero_identity(&mut rng, 2);
            if z.as_rational().map_or(false, |q| q.is_zero()) {
                // normalization already collapsed it; nothing to certify
                continue;
            }
            if let Some(cert) = certify_nonzero(&z) {
                return Err(format!("certified zero identity {} at {} bits", z, cert.prec));
            }
            done += 1;
        }
        Ok(())
    })());
}
