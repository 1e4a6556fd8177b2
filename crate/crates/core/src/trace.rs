//! Proof-trace serialization and the independent checker.
//!
//! A trace is line-delimited JSON: a header record followed by one record
//! per inference step, in id order.  The checker does not trust the
//! producer: it re-parses every term, replays every rule application through
//! the same `verify_rule` used at derivation time (including re-running the
//! closure verifier on embedded support sets), re-computes the provenance
//! algebra, and re-walks the assumption scopes.  Any deleted, reordered or
//! edited line breaks id contiguity, a premise reference, a rule check, or
//! the final-result match.
//!
//! Identical runs produce byte-identical traces apart from the `timestamp`
//! header field.

use crate::engine::{
    rule_meta, verify_rule, Fact, KnowledgeBase, OverField, Provenance, RelKind, RelationVector,
    Statement,
};
use crate::support::{ClosureFact, FactRole, SupportKind, SupportSet};
use crate::term::{parse, Term};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::str::FromStr;

pub const TRACE_KIND: &str = "proof-trace";
pub const TRACE_VERSION: u32 = 1;
pub const AXIOMS: [&str; 2] = ["schanuel-conjecture", "lang-4.12"];

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TraceConfig {
    pub prec: usize,
    pub height: u64,
    pub degree_cap: u32,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig { prec: 256, height: 10_000, degree_cap: 64 }
    }
}

#[derive(thiserror::Error, Debug)]
pub enum TraceError {
    #[error("trace is empty")]
    Empty,
    #[error("line {0}: {1}")]
    Parse(usize, String),
    #[error("header: {0}")]
    Header(String),
}

// --- serialized mirror types -----------------------------------------------

#[derive(Serialize, Deserialize)]
struct Header {
    kind: String,
    version: u32,
    config: TraceConfig,
    axioms: Vec<String>,
    result: StatementRepr,
    timestamp: String,
}

#[derive(Serialize, Deserialize)]
struct StepRepr {
    id: usize,
    rule: String,
    premises: Vec<usize>,
    conclusion: StatementRepr,
    anchor: String,
    provenance: String,
    scope: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RelationRepr {
    terms: Vec<String>,
    coefficients: Vec<String>,
    kind: String,
}

#[derive(Serialize, Deserialize)]
struct ClosureFactRepr {
    role: String,
    about: String,
    harvested: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exp_image_level: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct SupportRepr {
    kind: String,
    subject: String,
    elements: Vec<String>,
    level_witness: u32,
    certificate: Vec<ClosureFactRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "stmt", rename_all = "kebab-case")]
enum StatementRepr {
    QLinearlyIndependent { terms: Vec<String> },
    QbarLinearlyIndependent { terms: Vec<String> },
    AlgebraicallyIndependent { terms: Vec<String>, over: String },
    AlgebraicOver { term: String, over: Vec<String> },
    TrdegAtLeast { terms: Vec<String>, bound: usize },
    TrdegEquals { terms: Vec<String>, value: usize },
    MemberE { term: String, level: u32 },
    MemberL { term: String, level: u32 },
    MemberQbar { term: String },
    NotMemberE { term: String },
    NotMemberL { term: String },
    NotMemberQbar { term: String },
    LinearlyDisjoint { m: Option<u32>, n: Option<u32> },
    SupportClosed { support: SupportRepr },
    TranscendenceBasis { ambient: Vec<String>, basis: Vec<String>, exp_image: bool },
    HypotheticalRelation { relation: RelationRepr },
    WitnessRelation { m: u32, n: u32, l: Vec<String>, e: Vec<String> },
    ForcedTrivial { relation: RelationRepr, forced_zero: Vec<usize>, even_only: Vec<usize> },
    FieldsLinearlyDisjoint { left: Vec<String>, right: Vec<String> },
    Contradiction {},
}

fn terms_out(v: &[Term]) -> Vec<String> {
    v.iter().map(|t| t.to_string()).collect()
}

fn terms_in(v: &[String]) -> Result<Vec<Term>, String> {
    v.iter().map(|s| parse(s).map_err(|e| e.to_string())).collect()
}

fn relation_out(r: &RelationVector) -> RelationRepr {
    RelationRepr {
        terms: terms_out(&r.terms),
        coefficients: r.coefficients.iter().map(|c| c.to_string()).collect(),
        kind: match r.kind {
            RelKind::Linear => "linear".into(),
            RelKind::Monomial => "monomial".into(),
        },
    }
}

fn relation_in(r: &RelationRepr) -> Result<RelationVector, String> {
    let kind = match r.kind.as_str() {
        "linear" => RelKind::Linear,
        "monomial" => RelKind::Monomial,
        other => return Err(format!("unknown relation kind `{}`", other)),
    };
    let coefficients: Result<Vec<BigInt>, _> =
        r.coefficients.iter().map(|c| BigInt::from_str(c)).collect();
    RelationVector::new(
        terms_in(&r.terms)?,
        coefficients.map_err(|e| e.to_string())?,
        kind,
    )
    .map_err(|e| e.to_string())
}

fn support_out(s: &SupportSet) -> SupportRepr {
    SupportRepr {
        kind: match s.kind {
            SupportKind::ExpSupport => "exp".into(),
            SupportKind::LogSupport => "log".into(),
        },
        subject: s.subject.to_string(),
        elements: terms_out(&s.elements),
        level_witness: s.level_witness,
        certificate: s
            .certificate
            .iter()
            .map(|c| ClosureFactRepr {
                role: match c.role {
                    FactRole::Subject => "subject".into(),
                    FactRole::Element => "element".into(),
                },
                about: c.about.to_string(),
                harvested: terms_out(&c.harvested),
                exp_image_level: c.exp_image_level,
            })
            .collect(),
    }
}

fn support_in(s: &SupportRepr) -> Result<SupportSet, String> {
    let kind = match s.kind.as_str() {
        "exp" => SupportKind::ExpSupport,
        "log" => SupportKind::LogSupport,
        other => return Err(format!("unknown support kind `{}`", other)),
    };
    let certificate = s
        .certificate
        .iter()
        .map(|c| {
            Ok(ClosureFact {
                role: match c.role.as_str() {
                    "subject" => FactRole::Subject,
                    "element" => FactRole::Element,
                    other => return Err(format!("unknown closure role `{}`", other)),
                },
                about: parse(&c.about).map_err(|e| e.to_string())?,
                harvested: terms_in(&c.harvested)?,
                exp_image_level: c.exp_image_level,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(SupportSet {
        kind,
        subject: parse(&s.subject).map_err(|e| e.to_string())?,
        elements: terms_in(&s.elements)?,
        level_witness: s.level_witness,
        certificate,
    })
}

fn statement_out(st: &Statement) -> StatementRepr {
    match st {
        Statement::QLinearlyIndependent(s) => {
            StatementRepr::QLinearlyIndependent { terms: terms_out(s) }
        }
        Statement::QbarLinearlyIndependent(s) => {
            StatementRepr::QbarLinearlyIndependent { terms: terms_out(s) }
        }
        Statement::AlgebraicallyIndependent(s, f) => StatementRepr::AlgebraicallyIndependent {
            terms: terms_out(s),
            over: f.label().into(),
        },
        Statement::AlgebraicOver(x, s) => StatementRepr::AlgebraicOver {
            term: x.to_string(),
            over: terms_out(s),
        },
        Statement::TrdegAtLeast(s, k) => {
            StatementRepr::TrdegAtLeast { terms: terms_out(s), bound: *k }
        }
        Statement::TrdegEquals(s, k) => {
            StatementRepr::TrdegEquals { terms: terms_out(s), value: *k }
        }
        Statement::MemberE(t, l) => StatementRepr::MemberE { term: t.to_string(), level: *l },
        Statement::MemberL(t, l) => StatementRepr::MemberL { term: t.to_string(), level: *l },
        Statement::MemberQbar(t) => StatementRepr::MemberQbar { term: t.to_string() },
        Statement::NotMemberE(t) => StatementRepr::NotMemberE { term: t.to_string() },
        Statement::NotMemberL(t) => StatementRepr::NotMemberL { term: t.to_string() },
        Statement::NotMemberQbar(t) => StatementRepr::NotMemberQbar { term: t.to_string() },
        Statement::LinearlyDisjoint(m, n) => StatementRepr::LinearlyDisjoint { m: *m, n: *n },
        Statement::SupportClosed(s) => StatementRepr::SupportClosed { support: support_out(s) },
        Statement::TranscendenceBasis { ambient, basis, exp_image } => {
            StatementRepr::TranscendenceBasis {
                ambient: terms_out(ambient),
                basis: terms_out(basis),
                exp_image: *exp_image,
            }
        }
        Statement::HypotheticalRelation(r) => {
            StatementRepr::HypotheticalRelation { relation: relation_out(r) }
        }
        Statement::WitnessRelation { m, n, l, e } => StatementRepr::WitnessRelation {
            m: *m,
            n: *n,
            l: terms_out(l),
            e: terms_out(e),
        },
        Statement::ForcedTrivial { relation, forced_zero, even_only } => {
            StatementRepr::ForcedTrivial {
                relation: relation_out(relation),
                forced_zero: forced_zero.clone(),
                even_only: even_only.clone(),
            }
        }
        Statement::FieldsLinearlyDisjoint { left, right } => StatementRepr::FieldsLinearlyDisjoint {
            left: terms_out(left),
            right: terms_out(right),
        },
        Statement::Contradiction => StatementRepr::Contradiction {},
    }
}

fn statement_in(r: &StatementRepr) -> Result<Statement, String> {
    Ok(match r {
        StatementRepr::QLinearlyIndependent { terms } => {
            Statement::QLinearlyIndependent(terms_in(terms)?)
        }
        StatementRepr::QbarLinearlyIndependent { terms } => {
            Statement::QbarLinearlyIndependent(terms_in(terms)?)
        }
        StatementRepr::AlgebraicallyIndependent { terms, over } => {
            let f = OverField::from_label(over)
                .ok_or_else(|| format!("unknown field label `{}`", over))?;
            Statement::AlgebraicallyIndependent(terms_in(terms)?, f)
        }
        StatementRepr::AlgebraicOver { term, over } => Statement::AlgebraicOver(
            parse(term).map_err(|e| e.to_string())?,
            terms_in(over)?,
        ),
        StatementRepr::TrdegAtLeast { terms, bound } => {
            Statement::TrdegAtLeast(terms_in(terms)?, *bound)
        }
        StatementRepr::TrdegEquals { terms, value } => {
            Statement::TrdegEquals(terms_in(terms)?, *value)
        }
        StatementRepr::MemberE { term, level } => {
            Statement::MemberE(parse(term).map_err(|e| e.to_string())?, *level)
        }
        StatementRepr::MemberL { term, level } => {
            Statement::MemberL(parse(term).map_err(|e| e.to_string())?, *level)
        }
        StatementRepr::MemberQbar { term } => {
            Statement::MemberQbar(parse(term).map_err(|e| e.to_string())?)
        }
        StatementRepr::NotMemberE { term } => {
            Statement::NotMemberE(parse(term).map_err(|e| e.to_string())?)
        }
        StatementRepr::NotMemberL { term } => {
            Statement::NotMemberL(parse(term).map_err(|e| e.to_string())?)
        }
        StatementRepr::NotMemberQbar { term } => {
            Statement::NotMemberQbar(parse(term).map_err(|e| e.to_string())?)
        }
        StatementRepr::LinearlyDisjoint { m, n } => Statement::LinearlyDisjoint(*m, *n),
        StatementRepr::SupportClosed { support } => Statement::SupportClosed(support_in(support)?),
        StatementRepr::TranscendenceBasis { ambient, basis, exp_image } => {
            Statement::TranscendenceBasis {
                ambient: terms_in(ambient)?,
                basis: terms_in(basis)?,
                exp_image: *exp_image,
            }
        }
        StatementRepr::HypotheticalRelation { relation } => {
            Statement::HypotheticalRelation(relation_in(relation)?)
        }
        StatementRepr::WitnessRelation { m, n, l, e } => Statement::WitnessRelation {
            m: *m,
            n: *n,
            l: terms_in(l)?,
            e: terms_in(e)?,
        },
        StatementRepr::ForcedTrivial { relation, forced_zero, even_only } => {
            Statement::ForcedTrivial {
                relation: relation_in(relation)?,
                forced_zero: forced_zero.clone(),
                even_only: even_only.clone(),
            }
        }
        StatementRepr::FieldsLinearlyDisjoint { left, right } => {
            Statement::FieldsLinearlyDisjoint { left: terms_in(left)?, right: terms_in(right)? }
        }
        StatementRepr::Contradiction {} => Statement::Contradiction,
    })
}

/// Structural label for a step; never a citation.
fn anchor_for(rule: &str) -> String {
    match rule {
        "schanuel" => "axiom:schanuel-conjecture".into(),
        "lang-converse" => "axiom:lang-4.12".into(),
        "assume" | "assume-witness" => "reductio:open".into(),
        "discharge-reductio" | "discharge-disjointness" => "reductio:close".into(),
        other => format!("rule:{}", other),
    }
}

// --- writing ---------------------------------------------------------------

fn timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("{}", secs)
}

/// Serializes the whole fact store with `result` as the advertised
/// conclusion; the caller is responsible for `result` being the last fact of
/// interest (the checker only requires it to match the final step).
pub fn render_trace(kb: &KnowledgeBase, result: usize, cfg: &TraceConfig) -> Result<String, TraceError> {
    let rf = kb
        .fact(result)
        .ok_or_else(|| TraceError::Header(format!("no fact with id {}", result)))?;
    let header = Header {
        kind: TRACE_KIND.into(),
        version: TRACE_VERSION,
        config: *cfg,
        axioms: AXIOMS.iter().map(|s| s.to_string()).collect(),
        result: statement_out(&rf.statement),
        timestamp: timestamp(),
    };
    let mut out = String::new();
    writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes"))
        .expect("string write");
    for f in kb.facts() {
        let step = StepRepr {
            id: f.id,
            rule: f.rule.clone(),
            premises: f.premises.clone(),
            conclusion: statement_out(&f.statement),
            anchor: anchor_for(&f.rule),
            provenance: f.provenance.label().into(),
            scope: f.scope.clone(),
        };
        writeln!(out, "{}", serde_json::to_string(&step).expect("step serializes"))
            .expect("string write");
    }
    Ok(out)
}

// --- checking --------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Verdict {
    pub valid: bool,
    pub steps: usize,
    /// first failing step id (or the would-be id for structural breaks) and
    /// the reason
    pub failure: Option<(usize, String)>,
    pub result: Option<Statement>,
    pub provenance: Option<Provenance>,
}

impl Verdict {
    fn fail(step: usize, msg: impl Into<String>, steps: usize) -> Verdict {
        Verdict { valid: false, steps, failure: Some((step, msg.into())), result: None, provenance: None }
    }
}

/// Replays a serialized trace from scratch.  Header parse failures are hard
/// errors; everything after that is reported as an invalid verdict with the
/// first failing step.
pub fn check_trace(input: &str) -> Result<Verdict, TraceError> {
    let mut lines = input.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header_line) = lines.next().ok_or(TraceError::Empty)?;
    let header: Header = serde_json::from_str(header_line)
        .map_err(|e| TraceError::Header(e.to_string()))?;
    if header.kind != TRACE_KIND {
        return Err(TraceError::Header(format!("unexpected kind `{}`", header.kind)));
    }
    if header.version != TRACE_VERSION {
        return Err(TraceError::Header(format!("unsupported version {}", header.version)));
    }
    for ax in AXIOMS {
        if !header.axioms.iter().any(|a| a == ax) {
            return Err(TraceError::Header(format!("axiom `{}` missing from the header", ax)));
        }
    }
    let want_result = statement_in(&header.result)
        .map_err(|e| TraceError::Header(format!("bad result statement: {}", e)))?;

    let mut facts: Vec<Fact> = Vec::new();
    let mut cur_scope: Vec<usize> = Vec::new();
    for (lineno, line) in lines {
        let step: StepRepr = match serde_json::from_str(line) {
            Ok(s) => s,
            Err(e) => return Err(TraceError::Parse(lineno + 1, e.to_string())),
        };
        let id = facts.len();
        if step.id != id {
            return Ok(Verdict::fail(id, format!("step id {} breaks contiguity", step.id), id));
        }
        let conclusion = match statement_in(&step.conclusion) {
            Ok(c) => c,
            Err(e) => return Ok(Verdict::fail(id, format!("bad conclusion: {}", e), id)),
        };
        let provenance = match Provenance::from_label(&step.provenance) {
            Some(p) => p,
            None => {
                return Ok(Verdict::fail(id, format!("unknown provenance `{}`", step.provenance), id))
            }
        };
        let meta = match rule_meta(&step.rule) {
            Some(m) => m,
            None => return Ok(Verdict::fail(id, format!("unknown rule `{}`", step.rule), id)),
        };
        if step.premises.iter().any(|&p| p >= id) {
            return Ok(Verdict::fail(id, "premise id does not precede the step", id));
        }
        let premise_facts: Vec<&Fact> = step.premises.iter().map(|&p| &facts[p]).collect();

        // scope discipline mirrors the knowledge base exactly
        let is_assume = step.rule.starts_with("assume");
        let is_discharge = step.rule.starts_with("discharge");
        if is_assume {
            let mut expect = cur_scope.clone();
            expect.push(id);
            if step.scope != expect {
                return Ok(Verdict::fail(id, "assumption must extend the current scope with itself", id));
            }
        } else if is_discharge {
            let open = match cur_scope.last() {
                Some(&a) => a,
                None => return Ok(Verdict::fail(id, "discharge with no open assumption", id)),
            };
            if step.premises.first() != Some(&open) {
                return Ok(Verdict::fail(id, "discharge must cite the innermost assumption", id));
            }
            if step.scope != cur_scope[..cur_scope.len() - 1] {
                return Ok(Verdict::fail(id, "discharge must close exactly one scope", id));
            }
        } else if step.scope != cur_scope {
            return Ok(Verdict::fail(id, "step scope differs from the open assumptions", id));
        }
        if !is_discharge {
            for pf in &premise_facts {
                if !(pf.scope.len() <= cur_scope.len()
                    && pf.scope.iter().zip(&cur_scope).all(|(x, y)| x == y))
                {
                    return Ok(Verdict::fail(id, format!("premise {} is out of scope", pf.id), id));
                }
            }
        }

        if let Err(msg) = verify_rule(&step.rule, &premise_facts, &conclusion) {
            return Ok(Verdict::fail(id, msg, id));
        }

        let mut expect_prov = if is_assume || is_discharge { Provenance::Exact } else { meta.floor };
        for pf in &premise_facts {
            expect_prov = expect_prov.max(pf.provenance);
        }
        if provenance != expect_prov {
            return Ok(Verdict::fail(
                id,
                format!(
                    "provenance `{}` does not match the recomputed `{}`",
                    provenance.label(),
                    expect_prov.label()
                ),
                id,
            ));
        }

        cur_scope = step.scope.clone();
        facts.push(Fact {
            id,
            statement: conclusion,
            provenance,
            rule: step.rule,
            premises: step.premises,
            scope: step.scope,
        });
    }
    let steps = facts.len();
    let last = match facts.last() {
        Some(f) => f,
        None => return Ok(Verdict::fail(0, "trace has no steps", 0)),
    };
    if !cur_scope.is_empty() {
        return Ok(Verdict::fail(last.id, "trace ends with an open assumption", steps));
    }
    if last.statement.key() != want_result.key() {
        return Ok(Verdict::fail(
            last.id,
            "final conclusion does not match the advertised result",
            steps,
        ));
    }
    Ok(Verdict {
        valid: true,
        steps,
        failure: None,
        result: Some(last.statement.clone()),
        provenance: Some(last.provenance),
    })
}
