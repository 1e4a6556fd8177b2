//! `explog` — tower levels, support sets, independence checks, relation
//! search, proof replay and trace checking for exp-log constants.
//!
//! Exit codes: 0 success/certified, 1 counterexample/invalid, 2 unknown,
//! 3 usage error, 4 internal obligation failure.

use clap::{Parser, Subcommand};
use explog_core::engine::{
    check_q_linear_independence, prove_corollary, replay_theorem, trdeg_bound, Corollary,
    KnowledgeBase, LiConfig, LiOutcome,
};
use explog_core::relation::{falsify_linear_independence, FalsifyOutcome};
use explog_core::support::{exp_support, log_support, SupportKind};
use explog_core::term::{parse, Term};
use explog_core::trace::{check_trace, render_trace, TraceConfig};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "explog", version, about = "Symbolic engine for exp-log constants", max_term_width = 100)]
struct Cli {
    /// working precision in bits
    #[arg(long, global = true, env = "SCHANUEL_PREC", default_value_t = 256)]
    prec: usize,
    /// coefficient height cap for relation search
    #[arg(long, global = true, env = "SCHANUEL_HEIGHT", default_value_t = 10_000)]
    height: u64,
    /// degree cap for algebraic arithmetic
    #[arg(long, global = true, env = "SCHANUEL_DEGCAP", default_value_t = 64)]
    degcap: u32,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the tower levels of a term
    Level { term: String },
    /// Extract and verify a Key-Lemma support set
    Support {
        term: String,
        #[arg(long, value_parser = ["exp", "log"])]
        kind: String,
    },
    /// Decide Q-linear independence: certificate, counter-relation, or unknown
    CheckLi { terms: Vec<String> },
    /// Bound the transcendence degree over Q from the stored rule base
    Trdeg { terms: Vec<String> },
    /// Search for a small integer relation and confirm it symbolically
    Relate { terms: Vec<String> },
    /// Replay a proof and emit its trace
    Prove {
        /// theorem | cor1 | cor2 | cor3 | cor4
        target: String,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        /// write the trace here instead of stdout
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Re-check a serialized proof trace step by step
    CheckTrace { file: std::path::PathBuf },
}

fn parse_terms(raw: &[String]) -> Result<Vec<Term>, ExitCode> {
    if raw.is_empty() {
        eprintln!("error: at least one term required");
        return Err(ExitCode::from(3));
    }
    let mut out = Vec::new();
    for s in raw {
        match parse(s) {
            Ok(t) => out.push(t),
            Err(e) => {
                eprintln!("error: cannot parse `{}`: {}", s, e);
                return Err(ExitCode::from(3));
            }
        }
    }
    Ok(out)
}

fn level_str(l: Option<u32>) -> String {
    l.map_or_else(|| "none".into(), |v| v.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version are not usage errors
            use clap::error::ErrorKind::*;
            let _ = e.print();
            return match e.kind() {
                DisplayHelp | DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    let cfg = TraceConfig { prec: cli.prec, height: cli.height, degree_cap: cli.degcap };
    match run(cli.cmd, cfg) {
        Ok(code) => code,
        Err(code) => code,
    }
}

fn run(cmd: Cmd, cfg: TraceConfig) -> Result<ExitCode, ExitCode> {
    match cmd {
        Cmd::Level { term } => {
            let t = parse_terms(&[term])?.remove(0);
            println!("E-level: {}, L-level: {}", level_str(t.e_level()), level_str(t.l_level()));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Support { term, kind } => {
            let t = parse_terms(&[term])?.remove(0);
            let sup = match kind.as_str() {
                "exp" => exp_support(&t),
                _ => log_support(&t),
            };
            match sup {
                Ok(s) => {
                    let side = match s.kind {
                        SupportKind::ExpSupport => "exp",
                        SupportKind::LogSupport => "log",
                    };
                    println!("subject: {}", s.subject);
                    println!("kind: {}", side);
                    println!("level-witness: {}", s.level_witness);
                    for e in &s.elements {
                        println!("element: {}", e);
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("error: {}", e);
                    Err(ExitCode::from(4))
                }
            }
        }
        Cmd::CheckLi { terms } => {
            let ts = parse_terms(&terms)?;
            let mut kb = KnowledgeBase::new();
            let li_cfg = LiConfig { prec: cfg.prec, height: cfg.height };
            match check_q_linear_independence(&mut kb, &ts, 2, &li_cfg) {
                LiOutcome::Certificate(id) => {
                    let f = kb.fact(id).expect("certificate exists");
                    println!("independent ({})", f.provenance.label());
                    Ok(ExitCode::SUCCESS)
                }
                LiOutcome::CounterRelation(r) => {
                    let coeffs: Vec<String> =
                        r.coefficients.iter().map(|c| c.to_string()).collect();
                    println!("dependent: ({})", coeffs.join(", "));
                    Ok(ExitCode::from(1))
                }
                LiOutcome::Unknown => {
                    println!("unknown");
                    Ok(ExitCode::from(2))
                }
            }
        }
        Cmd::Trdeg { terms } => {
            let ts = parse_terms(&terms)?;
            let kb = KnowledgeBase::new();
            let (lo, hi) = trdeg_bound(&kb, &ts);
            println!("trdeg in [{}, {}]", lo, hi);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Relate { terms } => {
            let ts = parse_terms(&terms)?;
            match falsify_linear_independence(&ts, cfg.prec, cfg.height) {
                Ok(FalsifyOutcome::Confirmed { coeffs, kind }) => {
                    let cs: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                    println!("relation: ({}) [{:?}]", cs.join(", "), kind);
                    Ok(ExitCode::from(1))
                }
                Ok(FalsifyOutcome::Unconfirmed(coeffs)) => {
                    let cs: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                    println!("unconfirmed candidate: ({})", cs.join(", "));
                    Ok(ExitCode::from(2))
                }
                Ok(FalsifyOutcome::Absent) => {
                    println!("absent");
                    Ok(ExitCode::from(2))
                }
                Err(e) => {
                    eprintln!("error: {}", e);
                    Err(ExitCode::from(4))
                }
            }
        }
        Cmd::Prove { target, m, n, depth, out } => {
            let mut kb = KnowledgeBase::new();
            let result = if target == "theorem" {
                replay_theorem(&mut kb, m, n)
            } else if let Some(c) = Corollary::from_name(&target) {
                prove_corollary(&mut kb, c, depth)
            } else {
                eprintln!("error: unknown target `{}` (theorem|cor1|cor2|cor3|cor4)", target);
                return Err(ExitCode::from(3));
            };
            let id = match result {
                Ok(id) => id,
                Err(e) => {
                    eprintln!("error: {}", e);
                    return Err(ExitCode::from(4));
                }
            };
            let trace = match render_trace(&kb, id, &cfg) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {}", e);
                    return Err(ExitCode::from(4));
                }
            };
            let f = kb.fact(id).expect("result exists");
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &trace) {
                        eprintln!("error: cannot write {}: {}", path.display(), e);
                        return Err(ExitCode::from(4));
                    }
                    println!("steps: {}", kb.len());
                    println!("provenance: {}", f.provenance.label());
                    println!("trace: {}", path.display());
                }
                None => print!("{}", trace),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::CheckTrace { file } => {
            let input = match std::fs::read_to_string(&file) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: cannot read {}: {}", file.display(), e);
                    return Err(ExitCode::from(3));
                }
            };
            match check_trace(&input) {
                Ok(v) if v.valid => {
                    println!(
                        "valid ({} steps, provenance {})",
                        v.steps,
                        v.provenance.map_or("unknown", |p| p.label())
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Ok(v) => {
                    let (step, msg) = v.failure.unwrap_or((0, "unknown failure".into()));
                    println!("invalid at step {}: {}", step, msg);
                    Ok(ExitCode::from(1))
                }
                Err(e) => {
                    eprintln!("error: {}", e);
                    Err(ExitCode::from(4))
                }
            }
        }
    }
}
