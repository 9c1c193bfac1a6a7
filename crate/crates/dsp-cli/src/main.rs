//! Command-line surface. Exit codes: 0 solvable (or success), 1 unsolvable
//! (or certificate invalid), 2 unknown, 3 input error.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use dsp_cli::doc::{render, Document, Value};
use dsp_cli::instance::{parse_vertex_name, vertex_name};
use dsp_cli::verdict::{render_verdict, validate_certificate, VerdictDocument};
use dsp_cli::CliError;
use dsp_core::quiver::QuiverClass;
use dsp_core::reflect::{admissible, classify_case, reflect_pair, Pair, ReducedCase};
use dsp_core::spectral::{q_from_xi, ProblemInstance};
use dsp_core::{decide_dsp, search, Guards, OracleProblem, SearchOpts, SearchResult, Status};

#[derive(Parser)]
#[command(
    name = "dsp",
    about = "Exact decision engine for the Deligne-Simpson problem",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Cap on scanned coordinate-box volumes (env DSP_MAX_BOX)
    #[arg(long, global = true)]
    max_box: Option<u64>,
    /// Cap on decomposition-enumeration nodes (env DSP_MAX_DECOMPS)
    #[arg(long, global = true)]
    max_decomps: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide solvability; prints a verdict document with a certificate
    Decide {
        file: PathBuf,
        /// SVD threshold for floating-point rank decisions
        #[arg(long)]
        rank_tol: Option<f64>,
    },
    /// List the positive roots below alpha
    Roots { file: PathBuf },
    /// Apply one admissible reflection to the pair [q_C, alpha]
    Reflect {
        file: PathBuf,
        /// vertex to reflect at: * (or star), or arm.slot like 1.2
        #[arg(long)]
        vertex: String,
    },
    /// Report the quiver class and the reduced case of [q_C, alpha]
    Classify { file: PathBuf },
    /// Numerically search for an irreducible solution tuple
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = 50)]
        restarts: u64,
        #[arg(long, default_value_t = 300)]
        iters: u64,
        /// residual threshold (squared Frobenius norm)
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 202508)]
        seed: u64,
        /// Burnside word length; defaults to n^2
        #[arg(long)]
        maxlen: Option<usize>,
        #[arg(long)]
        rank_tol: Option<f64>,
    },
    /// Re-check the certificate inside a verdict document
    ValidateCert { file: PathBuf },
}

fn env_u64(name: &str) -> Option<u64> {
    std::env::var(name).ok()?.parse().ok()
}

fn guards(cli: &Cli) -> Guards {
    let defaults = Guards::default();
    Guards {
        max_box: cli
            .max_box
            .or_else(|| env_u64("DSP_MAX_BOX"))
            .unwrap_or(defaults.max_box),
        max_decomps: cli
            .max_decomps
            .or_else(|| env_u64("DSP_MAX_DECOMPS"))
            .unwrap_or(defaults.max_decomps),
    }
}

fn read_instance(path: &PathBuf, rank_tol: Option<f64>) -> Result<ProblemInstance, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut doc = dsp_cli::doc::parse(&text)?;
    if let Some(tol) = rank_tol {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(CliError::Semantic("--rank-tol must lie in (0, 1)".into()));
        }
        doc.entries.retain(|(k, _, _)| k != "rank_tol");
        doc.push("rank_tol", Value::Atom(tol.to_string()));
    }
    dsp_cli::instance_from_document(&doc)
}

fn int_list(coords: &[i64]) -> Value {
    Value::List(coords.iter().map(|&c| Value::Int(c)).collect())
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            3
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let guards = guards(cli);
    match &cli.cmd {
        Cmd::Decide { file, rank_tol } => {
            let inst = read_instance(file, *rank_tol)?;
            let start = Instant::now();
            let verdict = decide_dsp(&inst, guards);
            let ms = start.elapsed().as_millis();
            print!("{}", render_verdict(&inst, &verdict, ms));
            Ok(match verdict.status {
                Status::Solvable => 0,
                Status::Unsolvable => 1,
                Status::Unknown => 2,
            })
        }
        Cmd::Roots { file } => {
            let inst = read_instance(file, None)?;
            let roots = inst
                .quiver
                .positive_roots_below(&inst.alpha, guards.max_box)
                .map_err(|e| CliError::Semantic(e.to_string()))?;
            let mut out = Document::default();
            out.push("format", Value::Int(1));
            out.push("kind", Value::Atom("roots".into()));
            out.push(
                "weights",
                Value::List(
                    inst.quiver
                        .weights()
                        .weights()
                        .iter()
                        .map(|&w| Value::Int(w as i64))
                        .collect(),
                ),
            );
            out.push("alpha", int_list(&inst.alpha.0));
            let kind = inst
                .quiver
                .positive_root_kind(&inst.alpha)
                .map_err(|e| CliError::Semantic(e.to_string()))?;
            out.push(
                "alpha_kind",
                Value::Atom(format!("{kind:?}").to_lowercase()),
            );
            out.push("count", Value::Int(roots.len() as i64));
            out.push(
                "roots",
                Value::List(roots.iter().map(|r| int_list(&r.0)).collect()),
            );
            print!("{}", render(&out));
            Ok(0)
        }
        Cmd::Reflect { file, vertex } => {
            let inst = read_instance(file, None)?;
            let v = parse_vertex_name(vertex, &inst.quiver)?;
            let q = q_from_xi(&inst.quiver, &inst.xi)
                .map_err(|e| CliError::Semantic(e.to_string()))?;
            let pair = Pair::new(q, inst.alpha.clone());
            if !admissible(v, &pair) {
                return Err(CliError::Semantic(format!(
                    "reflection at {vertex} is not admissible: q_v = 1"
                )));
            }
            let reflected = reflect_pair(&inst.quiver, v, &pair);
            let mut out = Document::default();
            out.push("format", Value::Int(1));
            out.push("kind", Value::Atom("pair".into()));
            out.push("vertex", Value::Atom(vertex.clone()));
            out.push("admissible", Value::Atom("true".into()));
            out.push("alpha", int_list(&reflected.alpha.0));
            out.push(
                "q",
                Value::List(
                    reflected
                        .q
                        .values()
                        .iter()
                        .map(|x| Value::Atom(x.to_string()))
                        .collect(),
                ),
            );
            print!("{}", render(&out));
            Ok(0)
        }
        Cmd::Classify { file } => {
            let inst = read_instance(file, None)?;
            let mut out = Document::default();
            out.push("format", Value::Int(1));
            out.push("kind", Value::Atom("classification".into()));
            match inst.quiver.classify() {
                QuiverClass::Dynkin => out.push("quiver_class", Value::Atom("dynkin".into())),
                QuiverClass::Wild => out.push("quiver_class", Value::Atom("wild".into())),
                QuiverClass::ExtendedDynkin {
                    delta,
                    extending_vertices,
                } => {
                    out.push("quiver_class", Value::Atom("extended_dynkin".into()));
                    out.push("delta", int_list(&delta.0));
                    out.push(
                        "extending_vertices",
                        Value::List(
                            extending_vertices
                                .iter()
                                .map(|v| {
                                    let idx = inst.quiver.index_of(*v).expect("listed vertex");
                                    Value::Atom(vertex_name(&inst.quiver, idx))
                                })
                                .collect(),
                        ),
                    );
                }
            }
            let q = q_from_xi(&inst.quiver, &inst.xi)
                .map_err(|e| CliError::Semantic(e.to_string()))?;
            let pair = Pair::new(q, inst.alpha.clone());
            match classify_case(&inst.quiver, &pair) {
                ReducedCase::CaseI { m, h, delta } => {
                    out.push("reduced_case", Value::Atom("case_i".into()));
                    out.push("m", Value::Int(m as i64));
                    out.push("h", Value::Int(h));
                    out.push("case_delta", int_list(&delta.0));
                }
                ReducedCase::CaseII { beta, gamma } => {
                    out.push("reduced_case", Value::Atom("case_ii".into()));
                    out.push("beta", int_list(&beta.0));
                    out.push("gamma", int_list(&gamma.0));
                }
                ReducedCase::CaseIII { h, delta, j, k } => {
                    out.push("reduced_case", Value::Atom("case_iii".into()));
                    out.push("h", Value::Int(h));
                    out.push("case_delta", int_list(&delta.0));
                    let jn = inst.quiver.index_of(j).expect("support vertex");
                    let kn = inst.quiver.index_of(k).expect("support vertex");
                    out.push("j", Value::Atom(vertex_name(&inst.quiver, jn)));
                    out.push("k", Value::Atom(vertex_name(&inst.quiver, kn)));
                }
                ReducedCase::None => {
                    out.push("reduced_case", Value::Atom("none".into()));
                }
            }
            print!("{}", render(&out));
            Ok(0)
        }
        Cmd::Oracle {
            file,
            restarts,
            iters,
            tol,
            seed,
            maxlen,
            rank_tol,
        } => {
            let inst = read_instance(file, *rank_tol)?;
            let prob = match OracleProblem::from_instance(&inst) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("oracle unavailable: {e}");
                    return Ok(2);
                }
            };
            let opts = SearchOpts {
                restarts: *restarts,
                iters: *iters,
                tol: *tol,
                seed: *seed,
                maxlen: *maxlen,
            };
            let mut out = Document::default();
            out.push("format", Value::Int(1));
            out.push("kind", Value::Atom("oracle-report".into()));
            out.push("n", Value::Int(prob.n as i64));
            out.push("seed", Value::Int(*seed as i64));
            match search(&prob, &opts) {
                SearchResult::Found { report, .. } => {
                    out.push("found", Value::Atom("true".into()));
                    out.push("residual", Value::Atom(format!("{:e}", report.residual)));
                    out.push("irreducible", Value::Atom(report.irreducible.to_string()));
                    out.push("word_rank", Value::Int(report.word_rank as i64));
                    out.push(
                        "sigma_ratio",
                        Value::Atom(format!("{:e}", report.sigma_ratio)),
                    );
                    out.push("restarts_used", Value::Int(report.restarts_used as i64));
                }
                SearchResult::NotFound {
                    best_residual,
                    restarts_used,
                } => {
                    out.push("found", Value::Atom("false".into()));
                    out.push("best_residual", Value::Atom(format!("{best_residual:e}")));
                    out.push("restarts_used", Value::Int(restarts_used as i64));
                    out.push(
                        "note",
                        Value::Str(
                            "not finding a solution proves nothing; the oracle is one-sided".into(),
                        ),
                    );
                }
            }
            print!("{}", render(&out));
            Ok(0)
        }
        Cmd::ValidateCert { file } => {
            let text = std::fs::read_to_string(file)?;
            let vd = VerdictDocument::parse(&text)?;
            let outcome = validate_certificate(&vd);
            let mut out = Document::default();
            out.push("format", Value::Int(1));
            out.push("kind", Value::Atom("validation".into()));
            out.push("valid", Value::Atom(outcome.valid.to_string()));
            out.push("certificate", Value::Atom(vd.certificate.clone()));
            out.push("detail", Value::Str(outcome.detail.clone()));
            print!("{}", render(&out));
            Ok(if outcome.valid { 0 } else { 1 })
        }
    }
}
