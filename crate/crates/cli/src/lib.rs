//! Command-line front end for cork extraction.
//!
//! Exit status: 0 when every requested check is yes, 1 if some check is
//! no, 2 if some check is unknown, 3 on an input error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cork_core::grouppres::{trivialize_search, Presentation, SearchConfig, TriState};
use cork_core::intmat::IntMatrix;
use cork_core::kirby::{
    akbulut_cork, apply_involution, boundary_homology, build_generalized_cork, four_manifold_homology, trade_handle,
    GeneralizedCorkSpec, KirbyDiagram,
};
use cork_core::pipeline::{extract, verify_certificate, Budgets, CertificateBundle, CobordismScenario, PipelineError};

pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cork", version, about = "Cork extraction for 5-dimensional h-cobordisms")]
pub struct Cli {
    /// Print a machine-readable JSON summary.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the pipeline on a scenario and write its certificate.
    Extract {
        scenario: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArg,
    },
    /// Check a certificate against its scenario by replay.
    Verify { certificate: PathBuf, scenario: PathBuf },
    /// Search for an Andrews-Curtis trivialization of a presentation.
    Trivialize {
        presentation: PathBuf,
        #[command(flatten)]
        budget: BudgetArg,
    },
    /// Operations on framed-link diagrams.
    Diagram {
        #[command(subcommand)]
        op: DiagramOp,
    },
    /// Build cork diagrams.
    Cork {
        #[command(subcommand)]
        kind: CorkKind,
    },
}

#[derive(Debug, Args)]
pub struct BudgetArg {
    /// Search budget for every stage, in generated states.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum DiagramOp {
    /// Homology of the 4-manifold.
    Homology { diagram: PathBuf },
    /// First homology of the boundary.
    Boundary { diagram: PathBuf },
    /// Trade a dotted circle and a 0-framed unknot.
    Trade {
        diagram: PathBuf,
        /// Component index, 0-based.
        #[arg(long)]
        component: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Relabel components by an involution and test for symmetry.
    Involution {
        diagram: PathBuf,
        /// Image of each component, comma separated.
        #[arg(long, value_delimiter = ',')]
        perm: Vec<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CorkKind {
    /// The Akbulut cork diagram.
    Akbulut {
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generalized cork from an intersection matrix file.
    Generalized {
        matrix: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitReport {
    pub status: i32,
    pub summary: String,
    pub json: Value,
}

impl ExitReport {
    fn input_error(msg: impl Into<String>) -> Self {
        let msg = msg.into();
        ExitReport {
            status: EXIT_INPUT,
            json: json!({ "error": msg }),
            summary: format!("error: {msg}"),
        }
    }
}

fn status_of<Y, N>(t: &TriState<Y, N>) -> i32 {
    match t {
        TriState::Yes { .. } => 0,
        TriState::No { .. } => 1,
        TriState::Unknown { .. } => 2,
    }
}

fn read(path: &Path) -> Result<String, ExitReport> {
    fs::read_to_string(path).map_err(|e| ExitReport::input_error(format!("{}: {e}", path.display())))
}

fn read_diagram(path: &Path) -> Result<KirbyDiagram, ExitReport> {
    serde_json::from_str(&read(path)?).map_err(|e| ExitReport::input_error(format!("{}: {e}", path.display())))
}

/// Writes `contents` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, contents: &str) -> Result<(), ExitReport> {
    match out {
        Some(p) => write_atomic(p, contents).map_err(|e| ExitReport::input_error(format!("{}: {e}", p.display()))),
        None => Ok(()),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializes");
    s.push('\n');
    s
}

fn pipeline_error(e: PipelineError) -> ExitReport {
    match e {
        PipelineError::Evidence { step, detail } => ExitReport {
            status: 1,
            summary: format!("evidence mismatch at {step}: {detail}"),
            json: json!({ "error": "evidence_mismatch", "step": step, "detail": detail }),
        },
        other => ExitReport::input_error(other.to_string()),
    }
}

fn verdict_map(statuses: &[(String, String)]) -> Value {
    Value::Object(
        statuses
            .iter()
            .map(|(n, s)| (n.clone(), Value::String(s.clone())))
            .collect(),
    )
}

fn verdict_lines(statuses: &[(String, String)]) -> String {
    statuses
        .iter()
        .map(|(n, s)| format!("{n}: {s}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn run(cli: &Cli) -> ExitReport {
    match dispatch(&cli.command) {
        Ok(r) | Err(r) => r,
    }
}

fn dispatch(cmd: &Command) -> Result<ExitReport, ExitReport> {
    match cmd {
        Command::Extract { scenario, out, budget } => {
            let sc = CobordismScenario::from_json(&read(scenario)?).map_err(pipeline_error)?;
            let budgets = budget.budget.map_or(sc.budgets(), |b| Budgets::uniform(b as usize));
            let cert = extract(&sc, budgets).map_err(pipeline_error)?;
            let text = cert.to_json();
            emit(out, &text)?;
            let statuses: Vec<(String, String)> = cert
                .verdicts
                .statuses()
                .iter()
                .map(|(n, s)| (n.to_string(), s.to_string()))
                .collect();
            let mut summary = verdict_lines(&statuses);
            if out.is_none() {
                summary = text.trim_end().to_string();
            }
            Ok(ExitReport {
                status: cert.verdicts.exit_code(),
                summary,
                json: json!({ "verdicts": verdict_map(&statuses) }),
            })
        }
        Command::Verify { certificate, scenario } => {
            let sc = CobordismScenario::from_json(&read(scenario)?).map_err(pipeline_error)?;
            let cert = CertificateBundle::from_json(&read(certificate)?).map_err(pipeline_error)?;
            let report = verify_certificate(&sc, &cert).map_err(pipeline_error)?;
            let statuses: Vec<(String, String)> = report
                .statuses
                .iter()
                .map(|(n, s)| (n.clone(), s.to_string()))
                .collect();
            let mut summary = verdict_lines(&statuses);
            for c in &report.checks {
                summary.push_str(&format!("\nchecked {c}"));
            }
            Ok(ExitReport {
                status: report.exit_code(),
                summary,
                json: json!({
                    "verdicts": verdict_map(&statuses),
                    "checks": report.checks,
                }),
            })
        }
        Command::Trivialize { presentation, budget } => {
            let p: Presentation = read(presentation)?
                .parse()
                .map_err(|e| ExitReport::input_error(format!("{}: {e}", presentation.display())))?;
            let mut cfg = SearchConfig::default();
            if let Some(b) = budget.budget {
                cfg.budget = b as usize;
            }
            let outcome = trivialize_search(&p, &cfg);
            let summary = match &outcome {
                TriState::Yes { evidence } => format!("yes: trivialized in {} moves", evidence.moves.len()),
                TriState::No { witness } => format!("no: H1 = {}", witness.first_homology),
                TriState::Unknown { reason } => format!("unknown: {}", serde_json::to_string(reason).unwrap()),
            };
            Ok(ExitReport {
                status: status_of(&outcome),
                summary,
                json: serde_json::to_value(&outcome).unwrap(),
            })
        }
        Command::Diagram { op } => diagram(op),
        Command::Cork { kind } => cork(kind),
    }
}

fn diagram(op: &DiagramOp) -> Result<ExitReport, ExitReport> {
    match op {
        DiagramOp::Homology { diagram } => {
            let h = four_manifold_homology(&read_diagram(diagram)?);
            let summary = h
                .groups
                .iter()
                .enumerate()
                .map(|(d, g)| format!("H{d} = {g}"))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(ExitReport {
                status: 0,
                summary,
                json: serde_json::to_value(&h).unwrap(),
            })
        }
        DiagramOp::Boundary { diagram } => {
            let h = boundary_homology(&read_diagram(diagram)?);
            Ok(ExitReport {
                status: 0,
                summary: format!("H1 = {h}"),
                json: json!({ "H1": h }),
            })
        }
        DiagramOp::Trade {
            diagram,
            component,
            out,
        } => {
            let d = trade_handle(&read_diagram(diagram)?, *component)
                .map_err(|e| ExitReport::input_error(e.to_string()))?;
            let text = pretty(&serde_json::to_value(&d).unwrap());
            emit(out, &text)?;
            Ok(ExitReport {
                status: 0,
                summary: if out.is_some() {
                    format!("traded component {component}")
                } else {
                    text.trim_end().to_string()
                },
                json: serde_json::to_value(&d).unwrap(),
            })
        }
        DiagramOp::Involution { diagram, perm } => {
            let (d, symmetric) =
                apply_involution(&read_diagram(diagram)?, perm).map_err(|e| ExitReport::input_error(e.to_string()))?;
            Ok(ExitReport {
                status: if symmetric { 0 } else { 1 },
                summary: format!("is_symmetry = {symmetric}"),
                json: json!({ "is_symmetry": symmetric, "diagram": d }),
            })
        }
    }
}

fn cork(kind: &CorkKind) -> Result<ExitReport, ExitReport> {
    match kind {
        CorkKind::Akbulut { out } => {
            let d = akbulut_cork();
            let text = pretty(&serde_json::to_value(&d).unwrap());
            emit(out, &text)?;
            Ok(ExitReport {
                status: 0,
                summary: if out.is_some() {
                    "wrote the Akbulut cork".to_string()
                } else {
                    text.trim_end().to_string()
                },
                json: serde_json::to_value(&d).unwrap(),
            })
        }
        CorkKind::Generalized { matrix, out } => {
            let m: IntMatrix = read(matrix)?
                .parse()
                .map_err(|e| ExitReport::input_error(format!("{}: {e}", matrix.display())))?;
            let rows = m
                .to_i64_rows()
                .ok_or_else(|| ExitReport::input_error("matrix entries exceed 64 bits"))?;
            let spec = GeneralizedCorkSpec::new(rows);
            let (d, verdict) = build_generalized_cork(&spec);
            let predicate = spec.concordance_predicate();
            let result = json!({ "diagram": d, "verdict": verdict, "unevaluated": predicate });
            emit(out, &pretty(&result))?;
            let summary = match &verdict {
                TriState::Yes { .. } => format!(
                    "yes: {} components; {} left unevaluated",
                    d.components().len(),
                    predicate.name
                ),
                TriState::No { witness } => format!("no: {}", serde_json::to_string(witness).unwrap()),
                TriState::Unknown { .. } => "unknown".to_string(),
            };
            Ok(ExitReport {
                status: status_of(&verdict),
                summary,
                json: result,
            })
        }
    }
}
