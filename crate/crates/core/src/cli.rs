//! Command-line front end. Exit codes: 0 ok, 1 usage, 2 parse, 3 numerical,
//! 4 search found nothing.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::choi::MatrixMap;
use crate::definite::decompose_separable;
use crate::eigen::hermitian_eigen;
use crate::error::Error;
use crate::io::{
    load_map, load_state, map_to_json, state_to_json, to_json, StateInput, BUILTIN_PREFIX,
};
use crate::matrix::Matrix;
use crate::parallel::Parallelism;
use crate::positivity::{builtin_map, classify_map, BlockBudget, WitnessLibrary};
use crate::search::{search_ppt_entangled, SearchBudget};
use crate::separability::{witness_battery, witness_pairing, SeparabilityCertificate};
use crate::tolerance::Tolerances;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_NOT_FOUND: i32 = 4;

/// Smallest violation a search must reach to count as a detection.
pub const SEARCH_MIN_VIOLATION: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "entanglecone",
    version,
    about = "Positive maps, Choi matrices and entanglement witnesses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Restarts for block-positivity screening or the PPT search.
    #[arg(long, global = true)]
    pub budget_restarts: Option<usize>,

    /// Iterations per restart.
    #[arg(long, global = true)]
    pub budget_iters: Option<usize>,

    /// PSD slack (relative to max(1, ‖x‖_F)).
    #[arg(long, global = true)]
    pub tol_psd: Option<f64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Where `search-ppt-entangled` writes the found state as state JSON.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the Choi-matrix representation of a map.
    Choi { map: String },
    /// CP / copositive / positive / entanglement-breaking report for a map.
    ClassifyMap { map: String },
    /// PPT check, witness battery and Peres cross-check for a state.
    AnalyzeState { state: PathBuf },
    /// Split a separable ensemble into orthogonal irreducible blocks.
    Decompose { ensemble: PathBuf },
    /// Search the PPT states for one detected by a builtin witness map.
    SearchPptEntangled { witness: String },
    /// Re-check a witness on a state: Tr(h·C) and λ_min((ι⊗φ)(h)).
    Pair { state: PathBuf, map: String },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

fn load_failure(e: Error) -> Failure {
    Failure {
        code: EXIT_PARSE,
        message: e.to_string(),
    }
}

fn compute_failure(e: Error) -> Failure {
    let code = match e {
        Error::Parse(_) | Error::Dimension(_) => EXIT_PARSE,
        _ => EXIT_NUMERICAL,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

#[derive(Serialize)]
struct PairReport {
    map: String,
    dims: (usize, usize),
    pairing: f64,
    min_eigenvalue: f64,
    vector: Matrix,
}

/// Parses `args` (including the program name), runs the command and writes
/// the report to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match execute(&cli, Parallelism::from_env()) {
        Ok((report, code)) => {
            let text = match cli.format {
                Format::Json => to_json(&report),
                Format::Text => render_text(&report),
            };
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_USAGE;
            }
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: &Cli, par: Parallelism) -> Result<(Value, i32), Failure> {
    let tol = match cli.tol_psd {
        Some(slack) => Tolerances::default().with_psd_slack(slack),
        None => Ok(Tolerances::default()),
    }
    .map_err(|e| Failure::usage(e.to_string()))?;
    if cli.out.is_some() && !matches!(cli.command, Command::SearchPptEntangled { .. }) {
        return Err(Failure::usage("--out is only used by search-ppt-entangled"));
    }
    let seed = cli.seed;

    match &cli.command {
        Command::Choi { map } => {
            let f = load_map(map, &tol).map_err(load_failure)?;
            let plain = MatrixMap::from_choi(f.dim_in(), f.dim_out(), f.choi().clone(), &tol)
                .map_err(compute_failure)?;
            let mut v = map_to_json(&plain);
            v["density"] = json!(f.choi().transpose());
            Ok((v, EXIT_OK))
        }
        Command::ClassifyMap { map } => {
            let f = load_map(map, &tol).map_err(load_failure)?;
            let mut budget = BlockBudget::default();
            if let Some(r) = cli.budget_restarts {
                budget.restarts = r;
            }
            if let Some(i) = cli.budget_iters {
                budget.iterations = i;
            }
            let report = classify_map(&f, &budget, seed, par, &tol).map_err(compute_failure)?;
            Ok((value(&report), EXIT_OK))
        }
        Command::AnalyzeState { state } => {
            let input = load_state(state, &tol).map_err(load_failure)?;
            let s = input.state(&tol).map_err(load_failure)?;
            let certificate = match &input {
                StateInput::Ensemble(e) => Some(SeparabilityCertificate::Ensemble {
                    ensemble: e.clone(),
                }),
                StateInput::Density(_) => None,
            };
            let lib =
                WitnessLibrary::standard(s.dims().1, seed, par, &tol).map_err(compute_failure)?;
            let report =
                witness_battery(&s, &lib, certificate, seed, &tol).map_err(compute_failure)?;
            Ok((value(&report), EXIT_OK))
        }
        Command::Decompose { ensemble } => {
            let StateInput::Ensemble(ens) = load_state(ensemble, &tol).map_err(load_failure)?
            else {
                return Err(Failure {
                    code: EXIT_PARSE,
                    message: "decompose needs a state file with \"repr\": \"ensemble\"".into(),
                });
            };
            let report = decompose_separable(&ens, &tol).map_err(compute_failure)?;
            Ok((value(&report), EXIT_OK))
        }
        Command::SearchPptEntangled { witness } => {
            let name = witness.strip_prefix(BUILTIN_PREFIX).unwrap_or(witness);
            let f = builtin_map(name).map_err(|e| Failure::usage(e.to_string()))?;
            let mut budget = SearchBudget::default();
            if let Some(r) = cli.budget_restarts {
                budget.restarts = r;
            }
            if let Some(i) = cli.budget_iters {
                budget.iterations = i;
            }
            let result = search_ppt_entangled(&f, name, f.dim_in(), &budget, seed, par, &tol)
                .map_err(compute_failure)?;
            if let Some(path) = &cli.out {
                let state = result.to_state(&tol).map_err(compute_failure)?;
                std::fs::write(path, to_json(&state_to_json(&state))).map_err(|e| Failure {
                    code: EXIT_USAGE,
                    message: format!("{}: {e}", path.display()),
                })?;
            }
            let found = result.violation >= SEARCH_MIN_VIOLATION && result.converged;
            Ok((value(&result), if found { EXIT_OK } else { EXIT_NOT_FOUND }))
        }
        Command::Pair { state, map } => {
            let s = load_state(state, &tol)
                .and_then(|input| input.state(&tol))
                .map_err(load_failure)?;
            let f = load_map(map, &tol).map_err(load_failure)?;
            if f.dim_in() != s.dims().1 {
                return Err(Failure {
                    code: EXIT_PARSE,
                    message: format!(
                        "map acts on M_{} but the state's second factor is M_{}",
                        f.dim_in(),
                        s.dims().1
                    ),
                });
            }
            let pairing = witness_pairing(&s, &f).map_err(compute_failure)?;
            let image = f
                .apply_second(s.density(), s.dims().0)
                .map_err(compute_failure)?;
            let eig = hermitian_eigen(&image.hermitian_part(), &tol).map_err(compute_failure)?;
            let report = PairReport {
                map: map.clone(),
                dims: s.dims(),
                pairing,
                min_eigenvalue: eig.min(),
                vector: eig.min_vector(),
            };
            Ok((value(&report), EXIT_OK))
        }
    }
}

fn value<T: Serialize>(report: &T) -> Value {
    serde_json::to_value(report).expect("report types serialize")
}

fn is_matrix(obj: &serde_json::Map<String, Value>) -> bool {
    obj.len() == 3
        && obj.contains_key("rows")
        && obj.contains_key("cols")
        && obj.contains_key("entries")
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_matrix(obj: &serde_json::Map<String, Value>, indent: usize, out: &mut String) {
    let cols = obj["cols"].as_u64().unwrap_or(0) as usize;
    let entries = obj["entries"].as_array().cloned().unwrap_or_default();
    out.push_str(&format!("matrix {}x{}\n", obj["rows"], cols));
    for row in entries.chunks(cols.max(1)) {
        let cells: Vec<String> = row
            .iter()
            .map(|e| {
                let re = e[0].as_f64().unwrap_or(f64::NAN);
                let im = e[1].as_f64().unwrap_or(f64::NAN);
                format!("{re:+.6}{im:+.6}i")
            })
            .collect();
        out.push_str(&format!("{}{}\n", " ".repeat(indent), cells.join("  ")));
    }
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(obj) => {
            for (k, child) in obj {
                match child {
                    Value::Object(inner) if is_matrix(inner) => {
                        out.push_str(&format!("{pad}{k}: "));
                        render_matrix(inner, indent + 2, out);
                    }
                    Value::Object(_) | Value::Array(_) if !is_flat(child) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render(child, indent + 2, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", flat(child))),
                }
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                out.push_str(&format!("{pad}[{i}]\n"));
                match item {
                    Value::Object(inner) if is_matrix(inner) => {
                        out.push_str(&pad);
                        render_matrix(inner, indent + 2, out);
                    }
                    _ if is_flat(item) => out.push_str(&format!("{pad}  {}\n", flat(item))),
                    _ => render(item, indent + 2, out),
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other))),
    }
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(|i| !i.is_object() && !i.is_array()),
        Value::Object(_) => false,
        _ => true,
    }
}

fn flat(v: &Value) -> String {
    match v {
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(", "),
        other => scalar(other),
    }
}

/// Human-readable rendering of a JSON report; carries the same fields.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    render(v, 0, &mut out);
    out
}
