//! The `connes` command-line front end.
//!
//! Exit status: 0 success, 1 usage or configuration error, 2 a computation
//! was flagged (non-convergence or a failed verification suite), 3 I/O or
//! parse error. Errors are written to stderr as one JSON line.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::distance::{
    check_metric, distance_exact, distance_matrix, distance_numeric, Distance, DistanceMatrix, DistanceQuery,
    DistanceResult, MetricCheck, SolverOptions,
};
use crate::error::{Error, Result};
use crate::graph::{graph_distance_matrix, Arrow, WeightedDigraph};
use crate::study::{convergence_study, ConvergenceReport, DEFAULT_SWEEP};
use crate::triple::{build_triple, DiracKind, LatticeSpec, Topology};
use crate::verify::{run_verification, SuiteResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Lattice size for `--mode verify` when `--n` is absent.
pub const DEFAULT_VERIFY_N: usize = 8;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FLAGGED: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Matrix,
    Pair,
    Verify,
    Converge,
    Graph,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "connes", version, about = "Connes distances on lattice spectral triples and weighted digraphs")]
pub struct Args {
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Defaults to the topology of `--kind`, else open.
    #[arg(long)]
    pub topology: Option<String>,
    /// Number of lattice sites.
    #[arg(long)]
    pub n: Option<usize>,
    /// adjacency-plain | adjacency-doubled | symmetric-difference | closed-adjacency-doubled
    #[arg(long)]
    pub kind: Option<String>,
    /// 1-based sites `p,q`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub pair: Option<Vec<usize>>,
    /// Lattice sizes for the convergence study.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub sweep: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 20_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// Graph file: `n <count>` then `k l epsilon` per arrow.
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    /// Absent in converge and graph mode.
    pub lattice: Option<LatticeSpec>,
    pub kind: DiracKind,
    pub pair: Option<(usize, usize)>,
    pub sweep: Vec<usize>,
    pub solver: SolverOptions,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub graph_file: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(args: &Args) -> Result<Self> {
        let kind_flag: Option<DiracKind> = args.kind.as_deref().map(str::parse).transpose()?;
        let topology = match (args.topology.as_deref(), kind_flag) {
            (Some(t), _) => t.parse()?,
            (None, Some(k)) => k.topology(),
            (None, None) => Topology::Open,
        };
        let kind = match (kind_flag, args.mode) {
            (Some(k), _) => k,
            (None, Mode::Converge) => DiracKind::SymmetricDifference,
            (None, _) if topology == Topology::Closed => DiracKind::ClosedAdjacencyDoubled,
            (None, _) => DiracKind::AdjacencyDoubled,
        };
        let lattice = match args.mode {
            Mode::Converge | Mode::Graph => None,
            Mode::Verify => Some(LatticeSpec::new(args.n.unwrap_or(DEFAULT_VERIFY_N), topology)?),
            Mode::Matrix | Mode::Pair => {
                let n = args.n.ok_or_else(|| Error::Config("--n is required".into()))?;
                Some(LatticeSpec::new(n, topology)?)
            }
        };
        let pair = match args.pair.as_deref() {
            None => None,
            Some(&[p, q]) => Some((p, q)),
            Some(_) => return Err(Error::Config("--pair takes exactly two sites `p,q`".into())),
        };
        let solver = SolverOptions {
            max_iterations: args.max_iter,
            tolerance: args.tol,
            restarts: args.restarts,
            seed: args.seed,
            ..SolverOptions::default()
        };
        let config = RunConfig {
            mode: args.mode,
            lattice,
            kind,
            pair,
            sweep: args.sweep.clone().unwrap_or_else(|| DEFAULT_SWEEP.to_vec()),
            solver,
            output_format: args.format,
            output_path: args.out.clone(),
            graph_file: args.graph.clone(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            Mode::Pair if self.pair.is_none() => return Err(Error::Config("pair mode requires --pair".into())),
            Mode::Graph if self.graph_file.is_none() => {
                return Err(Error::Config("graph mode requires --graph".into()))
            }
            Mode::Converge if self.kind != DiracKind::SymmetricDifference => {
                return Err(Error::Config("converge mode requires --kind symmetric-difference".into()))
            }
            _ => {}
        }
        if let Some(lattice) = self.lattice {
            if self.kind.topology() != lattice.topology() {
                return Err(Error::IncompatibleKind {
                    kind: self.kind.name().into(),
                    topology: lattice.topology().to_string(),
                });
            }
        }
        if !(self.solver.tolerance > 0.0) || self.solver.max_iterations == 0 || self.solver.restarts == 0 {
            return Err(Error::Config("--tol, --max-iter and --restarts must be positive".into()));
        }
        Ok(())
    }
}

/// Rendered output plus the condition that makes the run exit with status 2.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub body: String,
    pub flagged: Option<Error>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } => EXIT_FLAGGED,
        Error::Parse { .. } | Error::Io(_) | Error::InvariantViolation(_) | Error::NoArrows => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::NotSquare { .. } => "not-square",
        Error::NotHermitian { .. } => "not-hermitian",
        Error::DimensionMismatch(_) => "dimension-mismatch",
        Error::NonFinite(_) => "non-finite",
        Error::TooSmall { .. } => "too-small",
        Error::TooLarge { .. } => "too-large",
        Error::IncompatibleKind { .. } => "incompatible-kind",
        Error::LengthMismatch { .. } => "length-mismatch",
        Error::IndexOutOfRange { .. } => "index-out-of-range",
        Error::NonConvergence { .. } => "non-convergence",
        Error::NoArrows => "no-arrows",
        Error::InvariantViolation(_) => "invariant-violation",
        Error::Parse { .. } => "parse",
        Error::Io(_) => "io",
        Error::Config(_) => "config",
    }
}

/// One-line JSON error record.
pub fn error_record(e: &Error) -> String {
    json!({
        "error": {
            "kind": error_kind(e),
            "exit_code": exit_code(e),
            "message": e.to_string(),
        }
    })
    .to_string()
}

/// Parses the graph file format: `n <count>` first, then `k l [epsilon]`
/// per arrow with 1-based vertices; `#` starts a comment.
pub fn parse_graph(text: &str) -> Result<WeightedDigraph> {
    let mut n_vertices = None;
    let mut arrows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let parse_err = |message: String| Error::Parse { line, message };
        let Some(n) = n_vertices else {
            match fields.as_slice() {
                ["n", count] => {
                    let n: usize = count
                        .parse()
                        .map_err(|_| parse_err(format!("bad vertex count `{count}`")))?;
                    n_vertices = Some(n);
                    continue;
                }
                _ => return Err(parse_err("expected header `n <vertex-count>`".into())),
            }
        };
        let vertex = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| parse_err(format!("bad vertex `{s}`")))
        };
        let (from, to, epsilon) = match fields.as_slice() {
            [k, l] => (vertex(k)?, vertex(l)?, 1.0),
            [k, l, e] => {
                let eps: f64 = e.parse().map_err(|_| parse_err(format!("bad weight `{e}`")))?;
                (vertex(k)?, vertex(l)?, eps)
            }
            _ => return Err(parse_err(format!("expected `k l epsilon`, got `{content}`"))),
        };
        if from == 0 || from > n || to == 0 || to > n {
            return Err(Error::InvariantViolation(format!(
                "line {line}: vertex outside 1..={n}"
            )));
        }
        arrows.push(Arrow { from, to, epsilon });
    }
    let n = n_vertices.ok_or(Error::Parse {
        line: 0,
        message: "missing header `n <vertex-count>`".into(),
    })?;
    WeightedDigraph::new(n, arrows)
}

pub fn load_graph(path: &Path) -> Result<WeightedDigraph> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_graph(&text)
}

/// 17 significant digits; `inf` for unbounded entries.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v > 0.0 {
        "inf".into()
    } else {
        format!("{v}")
    }
}

fn matrix_csv(rows: &[Vec<Distance>]) -> String {
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|d| format_value(d.value())).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Reads a matrix written by the CSV emitter.
pub fn parse_matrix_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                        line: i + 1,
                        message: format!("bad number `{cell}`"),
                    })
                })
                .collect()
        })
        .collect()
}

#[derive(Serialize)]
struct Meta {
    mode: Mode,
    kind: Option<&'static str>,
    n: Option<usize>,
    topology: Option<String>,
    seed: u64,
    tool_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<SolverOptions>,
}

fn meta(config: &RunConfig, n: Option<usize>, with_solver: bool) -> Meta {
    let graph = config.mode == Mode::Graph;
    Meta {
        mode: config.mode,
        kind: (!graph).then(|| config.kind.name()),
        n,
        topology: match config.mode {
            Mode::Graph => None,
            Mode::Converge => Some(Topology::Open.to_string()),
            _ => config.lattice.map(|l| l.topology().to_string()),
        },
        seed: config.solver.seed,
        tool_version: TOOL_VERSION,
        solver: with_solver.then(|| config.solver.clone()),
    }
}

fn envelope(meta: Meta, data: Value) -> String {
    let mut s = serde_json::to_string_pretty(&json!({ "meta": meta, "data": data })).expect("serializable");
    s.push('\n');
    s
}

fn emit_matrix(config: &RunConfig, m: &DistanceMatrix, check: &MetricCheck) -> String {
    match config.output_format {
        OutputFormat::Csv => matrix_csv(&m.values),
        OutputFormat::Json => envelope(
            meta(config, Some(m.n), true),
            json!({
                "matrix": m.values,
                "total_iterations": m.total_iterations,
                "all_converged": m.all_converged,
                "numeric_pairs": m.numeric_pairs,
                "metric_check": check,
            }),
        ),
    }
}

fn emit_pair(config: &RunConfig, p: usize, q: usize, r: &DistanceResult, exact: Option<f64>) -> String {
    match config.output_format {
        OutputFormat::Csv => format!(
            "p,q,value,method,iterations_used,converged\n{p},{q},{},{},{},{}\n",
            format_value(r.value.value()),
            serde_json::to_value(r.method).expect("serializable").as_str().unwrap_or(""),
            r.iterations_used,
            r.converged
        ),
        OutputFormat::Json => envelope(
            meta(config, config.lattice.map(|l| l.n_sites()), true),
            json!({ "p": p, "q": q, "result": r, "closed_form": exact }),
        ),
    }
}

fn emit_verify(config: &RunConfig, n: usize, suites: &[SuiteResult]) -> String {
    match config.output_format {
        OutputFormat::Csv => {
            let mut out = String::from("suite,passed,max_deviation,tolerance\n");
            for s in suites {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    s.suite,
                    s.passed,
                    format_value(s.max_deviation),
                    format_value(s.tolerance)
                );
            }
            out
        }
        OutputFormat::Json => envelope(
            meta(config, Some(n), true),
            json!({ "suites": suites, "all_passed": suites.iter().all(|s| s.passed) }),
        ),
    }
}

fn emit_converge(config: &RunConfig, report: &ConvergenceReport) -> String {
    match config.output_format {
        OutputFormat::Csv => {
            let mut out = String::from(
                "n,center,d_next,d_next2,reference_next,reference_next2,relative_deviation_next,relative_deviation_next2,converged\n",
            );
            for r in &report.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.n,
                    r.center,
                    format_value(r.d_next),
                    format_value(r.d_next2),
                    format_value(r.reference_next),
                    format_value(r.reference_next2),
                    format_value(r.relative_deviation_next),
                    format_value(r.relative_deviation_next2),
                    r.converged
                );
            }
            out
        }
        OutputFormat::Json => envelope(meta(config, None, true), json!(report)),
    }
}

fn non_convergence(converged: bool, iterations: usize) -> Option<Error> {
    (!converged).then_some(Error::NonConvergence { iterations })
}

/// Computes the artifact for a validated config.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let lattice = || config.lattice.ok_or_else(|| Error::Config("lattice size missing".into()));
    match config.mode {
        Mode::Matrix => {
            let triple = build_triple(lattice()?, config.kind)?;
            let m = distance_matrix(&triple, &config.solver)?;
            let check = check_metric(&m.as_f64());
            Ok(RunOutput {
                body: emit_matrix(config, &m, &check),
                flagged: non_convergence(m.all_converged, m.total_iterations),
            })
        }
        Mode::Pair => {
            let (p, q) = config.pair.expect("validated");
            let triple = build_triple(lattice()?, config.kind)?;
            let query = DistanceQuery::new(&triple, p, q)?;
            let r = distance_numeric(&query, &config.solver)?;
            let exact = distance_exact(&query).map(|e| e.value.value());
            Ok(RunOutput {
                body: emit_pair(config, p, q, &r, exact),
                flagged: non_convergence(r.converged, r.iterations_used),
            })
        }
        Mode::Verify => {
            let l = lattice()?;
            let suites = run_verification(l.n_sites(), &config.solver, config.solver.seed)?;
            let failed: Vec<&str> = suites.iter().filter(|s| !s.passed).map(|s| s.suite).collect();
            Ok(RunOutput {
                body: emit_verify(config, l.n_sites(), &suites),
                flagged: (!failed.is_empty())
                    .then(|| Error::InvariantViolation(format!("failed suites: {}", failed.join(", ")))),
            })
        }
        Mode::Converge => {
            let report = convergence_study(&config.sweep, &config.solver)?;
            let converged = report.rows.iter().all(|r| r.converged);
            let flagged = if !report.passed {
                Some(Error::InvariantViolation("successive changes do not shrink".into()))
            } else {
                non_convergence(converged, 0)
            };
            Ok(RunOutput {
                body: emit_converge(config, &report),
                flagged,
            })
        }
        Mode::Graph => {
            let g = load_graph(config.graph_file.as_deref().expect("validated"))?;
            let values = graph_distance_matrix(&g)?;
            let m = DistanceMatrix {
                n: g.n_vertices(),
                values,
                total_iterations: 0,
                all_converged: true,
                numeric_pairs: 0,
            };
            let check = check_metric(&m.as_f64());
            let body = match config.output_format {
                OutputFormat::Csv => matrix_csv(&m.values),
                OutputFormat::Json => envelope(
                    meta(config, Some(m.n), false),
                    json!({ "matrix": m.values, "arrows": g.arrows().len(), "metric_check": check }),
                ),
            };
            Ok(RunOutput { body, flagged: None })
        }
    }
}

/// Parses `argv`, runs, writes the artifact and returns the exit status.
pub fn execute<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("usage error").trim_start_matches("error: ");
            let _ = writeln!(stderr, "{}", error_record(&Error::Config(first.to_string())));
            return EXIT_CONFIG;
        }
    };
    let outcome = RunConfig::from_args(&args).and_then(|c| {
        let out = run(&c)?;
        match &c.output_path {
            Some(path) => std::fs::write(path, &out.body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
            None => stdout.write_all(out.body.as_bytes())?,
        }
        Ok(out.flagged)
    });
    match outcome {
        Ok(None) => EXIT_OK,
        Ok(Some(flag)) => {
            let _ = writeln!(stderr, "{}", error_record(&flag));
            EXIT_FLAGGED
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_record(&e));
            exit_code(&e)
        }
    }
}
