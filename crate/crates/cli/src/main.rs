//! `fairrecov` command-line tool.
//!
//! Exit codes: 0 on success, 2 on invalid arguments, 1 on runtime failure.
//! Diagnostics go to stderr; data goes to the `--out` file or stdout.

mod manifest;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use fairrecov::bounds::recovery_probability_bound;
use fairrecov::experiments::{
    parse_f64_range, parse_usize_range, run_fig1, run_fig2, write_gap_csv, write_recovery_csv, Fig2Config, RSpec,
};
use fairrecov::graphs::{complement_join, complete, erdos_renyi, grid, read_edge_list, star, write_edge_list, Graph};
use fairrecov::model::{generate, InstanceRecord};
use fairrecov::solver::{check_exact_recovery, dual_certificate, round_solution, solve_sdp, SdpConfig, SdpStatus};
use fairrecov::spectral::{graph_spectrum_report, grid_spectrum_closed_form};
use fairrecov::Error;
use serde::Serialize;
use serde_json::json;

use crate::manifest::{version_line, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "fairrecov", about = "Exact recovery under statistical-parity constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Graph construction.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Laplacian spectrum, eigen-gap and Fiedler vector of a graph.
    Spectrum(SpectrumArgs),
    /// Instance sampling.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Solve the relaxation, round, and check the certificate.
    Solve(SolveArgs),
    /// Evaluate the exact-recovery probability bound.
    Bound(BoundArgs),
    /// Monte-Carlo experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Subcommand, Debug)]
enum GraphCmd {
    /// Write a graph from a named family as an edge list.
    Gen(GraphGenArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Family {
    Grid,
    Complete,
    Star,
    Cjoin,
    Er,
}

#[derive(Args, Debug, Serialize)]
struct GraphGenArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Grid rows.
    #[arg(long)]
    rows: Option<usize>,
    /// Grid columns.
    #[arg(long)]
    cols: Option<usize>,
    /// Vertex count (complete, star, cjoin, er).
    #[arg(long)]
    n: Option<usize>,
    /// Size of the independent side (cjoin).
    #[arg(long)]
    t: Option<usize>,
    /// Edge probability (er).
    #[arg(long)]
    r: Option<f64>,
    /// Required for random families.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SpectrumArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Also compare against the closed-form spectrum of grid(ROWS, COLS).
    #[arg(long, num_args = 2, value_names = ["ROWS", "COLS"])]
    closed_form_grid: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ModelCmd {
    /// Sample labels, fair attributes and one noisy observation.
    Gen(ModelGenArgs),
}

#[derive(Args, Debug, Serialize)]
struct ModelGenArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// JSON solver configuration; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct BoundArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Instance whose attributes enter the bound; none means no constraints.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ExperimentCmd {
    /// Eigen-gap statistics of Erdős–Rényi graphs.
    Fig1(Fig1Args),
    /// Recovery rates on a grid with 0, 1 or 2 fairness constraints.
    Fig2(Fig2Args),
}

#[derive(Args, Debug, Serialize)]
struct Fig1Args {
    /// Vertex counts, `start:stop:step` or a comma list.
    #[arg(long)]
    n: String,
    /// Edge probability: a number in [0, 1], `2logn/n` or `2^(logn/n)`.
    #[arg(long)]
    r: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct Fig2Args {
    /// Grid shape `ROWSxCOLS`.
    #[arg(long, default_value = "4x16")]
    grid: String,
    /// Edge-noise levels, `start:stop:step` or a comma list.
    #[arg(long, default_value = "0:0.1:0.01")]
    p: String,
    #[arg(long, default_value = "0,1,2")]
    k: String,
    #[arg(long, default_value_t = 30)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Node-noise level; defaults to q = p.
    #[arg(long)]
    q: Option<f64>,
    /// Plant a single labeling for all trials.
    #[arg(long)]
    fixed_truth: bool,
    /// JSON solver configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::SizeLimit { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn context(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn read_graph(path: &Path) -> std::result::Result<Graph, Failure> {
    let file = File::open(path).map_err(|e| context(path, e))?;
    read_edge_list(BufReader::new(file)).map_err(|e| context(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    let file = File::open(path).map_err(|e| context(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| context(path, e))
}

fn read_config(path: Option<&Path>) -> std::result::Result<SdpConfig, Failure> {
    let cfg: SdpConfig = match path {
        Some(p) => read_json(p)?,
        None => SdpConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn write_json(path: &Path, value: &impl Serialize) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()
}

fn emit_json(out: Option<&Path>, value: &impl Serialize, manifest: RunManifest) -> CmdResult {
    match out {
        Some(path) => {
            write_json(path, value)?;
            manifest.write_beside(path)?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            serde_json::to_writer_pretty(&mut lock, value)?;
            lock.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn need<T>(value: Option<T>, flag: &str, family: &str) -> std::result::Result<T, Failure> {
    value.ok_or_else(|| usage(format!("--{flag} is required for family {family}")))
}

fn graph_gen(args: &GraphGenArgs) -> CmdResult {
    let g = match args.family {
        Family::Grid => grid(need(args.rows, "rows", "grid")?, need(args.cols, "cols", "grid")?)?,
        Family::Complete => complete(need(args.n, "n", "complete")?)?,
        Family::Star => star(need(args.n, "n", "star")?)?,
        Family::Cjoin => complement_join(need(args.n, "n", "cjoin")?, need(args.t, "t", "cjoin")?)?,
        Family::Er => erdos_renyi(
            need(args.n, "n", "er")?,
            need(args.r, "r", "er")?,
            need(args.seed, "seed", "er")?,
        )?,
    };
    let mut w = BufWriter::new(File::create(&args.out)?);
    write_edge_list(&g, &mut w)?;
    w.flush()?;
    RunManifest::new("graph gen", args, args.seed).write_beside(&args.out)?;
    Ok(())
}

fn spectrum(args: &SpectrumArgs) -> CmdResult {
    let g = read_graph(&args.graph)?;
    let report = graph_spectrum_report(&g)?;
    let closed_form = match args.closed_form_grid.as_deref() {
        Some(&[rows, cols]) => {
            if rows * cols != g.n() {
                return Err(usage(format!("grid({rows}, {cols}) does not have {} vertices", g.n())));
            }
            let values = grid_spectrum_closed_form(rows, cols);
            let max_abs_diff = values
                .iter()
                .zip(&report.eigenvalues)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Some(json!({ "rows": rows, "cols": cols, "eigenvalues": values, "max_abs_diff": max_abs_diff }))
        }
        _ => None,
    };
    let mut value = serde_json::to_value(&report)?;
    if let Some(cf) = closed_form {
        value["closed_form"] = cf;
    }
    emit_json(args.out.as_deref(), &value, RunManifest::new("spectrum", args, None))
}

fn model_gen(args: &ModelGenArgs) -> CmdResult {
    let g = read_graph(&args.graph)?;
    let (inst, obs) = generate(g, args.k, args.p, args.q, args.seed)?;
    write_json(&args.out, &InstanceRecord::new(&inst, &obs, args.seed))?;
    RunManifest::new("model gen", args, Some(args.seed)).write_beside(&args.out)?;
    Ok(())
}

#[derive(Serialize)]
struct CertificateSummary {
    lambda2: f64,
    holds: bool,
}

#[derive(Serialize)]
struct SolveOutput {
    objective: f64,
    status: SdpStatus,
    iterations: usize,
    primal_residual: f64,
    dual_residual: f64,
    labels: Vec<i8>,
    recovered: bool,
    certificate: CertificateSummary,
}

fn solve(args: &SolveArgs) -> CmdResult {
    let record: InstanceRecord = read_json(&args.instance)?;
    let seed = record.seed;
    let (inst, obs) = record.into_parts().map_err(|e| context(&args.instance, e))?;
    let cfg = read_config(args.config.as_deref())?;
    let sol = solve_sdp(&obs.x, inst.attributes(), &cfg)?;
    if sol.status == SdpStatus::IterationCap {
        eprintln!(
            "warning: iteration cap reached after {} iterations (primal {:.2e}, dual {:.2e})",
            sol.iterations, sol.primal_residual, sol.dual_residual
        );
    }
    if sol.dropped_attributes > 0 {
        eprintln!("warning: {} linearly dependent attributes dropped", sol.dropped_attributes);
    }
    let labels = round_solution(&sol, &obs.c)?;
    let cert = dual_certificate(&obs.x, inst.attributes(), inst.y_bar())?;
    let out = SolveOutput {
        objective: sol.objective,
        status: sol.status,
        iterations: sol.iterations,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        recovered: check_exact_recovery(&labels, inst.y_bar())?,
        labels,
        certificate: CertificateSummary {
            lambda2: cert.lambda2,
            holds: cert.holds,
        },
    };
    write_json(&args.out, &out)?;
    #[derive(Serialize)]
    struct Params<'a> {
        #[serde(flatten)]
        args: &'a SolveArgs,
        solver: &'a SdpConfig,
    }
    let params = Params { args, solver: &cfg };
    RunManifest::new("solve", &params, Some(seed)).write_beside(&args.out)?;
    Ok(())
}

fn bound(args: &BoundArgs) -> CmdResult {
    let g = read_graph(&args.graph)?;
    let attributes = match &args.instance {
        Some(path) => {
            let record: InstanceRecord = read_json(path)?;
            let (inst, _) = record.into_parts().map_err(|e| context(path, e))?;
            if inst.graph() != &g {
                return Err(usage("instance graph differs from --graph"));
            }
            inst.attributes().to_vec()
        }
        None => Vec::new(),
    };
    let report = recovery_probability_bound(&g, &attributes, args.p)?;
    emit_json(args.out.as_deref(), &report, RunManifest::new("bound", args, None))
}

fn parse_grid_shape(s: &str) -> std::result::Result<(usize, usize), Failure> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| usage(format!("grid shape must look like 4x16, got {s:?}")))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| usage(format!("bad grid shape {s:?}")));
    Ok((parse(r)?, parse(c)?))
}

fn fig1(args: &Fig1Args) -> CmdResult {
    let n_values = parse_usize_range(&args.n)?;
    let r_spec: RSpec = args.r.parse()?;
    let rows = run_fig1(&n_values, r_spec, args.trials, args.seed, args.threads)?;
    let mut w = BufWriter::new(File::create(&args.out)?);
    write_gap_csv(&rows, &mut w)?;
    w.flush()?;
    RunManifest::new("experiment fig1", args, Some(args.seed)).write_beside(&args.out)?;
    Ok(())
}

fn fig2(args: &Fig2Args) -> CmdResult {
    let (rows, cols) = parse_grid_shape(&args.grid)?;
    let cfg = Fig2Config {
        rows,
        cols,
        p_values: parse_f64_range(&args.p)?,
        k_values: parse_usize_range(&args.k)?,
        trials: args.trials,
        seed: args.seed,
        q: args.q,
        fixed_truth: args.fixed_truth,
        solver: read_config(args.config.as_deref())?,
        threads: args.threads,
    };
    let report = run_fig2(&cfg)?;
    if report.failures > 0 {
        eprintln!("warning: {} cells failed and were counted as non-recovery", report.failures);
        for o in report.outcomes.iter().filter(|o| o.error.is_some()) {
            eprintln!("  p={} k={} trial={}: {}", o.p, o.k, o.trial, o.error.as_deref().unwrap_or(""));
        }
    }
    let mut w = BufWriter::new(File::create(&args.out)?);
    write_recovery_csv(&report.rows, &mut w)?;
    w.flush()?;
    #[derive(Serialize)]
    struct Params<'a> {
        #[serde(flatten)]
        args: &'a Fig2Args,
        resolved: &'a Fig2Config,
        q_rule: &'a str,
        failures: usize,
    }
    let params = Params {
        args,
        resolved: &cfg,
        q_rule: if cfg.q.is_some() { "fixed" } else { "q = p" },
        failures: report.failures,
    };
    RunManifest::new("experiment fig2", &params, Some(args.seed)).write_beside(&args.out)?;
    Ok(())
}

fn dispatch(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Graph(GraphCmd::Gen(a)) => graph_gen(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Model(ModelCmd::Gen(a)) => model_gen(a),
        Command::Solve(a) => solve(a),
        Command::Bound(a) => bound(a),
        Command::Experiment(ExperimentCmd::Fig1(a)) => fig1(a),
        Command::Experiment(ExperimentCmd::Fig2(a)) => fig2(a),
    }
}

fn main() -> ExitCode {
    let version: &'static str = Box::leak(version_line().into_boxed_str());
    let matches = match Cli::command().version(version).try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
