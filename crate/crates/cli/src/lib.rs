//! Command-line front end: `gen`, `evc`, `check` and `simulate`.
//!
//! Exit codes: 0 success (for `check`: isomorphic, or filter passed under
//! `--filter-only`), 1 not isomorphic, 2 usage or input error, 3 computation
//! error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use evciso::experiment::{
    default_p_list, render_report, run_full_experiment, write_counterexamples, ExperimentConfig,
    ExperimentError, ReportFormat, SuiteOptions, DEFAULT_MASTER_SEED, DEFAULT_N, DEFAULT_SUITE_SIZE,
};
use evciso::filter::{CandidateMapping, SignatureCache};
use evciso::generator::{suite, GeneratorError};
use evciso::{is_isomorphic, parse_graph, ConvergenceConfig, FilterVerdict, Graph, Refinement, DEFAULT_TOLERANCE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_ISOMORPHIC: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "evciso", version, about = "Graph isomorphism screening by eigenvector centrality")]
struct Cli {
    /// Decimal places for printed numbers, or `full` for shortest round-trip output.
    #[arg(long, global = true, default_value = "5", value_parser = parse_precision)]
    precision: Precision,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate Erdős–Rényi graphs into numbered edge-list files.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print eigenvector centrality and spectral radius of one graph.
    Evc {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        convergence: ConvergenceArgs,
    },
    /// Run the staged filter and exact matcher on two graphs.
    Check {
        first: PathBuf,
        second: PathBuf,
        /// Stop after the filter; exit 0 if it passes.
        #[arg(long)]
        filter_only: bool,
        /// Tolerance for EVC sequence equality and tie classes.
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long, default_value_t = ConvergenceConfig::default().max_iterations)]
        max_iters: usize,
    },
    /// Run the random-graph screening study and print its report.
    Simulate {
        #[arg(long, default_value_t = DEFAULT_N)]
        n: usize,
        /// Comma-separated link probabilities.
        #[arg(long, value_delimiter = ',', default_values_t = default_p_list())]
        p_list: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_SUITE_SIZE)]
        suite_size: usize,
        #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Exactly match every degree-flagged pair as well.
        #[arg(long)]
        confirm_all_degree: bool,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Record per-suite wall time (makes the report non-reproducible).
        #[arg(long)]
        timings: bool,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Dump EVC false-positive pairs as edge-list files here.
        #[arg(long)]
        artifact_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    /// Norm and vector convergence tolerance.
    #[arg(long, default_value_t = ConvergenceConfig::default().norm_tolerance)]
    tol: f64,
    #[arg(long, default_value_t = ConvergenceConfig::default().max_iterations)]
    max_iters: usize,
}

impl ConvergenceArgs {
    fn config(&self) -> ConvergenceConfig {
        ConvergenceConfig {
            norm_tolerance: self.tol,
            vector_tolerance: self.tol,
            max_iterations: self.max_iters,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Table => ReportFormat::Table,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Precision {
    Places(usize),
    Full,
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    if s == "full" {
        return Ok(Precision::Full);
    }
    s.parse::<usize>()
        .ok()
        .filter(|&p| p <= 17)
        .map(Precision::Places)
        .ok_or_else(|| format!("expected 0..=17 or `full`, got {s:?}"))
}

impl Precision {
    fn fmt(self, x: f64) -> String {
        match self {
            Precision::Places(p) => format!("{x:.p$}"),
            Precision::Full => format!("{x}"),
        }
    }

    fn list(self, xs: &[f64]) -> String {
        xs.iter().map(|&x| self.fmt(x)).collect::<Vec<_>>().join(" ")
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn computation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_COMPUTATION,
            message: message.into(),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Gen {
            n,
            p,
            count,
            seed,
            out_dir,
        } => gen(*n, *p, *count, *seed, out_dir, out),
        Command::Evc { input, convergence } => evc(input, &convergence.config(), cli.precision, out),
        Command::Check {
            first,
            second,
            filter_only,
            tol,
            max_iters,
        } => {
            let cfg = ConvergenceConfig {
                max_iterations: *max_iters,
                ..ConvergenceConfig::default()
            };
            check(first, second, *filter_only, *tol, &cfg, cli.precision, out)
        }
        Command::Simulate {
            n,
            p_list,
            suite_size,
            seed,
            format,
            confirm_all_degree,
            tol,
            workers,
            timings,
            output,
            artifact_dir,
        } => {
            let config = ExperimentConfig {
                n: *n,
                p_list: p_list.clone(),
                suite_size: *suite_size,
                master_seed: *seed,
                options: SuiteOptions {
                    tolerance: *tol,
                    confirm_all_degree: *confirm_all_degree,
                    record_timing: *timings,
                    ..SuiteOptions::default()
                },
                workers: *workers,
            };
            simulate(&config, (*format).into(), output.as_deref(), artifact_dir.as_deref(), out, err)
        }
    };
    match outcome {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    parse_graph(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn io_failure(what: &str, path: &Path, e: std::io::Error) -> Failure {
    Failure::input(format!("cannot {what} {}: {e}", path.display()))
}

fn gen(n: usize, p: f64, count: usize, seed: u64, dir: &Path, out: &mut dyn Write) -> Outcome {
    let graphs = suite(n, p, count, seed).map_err(|GeneratorError::InvalidProbability(p)| {
        Failure::input(format!("--p must lie in [0, 1], got {p}"))
    })?;
    fs::create_dir_all(dir).map_err(|e| io_failure("create", dir, e))?;
    for (k, g) in graphs.iter().enumerate() {
        let path = dir.join(format!("graph_{k:05}.txt"));
        fs::write(&path, g.to_edge_list()).map_err(|e| io_failure("write", &path, e))?;
    }
    let _ = writeln!(out, "wrote {count} graphs (n={n}, p={p}, seed={seed}) to {}", dir.display());
    Ok(EXIT_OK)
}

fn evc(input: &Path, cfg: &ConvergenceConfig, precision: Precision, out: &mut dyn Write) -> Outcome {
    cfg.validate().map_err(|e| Failure::input(e.to_string()))?;
    let g = read_graph(input)?;
    let r = evciso::power_iteration(&g, cfg)
        .map_err(|e| Failure::computation(format!("{}: {e}", input.display())))?;
    let mut text = format!("graph: {} (n={}, m={})\nvertex\tevc\n", input.display(), g.n(), g.edge_count());
    for (v, &x) in r.values.iter().enumerate() {
        text.push_str(&format!("{v}\t{}\n", precision.fmt(x)));
    }
    text.push_str(&format!("sequence: {}\n", precision.list(&r.sequence())));
    text.push_str(&format!("spectral_radius: {}\n", precision.fmt(r.spectral_radius)));
    text.push_str(&format!("iterations: {}\n", r.iterations));
    text.push_str(&format!("used_shift: {}\n", r.used_shift));
    let _ = out.write_all(text.as_bytes());
    Ok(EXIT_OK)
}

#[derive(Clone, Copy)]
enum Stage {
    Pass,
    Fail,
    Skipped,
}

impl Stage {
    fn label(self) -> &'static str {
        match self {
            Stage::Pass => "pass",
            Stage::Fail => "fail",
            Stage::Skipped => "skipped",
        }
    }
}

fn check(
    first: &Path,
    second: &Path,
    filter_only: bool,
    tol: f64,
    cfg: &ConvergenceConfig,
    precision: Precision,
    out: &mut dyn Write,
) -> Outcome {
    if tol.is_nan() || tol < 0.0 {
        return Err(Failure::input(format!("--tol must be >= 0, got {tol}")));
    }
    cfg.validate().map_err(|e| Failure::input(e.to_string()))?;
    let g1 = read_graph(first)?;
    let g2 = read_graph(second)?;

    let cache = SignatureCache::new([&g1, &g2], *cfg);
    let verdict = cache.compare(0, 1, tol).map_err(|e| {
        let path = if cache.evc_error(0).is_some() { first } else { second };
        Failure::computation(format!("{}: {e}", path.display()))
    })?;

    use Stage::*;
    let stages = match &verdict {
        FilterVerdict::RejectedByCounts => [Fail, Skipped, Skipped],
        FilterVerdict::RejectedByDegreeSeq => [Pass, Fail, Skipped],
        FilterVerdict::RejectedByEvcSeq => [Pass, Pass, Fail],
        FilterVerdict::PotentiallyIsomorphic(_) => [Pass, Pass, Pass],
        FilterVerdict::TriviallyIsomorphic => [Pass, Pass, Skipped],
    };

    let mut text = format!(
        "counts:     {} (n={}/{}, m={}/{})\n",
        stages[0].label(),
        g1.n(),
        g2.n(),
        g1.edge_count(),
        g2.edge_count()
    );
    text.push_str(&format!("degree_seq: {}", stages[1].label()));
    if !matches!(stages[1], Skipped) {
        text.push_str(&format!(
            " ({:?} / {:?})",
            cache.degree_sequence(0).values(),
            cache.degree_sequence(1).values()
        ));
    }
    text.push('\n');
    text.push_str(&format!("evc_seq:    {}", stages[2].label()));
    match (cache.evc(0), cache.evc(1), &verdict) {
        (_, _, FilterVerdict::TriviallyIsomorphic) => text.push_str(" (both graphs edgeless)"),
        (Ok(a), Ok(b), _) if !matches!(stages[2], Skipped) => {
            text.push_str(&format!(
                "\n  first:  {}\n  second: {}",
                precision.list(&a.sequence),
                precision.list(&b.sequence)
            ));
        }
        _ => {}
    }
    text.push('\n');
    text.push_str(&format!("verdict: {}\n", verdict.name()));
    if let FilterVerdict::PotentiallyIsomorphic(mapping) = &verdict {
        text.push_str(&describe_mapping(mapping));
    }

    let code = if !verdict.passed() {
        EXIT_NOT_ISOMORPHIC
    } else if filter_only {
        EXIT_OK
    } else {
        let refinement = match &verdict {
            FilterVerdict::PotentiallyIsomorphic(mapping) => Refinement::EvcClasses(mapping),
            _ => Refinement::Degree,
        };
        let result = is_isomorphic(&g1, &g2, refinement);
        match &result.witness {
            Some(w) => {
                let pairs: Vec<String> = (0..w.len()).map(|v| format!("{v}->{}", w.apply(v))).collect();
                text.push_str(&format!(
                    "exact_match: Confirmed (nodes explored: {})\nwitness: {}\n",
                    result.nodes_explored,
                    pairs.join(" ")
                ));
                EXIT_OK
            }
            None => {
                text.push_str(&format!(
                    "exact_match: NotIsomorphic (nodes explored: {})\n",
                    result.nodes_explored
                ));
                EXIT_NOT_ISOMORPHIC
            }
        }
    };
    let _ = out.write_all(text.as_bytes());
    Ok(code)
}

fn describe_mapping(mapping: &CandidateMapping) -> String {
    let mut text = format!(
        "candidate_mapping: classes={}{}\n",
        mapping.classes.len(),
        if mapping.unique { ", unique" } else { "" }
    );
    for (a, b) in &mapping.classes {
        text.push_str(&format!("  {a:?} -> {b:?}\n"));
    }
    text
}

fn simulate(
    config: &ExperimentConfig,
    format: ReportFormat,
    output: Option<&Path>,
    artifact_dir: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let run = run_full_experiment(config).map_err(|e| match e {
        ExperimentError::Spectral { .. } | ExperimentError::WorkerPool(_) => Failure::computation(e.to_string()),
        ExperimentError::Generator(_) | ExperimentError::InvalidConfig(_) => Failure::input(e.to_string()),
    })?;
    let rendered = render_report(&run.report, format);
    match output {
        Some(path) => fs::write(path, &rendered).map_err(|e| io_failure("write", path, e))?,
        None => {
            let _ = out.write_all(rendered.as_bytes());
        }
    }
    if let Some(dir) = artifact_dir {
        let written = write_counterexamples(dir, &run.counterexamples).map_err(|e| io_failure("write to", dir, e))?;
        let _ = writeln!(
            err,
            "{} EVC false-positive pairs, {} files written to {}",
            run.counterexamples.len(),
            written.len(),
            dir.display()
        );
    }
    Ok(EXIT_OK)
}
