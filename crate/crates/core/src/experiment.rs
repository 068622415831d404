//! Random-graph screening study: for each link probability, generate a suite
//! of Erdős–Rényi graphs, screen every unordered pair through the staged
//! filter, confirm the EVC-flagged pairs exactly, and count false positives
//! of the degree-only and EVC precursors.
//!
//! Reports are deterministic for a given config: the suite seeds are derived
//! from the master seed, counting is order-independent, and timing is only
//! recorded on request.

use std::fs;
use std::io;
use std::ops::Add;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::{FilterVerdict, SignatureCache, DEFAULT_TOLERANCE};
use crate::generator::{derive_seed, suite, GeneratorError};
use crate::graph::Graph;
use crate::matcher::{is_isomorphic, Refinement};
use crate::spectral::{ConvergenceConfig, SpectralError};

/// Master seed of the canonical reproduction run.
pub const DEFAULT_MASTER_SEED: u64 = 20_160_425;
pub const DEFAULT_N: usize = 10;
pub const DEFAULT_SUITE_SIZE: usize = 1000;

/// Link probabilities 0.2, 0.3, ..., 0.8.
pub fn default_p_list() -> Vec<f64> {
    (2..=8).map(|k| k as f64 / 10.0).collect()
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("EVC failed for graph {graph_index} of the p_link={p_link} suite: {source}")]
    Spectral {
        p_link: f64,
        graph_index: usize,
        #[source]
        source: SpectralError,
    },
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("could not build worker pool: {0}")]
    WorkerPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub convergence: ConvergenceConfig,
    /// EVC sequence equality and tie-class tolerance.
    pub tolerance: f64,
    /// Also run exact matching on every degree-flagged pair.
    pub confirm_all_degree: bool,
    pub record_timing: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            convergence: ConvergenceConfig::default(),
            tolerance: DEFAULT_TOLERANCE,
            confirm_all_degree: false,
            record_timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p_list: Vec<f64>,
    pub suite_size: usize,
    pub master_seed: u64,
    pub options: SuiteOptions,
    /// Worker threads; `None` uses the global rayon pool. Does not affect
    /// the report.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: DEFAULT_N,
            p_list: default_p_list(),
            suite_size: DEFAULT_SUITE_SIZE,
            master_seed: DEFAULT_MASTER_SEED,
            options: SuiteOptions::default(),
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub n: usize,
    pub p_link: f64,
    pub suite_size: usize,
    pub pairs_total: u64,
    pub count_matched: u64,
    pub degree_flagged: u64,
    pub evc_flagged: u64,
    pub confirmed: u64,
    pub degree_false_positives: u64,
    pub evc_false_positives: u64,
    pub evc_computations: u64,
    /// Exactly isomorphic pairs among the degree-flagged ones; only with
    /// `confirm_all_degree`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_confirmed: Option<u64>,
    /// Seconds; `null` unless timing was requested.
    pub wall_time: Option<f64>,
}

impl SuiteReport {
    /// `confirmed <= evc_flagged <= degree_flagged <= count_matched <= pairs_total`
    /// plus the false-positive definitions.
    pub fn containment_holds(&self) -> bool {
        let chain = self.confirmed <= self.evc_flagged
            && self.evc_flagged <= self.degree_flagged
            && self.degree_flagged <= self.count_matched
            && self.count_matched <= self.pairs_total;
        let size = self.suite_size as u64;
        chain
            && self.pairs_total == size * size.saturating_sub(1) / 2
            && self.degree_false_positives == self.degree_flagged - self.confirmed
            && self.evc_false_positives == self.evc_flagged - self.confirmed
            && self.degree_confirmed.is_none_or(|d| d == self.confirmed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub p_list: Vec<f64>,
    pub suite_size: usize,
    pub tolerance: f64,
    pub norm_tolerance: f64,
    pub vector_tolerance: f64,
    pub max_iterations: usize,
    pub confirm_all_degree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub master_seed: u64,
    pub config: ConfigEcho,
    pub suites: Vec<SuiteReport>,
}

/// A pair that passed the EVC stage but is not isomorphic.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub p_link: f64,
    pub first_index: usize,
    pub second_index: usize,
    pub first: Graph,
    pub second: Graph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRun {
    pub report: SuiteReport,
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Debug, Default)]
struct Tally {
    count_matched: u64,
    degree_flagged: u64,
    evc_flagged: u64,
    confirmed: u64,
    degree_confirmed: u64,
    false_positive_pairs: Vec<(usize, usize)>,
}

impl Add for Tally {
    type Output = Tally;

    fn add(mut self, mut other: Tally) -> Tally {
        self.count_matched += other.count_matched;
        self.degree_flagged += other.degree_flagged;
        self.evc_flagged += other.evc_flagged;
        self.confirmed += other.confirmed;
        self.degree_confirmed += other.degree_confirmed;
        self.false_positive_pairs.append(&mut other.false_positive_pairs);
        self
    }
}

/// Screens every unordered pair of `graphs`. `n` and `p_link` are only
/// echoed into the report, so hand-built collections can be evaluated too.
pub fn evaluate_suite(
    graphs: &[Graph],
    n: usize,
    p_link: f64,
    options: &SuiteOptions,
) -> Result<SuiteRun, ExperimentError> {
    let started = Instant::now();
    let cache = SignatureCache::new(graphs, options.convergence);

    let tally = (0..graphs.len())
        .into_par_iter()
        .map(|i| -> Result<Tally, SpectralError> {
            let mut tally = Tally::default();
            for j in i + 1..graphs.len() {
                classify_pair(&cache, i, j, options, &mut tally)?;
            }
            Ok(tally)
        })
        .try_reduce(Tally::default, |a, b| Ok(a + b));

    let mut tally = tally.map_err(|source| {
        // Report the lowest failing index so the error does not depend on
        // thread scheduling.
        let graph_index = (0..graphs.len())
            .find(|&i| cache.evc_error(i).is_some())
            .unwrap_or(0);
        ExperimentError::Spectral {
            p_link,
            graph_index,
            source: cache.evc_error(graph_index).cloned().unwrap_or(source),
        }
    })?;
    tally.false_positive_pairs.sort_unstable();

    let size = graphs.len() as u64;
    let report = SuiteReport {
        n,
        p_link,
        suite_size: graphs.len(),
        pairs_total: size * size.saturating_sub(1) / 2,
        count_matched: tally.count_matched,
        degree_flagged: tally.degree_flagged,
        evc_flagged: tally.evc_flagged,
        confirmed: tally.confirmed,
        degree_false_positives: tally.degree_flagged - tally.confirmed,
        evc_false_positives: tally.evc_flagged - tally.confirmed,
        evc_computations: cache.evc_computations() as u64,
        degree_confirmed: options.confirm_all_degree.then_some(tally.degree_confirmed),
        wall_time: options
            .record_timing
            .then(|| started.elapsed().as_secs_f64()),
    };
    let counterexamples = tally
        .false_positive_pairs
        .into_iter()
        .map(|(i, j)| Counterexample {
            p_link,
            first_index: i,
            second_index: j,
            first: graphs[i].clone(),
            second: graphs[j].clone(),
        })
        .collect();
    Ok(SuiteRun {
        report,
        counterexamples,
    })
}

fn classify_pair(
    cache: &SignatureCache<'_>,
    i: usize,
    j: usize,
    options: &SuiteOptions,
    tally: &mut Tally,
) -> Result<(), SpectralError> {
    let verdict = cache.compare(i, j, options.tolerance)?;
    let degree_passed = match &verdict {
        FilterVerdict::RejectedByCounts => return Ok(()),
        FilterVerdict::RejectedByDegreeSeq => {
            tally.count_matched += 1;
            return Ok(());
        }
        FilterVerdict::RejectedByEvcSeq => false,
        FilterVerdict::PotentiallyIsomorphic(_) | FilterVerdict::TriviallyIsomorphic => true,
    };
    tally.count_matched += 1;
    tally.degree_flagged += 1;

    let (a, b) = (cache.graph(i), cache.graph(j));
    if options.confirm_all_degree && is_isomorphic(a, b, Refinement::Degree).isomorphic {
        tally.degree_confirmed += 1;
    }
    if !degree_passed {
        return Ok(());
    }

    tally.evc_flagged += 1;
    let isomorphic = match &verdict {
        FilterVerdict::PotentiallyIsomorphic(mapping) => {
            is_isomorphic(a, b, Refinement::EvcClasses(mapping)).isomorphic
        }
        _ => true,
    };
    if isomorphic {
        tally.confirmed += 1;
    } else {
        tally.false_positive_pairs.push((i, j));
    }
    Ok(())
}

/// Generates the suite for `p_link` from `seed` and evaluates it.
pub fn run_suite_experiment(
    n: usize,
    p_link: f64,
    suite_size: usize,
    seed: u64,
    options: &SuiteOptions,
) -> Result<SuiteRun, ExperimentError> {
    let graphs = suite(n, p_link, suite_size, seed)?;
    evaluate_suite(&graphs, n, p_link, options)
}

/// Seed of the suite at position `p_index` of the sweep.
pub fn suite_seed(master_seed: u64, p_index: usize) -> u64 {
    derive_seed(master_seed, p_index as u64)
}

pub fn run_full_experiment(config: &ExperimentConfig) -> Result<ExperimentRun, ExperimentError> {
    validate(config)?;
    let work = || -> Result<ExperimentRun, ExperimentError> {
        let mut suites = Vec::with_capacity(config.p_list.len());
        let mut counterexamples = Vec::new();
        for (index, &p_link) in config.p_list.iter().enumerate() {
            let run = run_suite_experiment(
                config.n,
                p_link,
                config.suite_size,
                suite_seed(config.master_seed, index),
                &config.options,
            )?;
            suites.push(run.report);
            counterexamples.extend(run.counterexamples);
        }
        Ok(ExperimentRun {
            report: ExperimentReport {
                master_seed: config.master_seed,
                config: echo(config),
                suites,
            },
            counterexamples,
        })
    };
    match config.workers {
        None => work(),
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| ExperimentError::WorkerPool(e.to_string()))?
            .install(work),
    }
}

fn validate(config: &ExperimentConfig) -> Result<(), ExperimentError> {
    let invalid = |msg: &str| Err(ExperimentError::InvalidConfig(msg.to_string()));
    if config.p_list.is_empty() {
        return invalid("p_list is empty");
    }
    if config.p_list.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return invalid("every p_link must lie in [0, 1]");
    }
    if config.p_list.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("p_list must be strictly increasing");
    }
    if config.workers == Some(0) {
        return invalid("workers must be >= 1");
    }
    if config.options.tolerance.is_nan() || config.options.tolerance < 0.0 {
        return invalid("tolerance must be >= 0");
    }
    config
        .options
        .convergence
        .validate()
        .or_else(|e| invalid(&e.to_string()))
}

fn echo(config: &ExperimentConfig) -> ConfigEcho {
    let convergence = &config.options.convergence;
    ConfigEcho {
        n: config.n,
        p_list: config.p_list.clone(),
        suite_size: config.suite_size,
        tolerance: config.options.tolerance,
        norm_tolerance: convergence.norm_tolerance,
        vector_tolerance: convergence.vector_tolerance,
        max_iterations: convergence.max_iterations,
        confirm_all_degree: config.options.confirm_all_degree,
    }
}

/// Writes each counterexample pair as two edge-list files in `dir`.
pub fn write_counterexamples(dir: &Path, counterexamples: &[Counterexample]) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for c in counterexamples {
        for (tag, index, graph) in [("a", c.first_index, &c.first), ("b", c.second_index, &c.second)] {
            let name = format!(
                "evc_fp_p{:.2}_{:05}_{:05}_{tag}_{index:05}.txt",
                c.p_link, c.first_index, c.second_index
            );
            let path = dir.join(name);
            fs::write(&path, graph.to_edge_list())?;
            written.push(path);
        }
    }
    Ok(written)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Table,
    Csv,
}

pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_string_pretty(report).expect("report serializes");
            out.push('\n');
            out
        }
        ReportFormat::Table => render_table(report),
        ReportFormat::Csv => render_csv(report),
    }
}

pub fn parse_report(json: &str) -> serde_json::Result<ExperimentReport> {
    serde_json::from_str(json)
}

fn render_table(report: &ExperimentReport) -> String {
    let mut out = format!(
        "n={} suite_size={} master_seed={}\n",
        report.config.n, report.config.suite_size, report.master_seed
    );
    out.push_str(&format!(
        "{:>6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
        "p_link", "pairs", "counts_eq", "degree_eq", "evc_eq", "confirmed", "degree_fp", "evc_fp", "evc_runs"
    ));
    for s in &report.suites {
        out.push_str(&format!(
            "{:>6.2} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
            s.p_link,
            s.pairs_total,
            s.count_matched,
            s.degree_flagged,
            s.evc_flagged,
            s.confirmed,
            s.degree_false_positives,
            s.evc_false_positives,
            s.evc_computations
        ));
    }
    out
}

fn render_csv(report: &ExperimentReport) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for suite in &report.suites {
        writer.serialize(suite).expect("in-memory csv write");
    }
    let bytes = writer.into_inner().expect("in-memory csv flush");
    String::from_utf8(bytes).expect("csv output is utf-8")
}
