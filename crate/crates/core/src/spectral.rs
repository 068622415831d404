//! Eigenvector centrality and spectral radius by power iteration.
//!
//! The iteration starts from the all-ones vector and repeats
//! `x <- A x / ||A x||` (Euclidean norm). It stops once `||A x||` changes by
//! at most `norm_tolerance` between consecutive steps and the iterate itself
//! moves by at most `vector_tolerance` (max-norm). The converged `||A x||` is
//! the spectral radius.
//!
//! Bipartite graphs have a spectrum symmetric about zero, so the iterate can
//! settle into a period-2 cycle while the norm converges. More generally the
//! residual alternates in sign whenever a negative eigenvalue dominates it.
//! When the two-step change has settled but consecutive iterates still
//! differ, or the plain iteration exhausts its budget, the computation is
//! restarted on `A + I` (same eigenvectors, spectrum shifted by one) and the
//! reported radius is the converged norm minus one.
//!
//! Disconnected graphs whose components have nearly equal spectral radii
//! converge slowly (the minor components decay geometrically with the ratio
//! of the radii), hence the generous default iteration budget.
//!
//! Every sum is taken over values sorted ascending. Relabeling the vertices
//! permutes the multiset of summands without changing it, so the iterates of a
//! relabeled graph are a bitwise-exact relabeling of the original iterates,
//! and both runs stop after the same number of steps.

use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error("eigenvector centrality is undefined for an edgeless graph")]
    Edgeless,
    #[error("power iteration did not converge within {max_iterations} iterations (shifted run included)")]
    NotConverged { max_iterations: usize },
    #[error("invalid convergence config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceConfig {
    /// Stop threshold on `| ||A x_{i+1}|| - ||A x_i|| |`.
    pub norm_tolerance: f64,
    /// Stop threshold on the max-norm of `x_{i+1} - x_i`.
    pub vector_tolerance: f64,
    /// Iteration budget for each of the plain and shifted runs.
    pub max_iterations: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            norm_tolerance: 1e-10,
            vector_tolerance: 1e-10,
            max_iterations: 100_000,
        }
    }
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<(), SpectralError> {
        if self.norm_tolerance.is_nan() || self.norm_tolerance <= 0.0 {
            return Err(SpectralError::InvalidConfig("norm_tolerance must be > 0"));
        }
        if self.vector_tolerance.is_nan() || self.vector_tolerance <= 0.0 {
            return Err(SpectralError::InvalidConfig("vector_tolerance must be > 0"));
        }
        if self.max_iterations == 0 {
            return Err(SpectralError::InvalidConfig("max_iterations must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvcResult {
    /// Unit-length (L2) centrality score per vertex.
    pub values: Vec<f64>,
    pub spectral_radius: f64,
    /// Matrix-vector products performed, over both runs when shifted.
    pub iterations: usize,
    pub vector_converged: bool,
    pub used_shift: bool,
}

impl EvcResult {
    /// Scores sorted non-increasing.
    pub fn sequence(&self) -> Vec<f64> {
        evc_sequence(self)
    }
}

/// Non-increasing listing of the per-vertex scores.
pub fn evc_sequence(result: &EvcResult) -> Vec<f64> {
    let mut sorted = result.values.clone();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    sorted
}

enum RunOutcome {
    Converged { x: Vec<f64>, norm: f64, iterations: usize },
    Oscillating { iterations: usize },
    Exhausted { iterations: usize },
}

pub fn power_iteration(g: &Graph, cfg: &ConvergenceConfig) -> Result<EvcResult, SpectralError> {
    cfg.validate()?;
    if g.edge_count() == 0 {
        return Err(SpectralError::Edgeless);
    }

    let first_run_iterations = match run(g, cfg, false) {
        RunOutcome::Converged { x, norm, iterations } => {
            return Ok(EvcResult {
                values: x,
                spectral_radius: norm,
                iterations,
                vector_converged: true,
                used_shift: false,
            });
        }
        RunOutcome::Oscillating { iterations } | RunOutcome::Exhausted { iterations } => iterations,
    };

    match run(g, cfg, true) {
        RunOutcome::Converged { x, norm, iterations } => Ok(EvcResult {
            values: x,
            spectral_radius: norm - 1.0,
            iterations: first_run_iterations + iterations,
            vector_converged: true,
            used_shift: true,
        }),
        _ => Err(SpectralError::NotConverged {
            max_iterations: cfg.max_iterations,
        }),
    }
}

fn run(g: &Graph, cfg: &ConvergenceConfig, shifted: bool) -> RunOutcome {
    let n = g.n();
    let mut x = vec![1.0; n];
    let mut before_x: Option<Vec<f64>> = None;
    let mut previous_norm: Option<f64> = None;
    let mut scratch = Vec::new();

    for iteration in 1..=cfg.max_iterations {
        let mut y: Vec<f64> = (0..n)
            .map(|v| {
                scratch.clear();
                scratch.extend(g.neighbors(v).iter().map(|&w| x[w]));
                if shifted {
                    scratch.push(x[v]);
                }
                sorted_sum(&mut scratch)
            })
            .collect();

        scratch.clear();
        scratch.extend(y.iter().map(|value| value * value));
        let norm = sorted_sum(&mut scratch).sqrt();
        for value in &mut y {
            *value /= norm;
        }

        let step = max_abs_diff(&y, &x);
        let norm_settled = previous_norm.is_some_and(|p| (norm - p).abs() <= cfg.norm_tolerance);
        if norm_settled {
            if step <= cfg.vector_tolerance {
                return RunOutcome::Converged {
                    x: y,
                    norm,
                    iterations: iteration,
                };
            }
            // Back where we were two steps ago while still moving between
            // consecutive steps: an alternating iterate.
            if !shifted
                && before_x
                    .as_ref()
                    .is_some_and(|b| max_abs_diff(&y, b) <= cfg.vector_tolerance)
            {
                return RunOutcome::Oscillating {
                    iterations: iteration,
                };
            }
        }

        previous_norm = Some(norm);
        before_x = Some(std::mem::replace(&mut x, y));
    }
    RunOutcome::Exhausted {
        iterations: cfg.max_iterations,
    }
}

/// Sums after sorting ascending, so the result depends only on the multiset.
fn sorted_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}
