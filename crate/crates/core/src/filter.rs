//! Staged isomorphism precursor: vertex/edge counts, then degree sequence,
//! then eigenvector-centrality sequence, then a candidate vertex mapping.
//!
//! Each stage is a necessary condition for isomorphism, so a rejection is
//! final. Passing every stage only means "potentially isomorphic"; the
//! [`matcher`](crate::matcher) module decides.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DegreeSequence, Graph, VertexPermutation};
use crate::spectral::{power_iteration, ConvergenceConfig, EvcResult, SpectralError};

/// Default tolerance for comparing EVC sequences and grouping tied scores.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// EVC data for one graph: per-vertex scores plus their sorted listing.
#[derive(Debug, Clone, PartialEq)]
pub struct EvcProfile {
    pub values: Vec<f64>,
    pub sequence: Vec<f64>,
    pub spectral_radius: f64,
    pub iterations: usize,
    pub used_shift: bool,
}

impl From<EvcResult> for EvcProfile {
    fn from(result: EvcResult) -> Self {
        EvcProfile {
            sequence: result.sequence(),
            values: result.values,
            spectral_radius: result.spectral_radius,
            iterations: result.iterations,
            used_shift: result.used_shift,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSignature {
    pub n: usize,
    pub m: usize,
    pub degree_seq: DegreeSequence,
    /// Absent for edgeless graphs.
    pub evc: Option<EvcProfile>,
}

impl InvariantSignature {
    pub fn evc_seq(&self) -> Option<&[f64]> {
        self.evc.as_ref().map(|e| e.sequence.as_slice())
    }
}

pub fn signature(g: &Graph, cfg: &ConvergenceConfig) -> Result<InvariantSignature, SpectralError> {
    let evc = if g.edge_count() == 0 {
        None
    } else {
        Some(power_iteration(g, cfg)?.into())
    };
    Ok(InvariantSignature {
        n: g.n(),
        m: g.edge_count(),
        degree_seq: g.degree_sequence(),
        evc,
    })
}

/// Equal length and elementwise within `tol`.
pub fn sequences_equal(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Vertices of two graphs grouped by EVC score and paired class by class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateMapping {
    /// `(vertices of the first graph, vertices of the second graph)`, in
    /// order of decreasing score. Paired classes have equal sizes.
    pub classes: Vec<(Vec<usize>, Vec<usize>)>,
    /// Every class is a singleton, so the classes spell out a bijection.
    pub unique: bool,
}

impl CandidateMapping {
    /// The bijection first-graph vertex -> second-graph vertex, when unique.
    pub fn bijection(&self) -> Option<VertexPermutation> {
        if !self.unique {
            return None;
        }
        let mut mapping = vec![0; self.classes.len()];
        for (left, right) in &self.classes {
            mapping[left[0]] = right[0];
        }
        VertexPermutation::new(mapping).ok()
    }

    /// Class index of every vertex, for the first and second graph.
    pub fn class_labels(&self, n: usize) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
        let mut first = vec![None; n];
        let mut second = vec![None; n];
        for (class, (left, right)) in self.classes.iter().enumerate() {
            for &v in left {
                if let Some(slot) = first.get_mut(v) {
                    *slot = Some(class);
                }
            }
            for &v in right {
                if let Some(slot) = second.get_mut(v) {
                    *slot = Some(class);
                }
            }
        }
        (first, second)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("tie tolerance groups the two graphs' scores into differently sized classes")]
    ClassMismatch,
}

/// Groups each graph's vertices into runs of scores whose consecutive gaps
/// are within `tol` and pairs the runs positionally.
pub fn candidate_mapping(
    first: &EvcProfile,
    second: &EvcProfile,
    tol: f64,
) -> Result<CandidateMapping, MappingError> {
    let left = tie_classes(&first.values, tol);
    let right = tie_classes(&second.values, tol);
    if left.len() != right.len() || left.iter().zip(&right).any(|(a, b)| a.len() != b.len()) {
        return Err(MappingError::ClassMismatch);
    }
    let unique = left.iter().all(|class| class.len() == 1);
    Ok(CandidateMapping {
        classes: left.into_iter().zip(right).collect(),
        unique,
    })
}

fn tie_classes(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut previous: Option<f64> = None;
    for v in order {
        match (previous, classes.last_mut()) {
            (Some(p), Some(class)) if p - values[v] <= tol => class.push(v),
            _ => classes.push(vec![v]),
        }
        previous = Some(values[v]);
    }
    for class in &mut classes {
        class.sort_unstable();
    }
    classes
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterVerdict {
    RejectedByCounts,
    RejectedByDegreeSeq,
    RejectedByEvcSeq,
    PotentiallyIsomorphic(CandidateMapping),
    /// Both graphs edgeless on the same number of vertices.
    TriviallyIsomorphic,
}

impl FilterVerdict {
    pub fn passed(&self) -> bool {
        matches!(
            self,
            FilterVerdict::PotentiallyIsomorphic(_) | FilterVerdict::TriviallyIsomorphic
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            FilterVerdict::RejectedByCounts => "RejectedByCounts",
            FilterVerdict::RejectedByDegreeSeq => "RejectedByDegreeSeq",
            FilterVerdict::RejectedByEvcSeq => "RejectedByEvcSeq",
            FilterVerdict::PotentiallyIsomorphic(_) => "PotentiallyIsomorphic",
            FilterVerdict::TriviallyIsomorphic => "TriviallyIsomorphic",
        }
    }
}

/// Runs the staged filter on two graphs. EVC is only computed when the count
/// and degree stages pass.
pub fn compare(
    g1: &Graph,
    g2: &Graph,
    cfg: &ConvergenceConfig,
    tol: f64,
) -> Result<FilterVerdict, SpectralError> {
    SignatureCache::new([g1, g2], *cfg).compare(0, 1, tol)
}

/// Lazily computed per-graph signatures for pairwise screening of a
/// collection. Degree sequences are computed up front; EVC at most once per
/// graph, on first demand, and safely from several threads.
pub struct SignatureCache<'g> {
    graphs: Vec<&'g Graph>,
    degrees: Vec<DegreeSequence>,
    evc: Vec<OnceLock<Result<EvcProfile, SpectralError>>>,
    cfg: ConvergenceConfig,
    evc_computations: AtomicUsize,
}

impl<'g> SignatureCache<'g> {
    pub fn new<I>(graphs: I, cfg: ConvergenceConfig) -> Self
    where
        I: IntoIterator<Item = &'g Graph>,
    {
        let graphs: Vec<&Graph> = graphs.into_iter().collect();
        let degrees = graphs.iter().map(|g| g.degree_sequence()).collect();
        let evc = graphs.iter().map(|_| OnceLock::new()).collect();
        SignatureCache {
            graphs,
            degrees,
            evc,
            cfg,
            evc_computations: AtomicUsize::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graph(&self, i: usize) -> &'g Graph {
        self.graphs[i]
    }

    pub fn degree_sequence(&self, i: usize) -> &DegreeSequence {
        &self.degrees[i]
    }

    /// Number of power-iteration runs performed so far.
    pub fn evc_computations(&self) -> usize {
        self.evc_computations.load(Ordering::Relaxed)
    }

    /// Whether graph `i` has had its EVC computed (successfully or not).
    pub fn evc_computed(&self, i: usize) -> bool {
        self.evc[i].get().is_some()
    }

    /// Cached EVC error for graph `i`, if its computation failed.
    pub fn evc_error(&self, i: usize) -> Option<&SpectralError> {
        self.evc[i].get().and_then(|r| r.as_ref().err())
    }

    pub fn evc(&self, i: usize) -> Result<&EvcProfile, SpectralError> {
        self.evc[i]
            .get_or_init(|| {
                self.evc_computations.fetch_add(1, Ordering::Relaxed);
                power_iteration(self.graphs[i], &self.cfg).map(EvcProfile::from)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn signature(&self, i: usize) -> Result<InvariantSignature, SpectralError> {
        let g = self.graphs[i];
        let evc = if g.edge_count() == 0 {
            None
        } else {
            Some(self.evc(i)?.clone())
        };
        Ok(InvariantSignature {
            n: g.n(),
            m: g.edge_count(),
            degree_seq: self.degrees[i].clone(),
            evc,
        })
    }

    pub fn compare(&self, i: usize, j: usize, tol: f64) -> Result<FilterVerdict, SpectralError> {
        let (a, b) = (self.graphs[i], self.graphs[j]);
        if a.n() != b.n() || a.edge_count() != b.edge_count() {
            return Ok(FilterVerdict::RejectedByCounts);
        }
        if a.edge_count() == 0 {
            return Ok(FilterVerdict::TriviallyIsomorphic);
        }
        if self.degrees[i] != self.degrees[j] {
            return Ok(FilterVerdict::RejectedByDegreeSeq);
        }
        let (first, second) = (self.evc(i)?, self.evc(j)?);
        if !sequences_equal(&first.sequence, &second.sequence, tol) {
            return Ok(FilterVerdict::RejectedByEvcSeq);
        }
        Ok(match candidate_mapping(first, second, tol) {
            Ok(mapping) => FilterVerdict::PotentiallyIsomorphic(mapping),
            Err(MappingError::ClassMismatch) => FilterVerdict::RejectedByEvcSeq,
        })
    }
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;

    fn cfg() -> ConvergenceConfig {
        ConvergenceConfig::default()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        sequences_equal(a, b, 1e-5)
    }

    #[test]
    fn signature_examples() {
        let k3 = signature(&Graph::complete(3), &cfg()).unwrap();
        assert_eq!((k3.n, k3.m), (3, 3));
        assert_eq!(k3.degree_seq.values(), &[2, 2, 2]);
        assert!(close(k3.evc_seq().unwrap(), &[0.57735; 3]));

        let isolated = signature(&Graph::empty(2), &cfg()).unwrap();
        assert_eq!((isolated.n, isolated.m), (2, 0));
        assert_eq!(isolated.degree_seq.values(), &[0, 0]);
        assert!(isolated.evc.is_none());

        let star = signature(&Graph::star(4), &cfg()).unwrap();
        assert_eq!(star.degree_seq.values(), &[4, 1, 1, 1, 1]);
        assert!(close(
            star.evc_seq().unwrap(),
            &[0.70711, 0.35355, 0.35355, 0.35355, 0.35355]
        ));
    }

    #[test]
    fn sequence_equality_examples() {
        assert!(sequences_equal(&[0.5, 0.5], &[0.5, 0.5], 1e-6));
        assert!(!sequences_equal(&[0.5, 0.5], &[0.5], 1e-6));
        let a = [0.7071105, 0.5, 0.5];
        let b = [0.7071100, 0.5, 0.5];
        assert!(sequences_equal(&a, &b, 1e-6));
        assert!(!sequences_equal(&a, &b, 1e-7));
        // A 1e-5 gap is outside the default tolerance.
        assert!(!sequences_equal(&[0.70711, 0.5], &[0.70710, 0.5], 1e-6));
    }

    #[test]
    fn compare_stages() {
        let c = cfg();
        assert_eq!(
            compare(&Graph::cycle(4), &Graph::path(4), &c, DEFAULT_TOLERANCE).unwrap(),
            FilterVerdict::RejectedByCounts
        );
        assert_eq!(
            compare(&Graph::path(4), &Graph::star(3), &c, DEFAULT_TOLERANCE).unwrap(),
            FilterVerdict::RejectedByDegreeSeq
        );
        assert_eq!(
            compare(&Graph::empty(3), &Graph::empty(3), &c, DEFAULT_TOLERANCE).unwrap(),
            FilterVerdict::TriviallyIsomorphic
        );
        assert_eq!(
            compare(&Graph::empty(3), &Graph::path(3), &c, DEFAULT_TOLERANCE).unwrap(),
            FilterVerdict::RejectedByCounts
        );
    }

    #[test]
    fn regular_graphs_pass_the_filter() {
        let c6 = Graph::cycle(6);
        let two_triangles = Graph::cycle(3).disjoint_union(&Graph::cycle(3));
        let verdict = compare(&c6, &two_triangles, &cfg(), DEFAULT_TOLERANCE).unwrap();
        let FilterVerdict::PotentiallyIsomorphic(mapping) = verdict else {
            panic!("expected a pass, got {verdict:?}");
        };
        assert_eq!(mapping.classes.len(), 1);
        assert!(!mapping.unique);
    }

    #[test]
    fn degree_rejection_skips_evc() {
        let (p4, star) = (Graph::path(4), Graph::star(3));
        let cache = SignatureCache::new([&p4, &star], cfg());
        assert_eq!(
            cache.compare(0, 1, DEFAULT_TOLERANCE).unwrap(),
            FilterVerdict::RejectedByDegreeSeq
        );
        assert_eq!(cache.evc_computations(), 0);
        assert!(!cache.evc_computed(0));
    }

    #[test]
    fn cache_computes_each_evc_once() {
        let graphs = [Graph::cycle(5), Graph::cycle(5), Graph::cycle(5)];
        let cache = SignatureCache::new(&graphs, cfg());
        for (i, j) in [(0, 1), (0, 2), (1, 2), (1, 0)] {
            assert!(cache.compare(i, j, DEFAULT_TOLERANCE).unwrap().passed());
        }
        assert_eq!(cache.evc_computations(), 3);
    }

    #[test]
    fn k4_mapping_is_one_tied_class() {
        let profile: EvcProfile = power_iteration(&Graph::complete(4), &cfg()).unwrap().into();
        let mapping = candidate_mapping(&profile, &profile, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(mapping.classes, vec![(vec![0, 1, 2, 3], vec![0, 1, 2, 3])]);
        assert!(!mapping.unique);
        assert!(mapping.bijection().is_none());
    }

    #[test]
    fn star_mapping_pairs_centers() {
        let star = Graph::star(4);
        let p = VertexPermutation::new(vec![3, 0, 1, 2, 4]).unwrap();
        let moved = star.permute(&p).unwrap();
        let FilterVerdict::PotentiallyIsomorphic(mapping) =
            compare(&star, &moved, &cfg(), DEFAULT_TOLERANCE).unwrap()
        else {
            panic!("relabeled star must pass");
        };
        assert_eq!(
            mapping.classes,
            vec![(vec![0], vec![3]), (vec![1, 2, 3, 4], vec![0, 1, 2, 4])]
        );
        assert!(!mapping.unique);
    }

    #[test]
    fn class_mismatch_is_detected() {
        let profile = |values: Vec<f64>| EvcProfile {
            sequence: values.clone(),
            values,
            spectral_radius: 1.0,
            iterations: 1,
            used_shift: false,
        };
        // Gaps of 0.6e-6 chain into one class; 1.2e-6 splits into two.
        let a = profile(vec![0.5, 0.5 - 0.6e-6, 0.5 - 1.2e-6]);
        let b = profile(vec![0.5, 0.5, 0.5 - 1.2e-6]);
        assert_eq!(
            candidate_mapping(&a, &b, DEFAULT_TOLERANCE),
            Err(MappingError::ClassMismatch)
        );
    }

    #[test]
    fn unique_mapping_yields_bijection() {
        let profile = |values: Vec<f64>| EvcProfile {
            sequence: vec![],
            values,
            spectral_radius: 1.0,
            iterations: 1,
            used_shift: false,
        };
        let a = profile(vec![0.1, 0.3, 0.2]);
        let b = profile(vec![0.3, 0.2, 0.1]);
        let mapping = candidate_mapping(&a, &b, DEFAULT_TOLERANCE).unwrap();
        assert!(mapping.unique);
        assert_eq!(mapping.bijection().unwrap().as_slice(), &[2, 0, 1]);
    }
}
