//! Exact isomorphism by backtracking.
//!
//! Vertices of the first graph are assigned highest degree first (ties by
//! ascending id). Each tentative image is checked against every vertex
//! assigned so far for edge/non-edge agreement, so a complete assignment is
//! an isomorphism. Refinement only shrinks the candidate images tried at each
//! step, which changes `nodes_explored` but never the verdict.

use thiserror::Error;

use crate::filter::CandidateMapping;
use crate::graph::{Graph, GraphError, VertexPermutation};

/// Largest vertex count [`brute_force_isomorphic`] accepts (8! = 40320
/// permutations).
pub const BRUTE_FORCE_MAX_N: usize = 8;

#[derive(Debug, Clone, Copy, Default)]
pub enum Refinement<'a> {
    /// Any unused vertex is a candidate image.
    None,
    /// Images must have the same degree.
    #[default]
    Degree,
    /// Images must have the same degree and lie in the paired EVC class.
    /// Only sound when the mapping came from genuinely matching EVC
    /// sequences of these two graphs.
    EvcClasses(&'a CandidateMapping),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub isomorphic: bool,
    /// First-graph vertex -> second-graph vertex; present iff isomorphic.
    pub witness: Option<VertexPermutation>,
    /// Tentative assignments attempted during the search.
    pub nodes_explored: u64,
}

impl MatchResult {
    fn negative(nodes_explored: u64) -> Self {
        MatchResult {
            isomorphic: false,
            witness: None,
            nodes_explored,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("brute force is limited to {BRUTE_FORCE_MAX_N} vertices, got {0}")]
    TooLarge(usize),
}

/// True iff `{u,v}` is an edge of `g1` exactly when `{f(u),f(v)}` is an edge
/// of `g2`.
pub fn verify_mapping(g1: &Graph, g2: &Graph, f: &VertexPermutation) -> Result<bool, GraphError> {
    if g1.n() != g2.n() {
        return Err(GraphError::SizeMismatch {
            first: g1.n(),
            second: g2.n(),
        });
    }
    if f.len() != g1.n() {
        return Err(GraphError::PermutationSize {
            expected: g1.n(),
            got: f.len(),
        });
    }
    Ok(g1.edge_count() == g2.edge_count()
        && g1
            .edges()
            .iter()
            .all(|&(u, v)| g2.has_edge(f.apply(u), f.apply(v))))
}

pub fn is_isomorphic(g1: &Graph, g2: &Graph, refinement: Refinement<'_>) -> MatchResult {
    let n = g1.n();
    if n != g2.n() || g1.edge_count() != g2.edge_count() {
        return MatchResult::negative(0);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| g1.degree(b).cmp(&g1.degree(a)).then(a.cmp(&b)));

    let allowed = candidate_filter(g1, g2, refinement);
    let mut search = Search {
        g1: Dense::new(g1),
        g2: Dense::new(g2),
        order: &order,
        allowed,
        image: vec![usize::MAX; n],
        used: vec![false; n],
        nodes: 0,
    };

    if search.extend(0) {
        let witness = VertexPermutation::new(search.image).expect("complete assignment is a bijection");
        MatchResult {
            isomorphic: true,
            witness: Some(witness),
            nodes_explored: search.nodes,
        }
    } else {
        MatchResult::negative(search.nodes)
    }
}

type Allowed = Box<dyn Fn(usize, usize) -> bool>;

fn candidate_filter(g1: &Graph, g2: &Graph, refinement: Refinement<'_>) -> Allowed {
    let degrees = |g: &Graph| (0..g.n()).map(|v| g.degree(v)).collect::<Vec<_>>();
    match refinement {
        Refinement::None => Box::new(|_, _| true),
        Refinement::Degree => {
            let (d1, d2) = (degrees(g1), degrees(g2));
            Box::new(move |v, w| d1[v] == d2[w])
        }
        Refinement::EvcClasses(mapping) => {
            let (d1, d2) = (degrees(g1), degrees(g2));
            let (c1, c2) = mapping.class_labels(g1.n());
            Box::new(move |v, w| d1[v] == d2[w] && c1[v].is_some() && c1[v] == c2[w])
        }
    }
}

struct Dense {
    n: usize,
    bits: Vec<bool>,
}

impl Dense {
    fn new(g: &Graph) -> Self {
        let n = g.n();
        let mut bits = vec![false; n * n];
        for &(u, v) in g.edges() {
            bits[u * n + v] = true;
            bits[v * n + u] = true;
        }
        Dense { n, bits }
    }

    fn adjacent(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.n + v]
    }
}

struct Search<'a> {
    g1: Dense,
    g2: Dense,
    order: &'a [usize],
    allowed: Allowed,
    image: Vec<usize>,
    used: Vec<bool>,
    nodes: u64,
}

impl Search<'_> {
    fn extend(&mut self, depth: usize) -> bool {
        let Some(&v) = self.order.get(depth) else {
            return true;
        };
        for w in 0..self.g2.n {
            if self.used[w] || !(self.allowed)(v, w) {
                continue;
            }
            self.nodes += 1;
            let consistent = self.order[..depth].iter().all(|&u| {
                self.g1.adjacent(u, v) == self.g2.adjacent(self.image[u], w)
            });
            if !consistent {
                continue;
            }
            self.image[v] = w;
            self.used[w] = true;
            if self.extend(depth + 1) {
                return true;
            }
            self.used[w] = false;
            self.image[v] = usize::MAX;
        }
        false
    }
}

/// Test oracle: tries every permutation. Limited to
/// [`BRUTE_FORCE_MAX_N`] vertices.
pub fn brute_force_isomorphic(g1: &Graph, g2: &Graph) -> Result<bool, OracleError> {
    let n = g1.n().max(g2.n());
    if n > BRUTE_FORCE_MAX_N {
        return Err(OracleError::TooLarge(n));
    }
    if g1.n() != g2.n() {
        return Ok(false);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let f = VertexPermutation::new(perm.clone()).expect("permutation of 0..n");
        if verify_mapping(g1, g2, &f).expect("sizes checked") {
            return Ok(true);
        }
        if !next_permutation(&mut perm) {
            return Ok(false);
        }
    }
}

/// Advances to the next permutation in lexicographic order.
fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(pivot) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let successor = perm
        .iter()
        .rposition(|&x| x > perm[pivot])
        .expect("a larger element exists right of the pivot");
    perm.swap(pivot, successor);
    perm[pivot + 1..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> Graph {
        Graph::cycle(3).disjoint_union(&Graph::cycle(3))
    }

    #[test]
    fn verify_examples() {
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (1, 4)]).unwrap();
        assert!(verify_mapping(&g, &g, &VertexPermutation::identity(5)).unwrap());

        let p = VertexPermutation::new(vec![4, 2, 0, 1, 3]).unwrap();
        assert!(verify_mapping(&g, &g.permute(&p).unwrap(), &p).unwrap());

        let fork = Graph::new(3, [(0, 1), (0, 2)]).unwrap();
        assert!(!verify_mapping(&Graph::path(3), &fork, &VertexPermutation::identity(3)).unwrap());
    }

    #[test]
    fn verify_size_mismatch() {
        assert!(verify_mapping(&Graph::path(3), &Graph::path(4), &VertexPermutation::identity(3)).is_err());
        assert!(verify_mapping(&Graph::path(3), &Graph::path(3), &VertexPermutation::identity(4)).is_err());
    }

    #[test]
    fn matcher_examples() {
        for mode in [Refinement::None, Refinement::Degree] {
            assert!(!is_isomorphic(&Graph::cycle(6), &two_triangles(), mode).isomorphic);
            assert!(!is_isomorphic(&Graph::path(4), &Graph::star(3), mode).isomorphic);
        }
        let g = Graph::new(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5)]).unwrap();
        let p = VertexPermutation::new(vec![5, 3, 1, 0, 2, 4]).unwrap();
        let h = g.permute(&p).unwrap();
        let result = is_isomorphic(&g, &h, Refinement::default());
        assert!(result.isomorphic);
        assert!(verify_mapping(&g, &h, result.witness.as_ref().unwrap()).unwrap());
    }

    #[test]
    fn count_mismatch_short_circuits() {
        let result = is_isomorphic(&Graph::cycle(4), &Graph::path(4), Refinement::None);
        assert_eq!(result, MatchResult::negative(0));
    }

    #[test]
    fn empty_graphs_are_isomorphic() {
        let r = is_isomorphic(&Graph::empty(0), &Graph::empty(0), Refinement::None);
        assert!(r.isomorphic);
        assert!(is_isomorphic(&Graph::empty(4), &Graph::empty(4), Refinement::Degree).isomorphic);
    }

    #[test]
    fn brute_force_examples() {
        assert!(brute_force_isomorphic(&Graph::complete(3), &Graph::cycle(3)).unwrap());
        let c4 = Graph::cycle(4);
        let p4_plus = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        assert!(!brute_force_isomorphic(&c4, &p4_plus).unwrap());
        assert!(!brute_force_isomorphic(&Graph::cycle(6), &two_triangles()).unwrap());
        assert_eq!(
            brute_force_isomorphic(&Graph::path(9), &Graph::path(9)),
            Err(OracleError::TooLarge(9))
        );
    }

    #[test]
    fn next_permutation_enumerates_all() {
        let mut perm = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut perm) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(perm, vec![3, 2, 1, 0]);
    }

    #[test]
    fn refinement_shrinks_search() {
        let g = Graph::new(7, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 5)]).unwrap();
        let p = VertexPermutation::new(vec![6, 4, 2, 0, 1, 3, 5]).unwrap();
        let h = g.permute(&p).unwrap();
        let none = is_isomorphic(&g, &h, Refinement::None);
        let degree = is_isomorphic(&g, &h, Refinement::Degree);
        assert!(none.isomorphic && degree.isomorphic);
        assert!(degree.nodes_explored <= none.nodes_explored);
    }
}
