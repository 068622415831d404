#![allow(dead_code)]

use evciso::graph::{Graph, VertexPermutation};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;

/// Perron vector (sorted non-increasing, unit L2) and largest eigenvalue from
/// a dense symmetric eigendecomposition. Only meaningful when the top
/// eigenvalue is simple, e.g. for connected graphs.
pub fn dense_perron(g: &Graph) -> (Vec<f64>, f64) {
    let n = g.n();
    let matrix = g.adjacency_matrix();
    let a = DMatrix::from_fn(n, n, |i, j| matrix[i][j] as f64);
    let eigen = SymmetricEigen::new(a);
    let top = (0..n)
        .max_by(|&i, &j| eigen.eigenvalues[i].total_cmp(&eigen.eigenvalues[j]))
        .unwrap();
    let column = eigen.eigenvectors.column(top);
    let norm = column.norm();
    let mut values: Vec<f64> = column.iter().map(|x| x.abs() / norm).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    (values, eigen.eigenvalues[top])
}

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

pub fn random_connected<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    loop {
        let g = random_graph(rng, n, p);
        if g.edge_count() > 0 && g.is_connected() {
            return g;
        }
    }
}

/// Uniformly random attachment tree, then randomly relabeled.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    let tree = Graph::new(n, edges).unwrap();
    tree.permute(&random_permutation(rng, n)).unwrap()
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> VertexPermutation {
    let mut mapping: Vec<usize> = (0..n).collect();
    mapping.shuffle(rng);
    VertexPermutation::new(mapping).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
