//! Eigenvector-centrality screening for graph isomorphism.
//!
//! Two graphs can only be isomorphic if they agree on vertex and edge counts,
//! on their sorted degree sequences and on their sorted eigenvector-centrality
//! (EVC) sequences. [`filter::compare`] checks these in order of cost and,
//! when all pass, pairs the vertices by EVC score. [`matcher::is_isomorphic`]
//! then settles the question exactly, optionally restricted by that pairing.
//!
//! ```
//! use evciso::{compare, is_isomorphic, ConvergenceConfig, FilterVerdict, Graph, Refinement};
//! use evciso::graph::VertexPermutation;
//!
//! let g = Graph::star(4);
//! let h = g.permute(&VertexPermutation::new(vec![2, 0, 1, 3, 4]).unwrap()).unwrap();
//! let verdict = compare(&g, &h, &ConvergenceConfig::default(), 1e-6).unwrap();
//! let FilterVerdict::PotentiallyIsomorphic(mapping) = verdict else { unreachable!() };
//! assert!(is_isomorphic(&g, &h, Refinement::EvcClasses(&mapping)).isomorphic);
//! ```

pub mod experiment;
pub mod filter;
pub mod generator;
pub mod graph;
pub mod matcher;
pub mod spectral;

pub use filter::{compare, CandidateMapping, FilterVerdict, InvariantSignature, DEFAULT_TOLERANCE};
pub use graph::{parse_graph, Graph, GraphError};
pub use matcher::{is_isomorphic, MatchResult, Refinement};
pub use spectral::{power_iteration, ConvergenceConfig, EvcResult, SpectralError};
