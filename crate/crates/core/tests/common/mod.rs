//! Shared randomized-instance generators for the integration tests.

use csgraph::{FiniteGraph, VertexFunction};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random connected graph: spanning tree plus extra edges, measures in
/// [0.5, 2], weights in [0.1, 3].
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize) -> FiniteGraph {
    assert!(n >= 1);
    let vertices: Vec<(String, f64)> = (0..n)
        .map(|i| (format!("g{i:03}"), rng.gen_range(0.5..2.0)))
        .collect();
    let mut edges: Vec<(String, String, f64)> = Vec::new();
    let mut present = std::collections::HashSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        present.insert((j, i));
        edges.push((format!("g{j:03}"), format!("g{i:03}"), rng.gen_range(0.1..3.0)));
    }
    let extras = n / 2;
    for _ in 0..extras {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if present.insert(key) {
            edges.push((
                format!("g{:03}", key.0),
                format!("g{:03}", key.1),
                rng.gen_range(0.1..3.0),
            ));
        }
    }
    FiniteGraph::new(vertices, edges).expect("generated graph is valid")
}

pub fn random_function(rng: &mut ChaCha8Rng, g: &FiniteGraph, scale: f64) -> VertexFunction {
    let values: Vec<f64> = (0..g.vertex_count())
        .map(|_| rng.gen_range(-scale..scale))
        .collect();
    VertexFunction::new(g, values).expect("finite values")
}
