//! Example graphs used in tests and shipped as JSON under `graphs/`.
//!
//! Each graph comes in a unit-measure and a non-unit-measure variant.

use crate::graph::FiniteGraph;

/// Two vertices joined by one edge.
pub fn k2() -> FiniteGraph {
    FiniteGraph::new(
        vec![("x1".into(), 1.0), ("x2".into(), 1.0)],
        vec![("x1".into(), "x2".into(), 1.0)],
    )
    .expect("static fixture")
}

/// K2 with measure (2, 1).
pub fn k2_mu() -> FiniteGraph {
    FiniteGraph::new(
        vec![("x1".into(), 2.0), ("x2".into(), 1.0)],
        vec![("x1".into(), "x2".into(), 1.0)],
    )
    .expect("static fixture")
}

/// Path on four vertices.
pub fn p4() -> FiniteGraph {
    path4(&[1.0, 1.0, 1.0, 1.0])
}

/// Path on four vertices with uneven measure.
pub fn p4_mu() -> FiniteGraph {
    path4(&[0.5, 2.0, 1.5, 1.0])
}

fn path4(mu: &[f64; 4]) -> FiniteGraph {
    let vertices = (1..=4).map(|i| (format!("v{i}"), mu[i - 1])).collect();
    let edges = (1..4)
        .map(|i| (format!("v{i}"), format!("v{}", i + 1), 1.0))
        .collect();
    FiniteGraph::new(vertices, edges).expect("static fixture")
}

/// 4x4 torus lattice (periodic grid), 16 vertices and 32 edges.
pub fn torus4x4() -> FiniteGraph {
    torus(|_, _| 1.0)
}

/// Torus with a smoothly varying measure in (0.5, 2).
pub fn torus4x4_mu() -> FiniteGraph {
    torus(|r, c| 1.0 + 0.5 * ((r as f64 - 1.5) / 1.5) + 0.25 * ((c % 2) as f64))
}

fn torus(mu: impl Fn(usize, usize) -> f64) -> FiniteGraph {
    let id = |r: usize, c: usize| format!("t{r}{c}");
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for r in 0..4 {
        for c in 0..4 {
            vertices.push((id(r, c), mu(r, c)));
            edges.push((id(r, c), id(r, (c + 1) % 4), 1.0));
            edges.push((id(r, c), id((r + 1) % 4, c), 1.0));
        }
    }
    FiniteGraph::new(vertices, edges).expect("static fixture")
}

/// Petersen graph: outer 5-cycle, inner pentagram, spokes.
pub fn petersen() -> FiniteGraph {
    petersen_with(|_| 1.0)
}

/// Petersen graph with alternating measure.
pub fn petersen_mu() -> FiniteGraph {
    petersen_with(|i| if i % 2 == 0 { 0.5 } else { 1.5 })
}

fn petersen_with(mu: impl Fn(usize) -> f64) -> FiniteGraph {
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for i in 0..5 {
        vertices.push((format!("o{i}"), mu(i)));
        vertices.push((format!("i{i}"), mu(i + 5)));
        edges.push((format!("o{i}"), format!("o{}", (i + 1) % 5), 1.0));
        edges.push((format!("i{i}"), format!("i{}", (i + 2) % 5), 1.0));
        edges.push((format!("o{i}"), format!("i{i}"), 1.0));
    }
    FiniteGraph::new(vertices, edges).expect("static fixture")
}

/// All fixtures with their conventional names.
pub fn all() -> Vec<(&'static str, FiniteGraph)> {
    vec![
        ("k2", k2()),
        ("k2_mu", k2_mu()),
        ("p4", p4()),
        ("p4_mu", p4_mu()),
        ("torus4x4", torus4x4()),
        ("torus4x4_mu", torus4x4_mu()),
        ("petersen", petersen()),
        ("petersen_mu", petersen_mu()),
    ]
}
