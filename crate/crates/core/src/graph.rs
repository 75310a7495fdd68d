//! Finite weighted graphs and their discrete calculus.
//!
//! A graph carries a positive vertex measure `mu` and positive symmetric
//! edge weights. The mu-Laplacian is
//!
//! ```text
//! (Lu)(x) = (1/mu(x)) * sum_{y ~ x} w_xy * (u(y) - u(x))
//! ```
//!
//! with the associated gradient form, gradient length, integral against
//! `mu`, and normalized Dirac masses. Vertices are kept in canonical
//! (lexicographic) id order so every array layout and serialized output
//! is deterministic.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Connected weighted graph with vertex measure.
///
/// Immutable after construction; all solver state lives elsewhere.
#[derive(Debug, Clone)]
pub struct FiniteGraph {
    ids: Vec<String>,
    mu: Vec<f64>,
    /// Adjacency lists: `adj[x]` holds `(y, w_xy)` sorted by `y`.
    adj: Vec<Vec<(usize, f64)>>,
    /// Undirected edge list with `u < v`, sorted.
    edges: Vec<(usize, usize, f64)>,
    index: HashMap<String, usize>,
    total_measure: f64,
}

impl FiniteGraph {
    /// Builds a graph from `(id, mu)` vertices and `(id_u, id_v, w)` edges.
    ///
    /// Rejects empty graphs, duplicate ids, non-positive `mu` or weights,
    /// self-loops, duplicate edges, and disconnected graphs.
    pub fn new(
        vertices: Vec<(String, f64)>,
        edges: Vec<(String, String, f64)>,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut vertices = vertices;
        vertices.sort_by(|a, b| a.0.cmp(&b.0));
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, (id, mu)) in vertices.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(id.clone()));
            }
            if !(mu.is_finite() && *mu > 0.0) {
                return Err(Error::NonpositiveMeasure {
                    id: id.clone(),
                    mu: *mu,
                });
            }
        }
        let n = vertices.len();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut edge_list: Vec<(usize, usize, f64)> = Vec::with_capacity(edges.len());
        let mut seen = std::collections::HashSet::new();
        for (u_id, v_id, w) in &edges {
            let u = *index
                .get(u_id)
                .ok_or_else(|| Error::UnknownVertex(u_id.clone()))?;
            let v = *index
                .get(v_id)
                .ok_or_else(|| Error::UnknownVertex(v_id.clone()))?;
            if u == v {
                return Err(Error::SelfLoop(u_id.clone()));
            }
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::NonpositiveWeight {
                    u: u_id.clone(),
                    v: v_id.clone(),
                    w: *w,
                });
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge {
                    u: u_id.clone(),
                    v: v_id.clone(),
                });
            }
            adj[u].push((v, *w));
            adj[v].push((u, *w));
            edge_list.push((key.0, key.1, *w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(y, _)| y);
        }
        edge_list.sort_by_key(|&(u, v, _)| (u, v));

        // Connectivity by BFS from vertex 0.
        let mut reached = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        reached[0] = true;
        queue.push_back(0usize);
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &adj[x] {
                if !reached[y] {
                    reached[y] = true;
                    queue.push_back(y);
                }
            }
        }
        if let Some(i) = reached.iter().position(|r| !r) {
            return Err(Error::Disconnected(
                vertices[i].0.clone(),
                vertices[0].0.clone(),
            ));
        }

        let total_measure = vertices.iter().map(|(_, m)| m).sum();
        let (ids, mu) = vertices.into_iter().unzip();
        Ok(Self {
            ids,
            mu,
            adj,
            edges: edge_list,
            index,
            total_measure,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    /// Total measure of the graph, `sum_x mu(x)`. This is the `|V|`
    /// appearing in the equation's constant term; for unit measure it
    /// coincides with the vertex count.
    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, x: usize) -> &str {
        &self.ids[x]
    }

    pub fn mu(&self, x: usize) -> f64 {
        self.mu[x]
    }

    pub fn measures(&self) -> &[f64] {
        &self.mu
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adj[x]
    }

    /// Undirected edges as `(u, v, w)` with `u < v`, in canonical order.
    pub fn edge_list(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    fn check_len(&self, f: &VertexFunction) -> Result<()> {
        if f.len() != self.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: self.vertex_count(),
                got: f.len(),
            });
        }
        Ok(())
    }

    /// Parses the graph JSON schema
    /// `{"vertices":[{"id","mu"}], "edges":[{"u","v","w"}]}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: GraphSpec = serde_json::from_str(s)?;
        spec.build()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let spec = GraphSpec {
            vertices: self
                .ids
                .iter()
                .zip(&self.mu)
                .map(|(id, &mu)| VertexSpec {
                    id: id.clone(),
                    mu,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(u, v, w)| EdgeSpec {
                    u: self.ids[u].clone(),
                    v: self.ids[v].clone(),
                    w,
                })
                .collect(),
        };
        serde_json::to_value(spec).expect("graph serialization cannot fail")
    }
}

/// JSON schema for graph files.
#[derive(Debug, Serialize, Deserialize)]
pub struct GraphSpec {
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: String,
    pub mu: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub u: String,
    pub v: String,
    pub w: f64,
}

impl GraphSpec {
    pub fn build(self) -> Result<FiniteGraph> {
        FiniteGraph::new(
            self.vertices.into_iter().map(|v| (v.id, v.mu)).collect(),
            self.edges.into_iter().map(|e| (e.u, e.v, e.w)).collect(),
        )
    }
}

/// Real-valued function on the vertices of a graph, stored in canonical
/// vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    values: Vec<f64>,
}

impl VertexFunction {
    /// Wraps raw values; rejects non-finite entries.
    pub fn new(g: &FiniteGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: g.vertex_count(),
                got: values.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    id: g.id(i).to_string(),
                    value: v,
                });
            }
        }
        Ok(Self { values })
    }

    /// Internal constructor for values produced by the solvers themselves.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(g: &FiniteGraph, c: f64) -> Self {
        Self {
            values: vec![c; g.vertex_count()],
        }
    }

    pub fn zeros(g: &FiniteGraph) -> Self {
        Self::constant(g, 0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn shift(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    /// Serializes as an id -> value map in canonical order.
    pub fn to_id_map(&self, g: &FiniteGraph) -> BTreeMap<String, f64> {
        g.ids()
            .iter()
            .cloned()
            .zip(self.values.iter().copied())
            .collect()
    }

    /// Reads an id -> value map, requiring exactly the graph's vertex set
    /// and finite values.
    pub fn from_id_map(g: &FiniteGraph, map: &BTreeMap<String, f64>) -> Result<Self> {
        for id in map.keys() {
            if g.index_of(id).is_err() {
                return Err(Error::ExtraVertex(id.clone()));
            }
        }
        let mut values = Vec::with_capacity(g.vertex_count());
        for id in g.ids() {
            let v = *map.get(id).ok_or_else(|| Error::MissingVertex(id.clone()))?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    id: id.clone(),
                    value: v,
                });
            }
            values.push(v);
        }
        Ok(Self { values })
    }
}

/// Multiset of vortex locations. Repeated vertices carry multiplicity;
/// `new_distinct` enforces pairwise-distinct points.
#[derive(Debug, Clone)]
pub struct VortexSet {
    points: Vec<usize>,
    n: usize,
}

impl VortexSet {
    pub fn new(g: &FiniteGraph, ids: &[String]) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::EmptyVortexSet);
        }
        let mut points = Vec::with_capacity(ids.len());
        for id in ids {
            points.push(g.index_of(id)?);
        }
        points.sort_unstable();
        let n = points.len();
        Ok(Self { points, n })
    }

    pub fn new_distinct(g: &FiniteGraph, ids: &[String]) -> Result<Self> {
        let set = Self::new(g, ids)?;
        for w in set.points.windows(2) {
            if w[0] == w[1] {
                return Err(Error::RepeatedVortex(g.id(w[0]).to_string()));
            }
        }
        Ok(set)
    }

    /// Total vortex number N, counted with multiplicity.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    /// `4*pi*N / |V|`, the constant source term of the reduced equation.
    pub fn source_constant(&self, g: &FiniteGraph) -> f64 {
        4.0 * std::f64::consts::PI * self.n as f64 / g.total_measure()
    }
}

/// mu-Laplacian: `(Lu)(x) = (1/mu(x)) sum_{y~x} w_xy (u(y) - u(x))`.
pub fn laplacian(g: &FiniteGraph, u: &VertexFunction) -> Result<VertexFunction> {
    g.check_len(u)?;
    let mut out = vec![0.0; g.vertex_count()];
    for x in 0..g.vertex_count() {
        let ux = u.get(x);
        let mut acc = 0.0;
        for &(y, w) in g.neighbors(x) {
            acc += w * (u.get(y) - ux);
        }
        out[x] = acc / g.mu(x);
    }
    Ok(VertexFunction::from_raw(out))
}

/// Gradient form `Gamma(u,v)(x) = (1/(2 mu(x))) sum_{y~x} w_xy (u(y)-u(x))(v(y)-v(x))`.
///
/// Symmetric in `u` and `v`.
pub fn gradient_form(
    g: &FiniteGraph,
    u: &VertexFunction,
    v: &VertexFunction,
) -> Result<VertexFunction> {
    g.check_len(u)?;
    g.check_len(v)?;
    let mut out = vec![0.0; g.vertex_count()];
    for x in 0..g.vertex_count() {
        let ux = u.get(x);
        let vx = v.get(x);
        let mut acc = 0.0;
        for &(y, w) in g.neighbors(x) {
            // Grouped so the product commutes bit-exactly in u and v.
            acc += w * ((u.get(y) - ux) * (v.get(y) - vx));
        }
        out[x] = acc / (2.0 * g.mu(x));
    }
    Ok(VertexFunction::from_raw(out))
}

/// Pointwise gradient length `|grad u|(x) = sqrt(Gamma(u,u)(x))`.
pub fn grad_norm(g: &FiniteGraph, u: &VertexFunction) -> Result<VertexFunction> {
    Ok(gradient_form(g, u, u)?.map(f64::sqrt))
}

/// Integral against the vertex measure, `sum_x mu(x) f(x)`.
pub fn integrate(g: &FiniteGraph, f: &VertexFunction) -> Result<f64> {
    g.check_len(f)?;
    Ok(f.values()
        .iter()
        .zip(g.measures())
        .map(|(&v, &m)| m * v)
        .sum())
}

/// mu-weighted mean, `(1/|V|) * integral`.
pub fn mean(g: &FiniteGraph, f: &VertexFunction) -> Result<f64> {
    Ok(integrate(g, f)? / g.total_measure())
}

/// mu-weighted inner product `sum_x mu(x) f(x) g(x)`.
pub fn inner_product(g: &FiniteGraph, f: &VertexFunction, h: &VertexFunction) -> Result<f64> {
    g.check_len(f)?;
    g.check_len(h)?;
    Ok(f.values()
        .iter()
        .zip(h.values())
        .zip(g.measures())
        .map(|((&a, &b), &m)| m * a * b)
        .sum())
}

/// Dirac mass at `p`, normalized so its integral against `mu` is one:
/// value `1/mu(p)` at `p`, zero elsewhere.
pub fn dirac_mass(g: &FiniteGraph, p: &str) -> Result<VertexFunction> {
    let idx = g.index_of(p)?;
    let mut values = vec![0.0; g.vertex_count()];
    values[idx] = 1.0 / g.mu(idx);
    Ok(VertexFunction::from_raw(values))
}
