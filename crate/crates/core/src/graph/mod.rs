//! Undirected simple graphs with dense vertex indices, plus the Cartesian
//! product and its layers.

mod generate;
mod io;

pub use generate::{generate, Family};
pub use io::{EdgeListError, GraphDoc};

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

/// Structured per-vertex label that rides alongside the dense index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    /// Coordinates of a product vertex `(g, h)`.
    Product { g: usize, h: usize },
    /// Class tag plus index inside the class (bipartite sides, blown-up classes).
    Class { class: usize, index: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("label vector has {got} entries, graph has {n} vertices")]
    LabelCount { got: usize, n: usize },
    #[error("graph has no product labels")]
    MissingProductLabels,
    #[error("product labels are inconsistent: {0}")]
    InconsistentLabels(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("factor graphs must be nonempty")]
    EmptyFactor,
}

/// Immutable undirected simple graph stored in compressed adjacency form.
///
/// Adjacency lists are sorted, so `has_edge` is a binary search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    labels: Option<Vec<Label>>,
}

impl Graph {
    /// Builds a graph, rejecting loops, duplicate edges and out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        assert!(n <= u32::MAX as usize, "vertex count exceeds u32 storage");
        let edges: Vec<(usize, usize)> = edges.into_iter().collect();
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0u32; offsets[n]];
        for &(u, v) in &edges {
            targets[fill[u]] = v as u32;
            fill[u] += 1;
            targets[fill[v]] = u as u32;
            fill[v] += 1;
        }
        for v in 0..n {
            let list = &mut targets[offsets[v]..offsets[v + 1]];
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = (v.min(w[0] as usize), v.max(w[0] as usize));
                return Err(GraphError::DuplicateEdge(a, b));
            }
        }
        Ok(Self {
            n,
            offsets,
            targets,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self, GraphError> {
        if labels.len() != self.n {
            return Err(GraphError::LabelCount {
                got: labels.len(),
                n: self.n,
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbor_slice(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbor_slice(v).iter().map(|&w| w as usize)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.neighbor_slice(u).binary_search(&(v as u32)).is_ok()
    }

    /// Every edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: usize) -> Option<Label> {
        self.labels.as_ref().map(|l| l[v])
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Subgraph induced by `vertices`, renumbered in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut local = HashMap::with_capacity(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            local.insert(v, i);
        }
        let mut edges = Vec::new();
        for (i, &v) in vertices.iter().enumerate() {
            for w in self.neighbors(v) {
                if let Some(&j) = local.get(&w) {
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        Graph::from_edges(vertices.len(), edges).expect("induced subgraph of a simple graph")
    }

    /// Number of edges with both endpoints in `set`.
    pub fn internal_edges(&self, set: &[usize]) -> usize {
        let mut inside = vec![false; self.n];
        for &v in set {
            inside[v] = true;
        }
        let mut count = 0;
        for v in 0..self.n {
            if inside[v] {
                count += self.neighbors(v).filter(|&w| w > v && inside[w]).count();
            }
        }
        count
    }
}

/// Number of edges with exactly one endpoint in `set`.
pub fn edge_boundary(graph: &Graph, set: &[usize]) -> Result<usize, GraphError> {
    let mut inside = vec![false; graph.n()];
    for &v in set {
        if v >= graph.n() {
            return Err(GraphError::VertexOutOfRange {
                vertex: v,
                n: graph.n(),
            });
        }
        inside[v] = true;
    }
    let mut count = 0;
    for v in 0..graph.n() {
        if inside[v] {
            count += graph.neighbors(v).filter(|&w| !inside[w]).count();
        }
    }
    Ok(count)
}

/// A product vertex addressed by its factor coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProductVertex {
    pub g: usize,
    pub h: usize,
}

/// Index layout of `G □ H`: vertex `(g, h)` has index `g * h_n + h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductShape {
    pub g_n: usize,
    pub h_n: usize,
}

impl ProductShape {
    pub fn index(&self, p: ProductVertex) -> usize {
        debug_assert!(p.g < self.g_n && p.h < self.h_n);
        p.g * self.h_n + p.h
    }

    pub fn coords(&self, v: usize) -> ProductVertex {
        ProductVertex {
            g: v / self.h_n,
            h: v % self.h_n,
        }
    }

    pub fn n(&self) -> usize {
        self.g_n * self.h_n
    }

    /// Recovers the layout from product labels, checking it is the canonical one.
    pub fn of(graph: &Graph) -> Result<Self, GraphError> {
        let labels = graph.labels().ok_or(GraphError::MissingProductLabels)?;
        let mut g_n = 0;
        let mut h_n = 0;
        for l in labels {
            match *l {
                Label::Product { g, h } => {
                    g_n = g_n.max(g + 1);
                    h_n = h_n.max(h + 1);
                }
                Label::Class { .. } => return Err(GraphError::MissingProductLabels),
            }
        }
        let shape = ProductShape { g_n, h_n };
        if shape.n() != graph.n() {
            return Err(GraphError::InconsistentLabels(format!(
                "{} vertices but coordinates span {g_n} x {h_n}",
                graph.n()
            )));
        }
        for (v, l) in labels.iter().enumerate() {
            if let Label::Product { g, h } = *l {
                if shape.index(ProductVertex { g, h }) != v {
                    return Err(GraphError::InconsistentLabels(format!(
                        "vertex {v} labelled ({g}, {h})"
                    )));
                }
            }
        }
        Ok(shape)
    }
}

/// `G □ H`: `(x,u)(y,v)` is an edge iff `x = y` and `uv ∈ E(H)`, or `xy ∈ E(G)` and `u = v`.
pub fn cartesian_product(g: &Graph, h: &Graph) -> Result<Graph, GraphError> {
    if g.n() == 0 || h.n() == 0 {
        return Err(GraphError::EmptyFactor);
    }
    let shape = ProductShape {
        g_n: g.n(),
        h_n: h.n(),
    };
    let mut edges = Vec::with_capacity(g.n() * h.edge_count() + h.n() * g.edge_count());
    for x in 0..g.n() {
        for (u, v) in h.edges() {
            edges.push((
                shape.index(ProductVertex { g: x, h: u }),
                shape.index(ProductVertex { g: x, h: v }),
            ));
        }
    }
    for (x, y) in g.edges() {
        for u in 0..h.n() {
            edges.push((
                shape.index(ProductVertex { g: x, h: u }),
                shape.index(ProductVertex { g: y, h: u }),
            ));
        }
    }
    let labels = (0..shape.n())
        .map(|v| {
            let p = shape.coords(v);
            Label::Product { g: p.g, h: p.h }
        })
        .collect();
    Graph::from_edges(shape.n(), edges)?.with_labels(labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    /// Copy of the first factor: fixed second coordinate.
    G,
    /// Copy of the second factor: fixed first coordinate.
    H,
}

/// A G-layer `G_x` (anchor `x ∈ V(H)`) or an H-layer `H_y` (anchor `y ∈ V(G)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerRef {
    pub kind: LayerKind,
    pub anchor: usize,
}

impl LayerRef {
    /// Product indices of the layer, ordered by the free coordinate.
    pub fn vertices(&self, shape: ProductShape) -> Vec<usize> {
        match self.kind {
            LayerKind::G => (0..shape.g_n)
                .map(|g| shape.index(ProductVertex { g, h: self.anchor }))
                .collect(),
            LayerKind::H => (0..shape.h_n)
                .map(|h| shape.index(ProductVertex { g: self.anchor, h }))
                .collect(),
        }
    }
}

/// Extracts a layer of a product graph; `embedding[i]` is the product index of layer vertex `i`.
pub fn layer_subgraph(product: &Graph, layer: LayerRef) -> Result<(Graph, Vec<usize>), GraphError> {
    let shape = ProductShape::of(product)?;
    let bound = match layer.kind {
        LayerKind::G => shape.h_n,
        LayerKind::H => shape.g_n,
    };
    if layer.anchor >= bound {
        return Err(GraphError::VertexOutOfRange {
            vertex: layer.anchor,
            n: bound,
        });
    }
    let embedding = layer.vertices(shape);
    Ok((product.induced(&embedding), embedding))
}
