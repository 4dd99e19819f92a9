//! Special families and adversarial instances: blown-up paths, blocking
//! placements on star products, graphs that pass the cut condition without
//! being pairable, and violating boxes in cycle products.

use crate::graph::{cartesian_product, generate, Family, Graph, GraphError, Label, ProductShape, ProductVertex};
use crate::pairing::Pairing;
use serde::{Deserialize, Serialize};

/// The path `P_k` with every vertex blown up to `K_m` and every edge to `K_{m,m}`.
///
/// Vertex `x_{i,j}` (class `i`, position `j`) has index `i*m + j` and label
/// `{class: i, index: j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlownUpPath {
    pub k: usize,
    pub m: usize,
    pub graph: Graph,
}

impl BlownUpPath {
    pub fn class_of(&self, v: usize) -> usize {
        v / self.m
    }

    pub fn vertex(&self, class: usize, index: usize) -> usize {
        class * self.m + index
    }

    pub fn class_members(&self, class: usize) -> std::ops::Range<usize> {
        class * self.m..(class + 1) * self.m
    }

    /// Recognises a graph that is exactly `G(k, m)` in canonical numbering.
    pub fn recognise(graph: &Graph) -> Option<BlownUpPath> {
        let labels = graph.labels()?;
        let (mut k, mut m) = (0, 0);
        for l in labels {
            match *l {
                Label::Class { class, index } => {
                    k = k.max(class + 1);
                    m = m.max(index + 1);
                }
                Label::Product { .. } => return None,
            }
        }
        if k * m != graph.n() || k == 0 {
            return None;
        }
        let candidate = blown_up_path(k, m).ok()?;
        (candidate.graph == *graph).then_some(candidate)
    }
}

pub fn blown_up_path(k: usize, m: usize) -> Result<BlownUpPath, GraphError> {
    if k == 0 || m == 0 {
        return Err(GraphError::InvalidParameter("blown-up path needs k, m >= 1".into()));
    }
    let idx = |i: usize, j: usize| i * m + j;
    let mut edges = Vec::new();
    for i in 0..k {
        for a in 0..m {
            for b in a + 1..m {
                edges.push((idx(i, a), idx(i, b)));
            }
            if i + 1 < k {
                for b in 0..m {
                    edges.push((idx(i, a), idx(i + 1, b)));
                }
            }
        }
    }
    let labels = (0..k * m)
        .map(|v| Label::Class {
            class: v / m,
            index: v % m,
        })
        .collect();
    let graph = Graph::from_edges(k * m, edges)?.with_labels(labels)?;
    Ok(BlownUpPath { k, m, graph })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    Infeasible,
    Feasible,
}

/// A graph with a terminal placement and what it is claimed to be.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversarialInstance {
    pub graph: Graph,
    pub pairing: Pairing,
    pub claim: Claim,
}

/// Pairs consecutive entries of `terminals`.
fn pair_up(terminals: &[usize]) -> Vec<(usize, usize)> {
    terminals.chunks(2).map(|c| (c[0], c[1])).collect()
}

/// Blocking placement on `K_{1,b} □ K_{1,d}` with `⌈(b+d)/2⌉ + 1` pairs.
///
/// With hub `z = (0,0)`, leaf column `g0 = 1` and leaf row `h0 = 1`:
/// `C = {(1,h) : h leaf}`, `R = {(g,1) : g leaf}`, `y = (1,1)` and `x = (2,2)`.
/// Pairs are `(x, y)`, the two low-degree hubs `(1,0)` and `(0,1)`, and the
/// rest of `C ∪ R` in order (one leftover is matched with the first free
/// degree-two vertex when `b + d` is odd). Every neighbour of `(1,0)` other
/// than `z` is a degree-two terminal, and likewise for `(0,1)`, so both forced
/// pairs need an edge at `z` from the same hub.
pub fn star_product_blocking(b: usize, d: usize) -> Result<AdversarialInstance, GraphError> {
    if b < 2 || d < 2 {
        return Err(GraphError::InvalidParameter("star blocking needs b, d >= 2".into()));
    }
    let graph = cartesian_product(&generate(Family::Star(b))?, &generate(Family::Star(d))?)?;
    let shape = ProductShape { g_n: b + 1, h_n: d + 1 };
    let at = |g: usize, h: usize| shape.index(ProductVertex { g, h });
    let y = at(1, 1);
    let x = at(2, 2);
    let hub_col = at(1, 0);
    let hub_row = at(0, 1);
    let mut rest: Vec<usize> = (2..=d).map(|h| at(1, h)).collect();
    rest.extend((2..=b).map(|g| at(g, 1)));
    if rest.len() % 2 == 1 {
        let taken: Vec<usize> = rest.iter().copied().chain([x, y, hub_col, hub_row]).collect();
        let filler = (0..graph.n())
            .find(|&v| graph.degree(v) == 2 && !taken.contains(&v))
            .expect("b, d >= 2 leave free degree-two vertices");
        rest.push(filler);
    }
    let mut pairs = vec![(x, y), (hub_col, hub_row)];
    pairs.extend(pair_up(&rest));
    Ok(AdversarialInstance {
        graph,
        pairing: Pairing::new(pairs).expect("distinct terminals"),
        claim: Claim::Infeasible,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "variant")]
pub enum CutVariant {
    /// `K_{1,k}` plus `K_N`, leaf `i` joined to clique vertex `i`.
    CliqueTail { clique: usize },
    /// `K_{1,k}` plus `K_{k-1}` joined by a matching, last leaf to clique vertex 0.
    MatchedClique,
}

/// Graphs satisfying a cut condition yet failing the matching pairability.
///
/// Numbering: star centre `0`, leaves `1..=k`, clique vertices after that.
/// The centre is paired with a clique vertex not matched to the star where
/// possible; the leaves are then paired among themselves (and with clique
/// vertices for any leftover). Any route out of the centre passes through a
/// leaf and uses both of its edges.
pub fn cut_ok_not_pp(k: usize, variant: CutVariant) -> Result<AdversarialInstance, GraphError> {
    let leaf = |i: usize| i; // 1-based leaves
    match variant {
        CutVariant::CliqueTail { clique } => {
            if k < 2 || clique < 2 * k {
                return Err(GraphError::InvalidParameter(
                    "clique-tail variant needs k >= 2 and N >= 2k".into(),
                ));
            }
            let q = |i: usize| k + 1 + i;
            let mut edges: Vec<(usize, usize)> = (1..=k).map(|i| (0, leaf(i))).collect();
            for a in 0..clique {
                for b in a + 1..clique {
                    edges.push((q(a), q(b)));
                }
            }
            edges.extend((1..=k).map(|i| (leaf(i), q(i - 1))));
            let graph = Graph::from_edges(k + 1 + clique, edges)?;
            let mut pairs = vec![(0, q(k))];
            let mut rest: Vec<usize> = (1..=k).map(leaf).collect();
            if rest.len() % 2 == 1 {
                rest.push(q(k + 1));
            }
            pairs.extend(pair_up(&rest));
            Ok(AdversarialInstance {
                graph,
                pairing: Pairing::new(pairs).expect("distinct terminals"),
                claim: Claim::Infeasible,
            })
        }
        CutVariant::MatchedClique => {
            if k < 6 {
                return Err(GraphError::InvalidParameter(
                    "matched-clique variant needs k >= 6".into(),
                ));
            }
            let q = |i: usize| k + 1 + i;
            let mut edges: Vec<(usize, usize)> = (1..=k).map(|i| (0, leaf(i))).collect();
            for a in 0..k - 1 {
                for b in a + 1..k - 1 {
                    edges.push((q(a), q(b)));
                }
            }
            edges.extend((1..k).map(|i| (leaf(i), q(i - 1))));
            edges.push((leaf(k), q(0)));
            let graph = Graph::from_edges(2 * k, edges)?;
            // full pairing: centre with q0, then leaves, then the other clique vertices
            let mut rest: Vec<usize> = (1..=k).map(leaf).collect();
            rest.extend((1..k - 1).map(q));
            let mut pairs = vec![(0, q(0))];
            pairs.extend(pair_up(&rest));
            Ok(AdversarialInstance {
                graph,
                pairing: Pairing::new(pairs).expect("distinct terminals"),
                claim: Claim::Infeasible,
            })
        }
    }
}

/// The box `C_{2d} □ … □ C_{2d} □ C_{2d+1}` inside a large `d`-dimensional
/// cycle product, with its size and boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridViolator {
    pub d: usize,
    /// Side lengths of the box, anchored at the origin.
    pub sides: Vec<usize>,
    pub size: u128,
    pub boundary: u128,
}

pub fn grid_violating_subgrid(d: usize) -> Result<GridViolator, GraphError> {
    if d < 2 {
        return Err(GraphError::InvalidParameter("grid violator needs d >= 2".into()));
    }
    let two_d = 2 * d as u128;
    let size = two_d.pow(d as u32 - 1) * (two_d + 1);
    let boundary = 2 * ((d as u128 - 1) * two_d.pow(d as u32 - 2) * (two_d + 1) + two_d.pow(d as u32 - 1));
    let mut sides = vec![2 * d; d - 1];
    sides.push(2 * d + 1);
    Ok(GridViolator {
        d,
        sides,
        size,
        boundary,
    })
}

impl GridViolator {
    /// Vertex indices of the box inside `C_{lens[0]} □ … □ C_{lens[d-1]}`,
    /// numbered with the last coordinate fastest (the nested product order).
    pub fn vertices_in(&self, lens: &[usize]) -> Vec<usize> {
        assert_eq!(lens.len(), self.d);
        assert!(lens.iter().zip(&self.sides).all(|(l, s)| l >= s));
        let mut out = Vec::new();
        let mut coord = vec![0usize; self.d];
        loop {
            out.push(coord.iter().zip(lens).fold(0, |acc, (&c, &l)| acc * l + c));
            let mut i = self.d;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                coord[i] += 1;
                if coord[i] < self.sides[i] {
                    break;
                }
                coord[i] = 0;
            }
        }
    }
}

/// `C_{lens[0]} □ … □ C_{lens[d-1]}` built by repeated products.
pub fn cycle_product(lens: &[usize]) -> Result<Graph, GraphError> {
    let mut acc = generate(Family::Cycle(lens[0]))?;
    for &l in &lens[1..] {
        acc = cartesian_product(&acc, &generate(Family::Cycle(l))?)?;
    }
    Ok(acc.without_labels())
}
