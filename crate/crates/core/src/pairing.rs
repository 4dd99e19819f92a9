//! Terminal pairings, path systems, the single-use edge ledger and the verifier.

use crate::graph::Graph;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PairingError {
    #[error("pair {index} joins vertex {vertex} to itself")]
    Coincident { index: usize, vertex: usize },
    #[error("vertex {vertex} is a terminal of more than one pair")]
    Repeated { vertex: usize },
    #[error("terminal {vertex} out of range for a graph on {n} vertices")]
    OutOfRange { vertex: usize, n: usize },
    #[error("{k} pairs need {} terminals, graph has {n}", 2 * .k)]
    TooMany { k: usize, n: usize },
}

/// Terminal pairs over pairwise-distinct vertices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "PairingDoc", into = "PairingDoc")]
pub struct Pairing {
    pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PairingDoc {
    pairs: Vec<[usize; 2]>,
}

impl TryFrom<PairingDoc> for Pairing {
    type Error = PairingError;
    fn try_from(doc: PairingDoc) -> Result<Self, PairingError> {
        Pairing::new(doc.pairs.into_iter().map(|p| (p[0], p[1])).collect())
    }
}

impl From<Pairing> for PairingDoc {
    fn from(p: Pairing) -> Self {
        PairingDoc {
            pairs: p.pairs.into_iter().map(|(x, y)| [x, y]).collect(),
        }
    }
}

impl Pairing {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self, PairingError> {
        check_pairs(&pairs)?;
        Ok(Self { pairs })
    }

    /// `k` uniformly random disjoint pairs over `0..n`, from a ChaCha8 stream
    /// seeded with `seed`.
    pub fn random(n: usize, k: usize, seed: u64) -> Result<Self, PairingError> {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        if 2 * k > n {
            return Err(PairingError::TooMany { k, n });
        }
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        Ok(Pairing {
            pairs: v[..2 * k].chunks(2).map(|c| (c[0], c[1])).collect(),
        })
    }

    /// Pairs up every vertex (one is left out when `n` is odd).
    pub fn random_full(n: usize, seed: u64) -> Self {
        Self::random(n, n / 2, seed).expect("n/2 pairs always fit")
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn terminals(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().flat_map(|&(x, y)| [x, y])
    }

    pub fn check_range(&self, n: usize) -> Result<(), PairingError> {
        match self.terminals().find(|&v| v >= n) {
            Some(vertex) => Err(PairingError::OutOfRange { vertex, n }),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pairing serializes")
    }
}

fn check_pairs(pairs: &[(usize, usize)]) -> Result<(), PairingError> {
    let mut seen = HashSet::with_capacity(pairs.len() * 2);
    for (index, &(x, y)) in pairs.iter().enumerate() {
        if x == y {
            return Err(PairingError::Coincident { index, vertex: x });
        }
        for v in [x, y] {
            if !seen.insert(v) {
                return Err(PairingError::Repeated { vertex: v });
            }
        }
    }
    Ok(())
}

/// Vertex sequence of one route. Vertices may repeat; edges may not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn edge_len(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn reversed(&self) -> Path {
        Path(self.0.iter().rev().copied().collect())
    }

    /// Appends `next`, which must start where `self` ends.
    pub fn extend_with(&mut self, next: &Path) {
        match (self.0.last(), next.0.first()) {
            (Some(&end), Some(&start)) => {
                assert_eq!(end, start, "path segments do not meet");
                self.0.extend_from_slice(&next.0[1..]);
            }
            (None, _) => self.0.extend_from_slice(&next.0),
            (_, None) => {}
        }
    }
}

/// One route per pair, index-aligned with the pairing.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PathSystem {
    pub routes: Vec<Path>,
}

impl PathSystem {
    pub fn total_edges(&self) -> usize {
        self.routes.iter().map(Path::edge_len).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("path system serializes")
    }

    /// Compact form: first vertex then signed index deltas per route.
    pub fn to_delta_json(&self) -> String {
        let routes: Vec<Vec<i64>> = self
            .routes
            .iter()
            .map(|r| {
                let v = r.vertices();
                let mut out = Vec::with_capacity(v.len());
                if let Some(&first) = v.first() {
                    out.push(first as i64);
                }
                out.extend(v.windows(2).map(|w| w[1] as i64 - w[0] as i64));
                out
            })
            .collect();
        serde_json::json!({ "encoding": "delta", "routes": routes }).to_string()
    }

    /// Reads either the plain or the delta encoding.
    pub fn from_json(text: &str) -> Result<PathSystem, serde_json::Error> {
        #[derive(Deserialize)]
        struct Doc {
            #[serde(default)]
            encoding: Option<String>,
            routes: Vec<Vec<i64>>,
        }
        let doc: Doc = serde_json::from_str(text)?;
        let delta = match doc.encoding.as_deref() {
            None | Some("plain") => false,
            Some("delta") => true,
            Some(other) => {
                return Err(serde::de::Error::custom(format!("unknown encoding {other:?}")));
            }
        };
        let mut routes = Vec::with_capacity(doc.routes.len());
        for raw in doc.routes {
            let mut acc = 0i64;
            let mut verts = Vec::with_capacity(raw.len());
            for (i, x) in raw.into_iter().enumerate() {
                acc = if delta && i > 0 { acc + x } else { x };
                if acc < 0 {
                    return Err(serde::de::Error::custom("negative vertex index"));
                }
                verts.push(acc as usize);
            }
            routes.push(Path(verts));
        }
        Ok(PathSystem { routes })
    }
}

#[inline]
pub(crate) fn edge_key(u: usize, v: usize) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    ((a as u64) << 32) | b as u64
}

#[inline]
fn key_edge(k: u64) -> (usize, usize) {
    ((k >> 32) as usize, (k & 0xffff_ffff) as usize)
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("edge {{{}, {}}} already claimed", .edge.0, .edge.1)]
pub struct LedgerConflict {
    pub edge: (usize, usize),
}

/// Edges consumed so far in one routing job; undirected edges are stored as `(min, max)`.
#[derive(Debug, Clone, Default)]
pub struct EdgeLedger {
    used: HashSet<u64>,
}

impl EdgeLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_used(&self, u: usize, v: usize) -> bool {
        self.used.contains(&edge_key(u, v))
    }

    pub fn len(&self) -> usize {
        self.used.len()
    }

    pub fn is_empty(&self) -> bool {
        self.used.is_empty()
    }

    /// Claims every edge of `path`, or nothing if any edge is taken (also
    /// within the path itself).
    pub fn claim(&mut self, path: &Path) -> Result<(), LedgerConflict> {
        self.claim_vertices(path.vertices())
    }

    pub fn claim_vertices(&mut self, verts: &[usize]) -> Result<(), LedgerConflict> {
        let mut fresh: Vec<u64> = Vec::with_capacity(verts.len());
        for w in verts.windows(2) {
            let k = edge_key(w[0], w[1]);
            if self.used.contains(&k) || fresh.contains(&k) {
                return Err(LedgerConflict { edge: key_edge(k) });
            }
            fresh.push(k);
        }
        self.used.extend(fresh);
        Ok(())
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.used.iter().map(|&k| key_edge(k))
    }
}

/// Failure taxonomy of [`verify`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Failure {
    PairingInvalid { detail: String },
    RouteCountMismatch { pairs: usize, routes: usize },
    EmptyRoute { route: usize },
    EndpointMismatch { route: usize, expected: [usize; 2], found: [usize; 2] },
    VertexOutOfRange { route: usize, vertex: usize },
    NonEdgeStep { route: usize, step: usize, from: usize, to: usize },
    DuplicatedEdge { edge: [usize; 2], routes: [usize; 2] },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub pairs: usize,
    pub edges_used: usize,
    pub failures: Vec<Failure>,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Checks endpoints, adjacency of every step and global edge-disjointness.
pub fn verify(graph: &Graph, pairing: &Pairing, system: &PathSystem) -> VerifyReport {
    verify_raw(graph, pairing.pairs(), system)
}

/// Like [`verify`] but accepts pairs that were never validated.
pub fn verify_raw(graph: &Graph, pairs: &[(usize, usize)], system: &PathSystem) -> VerifyReport {
    let mut failures = Vec::new();
    if let Err(e) = check_pairs(pairs) {
        failures.push(Failure::PairingInvalid {
            detail: e.to_string(),
        });
    }
    if let Some(&v) = pairs.iter().flat_map(|(x, y)| [x, y]).find(|&&v| v >= graph.n()) {
        failures.push(Failure::PairingInvalid {
            detail: PairingError::OutOfRange { vertex: v, n: graph.n() }.to_string(),
        });
    }
    if pairs.len() != system.routes.len() {
        failures.push(Failure::RouteCountMismatch {
            pairs: pairs.len(),
            routes: system.routes.len(),
        });
    }
    let mut owner: HashMap<u64, usize> = HashMap::with_capacity(system.total_edges());
    let mut edges_used = 0;
    for (i, route) in system.routes.iter().enumerate() {
        let verts = route.vertices();
        let (Some(&first), Some(&last)) = (verts.first(), verts.last()) else {
            failures.push(Failure::EmptyRoute { route: i });
            continue;
        };
        if let Some(&(x, y)) = pairs.get(i) {
            if (first, last) != (x, y) {
                failures.push(Failure::EndpointMismatch {
                    route: i,
                    expected: [x, y],
                    found: [first, last],
                });
            }
        }
        if let Some(&v) = verts.iter().find(|&&v| v >= graph.n()) {
            failures.push(Failure::VertexOutOfRange { route: i, vertex: v });
            continue;
        }
        for (step, w) in verts.windows(2).enumerate() {
            let (from, to) = (w[0], w[1]);
            if !graph.has_edge(from, to) {
                failures.push(Failure::NonEdgeStep { route: i, step, from, to });
                continue;
            }
            edges_used += 1;
            let k = edge_key(from, to);
            if let Some(&prev) = owner.get(&k) {
                let (a, b) = key_edge(k);
                failures.push(Failure::DuplicatedEdge {
                    edge: [a, b],
                    routes: [prev, i],
                });
            } else {
                owner.insert(k, i);
            }
        }
    }
    VerifyReport {
        ok: failures.is_empty(),
        pairs: pairs.len(),
        edges_used,
        failures,
    }
}
