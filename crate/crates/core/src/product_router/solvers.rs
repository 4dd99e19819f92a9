//! Per-layer routing contracts and the solvers shipped with the routers.

use super::sweep::sweep_paths;
use crate::constructions::BlownUpPath;
use crate::graph::Graph;
use crate::oracle::{solve_restricted, OracleConfig, Outcome};
use crate::pairing::Path;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct LayerFailure(pub String);

/// Routes up to `capability()` pairs edge-disjointly inside one layer.
///
/// `usable(u, v)` tells which layer edges are still free; returned paths must
/// use only those, start at the first terminal and end at the second.
pub trait LayerSolver {
    fn name(&self) -> &'static str;
    fn capability(&self) -> usize;
    fn solve(
        &self,
        layer: &Graph,
        usable: &dyn Fn(usize, usize) -> bool,
        pairs: &[(usize, usize)],
    ) -> Result<Vec<Path>, LayerFailure>;
}

/// Exact search on the layer. Only sensible for small layers.
#[derive(Debug, Clone)]
pub struct OracleSolver {
    pub capability: usize,
    pub config: OracleConfig,
}

impl OracleSolver {
    pub fn new(capability: usize) -> Self {
        OracleSolver {
            capability,
            config: OracleConfig::default(),
        }
    }
}

impl LayerSolver for OracleSolver {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn capability(&self) -> usize {
        self.capability
    }

    fn solve(
        &self,
        layer: &Graph,
        usable: &dyn Fn(usize, usize) -> bool,
        pairs: &[(usize, usize)],
    ) -> Result<Vec<Path>, LayerFailure> {
        match solve_restricted(layer, pairs, &self.config, usable) {
            Ok(Outcome::Feasible(system)) => Ok(system.routes),
            Ok(Outcome::Infeasible) => Err(LayerFailure("oracle: no routing exists".into())),
            Ok(Outcome::BudgetExceeded) => Err(LayerFailure("oracle: budget exceeded".into())),
            Err(e) => Err(LayerFailure(format!("oracle: {e}"))),
        }
    }
}

/// Direct edge, else a two-hop detour through the smallest free middle vertex.
#[derive(Debug, Clone, Copy)]
pub struct CompleteSolver {
    pub capability: usize,
}

impl LayerSolver for CompleteSolver {
    fn name(&self) -> &'static str {
        "complete"
    }

    fn capability(&self) -> usize {
        self.capability
    }

    fn solve(
        &self,
        layer: &Graph,
        usable: &dyn Fn(usize, usize) -> bool,
        pairs: &[(usize, usize)],
    ) -> Result<Vec<Path>, LayerFailure> {
        let mut taken = std::collections::HashSet::new();
        let free = |taken: &std::collections::HashSet<(usize, usize)>, u: usize, v: usize| {
            layer.has_edge(u, v) && usable(u, v) && !taken.contains(&(u.min(v), u.max(v)))
        };
        let mut out = vec![None; pairs.len()];
        // direct edges first so a detour never steals another pair's edge
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if free(&taken, u, v) {
                taken.insert((u.min(v), u.max(v)));
                out[i] = Some(Path(vec![u, v]));
            }
        }
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if out[i].is_some() {
                continue;
            }
            let w = (0..layer.n())
                .find(|&w| w != u && w != v && free(&taken, u, w) && free(&taken, w, v))
                .ok_or_else(|| LayerFailure(format!("complete: no free route for ({u}, {v})")))?;
            taken.insert((u.min(w), u.max(w)));
            taken.insert((w.min(v), w.max(v)));
            out[i] = Some(Path(vec![u, w, v]));
        }
        Ok(out.into_iter().map(|p| p.expect("every pair routed")).collect())
    }
}

/// Left-to-right sweep on a blown-up path layer.
#[derive(Debug, Clone)]
pub struct SweepSolver {
    pub layer: BlownUpPath,
}

impl LayerSolver for SweepSolver {
    fn name(&self) -> &'static str {
        "sweep"
    }

    fn capability(&self) -> usize {
        self.layer.m * self.layer.m
    }

    fn solve(
        &self,
        layer: &Graph,
        usable: &dyn Fn(usize, usize) -> bool,
        pairs: &[(usize, usize)],
    ) -> Result<Vec<Path>, LayerFailure> {
        if layer.n() != self.layer.graph.n() {
            return Err(LayerFailure("sweep: layer is not the configured blown-up path".into()));
        }
        sweep_paths(&self.layer, pairs, usable).map_err(|e| LayerFailure(format!("sweep: {e}")))
    }
}
