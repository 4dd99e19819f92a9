//! Exact backtracking decision procedure for edge-disjoint pair routing on
//! small graphs, and exhaustive path-pairability checks built on it.
//!
//! The search routes one pair at a time over the residual graph. Each pair's
//! route is enumerated as a vertex-simple path (any trail contains a simple
//! path on a subset of its edges, so nothing is lost). A bound on the total
//! route length deepens iteratively; an iteration that never prunes on length
//! is exhaustive, which is how `Infeasible` is certified.

use crate::graph::Graph;
use crate::pairing::{Pairing, Path, PathSystem};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOrder {
    /// Pairs in the order given.
    Given,
    /// At every node, the pending pair with the smallest residual distance.
    ShortestFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub max_total_path_length: Option<usize>,
    pub node_budget: u64,
    pub pair_order: PairOrder,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            max_total_path_length: None,
            node_budget: 50_000_000,
            pair_order: PairOrder::ShortestFirst,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Feasible(PathSystem),
    /// Proven by an exhaustive search.
    Infeasible,
    /// The node budget or the length cap stopped the search first.
    BudgetExceeded,
}

impl Outcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Outcome::Feasible(_))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph has {n} vertices, fewer than 2k = {}", 2 * .k)]
    TooFewVertices { n: usize, k: usize },
    #[error("terminal {0} out of range")]
    TerminalOutOfRange(usize),
    #[error("k-path-pairability observed at k = {k} after failing at a smaller k")]
    NonMonotone { k: usize },
}

/// Decides whether `pairing` has an edge-disjoint routing in `graph`.
pub fn solve_exact(graph: &Graph, pairing: &Pairing, cfg: &OracleConfig) -> Result<Outcome, OracleError> {
    solve_restricted(graph, pairing.pairs(), cfg, &|_, _| true)
}

/// Like [`solve_exact`] over the subgraph of edges accepted by `usable`.
/// Pairs need distinct terminals but are not otherwise validated.
pub fn solve_restricted(
    graph: &Graph,
    pairs: &[(usize, usize)],
    cfg: &OracleConfig,
    usable: &dyn Fn(usize, usize) -> bool,
) -> Result<Outcome, OracleError> {
    if let Some(&v) = pairs.iter().flat_map(|(x, y)| [x, y]).find(|&&v| v >= graph.n()) {
        return Err(OracleError::TerminalOutOfRange(v));
    }
    let mut search = Search::new(graph, pairs, cfg, usable);
    Ok(search.run())
}

struct Search<'a> {
    pairs: &'a [(usize, usize)],
    adj: Vec<Vec<(usize, usize)>>,
    edge_count: usize,
    used: Vec<bool>,
    cfg: &'a OracleConfig,
    nodes: u64,
    out_of_budget: bool,
    bound: usize,
    next_bound: usize,
    routes: Vec<Option<Vec<usize>>>,
}

impl<'a> Search<'a> {
    fn new(
        graph: &Graph,
        pairs: &'a [(usize, usize)],
        cfg: &'a OracleConfig,
        usable: &dyn Fn(usize, usize) -> bool,
    ) -> Self {
        let mut adj = vec![Vec::new(); graph.n()];
        let mut edge_count = 0;
        for (u, v) in graph.edges() {
            if usable(u, v) {
                adj[u].push((v, edge_count));
                adj[v].push((u, edge_count));
                edge_count += 1;
            }
        }
        Search {
            pairs,
            adj,
            edge_count,
            used: vec![false; edge_count],
            cfg,
            nodes: 0,
            out_of_budget: false,
            bound: 0,
            next_bound: usize::MAX,
            routes: vec![None; pairs.len()],
        }
    }

    fn run(&mut self) -> Outcome {
        let pending: Vec<usize> = (0..self.pairs.len()).collect();
        let Some(lower) = self.lower_bound(&pending) else {
            return Outcome::Infeasible;
        };
        let cap = self
            .cfg
            .max_total_path_length
            .unwrap_or(usize::MAX)
            .min(self.edge_count);
        if lower > self.edge_count {
            return Outcome::Infeasible;
        }
        if lower > cap {
            return Outcome::BudgetExceeded;
        }
        self.bound = lower;
        loop {
            self.next_bound = usize::MAX;
            let mut pending = pending.clone();
            if self.descend(&mut pending, 0) {
                let routes = self
                    .routes
                    .iter()
                    .map(|r| Path(r.clone().expect("every pair routed")))
                    .collect();
                return Outcome::Feasible(PathSystem { routes });
            }
            if self.out_of_budget {
                return Outcome::BudgetExceeded;
            }
            if self.next_bound == usize::MAX || self.next_bound > self.edge_count {
                return Outcome::Infeasible;
            }
            if self.next_bound > cap {
                return Outcome::BudgetExceeded;
            }
            self.bound = self.next_bound;
        }
    }

    /// Residual BFS distances from `src` (usize::MAX when unreachable).
    fn distances(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.adj.len()];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            for &(w, e) in &self.adj[v] {
                if !self.used[e] && dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn lower_bound(&self, pending: &[usize]) -> Option<usize> {
        let mut total = 0;
        for &p in pending {
            let (x, y) = self.pairs[p];
            let d = self.distances(y)[x];
            if d == usize::MAX {
                return None;
            }
            total += d;
        }
        Some(total)
    }

    fn note_cut(&mut self, needed: usize) {
        self.next_bound = self.next_bound.min(needed);
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.cfg.node_budget {
            self.out_of_budget = true;
        }
        !self.out_of_budget
    }

    fn descend(&mut self, pending: &mut Vec<usize>, spent: usize) -> bool {
        if pending.is_empty() {
            return true;
        }
        if !self.tick() {
            return false;
        }
        let mut dists = Vec::with_capacity(pending.len());
        for &p in pending.iter() {
            let (x, y) = self.pairs[p];
            let from_y = self.distances(y);
            if from_y[x] == usize::MAX {
                return false;
            }
            dists.push(from_y);
        }
        let total_lb: usize = pending
            .iter()
            .zip(&dists)
            .map(|(&p, d)| d[self.pairs[p].0])
            .sum();
        if spent + total_lb > self.bound {
            self.note_cut(spent + total_lb);
            return false;
        }
        let pick = match self.cfg.pair_order {
            PairOrder::Given => 0,
            PairOrder::ShortestFirst => (0..pending.len())
                .min_by_key(|&i| (dists[i][self.pairs[pending[i]].0], pending[i]))
                .expect("nonempty"),
        };
        let pair = pending.remove(pick);
        let to_target = dists.swap_remove(pick);
        let others_lb = total_lb - to_target[self.pairs[pair].0];
        let (x, y) = self.pairs[pair];
        let budget = self.bound - spent - others_lb;

        let mut path = vec![x];
        let mut on_path = vec![false; self.adj.len()];
        on_path[x] = true;
        let mut edges_taken: Vec<usize> = Vec::new();
        // explicit DFS: frame = (vertex, next adjacency index)
        let mut frames: Vec<(usize, usize)> = vec![(x, 0)];
        let mut found = false;
        while let Some(&mut (v, ref mut idx)) = frames.last_mut() {
            if v == y {
                self.routes[pair] = Some(path.clone());
                let len = path.len() - 1;
                if self.descend(pending, spent + len) {
                    found = true;
                    break;
                }
                if self.out_of_budget {
                    break;
                }
                self.routes[pair] = None;
                self.backtrack(&mut frames, &mut path, &mut on_path, &mut edges_taken);
                continue;
            }
            if *idx >= self.adj[v].len() {
                self.backtrack(&mut frames, &mut path, &mut on_path, &mut edges_taken);
                continue;
            }
            let (w, e) = self.adj[v][*idx];
            *idx += 1;
            if self.used[e] || on_path[w] || to_target[w] == usize::MAX {
                continue;
            }
            let len = path.len();
            if len + to_target[w] > budget {
                self.note_cut(spent + others_lb + len + to_target[w]);
                continue;
            }
            if !self.tick() {
                break;
            }
            self.used[e] = true;
            edges_taken.push(e);
            on_path[w] = true;
            path.push(w);
            frames.push((w, 0));
        }
        if !found {
            // unwind anything left on the stack
            for e in edges_taken {
                self.used[e] = false;
            }
            pending.insert(pick, pair);
            return false;
        }
        for e in edges_taken {
            self.used[e] = false;
        }
        pending.insert(pick, pair);
        true
    }

    fn backtrack(
        &mut self,
        frames: &mut Vec<(usize, usize)>,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        edges_taken: &mut Vec<usize>,
    ) {
        frames.pop();
        if frames.is_empty() {
            return;
        }
        let v = path.pop().expect("path tracks frames");
        on_path[v] = false;
        let e = edges_taken.pop().expect("edge per step");
        self.used[e] = false;
    }
}

/// Enumerates every set of `k` disjoint unordered pairs over `0..n` in
/// canonical form (each pair ascending, pairs ordered by smaller terminal).
/// The visitor returns `false` to stop early.
pub fn for_each_placement(n: usize, k: usize, visit: &mut dyn FnMut(&[(usize, usize)]) -> bool) -> bool {
    fn rec(
        n: usize,
        k: usize,
        start: usize,
        used: &mut Vec<bool>,
        acc: &mut Vec<(usize, usize)>,
        visit: &mut dyn FnMut(&[(usize, usize)]) -> bool,
    ) -> bool {
        if acc.len() == k {
            return visit(acc);
        }
        let still_needed = k - acc.len();
        for x in start..n {
            if used[x] {
                continue;
            }
            if n - x < 2 * still_needed {
                break;
            }
            used[x] = true;
            for y in x + 1..n {
                if used[y] {
                    continue;
                }
                used[y] = true;
                acc.push((x, y));
                let go_on = rec(n, k, x + 1, used, acc, visit);
                acc.pop();
                used[y] = false;
                if !go_on {
                    used[x] = false;
                    return false;
                }
            }
            used[x] = false;
        }
        true
    }
    rec(n, k, 0, &mut vec![false; n], &mut Vec::with_capacity(k), visit)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PairabilityVerdict {
    Pairable { placements: u64 },
    NotPairable { placements: u64, counter: Pairing },
    BudgetExceeded { placements: u64, unresolved: Pairing },
}

impl PairabilityVerdict {
    pub fn is_pairable(&self) -> bool {
        matches!(self, PairabilityVerdict::Pairable { .. })
    }
}

/// Checks every placement of `k` disjoint pairs; stops at the first refuted one.
pub fn is_k_path_pairable(graph: &Graph, k: usize, cfg: &OracleConfig) -> Result<PairabilityVerdict, OracleError> {
    if graph.n() < 2 * k {
        return Err(OracleError::TooFewVertices { n: graph.n(), k });
    }
    let mut placements = 0u64;
    let mut verdict = None;
    for_each_placement(graph.n(), k, &mut |pairs| {
        placements += 1;
        match solve_restricted(graph, pairs, cfg, &|_, _| true).expect("terminals in range") {
            Outcome::Feasible(_) => true,
            Outcome::Infeasible => {
                verdict = Some(PairabilityVerdict::NotPairable {
                    placements,
                    counter: Pairing::new(pairs.to_vec()).expect("canonical placement"),
                });
                false
            }
            Outcome::BudgetExceeded => {
                verdict = Some(PairabilityVerdict::BudgetExceeded {
                    placements,
                    unresolved: Pairing::new(pairs.to_vec()).expect("canonical placement"),
                });
                false
            }
        }
    });
    Ok(verdict.unwrap_or(PairabilityVerdict::Pairable { placements }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PpReport {
    /// Largest k with a `Pairable` verdict (0 if none).
    pub pp: usize,
    /// `false` when a level ran out of budget; `pp` is then a lower bound.
    pub complete: bool,
    pub levels: Vec<(usize, PairabilityVerdict)>,
}

/// Scans `k = 1..=k_max`. Every level is decided so that a pairable level
/// above a non-pairable one is caught.
pub fn pp_number(graph: &Graph, k_max: usize, cfg: &OracleConfig) -> Result<PpReport, OracleError> {
    if graph.n() < 2 * k_max {
        return Err(OracleError::TooFewVertices { n: graph.n(), k: k_max });
    }
    let mut levels = Vec::new();
    let mut pp = 0;
    let mut failed = false;
    for k in 1..=k_max {
        let verdict = is_k_path_pairable(graph, k, cfg)?;
        match &verdict {
            PairabilityVerdict::Pairable { .. } => {
                if failed {
                    return Err(OracleError::NonMonotone { k });
                }
                pp = k;
            }
            PairabilityVerdict::NotPairable { .. } => failed = true,
            PairabilityVerdict::BudgetExceeded { .. } => {
                levels.push((k, verdict));
                return Ok(PpReport {
                    pp,
                    complete: false,
                    levels,
                });
            }
        }
        levels.push((k, verdict));
    }
    Ok(PpReport {
        pp,
        complete: true,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};
    use crate::pairing::verify;

    fn cfg() -> OracleConfig {
        OracleConfig::default()
    }

    #[test]
    fn c4_crossing_pairs_are_infeasible() {
        let g = generate(Family::Cycle(4)).unwrap();
        let pairing = Pairing::new(vec![(0, 2), (1, 3)]).unwrap();
        assert_eq!(solve_exact(&g, &pairing, &cfg()).unwrap(), Outcome::Infeasible);
        let given = OracleConfig {
            pair_order: PairOrder::Given,
            ..cfg()
        };
        assert_eq!(solve_exact(&g, &pairing, &given).unwrap(), Outcome::Infeasible);
    }

    #[test]
    fn k4_any_two_pairs() {
        let g = generate(Family::Complete(4)).unwrap();
        for pairs in [vec![(0, 1), (2, 3)], vec![(0, 2), (1, 3)], vec![(0, 3), (1, 2)]] {
            let pairing = Pairing::new(pairs).unwrap();
            match solve_exact(&g, &pairing, &cfg()).unwrap() {
                Outcome::Feasible(sys) => assert!(verify(&g, &pairing, &sys).ok),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn empty_pairing_is_feasible() {
        let g = generate(Family::Path(2)).unwrap();
        assert_eq!(
            solve_exact(&g, &Pairing::empty(), &cfg()).unwrap(),
            Outcome::Feasible(PathSystem::default())
        );
    }

    #[test]
    fn budget_is_distinguished_from_infeasible() {
        let g = generate(Family::Cycle(4)).unwrap();
        let pairing = Pairing::new(vec![(0, 2), (1, 3)]).unwrap();
        let tiny = OracleConfig {
            node_budget: 1,
            ..cfg()
        };
        assert_eq!(solve_exact(&g, &pairing, &tiny).unwrap(), Outcome::BudgetExceeded);
        let short = OracleConfig {
            max_total_path_length: Some(3),
            ..cfg()
        };
        assert_eq!(solve_exact(&g, &pairing, &short).unwrap(), Outcome::BudgetExceeded);
    }

    #[test]
    fn long_detour_found_by_deepening() {
        // on a cycle the second pair must take the long way round
        let g = generate(Family::Cycle(8)).unwrap();
        let pairing = Pairing::new(vec![(0, 1), (7, 2)]).unwrap();
        match solve_exact(&g, &pairing, &cfg()).unwrap() {
            Outcome::Feasible(sys) => {
                assert!(verify(&g, &pairing, &sys).ok);
                assert_eq!(sys.routes[1].edge_len(), 5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn placement_counts() {
        let mut count = 0;
        for_each_placement(8, 4, &mut |_| {
            count += 1;
            true
        });
        assert_eq!(count, 105);
        count = 0;
        for_each_placement(5, 2, &mut |_| {
            count += 1;
            true
        });
        assert_eq!(count, 15);
    }

    #[test]
    fn star_is_two_pairable() {
        let g = generate(Family::Star(4)).unwrap();
        assert!(is_k_path_pairable(&g, 2, &cfg()).unwrap().is_pairable());
    }

    #[test]
    fn c4_not_path_pairable() {
        let g = generate(Family::Cycle(4)).unwrap();
        match is_k_path_pairable(&g, 2, &cfg()).unwrap() {
            PairabilityVerdict::NotPairable { counter, .. } => {
                assert_eq!(counter.pairs(), &[(0, 2), (1, 3)]);
            }
            other => panic!("{other:?}"),
        }
        assert!(is_k_path_pairable(&g, 3, &cfg()).is_err());
    }

    #[test]
    fn pp_of_small_graphs() {
        let p3 = generate(Family::Path(3)).unwrap();
        assert_eq!(pp_number(&p3, 1, &cfg()).unwrap().pp, 1);
        let c4 = generate(Family::Cycle(4)).unwrap();
        let report = pp_number(&c4, 2, &cfg()).unwrap();
        assert_eq!((report.pp, report.complete), (1, true));
        let k13 = generate(Family::Star(3)).unwrap();
        assert_eq!(pp_number(&k13, 2, &cfg()).unwrap().pp, 2);
    }
}
