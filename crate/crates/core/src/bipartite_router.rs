//! Three-phase router for full pairings of `K_{m,m} □ K_{m,m}`, `m` even:
//! swarming (each pair gathers in one class), line-up (each pair moves to one
//! line of the next class) and final match (each pair meets at one vertex of
//! the class after that).
//!
//! Layout: the factor `K_{m,m}` has sides `0..m` and `m..2m`, and the product
//! vertex `(g, h)` has index `g * 2m + h`. Class `(c1, c2)` holds the vertices
//! with `g / m = c1` and `h / m = c2`, addressed by `(u, v) = (g % m, h % m)`.

use crate::graph::{cartesian_product, generate, Family, Graph};
use crate::matching::{max_matching, saturate_left_or_witness, BipartiteBuilder, BipartiteGraph, SaturationResult};
use crate::pairing::{EdgeLedger, Pairing, Path, PathSystem};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassId {
    A11,
    A12,
    A22,
    A21,
}

impl ClassId {
    /// Clockwise order; each step flips exactly one factor.
    pub const CYCLE: [ClassId; 4] = [ClassId::A11, ClassId::A12, ClassId::A22, ClassId::A21];

    pub fn sides(self) -> [usize; 2] {
        match self {
            ClassId::A11 => [0, 0],
            ClassId::A12 => [0, 1],
            ClassId::A22 => [1, 1],
            ClassId::A21 => [1, 0],
        }
    }

    pub fn from_sides(s: [usize; 2]) -> ClassId {
        match s {
            [0, 0] => ClassId::A11,
            [0, 1] => ClassId::A12,
            [1, 1] => ClassId::A22,
            _ => ClassId::A21,
        }
    }

    pub fn position(self) -> usize {
        ClassId::CYCLE.iter().position(|&c| c == self).expect("listed")
    }

    pub fn next(self) -> ClassId {
        ClassId::CYCLE[(self.position() + 1) % 4]
    }

    pub fn prev(self) -> ClassId {
        ClassId::CYCLE[(self.position() + 3) % 4]
    }

    pub fn opposite(self) -> ClassId {
        ClassId::CYCLE[(self.position() + 2) % 4]
    }

    /// Factor (0 = first, 1 = second) that changes side on the step to `next()`.
    pub fn step_factor(self) -> usize {
        let [a, b] = self.sides();
        if a == b {
            1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BVertex {
    pub cls: ClassId,
    pub u: usize,
    pub v: usize,
}

impl BVertex {
    fn coord(&self, f: usize) -> usize {
        if f == 0 {
            self.u
        } else {
            self.v
        }
    }

    /// Crosses factor `f` into the other side, setting that coordinate to `value`.
    fn cross(&self, f: usize, value: usize) -> BVertex {
        let mut s = self.cls.sides();
        s[f] ^= 1;
        let cls = ClassId::from_sides(s);
        if f == 0 {
            BVertex { cls, u: value, v: self.v }
        } else {
            BVertex { cls, u: self.u, v: value }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KmmLayout {
    pub m: usize,
}

impl KmmLayout {
    pub fn n(&self) -> usize {
        4 * self.m * self.m
    }

    pub fn index(&self, b: BVertex) -> usize {
        let [c1, c2] = b.cls.sides();
        (c1 * self.m + b.u) * 2 * self.m + c2 * self.m + b.v
    }

    pub fn vertex(&self, i: usize) -> BVertex {
        let (g, h) = (i / (2 * self.m), i % (2 * self.m));
        BVertex {
            cls: ClassId::from_sides([g / self.m, h / self.m]),
            u: g % self.m,
            v: h % self.m,
        }
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        let two_m = 2 * self.m;
        let (ga, ha, gb, hb) = (a / two_m, a % two_m, b / two_m, b % two_m);
        (ga == gb && ha / self.m != hb / self.m) || (ha == hb && ga / self.m != gb / self.m)
    }

    /// Swarming route from `x` into class `to`.
    pub fn ship(&self, x: BVertex, to: ClassId) -> Vec<BVertex> {
        let m = self.m;
        let from = x.cls;
        if to == from {
            vec![x]
        } else if to == from.next() {
            let f = from.step_factor();
            vec![x, x.cross(f, (x.coord(f) + 1) % m)]
        } else if to == from.prev() {
            let f = from.prev().step_factor();
            vec![x, x.cross(f, (x.coord(f) + 1) % m)]
        } else {
            let f = from.step_factor();
            let mid = x.cross(f, (x.coord(f) + 1) % m);
            let g = 1 - f;
            vec![x, mid, mid.cross(g, (mid.coord(g) + 2) % m)]
        }
    }

    pub fn graph(&self) -> Graph {
        let f = generate(Family::CompleteBipartite(self.m, self.m)).expect("m >= 1");
        cartesian_product(&f, &f).expect("product of valid factors")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Full pairing, `m >= 104`: the regime the construction is proved for.
    Strict,
    /// Any even `m >= 6` and partial pairings.
    Explore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KmmPhase {
    Balance,
    Swarm,
    Lineup,
    Repair,
    FinalMatch,
    Assemble,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KmmError {
    #[error("m must be even and at least {min}, got {m}")]
    InvalidM { m: usize, min: usize },
    #[error("strict mode needs the full pairing of {expected} pairs, got {got}")]
    NotFullPairing { expected: usize, got: usize },
    #[error("graph is not K_{{m,m}} □ K_{{m,m}}")]
    NotKmm,
    #[error("invalid pairing: {0}")]
    Pairing(String),
    #[error("class loads {loads:?} cannot be balanced to {target}")]
    BalancingFailed { loads: [usize; 4], target: usize },
    #[error("edge {{{}, {}}} claimed twice during {phase:?}", .edge.0, .edge.1)]
    EdgeConflict { phase: KmmPhase, edge: (usize, usize) },
    #[error("{phase:?} matching failed at {class:?} (line {line:?}): {matched} of {needed} matched")]
    MatchingFailed {
        phase: KmmPhase,
        class: ClassId,
        line: Option<usize>,
        matched: usize,
        needed: usize,
    },
    #[error("collision repair stalled at {class:?} with {collisions} collisions")]
    RepairStalled { class: ClassId, collisions: usize },
    #[error("host load bound broken after {phase:?}: vertex {vertex} has {value} (bound {bound})")]
    HostLoadExceeded {
        phase: KmmPhase,
        vertex: usize,
        value: usize,
        bound: usize,
    },
    #[error("assembled system failed verification: {0}")]
    Unverified(String),
}

impl KmmError {
    pub fn phase(&self) -> Option<KmmPhase> {
        match self {
            KmmError::BalancingFailed { .. } => Some(KmmPhase::Balance),
            KmmError::EdgeConflict { phase, .. }
            | KmmError::MatchingFailed { phase, .. }
            | KmmError::HostLoadExceeded { phase, .. } => Some(*phase),
            KmmError::RepairStalled { .. } => Some(KmmPhase::Repair),
            KmmError::Unverified(_) => Some(KmmPhase::Assemble),
            _ => None,
        }
    }
}

/// Which terminal of a pair swarms, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shipment {
    /// Both terminals start in the same class.
    Stay,
    /// Terminal `side` (0 = first, 1 = second) moves to its partner's class.
    Ship { side: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Destinations {
    pub shipments: Vec<Shipment>,
    /// Pairs hosted per class, in [`ClassId::CYCLE`] order.
    pub loads: [usize; 4],
    /// `Σ |load - m²/2|` after the initial selection and after every flip.
    pub imbalance_trace: Vec<usize>,
}

/// Per-vertex counters for the counting lemmas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostLoad {
    /// Terminals whose swarming route visits the vertex (start, transit or end).
    pub hosted: Vec<u8>,
    /// Swarming edges incident to the vertex.
    pub swarm_edges: Vec<u8>,
    /// Line-up edges leaving the vertex.
    pub lineup_out: Vec<u8>,
    /// Line-up edges arriving at the vertex.
    pub lineup_in: Vec<u8>,
}

impl HostLoad {
    fn new(n: usize) -> Self {
        HostLoad {
            hosted: vec![0; n],
            swarm_edges: vec![0; n],
            lineup_out: vec![0; n],
            lineup_in: vec![0; n],
        }
    }

    pub fn max_hosted(&self) -> usize {
        self.hosted.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn max_swarm_edges(&self) -> usize {
        self.swarm_edges.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn max_after_lineup(&self) -> usize {
        self.swarm_edges
            .iter()
            .zip(&self.lineup_out)
            .map(|(&a, &b)| (a + b) as usize)
            .max()
            .unwrap_or(0)
    }

    /// Swarming plus all line-up edges touching the vertex, either direction.
    pub fn max_incident_after_lineup(&self) -> usize {
        (0..self.hosted.len())
            .map(|v| (self.swarm_edges[v] + self.lineup_out[v] + self.lineup_in[v]) as usize)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineupMetrics {
    pub class: Option<ClassId>,
    pub pairs: usize,
    pub matching_size: usize,
    /// Smallest number of slots a pair may take.
    pub min_degree: usize,
    /// `m²/2 - 16m`.
    pub degree_bound: i64,
    pub initial_collisions: usize,
    pub repair_iterations: usize,
    pub same_row_joins: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalMetrics {
    pub lines: usize,
    pub pairs: usize,
    /// Smallest degree of a pair over the first `m/2` candidates.
    pub min_half_degree: usize,
    /// `m/2 - 26`.
    pub degree_bound: i64,
    /// Lines that needed the full candidate row.
    pub fallbacks: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KmmMetrics {
    pub m: usize,
    pub pairs: usize,
    pub loads: [usize; 4],
    pub balance_flips: usize,
    pub swarm_edges: usize,
    pub joined_in_swarm: usize,
    pub max_hosted: usize,
    pub max_swarm_edges: usize,
    pub max_edges_after_lineup: usize,
    /// Like `max_edges_after_lineup` but also counting arriving line-up edges.
    pub max_incident_after_lineup: usize,
    pub lineup: Vec<LineupMetrics>,
    pub final_match: FinalMetrics,
    pub total_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KmmRouted {
    pub system: PathSystem,
    pub metrics: KmmMetrics,
    pub host_load: HostLoad,
}

/// Picks the swarming terminal of each pair so every class hosts `m²/2`
/// pairs (at most that many for partial pairings).
pub fn choose_destinations(layout: KmmLayout, pairs: &[(usize, usize)]) -> Result<Destinations, KmmError> {
    let target = layout.m * layout.m / 2;
    let class_pos = |v: usize| layout.vertex(v).cls.position();
    let mut shipments = Vec::with_capacity(pairs.len());
    let mut loads = [0usize; 4];
    // bucket[a][b]: pairs hosted in class a whose other terminal started in b
    let mut bucket: Vec<Vec<BTreeSet<usize>>> = vec![vec![BTreeSet::new(); 4]; 4];
    for (i, &(x, y)) in pairs.iter().enumerate() {
        let (cx, cy) = (class_pos(x), class_pos(y));
        if cx == cy {
            shipments.push(Shipment::Stay);
            loads[cx] += 1;
        } else {
            shipments.push(Shipment::Ship { side: 0 });
            loads[cy] += 1;
            bucket[cy][cx].insert(i);
        }
    }
    let imbalance = |l: &[usize; 4]| l.iter().map(|&x| x.abs_diff(target)).sum::<usize>();
    let mut trace = vec![imbalance(&loads)];
    while let Some(over) = (0..4).filter(|&c| loads[c] > target).max_by_key(|&c| (loads[c], 4 - c)) {
        // shortest chain of flips from the overloaded class to one with room
        let mut prev = [usize::MAX; 4];
        prev[over] = over;
        let mut queue = VecDeque::from([over]);
        let mut end = None;
        while let Some(c) = queue.pop_front() {
            if loads[c] < target {
                end = Some(c);
                break;
            }
            for d in 0..4 {
                if prev[d] == usize::MAX && !bucket[c][d].is_empty() {
                    prev[d] = c;
                    queue.push_back(d);
                }
            }
        }
        let Some(mut c) = end else {
            return Err(KmmError::BalancingFailed { loads, target });
        };
        while c != over {
            let from = prev[c];
            let i = *bucket[from][c].iter().next().expect("edge of the search");
            bucket[from][c].remove(&i);
            bucket[c][from].insert(i);
            shipments[i] = match shipments[i] {
                Shipment::Ship { side } => Shipment::Ship { side: 1 - side },
                Shipment::Stay => unreachable!("same-class pairs never sit in a bucket"),
            };
            c = from;
        }
        loads[over] -= 1;
        loads[end.expect("found")] += 1;
        let now = imbalance(&loads);
        debug_assert!(now < *trace.last().expect("seeded"));
        trace.push(now);
    }
    Ok(Destinations {
        shipments,
        loads,
        imbalance_trace: trace,
    })
}

struct PairState {
    ends: [usize; 2],
    /// Route from terminal `side` to where it waits after swarming.
    approach: [Vec<usize>; 2],
    joined: bool,
    landing: Option<[usize; 2]>,
    meet: Option<usize>,
}

impl PairState {
    fn host(&self, side: usize) -> usize {
        *self.approach[side].last().expect("nonempty")
    }
}

/// The swarming phase: ships the chosen terminals and claims their edges.
pub fn swarm(
    layout: KmmLayout,
    pairs: &[(usize, usize)],
    dest: &Destinations,
    ledger: &mut EdgeLedger,
) -> Result<(Vec<[Vec<usize>; 2]>, HostLoad), KmmError> {
    let mut load = HostLoad::new(layout.n());
    let mut out = Vec::with_capacity(pairs.len());
    for (&(x, y), &ship) in pairs.iter().zip(&dest.shipments) {
        let mut approach = [vec![x], vec![y]];
        if let Shipment::Ship { side } = ship {
            let (from, to) = if side == 0 { (x, y) } else { (y, x) };
            let route: Vec<usize> = layout
                .ship(layout.vertex(from), layout.vertex(to).cls)
                .into_iter()
                .map(|b| layout.index(b))
                .collect();
            ledger.claim_vertices(&route).map_err(|e| KmmError::EdgeConflict {
                phase: KmmPhase::Swarm,
                edge: e.edge,
            })?;
            for w in route.windows(2) {
                load.swarm_edges[w[0]] += 1;
                load.swarm_edges[w[1]] += 1;
            }
            for &v in &route[1..] {
                load.hosted[v] += 1;
            }
            approach[side] = route;
        }
        load.hosted[x] += 1;
        load.hosted[y] += 1;
        out.push(approach);
    }
    for (phase, values, bound) in [(KmmPhase::Swarm, &load.hosted, 5usize), (KmmPhase::Swarm, &load.swarm_edges, 8)] {
        if let Some((vertex, &value)) = values.iter().enumerate().find(|(_, &c)| c as usize > bound) {
            return Err(KmmError::HostLoadExceeded {
                phase,
                vertex,
                value: value as usize,
                bound,
            });
        }
    }
    Ok((out, load))
}

/// Checks the parameter regime and the pairing.
fn admit(layout: KmmLayout, pairing: &Pairing, mode: Mode) -> Result<(), KmmError> {
    let m = layout.m;
    let min = match mode {
        Mode::Strict => 104,
        Mode::Explore => 6,
    };
    if m % 2 == 1 || m < min {
        return Err(KmmError::InvalidM { m, min });
    }
    pairing
        .check_range(layout.n())
        .map_err(|e| KmmError::Pairing(e.to_string()))?;
    if mode == Mode::Strict && pairing.len() != 2 * m * m {
        return Err(KmmError::NotFullPairing {
            expected: 2 * m * m,
            got: pairing.len(),
        });
    }
    Ok(())
}

/// Routes on a given graph after checking it is `K_{m,m} □ K_{m,m}`.
pub fn route_full(graph: &Graph, pairing: &Pairing, mode: Mode) -> Result<KmmRouted, KmmError> {
    let n = graph.n();
    let m = (1..).take_while(|m| 4 * m * m <= n).last().unwrap_or(0);
    if m == 0 || 4 * m * m != n || graph.edge_count() != 4 * m * m * m {
        return Err(KmmError::NotKmm);
    }
    let layout = KmmLayout { m };
    if (0..n).any(|v| graph.neighbors(v).any(|w| !layout.adjacent(v, w))) {
        return Err(KmmError::NotKmm);
    }
    route_kmm(m, pairing, mode)
}

/// Routes a pairing of `K_{m,m} □ K_{m,m}` given only `m`.
pub fn route_kmm(m: usize, pairing: &Pairing, mode: Mode) -> Result<KmmRouted, KmmError> {
    let layout = KmmLayout { m };
    admit(layout, pairing, mode)?;
    let pairs = pairing.pairs();
    let mut metrics = KmmMetrics {
        m,
        pairs: pairs.len(),
        ..KmmMetrics::default()
    };
    let dest = choose_destinations(layout, pairs)?;
    metrics.loads = dest.loads;
    metrics.balance_flips = dest.imbalance_trace.len() - 1;

    let mut ledger = EdgeLedger::new();
    let (approaches, mut host_load) = swarm(layout, pairs, &dest, &mut ledger)?;
    metrics.swarm_edges = ledger.len();
    metrics.max_hosted = host_load.max_hosted();
    metrics.max_swarm_edges = host_load.max_swarm_edges();

    let mut state: Vec<PairState> = pairs
        .iter()
        .zip(approaches)
        .map(|(&(x, y), approach)| PairState {
            ends: [x, y],
            approach,
            joined: false,
            landing: None,
            meet: None,
        })
        .collect();
    for s in &mut state {
        if s.host(0) == s.host(1) {
            s.joined = true;
            metrics.joined_in_swarm += 1;
        }
    }

    for cls in ClassId::CYCLE {
        let lm = lineup(layout, cls, &mut state, &mut ledger, &mut host_load)?;
        metrics.lineup.push(lm);
    }
    metrics.max_edges_after_lineup = host_load.max_after_lineup();
    metrics.max_incident_after_lineup = host_load.max_incident_after_lineup();
    if let Some((vertex, value)) = host_load
        .swarm_edges
        .iter()
        .zip(&host_load.lineup_out)
        .map(|(&a, &b)| (a + b) as usize)
        .enumerate()
        .find(|&(_, c)| c > 13)
    {
        return Err(KmmError::HostLoadExceeded {
            phase: KmmPhase::Lineup,
            vertex,
            value,
            bound: 13,
        });
    }

    metrics.final_match = final_match(layout, &mut state, &mut ledger)?;
    metrics.total_edges = ledger.len();

    let routes: Vec<Path> = state.iter().map(assemble).collect();
    let system = PathSystem { routes };
    check(layout, pairs, &system)?;
    Ok(KmmRouted {
        system,
        metrics,
        host_load,
    })
}

fn assemble(s: &PairState) -> Path {
    let mut route = s.approach[0].clone();
    match s.landing {
        Some([a, b]) => {
            route.push(a);
            if a != b {
                route.push(s.meet.expect("final match ran for every open pair"));
                route.push(b);
            }
            route.extend(s.approach[1].iter().rev());
        }
        // met during swarming: both approaches end on the same vertex
        None => route.extend(s.approach[1].iter().rev().skip(1)),
    }
    debug_assert_eq!(route.first(), Some(&s.ends[0]));
    Path(route)
}

/// Line-up of the pairs hosted in `cls` into lines of the next class.
fn lineup(
    layout: KmmLayout,
    cls: ClassId,
    state: &mut [PairState],
    ledger: &mut EdgeLedger,
    load: &mut HostLoad,
) -> Result<LineupMetrics, KmmError> {
    let m = layout.m;
    let f = cls.step_factor();
    let members: Vec<usize> = (0..state.len())
        .filter(|&i| !state[i].joined && layout.vertex(state[i].host(0)).cls == cls)
        .collect();
    let hosts: Vec<[BVertex; 2]> = members
        .iter()
        .map(|&i| [layout.vertex(state[i].host(0)), layout.vertex(state[i].host(1))])
        .collect();
    let local = |b: BVertex| b.u * m + b.v;
    let target = |b: BVertex, line: usize| layout.index(b.cross(f, line));
    let free = |ledger: &EdgeLedger, b: BVertex, line: usize| !ledger.is_used(layout.index(b), target(b, line));
    let admissible: Vec<Vec<usize>> = hosts
        .iter()
        .map(|&[p, q]| (0..m).filter(|&l| free(ledger, p, l) && free(ledger, q, l)).collect())
        .collect();
    let half = m / 2;
    let graph = BipartiteGraph::with_replicated_right(m, half, &admissible);
    let mut metrics = LineupMetrics {
        class: Some(cls),
        pairs: members.len(),
        min_degree: graph.min_left_degree().unwrap_or(0),
        degree_bound: (m * m / 2) as i64 - 16 * m as i64,
        ..LineupMetrics::default()
    };
    let matching = max_matching(&graph);
    metrics.matching_size = matching.size();
    if matching.size() < members.len() {
        return Err(KmmError::MatchingFailed {
            phase: KmmPhase::Lineup,
            class: cls,
            line: None,
            matched: matching.size(),
            needed: members.len(),
        });
    }
    let mut line: Vec<usize> = matching
        .left_to_right
        .iter()
        .map(|r| r.expect("saturating") / half)
        .collect();
    let mut allowed = vec![vec![false; m]; members.len()];
    for (p, ls) in admissible.iter().enumerate() {
        for &l in ls {
            allowed[p][l] = true;
        }
    }

    // count[l][host]: terminals sent from `host` into line `l`
    let mut count = vec![vec![0u8; m * m]; m];
    let mut on_line: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
    for (p, &l) in line.iter().enumerate() {
        for b in hosts[p] {
            count[l][local(b)] += 1;
        }
        on_line[l].insert(p);
    }
    let collisions = |count: &Vec<Vec<u8>>| -> usize {
        count
            .iter()
            .flat_map(|row| row.iter())
            .map(|&c| c.saturating_sub(1) as usize)
            .sum()
    };
    let mut current = collisions(&count);
    metrics.initial_collisions = current;
    while current > 0 {
        let colliding = (0..members.len())
            .find(|&p| hosts[p].iter().any(|&b| count[line[p]][local(b)] > 1))
            .expect("positive count has a witness");
        let l = line[colliding];
        let lands_clean = |count: &Vec<Vec<u8>>, p: usize, at: usize, leaving: Option<usize>| {
            hosts[p].iter().all(|&b| {
                let mut c = count[at][local(b)];
                if let Some(q) = leaving {
                    c -= hosts[q].iter().filter(|&&x| x == b).count() as u8;
                }
                c == 0
            })
        };
        let mut swap = None;
        'search: for l2 in (0..m).filter(|&x| x != l && allowed[colliding][x]) {
            for &q in &on_line[l2] {
                if allowed[q][l]
                    && lands_clean(&count, colliding, l2, Some(q))
                    && lands_clean(&count, q, l, Some(colliding))
                {
                    swap = Some((l2, q));
                    break 'search;
                }
            }
        }
        let Some((l2, q)) = swap else {
            return Err(KmmError::RepairStalled {
                class: cls,
                collisions: current,
            });
        };
        for b in hosts[colliding] {
            count[l][local(b)] -= 1;
            count[l2][local(b)] += 1;
        }
        for b in hosts[q] {
            count[l2][local(b)] -= 1;
            count[l][local(b)] += 1;
        }
        on_line[l].remove(&colliding);
        on_line[l].insert(q);
        on_line[l2].remove(&q);
        on_line[l2].insert(colliding);
        line[colliding] = l2;
        line[q] = l;
        let next = collisions(&count);
        assert!(next < current, "repair must reduce collisions");
        current = next;
        metrics.repair_iterations += 1;
    }

    for (p, &i) in members.iter().enumerate() {
        let l = line[p];
        let [a, b] = hosts[p];
        let (ta, tb) = (target(a, l), target(b, l));
        for (from, to) in [(layout.index(a), ta), (layout.index(b), tb)] {
            ledger.claim_vertices(&[from, to]).map_err(|e| KmmError::EdgeConflict {
                phase: KmmPhase::Lineup,
                edge: e.edge,
            })?;
            load.lineup_out[from] += 1;
            load.lineup_in[to] += 1;
        }
        metrics.edges += 2;
        state[i].landing = Some([ta, tb]);
        if ta == tb {
            state[i].joined = true;
            metrics.same_row_joins += 1;
        }
    }
    Ok(metrics)
}

/// Joins each lined-up pair through one vertex of the class after its line.
fn final_match(layout: KmmLayout, state: &mut [PairState], ledger: &mut EdgeLedger) -> Result<FinalMetrics, KmmError> {
    let m = layout.m;
    let half = m / 2;
    let mut metrics = FinalMetrics {
        degree_bound: half as i64 - 26,
        min_half_degree: usize::MAX,
        ..FinalMetrics::default()
    };
    // group open pairs by (class of landing, line)
    let mut lines: std::collections::BTreeMap<(ClassId, usize), Vec<usize>> = std::collections::BTreeMap::new();
    for (i, s) in state.iter().enumerate() {
        if let (false, Some([a, _])) = (s.joined, s.landing) {
            let va = layout.vertex(a);
            let line_factor = va.cls.prev().step_factor();
            lines.entry((va.cls, va.coord(line_factor))).or_default().push(i);
        }
    }
    for ((cls, l), members) in lines {
        let f = cls.step_factor();
        let landings: Vec<[BVertex; 2]> = members
            .iter()
            .map(|&i| {
                let [a, b] = state[i].landing.expect("grouped by landing");
                [layout.vertex(a), layout.vertex(b)]
            })
            .collect();
        let meet = |p: &[BVertex; 2], c: usize| layout.index(p[0].cross(f, c));
        let ok = |p: &[BVertex; 2], c: usize| {
            let w = meet(p, c);
            !ledger.is_used(layout.index(p[0]), w) && !ledger.is_used(layout.index(p[1]), w)
        };
        let build = |candidates: usize| {
            let mut b = BipartiteBuilder::new(candidates);
            for p in &landings {
                b.push_left((0..candidates).filter(|&c| ok(p, c)));
            }
            b.build()
        };
        let half_graph = build(half);
        metrics.min_half_degree = metrics.min_half_degree.min(half_graph.min_left_degree().unwrap_or(half));
        let chosen = match saturate_left_or_witness(&half_graph) {
            SaturationResult::Saturating(v) => v,
            SaturationResult::HallViolator(_) => {
                metrics.fallbacks += 1;
                let full = build(m);
                match saturate_left_or_witness(&full) {
                    SaturationResult::Saturating(v) => v,
                    SaturationResult::HallViolator(_) => {
                        let matched = max_matching(&full).size();
                        return Err(KmmError::MatchingFailed {
                            phase: KmmPhase::FinalMatch,
                            class: cls,
                            line: Some(l),
                            matched,
                            needed: members.len(),
                        });
                    }
                }
            }
        };
        for ((&i, p), c) in members.iter().zip(&landings).zip(chosen) {
            let w = meet(p, c);
            ledger
                .claim_vertices(&[layout.index(p[0]), w, layout.index(p[1])])
                .map_err(|e| KmmError::EdgeConflict {
                    phase: KmmPhase::FinalMatch,
                    edge: e.edge,
                })?;
            state[i].meet = Some(w);
            metrics.edges += 2;
        }
        metrics.lines += 1;
        metrics.pairs += members.len();
    }
    if metrics.lines == 0 {
        metrics.min_half_degree = 0;
    }
    Ok(metrics)
}

/// Endpoint, adjacency and edge-disjointness check from the layout alone.
fn check(layout: KmmLayout, pairs: &[(usize, usize)], system: &PathSystem) -> Result<(), KmmError> {
    let mut seen = EdgeLedger::new();
    for (i, (r, &(x, y))) in system.routes.iter().zip(pairs).enumerate() {
        if r.first() != Some(x) || r.last() != Some(y) {
            return Err(KmmError::Unverified(format!("route {i} has wrong endpoints")));
        }
        if let Some((a, b)) = r.edges().find(|&(a, b)| !layout.adjacent(a, b)) {
            return Err(KmmError::Unverified(format!("route {i} steps along non-edge {a}-{b}")));
        }
        seen.claim(r)
            .map_err(|e| KmmError::Unverified(format!("route {i}: {e}")))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::verify;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn full_pairing(m: usize, seed: u64) -> Pairing {
        let mut v: Vec<usize> = (0..4 * m * m).collect();
        v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Pairing::new(v.chunks(2).map(|c| (c[0], c[1])).collect()).unwrap()
    }

    #[test]
    fn cycle_steps_flip_one_factor() {
        for c in ClassId::CYCLE {
            let (a, b) = (c.sides(), c.next().sides());
            let f = c.step_factor();
            assert_ne!(a[f], b[f]);
            assert_eq!(a[1 - f], b[1 - f]);
            assert_eq!(c.next().prev(), c);
            assert_eq!(c.opposite().opposite(), c);
        }
    }

    #[test]
    fn layout_round_trip_and_adjacency() {
        let layout = KmmLayout { m: 3 };
        let g = layout.graph();
        for v in 0..layout.n() {
            assert_eq!(layout.index(layout.vertex(v)), v);
            for w in 0..layout.n() {
                assert_eq!(layout.adjacent(v, w), g.has_edge(v, w));
            }
        }
    }

    #[test]
    fn shipping_examples() {
        let layout = KmmLayout { m: 6 };
        let x = BVertex {
            cls: ClassId::A11,
            u: 2,
            v: 3,
        };
        let to12 = layout.ship(x, ClassId::A12);
        assert_eq!(to12[1], BVertex { cls: ClassId::A12, u: 2, v: 4 });
        let to22 = layout.ship(x, ClassId::A22);
        assert_eq!(to22[1], BVertex { cls: ClassId::A12, u: 2, v: 4 });
        assert_eq!(to22[2], BVertex { cls: ClassId::A22, u: 4, v: 4 });
        let to21 = layout.ship(x, ClassId::A21);
        assert_eq!(to21[1], BVertex { cls: ClassId::A21, u: 3, v: 3 });
    }

    #[test]
    fn balancing_reaches_equal_loads() {
        for seed in 0..5 {
            let m = 8;
            let p = full_pairing(m, seed);
            let d = choose_destinations(KmmLayout { m }, p.pairs()).unwrap();
            assert_eq!(d.loads, [32; 4]);
            assert!(d.imbalance_trace.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn internal_pairs_are_not_shipped() {
        let layout = KmmLayout { m: 2 };
        // vertices 0 and 1 are (g=0,h=0), (g=0,h=1): both in A11
        let d = choose_destinations(layout, &[(0, 1)]).unwrap();
        assert_eq!(d.shipments, vec![Shipment::Stay]);
    }

    #[test]
    fn swarming_never_reuses_edges() {
        for m in [6, 8, 10, 12] {
            for seed in 0..100 {
                let layout = KmmLayout { m };
                let p = full_pairing(m, seed);
                let d = choose_destinations(layout, p.pairs()).unwrap();
                let mut ledger = EdgeLedger::new();
                let (_, load) = swarm(layout, p.pairs(), &d, &mut ledger).unwrap();
                assert!(load.max_hosted() <= 5 && load.max_swarm_edges() <= 8);
            }
        }
    }

    #[test]
    fn explore_mode_small_m() {
        for m in [12, 16, 20] {
            let p = full_pairing(m, 1);
            match route_kmm(m, &p, Mode::Explore) {
                Ok(r) => {
                    assert!(verify(&KmmLayout { m }.graph(), &p, &r.system).ok);
                }
                Err(e) => assert!(e.phase().is_some(), "{e}"),
            }
        }
    }

    #[test]
    fn strict_mode_rejects_small_or_odd_m() {
        let p = full_pairing(6, 0);
        assert!(matches!(route_kmm(6, &p, Mode::Strict), Err(KmmError::InvalidM { .. })));
        assert!(matches!(route_kmm(7, &Pairing::empty(), Mode::Explore), Err(KmmError::InvalidM { .. })));
    }

    #[test]
    fn route_full_rejects_other_graphs() {
        let g = generate(Family::Complete(16)).unwrap();
        assert_eq!(route_full(&g, &Pairing::empty(), Mode::Explore), Err(KmmError::NotKmm));
    }
}
