//! Constructive routers for products `G □ H` whose factors come with a
//! layer solver of known capacity, and the sweep router for blown-up paths.
//!
//! A product route is assembled from segments: an optional shift inside the
//! terminal's H-layer, a leg inside a G-layer to a pseudopair, a bridge inside
//! a terminal-free H-layer, and the mirror image on the partner's side.

mod solvers;
mod sweep;

pub use solvers::{CompleteSolver, LayerFailure, LayerSolver, OracleSolver, SweepSolver};
pub use sweep::SweepError;

use crate::constructions::BlownUpPath;
use crate::graph::{Graph, LayerKind, LayerRef, ProductShape, ProductVertex};
use crate::pairing::{verify_raw, EdgeLedger, LedgerConflict, Pairing, Path, PathSystem};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RouterError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("{solver} solver failed on {layer:?} with {pairs} pairs (capability {capability}): {reason}")]
    LayerSolverFailed {
        solver: &'static str,
        layer: LayerRef,
        pairs: usize,
        capability: usize,
        reason: String,
    },
    #[error("sweep invariant violated at class {class}: {detail}")]
    SweepInvariantViolated { class: usize, detail: String },
    #[error("phase invariant violated: {0}")]
    PhaseInvariant(String),
    #[error(transparent)]
    Ledger(#[from] LedgerConflict),
    #[error("assembled system failed verification: {0}")]
    Unverified(String),
}

impl From<SweepError> for RouterError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Invariant { class, detail } => RouterError::SweepInvariantViolated { class, detail },
            SweepError::OutOfRange(v) => RouterError::PreconditionViolated(format!("terminal {v} out of range")),
            SweepError::Blocked(u, v) => RouterError::SweepInvariantViolated {
                class: 0,
                detail: format!("edge {{{u}, {v}}} unavailable"),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RouteOptions {
    /// Skip the size and count preconditions and just try.
    pub unchecked: bool,
}

/// A terminal moved to a stand-in vertex, with the path that moved it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pseudopair {
    pub terminal: usize,
    pub stand_in: usize,
    pub connector: Path,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Redistribution {
    None,
    /// One overloaded G-layer relieved into a single other layer.
    SingleOverload,
    /// Two overloaded layers and `b = 1`: one pair moved out.
    MovePair,
    /// Every terminal of the overloaded layers spread over empty layers.
    Spread,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum Phase {
    Classify {
        /// `(layer anchor, pair types)` for every overloaded G-layer.
        overloaded: Vec<(usize, usize)>,
        redistribution: Redistribution,
    },
    Shift {
        moves: Vec<Pseudopair>,
    },
    DirectJoin {
        pair: usize,
        path: Path,
    },
    Bridge {
        pair: usize,
        h_layer: usize,
        pseudopairs: [usize; 2],
    },
    LayerRoute {
        layer: LayerRef,
        pairs: Vec<(usize, usize)>,
        edges: usize,
    },
    Sweep {
        pairs: usize,
        edges: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub a: usize,
    pub b: usize,
    /// Factors were exchanged so that `a >= b`.
    pub swapped: bool,
    pub phases: Vec<Phase>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Routed {
    pub system: PathSystem,
    pub plan: RoutePlan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    Sum,
    Product,
}

/// Routes up to `a + b` pairs, `a`/`b` being the solvers' capabilities.
pub fn route_theorem1(
    g: &Graph,
    h: &Graph,
    solver_g: &dyn LayerSolver,
    solver_h: &dyn LayerSolver,
    pairing: &Pairing,
    opts: RouteOptions,
) -> Result<Routed, RouterError> {
    route_product(g, h, solver_g, solver_h, pairing, opts, Bound::Sum)
}

/// Routes `s < (a+1)(b+1)/2` pairs when both factors have at least `4s` vertices.
pub fn route_theorem2(
    g: &Graph,
    h: &Graph,
    solver_g: &dyn LayerSolver,
    solver_h: &dyn LayerSolver,
    pairing: &Pairing,
    opts: RouteOptions,
) -> Result<Routed, RouterError> {
    route_product(g, h, solver_g, solver_h, pairing, opts, Bound::Product)
}

/// Routes up to `m²` pairs on `G(k, m)` with `k >= 2m`.
pub fn route_blownup_sweep(bp: &BlownUpPath, pairing: &Pairing, opts: RouteOptions) -> Result<Routed, RouterError> {
    pairing
        .check_range(bp.graph.n())
        .map_err(|e| RouterError::PreconditionViolated(e.to_string()))?;
    if !opts.unchecked {
        if bp.k < 2 * bp.m {
            return Err(RouterError::PreconditionViolated(format!(
                "need k >= 2m, got k = {}, m = {}",
                bp.k, bp.m
            )));
        }
        if pairing.len() > bp.m * bp.m {
            return Err(RouterError::PreconditionViolated(format!(
                "{} pairs exceed m² = {}",
                pairing.len(),
                bp.m * bp.m
            )));
        }
    }
    let routes = sweep::sweep_paths(bp, pairing.pairs(), &|_, _| true)?;
    let system = PathSystem { routes };
    let report = verify_raw(&bp.graph, pairing.pairs(), &system);
    if !report.ok {
        return Err(RouterError::Unverified(format!("{:?}", report.failures)));
    }
    Ok(Routed {
        plan: RoutePlan {
            a: bp.m * bp.m,
            b: 0,
            swapped: false,
            phases: vec![Phase::Sweep {
                pairs: pairing.len(),
                edges: system.total_edges(),
            }],
        },
        system,
    })
}

fn route_product(
    g: &Graph,
    h: &Graph,
    solver_g: &dyn LayerSolver,
    solver_h: &dyn LayerSolver,
    pairing: &Pairing,
    opts: RouteOptions,
    bound: Bound,
) -> Result<Routed, RouterError> {
    let shape = ProductShape { g_n: g.n(), h_n: h.n() };
    pairing
        .check_range(shape.n())
        .map_err(|e| RouterError::PreconditionViolated(e.to_string()))?;
    if solver_g.capability() < solver_h.capability() {
        let swapped = ProductShape { g_n: h.n(), h_n: g.n() };
        let flip = |v: usize| {
            let p = shape.coords(v);
            swapped.index(ProductVertex { g: p.h, h: p.g })
        };
        let unflip = |v: usize| {
            let p = swapped.coords(v);
            shape.index(ProductVertex { g: p.h, h: p.g })
        };
        let pairs: Vec<(usize, usize)> = pairing.pairs().iter().map(|&(x, y)| (flip(x), flip(y))).collect();
        let inner = Pairing::new(pairs).expect("a bijection keeps terminals distinct");
        let mut routed = route_product(h, g, solver_h, solver_g, &inner, opts, bound)?;
        for r in &mut routed.system.routes {
            r.0.iter_mut().for_each(|v| *v = unflip(*v));
        }
        routed.plan.swapped = true;
        return Ok(routed);
    }
    let mut job = Job {
        g,
        h,
        shape,
        solver_g,
        solver_h,
        a: solver_g.capability(),
        b: solver_h.capability(),
        pairs: pairing.pairs().to_vec(),
        ledger: EdgeLedger::new(),
        phases: Vec::new(),
    };
    if !opts.unchecked {
        job.check_preconditions(bound)?;
    }
    let routes = job.run(bound)?;
    let system = PathSystem { routes };
    job.verify(&system)?;
    Ok(Routed {
        system,
        plan: RoutePlan {
            a: job.a,
            b: job.b,
            swapped: false,
            phases: job.phases,
        },
    })
}

struct Job<'a> {
    g: &'a Graph,
    h: &'a Graph,
    shape: ProductShape,
    solver_g: &'a dyn LayerSolver,
    solver_h: &'a dyn LayerSolver,
    a: usize,
    b: usize,
    pairs: Vec<(usize, usize)>,
    ledger: EdgeLedger,
    phases: Vec<Phase>,
}

/// Per-pair segments, oriented from the first terminal to the second.
#[derive(Default, Clone)]
struct Segments {
    shift: [Option<Path>; 2],
    whole: Option<Path>,
    leg: [Option<Path>; 2],
    bridge: Option<Path>,
    direct: Option<Path>,
}

#[derive(Clone, Copy)]
enum Slot {
    Whole(usize),
    Leg(usize, usize),
}

impl<'a> Job<'a> {
    fn at(&self, g: usize, h: usize) -> usize {
        self.shape.index(ProductVertex { g, h })
    }

    fn check_preconditions(&self, bound: Bound) -> Result<(), RouterError> {
        let (a, b, s) = (self.a, self.b, self.pairs.len());
        let (gn, hn) = (self.g.n(), self.h.n());
        let fail = |msg: String| Err(RouterError::PreconditionViolated(msg));
        match bound {
            Bound::Sum => {
                if s > a + b {
                    return fail(format!("{s} pairs exceed a + b = {}", a + b));
                }
                if gn < 8 * a || hn < 8 * b {
                    return fail(format!("need |V(G)| >= 8a and |V(H)| >= 8b, got {gn}, {hn} with a = {a}, b = {b}"));
                }
            }
            Bound::Product => {
                if 2 * s >= (a + 1) * (b + 1) {
                    return fail(format!("s = {s} is not below (a+1)(b+1)/2 with a = {a}, b = {b}"));
                }
                if gn < 4 * s || hn < 4 * s {
                    return fail(format!("need both factors of size >= 4s = {}, got {gn}, {hn}", 4 * s));
                }
            }
        }
        if b == 0 && s > 0 {
            return fail("factor capability must be at least 1".into());
        }
        Ok(())
    }

    /// Pair types per G-layer for the given terminal positions.
    fn types(&self, pos: &[[usize; 2]], skip: &[bool]) -> BTreeMap<usize, BTreeSet<usize>> {
        let mut t: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for (i, p) in pos.iter().enumerate() {
            if skip[i] {
                continue;
            }
            for &v in p {
                t.entry(self.shape.coords(v).h).or_default().insert(i);
            }
        }
        t
    }

    fn run(&mut self, bound: Bound) -> Result<Vec<Path>, RouterError> {
        let k = self.pairs.len();
        if k == 0 {
            return Ok(Vec::new());
        }
        let terminals: BTreeSet<usize> = self.pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
        let terminal_g: BTreeSet<usize> = terminals.iter().map(|&v| self.shape.coords(v).g).collect();
        let mut pos: Vec<[usize; 2]> = self.pairs.iter().map(|&(x, y)| [x, y]).collect();
        let mut seg: Vec<Segments> = vec![Segments::default(); k];
        let mut finished = vec![false; k];

        let types = self.types(&pos, &finished);
        let overloaded: Vec<(usize, usize)> = types
            .iter()
            .filter(|(_, s)| s.len() > self.a)
            .map(|(&x, s)| (x, s.len()))
            .collect();
        let redistribution = match (bound, overloaded.len()) {
            (_, 0) => Redistribution::None,
            (Bound::Sum, 1) => Redistribution::SingleOverload,
            (Bound::Sum, 2) if self.b == 1 => Redistribution::MovePair,
            _ => Redistribution::Spread,
        };
        self.phases.push(Phase::Classify {
            overloaded: overloaded.clone(),
            redistribution,
        });

        // requested shifts: (pair, side, target G-layer)
        let mut shifts: Vec<(usize, usize, usize)> = Vec::new();
        let occupied: BTreeSet<usize> = types.keys().copied().collect();
        let empty_layers: Vec<usize> = (0..self.h.n()).filter(|x| !occupied.contains(x)).collect();
        match redistribution {
            Redistribution::None => {}
            Redistribution::SingleOverload => {
                let (x, count) = overloaded[0];
                let excess = count - self.a;
                let mut per_layer = vec![0usize; self.h.n()];
                for &v in &terminals {
                    per_layer[self.shape.coords(v).h] += 1;
                }
                let y = (0..self.h.n())
                    .filter(|&y| y != x)
                    .min_by_key(|&y| (per_layer[y], y))
                    .ok_or_else(|| RouterError::PhaseInvariant("no relief layer".into()))?;
                let relief_types = types.get(&y).map_or(0, |s| s.len());
                if relief_types + excess > self.a {
                    return Err(RouterError::PhaseInvariant(format!(
                        "relief layer {y} has {relief_types} types, room for {}",
                        self.a.saturating_sub(excess)
                    )));
                }
                // whole pairs inside G_x first, then singletons, by vertex
                let in_x = |v: usize| self.shape.coords(v).h == x;
                let mut whole: Vec<usize> = Vec::new();
                let mut single: Vec<(usize, usize)> = Vec::new();
                for &i in &types[&x] {
                    let [u, v] = pos[i];
                    match (in_x(u), in_x(v)) {
                        (true, true) => whole.push(i),
                        (true, false) => single.push((u, i)),
                        _ => single.push((v, i)),
                    }
                }
                whole.sort_by_key(|&i| pos[i][0].min(pos[i][1]));
                single.sort();
                let free = |v: usize| !terminals.contains(&self.at(self.shape.coords(v).g, y));
                let mut chosen = 0;
                for i in whole {
                    if chosen == excess {
                        break;
                    }
                    if free(pos[i][0]) && free(pos[i][1]) {
                        shifts.push((i, 0, y));
                        shifts.push((i, 1, y));
                        chosen += 1;
                    }
                }
                for (v, i) in single {
                    if chosen == excess {
                        break;
                    }
                    if free(v) {
                        shifts.push((i, if pos[i][0] == v { 0 } else { 1 }, y));
                        chosen += 1;
                    }
                }
                if chosen < excess {
                    return Err(RouterError::PhaseInvariant(format!(
                        "only {chosen} of {excess} types could move from layer {x} to {y}"
                    )));
                }
            }
            Redistribution::MovePair => {
                let (x1, x2) = (overloaded[0].0, overloaded[1].0);
                let layer_of = |v: usize| self.shape.coords(v).h;
                let pick = (0..k)
                    .filter(|&i| {
                        let (l0, l1) = (layer_of(pos[i][0]), layer_of(pos[i][1]));
                        (l0 == x1 && l1 == x2) || (l0 == x2 && l1 == x1)
                    })
                    .min_by_key(|&i| (pos[i][0].min(pos[i][1]), pos[i][0].max(pos[i][1])));
                match pick {
                    None => self.spread(&overloaded, &pos, &empty_layers, &mut shifts)?,
                    Some(i) => {
                        let [u, v] = pos[i];
                        let (cu, cv) = (self.shape.coords(u), self.shape.coords(v));
                        if cu.g == cv.g {
                            let layer = LayerRef {
                                kind: LayerKind::H,
                                anchor: cu.g,
                            };
                            let path = self.solve_layer(layer, &[(cu.h, cv.h)])?.remove(0);
                            self.phases.push(Phase::DirectJoin { pair: i, path: path.clone() });
                            seg[i].direct = Some(path);
                            finished[i] = true;
                        } else {
                            let z = *empty_layers
                                .first()
                                .ok_or_else(|| RouterError::PhaseInvariant("no empty G-layer".into()))?;
                            shifts.push((i, 0, z));
                            shifts.push((i, 1, z));
                        }
                    }
                }
            }
            Redistribution::Spread => self.spread(&overloaded, &pos, &empty_layers, &mut shifts)?,
        }
        self.apply_shifts(&shifts, &mut pos, &mut seg)?;

        let types = self.types(&pos, &finished);
        if let Some((x, s)) = types.iter().find(|(_, s)| s.len() > self.a) {
            return Err(RouterError::PhaseInvariant(format!(
                "G-layer {x} still carries {} types after redistribution",
                s.len()
            )));
        }

        // bridges for pairs split across G-layers
        let mut bridge_load: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut bridge_of: Vec<Option<usize>> = vec![None; k];
        for i in 0..k {
            if finished[i] {
                continue;
            }
            let (cu, cv) = (self.shape.coords(pos[i][0]), self.shape.coords(pos[i][1]));
            if cu.h == cv.h {
                continue;
            }
            let star = (0..self.g.n())
                .filter(|gs| !terminal_g.contains(gs))
                .find(|gs| {
                    let taken = bridge_load.get(gs).map_or(&[][..], |v| v.as_slice());
                    taken.len() < 2 * self.b && !taken.contains(&cu.h) && !taken.contains(&cv.h)
                })
                .ok_or_else(|| RouterError::PhaseInvariant(format!("no terminal-free H-layer left for pair {i}")))?;
            bridge_load.entry(star).or_default().extend([cu.h, cv.h]);
            bridge_of[i] = Some(star);
            self.phases.push(Phase::Bridge {
                pair: i,
                h_layer: star,
                pseudopairs: [self.at(star, cu.h), self.at(star, cv.h)],
            });
        }

        // G-layer routing: whole pairs and legs to pseudopairs
        let mut per_layer: BTreeMap<usize, Vec<((usize, usize), Slot)>> = BTreeMap::new();
        for i in 0..k {
            if finished[i] {
                continue;
            }
            let (cu, cv) = (self.shape.coords(pos[i][0]), self.shape.coords(pos[i][1]));
            match bridge_of[i] {
                None => per_layer.entry(cu.h).or_default().push(((cu.g, cv.g), Slot::Whole(i))),
                Some(star) => {
                    per_layer.entry(cu.h).or_default().push(((cu.g, star), Slot::Leg(i, 0)));
                    per_layer.entry(cv.h).or_default().push(((cv.g, star), Slot::Leg(i, 1)));
                }
            }
        }
        for (x, items) in per_layer {
            if items.len() > self.a {
                return Err(RouterError::PhaseInvariant(format!(
                    "G-layer {x} received {} pairs, capability {}",
                    items.len(),
                    self.a
                )));
            }
            let local: Vec<(usize, usize)> = items.iter().map(|&(p, _)| p).collect();
            let paths = self.solve_layer(
                LayerRef {
                    kind: LayerKind::G,
                    anchor: x,
                },
                &local,
            )?;
            for ((_, slot), path) in items.into_iter().zip(paths) {
                match slot {
                    Slot::Whole(i) => seg[i].whole = Some(path),
                    Slot::Leg(i, side) => seg[i].leg[side] = Some(path),
                }
            }
        }

        // H-layer routing between pseudopairs
        for (star, coords) in bridge_load {
            if coords.len() > 2 * self.b {
                return Err(RouterError::PhaseInvariant(format!(
                    "H-layer {star} received {} pseudopair pairs",
                    coords.len() / 2
                )));
            }
            let local: Vec<(usize, usize)> = coords.chunks(2).map(|c| (c[0], c[1])).collect();
            let owners: Vec<usize> = (0..k).filter(|&i| bridge_of[i] == Some(star)).collect();
            let paths = self.solve_layer(
                LayerRef {
                    kind: LayerKind::H,
                    anchor: star,
                },
                &local,
            )?;
            for (i, path) in owners.into_iter().zip(paths) {
                seg[i].bridge = Some(path);
            }
        }

        Ok(seg.into_iter().enumerate().map(|(i, s)| self.assemble(i, s)).collect())
    }

    fn assemble(&self, i: usize, s: Segments) -> Path {
        let (x, y) = self.pairs[i];
        if let Some(p) = s.direct {
            return if p.first() == Some(x) { p } else { p.reversed() };
        }
        let mut route = Path(vec![x]);
        if let Some(p) = &s.shift[0] {
            route.extend_with(p);
        }
        if let Some(p) = &s.whole {
            route.extend_with(p);
        }
        if let Some(p) = &s.leg[0] {
            route.extend_with(p);
        }
        if let Some(p) = &s.bridge {
            route.extend_with(p);
        }
        if let Some(p) = &s.leg[1] {
            route.extend_with(&p.reversed());
        }
        if let Some(p) = &s.shift[1] {
            route.extend_with(&p.reversed());
        }
        debug_assert_eq!(route.last(), Some(y));
        route
    }

    /// Moves every terminal of the overloaded layers into originally empty
    /// G-layers, at most `a` per layer, never two from one H-layer together.
    fn spread(
        &self,
        overloaded: &[(usize, usize)],
        pos: &[[usize; 2]],
        empty_layers: &[usize],
        shifts: &mut Vec<(usize, usize, usize)>,
    ) -> Result<(), RouterError> {
        let hot: BTreeSet<usize> = overloaded.iter().map(|&(x, _)| x).collect();
        let mut movers: Vec<(usize, usize, usize)> = Vec::new();
        for (i, p) in pos.iter().enumerate() {
            for (side, &v) in p.iter().enumerate() {
                if hot.contains(&self.shape.coords(v).h) {
                    movers.push((v, i, side));
                }
            }
        }
        movers.sort();
        let mut load: BTreeMap<usize, usize> = empty_layers.iter().map(|&z| (z, 0)).collect();
        let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (v, i, side) in movers {
            let g = self.shape.coords(v).g;
            let z = empty_layers
                .iter()
                .copied()
                .filter(|&z| load[&z] < self.a && !used.contains(&(g, z)))
                .min_by_key(|&z| (load[&z], z))
                .ok_or_else(|| RouterError::PhaseInvariant(format!("no empty G-layer can take terminal {v}")))?;
            *load.get_mut(&z).expect("known layer") += 1;
            used.insert((g, z));
            shifts.push((i, side, z));
        }
        Ok(())
    }

    fn apply_shifts(
        &mut self,
        shifts: &[(usize, usize, usize)],
        pos: &mut [[usize; 2]],
        seg: &mut [Segments],
    ) -> Result<(), RouterError> {
        if shifts.is_empty() {
            return Ok(());
        }
        let mut by_layer: BTreeMap<usize, Vec<(usize, usize, usize)>> = BTreeMap::new();
        for &(i, side, z) in shifts {
            let c = self.shape.coords(pos[i][side]);
            by_layer.entry(c.g).or_default().push((i, side, z));
        }
        let mut moves = Vec::new();
        for (g, list) in by_layer {
            if list.len() > self.b {
                return Err(RouterError::PhaseInvariant(format!(
                    "H-layer {g} asked to shift {} terminals, capability {}",
                    list.len(),
                    self.b
                )));
            }
            let local: Vec<(usize, usize)> = list
                .iter()
                .map(|&(i, side, z)| (self.shape.coords(pos[i][side]).h, z))
                .collect();
            let paths = self.solve_layer(
                LayerRef {
                    kind: LayerKind::H,
                    anchor: g,
                },
                &local,
            )?;
            for ((i, side, z), path) in list.into_iter().zip(paths) {
                let terminal = pos[i][side];
                let stand_in = self.at(g, z);
                pos[i][side] = stand_in;
                moves.push(Pseudopair {
                    terminal,
                    stand_in,
                    connector: path.clone(),
                });
                seg[i].shift[side] = Some(path);
            }
        }
        self.phases.push(Phase::Shift { moves });
        Ok(())
    }

    /// Runs the matching solver on one layer and claims the result.
    fn solve_layer(&mut self, layer: LayerRef, local: &[(usize, usize)]) -> Result<Vec<Path>, RouterError> {
        let (graph, solver) = match layer.kind {
            LayerKind::G => (self.g, self.solver_g),
            LayerKind::H => (self.h, self.solver_h),
        };
        let shape = self.shape;
        let embed = move |v: usize| match layer.kind {
            LayerKind::G => shape.index(ProductVertex { g: v, h: layer.anchor }),
            LayerKind::H => shape.index(ProductVertex { g: layer.anchor, h: v }),
        };
        let fail = |reason: String| RouterError::LayerSolverFailed {
            solver: solver.name(),
            layer,
            pairs: local.len(),
            capability: solver.capability(),
            reason,
        };
        let ledger = &self.ledger;
        let usable = |u: usize, v: usize| !ledger.is_used(embed(u), embed(v));
        let paths = solver.solve(graph, &usable, local).map_err(|e| fail(e.0))?;
        if paths.len() != local.len() {
            return Err(fail(format!("returned {} paths", paths.len())));
        }
        let mut out = Vec::with_capacity(paths.len());
        for (p, &(s, t)) in paths.iter().zip(local) {
            if p.first() != Some(s) || p.last() != Some(t) {
                return Err(fail(format!("path does not join {s} and {t}")));
            }
            if let Some((u, v)) = p.edges().find(|&(u, v)| !graph.has_edge(u, v) || !usable(u, v)) {
                return Err(fail(format!("step {u}-{v} is not a free layer edge")));
            }
            out.push(Path(p.vertices().iter().map(|&v| embed(v)).collect()));
        }
        for p in &out {
            self.ledger.claim(p)?;
        }
        self.phases.push(Phase::LayerRoute {
            layer,
            pairs: local.to_vec(),
            edges: out.iter().map(Path::edge_len).sum(),
        });
        Ok(out)
    }

    /// Independent check against the factor adjacency.
    fn verify(&self, system: &PathSystem) -> Result<(), RouterError> {
        let mut seen = EdgeLedger::new();
        for (i, (r, &(x, y))) in system.routes.iter().zip(&self.pairs).enumerate() {
            if r.first() != Some(x) || r.last() != Some(y) {
                return Err(RouterError::Unverified(format!("route {i} has wrong endpoints")));
            }
            for (u, v) in r.edges() {
                let (pu, pv) = (self.shape.coords(u), self.shape.coords(v));
                let adjacent =
                    (pu.g == pv.g && self.h.has_edge(pu.h, pv.h)) || (pu.h == pv.h && self.g.has_edge(pu.g, pv.g));
                if !adjacent {
                    return Err(RouterError::Unverified(format!("route {i} steps along non-edge {u}-{v}")));
                }
            }
            seen.claim(r)
                .map_err(|e| RouterError::Unverified(format!("route {i}: {e}")))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cartesian_product, generate, Family};
    use crate::pairing::verify;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_pairing(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Pairing {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(rng);
        Pairing::new(v[..2 * k].chunks(2).map(|c| (c[0], c[1])).collect()).unwrap()
    }

    #[test]
    fn empty_pairing_gives_empty_system() {
        let c9 = generate(Family::Cycle(9)).unwrap();
        let s = OracleSolver::new(1);
        let r = route_theorem1(&c9, &c9, &s, &s, &Pairing::empty(), RouteOptions::default()).unwrap();
        assert!(r.system.routes.is_empty());
    }

    #[test]
    fn thm1_on_cycles() {
        let c9 = generate(Family::Cycle(9)).unwrap();
        let product = cartesian_product(&c9, &c9).unwrap();
        let s = OracleSolver::new(1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..30 {
            let p = random_pairing(&mut rng, 81, 2);
            let r = route_theorem1(&c9, &c9, &s, &s, &p, RouteOptions::default()).unwrap();
            assert!(verify(&product, &p, &r.system).ok);
        }
    }

    #[test]
    fn thm1_single_overloaded_layer() {
        // a = 2, b = 1: three pairs all touching G-layer 0
        let k16 = generate(Family::Complete(16)).unwrap();
        let c8 = generate(Family::Cycle(8)).unwrap();
        let product = cartesian_product(&k16, &c8).unwrap();
        let at = |g: usize, h: usize| g * 8 + h;
        let p = Pairing::new(vec![(at(0, 0), at(1, 0)), (at(2, 0), at(3, 5)), (at(4, 0), at(5, 2))]).unwrap();
        let r = route_theorem1(
            &k16,
            &c8,
            &CompleteSolver { capability: 2 },
            &OracleSolver::new(1),
            &p,
            RouteOptions::default(),
        )
        .unwrap();
        assert!(verify(&product, &p, &r.system).ok);
        assert!(matches!(
            r.plan.phases[0],
            Phase::Classify {
                redistribution: Redistribution::SingleOverload,
                ..
            }
        ));
    }

    #[test]
    fn thm1_two_overloaded_layers_with_b_one() {
        let k16 = generate(Family::Complete(16)).unwrap();
        let c8 = generate(Family::Cycle(8)).unwrap();
        let product = cartesian_product(&k16, &c8).unwrap();
        let at = |g: usize, h: usize| g * 8 + h;
        for shared_g in [false, true] {
            let first = if shared_g { (at(0, 1), at(0, 4)) } else { (at(0, 1), at(1, 4)) };
            let p = Pairing::new(vec![first, (at(2, 1), at(3, 4)), (at(4, 1), at(5, 4))]).unwrap();
            let r = route_theorem1(
                &k16,
                &c8,
                &CompleteSolver { capability: 2 },
                &OracleSolver::new(1),
                &p,
                RouteOptions::default(),
            )
            .unwrap();
            assert!(verify(&product, &p, &r.system).ok);
            assert!(matches!(
                r.plan.phases[0],
                Phase::Classify {
                    redistribution: Redistribution::MovePair,
                    ..
                }
            ));
        }
    }

    #[test]
    fn thm1_swaps_factors_when_needed() {
        let k16 = generate(Family::Complete(16)).unwrap();
        let c8 = generate(Family::Cycle(8)).unwrap();
        let product = cartesian_product(&c8, &k16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let p = random_pairing(&mut rng, 128, 3);
            let r = route_theorem1(
                &c8,
                &k16,
                &OracleSolver::new(1),
                &CompleteSolver { capability: 2 },
                &p,
                RouteOptions::default(),
            )
            .unwrap();
            assert!(r.plan.swapped);
            assert!(verify(&product, &p, &r.system).ok);
        }
    }

    #[test]
    fn thm2_spreads_overloaded_layers() {
        let k16 = generate(Family::Complete(16)).unwrap();
        let product = cartesian_product(&k16, &k16).unwrap();
        let s = CompleteSolver { capability: 2 };
        let at = |g: usize, h: usize| g * 16 + h;
        // G-layer 0 carries all four pair types
        let p = Pairing::new((0..4).map(|i| (at(i, 0), at(i + 4, 3 + i))).collect()).unwrap();
        let r = route_theorem2(&k16, &k16, &s, &s, &p, RouteOptions::default()).unwrap();
        assert!(verify(&product, &p, &r.system).ok);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let p = random_pairing(&mut rng, 256, 4);
            let r = route_theorem2(&k16, &k16, &s, &s, &p, RouteOptions::default()).unwrap();
            assert!(verify(&product, &p, &r.system).ok);
        }
    }

    #[test]
    fn preconditions_are_enforced() {
        let c8 = generate(Family::Cycle(8)).unwrap();
        let s = OracleSolver::new(1);
        let p = Pairing::new(vec![(0, 1), (2, 3), (4, 5)]).unwrap();
        assert!(matches!(
            route_theorem1(&c8, &c8, &s, &s, &p, RouteOptions::default()),
            Err(RouterError::PreconditionViolated(_))
        ));
        let k4 = generate(Family::Complete(4)).unwrap();
        let q = Pairing::new(vec![(0, 5)]).unwrap();
        assert!(route_theorem2(&k4, &k4, &CompleteSolver { capability: 1 }, &s, &q, RouteOptions::default()).is_ok());
    }

    #[test]
    fn sweep_router_checks_its_preconditions() {
        let bp = crate::constructions::blown_up_path(4, 4).unwrap();
        let p = Pairing::new(vec![(0, 15)]).unwrap();
        assert!(matches!(
            route_blownup_sweep(&bp, &p, RouteOptions::default()),
            Err(RouterError::PreconditionViolated(_))
        ));
        assert!(route_blownup_sweep(&bp, &p, RouteOptions { unchecked: true }).is_ok());
    }
}
