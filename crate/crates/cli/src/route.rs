//! `route`, `verify` and `bench`.

use crate::build::random_pairing;
use crate::io::{self, emit, usage, with_newline, CliError};
use crate::{BenchArgs, BenchMethod, Encoding, Method, RouteArgs, SolverArg, VerifyArgs};
use pathpair_core::bipartite_router::{route_full, route_kmm, KmmError, KmmLayout, Mode};
use pathpair_core::constructions::{blown_up_path, BlownUpPath};
use pathpair_core::graph::{cartesian_product, Graph};
use pathpair_core::manifest::RunManifest;
use pathpair_core::oracle::OracleConfig;
use pathpair_core::pairing::{verify as check_paths, Pairing, Path, PathSystem};
use pathpair_core::product_router::{
    route_blownup_sweep, route_theorem1, route_theorem2, CompleteSolver, LayerFailure, LayerSolver, OracleSolver,
    RouteOptions, RouterError, SweepSolver,
};
use serde_json::json;
use std::process::ExitCode;
use std::time::Instant;

/// A solver run under a capability the user declared.
struct Declared {
    inner: Box<dyn LayerSolver>,
    capability: usize,
}

impl LayerSolver for Declared {
    fn name(&self) -> &'static str {
        self.inner.name()
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
        self.inner.solve(layer, usable, pairs)
    }
}

fn is_complete(g: &Graph) -> bool {
    let n = g.n();
    g.edge_count() == n * n.saturating_sub(1) / 2
}

/// Pairability the factor is known to have without searching.
fn known_capability(g: &Graph) -> usize {
    if is_complete(g) {
        return g.n() / 2;
    }
    if let Some(bp) = BlownUpPath::recognise(g) {
        if bp.k >= 2 * bp.m {
            return bp.m * bp.m;
        }
    }
    usize::from(g.is_connected() && g.n() >= 2)
}

fn default_capability(g: &Graph, method: Method) -> usize {
    let size_cap = match method {
        Method::Thm1 => g.n() / 8,
        _ => g.n() / 4,
    };
    known_capability(g).min(size_cap)
}

fn oracle_config(budget: Option<u64>) -> OracleConfig {
    let mut cfg = OracleConfig::default();
    if let Some(b) = budget {
        cfg.node_budget = b;
    }
    cfg
}

fn make_solver(choice: SolverArg, g: &Graph, capability: usize, budget: Option<u64>) -> Result<Declared, CliError> {
    let choice = match choice {
        SolverArg::Auto if is_complete(g) => SolverArg::Complete,
        SolverArg::Auto if BlownUpPath::recognise(g).is_some() => SolverArg::Sweep,
        SolverArg::Auto => SolverArg::Oracle,
        other => other,
    };
    let inner: Box<dyn LayerSolver> = match choice {
        SolverArg::Complete => {
            if !is_complete(g) {
                return Err(usage("complete solver needs a complete factor"));
            }
            Box::new(CompleteSolver { capability })
        }
        SolverArg::Sweep => {
            let layer = BlownUpPath::recognise(g).ok_or_else(|| usage("sweep solver needs a blown-up path factor"))?;
            Box::new(SweepSolver { layer })
        }
        _ => Box::new(OracleSolver {
            capability,
            config: oracle_config(budget),
        }),
    };
    Ok(Declared { inner, capability })
}

enum Failure {
    Input(String),
    Routing(String, serde_json::Value),
}

fn router_failure(e: RouterError) -> Failure {
    match e {
        RouterError::PreconditionViolated(msg) => Failure::Input(msg),
        other => Failure::Routing(other.to_string(), json!({})),
    }
}

fn kmm_failure(e: KmmError) -> Failure {
    match e {
        KmmError::InvalidM { .. } | KmmError::NotFullPairing { .. } | KmmError::NotKmm | KmmError::Pairing(_) => {
            Failure::Input(e.to_string())
        }
        other => Failure::Routing(other.to_string(), json!({ "phase": other.phase() })),
    }
}

fn encode(system: &PathSystem, encoding: Encoding) -> Vec<u8> {
    with_newline(match encoding {
        Encoding::Plain => system.to_json(),
        Encoding::Delta => system.to_delta_json(),
    })
}

fn obtain_pairing(args: &RouteArgs, n: usize, manifest: &mut RunManifest) -> Result<Pairing, CliError> {
    let p = match &args.pairs {
        Some(path) => {
            let loaded = io::read_pairing(path)?;
            manifest.input("pairs", &loaded.bytes);
            loaded.value
        }
        None => {
            let full = args.full || (args.k.is_none() && args.method == Method::Kmm);
            manifest.param("random_pairs", if full { json!("full") } else { json!(args.k) });
            random_pairing(n, args.k, full, args.seed)?
        }
    };
    p.check_range(n).map_err(|e| usage(e.to_string()))?;
    Ok(p)
}

pub fn route(args: &RouteArgs) -> Result<ExitCode, CliError> {
    let seed = args.pairs.is_none().then_some(args.seed);
    let mut manifest = RunManifest::new("route", seed);
    manifest.param("method", args.method.name()).param("unchecked", args.unchecked);
    let opts = RouteOptions {
        unchecked: args.unchecked,
    };

    let graph: Graph;
    let pairing: Pairing;
    let mut trace: Option<serde_json::Value> = None;
    let mut metrics: Option<serde_json::Value> = None;
    let started = Instant::now();

    let outcome: Result<PathSystem, Failure> = match args.method {
        Method::Thm1 | Method::Thm2 => {
            let (Some(gp), Some(hp)) = (&args.graph_g, &args.graph_h) else {
                return Err(usage("thm1/thm2 need --graph-g and --graph-h"));
            };
            let g = io::read_graph(gp)?;
            let h = io::read_graph(hp)?;
            manifest.input("graph_g", &g.bytes).input("graph_h", &h.bytes);
            let (g, h) = (g.value, h.value);
            graph = cartesian_product(&g, &h).map_err(|e| usage(e.to_string()))?;
            pairing = obtain_pairing(args, graph.n(), &mut manifest)?;
            let a = args.a.unwrap_or_else(|| default_capability(&g, args.method));
            let b = args.b.unwrap_or_else(|| default_capability(&h, args.method));
            let sg = make_solver(args.solver_g, &g, a, args.budget)?;
            let sh = make_solver(args.solver_h, &h, b, args.budget)?;
            manifest
                .param("a", a)
                .param("b", b)
                .param("solver_g", sg.name())
                .param("solver_h", sh.name());
            io::log(
                "info",
                "route_start",
                json!({ "method": args.method.name(), "a": a, "b": b, "solver_g": sg.name(), "solver_h": sh.name(), "pairs": pairing.len() }),
            );
            let res = if args.method == Method::Thm1 {
                route_theorem1(&g, &h, &sg, &sh, &pairing, opts)
            } else {
                route_theorem2(&g, &h, &sg, &sh, &pairing, opts)
            };
            res.map(|r| {
                for phase in &r.plan.phases {
                    io::log("debug", "phase", serde_json::to_value(phase).expect("phase serializes"));
                }
                trace = Some(serde_json::to_value(&r.plan).expect("plan serializes"));
                r.system
            })
            .map_err(router_failure)
        }
        Method::Sweep => {
            let Some(path) = &args.graph else {
                return Err(usage("sweep needs --graph"));
            };
            let loaded = io::read_graph(path)?;
            manifest.input("graph", &loaded.bytes);
            let bp = BlownUpPath::recognise(&loaded.value).ok_or_else(|| usage("graph is not a blown-up path"))?;
            graph = bp.graph.clone();
            pairing = obtain_pairing(args, graph.n(), &mut manifest)?;
            io::log(
                "info",
                "route_start",
                json!({ "method": "sweep", "classes": bp.k, "m": bp.m, "pairs": pairing.len() }),
            );
            route_blownup_sweep(&bp, &pairing, opts)
                .map(|r| {
                    trace = Some(serde_json::to_value(&r.plan).expect("plan serializes"));
                    r.system
                })
                .map_err(router_failure)
        }
        Method::Kmm => {
            let mode = if args.explore { Mode::Explore } else { Mode::Strict };
            manifest.param("mode", mode);
            let res = match (&args.graph, args.m) {
                (Some(path), _) => {
                    let loaded = io::read_graph(path)?;
                    manifest.input("graph", &loaded.bytes);
                    graph = loaded.value;
                    pairing = obtain_pairing(args, graph.n(), &mut manifest)?;
                    route_full(&graph, &pairing, mode)
                }
                (None, Some(m)) => {
                    manifest.param("m", m);
                    if m == 0 {
                        return Err(usage("kmm needs m >= 1"));
                    }
                    graph = KmmLayout { m }.graph();
                    pairing = obtain_pairing(args, graph.n(), &mut manifest)?;
                    route_kmm(m, &pairing, mode)
                }
                (None, None) => return Err(usage("kmm needs --m or --graph")),
            };
            res.map(|r| {
                let mt = &r.metrics;
                io::log(
                    "info",
                    "kmm_audit",
                    json!({
                        "max_hosted": mt.max_hosted,
                        "max_swarm_edges": mt.max_swarm_edges,
                        "max_edges_after_lineup": mt.max_edges_after_lineup,
                        "max_incident_after_lineup": mt.max_incident_after_lineup,
                        "loads": mt.loads,
                    }),
                );
                metrics = Some(serde_json::to_value(mt).expect("metrics serialize"));
                r.system
            })
            .map_err(kmm_failure)
        }
    };

    let system = match outcome {
        Ok(system) => system,
        Err(Failure::Input(msg)) => {
            io::log("error", "precondition", json!({ "message": msg }));
            return Ok(ExitCode::from(2));
        }
        Err(Failure::Routing(msg, extra)) => {
            io::log("error", "routing_failed", json!({ "message": msg, "detail": extra }));
            return Ok(ExitCode::from(1));
        }
    };
    let elapsed_ms = started.elapsed().as_millis() as u64;

    let report = check_paths(&graph, &pairing, &system);
    if !report.ok {
        io::log("error", "verify_failed", serde_json::to_value(&report).expect("report serializes"));
        return Ok(ExitCode::from(1));
    }
    io::log(
        "info",
        "verified",
        json!({ "pairs": report.pairs, "edges_used": report.edges_used, "elapsed_ms": elapsed_ms }),
    );

    let mut body = encode(&system, args.encoding);
    manifest.param("encoding", args.encoding.name()).param("gzip", args.gzip);
    if args.gzip {
        body = io::gzip(&body);
    }
    manifest.output("paths", &body);
    emit(args.out.as_ref(), &body)?;
    if let (Some(path), Some(t)) = (&args.trace_out, &trace) {
        let bytes = with_newline(t.to_string());
        manifest.output("trace", &bytes);
        emit(Some(path), &bytes)?;
    }
    if let (Some(path), Some(m)) = (&args.metrics_out, &metrics) {
        let bytes = with_newline(m.to_string());
        manifest.output("metrics", &bytes);
        emit(Some(path), &bytes)?;
    }
    manifest.outcome = json!({ "status": "verified", "pairs": report.pairs, "edges_used": report.edges_used });
    if let Some(path) = &args.manifest_out {
        emit(Some(path), &with_newline(manifest.to_json()))?;
    }
    Ok(ExitCode::SUCCESS)
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Thm1 => "thm1",
            Method::Thm2 => "thm2",
            Method::Sweep => "sweep",
            Method::Kmm => "kmm",
        }
    }
}

impl Encoding {
    fn name(self) -> &'static str {
        match self {
            Encoding::Plain => "plain",
            Encoding::Delta => "delta",
        }
    }
}

pub fn verify(args: &VerifyArgs) -> Result<ExitCode, CliError> {
    let graph = io::read_graph(&args.graph)?.value;
    let pairing = io::read_pairing(&args.pairs)?.value;
    let system = io::read_paths(&args.paths)?.value;
    let report = check_paths(&graph, &pairing, &system);
    io::log(
        if report.ok { "info" } else { "error" },
        "verify",
        json!({ "ok": report.ok, "failures": report.failures.len() }),
    );
    emit(args.out.as_ref(), &with_newline(report.to_json()))?;
    Ok(if report.ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(serde::Serialize)]
struct BenchRow {
    seed: u64,
    ok: bool,
    elapsed_ms: u64,
    pairs: usize,
    edges_used: usize,
    error: Option<String>,
}

fn bench_one(args: &BenchArgs, graph: &Graph, bp: Option<&BlownUpPath>, seed: u64) -> BenchRow {
    let pairing = Pairing::random_full(graph.n(), seed);
    let started = Instant::now();
    let res = match (args.method, bp) {
        (BenchMethod::Kmm, _) => {
            let mode = if args.explore { Mode::Explore } else { Mode::Strict };
            route_full(graph, &pairing, mode).map(|r| r.system).map_err(|e| e.to_string())
        }
        (BenchMethod::Sweep, Some(bp)) => route_blownup_sweep(bp, &pairing, RouteOptions::default())
            .map(|r| r.system)
            .map_err(|e| e.to_string()),
        (BenchMethod::Sweep, None) => unreachable!("sweep bench always has a layout"),
    };
    let elapsed_ms = started.elapsed().as_millis() as u64;
    match res {
        Ok(system) => {
            let report = check_paths(graph, &pairing, &system);
            BenchRow {
                seed,
                ok: report.ok,
                elapsed_ms,
                pairs: pairing.len(),
                edges_used: report.edges_used,
                error: (!report.ok).then(|| format!("{} verify failures", report.failures.len())),
            }
        }
        Err(e) => BenchRow {
            seed,
            ok: false,
            elapsed_ms,
            pairs: pairing.len(),
            edges_used: 0,
            error: Some(e),
        },
    }
}

pub fn bench(args: &BenchArgs) -> Result<ExitCode, CliError> {
    if args.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let (graph, bp) = match args.method {
        BenchMethod::Kmm => {
            if args.m == 0 {
                return Err(usage("kmm needs m >= 1"));
            }
            (KmmLayout { m: args.m }.graph(), None)
        }
        BenchMethod::Sweep => {
            let bp = blown_up_path(args.k.unwrap_or(2 * args.m), args.m).map_err(|e| usage(e.to_string()))?;
            (bp.graph.clone(), Some(bp))
        }
    };
    let seeds: Vec<u64> = (args.first_seed..args.first_seed + args.seeds).collect();
    let mut rows: Vec<BenchRow> = std::thread::scope(|scope| {
        let workers: Vec<_> = (0..args.jobs)
            .map(|w| {
                let (graph, bp, seeds) = (&graph, bp.as_ref(), &seeds);
                scope.spawn(move || {
                    seeds
                        .iter()
                        .skip(w)
                        .step_by(args.jobs)
                        .map(|&s| {
                            let row = bench_one(args, graph, bp, s);
                            io::log(
                                "info",
                                "bench_instance",
                                json!({ "seed": row.seed, "ok": row.ok, "elapsed_ms": row.elapsed_ms }),
                            );
                            row
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        workers
            .into_iter()
            .flat_map(|w| w.join().expect("bench worker panicked"))
            .collect()
    });
    rows.sort_by_key(|r| r.seed);
    let all_ok = rows.iter().all(|r| r.ok);
    let max_ms = rows.iter().map(|r| r.elapsed_ms).max().unwrap_or(0);
    let mean_ms = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.elapsed_ms as f64).sum::<f64>() / rows.len() as f64
    };
    let doc = json!({
        "method": match args.method { BenchMethod::Kmm => "kmm", BenchMethod::Sweep => "sweep" },
        "m": args.m,
        "vertices": graph.n(),
        "edges": graph.edge_count(),
        "all_ok": all_ok,
        "max_ms": max_ms,
        "mean_ms": mean_ms,
        "instances": rows,
    });
    emit(args.out.as_ref(), &with_newline(doc.to_string()))?;
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
