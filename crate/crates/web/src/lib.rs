//! wasm-bindgen exports for the demo page in `www/`.
//!
//! Every export returns a JSON string: `{"ok": true, ...}` or
//! `{"ok": false, "error": "..."}`. Vertex `(g, h)` of `C_n □ C_n` has index
//! `g * n + h`; vertex `j` of class `c` in `G(k, m)` has index `c * m + j`.

use pathpair_core::constructions::blown_up_path;
use pathpair_core::graph::{cartesian_product, generate, Family};
use pathpair_core::oracle::{solve_exact, OracleConfig, Outcome};
use pathpair_core::pairing::{verify, Pairing, PathSystem};
use pathpair_core::product_router::{route_blownup_sweep, route_theorem1, OracleSolver, RouteOptions};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Keeps the page responsive: searches above this give up.
const ORACLE_BUDGET: u64 = 2_000_000;

fn failed(error: impl ToString) -> String {
    json!({ "ok": false, "error": error.to_string() }).to_string()
}

fn routes(system: &PathSystem) -> Value {
    serde_json::to_value(&system.routes).expect("routes serialize")
}

fn parse_pairs(text: &str) -> Result<Pairing, String> {
    let raw: Vec<[usize; 2]> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    Pairing::new(raw.into_iter().map(|p| (p[0], p[1])).collect()).map_err(|e| e.to_string())
}

/// Two seeded random pairs on `C_n □ C_n`, routed with one pair per factor.
#[wasm_bindgen]
pub fn route_torus(n: usize, seed: u32) -> String {
    let run = || -> Result<Value, String> {
        let cycle = generate(Family::Cycle(n)).map_err(|e| e.to_string())?;
        let product = cartesian_product(&cycle, &cycle).map_err(|e| e.to_string())?;
        let pairing = Pairing::random(product.n(), 2, seed as u64).map_err(|e| e.to_string())?;
        let solver = OracleSolver::new(1);
        let routed = route_theorem1(&cycle, &cycle, &solver, &solver, &pairing, RouteOptions::default())
            .map_err(|e| e.to_string())?;
        let report = verify(&product, &pairing, &routed.system);
        Ok(json!({
            "ok": report.ok,
            "n": n,
            "pairs": pairing,
            "routes": routes(&routed.system),
            "edges_used": report.edges_used,
        }))
    };
    run().map(|v| v.to_string()).unwrap_or_else(failed)
}

/// Exact search for user-chosen pairs on `C_n □ C_n`; `pairs` is `[[u, v], ...]`.
#[wasm_bindgen]
pub fn oracle_torus(n: usize, pairs: &str) -> String {
    let run = || -> Result<Value, String> {
        let cycle = generate(Family::Cycle(n)).map_err(|e| e.to_string())?;
        let product = cartesian_product(&cycle, &cycle).map_err(|e| e.to_string())?;
        let pairing = parse_pairs(pairs)?;
        pairing.check_range(product.n()).map_err(|e| e.to_string())?;
        let cfg = OracleConfig {
            node_budget: ORACLE_BUDGET,
            ..OracleConfig::default()
        };
        Ok(match solve_exact(&product, &pairing, &cfg).map_err(|e| e.to_string())? {
            Outcome::Feasible(system) => json!({
                "ok": verify(&product, &pairing, &system).ok,
                "verdict": "feasible",
                "n": n,
                "routes": routes(&system),
            }),
            Outcome::Infeasible => json!({ "ok": true, "verdict": "infeasible", "n": n, "routes": [] }),
            Outcome::BudgetExceeded => json!({ "ok": true, "verdict": "budget_exceeded", "n": n, "routes": [] }),
        })
    };
    run().map(|v| v.to_string()).unwrap_or_else(failed)
}

/// Seeded full pairing of `G(k, m)` routed by the left-to-right sweep.
#[wasm_bindgen]
pub fn sweep_blownup(k: usize, m: usize, seed: u32) -> String {
    let run = || -> Result<Value, String> {
        let bp = blown_up_path(k, m).map_err(|e| e.to_string())?;
        let n = bp.graph.n();
        if n % 2 == 1 {
            return Err(format!("G({k}, {m}) has an odd vertex count"));
        }
        let pairing = Pairing::random_full(n, seed as u64);
        let routed = route_blownup_sweep(&bp, &pairing, RouteOptions::default()).map_err(|e| e.to_string())?;
        let report = verify(&bp.graph, &pairing, &routed.system);
        Ok(json!({
            "ok": report.ok,
            "k": k,
            "m": m,
            "pairs": pairing,
            "routes": routes(&routed.system),
            "edges_used": report.edges_used,
        }))
    };
    run().map(|v| v.to_string()).unwrap_or_else(failed)
}
