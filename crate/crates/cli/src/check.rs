//! `oracle` and `cut`.

use crate::io::{self, emit, usage, with_newline, CliError};
use crate::{CutArgs, OracleArgs};
use pathpair_core::constructions::grid_violating_subgrid;
use pathpair_core::cut::{check_full_cut, check_k_cut, pp_upper_bound_from_witness, CutError, DEFAULT_SUBSET_CAP};
use pathpair_core::graph::edge_boundary;
use pathpair_core::manifest::RunManifest;
use pathpair_core::oracle::{is_k_path_pairable, pp_number, solve_exact, OracleConfig, Outcome, PairabilityVerdict};
use pathpair_core::pairing::verify;
use serde_json::json;
use std::process::ExitCode;

const BUDGET: u8 = 3;

pub fn oracle(args: &OracleArgs) -> Result<ExitCode, CliError> {
    let loaded = io::read_graph(&args.graph)?;
    let graph = loaded.value;
    let mut cfg = OracleConfig::default();
    if let Some(b) = args.budget {
        cfg.node_budget = b;
    }
    let mut manifest = RunManifest::new("oracle", None);
    manifest.input("graph", &loaded.bytes).param("node_budget", cfg.node_budget);
    let bad = |e: pathpair_core::oracle::OracleError| usage(e.to_string());

    let (doc, code) = if let Some(path) = &args.pairs {
        let p = io::read_pairing(path)?;
        manifest.input("pairs", &p.bytes).param("mode", "pairing");
        let pairing = p.value;
        match solve_exact(&graph, &pairing, &cfg).map_err(bad)? {
            Outcome::Feasible(system) => {
                // the oracle's own answer goes through the same verifier
                let report = verify(&graph, &pairing, &system);
                if !report.ok {
                    io::log("error", "verify_failed", serde_json::to_value(&report).expect("report serializes"));
                    return Ok(ExitCode::from(1));
                }
                (json!({ "verdict": "feasible", "routes": system.routes }), 0)
            }
            Outcome::Infeasible => (
                json!({ "verdict": "infeasible", "exhaustive": true, "counter": pairing }),
                1,
            ),
            Outcome::BudgetExceeded => (json!({ "verdict": "budget_exceeded", "unresolved": pairing }), BUDGET),
        }
    } else if let Some(k) = args.k {
        manifest.param("mode", "k").param("k", k);
        let verdict = is_k_path_pairable(&graph, k, &cfg).map_err(bad)?;
        let code = match verdict {
            PairabilityVerdict::Pairable { .. } => 0,
            PairabilityVerdict::NotPairable { .. } => 1,
            PairabilityVerdict::BudgetExceeded { .. } => BUDGET,
        };
        (serde_json::to_value(&verdict).expect("verdict serializes"), code)
    } else if args.pp {
        manifest.param("mode", "pp");
        let report = pp_number(&graph, graph.n() / 2, &cfg).map_err(bad)?;
        let code = if report.complete { 0 } else { BUDGET };
        (serde_json::to_value(&report).expect("report serializes"), code)
    } else {
        return Err(usage("pass one of --pairs, --k and --pp"));
    };

    io::log("info", "oracle", json!({ "exit": code }));
    let body = with_newline(doc.to_string());
    manifest.output("verdict", &body);
    manifest.outcome = json!({ "exit": code });
    emit(args.out.as_ref(), &body)?;
    if let Some(path) = &args.manifest_out {
        emit(Some(path), &with_newline(manifest.to_json()))?;
    }
    Ok(ExitCode::from(code))
}

pub fn cut(args: &CutArgs) -> Result<ExitCode, CliError> {
    if let Some(d) = args.grid_d {
        let v = grid_violating_subgrid(d).map_err(|e| usage(e.to_string()))?;
        let violated = v.boundary < v.size;
        let doc = json!({ "violator": v, "violated": violated });
        emit(args.out.as_ref(), &with_newline(doc.to_string()))?;
        return Ok(ExitCode::from(u8::from(violated)));
    }
    let Some(path) = &args.graph else {
        return Err(usage("cut needs --graph or --grid-d"));
    };
    let graph = io::read_graph(path)?.value;

    if !args.set.is_empty() {
        let mut set = args.set.clone();
        set.sort_unstable();
        set.dedup();
        let boundary = edge_boundary(&graph, &set).map_err(|e| usage(e.to_string()))?;
        let violated = boundary < set.len();
        let bound = violated.then(|| pp_upper_bound_from_witness(&graph, &set).expect("violating set"));
        let doc = json!({ "size": set.len(), "boundary": boundary, "violated": violated, "pp_upper_bound": bound });
        emit(args.out.as_ref(), &with_newline(doc.to_string()))?;
        return Ok(ExitCode::from(u8::from(violated)));
    }

    let cap = args.cap.unwrap_or(DEFAULT_SUBSET_CAP);
    let res = match (args.k, args.full) {
        (Some(k), false) => check_k_cut(&graph, k, cap),
        (None, true) => check_full_cut(&graph, cap),
        _ => return Err(usage("pass one of --k, --full and --set")),
    };
    let check = match res {
        Ok(c) => c,
        Err(CutError::TooLarge { subsets, cap }) => {
            io::log("error", "cut_cap", json!({ "subsets": subsets.to_string(), "cap": cap.to_string() }));
            return Ok(ExitCode::from(BUDGET));
        }
        Err(e) => return Err(usage(e.to_string())),
    };
    let mut doc = serde_json::to_value(&check).expect("check serializes");
    if let Some(w) = check.witness() {
        doc["pp_upper_bound"] = json!(pp_upper_bound_from_witness(&graph, &w.set).expect("witness"));
    }
    io::log("info", "cut", json!({ "ok": check.is_ok() }));
    emit(args.out.as_ref(), &with_newline(doc.to_string()))?;
    Ok(ExitCode::from(u8::from(!check.is_ok())))
}
