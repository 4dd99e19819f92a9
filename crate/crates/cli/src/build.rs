//! `gen`, `product` and `pairs`.

use crate::io::{self, emit, usage, with_newline, CliError};
use crate::{FamilyArg, Format, GenArgs, PairsArgs, ProductArgs, VariantArg};
use pathpair_core::bipartite_router::KmmLayout;
use pathpair_core::constructions::{
    blown_up_path, cut_ok_not_pp, cycle_product, star_product_blocking, AdversarialInstance, CutVariant,
};
use pathpair_core::graph::{cartesian_product, generate, Family, Graph, GraphDoc};
use pathpair_core::pairing::Pairing;
use serde_json::json;
use std::process::ExitCode;

fn need(value: Option<usize>, flag: &str, family: &str) -> Result<usize, CliError> {
    value.ok_or_else(|| usage(format!("{family} needs --{flag}")))
}

fn render(graph: &Graph, format: Format) -> String {
    match format {
        Format::Json => graph.to_json(),
        Format::Dot => graph.to_dot(),
        Format::Edges => graph.to_edge_list(),
    }
}

fn ensure_newline(mut text: String) -> Vec<u8> {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    text.into_bytes()
}

pub fn gen(args: &GenArgs) -> Result<ExitCode, CliError> {
    let param = |e: pathpair_core::graph::GraphError| usage(e.to_string());
    let mut instance: Option<AdversarialInstance> = None;
    let graph = match args.family {
        FamilyArg::Complete => generate(Family::Complete(need(args.n, "n", "complete")?)).map_err(param)?,
        FamilyArg::Bipartite => {
            let a = need(args.a, "a", "bipartite")?;
            let b = need(args.b, "b", "bipartite")?;
            generate(Family::CompleteBipartite(a, b)).map_err(param)?
        }
        FamilyArg::Path => generate(Family::Path(need(args.n, "n", "path")?)).map_err(param)?,
        FamilyArg::Cycle => generate(Family::Cycle(need(args.n, "n", "cycle")?)).map_err(param)?,
        FamilyArg::Star => generate(Family::Star(need(args.n, "n", "star")?)).map_err(param)?,
        FamilyArg::Hypercube => generate(Family::Hypercube(need(args.d, "d", "hypercube")?)).map_err(param)?,
        FamilyArg::Blownup => {
            let k = need(args.k, "k", "blownup")?;
            let m = need(args.m, "m", "blownup")?;
            blown_up_path(k, m).map_err(param)?.graph
        }
        FamilyArg::Kmm => {
            let m = need(args.m, "m", "kmm")?;
            if m == 0 {
                return Err(usage("kmm needs m >= 1"));
            }
            KmmLayout { m }.graph()
        }
        FamilyArg::Torus => {
            if args.lens.is_empty() {
                return Err(usage("torus needs --lens"));
            }
            cycle_product(&args.lens).map_err(param)?
        }
        FamilyArg::Starblock => {
            let b = need(args.b, "b", "starblock")?;
            let d = need(args.d, "d", "starblock")?;
            let inst = star_product_blocking(b, d).map_err(param)?;
            let g = inst.graph.clone();
            instance = Some(inst);
            g
        }
        FamilyArg::Cutexample => {
            let k = need(args.k, "k", "cutexample")?;
            let variant = match args.variant.unwrap_or(VariantArg::Matched) {
                VariantArg::Matched => CutVariant::MatchedClique,
                VariantArg::CliqueTail => CutVariant::CliqueTail {
                    clique: need(args.clique, "clique", "clique-tail")?,
                },
            };
            let inst = cut_ok_not_pp(k, variant).map_err(param)?;
            let g = inst.graph.clone();
            instance = Some(inst);
            g
        }
    };
    io::log(
        "info",
        "generated",
        json!({ "vertices": graph.n(), "edges": graph.edge_count() }),
    );

    let body = match (&instance, &args.pairs_out, args.format) {
        (Some(inst), None, Format::Json) => {
            let mut doc = serde_json::to_value(GraphDoc::from(&inst.graph)).expect("graph serializes");
            doc["pairing"] = serde_json::to_value(&inst.pairing).expect("pairing serializes");
            doc["claim"] = serde_json::to_value(inst.claim).expect("claim serializes");
            doc.to_string()
        }
        (Some(inst), None, _) => {
            return Err(usage(format!(
                "{} output cannot carry the pairing; pass --pairs-out (pairing: {})",
                match args.format {
                    Format::Dot => "dot",
                    _ => "edge-list",
                },
                inst.pairing.to_json()
            )))
        }
        _ => render(&graph, args.format),
    };
    if let (Some(inst), Some(path)) = (&instance, &args.pairs_out) {
        let doc = json!({ "pairs": inst.pairing.pairs().iter().map(|&(x, y)| [x, y]).collect::<Vec<_>>(), "claim": inst.claim });
        emit(Some(path), &with_newline(doc.to_string()))?;
    }
    emit(args.out.as_ref(), &ensure_newline(body))?;
    Ok(ExitCode::SUCCESS)
}

pub fn product(args: &ProductArgs) -> Result<ExitCode, CliError> {
    let g = io::read_graph(&args.g)?.value;
    let h = io::read_graph(&args.h)?.value;
    let p = cartesian_product(&g, &h).map_err(|e| usage(e.to_string()))?;
    io::log(
        "info",
        "product",
        json!({ "vertices": p.n(), "edges": p.edge_count() }),
    );
    emit(args.out.as_ref(), &ensure_newline(render(&p, args.format)))?;
    Ok(ExitCode::SUCCESS)
}

/// Seeded random pairing on `n` vertices: `k` pairs, or all of them.
pub fn random_pairing(n: usize, k: Option<usize>, full: bool, seed: u64) -> Result<Pairing, CliError> {
    match (k, full) {
        (Some(k), false) => Pairing::random(n, k, seed).map_err(|e| usage(e.to_string())),
        (None, true) => {
            if n % 2 == 1 {
                return Err(usage(format!("a full pairing needs an even vertex count, got {n}")));
            }
            Ok(Pairing::random_full(n, seed))
        }
        _ => Err(usage("pass exactly one of --k and --full")),
    }
}

pub fn pairs(args: &PairsArgs) -> Result<ExitCode, CliError> {
    let n = match (&args.graph, args.n) {
        (Some(path), None) => io::read_graph(path)?.value.n(),
        (None, Some(n)) => n,
        _ => return Err(usage("pass exactly one of --graph and --n")),
    };
    let p = random_pairing(n, args.k, args.full, args.seed)?;
    io::log("info", "pairs", json!({ "n": n, "pairs": p.len(), "seed": args.seed }));
    emit(args.out.as_ref(), &with_newline(p.to_json()))?;
    Ok(ExitCode::SUCCESS)
}
