//! Greedy left-to-right sweep on a blown-up path `G(k, m)`.
//!
//! Same-class pairs take their clique edge. Every other pair travels as a
//! token from its left terminal, one class per step. A token whose partner
//! sits in the next class joins it directly; the rest are reassigned to the
//! next class by a capacitated flow so that no vertex hosts more than `m`
//! open tokens.

use crate::constructions::BlownUpPath;
use crate::flow::FlowNetwork;
use crate::pairing::{edge_key, Path};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SweepError {
    #[error("terminal {0} out of range")]
    OutOfRange(usize),
    #[error("edge {{{0}, {1}}} needed for a direct join is not usable")]
    Blocked(usize, usize),
    #[error("at class {class}: {detail}")]
    Invariant { class: usize, detail: String },
}

struct Token {
    pair: usize,
    host: usize,
    target: usize,
    path: Vec<usize>,
}

pub(crate) fn sweep_paths(
    bp: &BlownUpPath,
    pairs: &[(usize, usize)],
    usable: &dyn Fn(usize, usize) -> bool,
) -> Result<Vec<Path>, SweepError> {
    let m = bp.m;
    let n = bp.k * m;
    let mut used: HashSet<u64> = HashSet::new();
    let mut out: Vec<Option<Path>> = vec![None; pairs.len()];
    let mut tokens: Vec<Token> = Vec::new();
    for (i, &(x, y)) in pairs.iter().enumerate() {
        for v in [x, y] {
            if v >= n {
                return Err(SweepError::OutOfRange(v));
            }
        }
        let (u, v) = if bp.class_of(x) <= bp.class_of(y) { (x, y) } else { (y, x) };
        if bp.class_of(u) == bp.class_of(v) {
            if !usable(u, v) || !used.insert(edge_key(u, v)) {
                return Err(SweepError::Blocked(u, v));
            }
            out[i] = Some(Path(vec![x, y]));
        } else {
            tokens.push(Token {
                pair: i,
                host: u,
                target: v,
                path: vec![u],
            });
        }
    }

    let mut done: Vec<Token> = Vec::new();
    for class in 0..bp.k.saturating_sub(1) {
        let next = class + 1;
        let (here, later): (Vec<Token>, Vec<Token>) =
            tokens.into_iter().partition(|t| bp.class_of(t.host) == class);
        tokens = later;
        let mut movers = Vec::new();
        for mut t in here {
            if bp.class_of(t.target) == next {
                if !usable(t.host, t.target) || !used.insert(edge_key(t.host, t.target)) {
                    return Err(SweepError::Blocked(t.host, t.target));
                }
                t.path.push(t.target);
                done.push(t);
            } else {
                movers.push(t);
            }
        }
        if movers.is_empty() {
            continue;
        }

        // tokens that start in the next class already occupy a slot there
        let mut initial = vec![0u32; m];
        for t in &tokens {
            if bp.class_of(t.host) == next {
                initial[t.host - next * m] += 1;
            }
        }
        let mut load = vec![0u32; m];
        for t in &movers {
            load[t.host - class * m] += 1;
        }
        let (source, sink) = (2 * m, 2 * m + 1);
        let mut net = FlowNetwork::new(2 * m + 2);
        for (i, &l) in load.iter().enumerate() {
            if l > 0 {
                net.add_edge(source, i, l);
            }
        }
        let mut arcs: Vec<(usize, usize, usize)> = Vec::new();
        for (i, &l) in load.iter().enumerate() {
            if l == 0 {
                continue;
            }
            let w = class * m + i;
            for j in 0..m {
                let w2 = next * m + j;
                if usable(w, w2) && !used.contains(&edge_key(w, w2)) {
                    arcs.push((net.add_edge(i, m + j, 1), w, w2));
                }
            }
        }
        for (j, &init) in initial.iter().enumerate() {
            net.add_edge(m + j, sink, (m as u32).saturating_sub(init));
        }
        let placed = net.max_flow(source, sink);
        if placed != movers.len() as u64 {
            return Err(SweepError::Invariant {
                class,
                detail: format!("placed {placed} of {} open tokens", movers.len()),
            });
        }
        let mut slots: Vec<Vec<usize>> = vec![Vec::new(); m];
        for &(id, w, w2) in &arcs {
            if net.flow(id) == 1 {
                slots[w - class * m].push(w2);
            }
        }
        movers.sort_by_key(|t| (t.host, t.pair));
        let mut arrivals = vec![0u32; m];
        for mut t in movers {
            let w2 = slots[t.host - class * m].remove(0);
            used.insert(edge_key(t.host, w2));
            t.host = w2;
            t.path.push(w2);
            arrivals[w2 - next * m] += 1;
            tokens.push(t);
        }
        for j in 0..m {
            if arrivals[j] + initial[j] > m as u32 {
                return Err(SweepError::Invariant {
                    class: next,
                    detail: format!("vertex {} hosts {} open tokens", next * m + j, arrivals[j] + initial[j]),
                });
            }
        }
    }
    if let Some(t) = tokens.first() {
        return Err(SweepError::Invariant {
            class: bp.class_of(t.host),
            detail: format!("pair {} left open", t.pair),
        });
    }
    for t in done {
        let (x, _) = pairs[t.pair];
        let mut p = Path(t.path);
        if p.first() != Some(x) {
            p = p.reversed();
        }
        out[t.pair] = Some(p);
    }
    Ok(out.into_iter().map(|p| p.expect("every pair closed")).collect())
}
