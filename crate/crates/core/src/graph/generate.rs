use super::{Graph, GraphError, Label};
use serde::{Deserialize, Serialize};

/// Standard families with frozen vertex numbering.
///
/// * `Complete(n)`: vertices `0..n`.
/// * `CompleteBipartite(a, b)`: class 1 is `0..a`, class 2 is `a..a+b`; labels
///   `{class: 1|2, index}`.
/// * `Path(k)`: edges `i - i+1`.
/// * `Cycle(k)`: path plus `k-1 - 0`; needs `k >= 3` to stay simple.
/// * `Star(n)`: `K_{1,n}` with centre `0` and leaves `1..=n`.
/// * `Hypercube(d)`: vertices are `d`-bit words, edges flip one bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Complete(usize),
    CompleteBipartite(usize, usize),
    Path(usize),
    Cycle(usize),
    Star(usize),
    Hypercube(usize),
}

const MAX_HYPERCUBE_DIM: usize = 24;

pub fn generate(family: Family) -> Result<Graph, GraphError> {
    let bad = |msg: &str| Err(GraphError::InvalidParameter(msg.to_string()));
    match family {
        Family::Complete(n) => {
            if n == 0 {
                return bad("complete graph needs n >= 1");
            }
            let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
            Graph::from_edges(n, edges)
        }
        Family::CompleteBipartite(a, b) => {
            if a == 0 || b == 0 {
                return bad("complete bipartite graph needs a, b >= 1");
            }
            let edges = (0..a).flat_map(|u| (0..b).map(move |v| (u, a + v)));
            let labels = (0..a)
                .map(|i| Label::Class { class: 1, index: i })
                .chain((0..b).map(|i| Label::Class { class: 2, index: i }))
                .collect();
            Graph::from_edges(a + b, edges)?.with_labels(labels)
        }
        Family::Path(k) => {
            if k == 0 {
                return bad("path needs k >= 1");
            }
            Graph::from_edges(k, (1..k).map(|i| (i - 1, i)))
        }
        Family::Cycle(k) => {
            if k < 3 {
                return bad("cycle needs k >= 3");
            }
            Graph::from_edges(k, (0..k).map(|i| (i, (i + 1) % k)))
        }
        Family::Star(n) => {
            if n == 0 {
                return bad("star needs n >= 1");
            }
            Graph::from_edges(n + 1, (1..=n).map(|leaf| (0, leaf)))
        }
        Family::Hypercube(d) => {
            if d > MAX_HYPERCUBE_DIM {
                return bad("hypercube dimension above 24");
            }
            let n = 1usize << d;
            let edges = (0..n).flat_map(|v| {
                (0..d)
                    .map(move |bit| (v, v ^ (1 << bit)))
                    .filter(|&(u, w)| u < w)
            });
            Graph::from_edges(n, edges)
        }
    }
}
