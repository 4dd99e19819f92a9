//! Cut-condition certificates: exhaustive subset checks, the product
//! violation criterion and upper bounds from violating sets.

use crate::graph::{edge_boundary, Graph, GraphError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_SUBSET_CAP: u128 = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CutError {
    #[error("instance too large: {subsets} subsets to enumerate, cap is {cap}")]
    TooLarge { subsets: u128, cap: u128 },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("set is not a cut witness: boundary {boundary} >= size {size}")]
    NotAWitness { boundary: usize, size: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A nonempty vertex set whose edge boundary is smaller than its size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutWitness {
    pub set: Vec<usize>,
    pub boundary: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CutCheck {
    Satisfied { subsets_checked: u128 },
    Violated { witness: CutWitness },
}

impl CutCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, CutCheck::Satisfied { .. })
    }

    pub fn witness(&self) -> Option<&CutWitness> {
        match self {
            CutCheck::Violated { witness } => Some(witness),
            CutCheck::Satisfied { .. } => None,
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Number of subsets with `1 <= |S| <= k` that a check would visit.
pub fn subsets_to_check(n: usize, k: usize) -> u128 {
    (1..=k.min(n.saturating_sub(1)))
        .map(|i| binomial(n, i))
        .fold(0u128, u128::saturating_add)
}

/// Checks `d(S) >= |S|` for every proper subset with `1 <= |S| <= k`.
///
/// Sizes are visited in increasing order and sets of one size in
/// lexicographic order, so the witness returned is the smallest one.
pub fn check_k_cut(graph: &Graph, k: usize, cap: u128) -> Result<CutCheck, CutError> {
    if k == 0 {
        return Err(CutError::ZeroK);
    }
    let n = graph.n();
    let subsets = subsets_to_check(n, k);
    if subsets > cap {
        return Err(CutError::TooLarge { subsets, cap });
    }
    let max_size = k.min(n.saturating_sub(1));
    let boundary_of: Box<dyn Fn(&[usize]) -> usize> = if n <= 128 {
        let masks: Vec<u128> = (0..n)
            .map(|v| graph.neighbors(v).fold(0u128, |m, w| m | (1u128 << w)))
            .collect();
        Box::new(move |set: &[usize]| {
            let s = set.iter().fold(0u128, |m, &v| m | (1u128 << v));
            set.iter()
                .map(|&v| (masks[v] & !s).count_ones() as usize)
                .sum()
        })
    } else {
        Box::new(|set: &[usize]| edge_boundary(graph, set).expect("indices in range"))
    };
    for size in 1..=max_size {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let boundary = boundary_of(&combo);
            if boundary < size {
                return Ok(CutCheck::Violated {
                    witness: CutWitness {
                        set: combo,
                        boundary,
                        size,
                    },
                });
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    Ok(CutCheck::Satisfied {
        subsets_checked: subsets,
    })
}

/// Full cut condition: every `S` with `|S| <= ⌊|V|/2⌋`.
pub fn check_full_cut(graph: &Graph, cap: u128) -> Result<CutCheck, CutError> {
    check_k_cut(graph, (graph.n() / 2).max(1), cap)
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Counts for a product set `G0 □ H0` built from factor subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductViolation {
    /// `2·e(G0) < |G0|` and `2·e(H0) < |H0|`.
    pub hypotheses_hold: bool,
    pub product_size: usize,
    /// `|G0|·e(H0) + |H0|·e(G0)`.
    pub product_edges: usize,
    /// `product_edges < product_size`.
    pub violated: bool,
}

/// Combines factor-subset counts into product-set counts.
///
/// The identity `e(G0□H0) = |G0|·e(H0) + |H0|·e(G0)` holds both for edges
/// spanned by the sets and for boundary edges; with boundary counts,
/// `violated` means the product set breaks the cut condition.
pub fn product_violation(
    g0_size: usize,
    g0_edges: usize,
    h0_size: usize,
    h0_edges: usize,
) -> ProductViolation {
    let product_size = g0_size * h0_size;
    let product_edges = g0_size * h0_edges + h0_size * g0_edges;
    let hypotheses_hold = 2 * g0_edges < g0_size && 2 * h0_edges < h0_size;
    let violated = product_edges < product_size;
    assert!(!hypotheses_hold || violated, "strict halves must sum below the product");
    ProductViolation {
        hypotheses_hold,
        product_size,
        product_edges,
        violated,
    }
}

/// Terminals on all of `S` with partners outside cannot be joined, so
/// `pp(G) <= |S| - 1` whenever `d(S) < |S|`.
pub fn pp_upper_bound_from_witness(graph: &Graph, set: &[usize]) -> Result<usize, CutError> {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let boundary = edge_boundary(graph, &sorted)?;
    if sorted.is_empty() || boundary >= sorted.len() {
        return Err(CutError::NotAWitness {
            boundary,
            size: sorted.len(),
        });
    }
    Ok(sorted.len() - 1)
}
