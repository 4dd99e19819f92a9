//! Maximum bipartite matching (Hopcroft–Karp) and Hall-violator extraction.

use thiserror::Error;

const NIL: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingError {
    #[error("right vertex {right} out of range (right side has {right_n})")]
    RightOutOfRange { right: usize, right_n: usize },
    #[error("perfect matching needs equal sides, got {left_n} and {right_n}")]
    UnequalSides { left_n: usize, right_n: usize },
}

/// Bipartite graph with sorted, duplicate-free adjacency from the left side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    left_n: usize,
    right_n: usize,
    offsets: Vec<usize>,
    adj: Vec<u32>,
}

impl BipartiteGraph {
    pub fn new(left_n: usize, right_n: usize, adj: &[Vec<usize>]) -> Result<Self, MatchingError> {
        assert_eq!(adj.len(), left_n, "one adjacency list per left vertex");
        let mut b = BipartiteBuilder::new(right_n);
        for list in adj {
            for &r in list {
                if r >= right_n {
                    return Err(MatchingError::RightOutOfRange { right: r, right_n });
                }
            }
            b.push_left(list.iter().copied());
        }
        Ok(b.build())
    }

    /// Right side made of `groups * copies` vertices: group `c` owns the ids
    /// `c*copies .. (c+1)*copies`, and a left vertex adjacent to a group is
    /// adjacent to every copy. Used to give a right vertex capacity `copies`.
    pub fn with_replicated_right(groups: usize, copies: usize, group_adj: &[Vec<usize>]) -> Self {
        let mut b = BipartiteBuilder::new(groups * copies);
        for list in group_adj {
            let mut sorted = list.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert!(sorted.last().is_none_or(|&c| c < groups), "group out of range");
            b.push_left(sorted.iter().flat_map(|&c| c * copies..(c + 1) * copies));
        }
        b.build()
    }

    pub fn left_n(&self) -> usize {
        self.left_n
    }

    pub fn right_n(&self) -> usize {
        self.right_n
    }

    pub fn edge_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, l: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[self.offsets[l]..self.offsets[l + 1]]
            .iter()
            .map(|&r| r as usize)
    }

    pub fn degree(&self, l: usize) -> usize {
        self.offsets[l + 1] - self.offsets[l]
    }

    pub fn min_left_degree(&self) -> Option<usize> {
        (0..self.left_n).map(|l| self.degree(l)).min()
    }

    pub fn min_right_degree(&self) -> Option<usize> {
        if self.right_n == 0 {
            return None;
        }
        let mut deg = vec![0usize; self.right_n];
        for &r in &self.adj {
            deg[r as usize] += 1;
        }
        deg.into_iter().min()
    }

    /// Right vertices adjacent to at least one member of `left`.
    pub fn neighborhood(&self, left: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.right_n];
        for &l in left {
            for r in self.neighbors(l) {
                seen[r] = true;
            }
        }
        (0..self.right_n).filter(|&r| seen[r]).collect()
    }
}

/// Incremental constructor for [`BipartiteGraph`].
#[derive(Debug)]
pub struct BipartiteBuilder {
    right_n: usize,
    offsets: Vec<usize>,
    adj: Vec<u32>,
}

impl BipartiteBuilder {
    pub fn new(right_n: usize) -> Self {
        assert!(right_n < NIL as usize);
        Self {
            right_n,
            offsets: vec![0],
            adj: Vec::new(),
        }
    }

    /// Adds the next left vertex. Neighbors are sorted and deduplicated here.
    pub fn push_left<I: IntoIterator<Item = usize>>(&mut self, neighbors: I) {
        let start = self.adj.len();
        self.adj.extend(neighbors.into_iter().map(|r| {
            assert!(r < self.right_n, "right vertex out of range");
            r as u32
        }));
        let slice = &mut self.adj[start..];
        if !slice.windows(2).all(|w| w[0] < w[1]) {
            slice.sort_unstable();
            let mut v = self.adj.split_off(start);
            v.dedup();
            self.adj.extend(v);
        }
        self.offsets.push(self.adj.len());
    }

    pub fn build(self) -> BipartiteGraph {
        BipartiteGraph {
            left_n: self.offsets.len() - 1,
            right_n: self.right_n,
            offsets: self.offsets,
            adj: self.adj,
        }
    }
}

/// Partial injective map from left to right vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub left_to_right: Vec<Option<usize>>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.left_to_right.iter().flatten().count()
    }

    pub fn right_to_left(&self, right_n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; right_n];
        for (l, r) in self.left_to_right.iter().enumerate() {
            if let Some(r) = *r {
                out[r] = Some(l);
            }
        }
        out
    }
}

/// Maximum-cardinality matching. Phases search augmenting paths in
/// ascending left order over sorted adjacency, so the output depends only on
/// the input graph.
pub fn max_matching(b: &BipartiteGraph) -> Matching {
    let state = hopcroft_karp(b);
    Matching {
        left_to_right: state
            .match_l
            .iter()
            .map(|&r| (r != NIL).then_some(r as usize))
            .collect(),
    }
}

struct HkState {
    match_l: Vec<u32>,
    match_r: Vec<u32>,
}

fn hopcroft_karp(b: &BipartiteGraph) -> HkState {
    let n = b.left_n;
    let mut match_l = vec![NIL; n];
    let mut match_r = vec![NIL; b.right_n];

    // greedy warm start
    for l in 0..n {
        if let Some(&r) = b.adj[b.offsets[l]..b.offsets[l + 1]]
            .iter()
            .find(|&&r| match_r[r as usize] == NIL)
        {
            match_l[l] = r;
            match_r[r as usize] = l as u32;
        }
    }

    let mut dist = vec![u32::MAX; n];
    let mut cursor = vec![0usize; n];
    let mut queue = Vec::with_capacity(n);
    let mut stack: Vec<usize> = Vec::new();
    loop {
        queue.clear();
        for l in 0..n {
            if match_l[l] == NIL {
                dist[l] = 0;
                queue.push(l);
            } else {
                dist[l] = u32::MAX;
            }
        }
        let mut head = 0;
        let mut reachable_free = false;
        while head < queue.len() {
            let l = queue[head];
            head += 1;
            for &r in &b.adj[b.offsets[l]..b.offsets[l + 1]] {
                let next = match_r[r as usize];
                if next == NIL {
                    reachable_free = true;
                } else if dist[next as usize] == u32::MAX {
                    dist[next as usize] = dist[l] + 1;
                    queue.push(next as usize);
                }
            }
        }
        if !reachable_free {
            break;
        }
        cursor.copy_from_slice(&b.offsets[..n]);
        let mut augmented = false;
        for root in 0..n {
            if match_l[root] != NIL {
                continue;
            }
            stack.clear();
            stack.push(root);
            while let Some(&l) = stack.last() {
                if cursor[l] == b.offsets[l + 1] {
                    dist[l] = u32::MAX;
                    stack.pop();
                    continue;
                }
                let r = b.adj[cursor[l]];
                let next = match_r[r as usize];
                if next == NIL {
                    for &li in stack.iter() {
                        let ri = b.adj[cursor[li]];
                        match_l[li] = ri;
                        match_r[ri as usize] = li as u32;
                    }
                    for &li in stack.iter() {
                        cursor[li] += 1;
                    }
                    augmented = true;
                    break;
                } else if dist[next as usize] != u32::MAX
                    && dist[next as usize] == dist[l] + 1
                {
                    stack.push(next as usize);
                } else {
                    cursor[l] += 1;
                }
            }
        }
        if !augmented {
            break;
        }
    }
    HkState { match_l, match_r }
}

/// Outcome of a saturation attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SaturationResult {
    /// `left_to_right[l]` for every left vertex.
    Saturating(Vec<usize>),
    /// A left set `W` with `|N(W)| < |W|`, sorted ascending.
    HallViolator(Vec<usize>),
}

/// Matching that covers every left vertex, or a Hall violator proving none exists.
pub fn saturate_left_or_witness(b: &BipartiteGraph) -> SaturationResult {
    let state = hopcroft_karp(b);
    let Some(free) = state.match_l.iter().position(|&r| r == NIL) else {
        return SaturationResult::Saturating(state.match_l.iter().map(|&r| r as usize).collect());
    };
    // alternating search from an unmatched left vertex: every right vertex
    // reached is matched (else the matching was not maximum), so the left set
    // reached exceeds its neighbourhood by one
    let mut seen_l = vec![false; b.left_n];
    let mut seen_r = vec![false; b.right_n];
    let mut queue = vec![free];
    seen_l[free] = true;
    while let Some(l) = queue.pop() {
        for r in b.neighbors(l) {
            if !seen_r[r] {
                seen_r[r] = true;
                let next = state.match_r[r];
                debug_assert_ne!(next, NIL, "augmenting path left in a maximum matching");
                let next = next as usize;
                if !seen_l[next] {
                    seen_l[next] = true;
                    queue.push(next);
                }
            }
        }
    }
    SaturationResult::HallViolator((0..b.left_n).filter(|&l| seen_l[l]).collect())
}

/// Perfect matching on equal sides, or a Hall violator.
pub fn perfect_or_witness(b: &BipartiteGraph) -> Result<SaturationResult, MatchingError> {
    if b.left_n != b.right_n {
        return Err(MatchingError::UnequalSides {
            left_n: b.left_n,
            right_n: b.right_n,
        });
    }
    Ok(saturate_left_or_witness(b))
}
