//! Bipartite matching primitives.
//!
//! * [`max_matching`]: Hopcroft-Karp maximum cardinality matching, plus a
//!   Hall-violating left set when the left side cannot be saturated.
//! * [`min_cost_left_saturating`]: minimum-cost matching covering every left
//!   node, by successive shortest augmenting paths with Johnson potentials.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

const NIL: usize = usize::MAX;

/// Result of a maximum-cardinality matching on a bipartite graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxMatching {
    /// `left_mate[u]` is the right node matched to `u`.
    pub left_mate: Vec<Option<usize>>,
    pub right_mate: Vec<Option<usize>>,
    pub size: usize,
}

impl MaxMatching {
    pub fn saturates_left(&self) -> bool {
        self.size == self.left_mate.len()
    }

    /// Matched pairs in ascending left order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.left_mate
            .iter()
            .enumerate()
            .filter_map(|(u, v)| v.map(|v| (u, v)))
            .collect()
    }
}

/// Hopcroft-Karp on `adj` (left node -> right neighbors, scanned in order).
pub fn max_matching(adj: &[Vec<usize>], right: usize) -> MaxMatching {
    let left = adj.len();
    let mut left_mate = vec![NIL; left];
    let mut right_mate = vec![NIL; right];
    let mut dist = vec![usize::MAX; left];
    let mut size = 0;

    loop {
        // BFS layers from free left nodes
        let mut queue = VecDeque::new();
        for u in 0..left {
            if left_mate[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = right_mate[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut it = vec![0usize; left];
        for u in 0..left {
            if left_mate[u] == NIL
                && augment(u, adj, &mut left_mate, &mut right_mate, &mut dist, &mut it)
            {
                size += 1;
            }
        }
    }

    let wrap = |v: Vec<usize>| v.into_iter().map(|x| (x != NIL).then_some(x)).collect();
    MaxMatching {
        left_mate: wrap(left_mate),
        right_mate: wrap(right_mate),
        size,
    }
}

// Iterative DFS along the BFS layering; `it` holds per-node scan positions.
fn augment(
    root: usize,
    adj: &[Vec<usize>],
    left_mate: &mut [usize],
    right_mate: &mut [usize],
    dist: &mut [usize],
    it: &mut [usize],
) -> bool {
    let mut stack: Vec<(usize, usize)> = vec![(root, NIL)];
    while let Some(&(u, _)) = stack.last() {
        if it[u] == adj[u].len() {
            dist[u] = usize::MAX;
            stack.pop();
            continue;
        }
        let v = adj[u][it[u]];
        it[u] += 1;
        let w = right_mate[v];
        if w == NIL {
            // flip the path recorded on the stack
            let mut v = v;
            while let Some((u, via)) = stack.pop() {
                let prev = left_mate[u];
                left_mate[u] = v;
                right_mate[v] = u;
                debug_assert!(via == NIL || via == prev);
                v = prev;
            }
            return true;
        }
        if dist[w] == dist[u].wrapping_add(1) {
            stack.push((w, v));
        }
    }
    false
}

/// Left nodes of a Hall violation: every left node reachable from an
/// unmatched left node by alternating paths. The returned set `A` satisfies
/// `|N(A)| = |A| - 1` for each unmatched root; `None` when the matching
/// saturates the left side.
pub fn hall_violation(adj: &[Vec<usize>], matching: &MaxMatching) -> Option<Vec<usize>> {
    let root = matching.left_mate.iter().position(Option::is_none)?;
    let mut seen_left = vec![false; adj.len()];
    let mut seen_right = vec![false; matching.right_mate.len()];
    let mut queue = VecDeque::from([root]);
    seen_left[root] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if seen_right[v] {
                continue;
            }
            seen_right[v] = true;
            // v must be matched, otherwise the matching was not maximum
            if let Some(w) = matching.right_mate[v] {
                if !seen_left[w] {
                    seen_left[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    Some(
        seen_left
            .iter()
            .enumerate()
            .filter_map(|(u, &s)| s.then_some(u))
            .collect(),
    )
}

/// Neighborhood `N(A)` of a left set.
pub fn neighborhood(adj: &[Vec<usize>], set: &[usize], right: usize) -> Vec<usize> {
    let mut hit = vec![false; right];
    for &u in set {
        for &v in &adj[u] {
            hit[v] = true;
        }
    }
    hit.iter()
        .enumerate()
        .filter_map(|(v, &h)| h.then_some(v))
        .collect()
}

/// Edge of a weighted bipartite graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightedEdge {
    pub left: usize,
    pub right: usize,
    pub cost: i64,
}

/// Minimum-cost matching that covers every left node, or `None` if no
/// left-saturating matching exists.
///
/// Successive shortest paths: left nodes are inserted one at a time and
/// each insertion augments along a shortest path in the residual graph.
/// Potentials keep reduced costs non-negative so Dijkstra applies. Costs
/// must be non-negative.
pub fn min_cost_left_saturating(
    left: usize,
    right: usize,
    edges: &[WeightedEdge],
) -> Option<(Vec<usize>, i64)> {
    let mut out: Vec<Vec<(usize, i64)>> = vec![Vec::new(); left];
    for e in edges {
        debug_assert!(e.cost >= 0);
        out[e.left].push((e.right, e.cost));
    }
    // node ids: left u -> u, right v -> left + v
    let nodes = left + right;
    let mut pot = vec![0i64; nodes];
    let mut left_mate = vec![NIL; left];
    let mut right_mate = vec![NIL; right];
    // cost of the matched edge at each right node
    let mut mate_cost = vec![0i64; right];

    const INF: i64 = i64::MAX / 4;
    let mut dist = vec![INF; nodes];
    let mut parent = vec![NIL; nodes];
    let mut done = vec![false; nodes];

    for s in 0..left {
        dist.fill(INF);
        parent.fill(NIL);
        done.fill(false);
        dist[s] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, s)));
        let mut target = NIL;
        while let Some(Reverse((d, x))) = heap.pop() {
            if done[x] {
                continue;
            }
            done[x] = true;
            if x < left {
                for &(v, c) in &out[x] {
                    if left_mate[x] == v {
                        continue; // matched edge only exists backwards
                    }
                    let y = left + v;
                    let nd = d + c + pot[x] - pot[y];
                    debug_assert!(c + pot[x] - pot[y] >= 0);
                    if nd < dist[y] {
                        dist[y] = nd;
                        parent[y] = x;
                        heap.push(Reverse((nd, y)));
                    }
                }
            } else {
                let v = x - left;
                let w = right_mate[v];
                if w == NIL {
                    // first free right node popped is the closest in reduced
                    // (hence real) distance
                    target = x;
                    break;
                }
                let nd = d - mate_cost[v] + pot[x] - pot[w];
                if nd < dist[w] {
                    dist[w] = nd;
                    parent[w] = x;
                    heap.push(Reverse((nd, w)));
                }
            }
        }
        if target == NIL {
            return None;
        }
        let dt = dist[target];
        for x in 0..nodes {
            pot[x] += dist[x].min(dt);
        }
        // flip the path
        let mut y = target;
        while y != NIL {
            let u = parent[y];
            let v = y - left;
            let cost = out[u]
                .iter()
                .filter(|&&(r, _)| r == v)
                .map(|&(_, c)| c)
                .min()
                .expect("path edge exists");
            let prev = left_mate[u];
            left_mate[u] = v;
            right_mate[v] = u;
            mate_cost[v] = cost;
            y = if u == s { NIL } else { left + prev };
        }
    }
    let total = left_mate
        .iter()
        .enumerate()
        .map(|(u, &v)| {
            out[u]
                .iter()
                .filter(|&&(r, _)| r == v)
                .map(|&(_, c)| c)
                .min()
                .expect("matched edge exists")
        })
        .sum();
    Some((left_mate, total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_min_cost(left: usize, right: usize, edges: &[WeightedEdge]) -> Option<i64> {
        fn rec(
            u: usize,
            left: usize,
            used: &mut Vec<bool>,
            edges: &[WeightedEdge],
            acc: i64,
            best: &mut Option<i64>,
        ) {
            if u == left {
                if best.is_none_or(|b| acc < b) {
                    *best = Some(acc);
                }
                return;
            }
            for e in edges.iter().filter(|e| e.left == u) {
                if !used[e.right] {
                    used[e.right] = true;
                    rec(u + 1, left, used, edges, acc + e.cost, best);
                    used[e.right] = false;
                }
            }
        }
        let mut best = None;
        rec(0, left, &mut vec![false; right], edges, 0, &mut best);
        best
    }

    fn e(left: usize, right: usize, cost: i64) -> WeightedEdge {
        WeightedEdge { left, right, cost }
    }

    #[test]
    fn hall_example_matches() {
        // a -> {x, y}, b -> {x}
        let adj = vec![vec![0, 1], vec![0]];
        let m = max_matching(&adj, 2);
        assert!(m.saturates_left());
        assert_eq!(m.pairs(), vec![(0, 1), (1, 0)]);
        assert_eq!(hall_violation(&adj, &m), None);
    }

    #[test]
    fn pigeonhole_violation() {
        let adj = vec![vec![0], vec![0]];
        let m = max_matching(&adj, 1);
        assert_eq!(m.size, 1);
        let a = hall_violation(&adj, &m).unwrap();
        assert_eq!(a, vec![0, 1]);
        assert_eq!(neighborhood(&adj, &a, 1), vec![0]);
    }

    #[test]
    fn empty_left_side() {
        let m = max_matching(&[], 3);
        assert!(m.saturates_left());
        assert!(m.pairs().is_empty());
    }

    #[test]
    fn min_cost_two_by_two() {
        let edges = [e(0, 0, 1), e(0, 1, 2), e(1, 0, 2), e(1, 1, 4)];
        let (mate, cost) = min_cost_left_saturating(2, 2, &edges).unwrap();
        assert_eq!(cost, 4);
        assert_eq!(mate, vec![1, 0]);
        assert_eq!(brute_min_cost(2, 2, &edges), Some(4));
    }

    #[test]
    fn min_cost_forced_and_uniform() {
        let edges = [e(0, 2, 7), e(1, 0, 3), e(2, 1, 5)];
        assert_eq!(min_cost_left_saturating(3, 3, &edges), Some((vec![2, 0, 1], 15)));
        let uniform: Vec<_> = (0..3)
            .flat_map(|u| (0..3).map(move |v| e(u, v, 6)))
            .collect();
        assert_eq!(min_cost_left_saturating(3, 3, &uniform).unwrap().1, 18);
    }

    #[test]
    fn min_cost_detects_no_saturating_matching() {
        let edges = [e(0, 0, 1), e(1, 0, 1)];
        assert_eq!(min_cost_left_saturating(2, 2, &edges), None);
    }

    #[test]
    fn min_cost_matches_brute_force_on_pseudo_random_graphs() {
        // simple LCG keeps this test free of extra dependencies
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for _ in 0..500 {
            let left = 1 + next() % 5;
            let right = left + next() % 3;
            let mut edges = Vec::new();
            for u in 0..left {
                for v in 0..right {
                    if next() % 3 != 0 {
                        edges.push(e(u, v, (next() % 10) as i64));
                    }
                }
            }
            let fast = min_cost_left_saturating(left, right, &edges).map(|(_, c)| c);
            assert_eq!(fast, brute_min_cost(left, right, &edges), "edges {edges:?}");

            let mut adj = vec![Vec::new(); left];
            for ed in &edges {
                if !adj[ed.left].contains(&ed.right) {
                    adj[ed.left].push(ed.right);
                }
            }
            let mm = max_matching(&adj, right);
            assert_eq!(mm.saturates_left(), fast.is_some());
            if let Some(a) = hall_violation(&adj, &mm) {
                assert!(neighborhood(&adj, &a, right).len() < a.len());
            }
        }
    }
}
