//! Exact clique and cycle packing by dynamic programming over node subsets.

use super::EdgeWeights;
use crate::instance::Edge;

/// Largest node count the packing solvers accept.
pub const PACKING_LIMIT: usize = 14;

/// Partition into `k`-cliques maximizing total intra-cluster weight. Returns
/// the clique edges.
pub fn clique_packing(weights: &EdgeWeights, k: usize) -> Vec<Edge> {
    let n = weights.nodes();
    let full = (1usize << n) - 1;
    let cluster_weight = |mask: usize| -> f64 {
        let members: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let mut total = 0.0;
        for (a, &u) in members.iter().enumerate() {
            for &v in &members[a + 1..] {
                total += weights.get(u, v);
            }
        }
        total
    };
    // best[mask]: optimum over the nodes outside `mask`
    let mut best = vec![f64::NEG_INFINITY; full + 1];
    let mut choice = vec![0usize; full + 1];
    best[full] = 0.0;
    for mask in (0..full).rev() {
        if (n - mask.count_ones() as usize) % k != 0 {
            continue;
        }
        let first = (!mask).trailing_zeros() as usize;
        let rest: Vec<usize> = (first + 1..n).filter(|&v| mask >> v & 1 == 0).collect();
        for combo in combinations(&rest, k - 1) {
            let cluster = combo.iter().fold(1usize << first, |acc, &v| acc | 1 << v);
            let tail = best[mask | cluster];
            if tail == f64::NEG_INFINITY {
                continue;
            }
            let value = cluster_weight(cluster) + tail;
            if value > best[mask] {
                best[mask] = value;
                choice[mask] = cluster;
            }
        }
    }
    let mut edges = Vec::new();
    let mut mask = 0;
    while mask != full {
        let cluster = choice[mask];
        let members: Vec<usize> = (0..n).filter(|&v| cluster >> v & 1 == 1).collect();
        for (a, &u) in members.iter().enumerate() {
            for &v in &members[a + 1..] {
                edges.push((u, v));
            }
        }
        mask |= cluster;
    }
    edges
}

/// Node-disjoint cycles of length `3..=k` maximizing total weight. Returns
/// the cycle edges.
pub fn cycle_packing(weights: &EdgeWeights, k: usize) -> Vec<Edge> {
    let n = weights.nodes();
    if n < 3 {
        return Vec::new();
    }
    let size = 1usize << n;
    // path[mask][v]: heaviest path from the lowest node of `mask` to `v`
    // through exactly `mask`
    const NONE: f64 = f64::NEG_INFINITY;
    let mut path = vec![NONE; size * n];
    let mut prev = vec![usize::MAX; size * n];
    for s in 0..n {
        path[(1 << s) * n + s] = 0.0;
    }
    for mask in 1..size {
        let count = mask.count_ones() as usize;
        if count >= k {
            continue;
        }
        let low = mask.trailing_zeros() as usize;
        for v in 0..n {
            let cur = path[mask * n + v];
            if cur == NONE {
                continue;
            }
            for u in low + 1..n {
                if mask >> u & 1 == 1 {
                    continue;
                }
                let next = mask | 1 << u;
                let value = cur + weights.get(v, u);
                if value > path[next * n + u] {
                    path[next * n + u] = value;
                    prev[next * n + u] = v;
                }
            }
        }
    }
    // best cycle per node set, with its closing node
    let mut cycle = vec![(NONE, usize::MAX); size];
    for (mask, slot) in cycle.iter_mut().enumerate() {
        let count = mask.count_ones() as usize;
        if count < 3 || count > k {
            continue;
        }
        let low = mask.trailing_zeros() as usize;
        for v in low + 1..n {
            let p = path[mask * n + v];
            if p == NONE {
                continue;
            }
            let value = p + weights.get(v, low);
            if value > slot.0 {
                *slot = (value, v);
            }
        }
    }
    // pack[mask]: optimum over nodes outside `mask`
    let full = size - 1;
    let mut pack = vec![0.0; size];
    let mut pick = vec![0usize; size];
    for mask in (0..full).rev() {
        let first = (!mask).trailing_zeros() as usize;
        // leave `first` uncovered
        pack[mask] = pack[mask | 1 << first];
        pick[mask] = 1 << first;
        let free: Vec<usize> = (first + 1..n).filter(|&v| mask >> v & 1 == 0).collect();
        for extra in 2..k.min(free.len() + 1) {
            for combo in combinations(&free, extra) {
                let set = combo.iter().fold(1usize << first, |acc, &v| acc | 1 << v);
                let (w, _) = cycle[set];
                if w == NONE {
                    continue;
                }
                let value = w + pack[mask | set];
                if value > pack[mask] {
                    pack[mask] = value;
                    pick[mask] = set;
                }
            }
        }
    }
    let mut edges = Vec::new();
    let mut mask = 0;
    while mask != full {
        let set = pick[mask];
        if set.count_ones() >= 3 {
            let low = set.trailing_zeros() as usize;
            let (_, mut v) = cycle[set];
            edges.push((low, v));
            let mut cur = set;
            while v != low {
                let p = prev[cur * n + v];
                edges.push((p, v));
                cur &= !(1 << v);
                v = p;
            }
        }
        mask |= set;
    }
    edges
}

/// All `r`-subsets of `items`, in lexicographic order.
fn combinations(items: &[usize], r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(items: &[usize], r: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for idx in start..items.len() {
            if items.len() - idx < r - cur.len() {
                break;
            }
            cur.push(items[idx]);
            rec(items, r, idx + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, r, 0, &mut cur, &mut out);
    out
}
