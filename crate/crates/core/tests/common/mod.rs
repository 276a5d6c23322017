//! Brute-force oracles. Nothing here calls a solver from the crate.

#![allow(dead_code)]

use twoquery::{Instance, ProblemKind};

/// Every permutation of `0..n`, in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Calls `visit` on every permutation of `0..n` without materializing them
/// (Heap's algorithm).
pub fn for_each_permutation(n: usize, visit: &mut dyn FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    visit(&p);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            let j = if i % 2 == 0 { 0 } else { c[i] };
            p.swap(j, i);
            visit(&p);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Maximum of `Σ w[i][p(i)]` over permutations `p`.
pub fn best_assignment(w: &[Vec<f64>]) -> f64 {
    permutations(w.len())
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| w[i][j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Calls `visit` on every edge subset in which node `v` has degree at most
/// `caps[v]`.
pub fn for_each_capped(edges: &[(usize, usize)], caps: &[usize], visit: &mut dyn FnMut(&[usize])) {
    fn rec(
        idx: usize,
        edges: &[(usize, usize)],
        deg: &mut [usize],
        caps: &[usize],
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if idx == edges.len() {
            visit(chosen);
            return;
        }
        rec(idx + 1, edges, deg, caps, chosen, visit);
        let (u, v) = edges[idx];
        if deg[u] < caps[u] && deg[v] < caps[v] {
            deg[u] += 1;
            deg[v] += 1;
            chosen.push(idx);
            rec(idx + 1, edges, deg, caps, chosen, visit);
            chosen.pop();
            deg[u] -= 1;
            deg[v] -= 1;
        }
    }
    let mut deg = vec![0; caps.len()];
    rec(0, edges, &mut deg, caps, &mut Vec::new(), visit);
}

/// Heaviest degree-capped edge subset.
pub fn best_capped(edges: &[(usize, usize, f64)], caps: &[usize]) -> f64 {
    let plain: Vec<(usize, usize)> = edges.iter().map(|e| (e.0, e.1)).collect();
    let mut best = 0.0f64;
    for_each_capped(&plain, caps, &mut |s| best = best.max(s.iter().map(|&i| edges[i].2).sum()));
    best
}

/// Edges of a bipartite weight matrix with row `i` as node `i` and column
/// `j` as node `rows + j`.
pub fn bipartite_edges(w: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let rows = w.len();
    let mut out = Vec::new();
    for (i, row) in w.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            out.push((i, rows + j, x));
        }
    }
    out
}

/// `v_u(v) + v_v(u)` straight from the value matrix, node space.
pub fn pair_weight(inst: &Instance, u: usize, v: usize) -> f64 {
    let vals = inst.values();
    match inst.kind() {
        ProblemKind::OneSidedMatching => {
            let n = inst.n();
            let (a, item) = if u < n { (u, v) } else { (v, u) };
            if a < n && item >= n {
                vals.get(a, item - n)
            } else {
                0.0
            }
        }
        _ => vals.get(u, v) + vals.get(v, u),
    }
}

/// Optimum welfare by enumeration; `None` for families this oracle does not
/// cover (the packings).
pub fn optimum(inst: &Instance) -> Option<f64> {
    let vals = inst.values();
    let n = inst.n();
    match inst.kind() {
        ProblemKind::SocialChoice => {
            Some((0..inst.m()).map(|j| (0..n).map(|i| vals.get(i, j)).sum::<f64>()).fold(0.0, f64::max))
        }
        ProblemKind::OneSidedMatching => Some(best_assignment(&vals.to_rows())),
        ProblemKind::GeneralMatching | ProblemKind::KMatching(_) => {
            let cap = inst.kind().param().unwrap_or(1);
            let edges: Vec<(usize, usize, f64)> =
                (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).map(|(u, v)| (u, v, pair_weight(inst, u, v))).collect();
            Some(best_capped(&edges, &vec![cap; n]))
        }
        ProblemKind::TwoSidedMatching | ProblemKind::KAllocation(_) => {
            let split = inst.side_split().expect("bipartite kinds carry their sides");
            let mut caps = vec![1; n];
            if let ProblemKind::KAllocation(k) = inst.kind() {
                split.n1.iter().for_each(|&v| caps[v] = k);
            }
            let edges: Vec<(usize, usize, f64)> = split
                .n1
                .iter()
                .flat_map(|&u| split.n2.iter().map(move |&v| (u, v)))
                .map(|(u, v)| (u.min(v), u.max(v), pair_weight(inst, u, v)))
                .collect();
            Some(best_capped(&edges, &caps))
        }
        ProblemKind::CliquePacking(_) | ProblemKind::CyclePacking(_) => None,
    }
}

/// Relative comparison at the tolerance used for optimality assertions.
pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// `a <= b` up to the same tolerance.
pub fn leq(a: f64, b: f64) -> bool {
    a <= b + 1e-9 * a.abs().max(b.abs()).max(1.0)
}
