//! Enumeration of small feasible families, used for rival sets and
//! brute-force optimization.

use super::{edge_allowed, EdgeWeights, SolverMethod, SolverResult};
use crate::error::{Error, Result};
use crate::instance::{Edge, FamilySpec, Instance, ProblemKind, Subgraph};

/// Calls `visit` on every matching with at most `max_size` edges over the
/// allowed pairs, the empty matching included.
pub fn for_each_matching(
    nodes: usize,
    allowed: impl Fn(usize, usize) -> bool,
    max_size: usize,
    mut visit: impl FnMut(&[Edge]),
) {
    fn rec(
        start: usize,
        nodes: usize,
        allowed: &dyn Fn(usize, usize) -> bool,
        max_size: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<Edge>,
        visit: &mut dyn FnMut(&[Edge]),
    ) {
        visit(cur);
        if cur.len() == max_size {
            return;
        }
        for u in start..nodes {
            if used[u] {
                continue;
            }
            used[u] = true;
            for v in u + 1..nodes {
                if !used[v] && allowed(u, v) {
                    used[v] = true;
                    cur.push((u, v));
                    rec(u + 1, nodes, allowed, max_size, used, cur, visit);
                    cur.pop();
                    used[v] = false;
                }
            }
            used[u] = false;
        }
    }
    rec(0, nodes, &allowed, max_size, &mut vec![false; nodes], &mut Vec::new(), &mut visit);
}

/// Maximal members of the family (every feasible member is contained in
/// one of them), or `None` if there are more than `cap`.
///
/// One-sided instances yield all perfect matchings; packings yield all
/// feasible packings.
pub fn maximal_members(inst: &Instance, spec: &FamilySpec, cap: usize) -> Result<Option<Vec<Subgraph>>> {
    let nodes = inst.node_count();
    let mut out: Vec<Vec<Edge>> = Vec::new();
    let mut overflow = false;
    match spec.kind {
        ProblemKind::SocialChoice => {
            return Err(Error::Unsupported("social choice has no subgraph family".into()))
        }
        ProblemKind::CliquePacking(k) => {
            partitions(nodes, k, &mut |edges| {
                if out.len() >= cap {
                    overflow = true;
                } else {
                    out.push(edges.to_vec());
                }
            });
        }
        ProblemKind::CyclePacking(k) => {
            cycle_packings(nodes, k, &mut |edges| {
                if out.len() >= cap {
                    overflow = true;
                } else {
                    out.push(edges.to_vec());
                }
            });
        }
        _ => {
            let caps: Vec<usize> = (0..nodes)
                .map(|v| match spec.kind {
                    ProblemKind::KAllocation(_) if inst.side_of(v) == Some(true) => spec.k_eff,
                    ProblemKind::KAllocation(_) => 1,
                    _ => spec.k_eff,
                })
                .collect();
            let pairs: Vec<Edge> = (0..nodes)
                .flat_map(|u| (u + 1..nodes).map(move |v| (u, v)))
                .filter(|&(u, v)| edge_allowed(inst, u, v))
                .collect();
            let perfect = spec.kind == ProblemKind::OneSidedMatching;
            let mut deg = vec![0usize; nodes];
            let mut cur = Vec::new();
            degree_subsets(&pairs, 0, &caps, &mut deg, &mut cur, &mut |edges, deg| {
                let maximal = pairs
                    .iter()
                    .all(|&(u, v)| edges.contains(&(u, v)) || deg[u] >= caps[u] || deg[v] >= caps[v]);
                let ok = if perfect { deg.iter().all(|&d| d == 1) } else { maximal };
                if ok {
                    if out.len() >= cap {
                        overflow = true;
                        return false;
                    }
                    out.push(edges.to_vec());
                }
                true
            });
        }
    }
    if overflow {
        return Ok(None);
    }
    out.into_iter().map(Subgraph::new).collect::<Result<Vec<_>>>().map(Some)
}

fn degree_subsets(
    pairs: &[Edge],
    idx: usize,
    caps: &[usize],
    deg: &mut Vec<usize>,
    cur: &mut Vec<Edge>,
    visit: &mut dyn FnMut(&[Edge], &[usize]) -> bool,
) -> bool {
    if idx == pairs.len() {
        return visit(cur, deg);
    }
    let (u, v) = pairs[idx];
    if deg[u] < caps[u] && deg[v] < caps[v] {
        deg[u] += 1;
        deg[v] += 1;
        cur.push((u, v));
        let go = degree_subsets(pairs, idx + 1, caps, deg, cur, visit);
        cur.pop();
        deg[u] -= 1;
        deg[v] -= 1;
        if !go {
            return false;
        }
    }
    degree_subsets(pairs, idx + 1, caps, deg, cur, visit)
}

fn partitions(nodes: usize, k: usize, visit: &mut dyn FnMut(&[Edge])) {
    fn rec(free: Vec<usize>, k: usize, cur: &mut Vec<Edge>, visit: &mut dyn FnMut(&[Edge])) {
        let Some((&first, rest)) = free.split_first() else {
            visit(cur);
            return;
        };
        let mut pick = Vec::new();
        choose(rest, k - 1, 0, &mut pick, &mut |group| {
            let mut members = vec![first];
            members.extend_from_slice(group);
            let before = cur.len();
            for (a, &x) in members.iter().enumerate() {
                for &y in &members[a + 1..] {
                    cur.push((x, y));
                }
            }
            let remaining: Vec<usize> = rest.iter().copied().filter(|v| !group.contains(v)).collect();
            rec(remaining, k, cur, visit);
            cur.truncate(before);
        });
    }
    if k >= 2 && nodes % k == 0 {
        rec((0..nodes).collect(), k, &mut Vec::new(), visit);
    }
}

fn choose(items: &[usize], r: usize, start: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if cur.len() == r {
        visit(cur);
        return;
    }
    for idx in start..items.len() {
        cur.push(items[idx]);
        choose(items, r, idx + 1, cur, visit);
        cur.pop();
    }
}

fn cycle_packings(nodes: usize, k: usize, visit: &mut dyn FnMut(&[Edge])) {
    fn rec(free: Vec<usize>, k: usize, cur: &mut Vec<Edge>, visit: &mut dyn FnMut(&[Edge])) {
        let Some((&first, rest)) = free.split_first() else {
            visit(cur);
            return;
        };
        // leave `first` uncovered
        rec(rest.to_vec(), k, cur, visit);
        for size in 2..k.min(rest.len() + 1) {
            let mut pick = Vec::new();
            choose(rest, size, 0, &mut pick, &mut |group| {
                let remaining: Vec<usize> = rest.iter().copied().filter(|v| !group.contains(v)).collect();
                // every cyclic order through `first`, each cycle once
                let mut order = group.to_vec();
                permutations(&mut order, 0, &mut |perm| {
                    if perm[0] > perm[perm.len() - 1] {
                        return;
                    }
                    let before = cur.len();
                    let mut prev = first;
                    for &v in perm {
                        cur.push((prev.min(v), prev.max(v)));
                        prev = v;
                    }
                    cur.push((first.min(prev), first.max(prev)));
                    rec(remaining.clone(), k, cur, visit);
                    cur.truncate(before);
                });
            });
        }
    }
    rec((0..nodes).collect(), k, &mut Vec::new(), visit);
}

fn permutations(items: &mut Vec<usize>, idx: usize, visit: &mut dyn FnMut(&[usize])) {
    if idx == items.len() {
        visit(items);
        return;
    }
    for j in idx..items.len() {
        items.swap(idx, j);
        permutations(items, idx + 1, visit);
        items.swap(idx, j);
    }
}

/// Optimum by enumerating maximal members; at most `cap` of them.
pub fn brute_force(inst: &Instance, spec: &FamilySpec, weights: &EdgeWeights, cap: usize) -> Result<SolverResult> {
    let members = maximal_members(inst, spec, cap)?
        .ok_or_else(|| Error::SizeLimit(format!("more than {cap} feasible members")))?;
    let best = members
        .into_iter()
        .map(|s| (weights.of(&s), s))
        .fold(None::<(f64, Subgraph)>, |acc, (w, s)| match acc {
            Some((bw, bs)) if bw > w || (bw == w && bs.edges() <= s.edges()) => Some((bw, bs)),
            _ => Some((w, s)),
        })
        .ok_or_else(|| Error::Unsupported("family has no members".into()))?;
    let method = match spec.kind {
        ProblemKind::CliquePacking(_) | ProblemKind::CyclePacking(_) => SolverMethod::PackingBrute,
        _ => SolverMethod::Brute,
    };
    Ok(SolverResult { solution: best.1.with_weight(best.0), objective: best.0, method })
}
