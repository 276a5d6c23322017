//! Ordinal pruning of bounded-degree subgraphs, degree-2 decomposition and
//! matching extension into feasible family members.

use super::enumerate::for_each_matching;
use super::{edge_allowed, EdgeWeights};
use crate::error::{Error, Result};
use crate::instance::{check_feasible, Edge, FamilySpec, Instance, ProblemKind, Sides, Subgraph};
use crate::ordinal::OrdinalProfile;

/// Keeps, for every node of `N1` in turn and then every node of `N2`, only
/// its most preferred incident edge.
///
/// Each node's preference comes from its ranking in `ord`; neighbors it does
/// not rank lose to ranked ones and tie-break by index.
pub fn prune_to_matching(h: &Subgraph, ord: &OrdinalProfile, sides: &Sides) -> Result<Subgraph> {
    let nodes = ord.agents();
    h.degrees(nodes)?;
    let mut side = vec![None; nodes];
    sides.n1.iter().for_each(|&v| side[v] = Some(true));
    for &v in &sides.n2 {
        if side[v].is_none() {
            side[v] = Some(false);
        }
    }
    if let Some(&(u, v)) = h.edges().iter().find(|&&(u, v)| side[u].is_none() || side[u] == side[v]) {
        return Err(Error::MalformedSubgraph(format!("edge ({u}, {v}) does not join N1 and N2")));
    }
    let mut edges: Vec<Edge> = h.edges().to_vec();
    for pass in [&sides.n1, &sides.n2] {
        for &node in pass {
            let best = edges
                .iter()
                .filter(|&&(u, v)| u == node || v == node)
                .map(|&(u, v)| if u == node { v } else { u })
                .min_by_key(|&other| (ord.position(node, other).unwrap_or(usize::MAX), other));
            if let Some(keep) = best {
                edges.retain(|&(u, v)| {
                    let touches = u == node || v == node;
                    !touches || u == keep || v == keep
                });
            }
        }
    }
    Subgraph::new(edges)
}

/// Splits a graph of maximum degree 2 into three matchings.
///
/// The first takes one edge from every odd cycle and the first edge of every
/// odd-length path; what remains is a union of even paths and cycles, split
/// alternately into the other two. Components are walked from their lowest
/// path end (or lowest node, for cycles) toward its smaller neighbor.
pub fn decompose_degree2(h: &Subgraph) -> Result<[Subgraph; 3]> {
    let nodes = h.max_node().map_or(0, |v| v + 1);
    let adj = h.adjacency(nodes)?;
    if let Some((node, a)) = adj.iter().enumerate().find(|(_, a)| a.len() > 2) {
        return Err(Error::DegreeViolation { node, degree: a.len() });
    }
    let mut parts: [Vec<Edge>; 3] = Default::default();
    let mut seen = vec![false; nodes];
    // paths first, from their lowest unvisited end
    let starts: Vec<usize> = (0..nodes)
        .filter(|&v| adj[v].len() == 1)
        .chain((0..nodes).filter(|&v| adj[v].len() == 2))
        .collect();
    for start in starts {
        if seen[start] {
            continue;
        }
        let mut walk = vec![start];
        seen[start] = true;
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            let next = adj[cur].iter().copied().find(|&x| x != prev && !seen[x]);
            match next {
                Some(x) => {
                    seen[x] = true;
                    walk.push(x);
                    prev = cur;
                    cur = x;
                }
                None => break,
            }
        }
        let mut edges: Vec<Edge> = walk.windows(2).map(|w| (w[0], w[1])).collect();
        let is_cycle = adj[start].len() == 2 && walk.len() > 2 && adj[cur].contains(&start);
        if is_cycle {
            edges.push((cur, start));
        }
        let skip = usize::from(edges.len() % 2 == 1);
        if skip == 1 {
            parts[0].push(edges[0]);
        }
        for (idx, &e) in edges.iter().enumerate().skip(skip) {
            parts[1 + (idx - skip) % 2].push(e);
        }
    }
    let [a, b, c] = parts;
    Ok([Subgraph::new(a)?, Subgraph::new(b)?, Subgraph::new(c)?])
}

/// The `size` heaviest edges of `m`, ties to the smaller edge.
pub fn heaviest_submatching(m: &Subgraph, weights: &EdgeWeights, size: usize) -> Result<Subgraph> {
    let mut edges = m.edges().to_vec();
    edges.sort_by(|a, b| weights.get(b.0, b.1).total_cmp(&weights.get(a.0, a.1)).then(a.cmp(b)));
    edges.truncate(size);
    Subgraph::new(edges)
}

/// Grows a small matching into a feasible member of the family.
///
/// Matching families return the matching itself; one-sided instances are
/// completed to a perfect matching in index order; clique packings group
/// each matched pair with the lowest free nodes and then cluster the rest in
/// index order; cycle packings close each matched edge into a triangle with
/// the lowest free node.
pub fn extend_matching_to_family(m: &Subgraph, spec: &FamilySpec, inst: &Instance) -> Result<Subgraph> {
    let nodes = inst.node_count();
    m.degrees(nodes)?;
    let limit = spec.extension_limit(nodes);
    if !m.is_matching() || m.len() > limit {
        return Err(Error::Extension { size: m.len(), limit });
    }
    if let Some(&(u, v)) = m.edges().iter().find(|&&(u, v)| !edge_allowed(inst, u, v)) {
        return Err(Error::MalformedSubgraph(format!("edge ({u}, {v}) is not allowed in {}", spec.kind)));
    }
    let mut used = vec![false; nodes];
    m.edges().iter().for_each(|&(u, v)| {
        used[u] = true;
        used[v] = true;
    });
    let mut free = (0..nodes).filter(|&v| !used[v]).collect::<Vec<_>>().into_iter();
    let mut edges: Vec<Edge> = m.edges().to_vec();
    match spec.kind {
        ProblemKind::GeneralMatching
        | ProblemKind::TwoSidedMatching
        | ProblemKind::KMatching(_)
        | ProblemKind::KAllocation(_) => {}
        ProblemKind::OneSidedMatching => {
            let n = inst.n();
            let agents: Vec<usize> = (0..n).filter(|&v| !used[v]).collect();
            let items: Vec<usize> = (n..2 * n).filter(|&v| !used[v]).collect();
            edges.extend(agents.into_iter().zip(items));
        }
        ProblemKind::CliquePacking(k) => {
            let mut clusters: Vec<Vec<usize>> = Vec::new();
            for &(u, v) in m.edges() {
                let mut c = vec![u, v];
                c.extend(free.by_ref().take(k - 2));
                clusters.push(c);
            }
            let rest: Vec<usize> = free.collect();
            clusters.extend(rest.chunks(k).map(|c| c.to_vec()));
            for c in clusters {
                for (a, &x) in c.iter().enumerate() {
                    for &y in &c[a + 1..] {
                        if !m.contains((x, y)) {
                            edges.push((x, y));
                        }
                    }
                }
            }
        }
        ProblemKind::CyclePacking(_) => {
            for &(u, v) in m.edges() {
                let x = free.next().ok_or(Error::Extension { size: m.len(), limit })?;
                edges.push((u, x));
                edges.push((v, x));
            }
        }
        ProblemKind::SocialChoice => {
            return Err(Error::Unsupported("social choice has no subgraph family".into()))
        }
    }
    let out = Subgraph::new(edges)?;
    if !check_feasible(&out, spec, inst)? {
        return Err(Error::Extension { size: m.len(), limit });
    }
    Ok(out)
}

/// Checks the matching-extension property on samples: every matching of
/// size at most `⌊nodes / 3k_eff⌋` extends to a feasible member whose
/// degrees stay within `k_eff`.
///
/// Without samples, every such matching over the allowed edges is tried
/// (only for up to 10 nodes).
pub fn verify_family(spec: &FamilySpec, inst: &Instance, samples: Option<&[Subgraph]>) -> Result<bool> {
    let nodes = inst.node_count();
    let check = |m: &Subgraph| -> Result<bool> {
        let ext = match extend_matching_to_family(m, spec, inst) {
            Ok(ext) => ext,
            Err(Error::Extension { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        let contains = m.edges().iter().all(|&e| ext.contains(e));
        let bounded = ext.degrees(nodes)?.iter().all(|&d| d <= spec.k_eff);
        Ok(contains && bounded && check_feasible(&ext, spec, inst)?)
    };
    match samples {
        Some(list) => {
            for m in list {
                if !check(m)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        None => {
            if nodes > 10 {
                return Err(Error::SizeLimit(format!("exhaustive family check needs at most 10 nodes, got {nodes}")));
            }
            let limit = spec.extension_limit(nodes);
            let mut ok = true;
            let mut failure = None;
            for_each_matching(nodes, |u, v| edge_allowed(inst, u, v), limit, |edges| {
                if !ok {
                    return;
                }
                let m = Subgraph::new(edges.iter().copied()).expect("enumerated matchings are valid");
                match check(&m) {
                    Ok(true) => {}
                    Ok(false) => ok = false,
                    Err(e) => {
                        ok = false;
                        failure = Some(e);
                    }
                }
            });
            match failure {
                Some(e) => Err(e),
                None => Ok(ok),
            }
        }
    }
}
