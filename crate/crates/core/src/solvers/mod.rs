//! Exact maximum-weight optimizers for every graph family, the pruning and
//! decomposition utilities used in the reduction arguments, and small
//! enumerators.
//!
//! Solvers take real weights, scale them to integers (exactly when every
//! weight is a decimal with at most nine fractional digits) and report the
//! objective recomputed from the real weights.

mod blossom;
mod flow;
mod hungarian;
mod packing;
mod pruning;

pub mod enumerate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Edge, FamilySpec, Instance, ProblemKind, Subgraph};

pub use blossom::max_weight_matching as blossom_mate;
pub use hungarian::min_cost_assignment;
pub use packing::PACKING_LIMIT;
pub use pruning::{
    decompose_degree2, extend_matching_to_family, heaviest_submatching, prune_to_matching,
    verify_family,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    Hungarian,
    Blossom,
    Flow,
    Brute,
    PackingBrute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub solution: Subgraph,
    pub objective: f64,
    pub method: SolverMethod,
}

/// Symmetric node-by-node edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    nodes: usize,
    w: Vec<f64>,
}

impl EdgeWeights {
    pub fn zeros(nodes: usize) -> Self {
        EdgeWeights { nodes, w: vec![0.0; nodes * nodes] }
    }

    /// `w(u, v) = v_u(v) + v_v(u)` under the instance's true values.
    pub fn from_instance(inst: &Instance) -> Self {
        Self::from_fn(inst.node_count(), |u, v| inst.edge_weight(u, v))
    }

    pub fn from_fn(nodes: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(nodes);
        for u in 0..nodes {
            for v in u + 1..nodes {
                out.set(u, v, f(u, v));
            }
        }
        out
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.w[u * self.nodes + v]
    }

    pub fn set(&mut self, u: usize, v: usize, w: f64) {
        self.w[u * self.nodes + v] = w;
        self.w[v * self.nodes + u] = w;
    }

    pub fn of(&self, sub: &Subgraph) -> f64 {
        sub.edges().iter().map(|&(u, v)| self.get(u, v)).sum()
    }
}

/// Maps real weights to integers. Uses a power of ten when that is exact,
/// otherwise `2^40 / max`.
pub(crate) fn integer_scale(weights: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = weights.clone().fold(0.0f64, |a, w| a.max(w.abs()));
    if max == 0.0 {
        return 1.0;
    }
    let mut factor = 1.0;
    for _ in 0..=9 {
        if max * factor >= (1u64 << 50) as f64 {
            break;
        }
        let exact = weights.clone().all(|w| {
            let x = w * factor;
            (x - x.round()).abs() <= 1e-7
        });
        if exact {
            return factor;
        }
        factor *= 10.0;
    }
    (1u64 << 40) as f64 / max
}

pub(crate) fn to_int(w: f64, factor: f64) -> i64 {
    (w * factor).round() as i64
}

fn check_rectangular(weights: &[Vec<f64>]) -> Result<usize> {
    let cols = weights.first().map_or(0, |r| r.len());
    if weights.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch("weight rows differ in length".into()));
    }
    if weights.iter().flatten().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Parameter("weights must be finite and nonnegative".into()));
    }
    Ok(cols)
}

/// Maximum-weight perfect matching of a square matrix.
///
/// Row `i` is node `i` and column `j` is node `rows + j` in the returned
/// subgraph. Among optimal matchings the lexicographically smallest
/// assignment (row by row) is returned.
pub fn max_weight_perfect_bipartite(weights: &[Vec<f64>]) -> Result<SolverResult> {
    let n = weights.len();
    let cols = check_rectangular(weights)?;
    if n > 0 && cols != n {
        return Err(Error::DimensionMismatch(format!("expected a square matrix, got {n}x{cols}")));
    }
    let factor = integer_scale(weights.iter().flatten().copied());
    let cost: Vec<Vec<i64>> =
        weights.iter().map(|r| r.iter().map(|&w| -to_int(w, factor)).collect()).collect();
    let assignment = min_cost_assignment(&cost);
    let objective = assignment.iter().enumerate().map(|(i, &j)| weights[i][j]).sum();
    let solution = Subgraph::new(assignment.iter().enumerate().map(|(i, &j)| (i, n + j)))?;
    Ok(SolverResult { solution: solution.with_weight(objective), objective, method: SolverMethod::Hungarian })
}

/// Maximum-weight (not necessarily perfect) matching on a general graph.
/// Edges with zero weight are never used.
pub fn max_weight_matching_general(nodes: usize, edges: &[(usize, usize, f64)]) -> Result<SolverResult> {
    validate_edges(nodes, edges)?;
    let factor = integer_scale(edges.iter().map(|e| e.2));
    let int_edges: Vec<(usize, usize, i64)> = edges
        .iter()
        .map(|&(u, v, w)| (u, v, to_int(w, factor)))
        .filter(|e| e.2 > 0)
        .collect();
    let mate = blossom::max_weight_matching(nodes, &int_edges);
    let chosen: Vec<Edge> = mate
        .iter()
        .enumerate()
        .filter_map(|(u, m)| m.filter(|&v| u < v).map(|v| (u, v)))
        .collect();
    finish(chosen, edges, SolverMethod::Blossom)
}

fn validate_edges(nodes: usize, edges: &[(usize, usize, f64)]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for &(u, v, w) in edges {
        if u >= nodes || v >= nodes || u == v {
            return Err(Error::MalformedSubgraph(format!("edge ({u}, {v}) is invalid for {nodes} nodes")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::MalformedSubgraph(format!("duplicate edge ({u}, {v})")));
        }
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Parameter(format!("edge ({u}, {v}) has weight {w}")));
        }
    }
    Ok(())
}

fn finish(chosen: Vec<Edge>, edges: &[(usize, usize, f64)], method: SolverMethod) -> Result<SolverResult> {
    let lookup: std::collections::HashMap<Edge, f64> =
        edges.iter().map(|&(u, v, w)| ((u.min(v), u.max(v)), w)).collect();
    let solution = Subgraph::new(chosen)?;
    let objective = solution.edges().iter().map(|e| lookup[e]).sum();
    Ok(SolverResult { solution: solution.with_weight(objective), objective, method })
}

/// Maximum-weight bipartite subgraph where row nodes have degree at most
/// `cap1` and column nodes at most `cap2`, by min-cost flow.
///
/// Row `i` is node `i`, column `j` is node `rows + j`.
pub fn max_weight_degree_constrained(weights: &[Vec<f64>], cap1: usize, cap2: usize) -> Result<SolverResult> {
    let rows = weights.len();
    check_rectangular(weights)?;
    if cap1 == 0 || cap2 == 0 {
        return Err(Error::Parameter("degree caps must be at least 1".into()));
    }
    let factor = integer_scale(weights.iter().flatten().copied());
    let int: Vec<Vec<i64>> = weights.iter().map(|r| r.iter().map(|&w| to_int(w, factor)).collect()).collect();
    let pairs = flow::max_weight_b_matching(&int, cap1, cap2);
    let edges: Vec<(usize, usize, f64)> = pairs.iter().map(|&(i, j)| (i, rows + j, weights[i][j])).collect();
    finish(edges.iter().map(|e| (e.0, e.1)).collect(), &edges, SolverMethod::Flow)
}

/// Maximum-weight subgraph of a general graph with every degree at most
/// `cap`.
///
/// Reduces to a matching: each node gets `cap` copies and each edge
/// `{u, v}` becomes a path `u_copy – e_u – e_v – v_copy` whose three edges
/// all weigh `w`. Using the edge gains `2w`, leaving it unused gains `w`.
pub fn max_weight_b_matching(nodes: usize, edges: &[(usize, usize, f64)], cap: usize) -> Result<SolverResult> {
    validate_edges(nodes, edges)?;
    if cap == 0 {
        return Err(Error::Parameter("degree cap must be at least 1".into()));
    }
    if cap == 1 {
        return max_weight_matching_general(nodes, edges);
    }
    let factor = integer_scale(edges.iter().map(|e| e.2));
    let live: Vec<(usize, usize, i64)> = edges
        .iter()
        .map(|&(u, v, w)| (u, v, to_int(w, factor)))
        .filter(|e| e.2 > 0)
        .collect();
    let copies = |u: usize| (0..cap).map(move |c| u * cap + c);
    let base = nodes * cap;
    let mut gadget = Vec::new();
    for (idx, &(u, v, w)) in live.iter().enumerate() {
        let (eu, ev) = (base + 2 * idx, base + 2 * idx + 1);
        gadget.extend(copies(u).map(|c| (c, eu, w)));
        gadget.push((eu, ev, w));
        gadget.extend(copies(v).map(|c| (ev, c, w)));
    }
    let mate = blossom::max_weight_matching(base + 2 * live.len(), &gadget);
    let chosen: Vec<Edge> = live
        .iter()
        .enumerate()
        .filter(|(idx, _)| {
            let (eu, ev) = (base + 2 * idx, base + 2 * idx + 1);
            matches!((mate[eu], mate[ev]), (Some(a), Some(b)) if a < base && b < base)
        })
        .map(|(_, &(u, v, _))| (u, v))
        .collect();
    finish(chosen, edges, SolverMethod::Blossom)
}

/// Exact optimum of a clique or cycle packing on at most
/// [`PACKING_LIMIT`] nodes.
pub fn max_weight_packing(weights: &EdgeWeights, kind: ProblemKind) -> Result<SolverResult> {
    let n = weights.nodes();
    if n > PACKING_LIMIT {
        return Err(Error::SizeLimit(format!("packing solver handles at most {PACKING_LIMIT} nodes, got {n}")));
    }
    let groups = match kind {
        ProblemKind::CliquePacking(k) => {
            if k < 2 || n % k != 0 {
                return Err(Error::Parameter(format!("clique-packing({k}) needs k >= 2 and k | n (n = {n})")));
            }
            packing::clique_packing(weights, k)
        }
        ProblemKind::CyclePacking(k) => {
            if k < 3 {
                return Err(Error::Parameter("cycle-packing needs k >= 3".into()));
            }
            packing::cycle_packing(weights, k)
        }
        other => return Err(Error::Unsupported(format!("{other} is not a packing family"))),
    };
    let solution = Subgraph::new(groups)?;
    let objective = weights.of(&solution);
    Ok(SolverResult { solution: solution.with_weight(objective), objective, method: SolverMethod::PackingBrute })
}

/// Edges the family may use between `u` and `v`.
pub fn edge_allowed(inst: &Instance, u: usize, v: usize) -> bool {
    if u == v {
        return false;
    }
    match inst.kind() {
        ProblemKind::KAllocation(_) | ProblemKind::OneSidedMatching | ProblemKind::TwoSidedMatching => {
            inst.side_of(u) != inst.side_of(v)
        }
        _ => true,
    }
}

/// Maximum-weight member of the family under `weights` (node space).
pub fn solve_family(inst: &Instance, spec: &FamilySpec, weights: &EdgeWeights) -> Result<SolverResult> {
    let nodes = inst.node_count();
    if weights.nodes() != nodes {
        return Err(Error::DimensionMismatch(format!(
            "weights cover {} nodes, instance has {nodes}",
            weights.nodes()
        )));
    }
    let edge_list = || -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for u in 0..nodes {
            for v in u + 1..nodes {
                if edge_allowed(inst, u, v) {
                    out.push((u, v, weights.get(u, v)));
                }
            }
        }
        out
    };
    match spec.kind {
        ProblemKind::OneSidedMatching => {
            let n = inst.n();
            let block: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| weights.get(i, n + j)).collect()).collect();
            max_weight_perfect_bipartite(&block)
        }
        ProblemKind::GeneralMatching | ProblemKind::TwoSidedMatching => {
            max_weight_matching_general(nodes, &edge_list())
        }
        ProblemKind::KMatching(_) => max_weight_b_matching(nodes, &edge_list(), spec.k_eff),
        ProblemKind::KAllocation(_) => {
            let sides = inst.sides();
            let block: Vec<Vec<f64>> = sides
                .n1
                .iter()
                .map(|&u| sides.n2.iter().map(|&v| weights.get(u, v)).collect())
                .collect();
            let res = max_weight_degree_constrained(&block, spec.k_eff, 1)?;
            let rows = sides.n1.len();
            let solution = Subgraph::new(
                res.solution.edges().iter().map(|&(i, j)| (sides.n1[i], sides.n2[j - rows])),
            )?;
            Ok(SolverResult { solution: solution.with_weight(res.objective), ..res })
        }
        ProblemKind::CliquePacking(_) | ProblemKind::CyclePacking(_) => max_weight_packing(weights, spec.kind),
        ProblemKind::SocialChoice => Err(Error::Unsupported("social choice has no subgraph family".into())),
    }
}

/// Optimum of the instance under its true weights.
pub fn solve_instance(inst: &Instance) -> Result<SolverResult> {
    let spec = inst.family()?;
    solve_family(inst, &spec, &EdgeWeights::from_instance(inst))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_bipartite_examples() {
        let r = max_weight_perfect_bipartite(&[vec![4.5]]).unwrap();
        assert_eq!(r.solution.edges(), &[(0, 1)]);
        assert_eq!(r.objective, 4.5);
        let r = max_weight_perfect_bipartite(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(r.solution.edges(), &[(0, 2), (1, 3)]);
        assert_eq!(r.objective, 2.0);
        assert!(max_weight_perfect_bipartite(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn general_matching_examples() {
        let tri = [(0, 1, 3.0), (1, 2, 2.0), (0, 2, 1.0)];
        let r = max_weight_matching_general(3, &tri).unwrap();
        assert_eq!(r.solution.edges(), &[(0, 1)]);
        assert_eq!(r.objective, 3.0);
        let path = [(0, 1, 1.0), (1, 2, 5.0), (2, 3, 1.0)];
        let r = max_weight_matching_general(4, &path).unwrap();
        assert_eq!(r.solution.edges(), &[(1, 2)]);
        assert_eq!(r.objective, 5.0);
    }

    #[test]
    fn degree_constrained_examples() {
        let r = max_weight_degree_constrained(&[vec![5.0, 4.0, 1.0]], 2, 1).unwrap();
        assert_eq!(r.solution.edges(), &[(0, 1), (0, 2)]);
        assert_eq!(r.objective, 9.0);
        // caps (1, 1) agree with the general matching solver
        let w = vec![vec![3.0, 1.0], vec![2.5, 0.5]];
        let flow = max_weight_degree_constrained(&w, 1, 1).unwrap();
        let edges: Vec<_> = (0..2).flat_map(|i| (0..2).map(move |j| (i, 2 + j))).map(|(i, j)| (i, j, w[i][j - 2])).collect();
        let gen = max_weight_matching_general(4, &edges).unwrap();
        assert_eq!(flow.objective, gen.objective);
    }

    #[test]
    fn b_matching_uses_heaviest_edges_per_node() {
        // star with four leaves, cap 2
        let edges = [(0, 1, 4.0), (0, 2, 3.0), (0, 3, 2.0), (0, 4, 1.0)];
        let r = max_weight_b_matching(5, &edges, 2).unwrap();
        assert_eq!(r.solution.edges(), &[(0, 1), (0, 2)]);
        assert_eq!(r.objective, 7.0);
        // a triangle is a feasible 2-matching
        let tri = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)];
        assert_eq!(max_weight_b_matching(3, &tri, 2).unwrap().objective, 3.0);
    }

    #[test]
    fn integer_scale_is_exact_for_decimals() {
        let ws = [0.001, 12.5, 999.999];
        assert_eq!(integer_scale(ws.iter().copied()), 1000.0);
        assert_eq!(integer_scale([3.0, 4.0].iter().copied()), 1.0);
        let f = integer_scale([std::f64::consts::PI].iter().copied());
        assert_eq!(to_int(std::f64::consts::PI, f), 1 << 40);
    }
}
