//! Instance model shared by every other module.
//!
//! Graph problems live in *node space*: every agent (and every item, for
//! one-sided matching) is a node, and `node_value(u, v)` is the directed value
//! of node `u` for node `v`. One-sided instances with `n` agents are
//! normalized to `2n` nodes: agents are nodes `0..n`, item `j` is node `n + j`,
//! and item rows are all zero. Social choice instances keep their `n × m`
//! agent-by-alternative matrix.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};

/// Unordered node pair, stored with the smaller index first.
pub type Edge = (usize, usize);

/// The problem variants an instance can describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    OneSidedMatching,
    GeneralMatching,
    TwoSidedMatching,
    KMatching(usize),
    CliquePacking(usize),
    CyclePacking(usize),
    KAllocation(usize),
    SocialChoice,
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::OneSidedMatching => "one-sided-matching",
            ProblemKind::GeneralMatching => "general-matching",
            ProblemKind::TwoSidedMatching => "two-sided-matching",
            ProblemKind::KMatching(_) => "k-matching",
            ProblemKind::CliquePacking(_) => "clique-packing",
            ProblemKind::CyclePacking(_) => "cycle-packing",
            ProblemKind::KAllocation(_) => "k-constrained-allocation",
            ProblemKind::SocialChoice => "social-choice",
        }
    }

    /// The `k` parameter, for the kinds that carry one.
    pub fn param(&self) -> Option<usize> {
        match *self {
            ProblemKind::KMatching(k)
            | ProblemKind::CliquePacking(k)
            | ProblemKind::CyclePacking(k)
            | ProblemKind::KAllocation(k) => Some(k),
            _ => None,
        }
    }

    /// Parses a kind name; parameterized kinds need `k`.
    pub fn from_parts(name: &str, k: Option<usize>) -> std::result::Result<Self, ParseError> {
        let need_k = |k: Option<usize>| {
            k.ok_or_else(|| ParseError::Schema(format!("kind `{name}` requires field `k`")))
        };
        let kind = match name {
            "one-sided-matching" | "one-sided" => ProblemKind::OneSidedMatching,
            "general-matching" | "general" => ProblemKind::GeneralMatching,
            "two-sided-matching" | "two-sided" => ProblemKind::TwoSidedMatching,
            "k-matching" => ProblemKind::KMatching(need_k(k)?),
            "clique-packing" => ProblemKind::CliquePacking(need_k(k)?),
            "cycle-packing" => ProblemKind::CyclePacking(need_k(k)?),
            "k-constrained-allocation" | "allocation" => ProblemKind::KAllocation(need_k(k)?),
            "social-choice" => ProblemKind::SocialChoice,
            other => return Err(ParseError::Schema(format!("unknown kind `{other}`"))),
        };
        if kind.param().is_none() && k.is_some() {
            return Err(ParseError::Schema(format!("kind `{name}` takes no `k`")));
        }
        Ok(kind)
    }

    /// Kinds whose node set is split into two sides.
    pub fn is_bipartite(&self) -> bool {
        matches!(
            self,
            ProblemKind::OneSidedMatching | ProblemKind::TwoSidedMatching | ProblemKind::KAllocation(_)
        )
    }

    fn validate_param(&self) -> std::result::Result<(), ParseError> {
        match *self {
            ProblemKind::KMatching(k) | ProblemKind::KAllocation(k) if k < 1 => {
                Err(ParseError::Invalid(format!("{} needs k >= 1", self.name())))
            }
            ProblemKind::CliquePacking(k) if k < 2 => {
                Err(ParseError::Invalid("clique-packing needs k >= 2".into()))
            }
            ProblemKind::CyclePacking(k) if k < 3 => {
                Err(ParseError::Invalid("cycle-packing needs k >= 3".into()))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.param() {
            Some(k) => write!(f, "{}({k})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

/// Dense, row-major matrix of nonnegative finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuationProfile {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ValuationProfile {
    pub fn new(rows: Vec<Vec<f64>>) -> std::result::Result<Self, ParseError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(ParseError::DimensionMismatch(format!(
                    "row {r} has length {} but row 0 has length {cols}",
                    row.len()
                )));
            }
            for (c, &value) in row.iter().enumerate() {
                if !value.is_finite() {
                    return Err(ParseError::NonFinite { row: r, col: c });
                }
                if value < 0.0 {
                    return Err(ParseError::NegativeValue { row: r, col: c, value });
                }
                data.push(value);
            }
        }
        Ok(ValuationProfile { rows: rows.len(), cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ValuationProfile { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    /// Sets one entry; panics on negative or non-finite input.
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        assert!(value.is_finite() && value >= 0.0, "invalid value {value}");
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }
}

/// Partition of the node set into two sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideSplit {
    pub n1: Vec<usize>,
    pub n2: Vec<usize>,
}

/// The agents that pick (`n1`) and the alternatives they pick from (`n2`)
/// when building a sufficiently representative assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sides {
    pub n1: Vec<usize>,
    pub n2: Vec<usize>,
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    kind: ProblemKind,
    values: ValuationProfile,
    side_split: Option<SideSplit>,
    /// Node-space values for one-sided instances (items as zero rows).
    normalized: Option<ValuationProfile>,
}

impl Instance {
    pub fn new(
        kind: ProblemKind,
        values: ValuationProfile,
        side_split: Option<SideSplit>,
    ) -> std::result::Result<Self, ParseError> {
        kind.validate_param()?;
        let (n, m) = (values.rows(), values.cols());
        if n == 0 || m == 0 {
            return Err(ParseError::DimensionMismatch("n and m must be at least 1".into()));
        }
        if kind != ProblemKind::SocialChoice && n != m {
            return Err(ParseError::DimensionMismatch(format!(
                "{} needs a square value matrix, got {n}x{m}",
                kind.name()
            )));
        }
        if let ProblemKind::CliquePacking(k) = kind {
            if n % k != 0 {
                return Err(ParseError::Invalid(format!("clique-packing({k}) needs k | n, n = {n}")));
            }
        }
        let needs_split = matches!(kind, ProblemKind::TwoSidedMatching | ProblemKind::KAllocation(_));
        match (&side_split, needs_split) {
            (None, true) => {
                return Err(ParseError::Schema(format!("{} requires `side_split`", kind.name())))
            }
            (Some(_), false) => {
                return Err(ParseError::Schema(format!("{} takes no `side_split`", kind.name())))
            }
            (Some(split), true) => validate_split(split, n)?,
            (None, false) => {}
        }
        if let (ProblemKind::KAllocation(_), Some(split)) = (kind, &side_split) {
            let mut in_n1 = vec![false; n];
            split.n1.iter().for_each(|&i| in_n1[i] = true);
            for i in 0..n {
                for j in 0..n {
                    if i != j && values.get(i, j) != 0.0 && !(in_n1[i] && !in_n1[j]) {
                        return Err(ParseError::Invalid(format!(
                            "allocation values must be zero outside N1 -> N2 (entry {i},{j})"
                        )));
                    }
                }
            }
        }
        let normalized = (kind == ProblemKind::OneSidedMatching).then(|| {
            let mut nodes = ValuationProfile::zeros(2 * n, 2 * n);
            for i in 0..n {
                for j in 0..n {
                    nodes.set(i, n + j, values.get(i, j));
                }
            }
            nodes
        });
        Ok(Instance { kind, values, side_split, normalized })
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    /// Agent count (rows of the value matrix).
    pub fn n(&self) -> usize {
        self.values.rows()
    }

    /// Alternative count (columns of the value matrix).
    pub fn m(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &ValuationProfile {
        &self.values
    }

    pub fn side_split(&self) -> Option<&SideSplit> {
        self.side_split.as_ref()
    }

    pub fn is_social_choice(&self) -> bool {
        self.kind == ProblemKind::SocialChoice
    }

    /// Nodes of the underlying graph; `2n` for one-sided instances.
    pub fn node_count(&self) -> usize {
        match self.kind {
            ProblemKind::OneSidedMatching => 2 * self.n(),
            _ => self.n(),
        }
    }

    /// The matrix mechanisms rank and query: node-by-node for graph kinds,
    /// agent-by-alternative for social choice.
    pub fn preference_values(&self) -> &ValuationProfile {
        self.normalized.as_ref().unwrap_or(&self.values)
    }

    /// Directed value of node `u` for node `v`.
    #[inline]
    pub fn node_value(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        self.preference_values().get(u, v)
    }

    /// `w({u, v}) = v_u(v) + v_v(u)`.
    pub fn edge_weight(&self, u: usize, v: usize) -> f64 {
        self.node_value(u, v) + self.node_value(v, u)
    }

    /// Side membership: `Some(true)` for the first side, `Some(false)` for the
    /// second, `None` for kinds without sides.
    pub fn side_of(&self, node: usize) -> Option<bool> {
        match self.kind {
            ProblemKind::OneSidedMatching => Some(node < self.n()),
            ProblemKind::TwoSidedMatching | ProblemKind::KAllocation(_) => {
                self.side_split.as_ref().map(|s| s.n1.contains(&node))
            }
            _ => None,
        }
    }

    /// The alternatives agent `agent` ranks.
    pub fn relevant(&self, agent: usize) -> Vec<usize> {
        match self.kind {
            ProblemKind::SocialChoice => (0..self.m()).collect(),
            _ => {
                let nodes = self.node_count();
                match self.side_of(agent) {
                    Some(side) => (0..nodes).filter(|&v| self.side_of(v) == Some(!side)).collect(),
                    None => (0..nodes).filter(|&v| v != agent).collect(),
                }
            }
        }
    }

    /// Picking agents and their alternatives for the serial dictatorship.
    ///
    /// One-sided and allocation instances pick from the item side; every
    /// other graph kind uses the whole node set on both sides.
    pub fn sides(&self) -> Sides {
        match self.kind {
            ProblemKind::OneSidedMatching => {
                let n = self.n();
                Sides { n1: (0..n).collect(), n2: (n..2 * n).collect() }
            }
            ProblemKind::KAllocation(_) => {
                let split = self.side_split.as_ref().expect("validated split");
                let mut n1 = split.n1.clone();
                let mut n2 = split.n2.clone();
                n1.sort_unstable();
                n2.sort_unstable();
                Sides { n1, n2 }
            }
            ProblemKind::SocialChoice => {
                Sides { n1: (0..self.n()).collect(), n2: (0..self.m()).collect() }
            }
            _ => {
                let all: Vec<usize> = (0..self.n()).collect();
                Sides { n1: all.clone(), n2: all }
            }
        }
    }

    pub fn family(&self) -> Result<FamilySpec> {
        FamilySpec::for_kind(self.kind)
    }

    /// Same kind, dimensions and sides with every value zeroed.
    pub fn skeleton(&self) -> Instance {
        let values = ValuationProfile::zeros(self.n(), self.m());
        Instance::new(self.kind, values, self.side_split.clone()).expect("zero values keep the instance valid")
    }
}

fn validate_split(split: &SideSplit, n: usize) -> std::result::Result<(), ParseError> {
    let mut seen = vec![false; n];
    for &v in split.n1.iter().chain(&split.n2) {
        if v >= n {
            return Err(ParseError::Invalid(format!("side_split node {v} out of range")));
        }
        if seen[v] {
            return Err(ParseError::Invalid(format!("node {v} appears twice in side_split")));
        }
        seen[v] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(ParseError::Invalid(format!("node {missing} missing from side_split")));
    }
    Ok(())
}

/// Feasible-solution family of a graph problem with its degree bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilySpec {
    pub kind: ProblemKind,
    pub k_eff: usize,
}

impl FamilySpec {
    pub fn for_kind(kind: ProblemKind) -> Result<Self> {
        let k_eff = match kind {
            ProblemKind::OneSidedMatching
            | ProblemKind::GeneralMatching
            | ProblemKind::TwoSidedMatching => 1,
            ProblemKind::KMatching(k) | ProblemKind::KAllocation(k) => k,
            ProblemKind::CliquePacking(k) | ProblemKind::CyclePacking(k) => k - 1,
            ProblemKind::SocialChoice => {
                return Err(Error::Unsupported("social choice has no subgraph family".into()))
            }
        };
        Ok(FamilySpec { kind, k_eff })
    }

    /// Largest matching the family must absorb: `⌊nodes / (3 k_eff)⌋`.
    pub fn extension_limit(&self, nodes: usize) -> usize {
        nodes / (3 * self.k_eff.max(1))
    }
}

/// A set of undirected edges, sorted and free of duplicates and self-loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SubgraphDoc")]
pub struct Subgraph {
    edges: Vec<Edge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubgraphDoc {
    edges: Vec<Edge>,
    #[serde(default)]
    weight: Option<f64>,
}

impl TryFrom<SubgraphDoc> for Subgraph {
    type Error = Error;

    fn try_from(doc: SubgraphDoc) -> Result<Self> {
        let mut sub = Subgraph::new(doc.edges)?;
        sub.weight = doc.weight;
        Ok(sub)
    }
}

impl Subgraph {
    pub fn new(edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut edges: Vec<Edge> = edges
            .into_iter()
            .map(|(u, v)| if u <= v { (u, v) } else { (v, u) })
            .collect();
        if let Some(&(u, _)) = edges.iter().find(|(u, v)| u == v) {
            return Err(Error::MalformedSubgraph(format!("self-loop at node {u}")));
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::MalformedSubgraph(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Subgraph { edges, weight: None })
    }

    pub fn empty() -> Self {
        Subgraph { edges: Vec::new(), weight: None }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, edge: Edge) -> bool {
        let e = if edge.0 <= edge.1 { edge } else { (edge.1, edge.0) };
        self.edges.binary_search(&e).is_ok()
    }

    pub fn weight(&self) -> Option<f64> {
        self.weight
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = Some(weight);
        self
    }

    pub fn max_node(&self) -> Option<usize> {
        self.edges.iter().map(|&(_, v)| v).max()
    }

    /// Degree of every node in `0..nodes`; errors if an edge leaves the range.
    pub fn degrees(&self, nodes: usize) -> Result<Vec<usize>> {
        let mut deg = vec![0; nodes];
        for &(u, v) in &self.edges {
            if v >= nodes {
                return Err(Error::MalformedSubgraph(format!(
                    "edge ({u}, {v}) leaves node range 0..{nodes}"
                )));
            }
            deg[u] += 1;
            deg[v] += 1;
        }
        Ok(deg)
    }

    /// Adjacency lists over `0..nodes`, neighbors in increasing order.
    pub fn adjacency(&self, nodes: usize) -> Result<Vec<Vec<usize>>> {
        self.degrees(nodes)?;
        let mut adj = vec![Vec::new(); nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj.iter_mut().for_each(|a| a.sort_unstable());
        Ok(adj)
    }

    pub fn is_matching(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges.iter().all(|&(u, v)| seen.insert(u) && seen.insert(v))
    }
}

/// One issued value query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub agent: usize,
    pub alternative: usize,
    pub value: f64,
}

/// Record of issued queries with per-agent budget accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "TranscriptDoc", into = "TranscriptDoc")]
pub struct QueryTranscript {
    budget: usize,
    log: Vec<Query>,
    issued: BTreeMap<usize, usize>,
    revealed: BTreeMap<(usize, usize), f64>,
}

#[derive(Serialize, Deserialize)]
struct TranscriptDoc {
    budget: usize,
    queries: Vec<Query>,
}

impl From<TranscriptDoc> for QueryTranscript {
    fn from(doc: TranscriptDoc) -> Self {
        let mut t = QueryTranscript::new(doc.budget);
        for q in doc.queries {
            t.push_unchecked(q);
        }
        t
    }
}

impl From<QueryTranscript> for TranscriptDoc {
    fn from(t: QueryTranscript) -> Self {
        TranscriptDoc { budget: t.budget, queries: t.log }
    }
}

impl QueryTranscript {
    pub fn new(budget: usize) -> Self {
        QueryTranscript { budget, log: Vec::new(), issued: BTreeMap::new(), revealed: BTreeMap::new() }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Records a query; every call consumes budget, repeats reveal nothing new.
    pub fn record(&mut self, agent: usize, alternative: usize, value: f64) -> Result<()> {
        if self.issued(agent) >= self.budget {
            return Err(Error::BudgetExceeded { agent, budget: self.budget });
        }
        self.push_unchecked(Query { agent, alternative, value });
        Ok(())
    }

    fn push_unchecked(&mut self, q: Query) {
        *self.issued.entry(q.agent).or_default() += 1;
        self.revealed.insert((q.agent, q.alternative), q.value);
        self.log.push(q);
    }

    pub fn issued(&self, agent: usize) -> usize {
        self.issued.get(&agent).copied().unwrap_or(0)
    }

    pub fn queries(&self) -> &[Query] {
        &self.log
    }

    pub fn is_revealed(&self, agent: usize, alternative: usize) -> bool {
        self.revealed.contains_key(&(agent, alternative))
    }

    pub fn revealed_value(&self, agent: usize, alternative: usize) -> Option<f64> {
        self.revealed.get(&(agent, alternative)).copied()
    }

    /// Revealed `(agent, alternative) -> value` pairs, each stored once.
    pub fn revealed(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.revealed
    }

    /// Largest issued count over all agents.
    pub fn max_issued(&self) -> usize {
        self.issued.values().copied().max().unwrap_or(0)
    }

    /// True iff every revealed value equals the matching matrix entry.
    pub fn agrees_with(&self, values: &ValuationProfile) -> bool {
        self.log.iter().all(|q| {
            q.agent < values.rows()
                && q.alternative < values.cols()
                && values.get(q.agent, q.alternative) == q.value
        })
    }
}

/// Structural feasibility of `sub` in the family `spec` over `inst`'s nodes.
pub fn check_feasible(sub: &Subgraph, spec: &FamilySpec, inst: &Instance) -> Result<bool> {
    let nodes = inst.node_count();
    let deg = sub.degrees(nodes)?;
    let crosses = |&(u, v): &Edge| match (inst.side_of(u), inst.side_of(v)) {
        (Some(a), Some(b)) => a != b,
        _ => true,
    };
    let ok = match spec.kind {
        ProblemKind::OneSidedMatching => {
            sub.edges().iter().all(crosses) && deg.iter().all(|&d| d == 1)
        }
        ProblemKind::GeneralMatching => deg.iter().all(|&d| d <= 1),
        ProblemKind::TwoSidedMatching => {
            sub.edges().iter().all(crosses) && deg.iter().all(|&d| d <= 1)
        }
        ProblemKind::KMatching(_) => deg.iter().all(|&d| d <= spec.k_eff),
        ProblemKind::KAllocation(_) => {
            sub.edges().iter().all(crosses)
                && deg.iter().enumerate().all(|(v, &d)| match inst.side_of(v) {
                    Some(true) => d <= spec.k_eff,
                    _ => d <= 1,
                })
        }
        ProblemKind::CliquePacking(k) => {
            let comps = components(sub, nodes)?;
            comps.iter().all(|(size, edges)| *size == k && *edges == k * (k - 1) / 2)
        }
        ProblemKind::CyclePacking(k) => {
            let comps = components(sub, nodes)?;
            deg.iter().all(|&d| d == 0 || d == 2)
                && comps
                    .iter()
                    .all(|&(size, edges)| edges == 0 || (size >= 3 && size <= k && edges == size))
        }
        ProblemKind::SocialChoice => {
            return Err(Error::Unsupported("social choice has no subgraph family".into()))
        }
    };
    Ok(ok)
}

/// `(node count, edge count)` of every connected component, isolated nodes included.
fn components(sub: &Subgraph, nodes: usize) -> Result<Vec<(usize, usize)>> {
    let adj = sub.adjacency(nodes)?;
    let mut comp = vec![usize::MAX; nodes];
    let mut out = Vec::new();
    for start in 0..nodes {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![start];
        comp[start] = id;
        let (mut size, mut degsum) = (0, 0);
        while let Some(u) = stack.pop() {
            size += 1;
            degsum += adj[u].len();
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    stack.push(v);
                }
            }
        }
        out.push((size, degsum / 2));
    }
    Ok(out)
}

/// Total edge weight `Σ v_u(v) + v_v(u)`; with a transcript, only revealed
/// directed entries count.
pub fn total_weight(sub: &Subgraph, inst: &Instance, restrict: Option<&QueryTranscript>) -> Result<f64> {
    if inst.is_social_choice() {
        return Err(Error::Unsupported("use alternative_welfare for social choice".into()));
    }
    sub.degrees(inst.node_count())?;
    let counted = |a: usize, b: usize| match restrict {
        Some(t) => {
            if t.is_revealed(a, b) {
                inst.node_value(a, b)
            } else {
                0.0
            }
        }
        None => inst.node_value(a, b),
    };
    Ok(sub.edges().iter().map(|&(u, v)| counted(u, v) + counted(v, u)).sum())
}

/// Social welfare `Σ_i v_{i,alt}`, optionally restricted to revealed entries.
pub fn alternative_welfare(inst: &Instance, alternative: usize, restrict: Option<&QueryTranscript>) -> f64 {
    let values = inst.values();
    (0..values.rows())
        .filter(|&i| restrict.map_or(true, |t| t.is_revealed(i, alternative)))
        .map(|i| values.get(i, alternative))
        .sum()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    n: usize,
    m: usize,
    values: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    side_split: Option<SideSplit>,
}

/// Parses the instance JSON document.
pub fn read_instance(bytes: &[u8]) -> std::result::Result<Instance, ParseError> {
    let doc: InstanceDoc =
        serde_json::from_slice(bytes).map_err(|e| ParseError::Schema(e.to_string()))?;
    let kind = ProblemKind::from_parts(&doc.kind, doc.k)?;
    if doc.values.len() != doc.n {
        return Err(ParseError::DimensionMismatch(format!(
            "n = {} but values has {} rows",
            doc.n,
            doc.values.len()
        )));
    }
    if let Some((r, row)) = doc.values.iter().enumerate().find(|(_, row)| row.len() != doc.m) {
        return Err(ParseError::DimensionMismatch(format!(
            "m = {} but row {r} has length {}",
            doc.m,
            row.len()
        )));
    }
    let values = ValuationProfile::new(doc.values)?;
    Instance::new(kind, values, doc.side_split)
}

/// Canonical JSON encoding: fixed key order, one matrix row per line.
pub fn write_instance(inst: &Instance) -> Vec<u8> {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"kind\": {},\n", json(&inst.kind.name())));
    if let Some(k) = inst.kind.param() {
        out.push_str(&format!("  \"k\": {k},\n"));
    }
    out.push_str(&format!("  \"n\": {},\n  \"m\": {},\n  \"values\": [\n", inst.n(), inst.m()));
    let rows: Vec<String> =
        (0..inst.n()).map(|r| format!("    {}", json(&inst.values.row(r)))).collect();
    out.push_str(&rows.join(",\n"));
    out.push_str("\n  ]");
    if let Some(split) = &inst.side_split {
        out.push_str(&format!(
            ",\n  \"side_split\": {{\"n1\": {}, \"n2\": {}}}",
            json(&split.n1),
            json(&split.n2)
        ));
    }
    out.push_str("\n}\n");
    out.into_bytes()
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}
