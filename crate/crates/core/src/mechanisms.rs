//! The two-query mechanisms and welfare diagnostics.
//!
//! A mechanism sees a [`MechanismView`]: the ordinal profile, the structure
//! of the instance (kind, sides, node count) and a query callback. Values are
//! only reachable through [`MechanismView::query`], which records every call
//! against the per-agent budget.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{
    alternative_welfare, total_weight, FamilySpec, Instance, ProblemKind, QueryTranscript, Sides, Subgraph,
    ValuationProfile,
};
use crate::ordinal::{check_consistency, derive_ordinal, OrdinalProfile};
use crate::solvers::{max_weight_perfect_bipartite, solve_family, EdgeWeights};
use crate::sra::{find_representative_set, serial_dictatorship, RepresentativeSet, SRAssignment, SrsMode};

/// Queries per agent unless configured otherwise.
pub const DEFAULT_BUDGET: usize = 2;

/// Budget-enforcing access to hidden values.
struct QueryOracle<'a> {
    values: &'a ValuationProfile,
    transcript: QueryTranscript,
}

/// Everything a mechanism may use.
pub struct MechanismView<'a> {
    ord: &'a OrdinalProfile,
    structure: Instance,
    sides: Sides,
    oracle: QueryOracle<'a>,
}

impl<'a> MechanismView<'a> {
    /// `ord` must be consistent with the instance's values; a derived profile
    /// always is.
    pub fn new(inst: &'a Instance, ord: &'a OrdinalProfile, budget: usize) -> Result<Self> {
        let values = inst.preference_values();
        if !check_consistency(ord, values)? {
            return Err(Error::Parameter("ordinal profile is inconsistent with the values".into()));
        }
        if ord.agents() != values.rows() || ord.alternatives() != values.cols() {
            return Err(Error::DimensionMismatch(format!(
                "ordinal profile is {}x{}, values are {}x{}",
                ord.agents(),
                ord.alternatives(),
                values.rows(),
                values.cols()
            )));
        }
        Ok(MechanismView {
            ord,
            structure: inst.skeleton(),
            sides: inst.sides(),
            oracle: QueryOracle { values, transcript: QueryTranscript::new(budget) },
        })
    }

    pub fn ordinal(&self) -> &OrdinalProfile {
        self.ord
    }

    /// The instance with every value zeroed.
    pub fn structure(&self) -> &Instance {
        &self.structure
    }

    pub fn sides(&self) -> &Sides {
        &self.sides
    }

    pub fn transcript(&self) -> &QueryTranscript {
        &self.oracle.transcript
    }

    /// Reveals `v_agent(alternative)`, consuming one unit of budget even when
    /// the pair was revealed before.
    pub fn query(&mut self, agent: usize, alternative: usize) -> Result<f64> {
        if !self.ord.is_relevant(agent, alternative) {
            return Err(Error::NotRelevant { agent, alternative });
        }
        let value = self.oracle.values.get(agent, alternative);
        self.oracle.transcript.record(agent, alternative, value)?;
        Ok(value)
    }

    fn into_transcript(self) -> QueryTranscript {
        self.oracle.transcript
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    Match2q,
    General2q,
    Sc2q,
    /// Queries each agent's two highest-ranked alternatives.
    Top2,
}

impl MechanismKind {
    pub fn name(&self) -> &'static str {
        match self {
            MechanismKind::Match2q => "match2q",
            MechanismKind::General2q => "general2q",
            MechanismKind::Sc2q => "sc2q",
            MechanismKind::Top2 => "top2",
        }
    }
}

impl std::str::FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "match2q" => Ok(MechanismKind::Match2q),
            "general2q" => Ok(MechanismKind::General2q),
            "sc2q" => Ok(MechanismKind::Sc2q),
            "top2" => Ok(MechanismKind::Top2),
            other => Err(Error::Parameter(format!("unknown mechanism `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismOutput {
    Solution(Subgraph),
    Winner(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismRun {
    pub mechanism: MechanismKind,
    pub output: MechanismOutput,
    pub transcript: QueryTranscript,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sra_used: Option<SRAssignment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub srs_used: Option<RepresentativeSet>,
    /// Welfare of the output counting revealed values only.
    pub revealed_objective: f64,
}

impl MechanismRun {
    pub fn solution(&self) -> Option<&Subgraph> {
        match &self.output {
            MechanismOutput::Solution(s) => Some(s),
            MechanismOutput::Winner(_) => None,
        }
    }

    pub fn winner(&self) -> Option<usize> {
        match self.output {
            MechanismOutput::Winner(w) => Some(w),
            MechanismOutput::Solution(_) => None,
        }
    }
}

/// Result of the social choice mechanism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScOutcome {
    Run(MechanismRun),
    /// No representative set was located; holds the queries issued so far.
    SrsNotFound { transcript: QueryTranscript },
}

fn require_kind(inst: &Instance, ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("{what} does not apply to {}", inst.kind())))
    }
}

fn require_budget(budget: usize) -> Result<()> {
    if budget < 2 {
        return Err(Error::Parameter(format!("two-query mechanisms need a budget of at least 2, got {budget}")));
    }
    Ok(())
}

/// Queries tops, runs the serial dictatorship, queries assignments.
fn two_queries_core(view: &mut MechanismView) -> Result<SRAssignment> {
    let sides = view.sides().clone();
    for &i in &sides.n1 {
        if let Some(top) = view.ordinal().top(i) {
            view.query(i, top)?;
        }
    }
    let sra = serial_dictatorship(view.ordinal(), &sides, None)?;
    for &i in &sides.n1 {
        if let Some(target) = sra.get(i) {
            view.query(i, target)?;
        }
    }
    Ok(sra)
}

fn revealed_weights(view: &MechanismView) -> EdgeWeights {
    let t = view.transcript();
    let nodes = view.structure().node_count();
    let r = |a: usize, b: usize| t.revealed_value(a, b).unwrap_or(0.0);
    EdgeWeights::from_fn(nodes, |u, v| r(u, v) + r(v, u))
}

/// Two queries per agent for one-sided matching, then a maximum-weight
/// perfect matching of the revealed values.
pub fn match_two_queries(inst: &Instance) -> Result<MechanismRun> {
    let ord = derive_ordinal(inst);
    match_two_queries_with(inst, &ord, DEFAULT_BUDGET)
}

pub fn match_two_queries_with(inst: &Instance, ord: &OrdinalProfile, budget: usize) -> Result<MechanismRun> {
    require_kind(inst, inst.kind() == ProblemKind::OneSidedMatching, "match2q")?;
    require_budget(budget)?;
    let mut view = MechanismView::new(inst, ord, budget)?;
    let sra = two_queries_core(&mut view)?;
    let n = inst.n();
    let t = view.transcript();
    let block: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| t.revealed_value(i, n + j).unwrap_or(0.0)).collect()).collect();
    let solution = max_weight_perfect_bipartite(&block)?.solution;
    finish_graph_run(inst, MechanismKind::Match2q, solution, view.into_transcript(), sra)
}

/// Two queries per picking agent, then a maximum-weight family member under
/// the revealed weights.
pub fn general_two_queries(inst: &Instance, spec: &FamilySpec) -> Result<MechanismRun> {
    let ord = derive_ordinal(inst);
    general_two_queries_with(inst, spec, &ord, DEFAULT_BUDGET)
}

pub fn general_two_queries_with(
    inst: &Instance,
    spec: &FamilySpec,
    ord: &OrdinalProfile,
    budget: usize,
) -> Result<MechanismRun> {
    require_kind(inst, !inst.is_social_choice(), "general2q")?;
    if spec.kind != inst.kind() {
        return Err(Error::Parameter(format!("family {} does not match instance kind {}", spec.kind, inst.kind())));
    }
    require_budget(budget)?;
    let mut view = MechanismView::new(inst, ord, budget)?;
    let sra = two_queries_core(&mut view)?;
    let weights = revealed_weights(&view);
    let solution = solve_family(view.structure(), spec, &weights)?.solution;
    finish_graph_run(inst, MechanismKind::General2q, solution, view.into_transcript(), sra)
}

fn finish_graph_run(
    inst: &Instance,
    mechanism: MechanismKind,
    solution: Subgraph,
    transcript: QueryTranscript,
    sra: SRAssignment,
) -> Result<MechanismRun> {
    let revealed_objective = total_weight(&solution, inst, Some(&transcript))?;
    Ok(MechanismRun {
        mechanism,
        output: MechanismOutput::Solution(solution.with_weight(revealed_objective)),
        transcript,
        sra_used: Some(sra),
        srs_used: None,
        revealed_objective,
    })
}

/// Queries tops, looks for a representative set, queries each agent's
/// favorite member, and returns the alternative of highest revealed welfare.
pub fn sc_two_queries(inst: &Instance, mode: SrsMode) -> Result<ScOutcome> {
    let ord = derive_ordinal(inst);
    sc_two_queries_with(inst, &ord, mode, DEFAULT_BUDGET)
}

pub fn sc_two_queries_with(inst: &Instance, ord: &OrdinalProfile, mode: SrsMode, budget: usize) -> Result<ScOutcome> {
    require_kind(inst, inst.is_social_choice(), "sc2q")?;
    require_budget(budget)?;
    let mut view = MechanismView::new(inst, ord, budget)?;
    for i in 0..ord.agents() {
        if let Some(top) = ord.top(i) {
            view.query(i, top)?;
        }
    }
    let Some(set) = find_representative_set(ord, mode)? else {
        return Ok(ScOutcome::SrsNotFound { transcript: view.into_transcript() });
    };
    for i in 0..ord.agents() {
        if let Some(fav) = set.favorite(ord, i) {
            view.query(i, fav)?;
        }
    }
    let transcript = view.into_transcript();
    let (winner, revealed_objective) = revealed_argmax(inst, &transcript);
    Ok(ScOutcome::Run(MechanismRun {
        mechanism: MechanismKind::Sc2q,
        output: MechanismOutput::Winner(winner),
        transcript,
        sra_used: None,
        srs_used: Some(set),
        revealed_objective,
    }))
}

/// Baseline: queries each agent's two highest-ranked alternatives, returns
/// the alternative of highest revealed welfare.
pub fn top_two_baseline(inst: &Instance, ord: &OrdinalProfile, budget: usize) -> Result<MechanismRun> {
    require_kind(inst, inst.is_social_choice(), "top2")?;
    require_budget(budget)?;
    let mut view = MechanismView::new(inst, ord, budget)?;
    for i in 0..ord.agents() {
        for &j in ord.ranking(i).iter().take(2) {
            view.query(i, j)?;
        }
    }
    let transcript = view.into_transcript();
    let (winner, revealed_objective) = revealed_argmax(inst, &transcript);
    Ok(MechanismRun {
        mechanism: MechanismKind::Top2,
        output: MechanismOutput::Winner(winner),
        transcript,
        sra_used: None,
        srs_used: None,
        revealed_objective,
    })
}

/// Smallest index among the alternatives of maximum revealed welfare.
fn revealed_argmax(inst: &Instance, transcript: &QueryTranscript) -> (usize, f64) {
    let mut welfare = vec![0.0; inst.m()];
    for (&(_, j), &v) in transcript.revealed() {
        welfare[j] += v;
    }
    welfare.iter().enumerate().fold((0, welfare[0]), |(bj, bw), (j, &w)| if w > bw { (j, w) } else { (bj, bw) })
}

/// Split of a rival's welfare into revealed and concealed parts, with the
/// concealed part divided by comparison against each agent's second queried
/// alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareDecomposition {
    /// True welfare of the rival.
    pub total: f64,
    /// Revealed welfare of the rival.
    pub sw_r_opt: f64,
    /// Concealed welfare from pairs the agent values at most its reference.
    pub sw_c_geq: f64,
    /// Concealed welfare from pairs the agent values above its reference.
    pub sw_c_lt: f64,
    /// Agents with at least one concealed rival value.
    pub s: Vec<usize>,
    pub s_geq: Vec<usize>,
    pub s_lt: Vec<usize>,
    /// Agents of `s_geq` grouped by their reference alternative.
    pub s_geq_by_alternative: BTreeMap<usize, Vec<usize>>,
    /// What each agent receives in the rival.
    pub rival_neighbors: BTreeMap<usize, Vec<usize>>,
    pub revealed_objective: f64,
    /// `sw_c_geq / revealed_objective`, absent when the denominator is zero.
    pub geq_to_revealed: Option<f64>,
    pub lt_count: usize,
}

/// Decomposes the true welfare of `rival` against the queries of `run`.
///
/// Each agent's reference alternative is its second query (the assignment
/// target, or its favorite member of the representative set); agents with
/// fewer than two queries compare against zero.
pub fn decompose_welfare(run: &MechanismRun, rival: &MechanismOutput, inst: &Instance) -> Result<WelfareDecomposition> {
    let t = &run.transcript;
    let values = inst.preference_values();
    let mut reference: BTreeMap<usize, usize> = BTreeMap::new();
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    for q in t.queries() {
        let count = seen.entry(q.agent).or_default();
        *count += 1;
        if *count == 2 {
            reference.insert(q.agent, q.alternative);
        }
    }
    let sides = inst.sides();
    let mut rival_neighbors: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    match rival {
        MechanismOutput::Winner(x) => {
            if !inst.is_social_choice() || *x >= inst.m() {
                return Err(Error::Parameter(format!("alternative {x} is not a valid rival")));
            }
            for i in 0..inst.n() {
                rival_neighbors.insert(i, vec![*x]);
            }
        }
        MechanismOutput::Solution(sub) => {
            let spec = inst.family()?;
            if !crate::instance::check_feasible(sub, &spec, inst)? {
                return Err(Error::Parameter("rival solution is infeasible".into()));
            }
            let adj = sub.adjacency(inst.node_count())?;
            for &i in &sides.n1 {
                rival_neighbors.insert(i, adj[i].clone());
            }
            // nodes outside N1 still contribute their (usually zero) values
            for (i, nb) in adj.into_iter().enumerate() {
                rival_neighbors.entry(i).or_insert(nb);
            }
        }
    }
    let in_n1: std::collections::HashSet<usize> = match rival {
        MechanismOutput::Winner(_) => (0..inst.n()).collect(),
        MechanismOutput::Solution(_) => sides.n1.iter().copied().collect(),
    };
    let mut d = WelfareDecomposition {
        total: 0.0,
        sw_r_opt: 0.0,
        sw_c_geq: 0.0,
        sw_c_lt: 0.0,
        s: Vec::new(),
        s_geq: Vec::new(),
        s_lt: Vec::new(),
        s_geq_by_alternative: BTreeMap::new(),
        rival_neighbors: BTreeMap::new(),
        revealed_objective: run.revealed_objective,
        geq_to_revealed: None,
        lt_count: 0,
    };
    for (&i, neighbors) in &rival_neighbors {
        let reference_value = reference.get(&i).map_or(0.0, |&a| values.get(i, a));
        let mut concealed = false;
        let mut below = false;
        for &j in neighbors {
            let v = values.get(i, j);
            d.total += v;
            if t.is_revealed(i, j) {
                d.sw_r_opt += v;
            } else if reference_value >= v {
                d.sw_c_geq += v;
                concealed = true;
            } else {
                d.sw_c_lt += v;
                concealed = true;
                below = true;
            }
        }
        if concealed && in_n1.contains(&i) {
            d.s.push(i);
            if below {
                d.s_lt.push(i);
            } else {
                d.s_geq.push(i);
                if let Some(&a) = reference.get(&i) {
                    d.s_geq_by_alternative.entry(a).or_default().push(i);
                }
            }
        }
    }
    d.rival_neighbors = rival_neighbors.into_iter().filter(|(i, nb)| in_n1.contains(i) && !nb.is_empty()).collect();
    d.lt_count = d.s_lt.len();
    d.geq_to_revealed = (run.revealed_objective > 0.0).then(|| d.sw_c_geq / run.revealed_objective);
    Ok(d)
}

/// True welfare of a mechanism output.
pub fn output_welfare(output: &MechanismOutput, inst: &Instance) -> Result<f64> {
    match output {
        MechanismOutput::Solution(s) => total_weight(s, inst, None),
        MechanismOutput::Winner(x) => Ok(alternative_welfare(inst, *x, None)),
    }
}
