//! Lower-bound instance generators, random instance generators, and a
//! completion engine that searches the valuation profiles consistent with a
//! mechanism's transcript for the one maximizing realized distortion.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, ProblemKind, QueryTranscript, SideSplit, Subgraph, ValuationProfile};
use crate::mechanisms::{
    general_two_queries_with, match_two_queries_with, output_welfare, sc_two_queries_with, top_two_baseline,
    MechanismKind, MechanismOutput, MechanismRun, ScOutcome, DEFAULT_BUDGET,
};
use crate::ordinal::{derive_ordinal, OrdinalProfile};
use crate::solvers::enumerate::maximal_members;
use crate::solvers::{integer_scale, min_cost_assignment, solve_family, solve_instance, to_int, EdgeWeights};
use crate::sra::{ceil_sqrt, SrsMode};

/// Deterministic generator for trial `seed`.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Values drawn uniformly from `{0, 0.001, ..., 1000}`.
pub fn random_values(rng: &mut impl Rng, rows: usize, cols: usize) -> ValuationProfile {
    let mut values = ValuationProfile::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            values.set(i, j, rng.gen_range(0..=1_000_000u32) as f64 / 1000.0);
        }
    }
    values
}

/// A random instance of `kind`.
///
/// `n` is the agent count (node count for graph kinds); `m` only matters for
/// social choice. Two-sided and allocation instances put the first `⌈n/2⌉`
/// nodes in `N1`. With `symmetric`, graph values satisfy `v_u(v) = v_v(u)`
/// (allocation values stay one-directional).
pub fn random_instance(rng: &mut impl Rng, kind: ProblemKind, n: usize, m: usize, symmetric: bool) -> Result<Instance> {
    let inst = match kind {
        ProblemKind::SocialChoice => Instance::new(kind, random_values(rng, n, m), None)?,
        ProblemKind::OneSidedMatching => Instance::new(kind, random_values(rng, n, n), None)?,
        _ => {
            let mut values = random_values(rng, n, n);
            let half = n.div_ceil(2);
            let split = matches!(kind, ProblemKind::TwoSidedMatching | ProblemKind::KAllocation(_))
                .then(|| SideSplit { n1: (0..half).collect(), n2: (half..n).collect() });
            for u in 0..n {
                values.set(u, u, 0.0);
                for v in 0..n {
                    let cross = u < half && v >= half;
                    let zero = match kind {
                        ProblemKind::TwoSidedMatching => (u < half) == (v < half),
                        ProblemKind::KAllocation(_) => !cross,
                        _ => false,
                    };
                    if zero {
                        values.set(u, v, 0.0);
                    } else if symmetric && v < u && !matches!(kind, ProblemKind::KAllocation(_)) {
                        values.set(u, v, values.get(v, u));
                    }
                }
            }
            Instance::new(kind, values, split)?
        }
    };
    Ok(inst)
}

/// Uniformly random complete rankings.
pub fn random_ordinal(rng: &mut impl Rng, agents: usize, alternatives: usize) -> OrdinalProfile {
    let rankings = (0..agents)
        .map(|_| {
            let mut r: Vec<usize> = (0..alternatives).collect();
            r.shuffle(rng);
            r
        })
        .collect();
    OrdinalProfile::new(rankings, alternatives).expect("permutations are valid rankings")
}

/// Agents ranking one alternative at one position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub alternative: usize,
    /// One-based rank position.
    pub position: usize,
    pub agents: Vec<usize>,
}

/// Structure of a layered lower-bound instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundLayout {
    pub lambda: usize,
    pub m: usize,
    /// Sizes of layers `1..=lambda + 2`.
    pub layer_sizes: Vec<usize>,
    /// One-based layer of each alternative.
    pub layer_of: Vec<usize>,
    pub blocks: Vec<Block>,
    /// Value at positions `1..=lambda + 1`.
    pub position_values: Vec<f64>,
    pub rankings: Vec<Vec<usize>>,
}

impl LowerBoundLayout {
    pub fn ordinal(&self) -> OrdinalProfile {
        OrdinalProfile::new(self.rankings.clone(), self.m).expect("layout rankings are permutations")
    }

    /// Alternatives of a one-based layer.
    pub fn layer(&self, layer: usize) -> Vec<usize> {
        (0..self.m).filter(|&j| self.layer_of[j] == layer).collect()
    }
}

fn round_sig9(x: f64) -> f64 {
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// Layered social choice instance with `n = m` agents where every mechanism
/// with `lambda` queries per agent is forced into large distortion.
///
/// Layer `ℓ ≤ λ` holds `⌈½·m^{(λ−ℓ+1)/λ}⌉` alternatives, layer `λ+1` holds
/// two, and the rest form layer `λ+2`. Agents ranking the same alternative at
/// position `ℓ` also share their position `ℓ+1` alternative. Positions past
/// `λ+1` are a seeded shuffle of the remaining alternatives and carry value 0.
pub fn gen_lower_bound(m: usize, lambda: usize, seed: u64) -> Result<(Instance, LowerBoundLayout)> {
    if lambda == 0 {
        return Err(Error::Parameter("lambda must be at least 1".into()));
    }
    let mf = m as f64;
    let mut layer_sizes: Vec<usize> = (1..=lambda)
        .map(|l| (0.5 * mf.powf((lambda - l + 1) as f64 / lambda as f64) - 1e-9).ceil() as usize)
        .collect();
    layer_sizes.push(2);
    let used: usize = layer_sizes.iter().sum();
    if used > m || layer_sizes.iter().any(|&s| s == 0) {
        return Err(Error::Parameter(format!("m = {m} is too small for lambda = {lambda}")));
    }
    for w in layer_sizes.windows(2) {
        if w[0] < w[1] {
            return Err(Error::Parameter(format!(
                "m = {m} is too small for lambda = {lambda}: a layer of {} cannot feed {} groups",
                w[0], w[1]
            )));
        }
    }
    if m < layer_sizes[0] {
        return Err(Error::Parameter(format!("m = {m} agents cannot fill {} blocks", layer_sizes[0])));
    }
    layer_sizes.push(m - used);

    let mut layer_of = Vec::with_capacity(m);
    for (l, &size) in layer_sizes.iter().enumerate() {
        layer_of.extend(std::iter::repeat(l + 1).take(size));
    }
    let first_of_layer = |l: usize| -> usize { layer_sizes[..l - 1].iter().sum() };

    // level 1 splits agents; later levels group the previous level's blocks
    let mut groups: Vec<Vec<usize>> = even_split(m, layer_sizes[0])
        .into_iter()
        .map(|r| r.collect())
        .collect();
    let mut blocks = Vec::new();
    for position in 1..=lambda + 1 {
        if position > 1 {
            let parts = even_split(groups.len(), layer_sizes[position - 1]);
            groups = parts.into_iter().map(|r| r.flat_map(|g| groups[g].clone()).collect()).collect();
        }
        let base = first_of_layer(position);
        for (g, agents) in groups.iter().enumerate() {
            blocks.push(Block { alternative: base + g, position, agents: agents.clone() });
        }
    }

    let position_values: Vec<f64> =
        (1..=lambda + 1).map(|l| round_sig9(mf.powf(-(l as f64) / lambda as f64))).collect();
    let mut head = vec![vec![usize::MAX; lambda + 1]; m];
    for b in &blocks {
        for &i in &b.agents {
            head[i][b.position - 1] = b.alternative;
        }
    }
    let mut rng = seeded_rng(seed);
    let mut values = ValuationProfile::zeros(m, m);
    let rankings: Vec<Vec<usize>> = head
        .into_iter()
        .enumerate()
        .map(|(i, top)| {
            let mut tail: Vec<usize> = (0..m).filter(|j| !top.contains(j)).collect();
            tail.shuffle(&mut rng);
            for (p, &j) in top.iter().enumerate() {
                values.set(i, j, position_values[p]);
            }
            top.into_iter().chain(tail).collect()
        })
        .collect();
    let inst = Instance::new(ProblemKind::SocialChoice, values, None)?;
    Ok((inst, LowerBoundLayout { lambda, m, layer_sizes, layer_of, blocks, position_values, rankings }))
}

/// `0..items` cut into `parts` contiguous ranges whose sizes differ by at
/// most one, larger ranges first.
fn even_split(items: usize, parts: usize) -> Vec<std::ops::Range<usize>> {
    let (base, extra) = (items / parts, items % parts);
    let mut start = 0;
    (0..parts)
        .map(|p| {
            let len = base + usize::from(p < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Largest `m` accepted by [`gen_srs_impossible`].
pub const SRS_IMPOSSIBLE_MAX_M: usize = 5;

/// Social choice instance realizing every ranking of `m` alternatives
/// exactly `k` times, on which no representative set exists once `k > √m`.
///
/// Rankings appear in lexicographic order, each repeated `k` times in a row;
/// the alternative at position `p` is worth `m − p`.
pub fn gen_srs_impossible(m: usize, k: usize) -> Result<Instance> {
    if m < 2 {
        return Err(Error::Parameter(format!("m must be at least 2, got {m}")));
    }
    if m > SRS_IMPOSSIBLE_MAX_M {
        return Err(Error::SizeLimit(format!("m = {m} exceeds {SRS_IMPOSSIBLE_MAX_M}")));
    }
    if (k * k) <= m {
        return Err(Error::Parameter(format!("k must exceed sqrt(m) = {:.3}, got {k}", (m as f64).sqrt())));
    }
    let mut rows = Vec::new();
    let mut perm: Vec<usize> = (0..m).collect();
    loop {
        let mut row = vec![0.0; m];
        for (p, &j) in perm.iter().enumerate() {
            row[j] = (m - p) as f64;
        }
        rows.extend(std::iter::repeat(row).take(k));
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(Instance::new(ProblemKind::SocialChoice, ValuationProfile::new(rows)?, None)?)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Maximizes `Σ coef[p]·x[p]` over `x[0] ≥ x[1] ≥ … ≥ 0` with the pinned
/// entries fixed. `pins[0]` must be set.
///
/// Between two pins (or after the last one, down to zero) the optimum is a
/// step: the free entries take the upper pin up to the best prefix of the
/// coefficients and the lower one after it.
pub fn optimize_chain(coef: &[f64], pins: &[Option<f64>]) -> Result<(f64, Vec<f64>)> {
    assert_eq!(coef.len(), pins.len());
    if coef.is_empty() {
        return Ok((0.0, Vec::new()));
    }
    let Some(mut hi) = pins[0] else {
        return Err(Error::Parameter("chain has no pinned top".into()));
    };
    let mut x = vec![0.0; coef.len()];
    x[0] = hi;
    let mut total = coef[0] * hi;
    let mut start = 1;
    while start < coef.len() {
        let end = (start..coef.len()).find(|&p| pins[p].is_some()).unwrap_or(coef.len());
        let lo = if end < coef.len() { pins[end].expect("found a pin") } else { 0.0 };
        if lo > hi {
            return Err(Error::Parameter("pinned values increase along the ranking".into()));
        }
        let (mut best, mut best_len, mut run) = (0.0, 0, 0.0);
        for (offset, &c) in coef[start..end].iter().enumerate() {
            run += c;
            if run > best {
                best = run;
                best_len = offset + 1;
            }
        }
        for p in start..end {
            x[p] = if p < start + best_len { hi } else { lo };
            total += coef[p] * x[p];
        }
        if end < coef.len() {
            x[end] = lo;
            total += coef[end] * lo;
            hi = lo;
        }
        start = end + 1;
    }
    Ok((total, x))
}

/// Distortion of a completion; `Infinite` when the mechanism's welfare can be
/// driven to zero while a rival keeps positive welfare.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ratio {
    Finite(f64),
    Infinite,
}

impl Ratio {
    pub fn value(&self) -> f64 {
        match *self {
            Ratio::Finite(r) => r,
            Ratio::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    #[serde(with = "profile_rows")]
    pub values: ValuationProfile,
    pub ratio: Ratio,
    /// The rival attaining the ratio.
    pub certificate: MechanismOutput,
    pub rival_index: usize,
    pub rivals_considered: usize,
}

mod profile_rows {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::instance::ValuationProfile;

    pub fn serialize<S: Serializer>(v: &ValuationProfile, s: S) -> Result<S::Ok, S::Error> {
        v.to_rows().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ValuationProfile, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        ValuationProfile::new(rows).map_err(serde::de::Error::custom)
    }
}

/// Bisection tolerance (relative) and step cap.
pub const BISECTION_TOLERANCE: f64 = 1e-6;
pub const BISECTION_STEPS: usize = 200;

/// Per-agent data for one (output, rival) pair.
struct AgentChain {
    agent: usize,
    ranking: Vec<usize>,
    pins: Vec<Option<f64>>,
    in_rival: Vec<bool>,
    in_output: Vec<bool>,
    /// Pins and nonzero coefficients in rank order, for fast evaluation.
    events: Vec<ChainEvent>,
}

#[derive(Debug, Clone, Copy)]
struct ChainEvent {
    pin: Option<f64>,
    rival: bool,
    output: bool,
}

impl AgentChain {
    fn new(agent: usize, ranking: Vec<usize>, pins: Vec<Option<f64>>, in_rival: Vec<bool>, in_output: Vec<bool>) -> Self {
        let events = (0..ranking.len())
            .filter(|&p| pins[p].is_some() || in_rival[p] || in_output[p])
            .map(|p| ChainEvent { pin: pins[p], rival: in_rival[p], output: in_output[p] })
            .collect();
        AgentChain { agent, ranking, pins, in_rival, in_output, events }
    }

    fn coef(&self, t: f64) -> Vec<f64> {
        self.in_rival.iter().zip(&self.in_output).map(|(&x, &y)| coefficient(x, y, t)).collect()
    }

    /// Same optimum as [`optimize_chain`] on [`AgentChain::coef`], touching
    /// only pins and nonzero coefficients.
    fn value(&self, t: f64) -> f64 {
        let mut total = 0.0;
        let mut hi = 0.0;
        let (mut run, mut best) = (0.0, 0.0);
        for e in &self.events {
            let c = coefficient(e.rival, e.output, t);
            match e.pin {
                Some(v) => {
                    total += v * run + (hi - v) * best + c * v;
                    hi = v;
                    run = 0.0;
                    best = 0.0;
                }
                None => {
                    run += c;
                    best = f64::max(best, run);
                }
            }
        }
        total + hi * best
    }
}

fn coefficient(rival: bool, output: bool, t: f64) -> f64 {
    f64::from(u8::from(rival)) - t * f64::from(u8::from(output))
}

/// The fractional program `max SW(X)/SW(Y)` over completions consistent with
/// an ordinal profile and a transcript.
pub struct CompletionProblem {
    rows: usize,
    cols: usize,
    chains: Vec<AgentChain>,
    /// Pinned entries of rows held at zero apart from their pins.
    fixed: Vec<(usize, usize, f64)>,
}

/// Alternatives each agent row receives under `output`.
fn receives(structure: &Instance, rows: usize, output: &MechanismOutput) -> Result<Vec<Vec<usize>>> {
    match output {
        MechanismOutput::Winner(x) => {
            if !structure.is_social_choice() || *x >= structure.m() {
                return Err(Error::Parameter(format!("alternative {x} is out of range")));
            }
            Ok(vec![vec![*x]; rows])
        }
        MechanismOutput::Solution(sub) => {
            if structure.is_social_choice() {
                return Err(Error::Parameter("social choice outputs are single alternatives".into()));
            }
            let mut adj = sub.adjacency(structure.node_count())?;
            adj.truncate(rows);
            Ok(adj)
        }
    }
}

impl CompletionProblem {
    /// Rows outside the picking side of one-sided and allocation instances
    /// are held at zero; every other row must have its top revealed.
    pub fn new(
        structure: &Instance,
        ord: &OrdinalProfile,
        transcript: &QueryTranscript,
        output: &MechanismOutput,
        rival: &MechanismOutput,
    ) -> Result<Self> {
        let rows = ord.agents();
        let cols = ord.alternatives();
        let y = receives(structure, rows, output)?;
        let x = receives(structure, rows, rival)?;
        let free: Vec<bool> = match structure.kind() {
            ProblemKind::OneSidedMatching | ProblemKind::KAllocation(_) => {
                let mut f = vec![false; rows];
                structure.sides().n1.iter().for_each(|&i| f[i] = true);
                f
            }
            _ => vec![true; rows],
        };
        let mut chains = Vec::new();
        let mut fixed = Vec::new();
        for i in 0..rows {
            let ranking = ord.ranking(i).to_vec();
            let pins: Vec<Option<f64>> = ranking.iter().map(|&j| transcript.revealed_value(i, j)).collect();
            let revealed_top = pins.first().is_some_and(|p| p.is_some());
            if !free[i] && !revealed_top {
                if pins.iter().any(|p| p.is_some_and(|v| v > 0.0)) {
                    return Err(Error::Unbounded(i));
                }
                continue;
            }
            if !revealed_top {
                if ranking.is_empty() {
                    continue;
                }
                return Err(Error::Unbounded(i));
            }
            let pinned: Vec<f64> = pins.iter().flatten().copied().collect();
            if pinned.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::Parameter(format!("revealed values of agent {i} contradict its ranking")));
            }
            let in_rival = ranking.iter().map(|j| x[i].contains(j)).collect();
            let in_output = ranking.iter().map(|j| y[i].contains(j)).collect();
            chains.push(AgentChain::new(i, ranking, pins, in_rival, in_output));
        }
        for (&(i, j), &v) in transcript.revealed() {
            if i >= rows || j >= cols {
                return Err(Error::DimensionMismatch(format!("revealed pair ({i}, {j}) is out of range")));
            }
            if !ord.is_relevant(i, j) {
                return Err(Error::NotRelevant { agent: i, alternative: j });
            }
            if !chains.iter().any(|c| c.agent == i) {
                fixed.push((i, j, v));
            }
        }
        Ok(CompletionProblem { rows, cols, chains, fixed })
    }

    fn assemble(&self, per_agent: &[(usize, Vec<usize>, Vec<f64>)]) -> ValuationProfile {
        let mut values = ValuationProfile::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.fixed {
            values.set(i, j, v);
        }
        for (i, ranking, x) in per_agent {
            for (&j, &v) in ranking.iter().zip(x) {
                values.set(*i, j, v);
            }
        }
        values
    }

    /// `max SW(X) − t·SW(Y)` over consistent completions, with a maximizer.
    pub fn gap(&self, t: f64) -> Result<(f64, ValuationProfile)> {
        let mut total = 0.0;
        let mut parts = Vec::with_capacity(self.chains.len());
        for c in &self.chains {
            let (v, x) = optimize_chain(&c.coef(t), &c.pins)?;
            total += v;
            parts.push((c.agent, c.ranking.clone(), x));
        }
        Ok((total, self.assemble(&parts)))
    }

    /// Value of [`CompletionProblem::gap`] without building the profile.
    pub fn gap_value(&self, t: f64) -> f64 {
        self.chains.iter().map(|c| c.value(t)).sum()
    }

    /// A completion with zero output welfare and maximum rival welfare, if
    /// the pins allow the output welfare to vanish.
    fn zero_output(&self) -> Result<Option<(f64, ValuationProfile)>> {
        let mut total = 0.0;
        let mut parts = Vec::with_capacity(self.chains.len());
        for c in &self.chains {
            let mut pins = c.pins.clone();
            if let Some(first) = c.in_output.iter().position(|&b| b) {
                for p in pins.iter_mut().skip(first) {
                    match *p {
                        Some(v) if v > 0.0 => return Ok(None),
                        _ => *p = Some(0.0),
                    }
                }
            }
            let coef: Vec<f64> = c.in_rival.iter().map(|&b| f64::from(u8::from(b))).collect();
            let (v, x) = optimize_chain(&coef, &pins)?;
            total += v;
            parts.push((c.agent, c.ranking.clone(), x));
        }
        Ok(Some((total, self.assemble(&parts))))
    }

    fn welfare(&self, values: &ValuationProfile, output: bool) -> f64 {
        self.chains
            .iter()
            .map(|c| {
                let mask = if output { &c.in_output } else { &c.in_rival };
                c.ranking.iter().zip(mask).filter(|(_, &b)| b).map(|(&j, _)| values.get(c.agent, j)).sum::<f64>()
            })
            .sum()
    }

    /// Supremum of `SW(X)/SW(Y)` by bisection on `t`, with the completion
    /// attaining the reported ratio.
    pub fn solve(&self, tolerance: f64) -> Result<(Ratio, ValuationProfile)> {
        if let Some((rival, values)) = self.zero_output()? {
            if rival > 0.0 {
                return Ok((Ratio::Infinite, values));
            }
        }
        if self.gap_value(0.0) <= 0.0 {
            return Ok((Ratio::Finite(0.0), self.gap(0.0)?.1));
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut steps = 0;
        while self.gap_value(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > BISECTION_STEPS {
                return Err(Error::NonConvergence(steps));
            }
        }
        while hi - lo > tolerance * hi {
            let mid = 0.5 * (lo + hi);
            if self.gap_value(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            steps += 1;
            if steps > BISECTION_STEPS {
                return Err(Error::NonConvergence(steps));
            }
        }
        let (_, values) = self.gap(lo)?;
        let (x, y) = (self.welfare(&values, false), self.welfare(&values, true));
        let ratio = if y > 0.0 { Ratio::Finite(x / y) } else { Ratio::Infinite };
        Ok((ratio, values))
    }
}

/// Worst consistent completion over a set of rivals. Ties keep the earliest
/// rival.
pub fn adversarial_completion(
    structure: &Instance,
    ord: &OrdinalProfile,
    transcript: &QueryTranscript,
    output: &MechanismOutput,
    rivals: &[MechanismOutput],
    tolerance: f64,
) -> Result<CompletionResult> {
    if rivals.is_empty() {
        return Err(Error::Parameter("no rivals to evaluate".into()));
    }
    let mut best: Option<CompletionResult> = None;
    for (idx, rival) in rivals.iter().enumerate() {
        let problem = CompletionProblem::new(structure, ord, transcript, output, rival)?;
        let (ratio, values) = problem.solve(tolerance)?;
        if best.as_ref().map_or(true, |b| ratio.value() > b.ratio.value()) {
            best = Some(CompletionResult {
                values,
                ratio,
                certificate: rival.clone(),
                rival_index: idx,
                rivals_considered: rivals.len(),
            });
        }
    }
    Ok(best.expect("at least one rival"))
}

/// Node count up to which graph rivals are enumerated exhaustively.
pub const EXHAUSTIVE_RIVAL_NODES: usize = 8;
/// Cap on exhaustively enumerated rivals.
pub const EXHAUSTIVE_RIVAL_CAP: usize = 5000;
/// Rivals kept by the heuristic generators.
pub const HEURISTIC_RIVALS: usize = 100;

/// Largest value each entry can take in a consistent completion: the
/// nearest pin at or above it in the ranking.
fn optimistic_values(ord: &OrdinalProfile, transcript: &QueryTranscript) -> ValuationProfile {
    let mut values = ValuationProfile::zeros(ord.agents(), ord.alternatives());
    for i in 0..ord.agents() {
        let mut cap = 0.0;
        for &j in ord.ranking(i) {
            if let Some(v) = transcript.revealed_value(i, j) {
                cap = v;
            }
            values.set(i, j, cap);
        }
    }
    values
}

/// Candidate rivals for the completion engine.
///
/// Social choice uses every alternative. Graph families are enumerated when
/// the node count allows; otherwise the best members under optimistic edge
/// weights are used: the top ranked perfect matchings for one-sided
/// instances, and the optimum plus its single-edge exclusions for the rest.
pub fn rival_candidates(structure: &Instance, ord: &OrdinalProfile, transcript: &QueryTranscript) -> Result<Vec<MechanismOutput>> {
    if structure.is_social_choice() {
        return Ok((0..structure.m()).map(MechanismOutput::Winner).collect());
    }
    let spec = structure.family()?;
    let nodes = structure.node_count();
    let exhaustive_limit = match structure.kind() {
        ProblemKind::OneSidedMatching => 2 * EXHAUSTIVE_RIVAL_NODES,
        _ => EXHAUSTIVE_RIVAL_NODES,
    };
    if nodes <= exhaustive_limit {
        if let Some(members) = maximal_members(structure, &spec, EXHAUSTIVE_RIVAL_CAP)? {
            return Ok(members.into_iter().map(MechanismOutput::Solution).collect());
        }
    }
    let optimistic = optimistic_values(ord, transcript);
    let weights = EdgeWeights::from_fn(nodes, |u, v| {
        let get = |a: usize, b: usize| if a < optimistic.rows() && b < optimistic.cols() { optimistic.get(a, b) } else { 0.0 };
        get(u, v) + get(v, u)
    });
    let subs = if structure.kind() == ProblemKind::OneSidedMatching {
        let n = structure.n();
        let block: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| weights.get(i, n + j)).collect()).collect();
        ranked_assignments(&block, HEURISTIC_RIVALS)
            .into_iter()
            .map(|a| Subgraph::new(a.into_iter().enumerate().map(|(i, j)| (i, n + j))))
            .collect::<Result<Vec<_>>>()?
    } else {
        let best = solve_family(structure, &spec, &weights)?.solution;
        let mut seen = BTreeSet::new();
        let mut out = vec![best.clone()];
        seen.insert(best.edges().to_vec());
        for &(u, v) in best.edges() {
            if out.len() >= HEURISTIC_RIVALS {
                break;
            }
            let mut w = weights.clone();
            w.set(u, v, 0.0);
            let alt = solve_family(structure, &spec, &w)?.solution;
            if seen.insert(alt.edges().to_vec()) {
                out.push(alt);
            }
        }
        out
    };
    Ok(subs.into_iter().map(MechanismOutput::Solution).collect())
}

/// The `k` heaviest perfect assignments of a square weight matrix, best
/// first, by partitioning the solution space around each found assignment.
pub fn ranked_assignments(weights: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    let n = weights.len();
    if n == 0 || k == 0 {
        return Vec::new();
    }
    let factor = integer_scale(weights.iter().flatten().copied()).min((1u64 << 30) as f64 / max_abs(weights).max(1e-300));
    let int: Vec<Vec<i64>> = weights.iter().map(|r| r.iter().map(|&w| to_int(w, factor)).collect()).collect();
    let forbidden_cost = (n as i64 + 1) * (1i64 << 31);

    // (forced[row] = Some(col), forbidden pairs)
    type Node = (Vec<Option<usize>>, Vec<(usize, usize)>);
    let solve = |node: &Node| -> Option<(i64, Vec<usize>)> {
        let (forced, forbidden) = node;
        let free_rows: Vec<usize> = (0..n).filter(|&i| forced[i].is_none()).collect();
        let taken: BTreeSet<usize> = forced.iter().flatten().copied().collect();
        let free_cols: Vec<usize> = (0..n).filter(|j| !taken.contains(j)).collect();
        let cost: Vec<Vec<i64>> = free_rows
            .iter()
            .map(|&i| {
                free_cols
                    .iter()
                    .map(|&j| if forbidden.contains(&(i, j)) { forbidden_cost } else { -int[i][j] })
                    .collect()
            })
            .collect();
        let assignment = if free_rows.is_empty() { Vec::new() } else { min_cost_assignment(&cost) };
        let mut full: Vec<usize> = forced.iter().map(|f| f.unwrap_or(usize::MAX)).collect();
        for (a, &i) in free_rows.iter().enumerate() {
            let j = free_cols[assignment[a]];
            if forbidden.contains(&(i, j)) {
                return None;
            }
            full[i] = j;
        }
        let value = full.iter().enumerate().map(|(i, &j)| int[i][j]).sum();
        Some((value, full))
    };

    let mut heap = BinaryHeap::new();
    let mut counter = 0usize;
    let root: Node = (vec![None; n], Vec::new());
    if let Some((value, sol)) = solve(&root) {
        heap.push((value, Reverse(counter), sol, root));
    }
    let mut out = Vec::new();
    while let Some((_, _, sol, (forced, forbidden))) = heap.pop() {
        out.push(sol.clone());
        if out.len() >= k {
            break;
        }
        let mut fixed = forced.clone();
        for i in (0..n).filter(|&i| forced[i].is_none()) {
            let mut child_forbidden = forbidden.clone();
            child_forbidden.push((i, sol[i]));
            let child: Node = (fixed.clone(), child_forbidden);
            if let Some((value, s)) = solve(&child) {
                counter += 1;
                heap.push((value, Reverse(counter), s, child));
            }
            fixed[i] = Some(sol[i]);
        }
    }
    out
}

fn max_abs(weights: &[Vec<f64>]) -> f64 {
    weights.iter().flatten().fold(0.0f64, |a, &w| a.max(w.abs()))
}

/// Instance source for distortion trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// Random one-sided instances with `n` agents.
    OneSided { n: usize },
    /// Random instances of a graph kind with `n` nodes.
    Family { kind: ProblemKindTag, k: Option<usize>, n: usize },
    /// Random social choice instances.
    SocialChoice { n: usize, m: usize },
    /// Layered lower-bound instances; the seed shuffles the tails.
    LowerBound { m: usize, lambda: usize },
}

/// Serializable stand-in for [`ProblemKind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKindTag {
    OneSidedMatching,
    GeneralMatching,
    TwoSidedMatching,
    KMatching,
    CliquePacking,
    CyclePacking,
    KConstrainedAllocation,
    SocialChoice,
}

impl ProblemKindTag {
    pub fn with_param(self, k: Option<usize>) -> Result<ProblemKind> {
        let name = match self {
            ProblemKindTag::OneSidedMatching => "one-sided-matching",
            ProblemKindTag::GeneralMatching => "general-matching",
            ProblemKindTag::TwoSidedMatching => "two-sided-matching",
            ProblemKindTag::KMatching => "k-matching",
            ProblemKindTag::CliquePacking => "clique-packing",
            ProblemKindTag::CyclePacking => "cycle-packing",
            ProblemKindTag::KConstrainedAllocation => "k-constrained-allocation",
            ProblemKindTag::SocialChoice => "social-choice",
        };
        Ok(ProblemKind::from_parts(name, k)?)
    }
}

/// Realized distortion on the generated values, or the worst consistent
/// completion found by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Realized,
    Adversarial,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionRow {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub lambda: usize,
    pub mechanism: String,
    pub distortion: f64,
    /// Guarantee factor of the mechanism, when it has one.
    pub bound: Option<f64>,
    /// `bound / distortion`.
    pub slack: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub rows: Vec<DistortionRow>,
    /// Seeds of trials on which no representative set was found.
    pub skipped: Vec<u64>,
}

impl DistortionReport {
    pub fn max_distortion(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.distortion).reduce(f64::max)
    }
}

/// A generated instance with the ordinal profile mechanisms should see.
pub struct Generated {
    pub instance: Instance,
    pub ordinal: OrdinalProfile,
    pub lambda: usize,
    pub layout: Option<LowerBoundLayout>,
}

/// Instance for one trial seed.
pub fn generate(generator: &Generator, seed: u64) -> Result<Generated> {
    let mut rng = seeded_rng(seed);
    let (instance, layout) = match *generator {
        Generator::OneSided { n } => (random_instance(&mut rng, ProblemKind::OneSidedMatching, n, n, false)?, None),
        Generator::Family { kind, k, n } => (random_instance(&mut rng, kind.with_param(k)?, n, n, false)?, None),
        Generator::SocialChoice { n, m } => (random_instance(&mut rng, ProblemKind::SocialChoice, n, m, false)?, None),
        Generator::LowerBound { m, lambda } => {
            let (inst, layout) = gen_lower_bound(m, lambda, seed)?;
            (inst, Some(layout))
        }
    };
    let ordinal = match &layout {
        Some(l) => l.ordinal(),
        None => derive_ordinal(&instance),
    };
    let lambda = layout.as_ref().map_or(DEFAULT_BUDGET, |l| l.lambda);
    Ok(Generated { instance, ordinal, lambda, layout })
}

/// Guarantee factor of a mechanism on an instance, under the same `⌈√·⌉`
/// convention as the mechanisms.
pub fn guarantee_bound(mechanism: MechanismKind, inst: &Instance) -> Result<Option<f64>> {
    Ok(match mechanism {
        MechanismKind::Match2q => Some(1.0 + 2.0 * ceil_sqrt(inst.n()) as f64),
        MechanismKind::General2q => {
            let k = inst.family()?.k_eff as f64;
            Some(1.0 + 10.0 * k * k * ceil_sqrt(inst.n()) as f64)
        }
        MechanismKind::Sc2q => Some(1.0 + 2.0 * ceil_sqrt(inst.m()) as f64),
        MechanismKind::Top2 => None,
    })
}

/// Runs `mechanism` with the given profile; `None` when the social choice
/// mechanism finds no representative set.
pub fn run_mechanism(
    mechanism: MechanismKind,
    inst: &Instance,
    ord: &OrdinalProfile,
    srs_mode: SrsMode,
) -> Result<Option<MechanismRun>> {
    Ok(match mechanism {
        MechanismKind::Match2q => Some(match_two_queries_with(inst, ord, DEFAULT_BUDGET)?),
        MechanismKind::General2q => Some(general_two_queries_with(inst, &inst.family()?, ord, DEFAULT_BUDGET)?),
        MechanismKind::Sc2q => match sc_two_queries_with(inst, ord, srs_mode, DEFAULT_BUDGET)? {
            ScOutcome::Run(run) => Some(run),
            ScOutcome::SrsNotFound { .. } => None,
        },
        MechanismKind::Top2 => Some(top_two_baseline(inst, ord, DEFAULT_BUDGET)?),
    })
}

/// `optimum / achieved`, with `0/0 = 1`.
pub fn distortion_ratio(optimum: f64, achieved: f64) -> f64 {
    if achieved > 0.0 {
        optimum / achieved
    } else if optimum > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Optimal welfare of an instance.
pub fn optimum_welfare(inst: &Instance) -> Result<f64> {
    if inst.is_social_choice() {
        return (0..inst.m())
            .map(|j| output_welfare(&MechanismOutput::Winner(j), inst))
            .try_fold(0.0f64, |a, w| w.map(|w| a.max(w)));
    }
    Ok(solve_instance(inst)?.objective)
}

/// Settings shared by every trial of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOptions {
    pub measure: Measure,
    pub srs_mode: SrsMode,
    /// Mechanism to run instead when the social choice mechanism finds no
    /// representative set; such trials are skipped without one.
    pub fallback: Option<MechanismKind>,
    pub tolerance: f64,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions { measure: Measure::Realized, srs_mode: SrsMode::Auto, fallback: None, tolerance: BISECTION_TOLERANCE }
    }
}

/// One trial: generate, run, measure. `None` when the mechanism declined
/// and no fallback was set.
pub fn distortion_trial(
    mechanism: MechanismKind,
    generator: &Generator,
    seed: u64,
    opts: &TrialOptions,
) -> Result<Option<DistortionRow>> {
    let g = generate(generator, seed)?;
    let inst = &g.instance;
    let (used, run) = match run_mechanism(mechanism, inst, &g.ordinal, opts.srs_mode)? {
        Some(run) => (mechanism, run),
        None => match opts.fallback {
            Some(fb) => match run_mechanism(fb, inst, &g.ordinal, opts.srs_mode)? {
                Some(run) => (fb, run),
                None => return Ok(None),
            },
            None => return Ok(None),
        },
    };
    let distortion = match opts.measure {
        Measure::Realized => distortion_ratio(optimum_welfare(inst)?, output_welfare(&run.output, inst)?),
        Measure::Adversarial => {
            let structure = inst.skeleton();
            let rivals = rival_candidates(&structure, &g.ordinal, &run.transcript)?;
            adversarial_completion(&structure, &g.ordinal, &run.transcript, &run.output, &rivals, opts.tolerance)?
                .ratio
                .value()
        }
    };
    let bound = guarantee_bound(used, inst)?;
    Ok(Some(DistortionRow {
        seed,
        n: inst.n(),
        m: inst.m(),
        lambda: g.lambda,
        mechanism: used.name().to_string(),
        distortion,
        bound,
        slack: bound.map(|b| b / distortion),
    }))
}

/// Trials with seeds `seed, seed + 1, …`, in seed order.
pub fn distortion_over_seeds(
    mechanism: MechanismKind,
    generator: &Generator,
    trials: usize,
    seed: u64,
    opts: &TrialOptions,
) -> Result<DistortionReport> {
    let mut report = DistortionReport { rows: Vec::new(), skipped: Vec::new() };
    for t in 0..trials as u64 {
        let s = seed.wrapping_add(t);
        match distortion_trial(mechanism, generator, s, opts)? {
            Some(row) => report.rows.push(row),
            None => report.skipped.push(s),
        }
    }
    Ok(report)
}
