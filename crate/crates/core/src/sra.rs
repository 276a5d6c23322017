//! Sufficiently representative assignments and sets.
//!
//! An assignment maps each picking agent to one alternative so that no
//! alternative is used more than `c = ⌈√|N1|⌉` times and no degree-`k`
//! rival subgraph can strictly improve more than `k·c` agents. The
//! `√n`-serial dictatorship builds one by letting agents pick in turn from a
//! pool holding `c` copies of every alternative.
//!
//! A representative set is a set `B` of at most `⌈√m⌉` alternatives such
//! that, for every alternative `j`, at most `⌈√m⌉` agents strictly prefer `j`
//! to their favorite member of `B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, Sides, ValuationProfile};
use crate::ordinal::OrdinalProfile;

/// Exact `⌈√n⌉`.
pub fn ceil_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while r * r < n {
        r += 1;
    }
    r
}

/// Output of the `√n`-serial dictatorship.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SRAssignment {
    /// Copies of each alternative placed in the pool.
    pub copies: usize,
    /// `assigned[i]` for every agent row; `None` for agents outside `N1` or
    /// agents whose relevant alternatives were all exhausted.
    pub assigned: Vec<Option<usize>>,
    /// Alternatives whose copies ran out, in the order they ran out.
    pub exhausted: Vec<usize>,
}

impl SRAssignment {
    pub fn get(&self, agent: usize) -> Option<usize> {
        self.assigned.get(agent).copied().flatten()
    }

    /// Number of agents assigned to each alternative in `0..alternatives`.
    pub fn loads(&self, alternatives: usize) -> Vec<usize> {
        let mut load = vec![0; alternatives];
        self.assigned.iter().flatten().for_each(|&j| load[j] += 1);
        load
    }
}

/// Runs the `√n`-serial dictatorship. `order` defaults to increasing agent
/// index and must otherwise be a permutation of `sides.n1`.
pub fn serial_dictatorship(
    ord: &OrdinalProfile,
    sides: &Sides,
    order: Option<&[usize]>,
) -> Result<SRAssignment> {
    let copies = ceil_sqrt(sides.n1.len());
    let pool = copies * sides.n2.len();
    if sides.n1.len() > pool {
        return Err(Error::InfeasibleCopies { agents: sides.n1.len(), copies: pool });
    }
    let order: Vec<usize> = match order {
        Some(o) => {
            let mut a = o.to_vec();
            let mut b = sides.n1.clone();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return Err(Error::Parameter("pick order must be a permutation of N1".into()));
            }
            o.to_vec()
        }
        None => {
            let mut o = sides.n1.clone();
            o.sort_unstable();
            o
        }
    };
    let mut remaining = vec![0usize; ord.alternatives()];
    for &j in &sides.n2 {
        remaining[j] = copies;
    }
    let mut assigned = vec![None; ord.agents()];
    let mut exhausted = Vec::new();
    for agent in order {
        if let Some(&pick) = ord.ranking(agent).iter().find(|&&j| remaining[j] > 0) {
            remaining[pick] -= 1;
            if remaining[pick] == 0 {
                exhausted.push(pick);
            }
            assigned[agent] = Some(pick);
        }
    }
    Ok(SRAssignment { copies, assigned, exhausted })
}

/// Serial dictatorship on an instance's own sides and derived profile.
pub fn instance_sra(inst: &Instance, ord: &OrdinalProfile) -> Result<SRAssignment> {
    serial_dictatorship(ord, &inst.sides(), None)
}

/// Result of checking both conditions of a sufficiently representative
/// assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SraVerdict {
    pub holds: bool,
    pub copy_condition: bool,
    /// Most `N1` agents a degree-`k` subgraph can strictly improve.
    pub max_improvable: usize,
    pub threshold: usize,
    /// `(agent, preferred alternative)` pairs of a violating subgraph.
    pub witness: Option<Vec<(usize, usize)>>,
}

/// Checks both conditions of an `(N1, N2, k)`-sufficiently representative
/// assignment.
///
/// Improvement edges join agent `i` to every `j ∈ N2` that `i` strictly
/// prefers to her assignment: by value when `values` is given, by rank
/// otherwise. The most agents a degree-`k_eff` subgraph can improve is the
/// value of a capacitated matching with agent capacity 1 and alternative
/// capacity `k_eff`.
pub fn verify_sra(
    assignment: &SRAssignment,
    ord: &OrdinalProfile,
    sides: &Sides,
    k_eff: usize,
    values: Option<&ValuationProfile>,
) -> SraVerdict {
    let alts = ord.alternatives();
    let mut in_n2 = vec![false; alts];
    sides.n2.iter().for_each(|&j| in_n2[j] = true);
    let loads = assignment.loads(alts);
    let copy_condition = loads.iter().all(|&l| l <= assignment.copies)
        && assignment.assigned.iter().flatten().all(|&j| in_n2[j]);

    let improving: Vec<(usize, Vec<usize>)> = sides
        .n1
        .iter()
        .map(|&i| {
            let targets = match (assignment.get(i), values) {
                (None, _) => ord.ranking(i).iter().copied().filter(|&j| in_n2[j]).collect(),
                (Some(a), Some(v)) => ord
                    .ranking(i)
                    .iter()
                    .copied()
                    .filter(|&j| in_n2[j] && v.get(i, j) > v.get(i, a))
                    .collect(),
                (Some(a), None) => ord
                    .ranking(i)
                    .iter()
                    .copied()
                    .take_while(|&j| j != a)
                    .filter(|&j| in_n2[j])
                    .collect(),
            };
            (i, targets)
        })
        .collect();

    let flow = capacitated_matching(&improving, alts, k_eff);
    let threshold = k_eff * assignment.copies;
    let holds = copy_condition && flow.len() <= threshold;
    SraVerdict {
        holds,
        copy_condition,
        max_improvable: flow.len(),
        threshold,
        witness: (flow.len() > threshold).then_some(flow),
    }
}

/// Maximum matching with unit agent capacity and `cap` per alternative,
/// by augmenting paths.
fn capacitated_matching(
    adj: &[(usize, Vec<usize>)],
    alternatives: usize,
    cap: usize,
) -> Vec<(usize, usize)> {
    // holders[j] lists indices into `adj` currently matched to j
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); alternatives];
    let mut matched: Vec<Option<usize>> = vec![None; adj.len()];

    fn augment(
        a: usize,
        adj: &[(usize, Vec<usize>)],
        cap: usize,
        holders: &mut [Vec<usize>],
        matched: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for &j in &adj[a].1 {
            if visited[j] {
                continue;
            }
            visited[j] = true;
            if holders[j].len() < cap {
                holders[j].push(a);
                matched[a] = Some(j);
                return true;
            }
            for slot in 0..holders[j].len() {
                let other = holders[j][slot];
                if augment(other, adj, cap, holders, matched, visited) {
                    holders[j][slot] = a;
                    matched[a] = Some(j);
                    return true;
                }
            }
        }
        false
    }

    if cap > 0 {
        let mut visited = vec![false; alternatives];
        for a in 0..adj.len() {
            if adj[a].1.is_empty() {
                continue;
            }
            visited.iter_mut().for_each(|v| *v = false);
            augment(a, adj, cap, &mut holders, &mut matched, &mut visited);
        }
    }
    matched
        .iter()
        .enumerate()
        .filter_map(|(a, j)| j.map(|j| (adj[a].0, j)))
        .collect()
}

/// A candidate sufficiently representative set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentativeSet {
    pub members: Vec<usize>,
    /// `⌈√m⌉`, the cap on both the size and the violation counts.
    pub bound: usize,
}

impl RepresentativeSet {
    pub fn new(mut members: Vec<usize>, alternatives: usize) -> Self {
        members.sort_unstable();
        members.dedup();
        RepresentativeSet { members, bound: ceil_sqrt(alternatives) }
    }

    pub fn contains(&self, j: usize) -> bool {
        self.members.binary_search(&j).is_ok()
    }

    /// The agent's most preferred member.
    pub fn favorite(&self, ord: &OrdinalProfile, agent: usize) -> Option<usize> {
        ord.ranking(agent).iter().copied().find(|&j| self.contains(j))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrsVerdict {
    pub holds: bool,
    pub worst_alternative: Option<usize>,
    /// Largest number of agents strictly preferring one outside alternative
    /// to their favorite member.
    pub worst_count: usize,
    /// Agents that strictly prefer at least one outside alternative.
    pub violating_agents: usize,
    /// Per-alternative counts (zero for members).
    pub counts: Vec<usize>,
}

/// Counts, for every alternative outside `B`, the agents that strictly
/// prefer it to their favorite member of `B`.
pub fn verify_representative_set(set: &RepresentativeSet, ord: &OrdinalProfile) -> SrsVerdict {
    let m = ord.alternatives();
    let bound = ceil_sqrt(m);
    let mut counts = vec![0usize; m];
    let mut violating_agents = 0;
    for i in 0..ord.agents() {
        let prefix = ord.ranking(i).iter().take_while(|&&j| !set.contains(j));
        let mut any = false;
        for &j in prefix {
            counts[j] += 1;
            any = true;
        }
        violating_agents += usize::from(any);
    }
    let (worst_alternative, worst_count) = counts
        .iter()
        .enumerate()
        .filter(|(j, _)| !set.contains(*j))
        .fold((None, 0), |(bj, bc), (j, &c)| if bj.is_none() || c > bc { (Some(j), c) } else { (bj, bc) });
    let holds = !set.members.is_empty()
        && set.members.len() <= bound
        && set.members.iter().all(|&j| j < m)
        && worst_count <= bound;
    SrsVerdict { holds, worst_alternative, worst_count, violating_agents, counts }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SrsMode {
    Exact,
    Greedy,
    TopChoices,
    /// Top choices, then greedy, then exact search when `m` allows it.
    Auto,
}

/// Largest `m` the exact subset search accepts.
pub const EXACT_SRS_LIMIT: usize = 16;

/// Searches for a sufficiently representative set; `None` if the chosen mode
/// finds nothing.
pub fn find_representative_set(ord: &OrdinalProfile, mode: SrsMode) -> Result<Option<RepresentativeSet>> {
    let m = ord.alternatives();
    let bound = ceil_sqrt(m);
    let found = match mode {
        SrsMode::TopChoices => {
            let tops: Vec<usize> = (0..ord.agents()).filter_map(|i| ord.top(i)).collect();
            let set = RepresentativeSet::new(tops, m);
            (set.members.len() <= bound).then_some(set)
        }
        SrsMode::Greedy => greedy_set(ord, bound),
        SrsMode::Exact => {
            if m > EXACT_SRS_LIMIT {
                return Err(Error::SizeLimit(format!(
                    "exact representative-set search needs m <= {EXACT_SRS_LIMIT}, got {m}"
                )));
            }
            exact_set(ord, bound)
        }
        SrsMode::Auto => {
            let mut found = find_representative_set(ord, SrsMode::TopChoices)?;
            if found.is_none() {
                found = greedy_set(ord, bound);
            }
            if found.is_none() && m <= EXACT_SRS_LIMIT {
                found = exact_set(ord, bound);
            }
            found
        }
    };
    Ok(found.filter(|set| verify_representative_set(set, ord).holds))
}

fn greedy_set(ord: &OrdinalProfile, bound: usize) -> Option<RepresentativeSet> {
    let m = ord.alternatives();
    let n = ord.agents();
    // best[i]: rank of agent i's favorite member so far
    let mut best = vec![usize::MAX; n];
    let mut members = Vec::new();
    let mut counts = vec![0usize; m];
    while members.len() < bound {
        let mut choice: Option<(usize, usize)> = None;
        for cand in (0..m).filter(|j| !members.contains(j)) {
            counts.iter_mut().for_each(|c| *c = 0);
            for i in 0..n {
                let limit = best[i].min(ord.position(i, cand).unwrap_or(usize::MAX));
                for &j in ord.ranking(i).iter().take(limit) {
                    counts[j] += 1;
                }
            }
            let worst = (0..m)
                .filter(|&j| j != cand && !members.contains(&j))
                .map(|j| counts[j])
                .max()
                .unwrap_or(0);
            if choice.map_or(true, |(_, w)| worst < w) {
                choice = Some((cand, worst));
            }
        }
        let (cand, worst) = choice?;
        members.push(cand);
        for (i, b) in best.iter_mut().enumerate() {
            *b = (*b).min(ord.position(i, cand).unwrap_or(usize::MAX));
        }
        if worst <= bound {
            return Some(RepresentativeSet::new(members, m));
        }
    }
    None
}

fn exact_set(ord: &OrdinalProfile, bound: usize) -> Option<RepresentativeSet> {
    let m = ord.alternatives();
    // smallest worst count, then smallest size, then lexicographic order
    let mut best: Option<(usize, RepresentativeSet)> = None;
    for size in 1..=bound.min(m) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let set = RepresentativeSet::new(combo.clone(), m);
            let verdict = verify_representative_set(&set, ord);
            if verdict.holds && best.as_ref().map_or(true, |(w, _)| verdict.worst_count < *w) {
                best = Some((verdict.worst_count, set));
            }
            let Some(pos) = (0..size).rev().find(|&p| combo[p] < m - size + p) else { break };
            combo[pos] += 1;
            for p in pos + 1..size {
                combo[p] = combo[p - 1] + 1;
            }
        }
    }
    best.map(|(_, set)| set)
}
