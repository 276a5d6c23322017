//! Strict ordinal profiles derived from cardinal values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, ValuationProfile};

const UNRANKED: usize = usize::MAX;

/// Per-agent rankings, most preferred first, over each agent's relevant
/// alternatives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "OrdinalDoc", into = "OrdinalDoc")]
pub struct OrdinalProfile {
    alternatives: usize,
    rankings: Vec<Vec<usize>>,
    positions: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct OrdinalDoc {
    rankings: Vec<Vec<usize>>,
}

impl TryFrom<OrdinalDoc> for OrdinalProfile {
    type Error = Error;

    fn try_from(doc: OrdinalDoc) -> Result<Self> {
        let alternatives = doc.rankings.iter().flatten().map(|&j| j + 1).max().unwrap_or(0);
        OrdinalProfile::new(doc.rankings, alternatives)
    }
}

impl From<OrdinalProfile> for OrdinalDoc {
    fn from(p: OrdinalProfile) -> Self {
        OrdinalDoc { rankings: p.rankings }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    Strict,
    Weak,
}

impl OrdinalProfile {
    /// Builds a profile from explicit rankings over `0..alternatives`.
    pub fn new(rankings: Vec<Vec<usize>>, alternatives: usize) -> Result<Self> {
        let mut positions = Vec::with_capacity(rankings.len());
        for (agent, ranking) in rankings.iter().enumerate() {
            let mut pos = vec![UNRANKED; alternatives];
            for (p, &j) in ranking.iter().enumerate() {
                if j >= alternatives || pos[j] != UNRANKED {
                    return Err(Error::DimensionMismatch(format!(
                        "ranking of agent {agent} is not a permutation of a subset of 0..{alternatives}"
                    )));
                }
                pos[j] = p;
            }
            positions.push(pos);
        }
        Ok(OrdinalProfile { alternatives, rankings, positions })
    }

    pub fn agents(&self) -> usize {
        self.rankings.len()
    }

    pub fn alternatives(&self) -> usize {
        self.alternatives
    }

    pub fn ranking(&self, agent: usize) -> &[usize] {
        &self.rankings[agent]
    }

    pub fn rankings(&self) -> &[Vec<usize>] {
        &self.rankings
    }

    /// Zero-based rank of `alternative`, if the agent ranks it.
    pub fn position(&self, agent: usize, alternative: usize) -> Option<usize> {
        match self.positions[agent].get(alternative) {
            Some(&p) if p != UNRANKED => Some(p),
            _ => None,
        }
    }

    pub fn top(&self, agent: usize) -> Option<usize> {
        self.rankings[agent].first().copied()
    }

    pub fn is_relevant(&self, agent: usize, alternative: usize) -> bool {
        self.position(agent, alternative).is_some()
    }

    /// Whether `agent` prefers `a` to `b`.
    ///
    /// With `values`, strict means `v(a) > v(b)` and weak means `v(a) >= v(b)`.
    /// Without values the ranking decides and the two notions coincide.
    pub fn prefers(
        &self,
        agent: usize,
        a: usize,
        b: usize,
        strictness: Strictness,
        values: Option<&ValuationProfile>,
    ) -> Result<bool> {
        let pa = self.position(agent, a).ok_or(Error::NotRelevant { agent, alternative: a })?;
        let pb = self.position(agent, b).ok_or(Error::NotRelevant { agent, alternative: b })?;
        Ok(match values {
            Some(v) => {
                let (va, vb) = (v.get(agent, a), v.get(agent, b));
                match strictness {
                    Strictness::Strict => va > vb,
                    Strictness::Weak => va >= vb,
                }
            }
            None => pa < pb,
        })
    }
}

/// Ranks every agent's relevant alternatives by decreasing value; ties go to
/// the smaller index.
pub fn derive_ordinal(inst: &Instance) -> OrdinalProfile {
    let values = inst.preference_values();
    let rankings = (0..values.rows())
        .map(|i| {
            let mut relevant = inst.relevant(i);
            let row = values.row(i);
            relevant.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            relevant
        })
        .collect();
    OrdinalProfile::new(rankings, values.cols()).expect("relevant sets are in range")
}

/// True iff every adjacent ranked pair is weakly decreasing in value.
pub fn check_consistency(ord: &OrdinalProfile, values: &ValuationProfile) -> Result<bool> {
    if ord.agents() != values.rows() || ord.alternatives() > values.cols() {
        return Err(Error::DimensionMismatch(format!(
            "profile is {}x{} but values are {}x{}",
            ord.agents(),
            ord.alternatives(),
            values.rows(),
            values.cols()
        )));
    }
    Ok((0..ord.agents()).all(|i| {
        ord.ranking(i).windows(2).all(|w| values.get(i, w[0]) >= values.get(i, w[1]))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ProblemKind;

    fn social(rows: Vec<Vec<f64>>) -> Instance {
        Instance::new(ProblemKind::SocialChoice, ValuationProfile::new(rows).unwrap(), None).unwrap()
    }

    #[test]
    fn derive_examples() {
        let ord = derive_ordinal(&social(vec![vec![3.0, 1.0, 2.0], vec![2.0, 2.0, 1.0], vec![0.0; 3]]));
        assert_eq!(ord.ranking(0), &[0, 2, 1]);
        assert_eq!(ord.ranking(1), &[0, 1, 2]);
        assert_eq!(ord.ranking(2), &[0, 1, 2]);
    }

    #[test]
    fn one_sided_ranks_items_in_node_space() {
        let inst = Instance::new(
            ProblemKind::OneSidedMatching,
            ValuationProfile::new(vec![vec![3.0, 1.0, 2.0]; 3]).unwrap(),
            None,
        )
        .unwrap();
        let ord = derive_ordinal(&inst);
        assert_eq!(ord.ranking(0), &[3, 5, 4]);
        // dummy item rows rank the agents in index order
        assert_eq!(ord.ranking(4), &[0, 1, 2]);
    }

    #[test]
    fn prefers_examples() {
        let values = ValuationProfile::new(vec![vec![2.0, 2.0, 1.0]]).unwrap();
        let ord = OrdinalProfile::new(vec![vec![0, 1, 2]], 3).unwrap();
        assert!(!ord.prefers(0, 1, 1, Strictness::Strict, None).unwrap());
        assert!(!ord.prefers(0, 0, 1, Strictness::Strict, Some(&values)).unwrap());
        assert!(ord.prefers(0, 0, 1, Strictness::Weak, Some(&values)).unwrap());
        assert!(ord.prefers(0, 0, 2, Strictness::Strict, None).unwrap());
        assert!(!ord.prefers(0, 2, 0, Strictness::Weak, None).unwrap());
    }

    #[test]
    fn prefers_rejects_unranked_alternative() {
        let ord = OrdinalProfile::new(vec![vec![1, 2]], 3).unwrap();
        assert_eq!(
            ord.prefers(0, 0, 1, Strictness::Strict, None),
            Err(Error::NotRelevant { agent: 0, alternative: 0 })
        );
    }

    #[test]
    fn consistency_examples() {
        let inst = social(vec![vec![5.0, 3.0], vec![4.0, 4.0]]);
        let ord = derive_ordinal(&inst);
        assert!(check_consistency(&ord, inst.values()).unwrap());

        let flipped = OrdinalProfile::new(vec![vec![1, 0]], 2).unwrap();
        let v = ValuationProfile::new(vec![vec![5.0, 3.0]]).unwrap();
        assert!(!check_consistency(&flipped, &v).unwrap());

        let tied = OrdinalProfile::new(vec![vec![0, 1]], 2).unwrap();
        let v = ValuationProfile::new(vec![vec![4.0, 4.0]]).unwrap();
        assert!(check_consistency(&tied, &v).unwrap());

        let wide = ValuationProfile::new(vec![vec![1.0], vec![1.0]]).unwrap();
        assert!(check_consistency(&tied, &wide).is_err());
    }

    #[test]
    fn ordinal_json_round_trip() {
        let ord = OrdinalProfile::new(vec![vec![2, 0, 1], vec![0, 1, 2]], 3).unwrap();
        let text = serde_json::to_string(&ord).unwrap();
        assert_eq!(text, r#"{"rankings":[[2,0,1],[0,1,2]]}"#);
        let back: OrdinalProfile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ord);
    }
}
