//! Applications of the rationalizability machinery: discrimination audits
//! over labeled subsamples and counterfactual prediction of next-period
//! action profiles.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use thiserror::Error;

use crate::cycles::{find_consecutive_cycle, find_cycle, CycleWitness};
use crate::dataset::{ChoiceDataset, DatasetError, SubsampleSelector};
use crate::order::{build_preorder, AgentPreorder, OrderError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("operation requires binary data, dataset has {found} alternatives")]
    NotBinary { found: usize },
    #[error("covariate `{key}` takes {} values {values:?}, need exactly two", values.len())]
    NonBinaryCovariate { key: String, values: Vec<String> },
    #[error("favored value `{value}` does not occur under covariate `{key}`")]
    UnknownFavoredValue { key: String, value: String },
    #[error("choice data has a cycle: {witness:?}")]
    Cycle { witness: CycleWitness },
    #[error("unknown agent `{label}`")]
    UnknownAgent { label: String },
    #[error("unknown alternative `{label}`")]
    UnknownAlternative { label: String },
    #[error("size guard exceeded: {reason}")]
    SizeGuard { reason: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Order(#[from] OrderError),
}

/// Verdicts and extracted ordering for one covariate value's subsample.
#[derive(Debug, Clone)]
pub struct SubsampleAudit {
    pub value: String,
    /// `None` means the subsample is rationalizable.
    pub cycle: Option<CycleWitness>,
    /// Verdict of the stricter adjacent-period test.
    pub consecutive_cycle: Option<CycleWitness>,
    /// Threshold ordering, present when the subsample is rationalizable.
    pub preorder: Option<AgentPreorder>,
}

#[derive(Debug, Clone)]
pub struct StatisticalFinding {
    pub flagged: bool,
    /// The disadvantaged subsample also fails the adjacent-period test, so
    /// private aligned signals cannot explain it either.
    pub strengthened: bool,
    pub explanation: String,
}

#[derive(Debug, Clone)]
pub struct TasteFinding {
    pub flagged: bool,
    /// Agent pair whose revealed threshold order reverses across subsamples.
    pub pair: Option<(usize, usize)>,
    pub explanation: String,
}

#[derive(Debug, Clone)]
pub struct DiscriminationReport {
    pub key: String,
    pub favored: String,
    pub full_sample_cycle: Option<CycleWitness>,
    /// Favored value first, then the other.
    pub subsamples: Vec<SubsampleAudit>,
    pub statistical: StatisticalFinding,
    pub taste: TasteFinding,
    /// Caveat attached when the full sample is rationalizable.
    pub note: Option<String>,
}

/// Runs the discrimination audit over a binary covariate.
///
/// The full sample and both value subsamples are tested for cycles. The
/// statistical flag fires when the favored subsample is rationalizable and
/// the other is not; it is strengthened when the other subsample also has a
/// consecutive cycle. The taste flag fires when both subsamples are
/// rationalizable but some agent pair's revealed threshold order strictly
/// reverses between them.
pub fn audit_discrimination(
    data: &ChoiceDataset,
    key: &str,
    favored: &str,
) -> Result<DiscriminationReport, AnalysisError> {
    if data.n_alternatives() != 2 {
        return Err(AnalysisError::NotBinary {
            found: data.n_alternatives(),
        });
    }
    let values = data.covariate_values(key)?;
    if values.len() != 2 {
        return Err(AnalysisError::NonBinaryCovariate {
            key: key.to_string(),
            values: values.into_iter().collect(),
        });
    }
    if !values.contains(favored) {
        return Err(AnalysisError::UnknownFavoredValue {
            key: key.to_string(),
            value: favored.to_string(),
        });
    }
    let other = values
        .iter()
        .find(|v| *v != favored)
        .expect("two values")
        .clone();

    let mut subsamples = Vec::with_capacity(2);
    for value in [favored.to_string(), other] {
        let sub = data.subsample(&SubsampleSelector {
            key: key.to_string(),
            value: value.clone(),
        })?;
        let cycle = find_cycle(&sub);
        let preorder = if cycle.is_none() {
            Some(build_preorder(&sub)?)
        } else {
            None
        };
        subsamples.push(SubsampleAudit {
            value,
            consecutive_cycle: find_consecutive_cycle(&sub),
            cycle,
            preorder,
        });
    }

    let statistical = {
        let flagged = subsamples[0].cycle.is_none() && subsamples[1].cycle.is_some();
        let strengthened = flagged && subsamples[1].consecutive_cycle.is_some();
        let explanation = if flagged {
            let w = subsamples[1].cycle.as_ref().expect("flag implies a cycle");
            let mut text = format!(
                "the `{}` subsample is rationalizable but the `{}` subsample is not: \
                 agents `{}` and `{}` hold opposed beliefs there",
                subsamples[0].value,
                subsamples[1].value,
                data.agents()[w.agent_i],
                data.agents()[w.agent_j],
            );
            if strengthened {
                text.push_str(
                    "; the opposed moves occur in adjacent periods, which also rules out \
                     private aligned signals with a fixed state",
                );
            }
            text
        } else {
            "no asymmetry: the favored subsample does not separate from the other".to_string()
        };
        StatisticalFinding {
            flagged,
            strengthened,
            explanation,
        }
    };

    let taste = match (&subsamples[0].preorder, &subsamples[1].preorder) {
        (Some(fav_order), Some(other_order)) => {
            let mut found = None;
            'outer: for a in 0..data.n_agents() {
                for b in 0..data.n_agents() {
                    if a != b && fav_order.weakly_above(a, b) && other_order.strictly_above(b, a) {
                        found = Some((a, b));
                        break 'outer;
                    }
                }
            }
            match found {
                Some((a, b)) => TasteFinding {
                    flagged: true,
                    pair: Some((a.min(b), a.max(b))),
                    explanation: format!(
                        "threshold order reverses: `{}` is weakly above `{}` on `{}` but \
                         strictly below on `{}`",
                        data.agents()[a],
                        data.agents()[b],
                        subsamples[0].value,
                        subsamples[1].value,
                    ),
                },
                None => TasteFinding {
                    flagged: false,
                    pair: None,
                    explanation: "the revealed threshold orders agree across subsamples"
                        .to_string(),
                },
            }
        }
        _ => TasteFinding {
            flagged: false,
            pair: None,
            explanation: "threshold orders are only comparable when both subsamples are \
                          rationalizable"
                .to_string(),
        },
    };

    let note = find_cycle(data).is_none().then(|| {
        "the full sample is rationalizable, which does not rule out statistical \
         discrimination: every agent may hold the same group-dependent beliefs"
            .to_string()
    });

    Ok(DiscriminationReport {
        key: key.to_string(),
        favored: favored.to_string(),
        full_sample_cycle: find_cycle(data),
        subsamples,
        statistical,
        taste,
        note,
    })
}

/// Admissible next-period profiles, enumerated or summarized.
#[derive(Debug, Clone)]
pub enum AdmissibleProfiles {
    /// Profiles in lexicographic order; entries are alternative positions.
    Enumerated(Vec<Vec<usize>>),
    /// Too many agents to list: the threshold classes (ascending) determine
    /// the set: the high-alternative choosers of an admissible profile are
    /// a union of lowest classes plus part of the next one.
    Symbolic { classes: Vec<Vec<usize>> },
}

#[derive(Debug, Clone)]
pub struct CounterfactualReport {
    pub admissible: AdmissibleProfiles,
    pub count: BigUint,
    pub total_possible: BigUint,
    /// The conditioning partial assignment, agent index to position.
    pub fixed: BTreeMap<usize, usize>,
}

const ENUMERATION_AGENT_CAP: usize = 20;

/// Predicts which next-period action profiles the observed panel admits,
/// optionally conditioned on a partial assignment of agents to alternatives.
///
/// A profile is admissible when appending it creates no cycle. For binary
/// data this is a down-set condition on the revealed threshold order: nobody
/// choosing the high alternative may sit strictly above somebody choosing the
/// low one. With more alternatives a guarded scan over all profiles is used.
pub fn predict_counterfactuals(
    data: &ChoiceDataset,
    fixed: &BTreeMap<usize, usize>,
) -> Result<CounterfactualReport, AnalysisError> {
    let (i_count, n) = (data.n_agents(), data.n_alternatives());
    for (&agent, &pos) in fixed {
        if agent >= i_count {
            return Err(AnalysisError::UnknownAgent {
                label: format!("#{agent}"),
            });
        }
        if pos >= n {
            return Err(AnalysisError::UnknownAlternative {
                label: format!("#{pos}"),
            });
        }
    }
    if let Some(witness) = find_cycle(data) {
        return Err(AnalysisError::Cycle { witness });
    }
    let total_possible = BigUint::from(n).pow(i_count as u32);

    if n == 2 {
        let preorder = build_preorder(data)?;
        let classes = preorder.classes().to_vec();
        if i_count > ENUMERATION_AGENT_CAP {
            let count = symbolic_count(&classes, fixed);
            return Ok(CounterfactualReport {
                admissible: AdmissibleProfiles::Symbolic { classes },
                count,
                total_possible,
                fixed: fixed.clone(),
            });
        }
        let mut profiles = Vec::new();
        for (k, class) in classes.iter().enumerate() {
            let subset_cap = 1usize << class.len();
            // Proper subsets only, except the last class: the full-subset
            // profile reappears as the next boundary's empty subset.
            let top = if k + 1 == classes.len() {
                subset_cap
            } else {
                subset_cap - 1
            };
            for mask in 0..top {
                let mut profile = vec![1usize; i_count];
                for lower in classes.iter().take(k) {
                    for &agent in lower {
                        profile[agent] = 0;
                    }
                }
                for (bit, &agent) in class.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        profile[agent] = 0;
                    }
                }
                if fixed.iter().all(|(&agent, &pos)| profile[agent] == pos) {
                    profiles.push(profile);
                }
            }
        }
        profiles.sort();
        let count = BigUint::from(profiles.len());
        return Ok(CounterfactualReport {
            admissible: AdmissibleProfiles::Enumerated(profiles),
            count,
            total_possible,
            fixed: fixed.clone(),
        });
    }

    if n > 5 || i_count > 8 {
        return Err(AnalysisError::SizeGuard {
            reason: format!(
                "profile scan handles at most 5 alternatives and 8 agents; got {n} and {i_count}"
            ),
        });
    }
    // blocked[pair][u][v]: appending (u, v) for this pair creates a cycle.
    let mut pair_blocked = Vec::new();
    for i in 0..i_count {
        for j in i + 1..i_count {
            let mut blocked = vec![vec![false; n]; n];
            for (u, row) in blocked.iter_mut().enumerate() {
                for (v, cell) in row.iter_mut().enumerate() {
                    *cell = (0..data.n_periods()).any(|t| {
                        let (a, b) = (data.choice(i, t), data.choice(j, t));
                        (a > u && b < v) || (a < u && b > v)
                    });
                }
            }
            pair_blocked.push(((i, j), blocked));
        }
    }
    let mut profiles = Vec::new();
    let mut profile = vec![0usize; i_count];
    loop {
        let consistent = fixed.iter().all(|(&agent, &pos)| profile[agent] == pos);
        if consistent
            && pair_blocked
                .iter()
                .all(|((i, j), blocked)| !blocked[profile[*i]][profile[*j]])
        {
            profiles.push(profile.clone());
        }
        // Odometer in lexicographic order, last agent fastest.
        let mut k = i_count;
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            if profile[k] + 1 < n {
                profile[k] += 1;
                break;
            }
            profile[k] = 0;
        }
        if k == 0 && profile[0] == 0 && profile.iter().all(|&p| p == 0) {
            break;
        }
    }
    let count = BigUint::from(profiles.len());
    Ok(CounterfactualReport {
        admissible: AdmissibleProfiles::Enumerated(profiles),
        count,
        total_possible,
        fixed: fixed.clone(),
    })
}

/// Admissible-profile count for a class partition under a partial
/// assignment, without enumeration: sum the per-boundary subset counts and
/// subtract the boundary profiles counted twice.
fn symbolic_count(classes: &[Vec<usize>], fixed: &BTreeMap<usize, usize>) -> BigUint {
    let class_of: BTreeMap<usize, usize> = classes
        .iter()
        .enumerate()
        .flat_map(|(k, class)| class.iter().map(move |&a| (a, k)))
        .collect();
    let mut count = BigUint::from(0u32);
    for (k, class) in classes.iter().enumerate() {
        // Classes below k choose high, above k choose low, class k is free
        // outside the fixed agents.
        let mut feasible = true;
        let mut free_in_k = class.len();
        for (&agent, &pos) in fixed {
            let c = class_of[&agent];
            if c < k && pos != 0 || c > k && pos != 1 {
                feasible = false;
                break;
            }
            if c == k {
                free_in_k -= 1;
            }
        }
        if feasible {
            count += BigUint::from(1u32) << free_in_k;
        }
    }
    for k in 0..classes.len().saturating_sub(1) {
        // Boundary profile: classes 0..=k high, rest low.
        let feasible = fixed.iter().all(|(&agent, &pos)| {
            let c = class_of[&agent];
            (c <= k && pos == 0) || (c > k && pos == 1)
        });
        if feasible {
            count -= BigUint::from(1u32);
        }
    }
    count
}
