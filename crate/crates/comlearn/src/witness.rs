//! Construction and exact verification of common-belief rationalizations.
//!
//! A [`RationalizationWitness`] packages everything needed to replay the
//! observed choices: cutoff profiles, utility tables inducing them, a prior
//! and per-period common beliefs, state transition matrices, and one binary
//! experiment per period whose realized-signal likelihoods drive the belief
//! from one period to the next. [`verify_witness`] re-checks the whole
//! package in exact rational arithmetic; [`construct_witness`] produces a
//! witness for any cycle-free panel. [`brute_force_rationalizable`] is a
//! small-instance decision procedure that enumerates cutoff orderings
//! directly, independent of the cycle characterization.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycles::{find_cycle, CycleWitness};
use crate::dataset::ChoiceDataset;
use crate::order::{assign_cutoffs, build_pair_relation, CutoffProfile, OrderError};
use crate::rational::Rat;

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("choice data has a cycle: {witness:?}")]
    Cycle { witness: CycleWitness },
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("witness shape mismatch: {reason}")]
    Shape { reason: String },
    #[error("invalid witness: {reason}")]
    Invalid { reason: String },
    #[error("size guard exceeded: {reason}")]
    SizeGuard { reason: String },
}

/// Row-stochastic 2x2 state transition matrix. State 0 is the state in which
/// the first-listed (highest-belief) alternative is best; `rows[s][s2]` is the
/// probability of moving from state `s` to state `s2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub rows: [[Rat; 2]; 2],
}

impl TransitionMatrix {
    pub fn identity() -> Self {
        TransitionMatrix {
            rows: [[Rat::one(), Rat::zero()], [Rat::zero(), Rat::one()]],
        }
    }

    /// Both diagonal entries are 1: the state never moves.
    pub fn is_time_invariant(&self) -> bool {
        self.rows[0][0] == Rat::one() && self.rows[1][1] == Rat::one()
    }

    pub fn validate(&self) -> Result<(), String> {
        for (s, row) in self.rows.iter().enumerate() {
            for entry in row {
                if entry.is_negative() || *entry > Rat::one() {
                    return Err(format!("transition entry {entry} out of [0, 1]"));
                }
            }
            if &row[0] + &row[1] != Rat::one() {
                return Err(format!("transition row {s} does not sum to 1"));
            }
        }
        Ok(())
    }

    /// Pre-signal probability of state 0 given last period's belief `p`.
    pub fn pre_signal_belief(&self, p: &Rat) -> Rat {
        p * &self.rows[0][0] + &p.complement() * &self.rows[1][0]
    }
}

/// Utility of one alternative in the two states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtilityEntry {
    /// Payoff in state 0 (the state favoring the first-listed alternative).
    pub top: Rat,
    /// Payoff in state 1.
    pub bottom: Rat,
}

impl UtilityEntry {
    /// Expected payoff at belief `p` in state 0.
    pub fn expected(&self, p: &Rat) -> Rat {
        &self.bottom + &(p * &(&self.top - &self.bottom))
    }

    fn slope(&self) -> Rat {
        &self.top - &self.bottom
    }
}

/// Per-agent utilities, indexed like the dataset: `per_agent[i][position]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtilityTable {
    pub per_agent: Vec<Vec<UtilityEntry>>,
}

/// The cutoffs an agent's utility entries induce: intersections of adjacent
/// expected-payoff lines, walked from the lowest belief level up. Returns
/// `None` when the entries do not produce valid cutoff behavior (expected
/// payoffs must get steeper level by level).
pub fn induced_cutoffs(entries: &[UtilityEntry]) -> Option<Vec<Rat>> {
    let n = entries.len();
    if n < 2 {
        return None;
    }
    // entries are position-indexed; level l lives at position n - l.
    let at_level = |level: usize| &entries[n - level];
    let mut cuts = Vec::with_capacity(n - 1);
    for level in 1..n {
        let low = at_level(level);
        let high = at_level(level + 1);
        let rise = &high.slope() - &low.slope();
        if !rise.is_positive() {
            return None;
        }
        cuts.push(&(&low.bottom - &high.bottom) / &rise);
    }
    Some(cuts)
}

/// The prior and the common belief held in each period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeliefTrajectory {
    pub prior: Rat,
    pub beliefs: Vec<Rat>,
}

/// Likelihoods of the realized signal under each state; the complementary
/// signal carries the remaining mass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryExperiment {
    pub top_likelihood: Rat,
    pub bottom_likelihood: Rat,
}

impl BinaryExperiment {
    pub fn likelihood_ratio(&self) -> Rat {
        &self.top_likelihood / &self.bottom_likelihood
    }
}

/// A complete, self-contained rationalization of a panel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalizationWitness {
    pub cutoffs: CutoffProfile,
    pub utilities: UtilityTable,
    pub beliefs: BeliefTrajectory,
    pub transitions: Vec<TransitionMatrix>,
    pub experiments: Vec<BinaryExperiment>,
}

impl RationalizationWitness {
    pub fn is_time_invariant(&self) -> bool {
        self.transitions
            .iter()
            .all(TransitionMatrix::is_time_invariant)
    }
}

/// Which verification clause a witness violated first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum Violation {
    /// The stated belief is not the Bayes update of its predecessor.
    BayesUpdate { period: usize },
    /// A belief does not lie strictly inside the chosen alternative's band.
    StrictOptimality { agent: usize, period: usize },
    /// A utility table does not induce the claimed cutoffs.
    ThresholdMismatch { agent: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BayesUpdate { period } => {
                write!(f, "belief at period index {period} is not the exact Bayes update")
            }
            Violation::StrictOptimality { agent, period } => write!(
                f,
                "agent index {agent} at period index {period}: belief not strictly inside the chosen band"
            ),
            Violation::ThresholdMismatch { agent } => {
                write!(f, "agent index {agent}: utilities do not induce the claimed cutoffs")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Accepted,
    Rejected { violation: Violation },
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted)
    }
}

/// Builds a rationalization witness for cycle-free data.
///
/// Cutoffs come from the ranked slot relation; the prior is 1/2; each
/// period's belief is the midpoint of the open interval every agent's choice
/// pins down; the state is time-invariant; utilities follow a fixed rational
/// template inducing the cutoffs; and each period's experiment realizes
/// exactly the likelihood ratio that moves the belief where it must go.
pub fn construct_witness(data: &ChoiceDataset) -> Result<RationalizationWitness, WitnessError> {
    if let Some(witness) = find_cycle(data) {
        return Err(WitnessError::Cycle { witness });
    }
    let cutoffs = assign_cutoffs(&build_pair_relation(data))?;

    let prior = Rat::one_half();
    let mut beliefs = Vec::with_capacity(data.n_periods());
    for t in 0..data.n_periods() {
        let mut lower = Rat::zero();
        let mut upper = Rat::one();
        for i in 0..data.n_agents() {
            let level = data.level(i, t);
            lower = Rat::max(&lower, cutoffs.lower(i, level));
            upper = Rat::min(&upper, cutoffs.upper(i, level));
        }
        if lower >= upper {
            return Err(WitnessError::Invalid {
                reason: format!("no belief separates the period-{t} choices"),
            });
        }
        beliefs.push(Rat::midpoint(&lower, &upper));
    }

    let transitions = vec![TransitionMatrix::identity(); data.n_periods()];
    let experiments = {
        let mut out = Vec::with_capacity(data.n_periods());
        let mut prev = prior.clone();
        for p in &beliefs {
            out.push(experiment_for_ratio(&(&p.odds() / &prev.odds())));
            prev = p.clone();
        }
        out
    };

    let utilities = synthesize_utilities(&cutoffs);
    Ok(RationalizationWitness {
        cutoffs,
        utilities,
        beliefs: BeliefTrajectory { prior, beliefs },
        transitions,
        experiments,
    })
}

/// Binary experiment whose realized-signal likelihood ratio is exactly `r`:
/// the larger likelihood is capped at 1/2 so both stay inside (0, 1).
pub fn experiment_for_ratio(r: &Rat) -> BinaryExperiment {
    debug_assert!(r.is_positive());
    let bottom = if *r >= Rat::one() {
        (Rat::int(2) * r).recip()
    } else {
        Rat::one_half()
    };
    BinaryExperiment {
        top_likelihood: r * &bottom,
        bottom_likelihood: bottom,
    }
}

/// Rational utility tables inducing the given cutoffs.
///
/// Binary profiles use a fixed template whose indifference belief is exactly
/// the interior cutoff `c`: payoff 1 for matching either state, 1/2 for the
/// high alternative in the low state, `(3c - 1) / 2c` for the low alternative
/// in the high state. Larger profiles use piecewise-linear payoffs: level `l`
/// has slope `l - 1` and adjacent levels cross exactly at the shared cutoff.
pub fn synthesize_utilities(cutoffs: &CutoffProfile) -> UtilityTable {
    let n = cutoffs.n_levels();
    let per_agent = (0..cutoffs.n_agents())
        .map(|i| {
            if n == 2 {
                let c = cutoffs.interior(i);
                let y_top = &(&(Rat::int(3) * c) - &Rat::one()) / &(Rat::int(2) * c);
                vec![
                    UtilityEntry {
                        top: Rat::one(),
                        bottom: Rat::one_half(),
                    },
                    UtilityEntry {
                        top: y_top,
                        bottom: Rat::one(),
                    },
                ]
            } else {
                let mut by_level = Vec::with_capacity(n);
                let mut intercept = Rat::zero();
                for level in 1..=n {
                    if level >= 2 {
                        intercept = &intercept - cutoffs.threshold(i, level);
                    }
                    let slope = Rat::int(level as i64 - 1);
                    by_level.push(UtilityEntry {
                        top: &intercept + &slope,
                        bottom: intercept.clone(),
                    });
                }
                by_level.reverse(); // level-major to position-major
                by_level
            }
        })
        .collect();
    UtilityTable { per_agent }
}

fn shape_err(reason: String) -> WitnessError {
    WitnessError::Shape { reason }
}

fn validate_shapes(data: &ChoiceDataset, w: &RationalizationWitness) -> Result<(), WitnessError> {
    let (i_count, t_count, n) = (data.n_agents(), data.n_periods(), data.n_alternatives());
    if w.cutoffs.n_agents() != i_count || w.cutoffs.n_levels() != n {
        return Err(shape_err(
            "cutoff profile does not match the dataset".into(),
        ));
    }
    w.cutoffs.validate().map_err(|e| WitnessError::Invalid {
        reason: e.to_string(),
    })?;
    if w.beliefs.beliefs.len() != t_count {
        return Err(shape_err(
            "belief count does not match the period count".into(),
        ));
    }
    if w.transitions.len() != t_count || w.experiments.len() != t_count {
        return Err(shape_err(
            "transition or experiment count does not match".into(),
        ));
    }
    if w.utilities.per_agent.len() != i_count || w.utilities.per_agent.iter().any(|u| u.len() != n)
    {
        return Err(shape_err("utility table does not match the dataset".into()));
    }
    if !w.beliefs.prior.is_interior() {
        return Err(WitnessError::Invalid {
            reason: "prior must lie in (0, 1)".into(),
        });
    }
    for (t, p) in w.beliefs.beliefs.iter().enumerate() {
        if !p.is_interior() {
            return Err(WitnessError::Invalid {
                reason: format!("belief at period index {t} must lie in (0, 1)"),
            });
        }
    }
    for (t, m) in w.transitions.iter().enumerate() {
        m.validate().map_err(|e| WitnessError::Invalid {
            reason: format!("period index {t}: {e}"),
        })?;
    }
    for (t, e) in w.experiments.iter().enumerate() {
        if !e.top_likelihood.is_interior() || !e.bottom_likelihood.is_interior() {
            return Err(WitnessError::Invalid {
                reason: format!("period index {t}: signal likelihoods must lie in (0, 1)"),
            });
        }
    }
    Ok(())
}

/// Checks a witness against the data in exact arithmetic.
///
/// Accepts iff (a) every belief is the exact Bayes update of its predecessor
/// through the period's transition matrix and realized likelihoods, (b) every
/// belief lies strictly inside every agent's chosen band, and (c) every
/// utility table induces exactly the claimed cutoffs. Rejects with the first
/// violated clause, scanning (a) over all periods, then (b), then (c).
pub fn verify_witness(
    data: &ChoiceDataset,
    w: &RationalizationWitness,
) -> Result<Verdict, WitnessError> {
    validate_shapes(data, w)?;

    let mut prev = w.beliefs.prior.clone();
    for (t, p) in w.beliefs.beliefs.iter().enumerate() {
        let q = w.transitions[t].pre_signal_belief(&prev);
        let top = &q * &w.experiments[t].top_likelihood;
        let bottom = &q.complement() * &w.experiments[t].bottom_likelihood;
        if *p != &top / &(&top + &bottom) {
            return Ok(Verdict::Rejected {
                violation: Violation::BayesUpdate { period: t },
            });
        }
        prev = p.clone();
    }

    for (t, p) in w.beliefs.beliefs.iter().enumerate() {
        for i in 0..data.n_agents() {
            let level = data.level(i, t);
            if !p.is_strictly_between(w.cutoffs.lower(i, level), w.cutoffs.upper(i, level)) {
                return Ok(Verdict::Rejected {
                    violation: Violation::StrictOptimality {
                        agent: i,
                        period: t,
                    },
                });
            }
        }
    }

    for (i, entries) in w.utilities.per_agent.iter().enumerate() {
        let claimed: Vec<Rat> = (2..=w.cutoffs.n_levels())
            .map(|level| w.cutoffs.threshold(i, level).clone())
            .collect();
        if induced_cutoffs(entries).as_deref() != Some(claimed.as_slice()) {
            return Ok(Verdict::Rejected {
                violation: Violation::ThresholdMismatch { agent: i },
            });
        }
    }
    Ok(Verdict::Accepted)
}

/// Decides rationalizability by enumerating complete orderings of the
/// interior cutoff slots (respecting per-agent monotonicity) and checking
/// whether per-period beliefs can thread every strict inequality. Exact on
/// its guarded domain and entirely independent of the cycle detectors.
pub fn brute_force_rationalizable(data: &ChoiceDataset) -> Result<bool, WitnessError> {
    let (i_count, t_count, n) = (data.n_agents(), data.n_periods(), data.n_alternatives());
    if i_count > 6 || t_count > 6 || n > 4 {
        return Err(WitnessError::SizeGuard {
            reason: format!(
                "brute force handles at most 6 agents, 6 periods, 4 alternatives; got {i_count}, {t_count}, {n}"
            ),
        });
    }
    let per_agent = n - 1;
    let slot = |agent: usize, level: usize| agent * per_agent + (level - 2);
    let slot_count = i_count * per_agent;

    // Constraints `value(a) > value(b)` between interior slots; pairs touching
    // a boundary sentinel hold automatically.
    let mut must_exceed = vec![BTreeSet::new(); slot_count];
    for t in 0..t_count {
        for i in 0..i_count {
            let upper_level = data.level(i, t) + 1;
            if upper_level > n {
                continue;
            }
            for j in 0..i_count {
                if i == j {
                    continue;
                }
                let lower_level = data.level(j, t);
                if lower_level < 2 {
                    continue;
                }
                must_exceed[slot(i, upper_level)].insert(slot(j, lower_level));
            }
        }
    }

    // Place slots from the bottom value up. A placement is legal when every
    // slot it must exceed is already below it. States repeat across branches,
    // so dead per-agent progress vectors are memoized.
    fn search(
        next: &mut Vec<usize>,
        placed: &mut Vec<bool>,
        remaining: usize,
        per_agent: usize,
        must_exceed: &[BTreeSet<usize>],
        dead: &mut BTreeSet<Vec<usize>>,
    ) -> bool {
        if remaining == 0 {
            return true;
        }
        if dead.contains(next) {
            return false;
        }
        for agent in 0..next.len() {
            if next[agent] >= per_agent {
                continue;
            }
            let s = agent * per_agent + next[agent];
            if must_exceed[s].iter().any(|&b| !placed[b]) {
                continue;
            }
            next[agent] += 1;
            placed[s] = true;
            let ok = search(next, placed, remaining - 1, per_agent, must_exceed, dead);
            placed[s] = false;
            next[agent] -= 1;
            if ok {
                return true;
            }
        }
        dead.insert(next.clone());
        false
    }

    let mut next = vec![0usize; i_count];
    let mut placed = vec![false; slot_count];
    Ok(search(
        &mut next,
        &mut placed,
        slot_count,
        per_agent,
        &must_exceed,
        &mut BTreeSet::new(),
    ))
}
