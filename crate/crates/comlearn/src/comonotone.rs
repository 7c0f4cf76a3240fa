//! Private-signal models with directionally aligned information.
//!
//! Here each agent receives their own signal, but the joint experiment is
//! co-monotone: every agent's realized signal favors the same state, with
//! possibly different strength. With a fixed state this is refuted exactly by
//! adjacent-period opposite moves; with a moving state nothing is refutable.
//! This module builds witnesses for both variants and verifies them in exact
//! arithmetic, including the construction that lifts any feasible profile of
//! per-agent marginal likelihoods into a full strictly co-monotone joint
//! distribution over signal profiles.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycles::{find_consecutive_cycle, CycleWitness};
use crate::dataset::ChoiceDataset;
use crate::rational::Rat;
use crate::witness::TransitionMatrix;

#[derive(Debug, Error)]
pub enum ComonotoneError {
    #[error("operation requires binary data, dataset has {found} alternatives")]
    NotBinary { found: usize },
    #[error("choice data has a consecutive cycle: {witness:?}")]
    ConsecutiveCycle { witness: CycleWitness },
    #[error("invalid cutoffs: {reason}")]
    BadCutoffs { reason: String },
    #[error("marginals are not strictly co-monotone: {reason}")]
    NotComonotone { reason: String },
    #[error("infeasible marginals: {reason}")]
    InfeasibleMarginals { reason: String },
    #[error("witness shape mismatch: {reason}")]
    Shape { reason: String },
    #[error("invalid witness: {reason}")]
    Invalid { reason: String },
    #[error("joint enumeration is limited to 6 agents, got {agents}")]
    EnumerationGuard { agents: usize },
}

/// Each agent's realized-signal likelihoods under the two states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginalPair {
    /// Likelihood of agent `i`'s realized signal in state 0.
    pub high: Vec<Rat>,
    /// Likelihood of agent `i`'s realized signal in state 1.
    pub low: Vec<Rat>,
}

impl MarginalPair {
    pub fn n_agents(&self) -> usize {
        self.high.len()
    }

    /// Positive entries, both state sums below 1.
    pub fn validate_feasible(&self) -> Result<(), ComonotoneError> {
        if self.high.len() != self.low.len() || self.high.is_empty() {
            return Err(ComonotoneError::Shape {
                reason: "marginal vectors must be nonempty and equal length".into(),
            });
        }
        for v in self.high.iter().chain(&self.low) {
            if !v.is_positive() {
                return Err(ComonotoneError::InfeasibleMarginals {
                    reason: format!("likelihood {v} is not positive"),
                });
            }
        }
        for (name, side) in [("state-0", &self.high), ("state-1", &self.low)] {
            let sum = side.iter().fold(Rat::zero(), |acc, v| &acc + v);
            if sum >= Rat::one() {
                return Err(ComonotoneError::InfeasibleMarginals {
                    reason: format!("{name} likelihoods sum to {sum}, which is not below 1"),
                });
            }
        }
        Ok(())
    }

    /// Sign of each agent's likelihood difference: all strictly positive, all
    /// strictly negative, or all zero.
    pub fn shared_sign(&self) -> Result<i8, ComonotoneError> {
        let mut sign = 0i8;
        for (h, l) in self.high.iter().zip(&self.low) {
            let s = match h.cmp(l) {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => -1,
                std::cmp::Ordering::Equal => 0,
            };
            if s == 0 || (sign != 0 && s != sign) {
                if self.high == self.low {
                    return Ok(0);
                }
                return Err(ComonotoneError::NotComonotone {
                    reason: "likelihood differences do not share one strict sign".into(),
                });
            }
            sign = s;
        }
        Ok(sign)
    }
}

/// Symbolic joint experiment over signal sets `{s0, s1, ..., sI}` per agent.
///
/// The joint places mass `(1-eps) * adjusted[l] + eps / I^I` on the diagonal
/// profile of signal `l`, `eps / I^I` on every other all-informative profile,
/// and the leftover `(1-eps) * (1 - sum adjusted)` on the all-`s0` profile.
/// Agent `i`'s realized signal is `s(i+1)`, so their realized marginal pair is
/// exactly the requested one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComonotoneExperiment {
    pub epsilon: Rat,
    pub marginals: MarginalPair,
    pub adjusted_high: Vec<Rat>,
    pub adjusted_low: Vec<Rat>,
}

impl ComonotoneExperiment {
    pub fn n_agents(&self) -> usize {
        self.marginals.n_agents()
    }

    /// Signal labels: `s0` is the null signal, `s1..sI` the informative ones.
    pub fn signal_labels(&self) -> Vec<String> {
        (0..=self.n_agents()).map(|k| format!("s{k}")).collect()
    }

    /// The realized profile: agent `i` observes signal `i + 1`.
    pub fn realized_profile(&self) -> Vec<usize> {
        (1..=self.n_agents()).collect()
    }

    fn adjusted(&self, high: bool) -> &[Rat] {
        if high {
            &self.adjusted_high
        } else {
            &self.adjusted_low
        }
    }

    /// Structural consistency: `(1-eps) * adjusted + eps/I` reproduces every
    /// marginal exactly and all masses are valid probabilities.
    pub fn validate(&self) -> Result<(), ComonotoneError> {
        let i_count = self.n_agents();
        if self.adjusted_high.len() != i_count || self.adjusted_low.len() != i_count {
            return Err(ComonotoneError::Shape {
                reason: "adjusted marginal vectors must match the agent count".into(),
            });
        }
        self.marginals.validate_feasible()?;
        if !self.epsilon.is_interior() {
            return Err(ComonotoneError::Invalid {
                reason: format!("epsilon {} must lie in (0, 1)", self.epsilon),
            });
        }
        let share = &self.epsilon / &Rat::int(i_count as i64);
        let keep = self.epsilon.complement();
        for (adjusted, original) in [
            (&self.adjusted_high, &self.marginals.high),
            (&self.adjusted_low, &self.marginals.low),
        ] {
            let mut sum = Rat::zero();
            for (adj, orig) in adjusted.iter().zip(original.iter()) {
                if !adj.is_interior() {
                    return Err(ComonotoneError::Invalid {
                        reason: format!("adjusted likelihood {adj} must lie in (0, 1)"),
                    });
                }
                if &(&keep * adj) + &share != *orig {
                    return Err(ComonotoneError::Invalid {
                        reason: "adjusted likelihoods do not reproduce the marginals".into(),
                    });
                }
                sum = &sum + adj;
            }
            if sum >= Rat::one() {
                return Err(ComonotoneError::Invalid {
                    reason: "adjusted likelihoods sum to 1 or more".into(),
                });
            }
        }
        Ok(())
    }

    /// The uniform sliver `epsilon / I^I` spread over informative profiles.
    pub fn crumb(&self) -> Rat {
        let i_count = self.n_agents();
        let cells = num_bigint::BigInt::from(i_count).pow(i_count as u32);
        &self.epsilon / &Rat::from_big(cells, num_bigint::BigInt::from(1))
    }

    /// Mass of a signal profile (entries in `0..=I`) under one state.
    pub fn mass(&self, profile: &[usize], high: bool) -> Rat {
        let i_count = self.n_agents();
        assert_eq!(profile.len(), i_count);
        let adjusted = self.adjusted(high);
        let keep = self.epsilon.complement();
        if profile.iter().all(|&s| s == 0) {
            let body: Rat = adjusted.iter().fold(Rat::zero(), |acc, v| &acc + v);
            return &keep * &body.complement();
        }
        if profile.contains(&0) {
            return Rat::zero();
        }
        let first = profile[0];
        if profile.iter().all(|&s| s == first) {
            &(&keep * &adjusted[first - 1]) + &self.crumb()
        } else {
            self.crumb()
        }
    }
}

/// All positive-mass signal profiles with their masses under one state.
/// Support size is `I^I + 1`, so this is guarded to 6 agents.
pub fn enumerate_joint(
    exp: &ComonotoneExperiment,
    high: bool,
) -> Result<Vec<(Vec<usize>, Rat)>, ComonotoneError> {
    let i_count = exp.n_agents();
    if i_count > 6 {
        return Err(ComonotoneError::EnumerationGuard { agents: i_count });
    }
    let mut out = Vec::new();
    let mut profile = vec![1usize; i_count];
    loop {
        out.push((profile.clone(), exp.mass(&profile, high)));
        // Odometer over signals 1..=I.
        let mut k = 0;
        while k < i_count {
            if profile[k] < i_count {
                profile[k] += 1;
                break;
            }
            profile[k] = 1;
            k += 1;
        }
        if k == i_count {
            break;
        }
    }
    let null = vec![0usize; i_count];
    let mass = exp.mass(&null, high);
    out.push((null, mass));
    Ok(out)
}

/// Builds the strictly co-monotone joint experiment realizing the given
/// marginal pairs. `epsilon` is half the largest value that keeps every
/// adjusted likelihood inside (0, 1) for both states.
pub fn build_joint_experiment(
    marginals: &MarginalPair,
) -> Result<ComonotoneExperiment, ComonotoneError> {
    marginals.validate_feasible()?;
    if marginals.shared_sign()? == 0 {
        return Err(ComonotoneError::NotComonotone {
            reason: "uninformative marginals have no strict direction".into(),
        });
    }
    let i_count = marginals.n_agents();
    let i_rat = Rat::int(i_count as i64);
    let mut bound = Rat::one();
    for v in marginals.high.iter().chain(&marginals.low) {
        bound = Rat::min(&bound, &(&i_rat * v));
        if i_count >= 2 {
            // Keeps the adjusted likelihood below 1.
            let cap = &(&i_rat * &v.complement()) / &Rat::int(i_count as i64 - 1);
            bound = Rat::min(&bound, &cap);
        }
    }
    let epsilon = &bound / &Rat::int(2);
    let share = &epsilon / &i_rat;
    let keep = epsilon.complement();
    let adjust =
        |side: &[Rat]| -> Vec<Rat> { side.iter().map(|v| &(v - &share) / &keep).collect() };
    let exp = ComonotoneExperiment {
        epsilon,
        adjusted_high: adjust(&marginals.high),
        adjusted_low: adjust(&marginals.low),
        marginals: marginals.clone(),
    };
    debug_assert!(exp.validate().is_ok());
    Ok(exp)
}

/// One period's information: either a full joint experiment or a marker that
/// everyone received an uninformative signal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentStep {
    Informative(ComonotoneExperiment),
    Uninformative,
}

/// Prior plus per-agent belief paths: `posteriors[t][i]` after the period-`t`
/// signal, `pre_signal[t][i]` just before it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivateBeliefTrajectory {
    pub prior: Rat,
    pub posteriors: Vec<Vec<Rat>>,
    pub pre_signal: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateVariant {
    TimeInvariant,
    TimeVarying,
}

/// A complete private-signal rationalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComonotoneWitness {
    /// One interior threshold per agent.
    pub cutoffs: Vec<Rat>,
    pub beliefs: PrivateBeliefTrajectory,
    pub transitions: Vec<TransitionMatrix>,
    pub experiments: Vec<ExperimentStep>,
    pub variant: StateVariant,
    /// The common pre-signal belief each period resets to (moving state only).
    pub reset_beliefs: Option<Vec<Rat>>,
    /// Whether every experiment must be strictly co-monotone.
    pub strict: bool,
}

/// First verification clause a private-signal witness violated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum ComonotoneViolation {
    /// A posterior is not the Bayes update of its pre-signal belief.
    BayesUpdate { agent: usize, period: usize },
    /// A pre-signal belief does not follow the transition formula.
    PreSignalBelief { agent: usize, period: usize },
    /// A posterior is on the wrong side of the agent's threshold.
    StrictOptimality { agent: usize, period: usize },
    /// Two agents' beliefs moved in strictly opposite directions.
    BeliefComonotonicity { period: usize },
    /// An experiment's likelihood differences oppose, or its joint fails the
    /// support-wise product condition.
    ExperimentComonotonicity { period: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ComonotoneVerdict {
    Accepted,
    Rejected { violation: ComonotoneViolation },
}

impl ComonotoneVerdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, ComonotoneVerdict::Accepted)
    }
}

fn resolve_cutoffs(
    data: &ChoiceDataset,
    cutoffs: Option<Vec<Rat>>,
) -> Result<Vec<Rat>, ComonotoneError> {
    if data.n_alternatives() != 2 {
        return Err(ComonotoneError::NotBinary {
            found: data.n_alternatives(),
        });
    }
    let cuts = cutoffs.unwrap_or_else(|| vec![Rat::one_half(); data.n_agents()]);
    if cuts.len() != data.n_agents() {
        return Err(ComonotoneError::BadCutoffs {
            reason: format!(
                "{} cutoffs supplied for {} agents",
                cuts.len(),
                data.n_agents()
            ),
        });
    }
    for c in &cuts {
        if !c.is_interior() {
            return Err(ComonotoneError::BadCutoffs {
                reason: format!("cutoff {c} must lie strictly inside (0, 1)"),
            });
        }
    }
    Ok(cuts)
}

/// Marginal pair realizing each agent's Bayes factor `ratio[i]` with sums
/// safely below 1: the state-1 likelihood is `1 / (2 I max(1, r))`.
fn marginals_for_ratios(ratios: &[Rat]) -> MarginalPair {
    let scale = Rat::int(2 * ratios.len() as i64);
    let mut high = Vec::with_capacity(ratios.len());
    let mut low = Vec::with_capacity(ratios.len());
    for r in ratios {
        let base = (&scale * &Rat::max(&Rat::one(), r)).recip();
        high.push(r * &base);
        low.push(base);
    }
    MarginalPair { high, low }
}

fn bayes_factor(posterior: &Rat, pre: &Rat) -> Rat {
    &posterior.odds() / &pre.odds()
}

/// Witness for a fixed state: succeeds exactly when the data has no
/// consecutive cycle, for any interior cutoff profile (default 1/2
/// everywhere).
///
/// Forward induction over periods: first-period beliefs sit on each agent's
/// correct side of their threshold with the prior strictly below all of them;
/// afterwards, a period where somebody drops to the low alternative moves
/// every belief strictly down (staying on the correct sides), a period where
/// somebody rises moves every belief strictly up, and a quiet period drifts
/// all beliefs down by halving gaps so that experiments stay strictly
/// co-monotone. With `strict` false, quiet periods use uninformative signals
/// instead and beliefs stand still.
pub fn construct_comonotone_invariant(
    data: &ChoiceDataset,
    cutoffs: Option<Vec<Rat>>,
    strict: bool,
) -> Result<ComonotoneWitness, ComonotoneError> {
    let cuts = resolve_cutoffs(data, cutoffs)?;
    if let Some(witness) = find_consecutive_cycle(data) {
        return Err(ComonotoneError::ConsecutiveCycle { witness });
    }
    let i_count = data.n_agents();
    let t_count = data.n_periods();

    let mut posteriors: Vec<Vec<Rat>> = Vec::with_capacity(t_count);
    let mut pre_signal: Vec<Vec<Rat>> = Vec::with_capacity(t_count);
    let mut experiments: Vec<ExperimentStep> = Vec::with_capacity(t_count);

    let mut prior = Rat::one_half();
    for t in 0..t_count {
        if t == 0 {
            let first: Vec<Rat> = (0..i_count)
                .map(|i| {
                    if data.choice(i, 0) == 0 {
                        Rat::midpoint(&cuts[i], &Rat::one())
                    } else {
                        Rat::midpoint(&Rat::zero(), &cuts[i])
                    }
                })
                .collect();
            let lowest = first.iter().min().expect("at least one agent");
            prior = Rat::midpoint(&Rat::zero(), lowest);
            let ratios: Vec<Rat> = first.iter().map(|p| bayes_factor(p, &prior)).collect();
            experiments.push(ExperimentStep::Informative(build_joint_experiment(
                &marginals_for_ratios(&ratios),
            )?));
            pre_signal.push(vec![prior.clone(); i_count]);
            posteriors.push(first);
            continue;
        }

        let dropped = (0..i_count).any(|i| data.choice(i, t - 1) == 0 && data.choice(i, t) == 1);
        let rose = (0..i_count).any(|i| data.choice(i, t - 1) == 1 && data.choice(i, t) == 0);
        assert!(
            !(dropped && rose),
            "opposite adjacent moves survived the consecutive-cycle check"
        );

        let prev = posteriors[t - 1].clone();
        if !strict && !dropped && !rose {
            pre_signal.push(prev.clone());
            posteriors.push(prev);
            experiments.push(ExperimentStep::Uninformative);
            continue;
        }

        let next: Vec<Rat> = (0..i_count)
            .map(|i| {
                let was_high = data.choice(i, t - 1) == 0;
                let is_high = data.choice(i, t) == 0;
                if rose {
                    match (was_high, is_high) {
                        (true, true) => Rat::midpoint(&prev[i], &Rat::one()),
                        (false, false) => Rat::midpoint(&prev[i], &cuts[i]),
                        (false, true) => Rat::midpoint(&cuts[i], &Rat::one()),
                        (true, false) => unreachable!("drop during a rising step"),
                    }
                } else {
                    // Someone dropped, or a quiet strict step drifting down.
                    match (was_high, is_high) {
                        (true, true) => Rat::midpoint(&cuts[i], &prev[i]),
                        (false, false) => Rat::midpoint(&Rat::zero(), &prev[i]),
                        (true, false) => Rat::midpoint(&Rat::zero(), &cuts[i]),
                        (false, true) => unreachable!("rise during a falling step"),
                    }
                }
            })
            .collect();
        let ratios: Vec<Rat> = (0..i_count)
            .map(|i| bayes_factor(&next[i], &prev[i]))
            .collect();
        experiments.push(ExperimentStep::Informative(build_joint_experiment(
            &marginals_for_ratios(&ratios),
        )?));
        pre_signal.push(prev);
        posteriors.push(next);
    }

    Ok(ComonotoneWitness {
        cutoffs: cuts,
        beliefs: PrivateBeliefTrajectory {
            prior,
            posteriors,
            pre_signal,
        },
        transitions: vec![TransitionMatrix::identity(); t_count],
        experiments,
        variant: StateVariant::TimeInvariant,
        reset_beliefs: None,
        strict,
    })
}

/// Witness for a moving state: succeeds on every binary panel, cycles or not.
///
/// Each period's transition matrix sends both states to state 0 with the same
/// probability, a value strictly below every threshold, so all pre-signal
/// beliefs reset there regardless of history. Every agent then receives a
/// strictly good-news signal lifting their belief to the correct side of
/// their threshold.
pub fn construct_comonotone_varying(
    data: &ChoiceDataset,
    cutoffs: Option<Vec<Rat>>,
) -> Result<ComonotoneWitness, ComonotoneError> {
    let cuts = resolve_cutoffs(data, cutoffs)?;
    let i_count = data.n_agents();
    let t_count = data.n_periods();
    let reset = Rat::midpoint(&Rat::zero(), cuts.iter().min().expect("at least one agent"));
    let transition = TransitionMatrix {
        rows: [
            [reset.clone(), reset.complement()],
            [reset.clone(), reset.complement()],
        ],
    };

    let mut posteriors = Vec::with_capacity(t_count);
    let mut pre_signal = Vec::with_capacity(t_count);
    let mut experiments = Vec::with_capacity(t_count);
    for t in 0..t_count {
        let targets: Vec<Rat> = (0..i_count)
            .map(|i| {
                if data.choice(i, t) == 0 {
                    Rat::midpoint(&cuts[i], &Rat::one())
                } else {
                    Rat::midpoint(&reset, &cuts[i])
                }
            })
            .collect();
        let ratios: Vec<Rat> = targets.iter().map(|p| bayes_factor(p, &reset)).collect();
        experiments.push(ExperimentStep::Informative(build_joint_experiment(
            &marginals_for_ratios(&ratios),
        )?));
        pre_signal.push(vec![reset.clone(); i_count]);
        posteriors.push(targets);
    }

    Ok(ComonotoneWitness {
        cutoffs: cuts,
        beliefs: PrivateBeliefTrajectory {
            prior: Rat::one_half(),
            posteriors,
            pre_signal,
        },
        transitions: vec![transition; t_count],
        experiments,
        variant: StateVariant::TimeVarying,
        reset_beliefs: Some(vec![reset; t_count]),
        strict: true,
    })
}

fn validate_comonotone_shapes(
    data: &ChoiceDataset,
    w: &ComonotoneWitness,
) -> Result<(), ComonotoneError> {
    if data.n_alternatives() != 2 {
        return Err(ComonotoneError::NotBinary {
            found: data.n_alternatives(),
        });
    }
    let (i_count, t_count) = (data.n_agents(), data.n_periods());
    if w.cutoffs.len() != i_count {
        return Err(ComonotoneError::Shape {
            reason: "cutoff count does not match the agent count".into(),
        });
    }
    for c in &w.cutoffs {
        if !c.is_interior() {
            return Err(ComonotoneError::Invalid {
                reason: format!("cutoff {c} must lie in (0, 1)"),
            });
        }
    }
    if !w.beliefs.prior.is_interior() {
        return Err(ComonotoneError::Invalid {
            reason: "prior must lie in (0, 1)".into(),
        });
    }
    if w.beliefs.posteriors.len() != t_count
        || w.beliefs.pre_signal.len() != t_count
        || w.transitions.len() != t_count
        || w.experiments.len() != t_count
    {
        return Err(ComonotoneError::Shape {
            reason: "per-period vectors do not match the period count".into(),
        });
    }
    for t in 0..t_count {
        if w.beliefs.posteriors[t].len() != i_count || w.beliefs.pre_signal[t].len() != i_count {
            return Err(ComonotoneError::Shape {
                reason: format!("per-agent beliefs at period index {t} have the wrong length"),
            });
        }
        for p in &w.beliefs.posteriors[t] {
            if !p.is_interior() {
                return Err(ComonotoneError::Invalid {
                    reason: format!("posterior {p} at period index {t} must lie in (0, 1)"),
                });
            }
        }
        w.transitions[t]
            .validate()
            .map_err(|e| ComonotoneError::Invalid {
                reason: format!("period index {t}: {e}"),
            })?;
        if let ExperimentStep::Informative(exp) = &w.experiments[t] {
            if exp.n_agents() != i_count {
                return Err(ComonotoneError::Shape {
                    reason: format!("experiment at period index {t} has the wrong agent count"),
                });
            }
            exp.validate()?;
        }
    }
    if let Some(resets) = &w.reset_beliefs {
        if resets.len() != t_count {
            return Err(ComonotoneError::Shape {
                reason: "reset-belief count does not match the period count".into(),
            });
        }
    }
    if w.variant == StateVariant::TimeInvariant
        && !w
            .transitions
            .iter()
            .all(TransitionMatrix::is_time_invariant)
    {
        return Err(ComonotoneError::Invalid {
            reason: "witness claims a fixed state but has moving transitions".into(),
        });
    }
    Ok(())
}

/// Streamed check of one state's fully enumerated joint: sums to 1, realized
/// marginals reproduce, and every support profile satisfies the product
/// condition (strict or weak). Signal signs are precomputed so the walk over
/// all `I^I + 1` support profiles stays cheap.
fn joint_is_comonotone(exp: &ComonotoneExperiment, strict: bool) -> bool {
    let i_count = exp.n_agents();
    // Marginal difference sign per signal: s0 moves opposite to the bundle.
    let mut sign = vec![0i8; i_count + 1];
    let mut sum_high = Rat::zero();
    let mut sum_low = Rat::zero();
    for k in 0..i_count {
        sign[k + 1] = match exp.marginals.high[k].cmp(&exp.marginals.low[k]) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
        };
        sum_high = &sum_high + &exp.marginals.high[k];
        sum_low = &sum_low + &exp.marginals.low[k];
    }
    sign[0] = match sum_low.cmp(&sum_high) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
    };

    let profile_ok = |signals: &[usize]| -> bool {
        let mut seen = 0i8;
        for &s in signals {
            let d = sign[s];
            if strict && d == 0 {
                return false;
            }
            if d != 0 {
                if seen != 0 && d != seen {
                    return false;
                }
                seen = d;
            }
        }
        true
    };

    // The all-null profile pairs every agent with the same difference.
    let null = vec![0usize; i_count];
    if !profile_ok(&null) {
        return false;
    }

    // Walk S*: count how often each (agent, signal) pair occurs off the
    // diagonal so sums and marginals can be reassembled exactly.
    let mut offdiag_total = 0u64;
    let mut offdiag_with: Vec<Vec<u64>> = vec![vec![0; i_count + 1]; i_count];
    let mut profile = vec![1usize; i_count];
    loop {
        if !profile_ok(&profile) {
            return false;
        }
        let diagonal = profile.iter().all(|&s| s == profile[0]);
        if !diagonal {
            offdiag_total += 1;
            for (agent, &s) in profile.iter().enumerate() {
                offdiag_with[agent][s] += 1;
            }
        }
        let mut k = 0;
        while k < i_count {
            if profile[k] < i_count {
                profile[k] += 1;
                break;
            }
            profile[k] = 1;
            k += 1;
        }
        if k == i_count {
            break;
        }
    }

    let crumb = exp.crumb();
    let keep = exp.epsilon.complement();
    for high in [true, false] {
        let adjusted = if high {
            &exp.adjusted_high
        } else {
            &exp.adjusted_low
        };
        let originals = if high {
            &exp.marginals.high
        } else {
            &exp.marginals.low
        };
        let diag_sum: Rat = adjusted
            .iter()
            .fold(Rat::zero(), |acc, adj| &acc + &(&(&keep * adj) + &crumb));
        let adj_sum: Rat = adjusted.iter().fold(Rat::zero(), |acc, v| &acc + v);
        let total = &(&diag_sum + &(&Rat::int(offdiag_total as i64) * &crumb))
            + &(&keep * &adj_sum.complement());
        if total != Rat::one() {
            return false;
        }
        // Realized marginal of each agent: diagonal mass of their signal plus
        // the off-diagonal crumbs carrying it.
        for agent in 0..i_count {
            let s = agent + 1;
            let marginal = &(&(&keep * &adjusted[agent]) + &crumb)
                + &(&Rat::int(offdiag_with[agent][s] as i64) * &crumb);
            if marginal != originals[agent] {
                return false;
            }
        }
    }
    true
}

/// Verifies a private-signal witness in exact arithmetic.
///
/// Clauses, in reporting order: every posterior is the Bayes update of its
/// pre-signal belief through the agent's realized marginals; every pre-signal
/// belief follows the transition formula; every choice is strictly optimal
/// against the agent's threshold; no period moves two agents' beliefs in
/// strictly opposite directions; and every experiment is co-monotone:
/// likelihood differences share a sign (strictly, for strict witnesses) and,
/// for up to 6 agents, the fully enumerated joint passes the support-wise
/// product condition and reproduces its marginals.
pub fn verify_comonotone(
    data: &ChoiceDataset,
    w: &ComonotoneWitness,
) -> Result<ComonotoneVerdict, ComonotoneError> {
    validate_comonotone_shapes(data, w)?;
    let (i_count, t_count) = (data.n_agents(), data.n_periods());
    let reject = |violation: ComonotoneViolation| Ok(ComonotoneVerdict::Rejected { violation });

    for t in 0..t_count {
        for i in 0..i_count {
            let q = &w.beliefs.pre_signal[t][i];
            let p = &w.beliefs.posteriors[t][i];
            let expected = match &w.experiments[t] {
                ExperimentStep::Uninformative => q.clone(),
                ExperimentStep::Informative(exp) => {
                    let top = q * &exp.marginals.high[i];
                    let bottom = &q.complement() * &exp.marginals.low[i];
                    &top / &(&top + &bottom)
                }
            };
            if *p != expected {
                return reject(ComonotoneViolation::BayesUpdate {
                    agent: i,
                    period: t,
                });
            }
        }
    }

    for t in 0..t_count {
        for i in 0..i_count {
            let carried = if t == 0 {
                &w.beliefs.prior
            } else {
                &w.beliefs.posteriors[t - 1][i]
            };
            if w.beliefs.pre_signal[t][i] != w.transitions[t].pre_signal_belief(carried) {
                return reject(ComonotoneViolation::PreSignalBelief {
                    agent: i,
                    period: t,
                });
            }
        }
    }

    for t in 0..t_count {
        for i in 0..i_count {
            let p = &w.beliefs.posteriors[t][i];
            let optimal = if data.choice(i, t) == 0 {
                *p > w.cutoffs[i]
            } else {
                *p < w.cutoffs[i]
            };
            if !optimal {
                return reject(ComonotoneViolation::StrictOptimality {
                    agent: i,
                    period: t,
                });
            }
        }
    }

    // Belief movements may not strictly oppose within a period.
    for t in 0..t_count {
        let mut saw_up = false;
        let mut saw_down = false;
        for i in 0..i_count {
            match w.beliefs.posteriors[t][i].cmp(&w.beliefs.pre_signal[t][i]) {
                std::cmp::Ordering::Greater => saw_up = true,
                std::cmp::Ordering::Less => saw_down = true,
                std::cmp::Ordering::Equal => {}
            }
        }
        if saw_up && saw_down {
            return reject(ComonotoneViolation::BeliefComonotonicity { period: t });
        }
    }

    for t in 0..t_count {
        match &w.experiments[t] {
            ExperimentStep::Uninformative => {
                if w.strict {
                    return reject(ComonotoneViolation::ExperimentComonotonicity { period: t });
                }
            }
            ExperimentStep::Informative(exp) => {
                let mut sign = 0i8;
                let mut opposed = false;
                let mut any_zero = false;
                for (h, l) in exp.marginals.high.iter().zip(&exp.marginals.low) {
                    match h.cmp(l) {
                        std::cmp::Ordering::Greater => {
                            opposed |= sign < 0;
                            sign = 1;
                        }
                        std::cmp::Ordering::Less => {
                            opposed |= sign > 0;
                            sign = -1;
                        }
                        std::cmp::Ordering::Equal => any_zero = true,
                    }
                }
                let bad = if w.strict {
                    opposed || any_zero || sign == 0
                } else {
                    opposed
                };
                if bad {
                    return reject(ComonotoneViolation::ExperimentComonotonicity { period: t });
                }
                if i_count <= 6 && !joint_is_comonotone(exp, w.strict) {
                    return reject(ComonotoneViolation::ExperimentComonotonicity { period: t });
                }
            }
        }
    }
    Ok(ComonotoneVerdict::Accepted)
}
