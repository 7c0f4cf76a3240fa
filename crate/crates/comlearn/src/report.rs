//! Structured, label-based results for the command-line front end.
//!
//! Library types index agents and periods by position; the report layer
//! resolves them to dataset labels, serializes exactly (rationals stay
//! `n/d` strings, counts stay decimal strings) and renders deterministic
//! plain-text summaries. Identical inputs produce byte-identical reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analytics::{AdmissibleProfiles, CounterfactualReport, DiscriminationReport};
use crate::comonotone::{enumerate_joint, ComonotoneError, ComonotoneWitness, ExperimentStep};
use crate::cycles::{CycleKind, CycleWitness};
use crate::dataset::ChoiceDataset;
use crate::order::AgentPreorder;
use crate::permute::PermutationAssignment;
use crate::witness::RationalizationWitness;

/// A cycle witness with labels resolved.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleReport {
    pub kind: CycleKind,
    pub agent_i: String,
    pub agent_j: String,
    pub period_t1: String,
    pub period_t2: String,
    pub description: String,
}

impl CycleReport {
    pub fn new(data: &ChoiceDataset, witness: &CycleWitness) -> Self {
        CycleReport {
            kind: witness.kind,
            agent_i: data.agents()[witness.agent_i].clone(),
            agent_j: data.agents()[witness.agent_j].clone(),
            period_t1: data.periods()[witness.period_t1].clone(),
            period_t2: data.periods()[witness.period_t2].clone(),
            description: witness.describe(data),
        }
    }
}

/// Blocked flip combinations for one agent pair (binary general preferences).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockedPairReport {
    pub agents: [String; 2],
    /// Each entry is a `(flip_first, flip_second)` combination that leaves a
    /// cycle in the relabeled panel.
    pub combos: Vec<[bool; 2]>,
}

/// A found relabeling, with labels resolved.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentReport {
    Flips {
        flips: BTreeMap<String, bool>,
        /// Preference signs: -1 for flipped agents.
        signs: BTreeMap<String, i8>,
    },
    Maps {
        maps: BTreeMap<String, BTreeMap<String, String>>,
    },
}

impl AssignmentReport {
    pub fn new(data: &ChoiceDataset, assignment: &PermutationAssignment) -> Self {
        match assignment {
            PermutationAssignment::Flips(flips) => AssignmentReport::Flips {
                flips: data
                    .agents()
                    .iter()
                    .zip(flips)
                    .map(|(a, &f)| (a.clone(), f))
                    .collect(),
                signs: data
                    .agents()
                    .iter()
                    .zip(flips)
                    .map(|(a, &f)| (a.clone(), if f { -1 } else { 1 }))
                    .collect(),
            },
            PermutationAssignment::Maps(maps) => AssignmentReport::Maps {
                maps: data
                    .agents()
                    .iter()
                    .zip(maps)
                    .map(|(a, map)| {
                        let table = map
                            .iter()
                            .enumerate()
                            .map(|(from, &to)| {
                                (
                                    data.alternatives()[from].clone(),
                                    data.alternatives()[to].clone(),
                                )
                            })
                            .collect();
                        (a.clone(), table)
                    })
                    .collect(),
            },
        }
    }
}

/// Result of a `check` or `witness` run.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub model: String,
    pub rationalizable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle: Option<CycleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocked_flip_combos: Option<Vec<BlockedPairReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assignment: Option<AssignmentReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

impl CheckReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model: {}", self.model);
        let _ = writeln!(
            out,
            "verdict: {}",
            if self.rationalizable {
                "rationalizable"
            } else {
                "not rationalizable"
            }
        );
        if let Some(cycle) = &self.cycle {
            let _ = writeln!(out, "refutation: {}", cycle.description);
        }
        if let Some(blocked) = &self.blocked_flip_combos {
            let _ = writeln!(out, "all relabelings blocked:");
            for pair in blocked {
                let combos: Vec<String> = pair
                    .combos
                    .iter()
                    .map(|[a, b]| {
                        format!(
                            "({}, {})",
                            if *a { "flip" } else { "keep" },
                            if *b { "flip" } else { "keep" }
                        )
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    "  agents `{}`/`{}`: {}",
                    pair.agents[0],
                    pair.agents[1],
                    combos.join(", ")
                );
            }
        }
        if let Some(AssignmentReport::Flips { flips, .. }) = &self.assignment {
            let flipped: Vec<&str> = flips
                .iter()
                .filter(|(_, &f)| f)
                .map(|(a, _)| a.as_str())
                .collect();
            let _ = writeln!(
                out,
                "relabeling: {}",
                if flipped.is_empty() {
                    "identity (no agent flipped)".to_string()
                } else {
                    format!("flip {}", flipped.join(", "))
                }
            );
        }
        if let Some(AssignmentReport::Maps { maps }) = &self.assignment {
            let _ = writeln!(out, "relabeling:");
            for (agent, table) in maps {
                let moves: Vec<String> = table
                    .iter()
                    .map(|(from, to)| format!("{from}->{to}"))
                    .collect();
                let _ = writeln!(out, "  {agent}: {}", moves.join(", "));
            }
        }
        if let Some(witness) = &self.witness {
            let _ = writeln!(out, "witness (verified):");
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(witness).expect("witness serialization")
            );
        }
        out
    }
}

fn classes_by_label(data: &ChoiceDataset, preorder: &AgentPreorder) -> Vec<Vec<String>> {
    preorder
        .classes()
        .iter()
        .map(|class| class.iter().map(|&i| data.agents()[i].clone()).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsampleReportJson {
    pub value: String,
    pub rationalizable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle: Option<CycleReport>,
    pub consecutive_rationalizable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consecutive_cycle: Option<CycleReport>,
    /// Threshold classes, lowest first, as agent labels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ordering: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscriminationReportJson {
    pub key: String,
    pub favored: String,
    pub full_sample_rationalizable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_sample_cycle: Option<CycleReport>,
    pub subsamples: Vec<SubsampleReportJson>,
    pub statistical_flag: bool,
    pub statistical_strengthened: bool,
    pub statistical_explanation: String,
    pub taste_flag: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taste_pair: Option<[String; 2]>,
    pub taste_explanation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl DiscriminationReportJson {
    pub fn new(data: &ChoiceDataset, report: &DiscriminationReport) -> Self {
        // Subsample witnesses index into the filtered panel, whose period
        // labels are preserved, so rebuild each subsample for labeling.
        let subsamples = report
            .subsamples
            .iter()
            .map(|audit| {
                let sub = data
                    .subsample(&crate::dataset::SubsampleSelector {
                        key: report.key.clone(),
                        value: audit.value.clone(),
                    })
                    .expect("audited subsample exists");
                SubsampleReportJson {
                    value: audit.value.clone(),
                    rationalizable: audit.cycle.is_none(),
                    cycle: audit.cycle.as_ref().map(|w| CycleReport::new(&sub, w)),
                    consecutive_rationalizable: audit.consecutive_cycle.is_none(),
                    consecutive_cycle: audit
                        .consecutive_cycle
                        .as_ref()
                        .map(|w| CycleReport::new(&sub, w)),
                    ordering: audit.preorder.as_ref().map(|p| classes_by_label(&sub, p)),
                }
            })
            .collect();
        DiscriminationReportJson {
            key: report.key.clone(),
            favored: report.favored.clone(),
            full_sample_rationalizable: report.full_sample_cycle.is_none(),
            full_sample_cycle: report
                .full_sample_cycle
                .as_ref()
                .map(|w| CycleReport::new(data, w)),
            subsamples,
            statistical_flag: report.statistical.flagged,
            statistical_strengthened: report.statistical.strengthened,
            statistical_explanation: report.statistical.explanation.clone(),
            taste_flag: report.taste.flagged,
            taste_pair: report
                .taste
                .pair
                .map(|(a, b)| [data.agents()[a].clone(), data.agents()[b].clone()]),
            taste_explanation: report.taste.explanation.clone(),
            note: report.note.clone(),
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "covariate: {} (favored: {})", self.key, self.favored);
        let _ = writeln!(
            out,
            "full sample: {}",
            if self.full_sample_rationalizable {
                "rationalizable".to_string()
            } else {
                format!(
                    "not rationalizable: {}",
                    self.full_sample_cycle
                        .as_ref()
                        .expect("cycle present")
                        .description
                )
            }
        );
        for sub in &self.subsamples {
            let mut line = format!(
                "subsample {}={}: {}",
                self.key,
                sub.value,
                if sub.rationalizable {
                    "rationalizable"
                } else {
                    "not rationalizable"
                }
            );
            if let Some(ordering) = &sub.ordering {
                let rendered: Vec<String> = ordering
                    .iter()
                    .map(|c| format!("{{{}}}", c.join(", ")))
                    .collect();
                let _ = write!(line, "; thresholds {}", rendered.join(" < "));
            }
            if !sub.consecutive_rationalizable {
                line.push_str("; fails the adjacent-period test too");
            }
            let _ = writeln!(out, "{line}");
        }
        let _ = writeln!(
            out,
            "statistical flag: {}{}: {}",
            if self.statistical_flag { "yes" } else { "no" },
            if self.statistical_strengthened {
                " (strengthened)"
            } else {
                ""
            },
            self.statistical_explanation
        );
        let _ = writeln!(
            out,
            "taste flag: {}: {}",
            if self.taste_flag { "yes" } else { "no" },
            self.taste_explanation
        );
        if let Some(note) = &self.note {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterfactualReportJson {
    /// Profiles as alternative labels, agents in dataset order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admissible_profiles: Option<Vec<Vec<String>>>,
    /// Symbolic form: threshold classes, lowest first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_classes: Option<Vec<Vec<String>>>,
    pub admissible_count: String,
    pub total_possible: String,
    pub fixed: BTreeMap<String, String>,
}

impl CounterfactualReportJson {
    pub fn new(data: &ChoiceDataset, report: &CounterfactualReport) -> Self {
        let (admissible_profiles, threshold_classes) = match &report.admissible {
            AdmissibleProfiles::Enumerated(profiles) => (
                Some(
                    profiles
                        .iter()
                        .map(|p| {
                            p.iter()
                                .map(|&pos| data.alternatives()[pos].clone())
                                .collect()
                        })
                        .collect(),
                ),
                None,
            ),
            AdmissibleProfiles::Symbolic { classes } => (
                None,
                Some(
                    classes
                        .iter()
                        .map(|c| c.iter().map(|&i| data.agents()[i].clone()).collect())
                        .collect(),
                ),
            ),
        };
        CounterfactualReportJson {
            admissible_profiles,
            threshold_classes,
            admissible_count: report.count.to_string(),
            total_possible: report.total_possible.to_string(),
            fixed: report
                .fixed
                .iter()
                .map(|(&agent, &pos)| {
                    (
                        data.agents()[agent].clone(),
                        data.alternatives()[pos].clone(),
                    )
                })
                .collect(),
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "admissible next-period profiles: {} of {}",
            self.admissible_count, self.total_possible
        );
        if !self.fixed.is_empty() {
            let fixed: Vec<String> = self
                .fixed
                .iter()
                .map(|(a, alt)| format!("{a}={alt}"))
                .collect();
            let _ = writeln!(out, "fixed: {}", fixed.join(", "));
        }
        if let Some(profiles) = &self.admissible_profiles {
            for p in profiles {
                let _ = writeln!(out, "  {}", p.join(","));
            }
        }
        if let Some(classes) = &self.threshold_classes {
            let rendered: Vec<String> = classes
                .iter()
                .map(|c| format!("{{{}}}", c.join(", ")))
                .collect();
            let _ = writeln!(out, "threshold classes: {}", rendered.join(" < "));
            let _ = writeln!(
                out,
                "profiles are every split where all classes below a point take the first \
                 alternative and the rest the second, with one class mixed freely"
            );
        }
        out
    }
}

/// On-disk form of a general-preferences witness: the relabeling plus a
/// rationalization of the relabeled panel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneralWitnessFile {
    pub assignment: PermutationAssignment,
    pub witness: RationalizationWitness,
}

/// On-disk form of a private-signal witness, with signal labels made
/// explicit and enumerated joints attached on demand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComonotoneWitnessFile {
    pub witness: ComonotoneWitness,
    pub signal_labels: Vec<String>,
    pub realized_profile: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enumerated_joints: Option<Vec<EnumeratedJoint>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumeratedJoint {
    pub period: String,
    /// Profiles (signal labels per agent) with exact masses, per state.
    pub high_state: Vec<(Vec<String>, crate::rational::Rat)>,
    pub low_state: Vec<(Vec<String>, crate::rational::Rat)>,
}

impl ComonotoneWitnessFile {
    pub fn new(
        data: &ChoiceDataset,
        witness: ComonotoneWitness,
        enumerate: bool,
    ) -> Result<Self, ComonotoneError> {
        let i_count = data.n_agents();
        let signal_labels: Vec<String> = (0..=i_count).map(|k| format!("s{k}")).collect();
        let realized_profile: Vec<String> = (1..=i_count).map(|k| format!("s{k}")).collect();
        let enumerated_joints = if enumerate {
            let mut joints = Vec::new();
            for (t, step) in witness.experiments.iter().enumerate() {
                if let ExperimentStep::Informative(exp) = step {
                    let label = |profile: &[usize]| -> Vec<String> {
                        profile.iter().map(|&s| format!("s{s}")).collect()
                    };
                    let convert = |entries: Vec<(Vec<usize>, crate::rational::Rat)>| {
                        entries.into_iter().map(|(p, m)| (label(&p), m)).collect()
                    };
                    joints.push(EnumeratedJoint {
                        period: data.periods()[t].clone(),
                        high_state: convert(enumerate_joint(exp, true)?),
                        low_state: convert(enumerate_joint(exp, false)?),
                    });
                }
            }
            Some(joints)
        } else {
            None
        };
        Ok(ComonotoneWitnessFile {
            witness,
            signal_labels,
            realized_profile,
            enumerated_joints,
        })
    }
}

/// Stable pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}
