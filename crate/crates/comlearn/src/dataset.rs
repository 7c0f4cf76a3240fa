//! Panel choice data: who chose what, when, plus optional per-period
//! covariates.
//!
//! A [`ChoiceDataset`] holds an `I × T` matrix of alternative indices. The
//! alternative list is ordered: the first-listed alternative is the one agents
//! pick at the highest beliefs, the last-listed at the lowest. For binary data
//! the default order is `x, y`, so `x` is the high-belief choice.
//!
//! Two interchange formats are supported:
//!
//! - CSV with a header `period,<agent>,...` (plus optional trailing
//!   `#covariate:<key>` columns) and an optional leading
//!   `#alternatives:a,b,...` comment line declaring the alternative order.
//! - JSON with `agents`, `periods`, `alternatives`, `choices` (row-major by
//!   period, cells are labels) and an optional `covariates` map keyed by
//!   period label.
//!
//! Periods are kept in file order; that order is treated as chronological by
//! the consecutive-cycle tests.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building or reading a dataset.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset needs at least one agent")]
    NoAgents,
    #[error("dataset needs at least two alternatives, found {found}")]
    TooFewAlternatives { found: usize },
    #[error("duplicate agent label `{label}`")]
    DuplicateAgent { label: String },
    #[error("duplicate period label `{label}`")]
    DuplicatePeriod { label: String },
    #[error("duplicate alternative label `{label}`")]
    DuplicateAlternative { label: String },
    #[error("invalid label `{label}`: {reason}")]
    BadLabel { label: String, reason: String },
    #[error("malformed header: {reason}")]
    BadHeader { reason: String },
    #[error("row {row} (period `{period}`) has {found} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        period: String,
        found: usize,
        expected: usize,
    },
    #[error("row {row}, column `{column}`: unknown alternative label `{label}`")]
    UnknownAlternative {
        row: usize,
        column: String,
        label: String,
    },
    #[error("choice matrix has {found} rows, expected one per period ({expected})")]
    WrongRowCount { found: usize, expected: usize },
    #[error("covariate key `{key}` is missing for period `{period}`")]
    MissingCovariate { key: String, period: String },
    #[error("unknown covariate key `{key}`")]
    UnknownCovariateKey { key: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Picks the sub-sequence of periods whose covariate `key` equals `value`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsampleSelector {
    pub key: String,
    pub value: String,
}

/// Immutable panel of observed choices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceDataset {
    agents: Vec<String>,
    periods: Vec<String>,
    alternatives: Vec<String>,
    /// `choices[t][i]` is the position (0-based) of agent `i`'s period-`t`
    /// choice in `alternatives`.
    choices: Vec<Vec<usize>>,
    /// Per-period covariate records; may be empty maps.
    covariates: Vec<BTreeMap<String, String>>,
}

const ALTERNATIVES_PREFIX: &str = "#alternatives:";
const COVARIATE_PREFIX: &str = "#covariate:";

fn check_label(label: &str, what: &str) -> Result<(), DatasetError> {
    if label.is_empty() {
        return Err(DatasetError::BadLabel {
            label: label.to_string(),
            reason: format!("{what} label may not be empty"),
        });
    }
    if label.starts_with('#') {
        return Err(DatasetError::BadLabel {
            label: label.to_string(),
            reason: format!("{what} label may not start with `#`"),
        });
    }
    Ok(())
}

impl ChoiceDataset {
    /// Builds a dataset from label matrices, validating every invariant.
    pub fn new(
        agents: Vec<String>,
        periods: Vec<String>,
        alternatives: Vec<String>,
        choice_labels: Vec<Vec<String>>,
        covariates: Vec<BTreeMap<String, String>>,
    ) -> Result<Self, DatasetError> {
        if agents.is_empty() {
            return Err(DatasetError::NoAgents);
        }
        if alternatives.len() < 2 {
            return Err(DatasetError::TooFewAlternatives {
                found: alternatives.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for a in &agents {
            check_label(a, "agent")?;
            if !seen.insert(a.clone()) {
                return Err(DatasetError::DuplicateAgent { label: a.clone() });
            }
        }
        seen.clear();
        for p in &periods {
            check_label(p, "period")?;
            if !seen.insert(p.clone()) {
                return Err(DatasetError::DuplicatePeriod { label: p.clone() });
            }
        }
        seen.clear();
        for alt in &alternatives {
            check_label(alt, "alternative")?;
            if alt.contains(',') {
                return Err(DatasetError::BadLabel {
                    label: alt.clone(),
                    reason: "alternative label may not contain `,`".to_string(),
                });
            }
            if !seen.insert(alt.clone()) {
                return Err(DatasetError::DuplicateAlternative { label: alt.clone() });
            }
        }
        if choice_labels.len() != periods.len() {
            return Err(DatasetError::WrongRowCount {
                found: choice_labels.len(),
                expected: periods.len(),
            });
        }
        let index: BTreeMap<&str, usize> = alternatives
            .iter()
            .enumerate()
            .map(|(k, a)| (a.as_str(), k))
            .collect();
        let mut choices = Vec::with_capacity(periods.len());
        for (t, row) in choice_labels.iter().enumerate() {
            if row.len() != agents.len() {
                return Err(DatasetError::RaggedRow {
                    row: t + 1,
                    period: periods[t].clone(),
                    found: row.len(),
                    expected: agents.len(),
                });
            }
            let mut out = Vec::with_capacity(row.len());
            for (i, cell) in row.iter().enumerate() {
                match index.get(cell.as_str()) {
                    Some(&pos) => out.push(pos),
                    None => {
                        return Err(DatasetError::UnknownAlternative {
                            row: t + 1,
                            column: agents[i].clone(),
                            label: cell.clone(),
                        })
                    }
                }
            }
            choices.push(out);
        }
        let mut covs = covariates;
        covs.resize(periods.len(), BTreeMap::new());
        for record in &covs {
            for (key, value) in record {
                // Empty cells mark absent covariates in CSV, so neither side
                // of a present entry may be empty.
                check_label(key, "covariate key")?;
                if value.is_empty() {
                    return Err(DatasetError::BadLabel {
                        label: key.clone(),
                        reason: "covariate value may not be empty".to_string(),
                    });
                }
            }
        }
        Ok(ChoiceDataset {
            agents,
            periods,
            alternatives,
            choices,
            covariates: covs,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn n_periods(&self) -> usize {
        self.periods.len()
    }

    pub fn n_alternatives(&self) -> usize {
        self.alternatives.len()
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn periods(&self) -> &[String] {
        &self.periods
    }

    pub fn alternatives(&self) -> &[String] {
        &self.alternatives
    }

    /// Position (0-based index into `alternatives`) chosen by `agent` at
    /// `period`.
    pub fn choice(&self, agent: usize, period: usize) -> usize {
        self.choices[period][agent]
    }

    pub fn choice_label(&self, agent: usize, period: usize) -> &str {
        &self.alternatives[self.choices[period][agent]]
    }

    /// Belief level of a position: 1-based, ascending in belief. The
    /// first-listed alternative has level `N` (picked at the highest beliefs),
    /// the last has level 1.
    pub fn level_of_position(&self, position: usize) -> usize {
        self.n_alternatives() - position
    }

    pub fn position_of_level(&self, level: usize) -> usize {
        self.n_alternatives() - level
    }

    /// Belief level chosen by `agent` at `period`.
    pub fn level(&self, agent: usize, period: usize) -> usize {
        self.level_of_position(self.choice(agent, period))
    }

    pub fn agent_index(&self, label: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == label)
    }

    pub fn alternative_index(&self, label: &str) -> Option<usize> {
        self.alternatives.iter().position(|a| a == label)
    }

    pub fn covariate(&self, period: usize, key: &str) -> Option<&str> {
        self.covariates[period].get(key).map(String::as_str)
    }

    pub fn covariate_record(&self, period: usize) -> &BTreeMap<String, String> {
        &self.covariates[period]
    }

    /// Distinct values taken by `key`; errors if any period lacks the key.
    pub fn covariate_values(&self, key: &str) -> Result<BTreeSet<String>, DatasetError> {
        let mut values = BTreeSet::new();
        for (t, record) in self.covariates.iter().enumerate() {
            match record.get(key) {
                Some(v) => {
                    values.insert(v.clone());
                }
                None => {
                    return Err(DatasetError::MissingCovariate {
                        key: key.to_string(),
                        period: self.periods[t].clone(),
                    })
                }
            }
        }
        if values.is_empty() && self.periods.is_empty() {
            return Err(DatasetError::UnknownCovariateKey {
                key: key.to_string(),
            });
        }
        Ok(values)
    }

    /// Restricts to the periods where the selector matches, preserving order.
    /// The selector key must be present for every period; a value matching no
    /// period yields an empty panel.
    pub fn subsample(&self, sel: &SubsampleSelector) -> Result<ChoiceDataset, DatasetError> {
        // Validates total key coverage as a side effect.
        self.covariate_values(&sel.key)?;
        let keep: Vec<usize> = (0..self.n_periods())
            .filter(|&t| self.covariates[t].get(&sel.key) == Some(&sel.value))
            .collect();
        Ok(ChoiceDataset {
            agents: self.agents.clone(),
            periods: keep.iter().map(|&t| self.periods[t].clone()).collect(),
            alternatives: self.alternatives.clone(),
            choices: keep.iter().map(|&t| self.choices[t].clone()).collect(),
            covariates: keep.iter().map(|&t| self.covariates[t].clone()).collect(),
        })
    }

    /// Copy of the panel with one extra period holding `profile` (positions).
    pub fn with_appended_period(&self, label: &str, profile: &[usize]) -> ChoiceDataset {
        assert_eq!(profile.len(), self.n_agents(), "profile shape mismatch");
        assert!(
            profile.iter().all(|&p| p < self.n_alternatives()),
            "profile position out of range"
        );
        let mut out = self.clone();
        out.periods.push(label.to_string());
        out.choices.push(profile.to_vec());
        out.covariates.push(BTreeMap::new());
        out
    }

    // ---- CSV ----

    pub fn from_csv(input: &str) -> Result<Self, DatasetError> {
        let mut alternatives = vec!["x".to_string(), "y".to_string()];
        let mut rest = input;
        // Only the alternative-order declaration is recognized as a comment.
        if let Some(first) = rest.lines().next() {
            if let Some(spec) = first
                .trim_end_matches('\r')
                .strip_prefix(ALTERNATIVES_PREFIX)
            {
                alternatives = spec.split(',').map(|s| s.trim().to_string()).collect();
                rest = match rest.split_once('\n') {
                    Some((_, tail)) => tail,
                    None => "",
                };
            } else if first.starts_with('#') {
                return Err(DatasetError::BadHeader {
                    reason: format!("unrecognized comment line `{first}`"),
                });
            }
        }

        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(rest.as_bytes());
        let mut records = reader.records();
        let header = match records.next() {
            Some(rec) => rec?,
            None => {
                return Err(DatasetError::BadHeader {
                    reason: "missing header row".to_string(),
                })
            }
        };
        let cells: Vec<&str> = header.iter().collect();
        if cells.first() != Some(&"period") {
            return Err(DatasetError::BadHeader {
                reason: "first header column must be `period`".to_string(),
            });
        }
        let mut agents = Vec::new();
        let mut cov_keys = Vec::new();
        for cell in &cells[1..] {
            if let Some(key) = cell.strip_prefix(COVARIATE_PREFIX) {
                cov_keys.push(key.to_string());
            } else if cov_keys.is_empty() {
                agents.push(cell.to_string());
            } else {
                return Err(DatasetError::BadHeader {
                    reason: format!("agent column `{cell}` appears after a covariate column"),
                });
            }
        }

        let expected = 1 + agents.len() + cov_keys.len();
        let mut periods = Vec::new();
        let mut rows = Vec::new();
        let mut covariates = Vec::new();
        for (idx, rec) in records.enumerate() {
            let rec = rec?;
            let row_no = idx + 1;
            let cells: Vec<&str> = rec.iter().collect();
            if cells.len() == 1 && cells[0].is_empty() {
                continue; // blank line
            }
            let period = cells.first().copied().unwrap_or("").to_string();
            if cells.len() != expected {
                return Err(DatasetError::RaggedRow {
                    row: row_no,
                    period,
                    found: cells.len().saturating_sub(1),
                    expected: expected - 1,
                });
            }
            periods.push(period);
            rows.push(
                cells[1..=agents.len()]
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>(),
            );
            let mut record = BTreeMap::new();
            for (k, key) in cov_keys.iter().enumerate() {
                let value = cells[1 + agents.len() + k];
                if !value.is_empty() {
                    record.insert(key.clone(), value.to_string());
                }
            }
            covariates.push(record);
        }
        ChoiceDataset::new(agents, periods, alternatives, rows, covariates)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(ALTERNATIVES_PREFIX);
        out.push_str(&self.alternatives.join(","));
        out.push('\n');

        let cov_keys: BTreeSet<&String> = self.covariates.iter().flat_map(|m| m.keys()).collect();
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        let mut header = vec!["period".to_string()];
        header.extend(self.agents.iter().cloned());
        header.extend(cov_keys.iter().map(|k| format!("{COVARIATE_PREFIX}{k}")));
        writer.write_record(&header).expect("csv write");
        for t in 0..self.n_periods() {
            let mut row = vec![self.periods[t].clone()];
            row.extend(
                self.choices[t]
                    .iter()
                    .map(|&pos| self.alternatives[pos].clone()),
            );
            row.extend(
                cov_keys
                    .iter()
                    .map(|k| self.covariates[t].get(*k).cloned().unwrap_or_default()),
            );
            writer.write_record(&row).expect("csv write");
        }
        out.push_str(&String::from_utf8(writer.into_inner().expect("csv flush")).expect("utf8"));
        out
    }

    // ---- JSON ----

    pub fn from_json(input: &str) -> Result<Self, DatasetError> {
        let raw: DatasetJson = serde_json::from_str(input)?;
        let mut covariates = vec![BTreeMap::new(); raw.periods.len()];
        if let Some(map) = raw.covariates {
            for (period, record) in map {
                match raw.periods.iter().position(|p| *p == period) {
                    Some(t) => covariates[t] = record,
                    None => {
                        return Err(DatasetError::BadHeader {
                            reason: format!("covariates reference unknown period `{period}`"),
                        })
                    }
                }
            }
        }
        ChoiceDataset::new(
            raw.agents,
            raw.periods,
            raw.alternatives,
            raw.choices,
            covariates,
        )
    }

    pub fn to_json(&self) -> String {
        let covariates: BTreeMap<String, BTreeMap<String, String>> = self
            .periods
            .iter()
            .zip(&self.covariates)
            .filter(|(_, record)| !record.is_empty())
            .map(|(p, record)| (p.clone(), record.clone()))
            .collect();
        let raw = DatasetJson {
            agents: self.agents.clone(),
            periods: self.periods.clone(),
            alternatives: self.alternatives.clone(),
            choices: self
                .choices
                .iter()
                .map(|row| row.iter().map(|&p| self.alternatives[p].clone()).collect())
                .collect(),
            covariates: if covariates.is_empty() {
                None
            } else {
                Some(covariates)
            },
        };
        serde_json::to_string_pretty(&raw).expect("dataset serialization")
    }
}

#[derive(Serialize, Deserialize)]
struct DatasetJson {
    agents: Vec<String>,
    periods: Vec<String>,
    alternatives: Vec<String>,
    choices: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    covariates: Option<BTreeMap<String, BTreeMap<String, String>>>,
}

/// Convenience constructor used heavily in tests and examples: binary `x`/`y`
/// data given as per-period label rows.
pub fn binary_dataset(agent_labels: &[&str], rows: &[&[&str]]) -> ChoiceDataset {
    let agents = agent_labels.iter().map(|s| s.to_string()).collect();
    let periods = (1..=rows.len()).map(|t| format!("t{t}")).collect();
    let choices = rows
        .iter()
        .map(|row| row.iter().map(|s| s.to_string()).collect())
        .collect();
    ChoiceDataset::new(
        agents,
        periods,
        vec!["x".to_string(), "y".to_string()],
        choices,
        Vec::new(),
    )
    .expect("valid binary dataset")
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_AGENT_CYCLE: &str = "period,i,j\nt1,x,y\nt2,y,x\n";

    #[test]
    fn parses_two_agent_csv() {
        let data = ChoiceDataset::from_csv(TWO_AGENT_CYCLE).unwrap();
        assert_eq!(data.agents(), ["i", "j"]);
        assert_eq!(data.n_periods(), 2);
        assert_eq!(data.alternatives(), ["x", "y"]);
        assert_eq!(data.choice_label(0, 0), "x");
        assert_eq!(data.choice_label(1, 0), "y");
        assert_eq!(data.choice_label(0, 1), "y");
        assert_eq!(data.choice_label(1, 1), "x");
    }

    #[test]
    fn header_only_means_zero_periods() {
        let data = ChoiceDataset::from_csv("period,i,j\n").unwrap();
        assert_eq!(data.n_periods(), 0);
        assert_eq!(data.n_agents(), 2);
    }

    #[test]
    fn alternative_order_line_is_honored() {
        let input = "#alternatives:yes,no\nperiod,a\nt1,no\n";
        let data = ChoiceDataset::from_csv(input).unwrap();
        assert_eq!(data.alternatives(), ["yes", "no"]);
        assert_eq!(data.choice(0, 0), 1);
        assert_eq!(data.level(0, 0), 1);
    }

    #[test]
    fn parse_errors_name_row_and_column() {
        let err = ChoiceDataset::from_csv("period,i,j\nt1,x,z\n").unwrap_err();
        match err {
            DatasetError::UnknownAlternative { row, column, label } => {
                assert_eq!(row, 1);
                assert_eq!(column, "j");
                assert_eq!(label, "z");
            }
            other => panic!("unexpected error {other}"),
        }
        let err = ChoiceDataset::from_csv("period,i,j\nt1,x\n").unwrap_err();
        assert!(matches!(err, DatasetError::RaggedRow { row: 1, .. }));
        let err = ChoiceDataset::from_csv("period,i,i\nt1,x,y\n").unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateAgent { .. }));
        let err = ChoiceDataset::from_csv("period,i\nt1,x\nt1,y\n").unwrap_err();
        assert!(matches!(err, DatasetError::DuplicatePeriod { .. }));
    }

    fn interview_panel() -> ChoiceDataset {
        let csv = "\
#alternatives:x,y
period,E1,E2,#covariate:sex
m1,x,x,m
m2,x,y,m
m3,y,y,m
f1,y,y,f
f2,y,x,f
f3,x,x,f
";
        ChoiceDataset::from_csv(csv).unwrap()
    }

    #[test]
    fn covariate_column_is_parsed() {
        let data = interview_panel();
        assert_eq!(data.n_periods(), 6);
        assert_eq!(data.covariate(0, "sex"), Some("m"));
        assert_eq!(data.covariate(4, "sex"), Some("f"));
        let values = data.covariate_values("sex").unwrap();
        assert_eq!(values.len(), 2);
    }

    #[test]
    fn subsample_filters_periods_in_order() {
        let data = interview_panel();
        let males = data
            .subsample(&SubsampleSelector {
                key: "sex".into(),
                value: "m".into(),
            })
            .unwrap();
        assert_eq!(males.periods(), ["m1", "m2", "m3"]);
        let e1: Vec<&str> = (0..3).map(|t| males.choice_label(0, t)).collect();
        let e2: Vec<&str> = (0..3).map(|t| males.choice_label(1, t)).collect();
        assert_eq!(e1, ["x", "x", "y"]);
        assert_eq!(e2, ["x", "y", "y"]);

        let females = data
            .subsample(&SubsampleSelector {
                key: "sex".into(),
                value: "f".into(),
            })
            .unwrap();
        let e1: Vec<&str> = (0..3).map(|t| females.choice_label(0, t)).collect();
        let e2: Vec<&str> = (0..3).map(|t| females.choice_label(1, t)).collect();
        assert_eq!(e1, ["y", "y", "x"]);
        assert_eq!(e2, ["y", "x", "x"]);
    }

    #[test]
    fn subsample_with_unmatched_value_is_empty() {
        let data = interview_panel();
        let none = data
            .subsample(&SubsampleSelector {
                key: "sex".into(),
                value: "other".into(),
            })
            .unwrap();
        assert_eq!(none.n_periods(), 0);
        assert_eq!(none.n_agents(), 2);
    }

    #[test]
    fn subsample_unknown_key_errors() {
        let data = interview_panel();
        let err = data
            .subsample(&SubsampleSelector {
                key: "age".into(),
                value: "1".into(),
            })
            .unwrap_err();
        assert!(matches!(err, DatasetError::MissingCovariate { .. }));
    }

    #[test]
    fn binary_covariate_partitions_periods() {
        let data = interview_panel();
        let m = data
            .subsample(&SubsampleSelector {
                key: "sex".into(),
                value: "m".into(),
            })
            .unwrap();
        let f = data
            .subsample(&SubsampleSelector {
                key: "sex".into(),
                value: "f".into(),
            })
            .unwrap();
        let mut all: Vec<&String> = m.periods().iter().chain(f.periods()).collect();
        all.sort();
        let mut expected: Vec<&String> = data.periods().iter().collect();
        expected.sort();
        assert_eq!(all, expected);
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let data = interview_panel();
        let back = ChoiceDataset::from_csv(&data.to_csv()).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn json_round_trip_is_identity() {
        let data = interview_panel();
        let back = ChoiceDataset::from_json(&data.to_json()).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn partial_covariate_coverage_round_trips() {
        let json = r#"{"agents":["a","b"],"periods":["t1","t2"],
                       "alternatives":["x","y"],
                       "choices":[["x","y"],["y","y"]],
                       "covariates":{"t1":{"k":"v"}}}"#;
        let data = ChoiceDataset::from_json(json).unwrap();
        assert_eq!(data.covariate(0, "k"), Some("v"));
        assert_eq!(data.covariate(1, "k"), None);
        let via_csv = ChoiceDataset::from_csv(&data.to_csv()).unwrap();
        assert_eq!(via_csv, data);
        let via_json = ChoiceDataset::from_json(&data.to_json()).unwrap();
        assert_eq!(via_json, data);
    }

    #[test]
    fn empty_covariate_values_are_rejected() {
        let json = r#"{"agents":["a"],"periods":["t1"],"alternatives":["x","y"],
                       "choices":[["x"]],"covariates":{"t1":{"k":""}}}"#;
        assert!(ChoiceDataset::from_json(json).is_err());
    }

    #[test]
    fn json_rejects_unknown_period_in_covariates() {
        let bad = r#"{"agents":["a"],"periods":["t1"],"alternatives":["x","y"],
                      "choices":[["x"]],"covariates":{"zz":{"k":"v"}}}"#;
        assert!(ChoiceDataset::from_json(bad).is_err());
    }
}
