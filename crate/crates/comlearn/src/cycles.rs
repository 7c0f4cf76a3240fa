//! Detection of the forbidden choice patterns that refute common learning.
//!
//! A *cycle* is a pair of agents and a pair of periods between which the two
//! agents' choices move in strictly opposite directions along the alternative
//! order. A *consecutive cycle* is the same pattern at adjacent periods in
//! dataset order. Cycle-free data is rationalizable by the common-belief
//! model; consecutive-cycle-free data by the private co-monotone-signal model
//! with a fixed state.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::ChoiceDataset;

#[derive(Debug, Error)]
pub enum CycleError {
    #[error("operation requires binary data, dataset has {found} alternatives")]
    NotBinary { found: usize },
}

/// Which detector produced a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleKind {
    General,
    Consecutive,
}

/// Explicit refutation: `agent_i`'s choice index strictly decreases from
/// `period_t1` to `period_t2` (it moves toward the first-listed alternative)
/// while `agent_j`'s strictly increases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleWitness {
    pub agent_i: usize,
    pub agent_j: usize,
    pub period_t1: usize,
    pub period_t2: usize,
    pub kind: CycleKind,
}

impl CycleWitness {
    /// Human-readable description using dataset labels.
    pub fn describe(&self, data: &ChoiceDataset) -> String {
        format!(
            "agents `{}` and `{}` move in opposite directions between periods `{}` and `{}` \
             ({}: {} -> {}, {}: {} -> {})",
            data.agents()[self.agent_i],
            data.agents()[self.agent_j],
            data.periods()[self.period_t1],
            data.periods()[self.period_t2],
            data.agents()[self.agent_i],
            data.choice_label(self.agent_i, self.period_t1),
            data.choice_label(self.agent_i, self.period_t2),
            data.agents()[self.agent_j],
            data.choice_label(self.agent_j, self.period_t1),
            data.choice_label(self.agent_j, self.period_t2),
        )
    }
}

fn witness_at(data: &ChoiceDataset, t1: usize, t2: usize, kind: CycleKind) -> Option<CycleWitness> {
    // Lexicographically first (i, j): the conditions on the two roles are
    // independent, so the minima can be found separately.
    let mut down = None; // choice index strictly decreases
    let mut up = None; // choice index strictly increases
    for agent in 0..data.n_agents() {
        let a = data.choice(agent, t1);
        let b = data.choice(agent, t2);
        if down.is_none() && a > b {
            down = Some(agent);
        }
        if up.is_none() && a < b {
            up = Some(agent);
        }
        if down.is_some() && up.is_some() {
            break;
        }
    }
    match (down, up) {
        (Some(agent_i), Some(agent_j)) => Some(CycleWitness {
            agent_i,
            agent_j,
            period_t1: t1,
            period_t2: t2,
            kind,
        }),
        _ => None,
    }
}

/// Binary fast path: a cycle exists exactly when the agents' sets of
/// high-choice periods fail to nest. Linear in the panel size.
fn binary_cycle_exists(data: &ChoiceDataset) -> bool {
    let blocks = data.n_periods().div_ceil(64);
    let mut columns: Vec<(u32, Vec<u64>)> = (0..data.n_agents())
        .map(|i| {
            let mut bits = vec![0u64; blocks];
            let mut ones = 0u32;
            for t in 0..data.n_periods() {
                if data.choice(i, t) == 0 {
                    bits[t / 64] |= 1 << (t % 64);
                    ones += 1;
                }
            }
            (ones, bits)
        })
        .collect();
    columns.sort_unstable_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    columns.dedup_by(|a, b| a.1 == b.1);
    // Distinct sets sorted by size nest exactly when each contains the next.
    columns.windows(2).any(|w| {
        let (bigger, smaller) = (&w[0].1, &w[1].1);
        smaller.iter().zip(bigger).any(|(s, b)| s & !b != 0)
    })
}

/// Finds a cycle if one exists, returning the lexicographically first witness
/// by `(t1, t2, i, j)`. `None` means the data is rationalizable by the
/// common-belief model.
pub fn find_cycle(data: &ChoiceDataset) -> Option<CycleWitness> {
    if data.n_alternatives() == 2 && !binary_cycle_exists(data) {
        return None;
    }
    let t_count = data.n_periods();
    for t1 in 0..t_count {
        for t2 in t1 + 1..t_count {
            if let Some(w) = witness_at(data, t1, t2, CycleKind::General) {
                return Some(w);
            }
        }
    }
    None
}

/// Finds a cycle between adjacent periods, scanning periods in order.
pub fn find_consecutive_cycle(data: &ChoiceDataset) -> Option<CycleWitness> {
    for t in 0..data.n_periods().saturating_sub(1) {
        if let Some(w) = witness_at(data, t, t + 1, CycleKind::Consecutive) {
            return Some(w);
        }
    }
    None
}

/// Joint choice pairs observed for each unordered agent pair.
pub type PairPatternTable = BTreeMap<(usize, usize), BTreeSet<(usize, usize)>>;

/// For binary data, the set of joint choice pairs `(choice_i, choice_j)`
/// (positions, so `0 = x`, `1 = y`) observed for every unordered agent pair.
///
/// A cycle exists if and only if some pair's set contains both `(0, 1)` and
/// `(1, 0)`. This is the precomputation behind the flip-search clauses.
pub fn pair_pattern_table(data: &ChoiceDataset) -> Result<PairPatternTable, CycleError> {
    if data.n_alternatives() != 2 {
        return Err(CycleError::NotBinary {
            found: data.n_alternatives(),
        });
    }
    let mut table = BTreeMap::new();
    for i in 0..data.n_agents() {
        for j in i + 1..data.n_agents() {
            let mut set = BTreeSet::new();
            for t in 0..data.n_periods() {
                set.insert((data.choice(i, t), data.choice(j, t)));
            }
            table.insert((i, j), set);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::binary_dataset;

    /// Quadruple-scan oracle: checks every (i, j, t1, t2) directly.
    pub(crate) fn quadruple_scan(data: &ChoiceDataset) -> Option<CycleWitness> {
        let mut best: Option<CycleWitness> = None;
        for i in 0..data.n_agents() {
            for j in 0..data.n_agents() {
                for t1 in 0..data.n_periods() {
                    for t2 in 0..data.n_periods() {
                        if t1 == t2 {
                            continue;
                        }
                        if data.choice(i, t1) > data.choice(i, t2)
                            && data.choice(j, t1) < data.choice(j, t2)
                        {
                            let key = (t1, t2, i, j);
                            let better = match &best {
                                Some(b) => key < (b.period_t1, b.period_t2, b.agent_i, b.agent_j),
                                None => true,
                            };
                            if better {
                                best = Some(CycleWitness {
                                    agent_i: i,
                                    agent_j: j,
                                    period_t1: t1,
                                    period_t2: t2,
                                    kind: CycleKind::General,
                                });
                            }
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn opposite_moves_form_a_cycle() {
        let data = binary_dataset(&["i", "j"], &[&["x", "y"], &["y", "x"]]);
        let w = find_cycle(&data).expect("cycle expected");
        // Agent `j` moves y -> x (index decreases), agent `i` moves x -> y.
        assert_eq!(
            (w.agent_i, w.agent_j, w.period_t1, w.period_t2),
            (1, 0, 0, 1)
        );
        assert_eq!(w.kind, CycleKind::General);
    }

    #[test]
    fn single_agent_data_has_no_cycle() {
        let data = binary_dataset(&["solo"], &[&["x"], &["y"], &["x"], &["y"]]);
        assert!(find_cycle(&data).is_none());
        assert!(find_consecutive_cycle(&data).is_none());
    }

    #[test]
    fn three_agent_monotone_panel_has_no_cycle() {
        let data = binary_dataset(&["i", "j", "k"], &[&["x", "y", "y"], &["x", "x", "y"]]);
        assert!(find_cycle(&data).is_none());
    }

    #[test]
    fn gap_cycle_is_not_consecutive() {
        // Periods 1 and 3 oppose, but no adjacent pair does.
        let data = binary_dataset(&["a", "b"], &[&["x", "y"], &["x", "x"], &["y", "x"]]);
        assert!(find_cycle(&data).is_some());
        assert!(find_consecutive_cycle(&data).is_none());
        // Exhaustive adjacent-pair scan agrees.
        for t in 0..data.n_periods() - 1 {
            assert!(witness_at(&data, t, t + 1, CycleKind::Consecutive).is_none());
        }
    }

    #[test]
    fn adjacent_opposite_moves_are_consecutive() {
        let data = binary_dataset(&["i", "j"], &[&["x", "y"], &["y", "x"]]);
        let w = find_consecutive_cycle(&data).expect("consecutive cycle");
        assert_eq!(w.kind, CycleKind::Consecutive);
        assert_eq!((w.period_t1, w.period_t2), (0, 1));
    }

    #[test]
    fn constant_data_has_no_consecutive_cycle() {
        let data = binary_dataset(&["a", "b"], &[&["x", "y"], &["x", "y"], &["x", "y"]]);
        assert!(find_consecutive_cycle(&data).is_none());
    }

    #[test]
    fn consecutive_detection_works_on_three_alternatives() {
        // a steps down one rung while b steps up, in adjacent periods.
        let data = crate::dataset::ChoiceDataset::new(
            vec!["a".into(), "b".into()],
            vec!["t1".into(), "t2".into()],
            vec!["hi".into(), "mid".into(), "lo".into()],
            vec![
                vec!["hi".into(), "lo".into()],
                vec!["mid".into(), "mid".into()],
            ],
            Vec::new(),
        )
        .unwrap();
        let w = find_consecutive_cycle(&data).expect("adjacent opposite rungs");
        assert_eq!((w.agent_i, w.agent_j), (1, 0));
    }

    #[test]
    fn empty_and_single_period_data_are_clean() {
        let data = binary_dataset(&["a", "b"], &[]);
        assert!(find_cycle(&data).is_none());
        let data = binary_dataset(&["a", "b"], &[&["x", "y"]]);
        assert!(find_cycle(&data).is_none());
        assert!(find_consecutive_cycle(&data).is_none());
    }

    #[test]
    fn pattern_table_matches_cycle_existence() {
        let data = binary_dataset(&["i", "j"], &[&["x", "y"], &["y", "x"]]);
        let table = pair_pattern_table(&data).unwrap();
        let set = &table[&(0, 1)];
        assert!(set.contains(&(0, 1)) && set.contains(&(1, 0)));

        let dup = binary_dataset(&["a", "b"], &[&["x", "x"], &["y", "y"]]);
        let table = pair_pattern_table(&dup).unwrap();
        assert!(table[&(0, 1)].iter().all(|p| p == &(0, 0) || p == &(1, 1)));
        assert!(find_cycle(&dup).is_none());
    }

    #[test]
    fn interview_panel_pair_shows_both_opposed_patterns() {
        let data = crate::dataset::ChoiceDataset::from_csv(
            "#alternatives:x,y\nperiod,E1,E2,#covariate:sex\nm1,x,x,m\nm2,x,y,m\nm3,y,y,m\nf1,y,y,f\nf2,y,x,f\nf3,x,x,f\n",
        )
        .unwrap();
        let table = pair_pattern_table(&data).unwrap();
        let set = &table[&(0, 1)];
        // m2 contributes (x, y), f2 contributes (y, x).
        assert!(set.contains(&(0, 1)) && set.contains(&(1, 0)));
    }

    #[test]
    fn pattern_table_rejects_non_binary_data() {
        let data = crate::dataset::ChoiceDataset::new(
            vec!["a".into()],
            vec!["t1".into()],
            vec!["x".into(), "y".into(), "z".into()],
            vec![vec!["z".into()]],
            Vec::new(),
        )
        .unwrap();
        assert!(matches!(
            pair_pattern_table(&data),
            Err(CycleError::NotBinary { found: 3 })
        ));
    }

    #[test]
    fn detector_matches_quadruple_scan_on_small_instances() {
        // Deterministic pseudo-random sweep over small shapes.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..300 {
            let i = 1 + (next() % 4) as usize;
            let t = (next() % 5) as usize;
            let labels: Vec<String> = (0..i).map(|k| format!("a{k}")).collect();
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            let rows: Vec<Vec<&str>> = (0..t)
                .map(|_| {
                    (0..i)
                        .map(|_| if next() % 2 == 0 { "x" } else { "y" })
                        .collect()
                })
                .collect();
            let row_refs: Vec<&[&str]> = rows.iter().map(Vec::as_slice).collect();
            let data = binary_dataset(&refs, &row_refs);
            assert_eq!(find_cycle(&data), quadruple_scan(&data));
        }
    }
}
