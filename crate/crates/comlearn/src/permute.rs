//! Rationalizability with general preferences via per-agent relabelings.
//!
//! When agents may prefer to mismatch the state, optimal behavior is still a
//! cutoff rule after relabeling each agent's alternatives, so the data is
//! rationalizable exactly when some profile of per-agent permutations makes
//! the relabeled panel cycle-free. For binary data the permutations are flip
//! flags and the search reduces to 2-SAT over the observed joint patterns;
//! for more alternatives a guarded depth-first search over permutation
//! profiles with pairwise pruning does the job.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycles::pair_pattern_table;
use crate::dataset::ChoiceDataset;

#[derive(Debug, Error)]
pub enum PermuteError {
    #[error("dataset has {found} alternatives; the flip search needs binary data, use the permutation search instead")]
    NotBinary { found: usize },
    #[error("size guard exceeded: {reason}")]
    SizeGuard { reason: String },
    #[error("assignment shape mismatch: {reason}")]
    Shape { reason: String },
    #[error("map for agent index {agent} is not a bijection")]
    NotBijective { agent: usize },
}

/// Per-agent relabeling of the alternatives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationAssignment {
    /// Binary case: `true` flips an agent's two alternatives (the agent
    /// prefers to mismatch the state, sign -1).
    Flips(Vec<bool>),
    /// General case: `maps[i][pos]` is the new position of alternative `pos`.
    Maps(Vec<Vec<usize>>),
}

impl PermutationAssignment {
    pub fn identity_flips(n_agents: usize) -> Self {
        PermutationAssignment::Flips(vec![false; n_agents])
    }

    pub fn n_agents(&self) -> usize {
        match self {
            PermutationAssignment::Flips(f) => f.len(),
            PermutationAssignment::Maps(m) => m.len(),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            PermutationAssignment::Flips(f) => f.iter().all(|&b| !b),
            PermutationAssignment::Maps(m) => m
                .iter()
                .all(|map| map.iter().enumerate().all(|(k, &v)| k == v)),
        }
    }

    /// Preference signs: -1 for flipped agents, +1 otherwise (binary only).
    pub fn signs(&self) -> Option<Vec<i8>> {
        match self {
            PermutationAssignment::Flips(f) => {
                Some(f.iter().map(|&b| if b { -1 } else { 1 }).collect())
            }
            PermutationAssignment::Maps(_) => None,
        }
    }

    fn image(&self, agent: usize, pos: usize) -> usize {
        match self {
            PermutationAssignment::Flips(f) => {
                if f[agent] {
                    1 - pos
                } else {
                    pos
                }
            }
            PermutationAssignment::Maps(m) => m[agent][pos],
        }
    }

    fn validate(&self, data: &ChoiceDataset) -> Result<(), PermuteError> {
        if self.n_agents() != data.n_agents() {
            return Err(PermuteError::Shape {
                reason: format!(
                    "assignment covers {} agents, dataset has {}",
                    self.n_agents(),
                    data.n_agents()
                ),
            });
        }
        match self {
            PermutationAssignment::Flips(_) => {
                if data.n_alternatives() != 2 {
                    return Err(PermuteError::Shape {
                        reason: "flip assignment needs binary data".to_string(),
                    });
                }
            }
            PermutationAssignment::Maps(maps) => {
                let n = data.n_alternatives();
                for (agent, map) in maps.iter().enumerate() {
                    if map.len() != n {
                        return Err(PermuteError::NotBijective { agent });
                    }
                    let mut seen = vec![false; n];
                    for &v in map {
                        if v >= n || seen[v] {
                            return Err(PermuteError::NotBijective { agent });
                        }
                        seen[v] = true;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Relabels every entry of the panel through the assignment.
pub fn apply_permutation(
    data: &ChoiceDataset,
    assignment: &PermutationAssignment,
) -> Result<ChoiceDataset, PermuteError> {
    assignment.validate(data)?;
    let rows: Vec<Vec<String>> = (0..data.n_periods())
        .map(|t| {
            (0..data.n_agents())
                .map(|i| data.alternatives()[assignment.image(i, data.choice(i, t))].clone())
                .collect()
        })
        .collect();
    let covariates = (0..data.n_periods())
        .map(|t| data.covariate_record(t).clone())
        .collect();
    ChoiceDataset::new(
        data.agents().to_vec(),
        data.periods().to_vec(),
        data.alternatives().to_vec(),
        rows,
        covariates,
    )
    .map_err(|e| PermuteError::Shape {
        reason: e.to_string(),
    })
}

/// Blocked flip combinations per unordered agent pair.
pub type BlockedCombos = BTreeMap<(usize, usize), Vec<(bool, bool)>>;

/// Blocked flip combinations per unordered agent pair: combo `(a, b)` is
/// blocked when flipping `i` by `a` and `j` by `b` leaves both opposed joint
/// patterns in the pair's observed pattern set.
pub fn blocked_flip_combos(data: &ChoiceDataset) -> Result<BlockedCombos, PermuteError> {
    let table = pair_pattern_table(data).map_err(|_| PermuteError::NotBinary {
        found: data.n_alternatives(),
    })?;
    let mut blocked = BTreeMap::new();
    for (&(i, j), patterns) in &table {
        let mut combos = Vec::new();
        for a in [false, true] {
            for b in [false, true] {
                // After flips (a, b), pattern (u, v) becomes (u^a, v^b); the
                // relabeled set contains (x, y) and (y, x) exactly when the
                // original contains these two pre-images.
                let first = (a as usize, 1 - b as usize);
                let second = (1 - a as usize, b as usize);
                if patterns.contains(&first) && patterns.contains(&second) {
                    combos.push((a, b));
                }
            }
        }
        if !combos.is_empty() {
            blocked.insert((i, j), combos);
        }
    }
    Ok(blocked)
}

/// Finds the lexicographically least flip assignment whose relabeled panel is
/// cycle-free (agents in id order, unflipped preferred), or `None` when every
/// assignment is blocked. Binary data only.
pub fn solve_general_preferences_binary(
    data: &ChoiceDataset,
) -> Result<Option<PermutationAssignment>, PermuteError> {
    let blocked = blocked_flip_combos(data)?;
    let n = data.n_agents();
    let mut solver = TwoSat::new(n);
    for (&(i, j), combos) in &blocked {
        for &(a, b) in combos {
            // Forbid f_i = a && f_j = b.
            solver.add_clause((i, !a), (j, !b));
        }
    }
    if !solver.satisfiable() {
        return Ok(None);
    }
    let mut flips = Vec::with_capacity(n);
    for i in 0..n {
        solver.add_unit((i, false));
        if solver.satisfiable() {
            flips.push(false);
        } else {
            solver.pop_unit();
            solver.add_unit((i, true));
            debug_assert!(solver.satisfiable());
            flips.push(true);
        }
    }
    Ok(Some(PermutationAssignment::Flips(flips)))
}

/// First permutation profile, in lexicographic order over per-agent
/// permutations, whose relabeled panel is cycle-free. Guarded search: at most
/// 5 alternatives and 8 agents.
pub fn solve_general_preferences_multi(
    data: &ChoiceDataset,
) -> Result<Option<PermutationAssignment>, PermuteError> {
    let n = data.n_alternatives();
    let i_count = data.n_agents();
    if n > 5 || i_count > 8 {
        return Err(PermuteError::SizeGuard {
            reason: format!(
                "permutation search handles at most 5 alternatives and 8 agents; got {n} and {i_count}{}",
                if n == 2 { "; the binary flip search has no agent limit" } else { "" }
            ),
        });
    }

    // Joint patterns per agent pair; cycles are a pairwise property, so a
    // profile is clean exactly when every pair is.
    let mut patterns = BTreeMap::new();
    for i in 0..i_count {
        for j in i + 1..i_count {
            let mut set = BTreeSet::new();
            for t in 0..data.n_periods() {
                set.insert((data.choice(i, t), data.choice(j, t)));
            }
            patterns.insert((i, j), set);
        }
    }
    let perms = permutations_lex(n);

    fn pair_clean(pat: &BTreeSet<(usize, usize)>, pi: &[usize], pj: &[usize]) -> bool {
        for &(u1, v1) in pat {
            for &(u2, v2) in pat {
                if pi[u1].cmp(&pi[u2]) == Ordering::Greater && pj[v1].cmp(&pj[v2]) == Ordering::Less
                {
                    return false;
                }
            }
        }
        true
    }

    fn assign(
        agent: usize,
        chosen: &mut Vec<usize>,
        perms: &[Vec<usize>],
        patterns: &BTreeMap<(usize, usize), BTreeSet<(usize, usize)>>,
        i_count: usize,
    ) -> bool {
        if agent == i_count {
            return true;
        }
        'candidates: for (k, perm) in perms.iter().enumerate() {
            for prev in 0..agent {
                if let Some(pat) = patterns.get(&(prev, agent)) {
                    if !pair_clean(pat, &perms[chosen[prev]], perm) {
                        continue 'candidates;
                    }
                }
            }
            chosen.push(k);
            if assign(agent + 1, chosen, perms, patterns, i_count) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    let mut chosen = Vec::with_capacity(i_count);
    if assign(0, &mut chosen, &perms, &patterns, i_count) {
        Ok(Some(PermutationAssignment::Maps(
            chosen.into_iter().map(|k| perms[k].clone()).collect(),
        )))
    } else {
        Ok(None)
    }
}

/// All permutations of `0..n` in lexicographic order.
fn permutations_lex(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                current.push(v);
                go(n, current, used, out);
                current.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// 2-SAT over boolean variables with clauses `(v1 = a1) or (v2 = a2)`, solved
/// by strongly connected components of the implication graph. Unit clauses
/// back the lexicographic fixing loop.
struct TwoSat {
    n_vars: usize,
    clauses: Vec<((usize, bool), (usize, bool))>,
    units: Vec<(usize, bool)>,
}

impl TwoSat {
    fn new(n_vars: usize) -> Self {
        TwoSat {
            n_vars,
            clauses: Vec::new(),
            units: Vec::new(),
        }
    }

    fn add_clause(&mut self, l1: (usize, bool), l2: (usize, bool)) {
        self.clauses.push((l1, l2));
    }

    fn add_unit(&mut self, l: (usize, bool)) {
        self.units.push(l);
    }

    fn pop_unit(&mut self) {
        self.units.pop();
    }

    fn node(l: (usize, bool)) -> usize {
        2 * l.0 + l.1 as usize
    }

    fn negate(l: (usize, bool)) -> (usize, bool) {
        (l.0, !l.1)
    }

    fn satisfiable(&self) -> bool {
        let n_nodes = 2 * self.n_vars;
        let mut adjacency = vec![Vec::new(); n_nodes];
        for &(l1, l2) in &self.clauses {
            adjacency[Self::node(Self::negate(l1))].push(Self::node(l2));
            adjacency[Self::node(Self::negate(l2))].push(Self::node(l1));
        }
        for &l in &self.units {
            adjacency[Self::node(Self::negate(l))].push(Self::node(l));
        }
        let comp = tarjan_scc(&adjacency);
        (0..self.n_vars).all(|v| comp[2 * v] != comp[2 * v + 1])
    }
}

/// Iterative Tarjan strongly-connected components; returns a component id per
/// node.
fn tarjan_scc(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    const UNSET: usize = usize::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![UNSET; n];
    let mut comp = vec![UNSET; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;

    for start in 0..n {
        if index[start] != UNSET {
            continue;
        }
        let mut call_stack: Vec<(usize, usize)> = vec![(start, 0)];
        while let Some(&mut (v, ref mut edge)) = call_stack.last_mut() {
            if *edge == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *edge < adjacency[v].len() {
                let w = adjacency[v][*edge];
                *edge += 1;
                if index[w] == UNSET {
                    call_stack.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("scc stack");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
                call_stack.pop();
                if let Some(&mut (parent, _)) = call_stack.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                }
            }
        }
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::find_cycle;
    use crate::dataset::binary_dataset;

    fn opposed_pair() -> ChoiceDataset {
        binary_dataset(&["i", "j"], &[&["x", "y"], &["y", "x"]])
    }

    fn blocked_panel() -> ChoiceDataset {
        binary_dataset(
            &["i", "j"],
            &[&["x", "y"], &["y", "x"], &["x", "x"], &["y", "y"]],
        )
    }

    #[test]
    fn identity_permutation_fixes_nothing() {
        let data = opposed_pair();
        let same = apply_permutation(&data, &PermutationAssignment::identity_flips(2)).unwrap();
        assert_eq!(same, data);
    }

    #[test]
    fn flipping_both_agents_preserves_the_cycle() {
        let data = opposed_pair();
        let both =
            apply_permutation(&data, &PermutationAssignment::Flips(vec![true, true])).unwrap();
        assert_eq!(both.choice_label(0, 0), "y");
        assert_eq!(both.choice_label(1, 0), "x");
        assert_eq!(both.choice_label(0, 1), "x");
        assert_eq!(both.choice_label(1, 1), "y");
        assert!(find_cycle(&both).is_some());
    }

    #[test]
    fn flip_search_resolves_a_single_cycle() {
        let data = opposed_pair();
        let assignment = solve_general_preferences_binary(&data).unwrap().unwrap();
        // Lexicographically least: keep agent 0, flip agent 1.
        assert_eq!(assignment, PermutationAssignment::Flips(vec![false, true]));
        let permuted = apply_permutation(&data, &assignment).unwrap();
        assert!(find_cycle(&permuted).is_none());
        assert_eq!(permuted.choice_label(0, 0), "x");
        assert_eq!(permuted.choice_label(1, 0), "x");
        assert_eq!(permuted.choice_label(0, 1), "y");
        assert_eq!(permuted.choice_label(1, 1), "y");
        assert_eq!(assignment.signs(), Some(vec![1, -1]));
    }

    #[test]
    fn flipping_one_agent_moves_the_cycle_elsewhere() {
        // On the blocked panel, flipping the first agent removes the opposed
        // pair in periods 1-2 but creates one in periods 3-4.
        let data = blocked_panel();
        let flipped =
            apply_permutation(&data, &PermutationAssignment::Flips(vec![true, false])).unwrap();
        let expected: Vec<Vec<&str>> = vec![
            vec!["y", "y"],
            vec!["x", "x"],
            vec!["y", "x"],
            vec!["x", "y"],
        ];
        for (t, row) in expected.iter().enumerate() {
            for (i, cell) in row.iter().enumerate() {
                assert_eq!(flipped.choice_label(i, t), *cell);
            }
        }
        let w = find_cycle(&flipped).expect("cycle moved, not removed");
        assert_eq!((w.period_t1, w.period_t2), (2, 3));
    }

    #[test]
    fn fully_blocked_panel_has_no_flip_assignment() {
        let data = blocked_panel();
        assert!(solve_general_preferences_binary(&data).unwrap().is_none());
        let blocked = blocked_flip_combos(&data).unwrap();
        let combos = &blocked[&(0, 1)];
        assert_eq!(
            combos,
            &vec![(false, false), (false, true), (true, false), (true, true)]
        );
    }

    #[test]
    fn cycle_free_data_keeps_the_identity_assignment() {
        let data = binary_dataset(&["a", "b"], &[&["x", "y"], &["x", "x"]]);
        let assignment = solve_general_preferences_binary(&data).unwrap().unwrap();
        assert!(assignment.is_identity());
    }

    #[test]
    fn blocked_combos_mirror_when_columns_swap() {
        let data = binary_dataset(&["i", "j"], &[&["x", "y"], &["y", "x"], &["x", "x"]]);
        let swapped = binary_dataset(&["i", "j"], &[&["y", "x"], &["x", "y"], &["x", "x"]]);
        let lhs = blocked_flip_combos(&data).unwrap();
        let rhs = blocked_flip_combos(&swapped).unwrap();
        let mut combos: Vec<(bool, bool)> = lhs.get(&(0, 1)).cloned().unwrap_or_default();
        let mut mirrored: Vec<(bool, bool)> = rhs
            .get(&(0, 1))
            .cloned()
            .unwrap_or_default()
            .into_iter()
            .map(|(a, b)| (b, a))
            .collect();
        combos.sort();
        mirrored.sort();
        // Swapping the two columns mirrors each blocked combo.
        assert_eq!(combos, mirrored);
    }

    #[test]
    fn multi_search_matches_the_flip_search_on_binary_data() {
        let cases = [
            vec![vec!["x", "y"], vec!["y", "x"]],
            vec![
                vec!["x", "y"],
                vec!["y", "x"],
                vec!["x", "x"],
                vec!["y", "y"],
            ],
            vec![vec!["x", "x"], vec!["y", "x"]],
        ];
        for rows in cases {
            let row_refs: Vec<&[&str]> = rows.iter().map(Vec::as_slice).collect();
            let data = binary_dataset(&["i", "j"], &row_refs);
            let binary = solve_general_preferences_binary(&data).unwrap();
            let multi = solve_general_preferences_multi(&data).unwrap();
            assert_eq!(binary.is_some(), multi.is_some());
            if let Some(assignment) = multi {
                let permuted = apply_permutation(&data, &assignment).unwrap();
                assert!(find_cycle(&permuted).is_none());
            }
        }
    }

    #[test]
    fn single_agent_multi_search_returns_identity() {
        let data = ChoiceDataset::new(
            vec!["a".into()],
            vec!["t1".into(), "t2".into()],
            vec!["h".into(), "m".into(), "l".into()],
            vec![vec!["m".into()], vec!["h".into()]],
            Vec::new(),
        )
        .unwrap();
        let assignment = solve_general_preferences_multi(&data).unwrap().unwrap();
        assert!(assignment.is_identity());
    }

    #[test]
    fn multi_search_guard_rejects_oversized_instances() {
        let labels: Vec<String> = (0..9).map(|k| format!("a{k}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let row: Vec<&str> = vec!["x"; 9];
        let data = binary_dataset(&refs, &[&row]);
        assert!(matches!(
            solve_general_preferences_multi(&data),
            Err(PermuteError::SizeGuard { .. })
        ));
    }

    #[test]
    fn non_bijective_map_is_rejected() {
        let data = opposed_pair();
        let bad = PermutationAssignment::Maps(vec![vec![0, 0], vec![0, 1]]);
        assert!(matches!(
            apply_permutation(&data, &bad),
            Err(PermuteError::NotBijective { agent: 0 })
        ));
    }

    #[test]
    fn flip_search_routes_non_binary_data_to_the_permutation_search() {
        let data = ChoiceDataset::new(
            vec!["a".into()],
            vec!["t1".into()],
            vec!["h".into(), "m".into(), "l".into()],
            vec![vec!["m".into()]],
            Vec::new(),
        )
        .unwrap();
        assert!(matches!(
            solve_general_preferences_binary(&data),
            Err(PermuteError::NotBinary { found: 3 })
        ));
        assert!(solve_general_preferences_multi(&data).unwrap().is_some());
    }
}
