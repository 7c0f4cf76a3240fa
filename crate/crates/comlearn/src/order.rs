//! Revealed threshold orderings extracted from cycle-free data, and their
//! numeric cutoff representations.
//!
//! For binary data, [`build_preorder`] ranks agents by how reluctantly they
//! pick the high-belief alternative: whenever agent `j` picks it, so does
//! every agent weakly below `j`. For any number of alternatives,
//! [`build_pair_relation`] builds the strict relation over `(agent, level)`
//! cutoff slots implied by the data, and [`assign_cutoffs`] turns a linear
//! extension of that relation into exact rational cutoffs on a uniform grid.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycles::{find_cycle, CycleWitness};
use crate::dataset::ChoiceDataset;
use crate::rational::Rat;

#[derive(Debug, Error)]
pub enum OrderError {
    #[error("choice data has a cycle, so the threshold relation is incomplete: {witness:?}")]
    HasCycle { witness: CycleWitness },
    #[error("operation requires binary data, dataset has {found} alternatives")]
    NotBinary { found: usize },
    #[error("cutoff relation contains a cycle through {certificate:?}")]
    CyclicRelation { certificate: Vec<(usize, usize)> },
    #[error("invalid cutoff profile: {reason}")]
    BadProfile { reason: String },
}

/// Total preorder over agents by revealed threshold, lowest threshold first.
///
/// Agents with identical choice columns share a class. `j` strictly above `i`
/// means every period in which `j` picks the high-belief alternative, `i`
/// does too, and not conversely.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentPreorder {
    classes: Vec<Vec<usize>>,
    strict_edges: BTreeSet<(usize, usize)>,
}

impl AgentPreorder {
    /// Equivalence classes in ascending threshold order.
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    /// Ordered pairs `(above, below)` of strictly ranked agents.
    pub fn strict_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.strict_edges
    }

    pub fn class_of(&self, agent: usize) -> usize {
        self.classes
            .iter()
            .position(|c| c.contains(&agent))
            .expect("agent in some class")
    }

    pub fn same_class(&self, a: usize, b: usize) -> bool {
        self.class_of(a) == self.class_of(b)
    }

    /// Threshold of `a` is at least that of `b`.
    pub fn weakly_above(&self, a: usize, b: usize) -> bool {
        self.class_of(a) >= self.class_of(b)
    }

    pub fn strictly_above(&self, a: usize, b: usize) -> bool {
        self.class_of(a) > self.class_of(b)
    }

    /// Readable summary such as `{E1} < {E2}` using dataset labels.
    pub fn describe(&self, data: &ChoiceDataset) -> String {
        self.classes
            .iter()
            .map(|class| {
                let names: Vec<&str> = class.iter().map(|&i| data.agents()[i].as_str()).collect();
                format!("{{{}}}", names.join(", "))
            })
            .collect::<Vec<_>>()
            .join(" < ")
    }
}

/// Builds the revealed threshold preorder of binary, cycle-free data.
pub fn build_preorder(data: &ChoiceDataset) -> Result<AgentPreorder, OrderError> {
    if data.n_alternatives() != 2 {
        return Err(OrderError::NotBinary {
            found: data.n_alternatives(),
        });
    }
    // Periods in which each agent picks the high-belief alternative.
    let high_sets: Vec<BTreeSet<usize>> = (0..data.n_agents())
        .map(|i| {
            (0..data.n_periods())
                .filter(|&t| data.choice(i, t) == 0)
                .collect()
        })
        .collect();

    let mut by_set: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (agent, set) in high_sets.iter().enumerate() {
        by_set
            .entry(set.iter().copied().collect())
            .or_default()
            .push(agent);
    }
    // Larger high-set = lower threshold; on cycle-free data the distinct sets
    // form a chain under inclusion.
    let mut keyed: Vec<(Vec<usize>, Vec<usize>)> = by_set.into_iter().collect();
    keyed.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
    for w in keyed.windows(2) {
        let (bigger, smaller) = (&w[0].0, &w[1].0);
        if !smaller.iter().all(|t| bigger.contains(t)) {
            let witness = find_cycle(data).expect("incomparable columns imply a cycle");
            return Err(OrderError::HasCycle { witness });
        }
    }

    let classes: Vec<Vec<usize>> = keyed.into_iter().map(|(_, agents)| agents).collect();
    let mut strict_edges = BTreeSet::new();
    for (lo, class_lo) in classes.iter().enumerate() {
        for class_hi in classes.iter().skip(lo + 1) {
            for &above in class_hi {
                for &below in class_lo {
                    strict_edges.insert((above, below));
                }
            }
        }
    }
    Ok(AgentPreorder {
        classes,
        strict_edges,
    })
}

/// Strict relation over `(agent, level)` cutoff slots, levels `1..=N`.
///
/// An edge `(a, b)` asserts that slot `a`'s cutoff must be strictly above slot
/// `b`'s. Per-agent chains order each agent's own cutoffs; cross edges arise
/// whenever one agent's observed upper cutoff must clear another agent's
/// observed lower cutoff in the same period. The relation is acyclic exactly
/// when the data has no cycles.
#[derive(Debug, Clone)]
pub struct PairRelation {
    n_agents: usize,
    n_alternatives: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl PairRelation {
    pub fn node(&self, agent: usize, level: usize) -> usize {
        debug_assert!((1..=self.n_alternatives).contains(&level));
        agent * self.n_alternatives + (level - 1)
    }

    pub fn decode(&self, node: usize) -> (usize, usize) {
        (node / self.n_alternatives, node % self.n_alternatives + 1)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_agents * self.n_alternatives
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_alternatives(&self) -> usize {
        self.n_alternatives
    }

    /// Edges as `(above, below)` node ids.
    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, above: (usize, usize), below: (usize, usize)) -> bool {
        self.edges
            .contains(&(self.node(above.0, above.1), self.node(below.0, below.1)))
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle_certificate().is_none()
    }

    /// A directed cycle of `(agent, level)` slots, if one exists.
    pub fn find_cycle_certificate(&self) -> Option<Vec<(usize, usize)>> {
        let n = self.n_nodes();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adjacency[a].push(b);
        }
        // Iterative DFS with colors: 0 unseen, 1 on stack, 2 done.
        let mut color = vec![0u8; n];
        let mut parent = vec![usize::MAX; n];
        for start in 0..n {
            if color[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            color[start] = 1;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if *next < adjacency[node].len() {
                    let succ = adjacency[node][*next];
                    *next += 1;
                    match color[succ] {
                        0 => {
                            color[succ] = 1;
                            parent[succ] = node;
                            stack.push((succ, 0));
                        }
                        1 => {
                            // Found a back edge: walk parents to rebuild the loop.
                            let mut cycle = vec![self.decode(succ)];
                            let mut cur = node;
                            while cur != succ {
                                cycle.push(self.decode(cur));
                                cur = parent[cur];
                            }
                            cycle.reverse();
                            return Some(cycle);
                        }
                        _ => {}
                    }
                } else {
                    color[node] = 2;
                    stack.pop();
                }
            }
        }
        None
    }
}

/// Builds the cutoff-slot relation implied by the data.
pub fn build_pair_relation(data: &ChoiceDataset) -> PairRelation {
    let n = data.n_alternatives();
    let mut rel = PairRelation {
        n_agents: data.n_agents(),
        n_alternatives: n,
        edges: BTreeSet::new(),
    };
    for i in 0..data.n_agents() {
        for level in 2..=n {
            rel.edges
                .insert((rel.node(i, level), rel.node(i, level - 1)));
        }
    }
    for t in 0..data.n_periods() {
        for i in 0..data.n_agents() {
            let level_i = data.level(i, t);
            if level_i + 1 > n {
                continue; // the upper cutoff is the fixed sentinel 1
            }
            for j in 0..data.n_agents() {
                if i == j {
                    continue;
                }
                rel.edges
                    .insert((rel.node(i, level_i + 1), rel.node(j, data.level(j, t))));
            }
        }
    }
    rel
}

/// Exact rational cutoffs `0 = c_{i,1} < c_{i,2} < ... < c_{i,N+1} = 1` per
/// agent. An agent choosing belief level `l` requires the common belief to
/// lie strictly between `c_{i,l}` and `c_{i,l+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutoffProfile {
    cuts: Vec<Vec<Rat>>,
}

impl CutoffProfile {
    pub fn from_rows(cuts: Vec<Vec<Rat>>) -> Result<Self, OrderError> {
        let profile = CutoffProfile { cuts };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), OrderError> {
        let bad = |reason: String| OrderError::BadProfile { reason };
        if self.cuts.is_empty() {
            return Err(bad("no agents".to_string()));
        }
        let len = self.cuts[0].len();
        if len < 3 {
            return Err(bad("need at least two alternatives".to_string()));
        }
        for (i, row) in self.cuts.iter().enumerate() {
            if row.len() != len {
                return Err(bad(format!("agent {i} has a different cutoff count")));
            }
            if row[0] != Rat::zero() || row[len - 1] != Rat::one() {
                return Err(bad(format!("agent {i} boundary cutoffs must be 0 and 1")));
            }
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(bad(format!("agent {i} cutoffs not strictly increasing")));
                }
            }
        }
        Ok(())
    }

    pub fn n_agents(&self) -> usize {
        self.cuts.len()
    }

    /// Number of alternatives the profile covers.
    pub fn n_levels(&self) -> usize {
        self.cuts[0].len() - 1
    }

    /// Cutoff with 1-based index `1..=N+1`; index 1 is the sentinel 0.
    pub fn threshold(&self, agent: usize, index: usize) -> &Rat {
        &self.cuts[agent][index - 1]
    }

    /// Lower cutoff of belief level `level`.
    pub fn lower(&self, agent: usize, level: usize) -> &Rat {
        self.threshold(agent, level)
    }

    /// Upper cutoff of belief level `level`.
    pub fn upper(&self, agent: usize, level: usize) -> &Rat {
        self.threshold(agent, level + 1)
    }

    /// The single interior cutoff of a binary profile.
    pub fn interior(&self, agent: usize) -> &Rat {
        assert_eq!(self.n_levels(), 2, "interior() is for binary profiles");
        &self.cuts[agent][1]
    }

    pub fn rows(&self) -> &[Vec<Rat>] {
        &self.cuts
    }
}

/// Assigns numeric cutoffs from a topological linear extension of the slot
/// relation. Interior slots receive `rank / (R + 1)` on a uniform grid, ranks
/// ascending from the bottom of the extension; ties between incomparable
/// slots break by `(agent, level)`.
pub fn assign_cutoffs(rel: &PairRelation) -> Result<CutoffProfile, OrderError> {
    let n_nodes = rel.n_nodes();
    let mut out_remaining = vec![0usize; n_nodes];
    let mut rev = vec![Vec::new(); n_nodes];
    for &(above, below) in rel.edges() {
        out_remaining[above] += 1;
        rev[below].push(above);
    }
    let mut heap: BinaryHeap<Reverse<usize>> = (0..n_nodes)
        .filter(|&v| out_remaining[v] == 0)
        .map(Reverse)
        .collect();

    let interior_total = rel.n_agents() * (rel.n_alternatives() - 1);
    let denom = (interior_total + 1) as i64;
    let mut values: Vec<Option<Rat>> = vec![None; n_nodes];
    let mut rank = 0i64;
    let mut placed = 0usize;
    while let Some(Reverse(node)) = heap.pop() {
        placed += 1;
        let (_, level) = rel.decode(node);
        if level >= 2 {
            rank += 1;
            values[node] = Some(Rat::new(rank, denom));
        }
        for &pred in &rev[node] {
            out_remaining[pred] -= 1;
            if out_remaining[pred] == 0 {
                heap.push(Reverse(pred));
            }
        }
    }
    if placed < n_nodes {
        let certificate = rel
            .find_cycle_certificate()
            .expect("unplaced nodes imply a relation cycle");
        return Err(OrderError::CyclicRelation { certificate });
    }

    let n = rel.n_alternatives();
    let cuts = (0..rel.n_agents())
        .map(|agent| {
            let mut row = Vec::with_capacity(n + 1);
            row.push(Rat::zero());
            for level in 2..=n {
                row.push(
                    values[rel.node(agent, level)]
                        .clone()
                        .expect("interior value"),
                );
            }
            row.push(Rat::one());
            row
        })
        .collect();
    CutoffProfile::from_rows(cuts)
}
