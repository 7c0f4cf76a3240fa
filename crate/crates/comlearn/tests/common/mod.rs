//! Shared helpers for the integration suites: a tiny deterministic RNG and
//! dataset generators. No seeds are read from the environment, so every run
//! is reproducible.

use comlearn::dataset::ChoiceDataset;

/// SplitMix64: small, fast, deterministic.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `0..bound` (bound > 0).
    pub fn below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for k in (1..items.len()).rev() {
            items.swap(k, self.below(k + 1));
        }
    }
}

pub fn agent_labels(count: usize) -> Vec<String> {
    (0..count).map(|k| format!("a{k}")).collect()
}

fn period_labels(count: usize) -> Vec<String> {
    (1..=count).map(|t| format!("t{t}")).collect()
}

fn alternative_labels(count: usize) -> Vec<String> {
    if count == 2 {
        vec!["x".to_string(), "y".to_string()]
    } else {
        (1..=count).map(|k| format!("alt{k}")).collect()
    }
}

/// Uniformly random panel.
pub fn random_dataset(rng: &mut Rng, agents: usize, periods: usize, alts: usize) -> ChoiceDataset {
    let alternatives = alternative_labels(alts);
    let rows: Vec<Vec<String>> = (0..periods)
        .map(|_| {
            (0..agents)
                .map(|_| alternatives[rng.below(alts)].clone())
                .collect()
        })
        .collect();
    ChoiceDataset::new(
        agent_labels(agents),
        period_labels(periods),
        alternatives,
        rows,
        Vec::new(),
    )
    .expect("random dataset is valid")
}

/// Panel generated by the threshold model itself, hence cycle-free: draw a
/// random strict ordering of all interior cutoff slots, drop a random belief
/// into one of the grid gaps each period, and read off every agent's choice.
pub fn random_model_dataset(
    rng: &mut Rng,
    agents: usize,
    periods: usize,
    alts: usize,
) -> ChoiceDataset {
    let per_agent = alts - 1;
    let slot_count = agents * per_agent;
    let mut ranks: Vec<usize> = (1..=slot_count).collect();
    rng.shuffle(&mut ranks);
    let cutoffs: Vec<Vec<usize>> = (0..agents)
        .map(|i| {
            let mut own: Vec<usize> = ranks[i * per_agent..(i + 1) * per_agent].to_vec();
            own.sort_unstable();
            own
        })
        .collect();

    let alternatives = alternative_labels(alts);
    let rows: Vec<Vec<String>> = (0..periods)
        .map(|_| {
            // Belief strictly between grid ranks `gap` and `gap + 1`.
            let gap = rng.below(slot_count + 1);
            (0..agents)
                .map(|i| {
                    let level = 1 + cutoffs[i].iter().filter(|&&c| c <= gap).count();
                    alternatives[alts - level].clone()
                })
                .collect()
        })
        .collect();
    ChoiceDataset::new(
        agent_labels(agents),
        period_labels(periods),
        alternatives,
        rows,
        Vec::new(),
    )
    .expect("model dataset is valid")
}
