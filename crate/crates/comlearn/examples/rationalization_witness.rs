//! Construct a complete rationalization witness and re-verify it.
//!
//! The witness carries cutoffs, utility tables, a prior, per-period beliefs,
//! transition matrices and per-period binary experiments: everything needed
//! to replay the observed choices, in exact rationals. The verifier re-checks
//! the Bayes chain, strict optimality and the threshold algebra.
//!
//! ```bash
//! cargo run --example rationalization_witness
//! ```

use comlearn::dataset::ChoiceDataset;
use comlearn::witness::{construct_witness, verify_witness};

fn main() {
    let csv = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/three_agent_panel.csv"
    ))
    .expect("bundled data file");
    let panel = ChoiceDataset::from_csv(&csv).unwrap();

    let witness = construct_witness(&panel).expect("panel is cycle-free");
    println!("cutoffs:");
    for (i, agent) in panel.agents().iter().enumerate() {
        println!("  {agent}: {}", witness.cutoffs.interior(i));
    }
    println!("prior: {}", witness.beliefs.prior);
    for (t, period) in panel.periods().iter().enumerate() {
        println!(
            "period {period}: belief {} via likelihoods ({}, {})",
            witness.beliefs.beliefs[t],
            witness.experiments[t].top_likelihood,
            witness.experiments[t].bottom_likelihood,
        );
    }
    println!("time-invariant state: {}", witness.is_time_invariant());

    let verdict = verify_witness(&panel, &witness).unwrap();
    println!("verifier: {verdict:?}");

    // The witness serializes with exact fractions and round-trips bit for bit.
    let json = serde_json::to_string_pretty(&witness).unwrap();
    println!("\nwitness JSON ({} bytes), e.g.:", json.len());
    for line in json.lines().take(8) {
        println!("  {line}");
    }
}
