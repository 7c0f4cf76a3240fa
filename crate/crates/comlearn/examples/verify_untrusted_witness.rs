//! Witnesses are independent artifacts: anyone can re-check one against the
//! data without trusting the constructor. This example tampers with a valid
//! witness and shows the verifier naming the first violated clause.
//!
//! ```bash
//! cargo run --example verify_untrusted_witness
//! ```

use comlearn::dataset::ChoiceDataset;
use comlearn::rational::Rat;
use comlearn::witness::{construct_witness, verify_witness, BinaryExperiment};

fn main() {
    let panel = ChoiceDataset::from_csv("period,a,b\nt1,x,y\nt2,x,x\n").unwrap();
    let witness = construct_witness(&panel).unwrap();
    println!(
        "honest witness: {:?}",
        verify_witness(&panel, &witness).unwrap()
    );

    // The period-2 belief rises; flattening that period's likelihoods breaks
    // the Bayes chain.
    let mut broken = witness.clone();
    broken.experiments[1] = BinaryExperiment {
        top_likelihood: Rat::one_half(),
        bottom_likelihood: Rat::one_half(),
    };
    println!(
        "flat likelihoods, same beliefs: {:?}",
        verify_witness(&panel, &broken).unwrap()
    );

    // Wrong utility table: it no longer induces the claimed cutoffs.
    let mut broken = witness.clone();
    broken.utilities.per_agent[0][1].bottom = Rat::new(7, 8);
    println!(
        "tampered utility entry: {:?}",
        verify_witness(&panel, &broken).unwrap()
    );

    // Exact round-trip: serialize, reload, verify again.
    let json = serde_json::to_string(&witness).unwrap();
    let reloaded = serde_json::from_str(&json).unwrap();
    println!(
        "reloaded from JSON: {:?}",
        verify_witness(&panel, &reloaded).unwrap()
    );
}
