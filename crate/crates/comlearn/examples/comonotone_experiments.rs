//! Private signals that agree on direction: the adjacent-period test, both
//! witness constructions, and the joint-experiment builder.
//!
//! ```bash
//! cargo run --example comonotone_experiments
//! ```

use comlearn::comonotone::{
    build_joint_experiment, construct_comonotone_invariant, construct_comonotone_varying,
    enumerate_joint, verify_comonotone, MarginalPair,
};
use comlearn::cycles::{find_consecutive_cycle, find_cycle};
use comlearn::dataset::ChoiceDataset;
use comlearn::rational::Rat;

fn main() {
    // A cycle between periods 1 and 3, but never between adjacent periods,
    // so private aligned signals with a fixed state explain the data even
    // though common beliefs cannot.
    let panel = ChoiceDataset::from_csv("period,a,b\nt1,x,y\nt2,x,x\nt3,y,x\n").unwrap();
    println!("gap-cycle panel:");
    println!("  common-belief cycle: {}", find_cycle(&panel).is_some());
    println!(
        "  adjacent-period cycle: {}",
        find_consecutive_cycle(&panel).is_some()
    );
    let witness = construct_comonotone_invariant(&panel, None, true).unwrap();
    println!(
        "  fixed-state witness verified: {:?}",
        verify_comonotone(&panel, &witness).unwrap()
    );

    // Adjacent opposed moves defeat the fixed state, but a moving state
    // explains anything: each period the state redraws below every threshold
    // and all agents receive strictly good news of different strengths.
    let opposed = ChoiceDataset::from_csv("period,i,j\nt1,x,y\nt2,y,x\n").unwrap();
    println!("\nadjacent opposed panel:");
    println!(
        "  fixed-state construction: {}",
        match construct_comonotone_invariant(&opposed, None, true) {
            Ok(_) => "succeeded (unexpected)".to_string(),
            Err(e) => format!("refused ({e})"),
        }
    );
    let moving = construct_comonotone_varying(&opposed, None).unwrap();
    println!(
        "  moving-state witness verified: {:?}",
        verify_comonotone(&opposed, &moving).unwrap()
    );

    // Lifting per-agent marginals into a full joint distribution.
    let marginals = MarginalPair {
        high: vec![Rat::new(3, 10), Rat::new(2, 10)],
        low: vec![Rat::new(1, 10), Rat::new(1, 10)],
    };
    let experiment = build_joint_experiment(&marginals).unwrap();
    println!("\njoint experiment for marginals (3/10, 1/10) and (2/10, 1/10):");
    println!("  epsilon: {}", experiment.epsilon);
    println!("  signals: {:?}", experiment.signal_labels());
    for (profile, mass) in enumerate_joint(&experiment, true).unwrap() {
        let names: Vec<String> = profile.iter().map(|s| format!("s{s}")).collect();
        println!("  P({} | good state) = {mass}", names.join(","));
    }
}
