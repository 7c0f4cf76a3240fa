//! The same tests with more than two ordered alternatives: cycles compare
//! movement directions along the alternative order, and witnesses carry one
//! cutoff per adjacent pair of alternatives.
//!
//! ```bash
//! cargo run --example multiple_alternatives
//! ```

use comlearn::cycles::find_cycle;
use comlearn::dataset::ChoiceDataset;
use comlearn::witness::{construct_witness, verify_witness};

fn main() {
    // Two committee members grading proposals: fund, shortlist, or reject.
    let panel = ChoiceDataset::new(
        vec!["lena".into(), "marc".into()],
        vec!["r1".into(), "r2".into(), "r3".into()],
        vec!["fund".into(), "shortlist".into(), "reject".into()],
        vec![
            vec!["fund".into(), "shortlist".into()],
            vec!["shortlist".into(), "reject".into()],
            vec!["reject".into(), "reject".into()],
        ],
        Vec::new(),
    )
    .unwrap();

    match find_cycle(&panel) {
        Some(w) => println!("panel: not rationalizable\n  {}", w.describe(&panel)),
        None => {
            println!("panel: rationalizable with three ordered alternatives");
            let witness = construct_witness(&panel).unwrap();
            for (i, agent) in panel.agents().iter().enumerate() {
                let cuts: Vec<String> = (1..=4)
                    .map(|idx| witness.cutoffs.threshold(i, idx).to_string())
                    .collect();
                println!("  {agent}: cutoffs {}", cuts.join(" < "));
            }
            for (t, period) in panel.periods().iter().enumerate() {
                println!("  {period}: belief {}", witness.beliefs.beliefs[t]);
            }
            println!(
                "  verifier: {:?}",
                verify_witness(&panel, &witness).unwrap()
            );
        }
    }

    // Opposite movements refute the model regardless of how many steps apart
    // the two choices are on the alternative ladder.
    let refuted = ChoiceDataset::new(
        vec!["lena".into(), "marc".into()],
        vec!["r1".into(), "r2".into()],
        vec!["fund".into(), "shortlist".into(), "reject".into()],
        vec![
            vec!["fund".into(), "reject".into()],
            vec!["shortlist".into(), "shortlist".into()],
        ],
        Vec::new(),
    )
    .unwrap();
    match find_cycle(&refuted) {
        Some(w) => println!(
            "ladder panel: not rationalizable\n  {}",
            w.describe(&refuted)
        ),
        None => println!("ladder panel: rationalizable"),
    }
}
