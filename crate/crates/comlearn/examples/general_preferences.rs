//! Rationalizability when agents may prefer to mismatch the state: search
//! for per-agent relabelings that remove every cycle.
//!
//! ```bash
//! cargo run --example general_preferences
//! ```

use comlearn::cycles::find_cycle;
use comlearn::dataset::ChoiceDataset;
use comlearn::permute::{apply_permutation, blocked_flip_combos, solve_general_preferences_binary};

fn main() {
    // Opposed moves alone: flipping one agent's labels removes the cycle.
    let fixable = ChoiceDataset::from_csv("period,i,j\nt1,x,y\nt2,y,x\n").unwrap();
    match solve_general_preferences_binary(&fixable).unwrap() {
        Some(assignment) => {
            println!("panel 1: rationalizable with general preferences");
            println!("  signs: {:?}", assignment.signs().unwrap());
            let relabeled = apply_permutation(&fixable, &assignment).unwrap();
            println!(
                "  relabeled panel is cycle-free: {}",
                find_cycle(&relabeled).is_none()
            );
        }
        None => println!("panel 1: not rationalizable under any relabeling"),
    }

    // Adding an agreeing period and a disagreeing period blocks every flip
    // combination: fixing the first cycle always creates another.
    let csv = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/blocked_panel.csv"
    ))
    .expect("bundled data file");
    let blocked = ChoiceDataset::from_csv(&csv).unwrap();
    match solve_general_preferences_binary(&blocked).unwrap() {
        Some(_) => println!("panel 2: unexpectedly rationalizable"),
        None => {
            println!("panel 2: not rationalizable under any relabeling");
            for ((i, j), combos) in blocked_flip_combos(&blocked).unwrap() {
                println!(
                    "  blocked combos for `{}`/`{}`: {:?}",
                    blocked.agents()[i],
                    blocked.agents()[j],
                    combos
                );
            }
        }
    }
}
