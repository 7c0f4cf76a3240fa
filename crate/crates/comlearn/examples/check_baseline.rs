//! Decide whether a panel is rationalizable by common learning, and show the
//! refuting pattern when it is not.
//!
//! ```bash
//! cargo run --example check_baseline
//! ```

use comlearn::cycles::find_cycle;
use comlearn::dataset::ChoiceDataset;

fn main() {
    // Two reviewers, two cases: each moves in the opposite direction.
    let refuted = ChoiceDataset::from_csv("period,i,j\nt1,x,y\nt2,y,x\n").unwrap();
    match find_cycle(&refuted) {
        Some(witness) => {
            println!("panel 1: not rationalizable");
            println!("  {}", witness.describe(&refuted));
        }
        None => println!("panel 1: rationalizable"),
    }

    // Same choices, but the second reviewer never moves against the first.
    let clean = ChoiceDataset::from_csv("period,i,j\nt1,x,y\nt2,x,x\n").unwrap();
    match find_cycle(&clean) {
        Some(witness) => println!(
            "panel 2: not rationalizable\n  {}",
            witness.describe(&clean)
        ),
        None => {
            println!("panel 2: rationalizable");
            println!("  every belief path that explains agent i also accommodates agent j");
        }
    }
}
