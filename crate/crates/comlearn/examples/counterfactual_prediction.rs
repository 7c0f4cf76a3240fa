//! Predict which next-period action profiles the observed panel admits, and
//! sharpen the prediction by conditioning on one agent's announced choice.
//!
//! ```bash
//! cargo run --example counterfactual_prediction
//! ```

use std::collections::BTreeMap;

use comlearn::analytics::predict_counterfactuals;
use comlearn::dataset::ChoiceDataset;
use comlearn::report::CounterfactualReportJson;

fn main() {
    let csv = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/three_agent_panel.csv"
    ))
    .expect("bundled data file");
    let panel = ChoiceDataset::from_csv(&csv).unwrap();

    println!("unconditional:");
    let report = predict_counterfactuals(&panel, &BTreeMap::new()).unwrap();
    print!(
        "{}",
        CounterfactualReportJson::new(&panel, &report).render_text()
    );

    // Suppose agent j announces they will pick y next period.
    let j = panel.agent_index("j").unwrap();
    let y = panel.alternative_index("y").unwrap();
    let fixed = BTreeMap::from([(j, y)]);
    println!("\nconditioned on j=y:");
    let report = predict_counterfactuals(&panel, &fixed).unwrap();
    print!(
        "{}",
        CounterfactualReportJson::new(&panel, &report).render_text()
    );

    println!();
    println!("the announcement rules out every profile where x wins a majority,");
    println!("even though unanimity for either alternative always stays possible");
}
