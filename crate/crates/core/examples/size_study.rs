//! Empirical size of each method on a null design.
//!
//! cargo run --release --example size_study -- [reps]

use hdmean::harness::{render_rows, run_size_experiment, Method, ScenarioSpec};
use hdmean::model::InnovationLaw;

fn main() -> hdmean::Result<()> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let mut rows = Vec::new();
    for q in [0, 2] {
        let spec = ScenarioSpec::size(250, 100, q, InnovationLaw::StandardGaussian, reps, 42).with_methods(&Method::ALL);
        rows.extend(run_size_experiment(&spec)?.rows());
    }
    print!("{}", render_rows(&rows));
    Ok(())
}
