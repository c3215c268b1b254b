//! Per-replication cost of each method, including the ZCQ/T_n ratio.

use hdmean::harness::{run_timing_benchmark, Method, ScenarioSpec};
use hdmean::model::InnovationLaw;

fn main() -> hdmean::Result<()> {
    let reps = 10;
    let specs: Vec<ScenarioSpec> = [(250, 100), (500, 300)]
        .into_iter()
        .map(|(n, p)| ScenarioSpec::size(n, p, 0, InnovationLaw::StandardGaussian, reps, 1).with_methods(&Method::ALL))
        .collect();
    print!("{}", run_timing_benchmark(&specs, reps)?.render());
    Ok(())
}
