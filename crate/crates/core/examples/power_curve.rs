//! Power of T_n against signal strength in scenario S1.

use hdmean::harness::{run_power_experiment, Method, Scenario, ScenarioSpec};
use hdmean::model::InnovationLaw;

fn main() -> hdmean::Result<()> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    println!("phi3   power   99% CI");
    for phi3 in [0.05, 0.06, 0.07, 0.08, 0.09] {
        let spec = ScenarioSpec::power(Scenario::S1, 0.2, phi3, InnovationLaw::StandardGaussian, reps, 9);
        let report = run_power_experiment(&spec)?;
        let m = report.method(Method::Tn).expect("T_n requested");
        println!("{phi3:.2}  {:5.1}%  [{:.1}, {:.1}]", 100.0 * m.reject_rate, 100.0 * m.ci99.0, 100.0 * m.ci99.1);
    }
    Ok(())
}
