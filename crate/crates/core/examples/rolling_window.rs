//! Rolling-window p-values on a panel whose mean moves partway through.

use hdmean::model::{simulate, InnovationLaw, ProcessSpec};
use hdmean::testcore::rolling_test;
use hdmean::TestConfig;

fn main() -> hdmean::Result<()> {
    let (n, p, window, change) = (600, 50, 200, 350);
    let base = simulate(&ProcessSpec::reference_design(n, p, 2, InnovationLaw::StandardGaussian, 21))?;
    let x = base.map(|t, _, v| if t >= change { v + 0.2 } else { v })?;
    let points = rolling_test(&x, window, &TestConfig::default())?;
    println!("{} windows of length {window}; mean shifts at row {}", points.len(), change + 1);
    for pt in points.iter().step_by(25) {
        let bar = "#".repeat((-pt.result.p_value.max(1e-12).log10() * 2.0).round() as usize);
        println!("start {:>4}  p = {:.2e}  {bar}", pt.start + 1, pt.result.p_value);
    }
    Ok(())
}
