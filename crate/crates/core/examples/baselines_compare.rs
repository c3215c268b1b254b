//! The three methods side by side on one dependent null panel. SRI assumes
//! independence, so it tends to reject here.

use hdmean::harness::Method;
use hdmean::model::{simulate, InnovationLaw, ProcessSpec};

fn main() -> hdmean::Result<()> {
    let x = simulate(&ProcessSpec::reference_design(250, 100, 2, InnovationLaw::StandardGaussian, 3))?;
    for method in Method::ALL {
        let r = method.apply(&x, 0.05)?;
        println!("{method:>4}: z={:>8.3} p={:.4} reject={:<5} {:.2} ms", r.z, r.p_value, r.reject, 1e3 * r.elapsed);
    }
    Ok(())
}
