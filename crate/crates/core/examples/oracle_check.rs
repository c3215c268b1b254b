//! Compare the estimated centering and variance with their closed forms for
//! a scalar linear process `X_t = Σ b_k Z_{t-k}`.

use hdmean::model::{simulate, CrossSectionCovSpec, InnovationLaw, ProcessSpec};
use hdmean::oracle::ScalarLinearProcess;
use hdmean::testcore::{build_gram, mu_hat, sigma2_hat};
use nalgebra::DMatrix;

fn main() -> hdmean::Result<()> {
    let (n, p, m) = (1000, 40, 2);
    let b = vec![1.0, 0.5];
    let process = ScalarLinearProcess::new(b.clone(), DMatrix::identity(p, p))?;
    let truth = process.quantities(n, m);
    println!("a_h = {:?}", truth.a);
    println!("mu_n = {:.4}, sigma2_n = {:.4}", truth.mu_n, truth.sigma2_n);

    let spec = ProcessSpec::scalar_linear(n, CrossSectionCovSpec::identity(p), b, InnovationLaw::StandardGaussian, 0);
    let reps = 50;
    let (mut mu_sum, mut s2_sum) = (0.0, 0.0);
    for r in 0..reps {
        let g = build_gram(&simulate(&spec.clone().with_seed(r))?);
        mu_sum += mu_hat(&g, m)?;
        s2_sum += sigma2_hat(&g, m)?;
    }
    println!("mean of mu_hat over {reps} reps:     {:.4}", mu_sum / reps as f64);
    println!("mean of sigma2_hat over {reps} reps: {:.4}", s2_sum / reps as f64);
    Ok(())
}
