//! Draw one panel from the reference moving-average design and summarise it.
//!
//! cargo run --release --example simulate_process -- [n] [p] [q]

use hdmean::model::{build_mean_signal, simulate, InnovationLaw, ProcessSpec};
use hdmean::oracle::matrix_autocov;

fn arg(k: usize, default: usize) -> usize {
    std::env::args().nth(k).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> hdmean::Result<()> {
    let (n, p, q) = (arg(1, 250), arg(2, 100), arg(3, 2));
    let mean = build_mean_signal(p, 0.2, 0.09, 1.0)?;
    let spec = ProcessSpec::reference_design(n, p, q, InnovationLaw::gamma_4_2(), 7).with_mean(mean);
    let x = simulate(&spec)?;

    let means = x.column_means();
    let active = (p as f64 * 0.2).ceil() as usize;
    let avg = |r: std::ops::Range<usize>| r.clone().map(|j| means[j]).sum::<f64>() / r.len().max(1) as f64;
    println!("simulated {n} x {p} panel, MA order {q}, centered Gamma(4,2) innovations");
    println!("average column mean, signal block ({active} cols): {:.4}", avg(0..active));
    println!("average column mean, null block:               {:.4}", avg(active..p));

    let gamma0 = matrix_autocov(&spec, 0)?;
    let gamma1 = matrix_autocov(&spec, 1)?;
    println!("tr(Gamma_0) = {:.3}, tr(Gamma_1) = {:.3}", gamma0.trace(), gamma1.trace());
    Ok(())
}
