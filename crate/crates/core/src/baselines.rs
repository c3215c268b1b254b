//! Comparison tests: a band-excluded U-statistic with a kernel-smoothed
//! variance, and a diagonal-standardised test for independent data.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::series::SeriesMatrix;
use crate::testcore::{build_gram, GramMatrix, TestResult};

/// Parameters of the band-excluded test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZcqConfig {
    /// Pairs closer than `b` in time are dropped.
    pub b: usize,
    /// Lags `|h| ≤ lag_window` enter the kernel-smoothed variance.
    pub lag_window: usize,
}

impl ZcqConfig {
    /// `b = ⌈n^{1/4}⌉`, `lag_window = ⌊n/10⌋`.
    pub fn default_for(n: usize) -> Self {
        let b = ((n as f64).powf(0.25).ceil() as usize).max(1);
        Self { b, lag_window: n / 10 }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.b < 1 || self.b >= n {
            return Err(Error::BandwidthExhaustsSample { b: self.b, n });
        }
        if self.lag_window >= n {
            return Err(Error::InvalidParameter(format!(
                "lag window {} must be smaller than n={n}",
                self.lag_window
            )));
        }
        Ok(())
    }
}

/// Number of ordered pairs `(t1, t2)` with `|t1 - t2| ≥ b`.
pub fn band_excluded_pair_count(n: usize, b: usize) -> f64 {
    ((n - b) * (n - b + 1)) as f64
}

/// `T_ZCQ = [(n-b)(n-b+1)]⁻¹ Σ_{|t1-t2|≥b} X_{t1}ᵀX_{t2}`.
///
/// Evaluated as the full cross-product `‖Σ_t X_t‖²` minus the excluded band,
/// which costs `O(n·p·b)`.
pub fn zcq_statistic(x: &SeriesMatrix, b: usize) -> Result<f64> {
    let n = x.n();
    if b < 1 || b >= n {
        return Err(Error::BandwidthExhaustsSample { b, n });
    }
    let mut sums = vec![0.0; x.p()];
    for row in x.rows() {
        sums.iter_mut().zip(row).for_each(|(s, v)| *s += v);
    }
    let total: f64 = sums.iter().map(|s| s * s).sum();
    let mut band = 0.0;
    for t in 0..n {
        let row = x.row(t);
        band += dot(row, row);
        for u in (t + 1)..(t + b).min(n) {
            band += 2.0 * dot(row, x.row(u));
        }
    }
    Ok((total - band) / band_excluded_pair_count(n, b))
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quadratic spectral kernel, `k(0) = 1`.
pub fn quadratic_spectral(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let a = 6.0 * PI * x / 5.0;
    25.0 / (12.0 * PI * PI * x * x) * (a.sin() / a - a.cos())
}

/// Kernel-smoothed estimate of `tr(Ω²) = Σ_{h1,h2} tr(Γ_{h1}Γ_{h2})`.
///
/// Each lag pair `(h1, h2) ∈ [-L, L]²` is estimated by the mean of
/// `G[t,s]·G[t+h1, s+h2]` over pairs with `s - t ≥ b + 2L`, so that none of
/// the four observations involved fall within the excluded band of each
/// other, and the estimates are combined with weights `k(h1/L)·k(h2/L)`.
///
/// Centering makes far-apart Gram entries share a mean of about `-tr(Ω)/n`;
/// left in, its square accumulates over all `(2L+1)²` lag pairs, so the
/// products use entries demeaned by their average over the far-apart set.
/// Centering also pulls each autocovariance down by about `Ω/n`, which
/// shrinks the kernel sum by `(1 - K/n)²` with `K = Σ_h k(h/L)`; that factor
/// is divided out.
pub fn zcq_long_run_trace(g: &GramMatrix, config: &ZcqConfig) -> Result<f64> {
    let n = g.n();
    let lw = config.lag_window as isize;
    let gap = config.b + 2 * config.lag_window;
    if gap >= n {
        return Err(Error::SeriesTooShortForLag { n, lag: config.lag_window });
    }
    let weights: Vec<f64> = (-lw..=lw)
        .map(|h| if lw == 0 { 1.0 } else { quadratic_spectral(h as f64 / lw as f64) })
        .collect();
    let ni = n as isize;
    let far: CompensatedSum = (0..n - gap).flat_map(|t| g.row(t)[t + gap..].iter().copied()).collect();
    let far_pairs = (n - gap) * (n - gap + 1) / 2;
    let gbar = far.value() / far_pairs as f64;
    let mut total = 0.0;
    for h1 in -lw..=lw {
        let w1 = weights[(h1 + lw) as usize];
        for h2 in -lw..=lw {
            let w2 = weights[(h2 + lw) as usize];
            let (mut sum, mut edges) = (0.0, 0.0);
            let mut count = 0usize;
            let t_lo = (-h1).max(0);
            let s_hi = ni - 1 - h2.max(0);
            for t in t_lo..ni {
                let s_lo = t + gap as isize;
                if s_lo > s_hi {
                    break;
                }
                let (s0, s1) = (s_lo as usize, s_hi as usize + 1);
                let lead = &g.row(t as usize)[s0..s1];
                let tu = (t + h1) as usize;
                let shift0 = (s_lo + h2) as usize;
                let lagged = &g.row(tu)[shift0..shift0 + (s1 - s0)];
                sum += dot(lead, lagged);
                edges += lead.iter().sum::<f64>() + lagged.iter().sum::<f64>();
                count += s1 - s0;
            }
            if count == 0 {
                return Err(Error::SeriesTooShortForLag { n, lag: h2.unsigned_abs() });
            }
            let mean_product = (sum - gbar * edges) / count as f64 + gbar * gbar;
            total += w1 * w2 * mean_product;
        }
    }
    let shrink = 1.0 - weights.iter().sum::<f64>() / n as f64;
    Ok(total / (shrink * shrink))
}

/// Band-excluded test; `Var(T_ZCQ) ≈ 2 tr(Ω²) / ((n-b)(n-b+1))`.
pub fn zcq_test(x: &SeriesMatrix, config: &ZcqConfig, alpha: f64) -> Result<TestResult> {
    let started = Instant::now();
    let n = x.n();
    config.validate(n)?;
    let stat = zcq_statistic(x, config.b)?;
    let g = build_gram(x);
    let trace2 = zcq_long_run_trace(&g, config)?;
    let variance = 2.0 * trace2 / band_excluded_pair_count(n, config.b);
    TestResult::standardize(stat, 0.0, variance, config.lag_window, alpha, started)
}

/// Centering and scaling of the diagonal-standardised statistic
/// `n x̄ᵀ D̂⁻¹ x̄` with correlation matrix `R̂`.
///
/// Constants follow Srivastava (2009), "A test for the mean vector with fewer
/// observations than the dimension under non-normality", J. Multivariate
/// Anal. 100: centre `(n-1)p/(n-3)`, variance
/// `2 (tr R̂² - p²/(n-1)) · c_{p,n}` with `c_{p,n} = 1 + tr R̂² / p^{3/2}`.
fn sri_moments(n: usize, p: usize, trace_r2: f64) -> (f64, f64) {
    let (nf, pf) = (n as f64, p as f64);
    let centre = (nf - 1.0) * pf / (nf - 3.0);
    let c = 1.0 + trace_r2 / pf.powf(1.5);
    let variance = 2.0 * (trace_r2 - pf * pf / (nf - 1.0)) * c;
    (centre, variance)
}

/// Diagonal-standardised mean test for independent observations.
pub fn sri_test(x: &SeriesMatrix, alpha: f64) -> Result<TestResult> {
    let started = Instant::now();
    let (n, p) = (x.n(), x.p());
    if n < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 observations, got {n}")));
    }
    let mean = x.column_means();
    let mut var = vec![0.0; p];
    for row in x.rows() {
        for ((v, m), xv) in var.iter_mut().zip(&mean).zip(row) {
            *v += (xv - m).powi(2);
        }
    }
    var.iter_mut().for_each(|v| *v /= (n - 1) as f64);
    if let Some(j) = var.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::DegenerateCoordinate(j));
    }
    let stat = n as f64 * mean.iter().zip(&var).map(|(m, v)| m * m / v).sum::<f64>();

    // standardised columns: R̂ = YᵀY
    let scale: Vec<f64> = var.iter().map(|v| 1.0 / (v * (n - 1) as f64).sqrt()).collect();
    let y = DMatrix::from_fn(n, p, |t, j| (x.get(t, j) - mean[j]) * scale[j]);
    let small = if p <= n { y.transpose() * &y } else { &y * y.transpose() };
    let trace_r2 = small.norm_squared();

    let (centre, variance) = sri_moments(n, p, trace_r2);
    TestResult::standardize(stat, centre, variance, 0, alpha, started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{simulate, CrossSectionCovSpec, InnovationLaw, ProcessSpec};
    use crate::streams::replication_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_series(n: usize, p: usize, seed: u64) -> SeriesMatrix {
        let mut rng = replication_rng(seed, 0);
        SeriesMatrix::new(n, p, (0..n * p).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn brute_zcq(x: &SeriesMatrix, b: usize) -> f64 {
        let n = x.n();
        let mut s = 0.0;
        let mut pairs = 0usize;
        for t in 0..n {
            for u in 0..n {
                if t.abs_diff(u) >= b {
                    s += dot(x.row(t), x.row(u));
                    pairs += 1;
                }
            }
        }
        assert_eq!(pairs as f64, band_excluded_pair_count(n, b));
        s / pairs as f64
    }

    #[test]
    fn zcq_statistic_examples() {
        let x = SeriesMatrix::new(3, 2, vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((zcq_statistic(&x, 2).unwrap() - 1.0).abs() < 1e-15);

        let ortho = SeriesMatrix::new(3, 3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        for b in 1..3 {
            assert_eq!(zcq_statistic(&ortho, b).unwrap(), 0.0);
        }
        assert_eq!(zcq_statistic(&x, 3), Err(Error::BandwidthExhaustsSample { b: 3, n: 3 }));
    }

    #[test]
    fn zcq_b1_is_off_diagonal_u_statistic() {
        let x = random_series(15, 4, 3);
        let n = 15;
        let mut s = 0.0;
        for t in 0..n {
            for u in 0..n {
                if t != u {
                    s += dot(x.row(t), x.row(u));
                }
            }
        }
        let expected = s / ((n - 1) * n) as f64;
        let got = zcq_statistic(&x, 1).unwrap();
        assert!((got - expected).abs() <= 1e-10 * expected.abs());
    }

    #[test]
    fn qs_kernel_values() {
        assert_eq!(quadratic_spectral(0.0), 1.0);
        assert!((quadratic_spectral(1e-4) - 1.0).abs() < 1e-6);
        // even function
        assert_eq!(quadratic_spectral(0.7), quadratic_spectral(-0.7));
        let a = 6.0 * PI / 5.0;
        let at_one = 25.0 / (12.0 * PI * PI) * (a.sin() / a - a.cos());
        assert!((quadratic_spectral(1.0) - at_one).abs() < 1e-15);
    }

    #[test]
    fn zcq_long_run_trace_near_truth_for_white_noise() {
        let p = 40;
        let spec = ProcessSpec::scalar_linear(300, CrossSectionCovSpec::identity(p), vec![1.0], InnovationLaw::StandardGaussian, 10);
        let config = ZcqConfig::default_for(300);
        let reps = 40;
        let mean: f64 = (0..reps)
            .map(|r| {
                let x = simulate(&spec.clone().with_seed(r)).unwrap();
                zcq_long_run_trace(&build_gram(&x), &config).unwrap() / p as f64
            })
            .sum::<f64>()
            / reps as f64;
        assert!((mean - 1.0).abs() < 0.12, "mean ratio {mean}");
    }

    #[test]
    fn zcq_test_is_deterministic() {
        let x = random_series(60, 5, 4);
        let cfg = ZcqConfig::default_for(60);
        let a = zcq_test(&x, &cfg, 0.05).unwrap();
        let b = zcq_test(&x, &cfg, 0.05).unwrap();
        assert_eq!((a.t_n, a.sigma2_hat, a.z), (b.t_n, b.sigma2_hat, b.z));
        assert!(zcq_test(&x, &ZcqConfig { b: 60, lag_window: 2 }, 0.05).is_err());
        assert!(zcq_test(&x, &ZcqConfig { b: 2, lag_window: 30 }, 0.05).is_err());
    }

    #[test]
    fn sri_rejects_degenerate_coordinate() {
        let mut values = vec![0.0; 20];
        for t in 0..10 {
            values[2 * t] = t as f64;
            values[2 * t + 1] = 3.0;
        }
        let x = SeriesMatrix::new(10, 2, values).unwrap();
        assert_eq!(sri_test(&x, 0.05), Err(Error::DegenerateCoordinate(1)));
    }

    #[test]
    fn sri_moments_reference_values() {
        let (centre, variance) = sri_moments(13, 4, 6.0);
        assert!((centre - 12.0 * 4.0 / 10.0).abs() < 1e-15);
        let c = 1.0 + 6.0 / 8.0;
        assert!((variance - 2.0 * (6.0 - 16.0 / 12.0) * c).abs() < 1e-12);
    }

    #[test]
    fn sri_trace_path_agrees_for_wide_and_tall() {
        // tr R² via the p×p or n×n Gram must agree
        let x = random_series(12, 12, 8);
        let y = random_series(12, 13, 8);
        let tall = sri_test(&x, 0.05).unwrap();
        let wide = sri_test(&y, 0.05).unwrap();
        assert!(tall.sigma2_hat > 0.0 && wide.sigma2_hat > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn zcq_matches_brute_force_and_time_reversal(n in 3usize..25, p in 1usize..5, b in 1usize..5, seed in any::<u64>()) {
            prop_assume!(b < n);
            let x = random_series(n, p, seed);
            let fast = zcq_statistic(&x, b).unwrap();
            let brute = brute_zcq(&x, b);
            prop_assert!((fast - brute).abs() <= 1e-10 * brute.abs().max(1e-2));
            let reversed = SeriesMatrix::from_rows(&(0..n).rev().map(|t| x.row(t).to_vec()).collect::<Vec<_>>()).unwrap();
            let rev = zcq_statistic(&reversed, b).unwrap();
            prop_assert!((fast - rev).abs() <= 1e-10 * fast.abs().max(1e-2));
        }

        #[test]
        fn sri_invariant_to_coordinate_scaling(seed in any::<u64>(), scales in proptest::collection::vec(0.01f64..50.0, 6)) {
            let x = random_series(20, 6, seed).map(|_, _, v| v + 0.1).unwrap();
            let scaled = x.map(|_, j, v| v * scales[j]).unwrap();
            let (a, b) = (sri_test(&x, 0.05).unwrap(), sri_test(&scaled, 0.05).unwrap());
            prop_assert!((a.t_n - b.t_n).abs() <= 1e-8 * a.t_n.abs().max(1.0));
            prop_assert!((a.z - b.z).abs() <= 1e-8 * a.z.abs().max(1.0));
            prop_assert_eq!(a.reject, b.reject);
        }
    }
}
