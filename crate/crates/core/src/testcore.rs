//! The dependence-robust mean test.
//!
//! All lag-dependent estimators read from one centered Gram matrix, so the
//! pipeline costs one `O(n²p)` pass plus `O(nM + M²n²)` for the estimators.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{normal_upper_quantile, normal_upper_tail, snap_to_integer, CompensatedSum};
use crate::series::SeriesMatrix;

/// How the bandwidth `M` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthPolicy {
    /// `M = ⌈min(n,p)^{1/8}⌉`
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub alpha: f64,
    pub bandwidth: BandwidthPolicy,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self { alpha: 0.05, bandwidth: BandwidthPolicy::Auto }
    }
}

impl TestConfig {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_bandwidth(mut self, m: usize) -> Self {
        self.bandwidth = BandwidthPolicy::Fixed(m);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.alpha > 0.0 && self.alpha < 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {}", self.alpha)))
        }
    }
}

/// Outcome of one test. `z = (t_n - mu_hat)/√sigma2_hat`, rejection is one-sided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub t_n: f64,
    pub mu_hat: f64,
    pub sigma2_hat: f64,
    pub z: f64,
    pub p_value: f64,
    pub reject: bool,
    pub m_used: usize,
    /// Wall-clock seconds spent in the test pipeline.
    pub elapsed: f64,
}

impl TestResult {
    /// Standardises `statistic` and applies the upper-tail normal rule.
    pub(crate) fn standardize(
        statistic: f64,
        center: f64,
        variance: f64,
        m_used: usize,
        alpha: f64,
        started: Instant,
    ) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::NonPositiveVariance(variance));
        }
        let z = (statistic - center) / variance.sqrt();
        if !z.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            t_n: statistic,
            mu_hat: center,
            sigma2_hat: variance,
            z,
            p_value: normal_upper_tail(z).clamp(0.0, 1.0),
            reject: z > normal_upper_quantile(alpha),
            m_used,
            elapsed: started.elapsed().as_secs_f64(),
        })
    }
}

/// Centered Gram matrix `G[t,s] = (X_t - x̄)ᵀ(X_s - x̄)`, stored row-major and
/// exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, t: usize, s: usize) -> f64 {
        self.data[t * self.n + s]
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.n..(t + 1) * self.n]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `⌈min(n,p)^{1/8}⌉`, snapping exact eighth powers before the ceiling.
pub fn select_m(n: usize, p: usize, policy: BandwidthPolicy) -> Result<usize> {
    if n < 4 || p < 1 {
        return Err(Error::InvalidParameter(format!(
            "bandwidth selection needs n >= 4 and p >= 1, got n={n}, p={p}"
        )));
    }
    let m = match policy {
        BandwidthPolicy::Auto => {
            let root = (n.min(p) as f64).powf(0.125);
            snap_to_integer(root, 1e-9).ceil() as usize
        }
        BandwidthPolicy::Fixed(m) => m,
    };
    if m < 1 || 2 * m >= n / 2 {
        return Err(Error::SeriesTooShortForBandwidth { n, m });
    }
    Ok(m)
}

/// `T_n = ½(n·x̄ᵀx̄ - n⁻¹Σ_t X_tᵀX_t)`, equal to `n⁻¹Σ_{s<t} X_tᵀX_s`.
pub fn statistic_tn(x: &SeriesMatrix) -> f64 {
    let n = x.n() as f64;
    let mut column_sums = vec![CompensatedSum::new(); x.p()];
    let mut squares = CompensatedSum::new();
    for row in x.rows() {
        for (acc, v) in column_sums.iter_mut().zip(row) {
            acc.add(*v);
            squares.add(v * v);
        }
    }
    let total_sq: CompensatedSum = column_sums.iter().map(|c| c.value().powi(2)).collect();
    (total_sq.value() - squares.value()) / (2.0 * n)
}

pub fn build_gram(x: &SeriesMatrix) -> GramMatrix {
    let n = x.n();
    let mean = x.column_means();
    let centered = x.to_dmatrix() - nalgebra::DMatrix::from_fn(n, x.p(), |_, j| mean[j]);
    let g = &centered * centered.transpose();
    let mut data = vec![0.0; n * n];
    for t in 0..n {
        data[t * n + t] = g[(t, t)];
        for s in (t + 1)..n {
            let v = 0.5 * (g[(t, s)] + g[(s, t)]);
            data[t * n + s] = v;
            data[s * n + t] = v;
        }
    }
    GramMatrix { n, data }
}

/// `tr(Γ̂_h) = n⁻¹ Σ_{t=1}^{n-h} G[t, t+h]`.
pub fn trace_gamma_hat(g: &GramMatrix, h: usize) -> Result<f64> {
    let n = g.n();
    if h >= n {
        return Err(Error::LagOutOfRange { lag: h, n });
    }
    let sum: CompensatedSum = (0..n - h).map(|t| g.get(t, t + h)).collect();
    Ok(sum.value() / n as f64)
}

/// `μ̂_n = Σ_{h=1}^{M} (1 - h/n) tr(Γ̂_h)`.
pub fn mu_hat(g: &GramMatrix, m: usize) -> Result<f64> {
    let n = g.n();
    if m < 1 || m >= n {
        return Err(Error::LagOutOfRange { lag: m, n });
    }
    let mut acc = CompensatedSum::new();
    for h in 1..=m {
        acc.add((1.0 - h as f64 / n as f64) * trace_gamma_hat(g, h)?);
    }
    Ok(acc.value())
}

/// Number of `(t,s)` pairs summed by [`s_h1h2`]; also its denominator.
pub fn split_pair_count(n: usize, h2: usize) -> f64 {
    let half = (n / 2) as f64;
    let h2f = h2 as f64;
    (n as f64 - h2f / 2.0 - 1.5 * half + 0.5) * (half - h2f)
}

/// Split-sample estimate of `tr(Γ_{h1}Γ_{h2})` pairing observations at least
/// `⌊n/2⌋` apart.
pub fn s_h1h2(g: &GramMatrix, h1: usize, h2: usize) -> Result<f64> {
    let n = g.n();
    let half = n / 2;
    if h2 >= half || h1 >= half || half == 0 {
        return Err(Error::SeriesTooShortForLag { n, lag: h2.max(h1) });
    }
    let mut acc = CompensatedSum::new();
    // 0-based: t in [0, half - h2), s in [t + half, n - h2)
    for t in 0..half - h2 {
        let lead = &g.row(t)[t + half..n - h2];
        let lagged = &g.row(t + h1)[t + half + h2..n];
        for (a, b) in lead.iter().zip(lagged) {
            acc.add(a * b);
        }
    }
    Ok(acc.value() / split_pair_count(n, h2))
}

/// `σ̂²_n = ½(S_00 + 2Σ S_{h,0} + 2Σ S_{0,h} + 4ΣΣ S_{h1,h2})`.
pub fn sigma2_hat(g: &GramMatrix, m: usize) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for h1 in 0..=m {
        for h2 in 0..=m {
            let weight = match (h1, h2) {
                (0, 0) => 1.0,
                (0, _) | (_, 0) => 2.0,
                _ => 4.0,
            };
            acc.add(weight * s_h1h2(g, h1, h2)?);
        }
    }
    let value = 0.5 * acc.value();
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositiveVariance(value))
    }
}

/// Minimum admissible sample size for [`run_test`].
pub const MIN_SAMPLE: usize = 8;

pub fn run_test(x: &SeriesMatrix, config: &TestConfig) -> Result<TestResult> {
    config.validate()?;
    let started = Instant::now();
    let n = x.n();
    if n < MIN_SAMPLE {
        return Err(Error::InvalidParameter(format!("need at least {MIN_SAMPLE} observations, got {n}")));
    }
    let m = select_m(n, x.p(), config.bandwidth)?;
    let t_n = statistic_tn(x);
    let g = build_gram(x);
    let mu = mu_hat(&g, m)?;
    let var = sigma2_hat(&g, m)?;
    TestResult::standardize(t_n, mu, var, m, config.alpha, started)
}

/// One window of [`rolling_test`]; `start` is the 0-based first row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RollingPoint {
    pub start: usize,
    pub result: TestResult,
}

/// Runs `test` on every window `start..start + window`, ordered by start.
pub fn rolling_with<F>(x: &SeriesMatrix, window: usize, test: F) -> Result<Vec<RollingPoint>>
where
    F: Fn(&SeriesMatrix) -> Result<TestResult> + Sync,
{
    let n = x.n();
    if window < MIN_SAMPLE || window > n {
        return Err(Error::InvalidWindow { window, n });
    }
    (0..=n - window)
        .into_par_iter()
        .map(|start| {
            let w = x.window(start, window)?;
            Ok(RollingPoint { start, result: test(&w)? })
        })
        .collect()
}

pub fn rolling_test(x: &SeriesMatrix, window: usize, config: &TestConfig) -> Result<Vec<RollingPoint>> {
    rolling_with(x, window, |w| run_test(w, config))
}
