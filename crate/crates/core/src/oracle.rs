//! Analytic ground truth for linear processes.
//!
//! For `X_t = Σ^{1/2} Σ_k b_k Z_{t-k}` the autocovariances factor as
//! `Γ_h = a_h Σ` with `a_h = Σ_k b_k b_{k+h}`, and the long-run covariance is
//! `Ω = s² Σ` with `s = Σ_k b_k`. Everything here is exact for finite
//! coefficient sequences.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{psd_sqrt, build_sigma, MaTerm, ProcessSpec, Simulator};
use crate::streams::replication_rng;
use crate::testcore::statistic_tn;

/// Scalar-coefficient linear process `(b_0..b_K, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarLinearProcess {
    b: Vec<f64>,
    sigma: DMatrix<f64>,
}

impl ScalarLinearProcess {
    pub fn new(b: Vec<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        if b.is_empty() || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("coefficients must be finite and non-empty".into()));
        }
        if b.iter().sum::<f64>() == 0.0 {
            return Err(Error::InvalidParameter("coefficient sum must be non-zero".into()));
        }
        if !sigma.is_square() {
            return Err(Error::InvalidParameter("sigma must be square".into()));
        }
        Ok(Self { b, sigma })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.b
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.b.iter().sum()
    }

    pub fn quantities(&self, n: usize, m: usize) -> OracleQuantities {
        OracleQuantities::compute(self, n, m)
    }
}

/// `a_h = Σ_{k=0}^{K-h} b_k b_{k+h}`; zero past the end of the sequence.
pub fn acov_coeff(b: &[f64], h: usize) -> f64 {
    if h >= b.len() {
        return 0.0;
    }
    b.iter().zip(&b[h..]).map(|(x, y)| x * y).sum()
}

fn trace(m: &DMatrix<f64>) -> f64 {
    m.diagonal().sum()
}

/// `tr(Σ²)` without forming the product.
fn trace_of_square(sigma: &DMatrix<f64>) -> f64 {
    sigma.component_mul(&sigma.transpose()).sum()
}

/// `μ_n = Σ_{h=1}^{M} (1 - h/n) a_h tr(Σ)`.
pub fn true_mu_n(b: &[f64], sigma: &DMatrix<f64>, n: usize, m: usize) -> f64 {
    let tr = trace(sigma);
    (1..=m)
        .map(|h| (1.0 - h as f64 / n as f64) * acov_coeff(b, h) * tr)
        .sum()
}

/// `σ²_n = ½ tr(Ω²) = ½ s⁴ tr(Σ²)`.
pub fn true_sigma2_n(b: &[f64], sigma: &DMatrix<f64>) -> f64 {
    let s: f64 = b.iter().sum();
    0.5 * s.powi(4) * trace_of_square(sigma)
}

/// Closed-form quantities for one scalar linear process.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleQuantities {
    /// `a_0..a_M`
    pub a: Vec<f64>,
    /// `tr(Γ_h)`, `h = 0..M`
    pub tr_gamma: Vec<f64>,
    /// `tr(Γ_{h1}Γ_{h2})`, `h1, h2 = 0..M`
    pub tr_gamma_prod: Vec<Vec<f64>>,
    pub mu_n: f64,
    pub sigma2_n: f64,
    pub s: f64,
    pub omega_trace2: f64,
}

impl OracleQuantities {
    pub fn compute(process: &ScalarLinearProcess, n: usize, m: usize) -> Self {
        let b = process.coefficients();
        let sigma = process.sigma();
        let tr = trace(sigma);
        let tr2 = trace_of_square(sigma);
        let a: Vec<f64> = (0..=m).map(|h| acov_coeff(b, h)).collect();
        let s = process.coefficient_sum();
        let omega_trace2 = s.powi(4) * tr2;
        Self {
            tr_gamma: a.iter().map(|ah| ah * tr).collect(),
            tr_gamma_prod: a.iter().map(|x| a.iter().map(|y| x * y * tr2).collect()).collect(),
            mu_n: true_mu_n(b, sigma, n, m),
            sigma2_n: 0.5 * omega_trace2,
            s,
            omega_trace2,
            a,
        }
    }
}

fn term_product(left: &MaTerm, right: &MaTerm, p: usize) -> DMatrix<f64> {
    match (left, right) {
        (MaTerm::ScaledIdentity(a), other) | (other, MaTerm::ScaledIdentity(a)) => other.to_dense(p) * *a,
        (MaTerm::Constant(a), MaTerm::Constant(b)) => DMatrix::from_element(p, p, a * b * p as f64),
        (MaTerm::Dense(m), MaTerm::Constant(c)) => {
            // (M cJ)[i,j] = c · rowsum_i(M)
            let sums = m.column_sum();
            DMatrix::from_fn(p, p, |i, _| c * sums[i])
        }
        (MaTerm::Constant(c), MaTerm::Dense(m)) => {
            let sums = m.row_sum();
            DMatrix::from_fn(p, p, |_, j| c * sums[j])
        }
        (MaTerm::Dense(a), MaTerm::Dense(b)) => a * b,
    }
}

/// `Γ_h = Σ^{1/2} (Σ_{k=0}^{q-h} A_k A_{k+h}) Σ^{1/2}` for the matrix-coefficient
/// process of `spec` (identity innovation covariance). Zero for `h > q`.
pub fn matrix_autocov(spec: &ProcessSpec, h: usize) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let p = spec.p;
    let q = spec.q();
    if h > q {
        return Ok(DMatrix::zeros(p, p));
    }
    let terms: Vec<MaTerm> = (0..=q).map(|k| spec.ma.term(k, p)).collect::<Result<_>>()?;
    let mut inner = DMatrix::zeros(p, p);
    for k in 0..=q - h {
        inner += term_product(&terms[k], &terms[k + h], p);
    }
    let root = psd_sqrt(&build_sigma(&spec.cov))?;
    let gamma = &root * inner * &root;
    if h == 0 {
        // Γ_0 is symmetric in exact arithmetic; remove the rounding asymmetry
        return Ok((&gamma + gamma.transpose()) * 0.5);
    }
    Ok(gamma)
}

/// Raw `T_n` draws under a zero-mean process.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullReference {
    pub samples: Vec<f64>,
}

impl NullReference {
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.samples.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (self.samples.len() - 1) as f64
    }

    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.samples.len() as f64).sqrt()
    }
}

/// Simulates `reps` series from `spec` (replication `r` uses stream
/// `(spec.seed, r)`) and returns their `T_n` values in replication order.
pub fn mc_null_reference(spec: &ProcessSpec, reps: usize) -> Result<NullReference> {
    if reps < 2 {
        return Err(Error::TooFewReplications { required: 2, got: reps });
    }
    if spec.mean.iter().any(|&v| v != 0.0) {
        return Err(Error::InvalidParameter("null reference requires a zero mean".into()));
    }
    let sim = Simulator::new(spec)?;
    let samples = (0..reps as u64)
        .into_par_iter()
        .map(|r| statistic_tn(&sim.draw(&mut replication_rng(spec.seed, r))))
        .collect();
    Ok(NullReference { samples })
}
