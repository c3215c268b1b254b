//! Covariance structures and the moving-average data-generating process
//!
//! ```text
//! X_t = μ + Σ^{1/2} Σ_{h=0}^{q} A_h Z_{t-h}
//! ```
//!
//! with banded `Σ` and `A_1, A_2`, `A_0 = I` and constant `A_h = e^{-2h} J`
//! for `h > 2`. The `q` pre-sample innovation vectors are drawn explicitly, so
//! the simulated series is stationary from its first row.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::snap_to_integer;
use crate::series::SeriesMatrix;
use crate::streams::{replication_rng, StreamRng};

/// Reference design constants `(w, φ1, φ2)`.
pub const REFERENCE_SPARSITY: f64 = 0.5;
pub const REFERENCE_MA_STRENGTH: f64 = 0.3;
pub const REFERENCE_COV_STRENGTH: f64 = 0.2;

/// Distribution of the i.i.d. innovations `Z_{t,j}`, standardised to mean 0
/// and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InnovationLaw {
    StandardGaussian,
    /// `(G - shape/rate) · rate/√shape` with `G ~ Gamma(shape, rate)`.
    /// For `(4, 2)` the scale factor is exactly 1, i.e. `Gamma(4,2) - 2`.
    CenteredGamma { shape: f64, rate: f64 },
}

impl InnovationLaw {
    pub const fn gamma_4_2() -> Self {
        InnovationLaw::CenteredGamma { shape: 4.0, rate: 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InnovationLaw::StandardGaussian => Ok(()),
            InnovationLaw::CenteredGamma { shape, rate } => {
                if shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "gamma innovations need positive shape and rate, got ({shape}, {rate})"
                    )))
                }
            }
        }
    }

    /// `E[Z^4]`.
    pub fn fourth_moment(&self) -> f64 {
        match *self {
            InnovationLaw::StandardGaussian => 3.0,
            InnovationLaw::CenteredGamma { shape, .. } => 3.0 + 6.0 / shape,
        }
    }

    pub(crate) fn sampler(&self) -> Result<InnovationSampler> {
        self.validate()?;
        Ok(match *self {
            InnovationLaw::StandardGaussian => InnovationSampler::Gaussian,
            InnovationLaw::CenteredGamma { shape, rate } => InnovationSampler::Gamma {
                dist: Gamma::new(shape, 1.0 / rate)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?,
                mean: shape / rate,
                scale: rate / shape.sqrt(),
            },
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) enum InnovationSampler {
    Gaussian,
    Gamma { dist: Gamma<f64>, mean: f64, scale: f64 },
}

impl InnovationSampler {
    pub(crate) fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            InnovationSampler::Gaussian => {
                for v in out.iter_mut() {
                    *v = StandardNormal.sample(rng);
                }
            }
            InnovationSampler::Gamma { dist, mean, scale } => {
                for v in out.iter_mut() {
                    *v = (dist.sample(rng) - mean) * scale;
                }
            }
        }
    }
}

/// Banded cross-sectional covariance `Σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionCovSpec {
    pub p: usize,
    pub w: f64,
    pub phi2: f64,
}

impl CrossSectionCovSpec {
    pub fn reference(p: usize) -> Self {
        Self { p, w: REFERENCE_SPARSITY, phi2: REFERENCE_COV_STRENGTH }
    }

    /// `Σ = I_p`.
    pub fn identity(p: usize) -> Self {
        Self { p, w: 1.0, phi2: 0.0 }
    }
}

/// `true` when `|i - j| = d` lies inside the band `d ≤ p·w`.
fn in_band(d: usize, p: usize, w: f64) -> bool {
    d as f64 <= p as f64 * w
}

/// Builds `Σ[i,i] = 1`, `Σ[i,j] = φ2/|i-j|²` for `1 ≤ |i-j| ≤ p·w`, else 0.
pub fn build_sigma(spec: &CrossSectionCovSpec) -> DMatrix<f64> {
    let p = spec.p;
    DMatrix::from_fn(p, p, |i, j| {
        let d = i.abs_diff(j);
        if d == 0 {
            1.0
        } else if in_band(d, p, spec.w) {
            spec.phi2 / (d * d) as f64
        } else {
            0.0
        }
    })
}

/// Banded MA coefficient recipe with the constant tail for lags above 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MACoefficientSpec {
    pub q: usize,
    pub phi1: f64,
    pub w: f64,
}

impl MACoefficientSpec {
    pub fn reference(q: usize) -> Self {
        Self { q, phi1: REFERENCE_MA_STRENGTH, w: REFERENCE_SPARSITY }
    }

    /// Entry value of the constant matrix used for lags `h > 2`.
    pub fn tail_value(h: usize) -> f64 {
        (-2.0 * h as f64).exp()
    }
}

/// `A_h` as a dense `p × p` matrix.
pub fn build_ma_coefficient(spec: &MACoefficientSpec, h: usize, p: usize) -> Result<DMatrix<f64>> {
    if h > spec.q {
        return Err(Error::LagExceedsOrder { lag: h, order: spec.q });
    }
    Ok(match h {
        0 => DMatrix::identity(p, p),
        1 | 2 => {
            let hf = h as f64;
            DMatrix::from_fn(p, p, |i, j| {
                let d = i.abs_diff(j);
                if d == 0 {
                    spec.phi1 / hf
                } else if in_band(d, p, spec.w) {
                    spec.phi1 / (hf * (d * d) as f64)
                } else {
                    0.0
                }
            })
        }
        _ => DMatrix::from_element(p, p, MACoefficientSpec::tail_value(h)),
    })
}

/// Moving-average coefficient family of a [`ProcessSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MovingAverage {
    /// Banded `A_h` of the reference design.
    Banded(MACoefficientSpec),
    /// Scalar coefficients, `A_h = b_h I` (a linear process with `Y_{t,j} = Σ_k b_k Z_{t-k,j}`).
    Scalar(Vec<f64>),
}

impl MovingAverage {
    pub fn order(&self) -> usize {
        match self {
            MovingAverage::Banded(spec) => spec.q,
            MovingAverage::Scalar(b) => b.len().saturating_sub(1),
        }
    }

    pub(crate) fn term(&self, h: usize, p: usize) -> Result<MaTerm> {
        match self {
            MovingAverage::Banded(spec) => match h {
                _ if h > spec.q => Err(Error::LagExceedsOrder { lag: h, order: spec.q }),
                0 => Ok(MaTerm::ScaledIdentity(1.0)),
                1 | 2 => Ok(MaTerm::Dense(build_ma_coefficient(spec, h, p)?)),
                _ => Ok(MaTerm::Constant(MACoefficientSpec::tail_value(h))),
            },
            MovingAverage::Scalar(b) => b
                .get(h)
                .map(|&c| MaTerm::ScaledIdentity(c))
                .ok_or(Error::LagExceedsOrder { lag: h, order: self.order() }),
        }
    }
}

/// Structured representation of one `A_h`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum MaTerm {
    /// `c · I`
    ScaledIdentity(f64),
    Dense(DMatrix<f64>),
    /// `c · J` (every entry equal to `c`)
    Constant(f64),
}

impl MaTerm {
    pub(crate) fn to_dense(&self, p: usize) -> DMatrix<f64> {
        match self {
            MaTerm::ScaledIdentity(c) => DMatrix::identity(p, p) * *c,
            MaTerm::Dense(m) => m.clone(),
            MaTerm::Constant(c) => DMatrix::from_element(p, p, *c),
        }
    }
}

/// Full description of a simulated panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub n: usize,
    pub p: usize,
    pub mean: Vec<f64>,
    pub cov: CrossSectionCovSpec,
    pub ma: MovingAverage,
    pub innovation: InnovationLaw,
    pub seed: u64,
}

impl ProcessSpec {
    /// Reference design with `(w, φ1, φ2) = (0.5, 0.3, 0.2)` and zero mean.
    pub fn reference_design(n: usize, p: usize, q: usize, innovation: InnovationLaw, seed: u64) -> Self {
        Self {
            n,
            p,
            mean: vec![0.0; p],
            cov: CrossSectionCovSpec::reference(p),
            ma: MovingAverage::Banded(MACoefficientSpec::reference(q)),
            innovation,
            seed,
        }
    }

    /// Scalar linear process `X_t = μ + Σ^{1/2} Σ_k b_k Z_{t-k}`.
    pub fn scalar_linear(
        n: usize,
        cov: CrossSectionCovSpec,
        b: Vec<f64>,
        innovation: InnovationLaw,
        seed: u64,
    ) -> Self {
        Self {
            n,
            p: cov.p,
            mean: vec![0.0; cov.p],
            cov,
            ma: MovingAverage::Scalar(b),
            innovation,
            seed,
        }
    }

    pub fn with_mean(mut self, mean: Vec<f64>) -> Self {
        self.mean = mean;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn q(&self) -> usize {
        self.ma.order()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p < 1 {
            return Err(Error::InvalidParameter(format!(
                "process needs n >= 2 and p >= 1, got n={}, p={}",
                self.n, self.p
            )));
        }
        if self.cov.p != self.p {
            return Err(Error::InvalidParameter(format!(
                "covariance dimension {} does not match p={}",
                self.cov.p, self.p
            )));
        }
        if self.mean.len() != self.p {
            return Err(Error::InvalidParameter(format!(
                "mean has length {}, expected {}",
                self.mean.len(),
                self.p
            )));
        }
        if !(self.cov.w > 0.0 && self.cov.w <= 1.0) {
            return Err(Error::InvalidParameter(format!("w must lie in (0,1], got {}", self.cov.w)));
        }
        if let MovingAverage::Scalar(b) = &self.ma {
            if b.is_empty() || b.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("scalar MA coefficients must be finite and non-empty".into()));
            }
        }
        if self.mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if self.q() + 1 > self.n {
            log::warn!("MA order q={} exceeds n-1={}", self.q(), self.n - 1);
        }
        self.innovation.validate()
    }
}

/// Symmetric square root through the eigendecomposition.
///
/// Eigenvalues in `[-1e-8·λmax, 0)` are clamped to zero; anything more
/// negative is rejected.
pub fn psd_sqrt(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (rows, cols) = s.shape();
    if rows != cols {
        return Err(Error::InvalidParameter(format!("matrix is {rows}x{cols}, not square")));
    }
    let scale = s.amax();
    if (s - s.transpose()).amax() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidParameter("matrix is not symmetric".into()));
    }
    let eig = SymmetricEigen::new(s.clone());
    let lambda_max = eig.eigenvalues.max();
    let clamp = 1e-8 * lambda_max.max(0.0);
    let mut roots = eig.eigenvalues.clone();
    for v in roots.iter_mut() {
        if *v < -clamp {
            return Err(Error::NotPositiveSemiDefinite { eigenvalue: *v });
        }
        *v = v.max(0.0).sqrt();
    }
    let vecs = &eig.eigenvectors;
    let mut root = vecs * DMatrix::from_diagonal(&roots) * vecs.transpose();
    // exact symmetry
    for i in 0..rows {
        for j in (i + 1)..rows {
            let m = 0.5 * (root[(i, j)] + root[(j, i)]);
            root[(i, j)] = m;
            root[(j, i)] = m;
        }
    }
    Ok(root)
}

/// Mean vector with the first `⌈ν·p⌉` entries equal to `ω·φ3`.
pub fn build_mean_signal(p: usize, nu: f64, phi3: f64, omega: f64) -> Result<Vec<f64>> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::InvalidParameter(format!("nu must lie in (0,1], got {nu}")));
    }
    let active = (snap_to_integer(nu * p as f64, 1e-9).ceil() as usize).min(p);
    let level = omega * phi3;
    Ok((0..p).map(|j| if j < active { level } else { 0.0 }).collect())
}

/// Precomputed state for drawing many series from one [`ProcessSpec`].
#[derive(Debug, Clone)]
pub struct Simulator {
    n: usize,
    p: usize,
    q: usize,
    mean: Vec<f64>,
    root: DMatrix<f64>,
    identity_terms: Vec<(usize, f64)>,
    /// `(h, A_h Σ^{1/2})`; row form of `Σ^{1/2} A_h`.
    dense_terms: Vec<(usize, DMatrix<f64>)>,
    constant_terms: Vec<(usize, f64)>,
    /// `Σ^{1/2} 1`
    root_ones: Vec<f64>,
    sampler: InnovationSampler,
}

impl Simulator {
    pub fn new(spec: &ProcessSpec) -> Result<Self> {
        spec.validate()?;
        let p = spec.p;
        let q = spec.q();
        let root = psd_sqrt(&build_sigma(&spec.cov))?;
        let mut identity_terms = Vec::new();
        let mut dense_terms = Vec::new();
        let mut constant_terms = Vec::new();
        for h in 0..=q {
            match spec.ma.term(h, p)? {
                MaTerm::ScaledIdentity(c) => identity_terms.push((h, c)),
                MaTerm::Dense(a) => dense_terms.push((h, &a * &root)),
                MaTerm::Constant(c) => constant_terms.push((h, c)),
            }
        }
        let root_ones = root.column_sum().iter().copied().collect();
        Ok(Self {
            n: spec.n,
            p,
            q,
            mean: spec.mean.clone(),
            root,
            identity_terms,
            dense_terms,
            constant_terms,
            root_ones,
            sampler: spec.innovation.sampler()?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Replaces the mean vector, keeping the covariance and MA state.
    pub fn with_mean(mut self, mean: Vec<f64>) -> Result<Self> {
        if mean.len() != self.p {
            return Err(Error::InvalidParameter(format!(
                "mean has length {}, expected {}",
                mean.len(),
                self.p
            )));
        }
        self.mean = mean;
        Ok(self)
    }

    /// Draws the `n + q` innovation vectors from `rng` (time-major order) and
    /// returns the resulting series.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> SeriesMatrix {
        let (n, p, q) = (self.n, self.p, self.q);
        let mut buf = vec![0.0; (n + q) * p];
        self.sampler.fill(rng, &mut buf);
        let z = DMatrix::from_row_slice(n + q, p, &buf);

        let mut x = DMatrix::zeros(n, p);
        if !self.identity_terms.is_empty() {
            let mut y = DMatrix::zeros(n, p);
            for &(h, c) in &self.identity_terms {
                y += z.rows(q - h, n) * c;
            }
            x.gemm(1.0, &y, &self.root, 0.0);
        }
        for (h, bt) in &self.dense_terms {
            x.gemm(1.0, &z.rows(q - h, n), bt, 1.0);
        }
        if !self.constant_terms.is_empty() {
            let row_sums: Vec<f64> = buf.chunks_exact(p).map(|r| r.iter().sum()).collect();
            for t in 0..n {
                let tail: f64 = self
                    .constant_terms
                    .iter()
                    .map(|&(h, c)| c * row_sums[q + t - h])
                    .sum();
                for (j, r1) in self.root_ones.iter().enumerate() {
                    x[(t, j)] += tail * r1;
                }
            }
        }

        let mut values = Vec::with_capacity(n * p);
        for t in 0..n {
            values.extend(x.row(t).iter().zip(&self.mean).map(|(v, m)| v + m));
        }
        SeriesMatrix::new(n, p, values).expect("simulated values are finite")
    }
}

/// Simulates one series from `spec`, using stream 0 of `spec.seed`.
pub fn simulate(spec: &ProcessSpec) -> Result<SeriesMatrix> {
    let sim = Simulator::new(spec)?;
    Ok(sim.draw(&mut replication_rng(spec.seed, 0)))
}

/// Simulates from `spec` with an explicit generator.
pub fn simulate_with_rng(spec: &ProcessSpec, rng: &mut StreamRng) -> Result<SeriesMatrix> {
    Ok(Simulator::new(spec)?.draw(rng))
}
