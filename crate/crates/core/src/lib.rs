//! High-dimensional mean testing for time series with temporal dependence.
//!
//! The crate tests `H0: μ = 0` for a `p`-dimensional stationary series
//! `X_1..X_n` with the statistic
//!
//! ```text
//! T_n = ½ (n x̄ᵀx̄ - n⁻¹ Σ_t X_tᵀX_t)
//! ```
//!
//! centred by a bandwidth-`M` estimate of `Σ_{h≤M} (1-h/n) tr(Γ_h)` and scaled
//! by a split-sample estimate of `½ tr(Ω²)`. Around it sit a simulator for
//! the moving-average reference design ([`model`]), closed-form oracles
//! ([`oracle`]), two comparison tests ([`baselines`]), a Monte Carlo harness
//! ([`harness`]) and the command-line front end ([`cli`]).

pub mod baselines;
pub mod cli;
pub mod error;
pub mod harness;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod series;
pub mod streams;
pub mod testcore;

pub use error::{Error, Result};
pub use series::SeriesMatrix;
pub use testcore::{run_test, BandwidthPolicy, TestConfig, TestResult};
