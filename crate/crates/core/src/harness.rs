//! Monte Carlo size, power and timing studies.
//!
//! Replication `r` of an experiment with master seed `s` draws its data
//! from stream `(s, r)`, and every requested method is applied to that same
//! draw (common random numbers). Reports are therefore identical for any
//! thread count.

use std::fmt::{self, Write as _};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{sri_test, zcq_test, ZcqConfig};
use crate::error::{Error, Result};
use crate::model::{build_mean_signal, InnovationLaw, ProcessSpec, Simulator};
use crate::numeric::normal_cdf;
use crate::series::SeriesMatrix;
use crate::streams::replication_rng;
use crate::testcore::{run_test, TestConfig, TestResult};

/// Two-sided 99% normal quantile.
const Z_99: f64 = 2.5758293035489004;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tn,
    Zcq,
    Sri,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Tn, Method::Zcq, Method::Sri];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Tn => "tn",
            Method::Zcq => "zcq",
            Method::Sri => "sri",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tn" => Some(Method::Tn),
            "zcq" => Some(Method::Zcq),
            "sri" => Some(Method::Sri),
            _ => None,
        }
    }

    /// Applies the method with its default tuning.
    pub fn apply(&self, x: &SeriesMatrix, alpha: f64) -> Result<TestResult> {
        match self {
            Method::Tn => run_test(x, &TestConfig::default().with_alpha(alpha)),
            Method::Zcq => zcq_test(x, &ZcqConfig::default_for(x.n()), alpha),
            Method::Sri => sri_test(x, alpha),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

/// The six power scenarios `(n, p, q)` with their signal scale `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [Scenario::S1, Scenario::S2, Scenario::S3, Scenario::S4, Scenario::S5, Scenario::S6];

    /// `(n, p, q, ω)`
    pub fn design(&self) -> (usize, usize, usize, f64) {
        match self {
            Scenario::S1 => (250, 300, 0, 1.0),
            Scenario::S2 => (250, 300, 2, 0.4),
            Scenario::S3 => (250, 300, 249, 0.005),
            Scenario::S4 => (250, 100, 0, 1.0),
            Scenario::S5 => (250, 100, 2, 0.4),
            Scenario::S6 => (250, 100, 249, 0.005),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|sc| sc.label().eq_ignore_ascii_case(s))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Scenario::S1 => "S1",
            Scenario::S2 => "S2",
            Scenario::S3 => "S3",
            Scenario::S4 => "S4",
            Scenario::S5 => "S5",
            Scenario::S6 => "S6",
        }
    }
}

/// One cell of an experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub label: String,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub innovation: InnovationLaw,
    pub nu: f64,
    pub phi3: f64,
    pub omega: f64,
    pub reps: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub alpha: f64,
}

impl ScenarioSpec {
    /// Null design at `(n, p, q)`.
    pub fn size(n: usize, p: usize, q: usize, innovation: InnovationLaw, reps: usize, seed: u64) -> Self {
        Self {
            label: format!("size(n={n},p={p},q={q})"),
            n,
            p,
            q,
            innovation,
            nu: 1.0,
            phi3: 0.0,
            omega: 1.0,
            reps,
            seed,
            methods: vec![Method::Tn],
            alpha: 0.05,
        }
    }

    /// Alternative of a named scenario.
    pub fn power(scenario: Scenario, nu: f64, phi3: f64, innovation: InnovationLaw, reps: usize, seed: u64) -> Self {
        let (n, p, q, omega) = scenario.design();
        Self {
            label: format!("{}(nu={nu},phi3={phi3})", scenario.label()),
            n,
            p,
            q,
            innovation,
            nu,
            phi3,
            omega,
            reps,
            seed,
            methods: vec![Method::Tn],
            alpha: 0.05,
        }
    }

    pub fn with_methods(mut self, methods: &[Method]) -> Self {
        self.methods = methods.to_vec();
        self
    }

    pub fn is_null(&self) -> bool {
        self.phi3 == 0.0 || self.omega == 0.0
    }

    pub fn process(&self) -> Result<ProcessSpec> {
        let mean = build_mean_signal(self.p, self.nu, self.phi3, self.omega)?;
        Ok(ProcessSpec::reference_design(self.n, self.p, self.q, self.innovation, self.seed).with_mean(mean))
    }

    fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::TooFewReplications { required: 1, got: self.reps });
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods requested".into()));
        }
        Ok(())
    }
}

/// Aggregate for one method within one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: Method,
    pub reps: usize,
    pub failures: usize,
    pub rejections: usize,
    pub reject_rate: f64,
    /// Binomial standard error `√(r(1-r)/successes)`.
    pub se: f64,
    /// 99% normal-approximation interval for the rate.
    pub ci99: (f64, f64),
    /// KS distance of the z-values to N(0,1); null experiments only.
    pub ks: Option<f64>,
    /// Test pipeline only.
    pub time_mean_s: f64,
    pub time_total_s: f64,
    /// Including data simulation.
    pub time_inclusive_mean_s: f64,
    pub z_values: Vec<f64>,
    /// First failure message, if any.
    pub first_failure: Option<String>,
}

/// Flat record emitted as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub method: Method,
    pub reps: usize,
    pub failures: usize,
    pub reject_rate: f64,
    pub se: f64,
    pub ks: Option<f64>,
    pub time_mean_s: f64,
    pub time_total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub scenario: ScenarioSpec,
    pub methods: Vec<MethodReport>,
}

impl MonteCarloReport {
    pub fn method(&self, method: Method) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.method == method)
    }

    pub fn rows(&self) -> Vec<ReportRow> {
        self.methods
            .iter()
            .map(|m| ReportRow {
                scenario: self.scenario.label.clone(),
                method: m.method,
                reps: m.reps,
                failures: m.failures,
                reject_rate: m.reject_rate,
                se: m.se,
                ks: m.ks,
                time_mean_s: m.time_mean_s,
                time_total_s: m.time_total_s,
            })
            .collect()
    }
}

/// Aligned text table for a set of reports.
pub fn render_rows(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<28} {:>6} {:>6} {:>8} {:>8} {:>8} {:>8} {:>12} {:>12}",
        "scenario", "method", "reps", "failures", "rate", "se", "ks", "time_mean_s", "time_total_s"
    );
    for r in rows {
        let ks = r.ks.map_or_else(|| "-".to_string(), |k| format!("{k:.4}"));
        let _ = writeln!(
            out,
            "{:<28} {:>6} {:>6} {:>8} {:>8.4} {:>8.4} {:>8} {:>12.6} {:>12.4}",
            r.scenario, r.method, r.reps, r.failures, r.reject_rate, r.se, ks, r.time_mean_s, r.time_total_s
        );
    }
    out
}

struct Replication {
    simulate_s: f64,
    outcomes: Vec<std::result::Result<TestResult, Error>>,
}

fn replicate(spec: &ScenarioSpec, sim: &Simulator, r: usize) -> Replication {
    let started = Instant::now();
    let x = sim.draw(&mut replication_rng(spec.seed, r as u64));
    let simulate_s = started.elapsed().as_secs_f64();
    let outcomes = spec.methods.iter().map(|m| m.apply(&x, spec.alpha)).collect();
    Replication { simulate_s, outcomes }
}

fn aggregate(spec: &ScenarioSpec, reps: &[Replication]) -> MonteCarloReport {
    let methods = spec
        .methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let mut z_values = Vec::with_capacity(reps.len());
            let (mut rejections, mut failures) = (0usize, 0usize);
            let (mut time_total, mut inclusive_total) = (0.0, 0.0);
            let mut first_failure = None;
            for rep in reps {
                match &rep.outcomes[k] {
                    Ok(res) => {
                        rejections += res.reject as usize;
                        z_values.push(res.z);
                        time_total += res.elapsed;
                        inclusive_total += res.elapsed + rep.simulate_s;
                    }
                    Err(e) => {
                        failures += 1;
                        first_failure.get_or_insert_with(|| e.to_string());
                    }
                }
            }
            let successes = reps.len() - failures;
            let rate = if successes > 0 { rejections as f64 / successes as f64 } else { f64::NAN };
            let se = if successes > 0 { (rate * (1.0 - rate) / successes as f64).sqrt() } else { f64::NAN };
            let ks = if spec.is_null() && z_values.len() >= 2 { ks_distance(&z_values).ok() } else { None };
            let denom = successes.max(1) as f64;
            MethodReport {
                method,
                reps: reps.len(),
                failures,
                rejections,
                reject_rate: rate,
                se,
                ci99: ((rate - Z_99 * se).max(0.0), (rate + Z_99 * se).min(1.0)),
                ks,
                time_mean_s: time_total / denom,
                time_total_s: time_total,
                time_inclusive_mean_s: inclusive_total / denom,
                z_values,
                first_failure,
            }
        })
        .collect();
    MonteCarloReport { scenario: spec.clone(), methods }
}

fn run_experiment(spec: &ScenarioSpec) -> Result<MonteCarloReport> {
    spec.validate()?;
    let sim = Simulator::new(&spec.process()?)?;
    let reps: Vec<Replication> = (0..spec.reps).into_par_iter().map(|r| replicate(spec, &sim, r)).collect();
    let report = aggregate(spec, &reps);
    for m in &report.methods {
        if m.failures > 0 {
            log::warn!(
                "{}: {} of {} replications failed for {} ({})",
                spec.label,
                m.failures,
                m.reps,
                m.method,
                m.first_failure.as_deref().unwrap_or("")
            );
        }
    }
    Ok(report)
}

/// Empirical size under a zero-mean design.
pub fn run_size_experiment(spec: &ScenarioSpec) -> Result<MonteCarloReport> {
    if !spec.is_null() {
        return Err(Error::InvalidParameter("size experiment requires phi3 = 0".into()));
    }
    run_experiment(spec)
}

/// Empirical power with mean `build_mean_signal(p, ν, φ3, ω)`.
pub fn run_power_experiment(spec: &ScenarioSpec) -> Result<MonteCarloReport> {
    if !(spec.phi3 > 0.0) {
        return Err(Error::InvalidParameter("power experiment requires phi3 > 0".into()));
    }
    run_experiment(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub reps: usize,
    pub tn_mean_s: Option<f64>,
    pub zcq_mean_s: Option<f64>,
    pub sri_mean_s: Option<f64>,
    pub tn_total_s: Option<f64>,
    pub zcq_total_s: Option<f64>,
    pub sri_total_s: Option<f64>,
    pub zcq_over_tn: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
}

impl TimingReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"));
        let _ = writeln!(out, "{:>5} {:>5} {:>5} {:>5} {:>12} {:>12} {:>12} {:>12}", "n", "p", "q", "reps", "tn_s", "zcq_s", "sri_s", "zcq/tn");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>5} {:>5} {:>5} {:>5} {:>12} {:>12} {:>12} {:>12}",
                r.n,
                r.p,
                r.q,
                r.reps,
                fmt(r.tn_mean_s),
                fmt(r.zcq_mean_s),
                fmt(r.sri_mean_s),
                r.zcq_over_tn.map_or_else(|| "-".to_string(), |x| format!("{x:.1}"))
            );
        }
        out
    }
}

/// Per-replication wall time of each method, measured sequentially on one
/// thread so methods do not compete for cores.
pub fn run_timing_benchmark(specs: &[ScenarioSpec], reps: usize) -> Result<TimingReport> {
    if reps < 10 {
        return Err(Error::TooFewReplications { required: 10, got: reps });
    }
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let spec = ScenarioSpec { reps, ..spec.clone() };
        spec.validate()?;
        let sim = Simulator::new(&spec.process()?)?;
        let mut totals = [None::<f64>; 3];
        for r in 0..reps {
            let x = sim.draw(&mut replication_rng(spec.seed, r as u64));
            for &method in &spec.methods {
                let started = Instant::now();
                let outcome = method.apply(&x, spec.alpha);
                let elapsed = started.elapsed().as_secs_f64();
                outcome?;
                let slot = &mut totals[method as usize];
                *slot = Some(slot.unwrap_or(0.0) + elapsed);
            }
        }
        let mean = |m: Method| totals[m as usize].map(|t| t / reps as f64);
        let (tn, zcq) = (mean(Method::Tn), mean(Method::Zcq));
        rows.push(TimingRow {
            n: spec.n,
            p: spec.p,
            q: spec.q,
            reps,
            tn_mean_s: tn,
            zcq_mean_s: zcq,
            sri_mean_s: mean(Method::Sri),
            tn_total_s: totals[Method::Tn as usize],
            zcq_total_s: totals[Method::Zcq as usize],
            sri_total_s: totals[Method::Sri as usize],
            zcq_over_tn: tn.zip(zcq).map(|(t, z)| z / t),
        });
    }
    Ok(TimingReport { rows })
}

/// Two-sided Kolmogorov–Smirnov distance to the standard normal CDF.
pub fn ks_distance(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = normal_cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsCheck {
    pub distance: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// KS distance of `z_values` to N(0,1), passing when below `threshold`.
pub fn ks_normality_check(z_values: &[f64], threshold: f64) -> Result<KsCheck> {
    if z_values.len() < 100 {
        return Err(Error::InvalidParameter(format!(
            "normality check needs at least 100 values, got {}",
            z_values.len()
        )));
    }
    let distance = ks_distance(z_values)?;
    Ok(KsCheck { distance, threshold, pass: distance < threshold })
}
