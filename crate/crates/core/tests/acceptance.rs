//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion; exits non-zero if any fails.

use std::time::Instant;

use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use hdmean::baselines::{band_excluded_pair_count, sri_test, zcq_statistic};
use hdmean::harness::{
    ks_normality_check, run_power_experiment, run_size_experiment, run_timing_benchmark, Method, MonteCarloReport,
    Scenario, ScenarioSpec,
};
use hdmean::model::{
    build_ma_coefficient, build_sigma, simulate, CrossSectionCovSpec, InnovationLaw, MACoefficientSpec, ProcessSpec,
};
use hdmean::oracle::{acov_coeff, matrix_autocov, true_sigma2_n};
use hdmean::testcore::{
    build_gram, mu_hat, s_h1h2, sigma2_hat, split_pair_count, statistic_tn, BandwidthPolicy, TestConfig,
};
use hdmean::{cli, run_test, SeriesMatrix};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn gaussian_matrix(n: usize, p: usize, seed: u64) -> SeriesMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n * p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    SeriesMatrix::new(n, p, values).unwrap()
}

fn pct(report: &MonteCarloReport, method: Method) -> f64 {
    100.0 * report.method(method).unwrap().reject_rate
}

fn ci_pct(report: &MonteCarloReport, method: Method) -> String {
    let (lo, hi) = report.method(method).unwrap().ci99;
    format!("99% CI [{:.1}, {:.1}]", 100.0 * lo, 100.0 * hi)
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn size_report(n: usize, p: usize, q: usize, law: InnovationLaw, seed: u64, methods: &[Method]) -> MonteCarloReport {
    let spec = ScenarioSpec::size(n, p, q, law, 1000, seed).with_methods(methods);
    run_size_experiment(&spec).expect("size experiment")
}

fn criterion_1() -> Outcome {
    let cases = [
        ((250, 100, 0), InnovationLaw::StandardGaussian, 7.5),
        ((250, 300, 2), InnovationLaw::StandardGaussian, 6.4),
        ((250, 100, 0), InnovationLaw::gamma_4_2(), 6.4),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, ((n, p, q), law, target)) in cases.into_iter().enumerate() {
        let report = size_report(n, p, q, law, 101 + k as u64, &[Method::Tn]);
        let rate = pct(&report, Method::Tn);
        let ok = within(rate, target, 3.0);
        pass &= ok;
        parts.push(format!("({n},{p},{q}) {}: {rate:.1}% vs {target}±3 {}", law_name(&law), ci_pct(&report, Method::Tn)));
    }
    Outcome::new(pass, parts.join("; "))
}

fn law_name(law: &InnovationLaw) -> &'static str {
    match law {
        InnovationLaw::StandardGaussian => "gauss",
        InnovationLaw::CenteredGamma { .. } => "gamma",
    }
}

fn criterion_2() -> Outcome {
    let targets = [48.6, 69.4, 85.5, 95.3, 98.8];
    let phis = [0.05, 0.06, 0.07, 0.08, 0.09];
    let mut rates = Vec::new();
    let mut pass = true;
    for (&phi3, &target) in phis.iter().zip(&targets) {
        let spec = ScenarioSpec::power(Scenario::S1, 0.2, phi3, InnovationLaw::StandardGaussian, 1000, 202);
        let report = run_power_experiment(&spec).expect("power experiment");
        let rate = pct(&report, Method::Tn);
        pass &= within(rate, target, 5.0);
        rates.push(rate);
    }
    let inversions: Vec<f64> = rates.windows(2).filter(|w| w[1] < w[0]).map(|w| w[0] - w[1]).collect();
    let monotone = inversions.is_empty() || (inversions.len() == 1 && inversions[0] <= 1.0);
    let shown: Vec<String> = rates.iter().map(|r| format!("{r:.1}")).collect();
    Outcome::new(
        pass && monotone,
        format!("S1 nu=0.2 powers [{}] vs {targets:?} ±5; inversions {inversions:?}", shown.join(", ")),
    )
}

fn criterion_3() -> Outcome {
    let sri = size_report(250, 300, 2, InnovationLaw::StandardGaussian, 303, &[Method::Sri]);
    let zcq = size_report(250, 100, 0, InnovationLaw::StandardGaussian, 304, &[Method::Zcq]);
    let (sri_rate, zcq_rate) = (pct(&sri, Method::Sri), pct(&zcq, Method::Zcq));
    Outcome::new(
        sri_rate >= 95.0 && within(zcq_rate, 5.8, 3.0),
        format!(
            "SRI (250,300,2) {sri_rate:.1}% (need >= 95); ZCQ (250,100,0) {zcq_rate:.1}% vs 5.8±3 {}",
            ci_pct(&zcq, Method::Zcq)
        ),
    )
}

fn criterion_4() -> Outcome {
    let spec = ScenarioSpec::size(500, 300, 0, InnovationLaw::StandardGaussian, 50, 404).with_methods(&[Method::Tn, Method::Zcq]);
    let report = run_timing_benchmark(&[spec], 50).expect("timing benchmark");
    let row = &report.rows[0];
    let ratio = row.zcq_over_tn.unwrap_or(f64::NAN);
    Outcome::new(
        ratio >= 10.0,
        format!(
            "(500,300,0) over 50 reps: T_n {:.4}s, ZCQ {:.4}s per rep, ratio {ratio:.1} (need >= 10)",
            row.tn_mean_s.unwrap_or(f64::NAN),
            row.zcq_mean_s.unwrap_or(f64::NAN)
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, law) in [InnovationLaw::StandardGaussian, InnovationLaw::gamma_4_2()].into_iter().enumerate() {
        let report = size_report(500, 300, 2, law, 505 + k as u64, &[Method::Tn]);
        let m = report.method(Method::Tn).unwrap();
        let check = ks_normality_check(&m.z_values, 0.08).expect("ks check");
        pass &= check.pass && m.z_values.len() == 1000;
        parts.push(format!("{}: KS {:.4} over {} z-values", law_name(&law), check.distance, m.z_values.len()));
    }
    Outcome::new(pass, format!("{} (need < 0.08)", parts.join("; ")))
}

/// `(1/n) Σ_{s<t} X_tᵀX_s` and the matching absolute scale.
fn pairwise_tn(x: &SeriesMatrix) -> (f64, f64) {
    let n = x.n();
    let (mut sum, mut scale) = (0.0, 0.0);
    for t in 0..n {
        for s in 0..t {
            let ip: f64 = x.row(t).iter().zip(x.row(s)).map(|(a, b)| a * b).sum();
            sum += ip;
            scale += ip.abs();
        }
    }
    (sum / n as f64, scale / n as f64)
}

/// Split-sample variance estimate evaluated directly from the data.
fn quadruple_loop_sigma2(x: &SeriesMatrix, m: usize) -> f64 {
    let (n, p) = (x.n(), x.p());
    let mean = x.column_means();
    let c = |t: usize, j: usize| x.get(t, j) - mean[j];
    let ip = |t: usize, s: usize| (0..p).map(|j| c(t, j) * c(s, j)).sum::<f64>();
    let half = n / 2;
    let s = |h1: usize, h2: usize| {
        let mut sum = 0.0;
        for t in 0..half - h2 {
            for u in t + half..n - h2 {
                sum += ip(t, u) * ip(t + h1, u + h2);
            }
        }
        let denom = (n as f64 - h2 as f64 / 2.0 - 1.5 * half as f64 + 0.5) * (half - h2) as f64;
        sum / denom
    };
    let mut total = s(0, 0);
    for h in 1..=m {
        total += 2.0 * s(h, 0) + 2.0 * s(0, h);
    }
    for h1 in 1..=m {
        for h2 in 1..=m {
            total += 4.0 * s(h1, h2);
        }
    }
    0.5 * total
}

/// Small samples can give a negative estimate; the error carries the raw value.
fn sigma2_raw(g: &hdmean::testcore::GramMatrix, m: usize) -> f64 {
    match sigma2_hat(g, m) {
        Ok(v) | Err(hdmean::Error::NonPositiveVariance(v)) => v,
        Err(e) => panic!("{e}"),
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst_a: f64 = 0.0;
    for k in 0..100 {
        let n = rng.random_range(2..=50);
        let p = rng.random_range(1..=20);
        let x = gaussian_matrix(n, p, 1000 + k);
        let (brute, scale) = pairwise_tn(&x);
        let rel = (statistic_tn(&x) - brute).abs() / brute.abs().max(scale).max(f64::MIN_POSITIVE);
        worst_a = worst_a.max(rel);
    }
    let mut worst_b: f64 = 0.0;
    for k in 0..20 {
        let x = gaussian_matrix(40, 5, 2000 + k);
        let m = hdmean::testcore::select_m(40, 5, BandwidthPolicy::Auto).unwrap();
        let fast = sigma2_raw(&build_gram(&x), m);
        let slow = quadruple_loop_sigma2(&x, m);
        worst_b = worst_b.max((fast - slow).abs() / slow.abs());
    }
    let (reps, n, p) = (200, 4000, 20);
    let (mut s00, mut s10) = (0.0, 0.0);
    for r in 0..reps {
        let g = build_gram(&gaussian_matrix(n, p, 3000 + r));
        s00 += s_h1h2(&g, 0, 0).unwrap();
        s10 += s_h1h2(&g, 1, 0).unwrap();
    }
    let tr = p as f64;
    let (s00, s10) = (s00 / reps as f64, s10 / reps as f64);
    let pass_c = within(s00 / tr, 1.0, 0.05) && (s10 / tr).abs() <= 0.05;
    Outcome::new(
        worst_a <= 1e-10 && worst_b <= 1e-9 && pass_c,
        format!(
            "(a) max rel err {worst_a:.2e}; (b) max rel err {worst_b:.2e}; (c) mean S00 {s00:.3}, mean S10 {s10:.4} vs tr = {tr}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let (n, p, b) = (2000, 50, vec![1.0, 0.5]);
    let closed_form = 0.5 * 1.5f64.powi(4) * p as f64;
    let oracle = true_sigma2_n(&b, &DMatrix::identity(p, p));
    let spec = ProcessSpec::scalar_linear(n, CrossSectionCovSpec::identity(p), b, InnovationLaw::StandardGaussian, 0);
    let mut ratios: Vec<f64> = (0..200)
        .map(|r| {
            let x = simulate(&spec.clone().with_seed(700 + r)).unwrap();
            sigma2_hat(&build_gram(&x), 2).unwrap() / oracle
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let median = 0.5 * (ratios[99] + ratios[100]);
    Outcome::new(
        (0.8..=1.2).contains(&median) && (oracle - closed_form).abs() <= 1e-12 * closed_form,
        format!("median ratio {median:.4} (need [0.8, 1.2]); sigma2_n oracle {oracle} vs closed form {closed_form}"),
    )
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

type Check = (&'static str, Box<dyn Fn() -> Result<(), String>>);

fn property<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg.into()))
    }
}

fn invariant_checks() -> Vec<Check> {
    vec![
        (
            "exact symmetry of sigma and A_h",
            Box::new(|| {
                property(48, (1usize..60, 0.0f64..1.0, -1.0f64..1.0, 1usize..4), |(p, w, phi, h)| {
                    let s = build_sigma(&CrossSectionCovSpec { p, w, phi2: phi });
                    let a = build_ma_coefficient(&MACoefficientSpec { q: 3, phi1: phi, w }, h, p).unwrap();
                    ensure(s == s.transpose() && a == a.transpose(), "asymmetric")
                })
            }),
        ),
        (
            "affine mean shift of the simulator",
            Box::new(|| {
                property(16, (10usize..40, 1usize..12, 0usize..3, any::<u64>()), |(n, p, q, seed)| {
                    let spec = ProcessSpec::reference_design(n, p, q, InnovationLaw::StandardGaussian, seed);
                    let base = simulate(&spec).unwrap();
                    let mu: Vec<f64> = (0..p).map(|j| 0.1 * j as f64 - 0.3).collect();
                    let shifted = simulate(&spec.clone().with_mean(mu.clone())).unwrap();
                    let exact = (0..n).all(|t| (0..p).all(|j| shifted.get(t, j) == base.get(t, j) + mu[j]));
                    ensure(exact, "shift not exact")
                })
            }),
        ),
        (
            "innovation moments over 1e6 draws",
            Box::new(|| {
                for law in [InnovationLaw::StandardGaussian, InnovationLaw::gamma_4_2()] {
                    let spec = ProcessSpec::scalar_linear(1_000_000, CrossSectionCovSpec::identity(1), vec![1.0], law, 808);
                    let z = simulate(&spec).map_err(|e| e.to_string())?;
                    let v = z.values();
                    let n = v.len() as f64;
                    let mean = v.iter().sum::<f64>() / n;
                    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                    let kurt = v.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n / (var * var);
                    if mean.abs() >= 0.005 || (var - 1.0).abs() >= 0.01 || (kurt - law.fourth_moment()).abs() >= 0.1 {
                        return Err(format!("{law:?}: mean {mean}, var {var}, kurtosis {kurt}"));
                    }
                }
                Ok(())
            }),
        ),
        (
            "pooled marginal covariance matches the analytic lag-0 autocovariance",
            Box::new(|| {
                let spec = ProcessSpec::reference_design(50_000, 5, 2, InnovationLaw::StandardGaussian, 809);
                let x = simulate(&spec).map_err(|e| e.to_string())?.to_dmatrix();
                let n = x.nrows() as f64;
                let mean = x.row_mean();
                let centered = DMatrix::from_fn(x.nrows(), x.ncols(), |t, j| x[(t, j)] - mean[j]);
                let sample = centered.transpose() * &centered / n;
                let truth = matrix_autocov(&spec, 0).map_err(|e| e.to_string())?;
                let rel = (&sample - &truth).norm() / truth.norm();
                if rel < 0.05 { Ok(()) } else { Err(format!("relative Frobenius error {rel}")) }
            }),
        ),
        (
            "Cauchy-Schwarz bound and long-run identity for a_h",
            Box::new(|| {
                property(64, prop::collection::vec(-2.0f64..2.0, 1..8), |b| {
                    let a0 = acov_coeff(&b, 0);
                    let s: f64 = b.iter().sum();
                    let long_run = a0 + 2.0 * (1..b.len()).map(|h| acov_coeff(&b, h)).sum::<f64>();
                    let bounded = (0..b.len() + 2).all(|h| acov_coeff(&b, h).abs() <= a0 + 1e-12);
                    ensure(bounded && (long_run - s * s).abs() <= 1e-12 * (1.0 + s * s), "identity failed")
                })
            }),
        ),
        (
            "lag-0 autocovariance is symmetric PSD",
            Box::new(|| {
                property(12, (1usize..30, 0usize..4), |(p, q)| {
                    let spec = ProcessSpec::reference_design(50, p, q, InnovationLaw::StandardGaussian, 0);
                    let g0 = matrix_autocov(&spec, 0).unwrap();
                    let min = g0.clone().symmetric_eigen().eigenvalues.min();
                    ensure(g0 == g0.transpose() && min >= -1e-8, format!("min eigenvalue {min}"))
                })
            }),
        ),
        (
            "sigma2_n equals half tr(Omega^2) formed the long way",
            Box::new(|| {
                property(32, (prop::collection::vec(-1.5f64..1.5, 1..5), 1usize..12), |(b, p)| {
                    let sigma = build_sigma(&CrossSectionCovSpec::reference(p));
                    let lr = acov_coeff(&b, 0) + 2.0 * (1..b.len()).map(|h| acov_coeff(&b, h)).sum::<f64>();
                    let omega = &sigma * lr;
                    let long_way = 0.5 * (&omega * &omega).trace();
                    ensure(rel_close(true_sigma2_n(&b, &sigma), long_way, 1e-10), "mismatch")
                })
            }),
        ),
        (
            "off-diagonal identity for the statistic",
            Box::new(|| {
                property(48, (2usize..40, 1usize..10, any::<u64>()), |(n, p, seed)| {
                    let x = gaussian_matrix(n, p, seed);
                    let (brute, scale) = pairwise_tn(&x);
                    ensure((statistic_tn(&x) - brute).abs() <= 1e-10 * brute.abs().max(scale), "identity failed")
                })
            }),
        ),
        (
            "shift invariance of the centering and variance, not of the statistic",
            Box::new(|| {
                property(24, (20usize..60, 1usize..8, any::<u64>()), |(n, p, seed)| {
                    let x = gaussian_matrix(n, p, seed);
                    let y = x.map(|_, j, v| v + 0.5 + j as f64).unwrap();
                    let (gx, gy) = (build_gram(&x), build_gram(&y));
                    let same = rel_close(mu_hat(&gx, 2).unwrap(), mu_hat(&gy, 2).unwrap(), 1e-8)
                        && rel_close(sigma2_raw(&gx, 2), sigma2_raw(&gy, 2), 1e-8);
                    ensure(same && !rel_close(statistic_tn(&x), statistic_tn(&y), 1e-3), "shift behaviour")
                })
            }),
        ),
        (
            "orthogonal invariance",
            Box::new(|| {
                property(24, (20usize..60, 2usize..10, any::<u64>()), |(n, p, seed)| {
                    let x = gaussian_matrix(n, p, seed);
                    let q = DMatrix::from_row_slice(p, p, gaussian_matrix(p, p, seed ^ 1).values()).qr().q();
                    let y = SeriesMatrix::from_dmatrix(&(x.to_dmatrix() * q)).unwrap();
                    let (gx, gy) = (build_gram(&x), build_gram(&y));
                    let same = rel_close(statistic_tn(&x), statistic_tn(&y), 1e-8)
                        && rel_close(mu_hat(&gx, 2).unwrap(), mu_hat(&gy, 2).unwrap(), 1e-8)
                        && rel_close(sigma2_raw(&gx, 2), sigma2_raw(&gy, 2), 1e-8);
                    ensure(same, "not invariant")
                })
            }),
        ),
        (
            "scale equivariance with invariant decision",
            Box::new(|| {
                property(24, (40usize..80, 2usize..10, any::<u64>(), 0.1f64..10.0), |(n, p, seed, lambda)| {
                    let x = gaussian_matrix(n, p, seed).map(|_, _, v| v + 0.1).unwrap();
                    let y = x.map(|_, _, v| lambda * v).unwrap();
                    let cfg = TestConfig::default();
                    let (Ok(a), Ok(b)) = (run_test(&x, &cfg), run_test(&y, &cfg)) else {
                        return Ok(());
                    };
                    let l2 = lambda * lambda;
                    let ok = rel_close(b.t_n, l2 * a.t_n, 1e-8)
                        && rel_close(b.mu_hat, l2 * a.mu_hat, 1e-8)
                        && rel_close(b.sigma2_hat, l2 * l2 * a.sigma2_hat, 1e-8)
                        && (a.z - b.z).abs() <= 1e-8 * (1.0 + a.z.abs())
                        && (a.p_value - b.p_value).abs() <= 1e-8
                        && a.reject == b.reject;
                    ensure(ok, "not equivariant")
                })
            }),
        ),
        (
            "split-sample denominator equals the pair count",
            Box::new(|| {
                for n in 2..200usize {
                    let half = n / 2;
                    for h2 in 0..half {
                        let count: usize = (0..half - h2).map(|t| n - h2 - (t + half)).sum();
                        if split_pair_count(n, h2) != count as f64 {
                            return Err(format!("n={n} h2={h2}"));
                        }
                    }
                }
                Ok(())
            }),
        ),
        (
            "band-excluded statistic: b=1 identity, time reversal, pair count",
            Box::new(|| {
                property(32, (3usize..40, 1usize..6, any::<u64>(), 1usize..20), |(n, p, seed, b)| {
                    let x = gaussian_matrix(n, p, seed);
                    let (half_sum, scale) = pairwise_tn(&x);
                    let u = 2.0 * n as f64 * half_sum / ((n - 1) * n) as f64;
                    let tol = 1e-10 * u.abs().max(2.0 * n as f64 * scale / ((n - 1) * n) as f64);
                    ensure((zcq_statistic(&x, 1).unwrap() - u).abs() <= tol, "b=1 identity")?;
                    let b = b.min(n - 1);
                    let rev = SeriesMatrix::from_rows(&x.rows().rev().map(<[f64]>::to_vec).collect::<Vec<_>>()).unwrap();
                    ensure(rel_close(zcq_statistic(&x, b).unwrap(), zcq_statistic(&rev, b).unwrap(), 1e-10), "reversal")?;
                    let count = (0..n).flat_map(|t| (0..n).map(move |s| (t, s))).filter(|(t, s)| t.abs_diff(*s) >= b).count();
                    ensure(band_excluded_pair_count(n, b) == ((n - b) * (n - b + 1)) as f64 && count == (n - b) * (n - b + 1), "count")
                })
            }),
        ),
        (
            "SRI invariance under per-coordinate rescaling",
            Box::new(|| {
                property(24, (10usize..60, 1usize..12, any::<u64>()), |(n, p, seed)| {
                    let x = gaussian_matrix(n, p, seed).map(|_, _, v| v + 0.05).unwrap();
                    let y = x.map(|_, j, v| v * (0.5 + j as f64)).unwrap();
                    let (a, b) = (sri_test(&x, 0.05).unwrap(), sri_test(&y, 0.05).unwrap());
                    ensure((a.z - b.z).abs() <= 1e-8 * (1.0 + a.z.abs()) && a.reject == b.reject, "not invariant")
                })
            }),
        ),
        (
            "reproducibility across thread counts and failure accounting",
            Box::new(|| {
                let spec = ScenarioSpec::size(40, 6, 1, InnovationLaw::StandardGaussian, 60, 810).with_methods(&Method::ALL);
                let run = |threads| {
                    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| run_size_experiment(&spec))
                };
                let (one, three) = (run(1).map_err(|e| e.to_string())?, run(3).map_err(|e| e.to_string())?);
                for (a, b) in one.methods.iter().zip(&three.methods) {
                    if a.rejections != b.rejections || a.failures != b.failures || a.z_values != b.z_values {
                        return Err(format!("{} differs across thread counts", a.method));
                    }
                    if a.reps != spec.reps || a.z_values.len() + a.failures != a.reps {
                        return Err(format!("{}: successes + failures != reps", a.method));
                    }
                }
                Ok(())
            }),
        ),
        (
            "CLI output is a pure function of its inputs and human numbers match JSON",
            Box::new(|| {
                let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
                let path = dir.path().join("x.csv");
                let path_s = path.to_str().unwrap().to_string();
                let run = |args: &[&str]| {
                    let (mut out, mut err) = (Vec::new(), Vec::new());
                    let code = cli::run(args.iter().copied(), &mut out, &mut err);
                    (code, String::from_utf8(out).unwrap())
                };
                let sim = ["hdmean", "simulate", "--n", "60", "--p", "8", "--q", "2", "--seed", "5"];
                let (c1, a) = run(&sim);
                let (c2, b) = run(&sim);
                if c1 != 0 || c2 != 0 || a != b {
                    return Err("simulate is not reproducible".into());
                }
                std::fs::write(&path, &a).map_err(|e| e.to_string())?;
                let (_, human) = run(&["hdmean", "test", &path_s]);
                let (_, json) = run(&["hdmean", "test", &path_s, "--json"]);
                let value: serde_json::Value = serde_json::from_str(&json).map_err(|e| e.to_string())?;
                for line in human.lines() {
                    let mut it = line.split_whitespace();
                    let (key, shown) = (it.next().unwrap_or(""), it.next().unwrap_or(""));
                    let expected = match &value[key] {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    if shown != expected {
                        return Err(format!("{key}: human `{shown}` vs json `{expected}`"));
                    }
                }
                Ok(())
            }),
        ),
    ]
}

fn criterion_8() -> Outcome {
    let checks = invariant_checks();
    let total = checks.len();
    let failures: Vec<String> = checks
        .into_iter()
        .filter_map(|(name, check)| check().err().map(|e| format!("{name}: {e}")))
        .collect();
    Outcome::new(
        failures.is_empty(),
        if failures.is_empty() { format!("{total} invariant groups hold") } else { failures.join(" | ") },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("size reproduction", criterion_1),
        ("power reproduction", criterion_2),
        ("baseline signature", criterion_3),
        ("timing ratio", criterion_4),
        ("null normality", criterion_5),
        ("oracle equivalence", criterion_6),
        ("estimator consistency", criterion_7),
        ("invariant suite", criterion_8),
    ];
    // optional numeric arguments select criteria, e.g. `-- 4 6`
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let started = Instant::now();
    let (mut failed, mut ran) = (0, 0);
    for (k, (name, run)) in criteria.iter().enumerate() {
        if !selected.is_empty() && !selected.contains(&(k + 1)) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let outcome = run();
        failed += usize::from(!outcome.pass);
        println!(
            "criterion {} {:<22} {} ({:.1}s) {}",
            k + 1,
            name,
            if outcome.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!("acceptance: {} of {ran} criteria passed in {:.1}s", ran - failed, started.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
