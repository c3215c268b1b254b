//! Command-line front end: `test`, `simulate`, `mc`, `bench` and `rolling`.
//!
//! Exit codes: 0 on completion (whatever the decision), 2 for usage or input
//! errors, 3 for numerical failures such as a non-positive variance estimate.
//! `HDMEAN_THREADS` caps the worker count (0 or unset = all cores).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::baselines::{sri_test, zcq_test, ZcqConfig};
use crate::error::{Error, Result};
use crate::harness::{
    render_rows, run_power_experiment, run_size_experiment, run_timing_benchmark, Method, MonteCarloReport, Scenario,
    ScenarioSpec,
};
use crate::model::{build_mean_signal, simulate, InnovationLaw, ProcessSpec};
use crate::numeric::normal_upper_tail;
use crate::series::SeriesMatrix;
use crate::testcore::{rolling_with, run_test, TestConfig, TestResult, MIN_SAMPLE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hdmean", version, about = "High-dimensional mean tests for dependent time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test H0: mean = 0 on a CSV panel (rows = time, columns = variables).
    Test(TestArgs),
    /// Write a simulated panel from the moving-average reference design.
    Simulate(SimulateArgs),
    /// Monte Carlo size or power study.
    Mc(McArgs),
    /// Per-replication timings of each method.
    Bench(BenchArgs),
    /// Rolling-window p-values.
    Rolling(RollingArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Tn,
    Zcq,
    Sri,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Tn => Method::Tn,
            MethodArg::Zcq => Method::Zcq,
            MethodArg::Sri => Method::Sri,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Dist {
    Gauss,
    Gamma,
}

impl From<Dist> for InnovationLaw {
    fn from(d: Dist) -> Self {
        match d {
            Dist::Gauss => InnovationLaw::StandardGaussian,
            Dist::Gamma => InnovationLaw::gamma_4_2(),
        }
    }
}

#[derive(Debug, Args)]
struct MethodOptions {
    #[arg(long, value_enum, default_value = "tn")]
    method: MethodArg,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Fixed bandwidth M (default: ceil(min(n,p)^(1/8))).
    #[arg(long = "M", alias = "m")]
    bandwidth: Option<usize>,
    /// Exclusion bandwidth for the zcq method (default: ceil(n^(1/4))).
    #[arg(long)]
    zcq_b: Option<usize>,
    /// Lag window for the zcq method (default: floor(n/10)).
    #[arg(long)]
    lag_window: Option<usize>,
    /// Two-sided variant doubling the upper tail. Not the standard one-sided procedure.
    #[arg(long)]
    two_sided: bool,
}

#[derive(Debug, Args)]
struct TestArgs {
    input: PathBuf,
    #[command(flatten)]
    options: MethodOptions,
    /// Treat the first column as ISO dates (labels only).
    #[arg(long)]
    date_column: bool,
    #[arg(long)]
    json: bool,
    /// Include wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    q: usize,
    #[arg(long, value_enum, default_value = "gauss")]
    dist: Dist,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 0.0)]
    phi3: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct McArgs {
    /// S1..S6, or `size` for a null design set by --n/--p/--q.
    #[arg(long)]
    scenario: String,
    #[arg(long, value_enum, default_value = "gauss")]
    dist: Dist,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Comma-separated subset of tn,zcq,sri.
    #[arg(long, default_value = "tn")]
    methods: String,
    /// Sparsity levels for S1..S6.
    #[arg(long, default_value = "0.2,0.4,0.8")]
    nu: String,
    /// Signal strengths for S1..S6.
    #[arg(long, default_value = "0.05,0.06,0.07,0.08,0.09")]
    phi3: String,
    #[arg(long, default_value_t = 250)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    q: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated `n x p` designs.
    #[arg(long, default_value = "250x100,500x300")]
    sizes: String,
    #[arg(long, default_value_t = 0)]
    q: usize,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, default_value = "tn,zcq,sri")]
    methods: String,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct RollingArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 260)]
    window: usize,
    #[command(flatten)]
    options: MethodOptions,
    /// Treat the first column as ISO dates and use them as row labels.
    #[arg(long)]
    date_column: bool,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

/// Parsed CSV panel.
#[derive(Debug, Clone, PartialEq)]
pub struct DataFile {
    pub columns: Option<Vec<String>>,
    pub labels: Option<Vec<String>>,
    pub series: SeriesMatrix,
}

const MISSING_HINT: &str = "missing values are not imputed; remove incomplete rows before testing";

/// Reads a CSV panel. A first row that does not parse as numbers is taken
/// as a header; every other row must have the same number of fields.
pub fn parse_data<R: Read>(reader: R, date_column: bool) -> Result<DataFile> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut columns = None;
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;
    for (k, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(k as u64 + 1, |p| p.line());
        let fields: Vec<&str> = record.iter().collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        let offset = usize::from(date_column);
        if k == 0 && fields[offset.min(fields.len())..].iter().any(|f| !f.is_empty() && f.parse::<f64>().is_err()) {
            columns = Some(fields.iter().skip(offset).map(|s| s.to_string()).collect::<Vec<_>>());
            width = Some(fields.len());
            continue;
        }
        match width {
            Some(w) if w != fields.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {w} fields, found {}", fields.len()),
                })
            }
            None => width = Some(fields.len()),
            _ => {}
        }
        if fields.len() <= offset {
            return Err(Error::Parse { line, message: "row has no data columns".into() });
        }
        if date_column {
            let label = fields[0];
            NaiveDate::parse_from_str(label, "%Y-%m-%d").map_err(|_| Error::Parse {
                line,
                message: format!("`{label}` is not an ISO date (YYYY-MM-DD)"),
            })?;
            labels.push(label.to_string());
        }
        for (j, cell) in fields.iter().enumerate().skip(offset) {
            if cell.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: format!("missing value in column {}; {MISSING_HINT}", j + 1),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse `{cell}` in column {} as a number", j + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite value `{cell}` in column {}", j + 1),
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows < MIN_SAMPLE {
        return Err(Error::InvalidParameter(format!("need at least {MIN_SAMPLE} data rows, found {rows}")));
    }
    let p = values.len() / rows;
    Ok(DataFile {
        columns,
        labels: date_column.then_some(labels),
        series: SeriesMatrix::new(rows, p, values)?,
    })
}

pub fn read_data_file(path: &Path, date_column: bool) -> Result<DataFile> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_data(io::BufReader::new(file), date_column)
}

/// Writes a panel as CSV with header `x1..xp`; values use round-trip formatting.
pub fn write_series<W: Write>(writer: W, x: &SeriesMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record((1..=x.p()).map(|j| format!("x{j}"))).map_err(io_err)?;
    for row in x.rows() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

fn apply_method(x: &SeriesMatrix, opts: &MethodOptions) -> Result<TestResult> {
    match opts.method {
        MethodArg::Tn => {
            let mut cfg = TestConfig::default().with_alpha(opts.alpha);
            if let Some(m) = opts.bandwidth {
                cfg = cfg.with_bandwidth(m);
            }
            run_test(x, &cfg)
        }
        MethodArg::Zcq => {
            let mut cfg = ZcqConfig::default_for(x.n());
            if let Some(b) = opts.zcq_b {
                cfg.b = b;
            }
            if let Some(l) = opts.lag_window {
                cfg.lag_window = l;
            }
            zcq_test(x, &cfg, opts.alpha)
        }
        MethodArg::Sri => sri_test(x, opts.alpha),
    }
}

/// `(p_value, reject)` under the requested sidedness.
fn decision(result: &TestResult, opts: &MethodOptions) -> (f64, bool) {
    if opts.two_sided {
        let p = (2.0 * normal_upper_tail(result.z.abs())).min(1.0);
        (p, p < opts.alpha)
    } else {
        (result.p_value, result.reject)
    }
}

fn result_json(x: &SeriesMatrix, result: &TestResult, opts: &MethodOptions, timing: bool) -> Value {
    let (p_value, reject) = decision(result, opts);
    let mut obj = Map::new();
    obj.insert("method".into(), json!(Method::from(opts.method).name()));
    obj.insert("n".into(), json!(x.n()));
    obj.insert("p".into(), json!(x.p()));
    obj.insert("alpha".into(), json!(opts.alpha));
    obj.insert("statistic".into(), json!(result.t_n));
    obj.insert("mu_hat".into(), json!(result.mu_hat));
    obj.insert("sigma2_hat".into(), json!(result.sigma2_hat));
    obj.insert("z".into(), json!(result.z));
    obj.insert("p_value".into(), json!(p_value));
    obj.insert("reject".into(), json!(reject));
    obj.insert("m_used".into(), json!(result.m_used));
    obj.insert("two_sided".into(), json!(opts.two_sided));
    if timing {
        obj.insert("elapsed_s".into(), json!(result.elapsed));
    }
    Value::Object(obj)
}

/// Human-readable `key: value` lines built from the JSON values, so both
/// modes print identical numbers.
fn render_human(value: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = value {
        for (k, v) in map {
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k:<11} {text}\n"));
        }
    }
    out
}

fn parse_methods(s: &str) -> Result<Vec<Method>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| Method::parse(t).ok_or_else(|| Error::InvalidParameter(format!("unknown method `{t}` (valid: tn, zcq, sri)"))))
        .collect()
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::InvalidParameter(format!("cannot parse {what} value `{t}`"))))
        .collect()
}

fn parse_sizes(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (n, p) = t
                .split_once(['x', 'X'])
                .ok_or_else(|| Error::InvalidParameter(format!("size `{t}` is not of the form NxP")))?;
            let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| Error::InvalidParameter(format!("bad size `{t}`")));
            Ok((parse(n)?, parse(p)?))
        })
        .collect()
}

fn open_output<'a>(out: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(stdout),
    })
}

fn cmd_test(args: &TestArgs, out: &mut dyn Write) -> Result<()> {
    let data = read_data_file(&args.input, args.date_column)?;
    let result = apply_method(&data.series, &args.options)?;
    let value = result_json(&data.series, &result, &args.options, args.timing);
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json"))?;
    } else {
        write!(out, "{}", render_human(&value))?;
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let mean = build_mean_signal(args.p, args.nu, args.phi3, args.omega)?;
    let spec = ProcessSpec::reference_design(args.n, args.p, args.q, args.dist.into(), args.seed).with_mean(mean);
    let x = simulate(&spec)?;
    let writer = open_output(&args.out, out)?;
    write_series(writer, &x)
}

fn cmd_mc(args: &McArgs, out: &mut dyn Write) -> Result<()> {
    let methods = parse_methods(&args.methods)?;
    let innovation: InnovationLaw = args.dist.into();
    let mut reports: Vec<MonteCarloReport> = Vec::new();
    if args.scenario.eq_ignore_ascii_case("size") {
        let mut spec = ScenarioSpec::size(args.n, args.p, args.q, innovation, args.reps, args.seed).with_methods(&methods);
        spec.alpha = args.alpha;
        reports.push(run_size_experiment(&spec)?);
    } else {
        let scenario = Scenario::parse(&args.scenario).ok_or_else(|| {
            Error::InvalidParameter(format!("unknown scenario `{}` (valid: S1, S2, S3, S4, S5, S6, size)", args.scenario))
        })?;
        for nu in parse_list(&args.nu, "nu")? {
            for phi3 in parse_list(&args.phi3, "phi3")? {
                let mut spec = ScenarioSpec::power(scenario, nu, phi3, innovation, args.reps, args.seed).with_methods(&methods);
                spec.alpha = args.alpha;
                reports.push(run_power_experiment(&spec)?);
            }
        }
    }
    let rows: Vec<_> = reports.iter().flat_map(MonteCarloReport::rows).collect();
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rows).expect("json"))?;
    } else {
        write!(out, "{}", render_rows(&rows))?;
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let methods = parse_methods(&args.methods)?;
    let specs: Vec<ScenarioSpec> = parse_sizes(&args.sizes)?
        .into_iter()
        .map(|(n, p)| ScenarioSpec::size(n, p, args.q, InnovationLaw::StandardGaussian, args.reps, args.seed).with_methods(&methods))
        .collect();
    let report = run_timing_benchmark(&specs, args.reps)?;
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("json"))?;
    } else {
        write!(out, "{}", report.render())?;
    }
    Ok(())
}

fn cmd_rolling(args: &RollingArgs, out: &mut dyn Write) -> Result<()> {
    let data = read_data_file(&args.input, args.date_column)?;
    let points = rolling_with(&data.series, args.window, |w| apply_method(w, &args.options))?;
    let label = |start: usize| match &data.labels {
        Some(l) => l[start].clone(),
        None => (start + 1).to_string(),
    };
    let mut writer = open_output(&args.out, out)?;
    if args.json {
        let rows: Vec<Value> = points
            .iter()
            .map(|pt| {
                let (p_value, reject) = decision(&pt.result, &args.options);
                json!({ "start": label(pt.start), "p_value": p_value, "z": pt.result.z, "reject": reject })
            })
            .collect();
        writeln!(writer, "{}", serde_json::to_string_pretty(&rows).expect("json"))?;
    } else {
        let mut w = csv::Writer::from_writer(writer);
        let io_err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["start", "p_value"]).map_err(io_err)?;
        for pt in &points {
            let (p_value, _) = decision(&pt.result, &args.options);
            w.write_record([label(pt.start), p_value.to_string()]).map_err(io_err)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn threads_from_env() -> usize {
    std::env::var("HDMEAN_THREADS").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

/// Runs the CLI with explicit argument list and output streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads_from_env()).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_INPUT;
        }
    };
    // Output is buffered so the worker pool never touches the caller's streams.
    let outcome = pool.install(|| {
        let mut buf: Vec<u8> = Vec::new();
        match &cli.command {
            Command::Test(a) => cmd_test(a, &mut buf),
            Command::Simulate(a) => cmd_simulate(a, &mut buf),
            Command::Mc(a) => cmd_mc(a, &mut buf),
            Command::Bench(a) => cmd_bench(a, &mut buf),
            Command::Rolling(a) => cmd_rolling(a, &mut buf),
        }
        .map(|()| buf)
    })
    .and_then(|buf| out.write_all(&buf).and_then(|()| out.flush()).map_err(Error::from));
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_INPUT
            }
        }
    }
}
