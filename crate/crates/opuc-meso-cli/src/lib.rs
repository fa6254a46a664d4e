//! Command-line driver: every pipeline of the library as a reproducible
//! command writing CSV tables and JSON reports.
//!
//! Exit codes: 0 on success, 2 for usage and validation errors, 3 for
//! numerical failures.

use clap::{Args, Parser, Subcommand, ValueEnum};
use opuc_meso::config::{parse_complex, Complex, ExperimentConfig, MeasureSpec, StatisticSpec, SweepMode};
use opuc_meso::cumulants::{
    cumulant_mgf, exact_cumulants, ks_normality, mc_cumulants, statistic_matrix, CumulantReport, TruncationPolicy,
};
use opuc_meso::io::{Sidecar, Table};
use opuc_meso::linstat::{poisson_limit_variance, sigma_f_squared, weighted_lipschitz_norm, ScaledStatistic, StatisticKind};
use opuc_meso::measures::{levinson, trig_moments};
use opuc_meso::operators::{
    cmv_truncation, combes_thomas_cmv, combes_thomas_ggt, decay_profile, fit_decay, ggt_truncation, resolvent_matrix,
    TruncationMode,
};
use opuc_meso::sampler::{batch_sample, DEFAULT_GRID};
use opuc_meso::szego::Recurrence;
use opuc_meso::wienerhopf::{alpha0_block_trace, hankel_trace_sigma, block_coefficient_properties, wiener_hopf};
use opuc_meso::{Error, C64};
use serde_json::json;
use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "opuc-meso", version, about = "Mesoscopic linear statistics of orthogonal polynomial ensembles on the unit circle")]
struct Cli {
    /// Worker threads for sampling and quadrature; results do not depend on it.
    #[arg(long, global = true, env = "OPUC_MESO_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the measure catalog as JSON.
    Measures,
    /// Verblunsky coefficients of a catalog measure as CSV.
    Alphas(AlphasArgs),
    /// Coefficients recovered from the measure's moments, with their error.
    Levinson(AlphasArgs),
    /// Exact samples of the ensemble, one CSV row per sample.
    Sample(SampleArgs),
    /// Cumulants of a rescaled linear statistic.
    Cumulants {
        #[command(subcommand)]
        route: CumulantRoute,
    },
    /// Limiting variance of the Poisson statistic and of a rational statistic.
    VarianceTheory(VarianceArgs),
    /// Roots, Hankel-trace variance and block diagnostics for constant coefficients.
    WienerHopf(WienerHopfArgs),
    /// Off-diagonal decay of a truncated resolvent.
    Decay(DecayArgs),
    /// Cumulants along an n grid, from a JSON experiment config.
    Sweep(SweepArgs),
    /// Diagonal of the Christoffel-Darboux kernel on a uniform grid.
    Kernel(KernelArgs),
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Output file; a JSON sidecar is written next to it. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AlphasArgs {
    /// Catalog kind (`cue`, `single-moment`) or a JSON measure spec.
    #[arg(long)]
    measure: String,
    #[arg(long)]
    count: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Catalog kind or a JSON measure spec.
    #[arg(long)]
    measure: String,
    /// Number of points in the ensemble.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Envelope cells per chart.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct StatArgs {
    /// Catalog kind or a JSON measure spec.
    #[arg(long)]
    measure: String,
    /// JSON statistic spec; defaults to the Poisson statistic with `--eta`.
    #[arg(long)]
    statistic: Option<String>,
    #[arg(long, default_value = "1+0i")]
    eta: String,
    /// Number of points in the ensemble.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    theta0: f64,
    #[arg(long, default_value_t = 2)]
    orders: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExactMethod {
    Trace,
    Mgf,
}

#[derive(Subcommand, Debug)]
enum CumulantRoute {
    /// Restricted-trace or generating-function cumulants of the truncated operator.
    Exact {
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long, value_enum, default_value_t = ExactMethod::Trace)]
        method: ExactMethod,
        #[command(flatten)]
        out: OutArgs,
    },
    /// k-statistics of exact samples, with a normality test.
    Mc {
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Debug)]
struct VarianceArgs {
    #[arg(long, default_value = "1+0i")]
    eta: String,
    /// JSON rational-imag statistic whose line variance is also printed.
    #[arg(long)]
    statistic: Option<String>,
}

#[derive(Args, Debug)]
struct WienerHopfArgs {
    /// Constant real coefficient, 0 < |alpha| < 1.
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = PI)]
    theta0: f64,
    #[arg(long, default_value = "1+0i")]
    eta: String,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![100usize, 1000, 10000])]
    n_grid: Vec<usize>,
    /// CSV file for `n,sigma_estimate,theory`.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Model {
    Ggt,
    Cmv,
}

#[derive(Args, Debug)]
struct DecayArgs {
    /// Catalog kind or a JSON measure spec.
    #[arg(long)]
    measure: String,
    #[arg(long, value_enum, default_value_t = Model::Cmv)]
    model: Model,
    /// Spectral parameter inside the disk.
    #[arg(long, default_value = "0.9+0i")]
    z: String,
    #[arg(long, default_value_t = 400)]
    n: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args, Debug)]
struct KernelArgs {
    /// Catalog kind or a JSON measure spec.
    #[arg(long)]
    measure: String,
    /// Number of points in the ensemble.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 512)]
    points: usize,
    #[command(flatten)]
    out: OutArgs,
}

/// Failure of a command, already classified for the exit code.
#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Run with the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_VALIDATION
                }
            };
        }
    };
    let command_line: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)).max(1);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start worker pool: {e}");
            return EXIT_NUMERICAL;
        }
    };
    let ctx = Context { command_line, workers };
    let (outcome, out_buf, err_buf) = pool.install(|| {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let outcome = dispatch(&cli.command, &ctx, &mut out, &mut err);
        (outcome, out, err)
    });
    let _ = stdout.write_all(&out_buf);
    let _ = stderr.write_all(&err_buf);
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Lib(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_VALIDATION
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERICAL
    }
}

struct Context {
    command_line: Vec<String>,
    workers: usize,
}

fn dispatch(cmd: &Command, ctx: &Context, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Measures => measures(stdout),
        Command::Alphas(a) => alphas(a, ctx, stdout),
        Command::Levinson(a) => levinson_cmd(a, ctx, stdout),
        Command::Sample(a) => sample(a, ctx, stdout),
        Command::Cumulants { route: CumulantRoute::Exact { stat, method, out } } => {
            cumulants_exact(stat, *method, out, ctx, stdout)
        }
        Command::Cumulants { route: CumulantRoute::Mc { stat, samples, seed, grid, out } } => {
            cumulants_mc(stat, *samples, *seed, *grid, out, ctx, stdout)
        }
        Command::VarianceTheory(a) => variance_theory(a, stdout),
        Command::WienerHopf(a) => wiener_hopf_cmd(a, ctx, stdout),
        Command::Decay(a) => decay(a, ctx, stdout, stderr),
        Command::Sweep(a) => sweep(a, ctx, stdout, stderr),
        Command::Kernel(a) => kernel(a, ctx, stdout),
    }
}

/// A bare kind name for parameterless entries, JSON otherwise.
fn parse_measure(text: &str) -> Result<MeasureSpec, Error> {
    let t = text.trim();
    if t.starts_with('{') {
        MeasureSpec::parse(t)
    } else {
        MeasureSpec::parse(&json!({ "kind": t }).to_string())
    }
}

fn parse_statistic(args: &StatArgs) -> Result<StatisticSpec, Error> {
    match &args.statistic {
        Some(s) => StatisticSpec::parse(s),
        None => Ok(StatisticSpec::Poisson { eta: Complex(parse_complex(&args.eta)?) }),
    }
}

fn write_text(path: &Option<PathBuf>, body: &str, sidecar: Option<Sidecar>, stdout: &mut dyn Write) -> CmdResult {
    match path {
        Some(p) => {
            std::fs::write(p, body)?;
            if let Some(s) = sidecar {
                let mut side = p.clone().into_os_string();
                side.push(".json");
                std::fs::write(PathBuf::from(side), s.to_json() + "\n")?;
            }
        }
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn sidecar(ctx: &Context, config: serde_json::Value, seed: u64) -> Sidecar {
    Sidecar::new(ctx.command_line.clone(), config, seed)
}

fn measures(stdout: &mut dyn Write) -> CmdResult {
    let catalog = json!([
        {"kind": "cue", "parameters": [], "example": {"kind": "cue"}},
        {"kind": "geronimus", "parameters": ["alpha"], "example": {"kind": "geronimus", "alpha": 0.5}},
        {"kind": "bernstein-szego", "parameters": ["r"], "example": {"kind": "bernstein-szego", "r": 0.5}},
        {"kind": "single-moment", "parameters": [], "example": {"kind": "single-moment"}},
        {"kind": "inserted-mass-point", "parameters": ["mass", "angle"], "example": {"kind": "inserted-mass-point", "mass": 0.2, "angle": 1.0}},
        {"kind": "hua-pickrell", "parameters": ["delta"], "example": {"kind": "hua-pickrell", "delta": 0.5}},
        {"kind": "perturbed", "parameters": ["base", "c", "beta"], "example": {"kind": "perturbed", "base": {"kind": "geronimus", "alpha": 0.4}, "c": {"re": 0.3, "im": 0.0}, "beta": 0.8}},
        {"kind": "explicit-list", "parameters": ["alphas"], "example": {"kind": "explicit-list", "alphas": [{"re": 0.5, "im": 0.0}]}},
    ]);
    writeln!(stdout, "{}", serde_json::to_string_pretty(&catalog).expect("static json"))?;
    Ok(())
}

fn alpha_table(alphas: &[C64]) -> Table {
    let mut t = Table::new(&["k", "re_alpha", "im_alpha", "rho"]);
    for (k, a) in alphas.iter().enumerate() {
        t.push(vec![k as f64, a.re, a.im, (1.0 - a.norm_sqr()).sqrt()]);
    }
    t
}

fn alphas(a: &AlphasArgs, ctx: &Context, stdout: &mut dyn Write) -> CmdResult {
    if a.count == 0 {
        return Err(Error::Invalid("count must be at least 1".into()).into());
    }
    let spec = parse_measure(&a.measure)?;
    let seq = spec.sequence()?;
    let table = alpha_table(&seq.alphas(a.count)?);
    let mut side = sidecar(ctx, json!({"command": "alphas", "measure": spec, "count": a.count}), 0);
    side.measure_id = Some(seq.id());
    write_text(&a.out.out, &table.to_csv(), Some(side), stdout)
}

fn levinson_cmd(a: &AlphasArgs, ctx: &Context, stdout: &mut dyn Write) -> CmdResult {
    if a.count == 0 {
        return Err(Error::Invalid("count must be at least 1".into()).into());
    }
    let spec = parse_measure(&a.measure)?;
    let seq = spec.sequence()?;
    let measure = spec.measure()?;
    let recovered = levinson(&trig_moments(&measure, a.count)?, a.count)?;
    let exact = seq.alphas(a.count)?;
    let mut t = Table::new(&["k", "re_alpha", "im_alpha", "rho", "abs_err"]);
    for (k, (r, e)) in recovered.iter().zip(&exact).enumerate() {
        t.push(vec![k as f64, r.re, r.im, (1.0 - r.norm_sqr()).sqrt(), (r - e).norm()]);
    }
    let mut side = sidecar(ctx, json!({"command": "levinson", "measure": spec, "count": a.count}), 0);
    side.measure_id = Some(measure.id().to_string());
    write_text(&a.out.out, &t.to_csv(), Some(side), stdout)
}

fn sample(a: &SampleArgs, ctx: &Context, stdout: &mut dyn Write) -> CmdResult {
    let spec = parse_measure(&a.measure)?;
    let seq = spec.sequence()?;
    let measure = spec.measure()?;
    let samples = batch_sample(&measure, &seq, a.n, a.seed, a.count, ctx.workers, a.grid)?;
    let mut header = vec!["sample_index".to_string()];
    header.extend((1..=a.n).map(|k| format!("theta_{k}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(&header_refs);
    for s in &samples {
        let mut row = vec![s.sample_index as f64];
        row.extend(&s.angles);
        t.push(row);
    }
    let mut side = sidecar(
        ctx,
        json!({"command": "sample", "measure": spec, "n": a.n, "count": a.count, "seed": a.seed, "grid": a.grid}),
        a.seed,
    );
    side.measure_id = Some(measure.id().to_string());
    side.grid = Some(a.grid);
    write_text(&a.out.out, &t.to_csv(), Some(side), stdout)
}

/// Limiting value of `κ_m` for the rescaled statistic: the variance for
/// `m = 2`, zero above.
fn limit_theory(stat: &ScaledStatistic, order: usize) -> Result<Option<f64>, Error> {
    Ok(match order {
        1 => None,
        2 => Some(match &stat.kind {
            StatisticKind::Poisson(eta) => poisson_limit_variance(eta.at(stat.n)),
            _ => {
                let g = stat.line_function().expect("non-poisson statistics have a line form");
                sigma_f_squared(&*g)?
            }
        }),
        _ => Some(0.0),
    })
}

fn with_theory(mut reports: Vec<CumulantReport>, stat: &ScaledStatistic) -> Result<Vec<CumulantReport>, Error> {
    for r in &mut reports {
        r.theory = limit_theory(stat, r.order)?;
    }
    Ok(reports)
}

fn cumulants_exact(s: &StatArgs, method: ExactMethod, out: &OutArgs, ctx: &Context, stdout: &mut dyn Write) -> CmdResult {
    let spec = parse_measure(&s.measure)?;
    let seq = spec.sequence()?;
    let stat_spec = parse_statistic(s)?;
    let stat = stat_spec.build(s.gamma, s.theta0, s.n)?;
    let reports = match method {
        ExactMethod::Trace => exact_cumulants(&seq, &stat, s.orders, &TruncationPolicy::default())?,
        ExactMethod::Mgf => {
            // Use the truncation size the trace route settles on.
            let size = exact_cumulants(&seq, &stat, 2, &TruncationPolicy::default())?[0].resolution;
            cumulant_mgf(&statistic_matrix(&seq, &stat, size)?, s.n, s.orders)?
        }
    };
    let reports = with_theory(reports, &stat)?;
    let body = serde_json::to_string_pretty(&json!({ "measure": seq.id(), "reports": reports })).expect("reports serialize");
    let side = sidecar(
        ctx,
        json!({"command": "cumulants-exact", "measure": spec, "statistic": stat_spec, "n": s.n, "gamma": s.gamma,
               "theta0": s.theta0, "orders": s.orders, "method": format!("{method:?}").to_lowercase()}),
        0,
    );
    write_text(&out.out, &(body + "\n"), Some(side), stdout)
}

fn cumulants_mc(
    s: &StatArgs,
    samples: usize,
    seed: u64,
    grid: usize,
    out: &OutArgs,
    ctx: &Context,
    stdout: &mut dyn Write,
) -> CmdResult {
    let spec = parse_measure(&s.measure)?;
    let seq = spec.sequence()?;
    let measure = spec.measure()?;
    let stat_spec = parse_statistic(s)?;
    let stat = stat_spec.build(s.gamma, s.theta0, s.n)?;
    let draws = batch_sample(&measure, &seq, s.n, seed, samples, ctx.workers, grid)?;
    let f = |t: f64| stat.value(t);
    let reports = with_theory(mc_cumulants(&draws, &f, s.orders)?, &stat)?;
    let values: Vec<f64> = draws.iter().map(|d| d.angles.iter().map(|t| stat.value(*t)).sum()).collect();
    let ks = ks_normality(&values)?;
    let body = serde_json::to_string_pretty(&json!({ "measure": measure.id(), "reports": reports, "normality": ks }))
        .expect("reports serialize");
    let mut side = sidecar(
        ctx,
        json!({"command": "cumulants-mc", "measure": spec, "statistic": stat_spec, "n": s.n, "gamma": s.gamma,
               "theta0": s.theta0, "orders": s.orders, "samples": samples, "seed": seed, "grid": grid}),
        seed,
    );
    side.measure_id = Some(measure.id().to_string());
    side.grid = Some(grid);
    write_text(&out.out, &(body + "\n"), Some(side), stdout)
}

fn variance_theory(a: &VarianceArgs, stdout: &mut dyn Write) -> CmdResult {
    let eta = parse_complex(&a.eta)?;
    if !(eta.re > 0.0) {
        return Err(Error::Invalid(format!("eta must have positive real part, got {eta}")).into());
    }
    writeln!(stdout, "sigma2 = {}", poisson_limit_variance(eta))?;
    if let Some(text) = &a.statistic {
        let spec = StatisticSpec::parse(text)?;
        let stat = spec.build(0.5, 0.0, 1)?;
        let Some(g) = stat.line_function() else {
            return Err(Error::Unsupported("sigma_f2 needs a statistic with a line form".into()).into());
        };
        writeln!(stdout, "sigma_f2 = {}", sigma_f_squared(&*g)?)?;
        writeln!(stdout, "lipschitz_norm = {}", weighted_lipschitz_norm(&*g)?)?;
    }
    Ok(())
}

fn wiener_hopf_cmd(a: &WienerHopfArgs, ctx: &Context, stdout: &mut dyn Write) -> CmdResult {
    let eta = parse_complex(&a.eta)?;
    if !(a.alpha.abs() < 1.0) {
        return Err(Error::OutOfDisk { index: 0, modulus: a.alpha.abs() }.into());
    }
    if a.n_grid.is_empty() || a.n_grid.contains(&0) {
        return Err(Error::Invalid("n-grid must be a non-empty list of positive sizes".into()).into());
    }
    if !(a.gamma > 0.0 && a.gamma < 1.0) {
        return Err(Error::Invalid(format!("gamma must lie in (0, 1), got {}", a.gamma)).into());
    }
    let rho = (1.0 - a.alpha * a.alpha).sqrt();
    let theory = poisson_limit_variance(eta);
    let mut table = Table::new(&["n", "sigma_estimate", "theory"]);
    let mut estimates = Vec::new();
    for &n in &a.n_grid {
        let omega = opuc_meso::linstat::omega_n(eta, n, a.gamma, a.theta0);
        let value = if a.alpha == 0.0 { alpha0_block_trace(omega, n, a.gamma)? } else { hankel_trace_sigma(rho, omega, n, a.gamma)? };
        table.push(vec![n as f64, value, theory]);
        estimates.push(json!({"n": n, "value": value}));
    }
    let n_last = *a.n_grid.last().expect("non-empty grid");
    let omega = opuc_meso::linstat::omega_n(eta, n_last, a.gamma, a.theta0);
    let data = wiener_hopf(rho, omega)?;
    let blocks = block_coefficient_properties(eta, a.gamma, &a.n_grid)?;
    let report = json!({
        "alpha": a.alpha,
        "theta0": a.theta0,
        "eta": Complex(eta),
        "gamma": a.gamma,
        "roots": {"n": n_last, "omega": Complex(omega), "z_plus": Complex(data.z_plus), "z_minus": Complex(data.z_minus),
                  "abs_z_plus": data.z_plus.norm(), "abs_z_minus": data.z_minus.norm()},
        "disc": Complex(data.disc),
        "A": data.a,
        "sigma_estimate": estimates,
        "theory": theory,
        "block_coefficients": blocks,
    });
    writeln!(stdout, "{}", serde_json::to_string_pretty(&report).expect("report serializes"))?;
    if let Some(path) = &a.csv {
        let side = sidecar(
            ctx,
            json!({"command": "wiener-hopf", "alpha": a.alpha, "theta0": a.theta0, "eta": Complex(eta), "gamma": a.gamma, "n_grid": a.n_grid}),
            0,
        );
        write_text(&Some(path.clone()), &table.to_csv(), Some(side), stdout)?;
    }
    Ok(())
}

fn decay(a: &DecayArgs, ctx: &Context, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let spec = parse_measure(&a.measure)?;
    let seq = spec.sequence()?;
    let z = parse_complex(&a.z)?;
    if !(z.norm() < 1.0) {
        return Err(Error::Invalid("decay needs |z| < 1".into()).into());
    }
    if a.n < 16 {
        return Err(Error::Invalid("decay needs n >= 16".into()).into());
    }
    let m = match a.model {
        Model::Ggt => ggt_truncation(&seq, a.n, TruncationMode::UnitaryCut)?,
        Model::Cmv => cmv_truncation(&seq, a.n, TruncationMode::UnitaryCut)?,
    };
    let profile = decay_profile(&resolvent_matrix(&m.data, z)?);
    let mut t = Table::new(&["distance", "max_abs_entry"]);
    for (d, v) in profile.iter().enumerate() {
        t.push(vec![d as f64, *v]);
    }
    let fit = fit_decay(&profile)?;
    let bound = match a.model {
        Model::Ggt => {
            let rho = seq.rho(0)?;
            combes_thomas_ggt(rho, z)
        }
        Model::Cmv => combes_thomas_cmv(z),
    };
    writeln!(
        stderr,
        "{}",
        json!({"rate": fit.rate, "constant": fit.constant, "fitted_range": fit.fitted_range, "guaranteed_rate": bound})
    )?;
    let side = sidecar(
        ctx,
        json!({"command": "decay", "measure": spec, "model": format!("{:?}", a.model).to_lowercase(), "z": Complex(z), "n": a.n}),
        0,
    );
    write_text(&a.out.out, &t.to_csv(), Some(side), stdout)
}

fn kernel(a: &KernelArgs, ctx: &Context, stdout: &mut dyn Write) -> CmdResult {
    let spec = parse_measure(&a.measure)?;
    let seq = spec.sequence()?;
    if a.points == 0 {
        return Err(Error::Invalid("points must be at least 1".into()).into());
    }
    let rec = Recurrence::new(&seq, a.n)?;
    let mut t = Table::new(&["theta", "k_diag"]);
    for j in 0..a.points {
        let theta = 2.0 * PI * j as f64 / a.points as f64;
        t.push(vec![theta, rec.kernel_diag(theta)]);
    }
    let side = sidecar(ctx, json!({"command": "kernel", "measure": spec, "n": a.n, "points": a.points}), 0);
    write_text(&a.out.out, &t.to_csv(), Some(side), stdout)
}

/// Least-squares slope of `ln err` against `ln n`, over positive errors.
fn fitted_rate(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(_, e)| *e > 0.0).map(|(n, e)| ((*n as f64).ln(), e.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 * p.0, b + p.0 * p.1));
    let denom = m * sxx - sx * sx;
    (denom != 0.0).then(|| (m * sxy - sx * sy) / denom)
}

fn sweep(a: &SweepArgs, ctx: &Context, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let text = std::fs::read_to_string(&a.config)?;
    let cfg = ExperimentConfig::parse(&text)?;
    let mode = cfg.mode.unwrap_or(if cfg.reference.is_some() { SweepMode::Universality } else { SweepMode::Clt });
    let seq = cfg.measure.sequence()?;
    let reference = match (&cfg.reference, mode) {
        (Some(r), SweepMode::Universality) => Some(r.sequence()?),
        (None, SweepMode::Universality) => return Err(Error::Invalid("universality mode needs a reference measure".into()).into()),
        _ => None,
    };
    let mut policy = TruncationPolicy::default();
    if let Some(t) = cfg.tolerances.truncation {
        policy.tolerance = t;
    }
    if let Some(b) = cfg.tolerances.max_buffer {
        policy.max_buffer = b;
    }
    let mut table = Table::new(&["n", "order", "value", "theory", "abs_err"]);
    let mut errors: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cfg.orders + 1];
    for &n in &cfg.n_grid {
        let context = |e: Error| match e {
            Error::Invalid(m) => Error::Invalid(format!("n = {n}: {m}")),
            Error::Degenerate(m) => Error::Degenerate(format!("n = {n}: {m}")),
            other => other,
        };
        let stat = cfg.statistic.build(cfg.gamma, cfg.theta0, n).map_err(context)?;
        let values = exact_cumulants(&seq, &stat, cfg.orders, &policy).map_err(context)?;
        let targets: Vec<Option<f64>> = match &reference {
            Some(r) => exact_cumulants(r, &stat, cfg.orders, &policy).map_err(context)?.iter().map(|r| Some(r.value)).collect(),
            None => (1..=cfg.orders).map(|m| limit_theory(&stat, m)).collect::<Result<_, _>>().map_err(context)?,
        };
        for (report, target) in values.iter().zip(targets) {
            // The mean grows with n; only centered cumulants are compared.
            let Some(target) = target.filter(|_| report.order >= 2) else { continue };
            let err = (report.value - target).abs();
            table.push(vec![n as f64, report.order as f64, report.value, target, err]);
            errors[report.order].push((n, err));
        }
    }
    let summary: Vec<serde_json::Value> = errors
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_empty())
        .map(|(order, e)| {
            json!({
                "order": order,
                "fitted_rate": fitted_rate(e),
                "decreasing": e.windows(2).all(|w| w[1].1 < w[0].1),
                "last_abs_err": e.last().map(|p| p.1),
            })
        })
        .collect();
    let report = json!({
        "mode": mode,
        "config_hash": cfg.hash(),
        "summary": summary,
    });
    let config_value = serde_json::to_value(&cfg).expect("configs serialize");
    let side = sidecar(ctx, config_value, cfg.seed);
    let csv_path = cfg.outputs.csv.as_ref().map(PathBuf::from);
    write_text(&csv_path, &table.to_csv(), Some(side), stdout)?;
    let pretty = serde_json::to_string_pretty(&report).expect("summary serializes") + "\n";
    match &cfg.outputs.json {
        Some(p) => std::fs::write(p, pretty)?,
        None => stderr.write_all(pretty.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerical_failures_exit_with_three() {
        assert_eq!(exit_code(&Error::Degenerate("zero variance".into())), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::Singular { pivot: 0.0 }), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::Invalid("n".into())), EXIT_VALIDATION);
        let wrapped = Error::Sample { index: 3, source: Box::new(Error::Degenerate("x".into())) };
        assert_eq!(exit_code(&wrapped), EXIT_NUMERICAL);
    }

    #[test]
    fn fitted_rate_recovers_a_power_law() {
        let pts: Vec<(usize, f64)> = [10usize, 100, 1000].iter().map(|&n| (n, 3.0 / (n as f64).powf(1.5))).collect();
        assert!((fitted_rate(&pts).unwrap() + 1.5).abs() < 1e-12);
        assert_eq!(fitted_rate(&pts[..1]), None);
    }

    #[test]
    fn bare_measure_names_expand_to_specs() {
        assert_eq!(parse_measure("cue").unwrap(), MeasureSpec::Cue);
        assert!(parse_measure("geronimus").is_err());
    }
}
