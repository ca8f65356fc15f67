//! Command-line front end.
//!
//! ```text
//! covbvm <posterior|coverage|freq|da|kato|expand-check|regimes>
//!        --config PATH [--seed U64] [--out DIR] [--format json|csv|both] [--threads N]
//! ```
//!
//! Every run writes `manifest.json` into `--out`. Depending on the command
//! and `--format` it also writes `report.json` and CSV files with these
//! column orders:
//!
//! | file               | columns                                            |
//! |--------------------|----------------------------------------------------|
//! | `standardized.csv` | `index,value`                                      |
//! | `qq.csv`           | `theoretical,empirical`                            |
//! | `hist.csv`         | `lo,hi,count,density,normal_density`               |
//! | `replications.csv` | `replication,center,lo,hi,truth_value,covered,ks`  |
//! | `statistics.csv`   | `replication,statistic`                            |
//! | `terms.csv`        | `order,term,partial_sum`                           |
//! | `expansion.csv`    | `t,lhs,rhs,linear,quadratic,remainder,abs_error`   |
//! | `regimes.csv`      | `functional,column,required,satisfied`             |
//!
//! On failure the process exits nonzero and prints one JSON error record
//! `{"error": {"kind", "field", "message"}}` to stderr (also written to
//! `error.json` when the output directory is usable).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{self, DeltaSource, ExpansionFile, ExperimentFile, KatoFile, RegimeFile};
use crate::discriminant::{lda_variance, qda_variance, separation_bound_check, DaMode, SeparationCheck};
use crate::error::{Error, Result};
use crate::functionals::{linearization, TruthSpec};
use crate::harness::{
    coverage_study, frequentist_check, full_regime_table, histogram, qq_points, regime_row, run_posterior_bvm,
    BvMReport, Experiment, ExperimentConfig, RegimeColumn, RegimeRow, RegimeRowKind,
};
use crate::linalg::sample_covariance;
use crate::model::{likelihood_expansion_check, ExpansionCheck};
use crate::perturbation::{kato_partial_sum, random_perturbation, second_order_bias_probe, BiasProbe, KatoContext, PartialSum};
use crate::rng::RngStream;
use crate::samplers::draw_mvn;

pub const HIST_RANGE: (f64, f64) = (-4.0, 4.0);
pub const HIST_BINS: usize = 32;

#[derive(Parser, Debug)]
#[command(name = "covbvm", version, about = "Bernstein-von Mises experiments for covariance and precision functionals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Posterior BvM check for one simulated dataset.
    Posterior(Common),
    /// Credible-interval coverage over replications.
    Coverage(Common),
    /// Sampling law of the plug-in estimator over replications.
    Freq(Common),
    /// Discriminant-analysis posterior check with the variance breakdown.
    Da(Common),
    /// Kato eigenvalue series and the second-order bias probe.
    Kato(Common),
    /// Exact likelihood expansion around a precision matrix.
    ExpandCheck(Common),
    /// Advisory (p, n) regime table.
    Regimes(Common),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Posterior(_) => "posterior",
            Command::Coverage(_) => "coverage",
            Command::Freq(_) => "freq",
            Command::Da(_) => "da",
            Command::Kato(_) => "kato",
            Command::ExpandCheck(_) => "expand-check",
            Command::Regimes(_) => "regimes",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Posterior(c)
            | Command::Coverage(c)
            | Command::Freq(c)
            | Command::Da(c)
            | Command::Kato(c)
            | Command::ExpandCheck(c)
            | Command::Regimes(c) => c,
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Eq)]
pub struct Common {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    /// Caps the number of worker threads.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    fn json(self) -> bool {
        self != Format::Csv
    }

    fn csv(self) -> bool {
        self != Format::Json
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    kind: &'a str,
    field: Option<&'a str>,
    message: String,
}

#[derive(Serialize)]
struct ErrorEnvelope<'a> {
    error: ErrorRecord<'a>,
}

pub fn error_record(e: &Error) -> String {
    serde_json::to_string(&ErrorEnvelope { error: ErrorRecord { kind: e.kind(), field: e.field(), message: e.to_string() } })
        .expect("error record serializes")
}

/// Exit status for an error: 2 for bad input, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ConfigParse { .. } | Error::InvalidArgument { .. } => 2,
        _ => 1,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = Error::config("arguments", e.to_string().trim().to_string());
            eprintln!("{}", error_record(&err));
            return 2;
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let record = error_record(&e);
            eprintln!("{record}");
            let out = &cli.command.common().out;
            if fs::create_dir_all(out).is_ok() {
                let _ = fs::write(out.join("error.json"), format!("{record}\n"));
            }
            exit_code(&e)
        }
    }
}

#[derive(Serialize)]
struct Versions {
    covbvm: &'static str,
    schema: u32,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: String,
    config_hash: String,
    seed: u64,
    versions: Versions,
    threads: usize,
    outputs: Vec<String>,
    wall_time_seconds: f64,
}

/// Collects output files for one run.
struct Outputs<'a> {
    dir: &'a Path,
    format: Format,
    written: Vec<String>,
}

impl<'a> Outputs<'a> {
    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        if !self.format.json() {
            return Ok(());
        }
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        fs::write(self.dir.join(name), text)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
        if !self.format.csv() {
            return Ok(());
        }
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut w = csv::Writer::from_path(self.dir.join(name)).map_err(io)?;
        for row in rows {
            w.serialize(row).map_err(io)?;
        }
        w.flush()?;
        self.written.push(name.to_string());
        Ok(())
    }
}

#[derive(Serialize)]
struct IndexedValue {
    index: usize,
    value: f64,
}

#[derive(Serialize)]
struct Statistic {
    replication: usize,
    statistic: f64,
}

fn write_distribution(out: &mut Outputs, standardized: &[f64], index_name: IndexName) -> Result<()> {
    match index_name {
        IndexName::Draw => out.csv(
            "standardized.csv",
            standardized.iter().enumerate().map(|(index, &value)| IndexedValue { index, value }),
        )?,
        IndexName::Replication => out.csv(
            "statistics.csv",
            standardized.iter().enumerate().map(|(replication, &statistic)| Statistic { replication, statistic }),
        )?,
    }
    out.csv("qq.csv", qq_points(standardized))?;
    out.csv("hist.csv", histogram(standardized, HIST_RANGE.0, HIST_RANGE.1, HIST_BINS)?)?;
    Ok(())
}

enum IndexName {
    Draw,
    Replication,
}

fn regime_for(config: &ExperimentConfig, column: RegimeColumn) -> RegimeRow {
    let kind = match &config.experiment {
        Experiment::Matrix { functional, .. } => RegimeRowKind::of_functional(functional),
        Experiment::Discriminant { mode, .. } => RegimeRowKind::of_mode(*mode),
    };
    regime_row(kind, column, config.experiment.dim(), config.n)
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    config: &'a ExperimentFile,
    regime: RegimeRow,
    result: T,
}

#[derive(Serialize)]
struct DaBreakdown {
    mode: DaMode,
    v2: f64,
    trace_terms: f64,
    mean_terms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    separation: Option<SeparationCheck>,
}

#[derive(Serialize)]
struct DaResult {
    posterior: BvMReport,
    variance: DaBreakdown,
}

fn da_breakdown(config: &ExperimentConfig) -> Result<DaBreakdown> {
    let Experiment::Discriminant { truth, mode } = &config.experiment else {
        return Err(Error::config("mode", "the da command needs a discriminant config (`mode`, `x`, `y`, `z`)"));
    };
    let quad = |xi: &[f64], sigma: &crate::linalg::SpdMatrix| sigma.inverse().quad_form(xi);
    Ok(match mode {
        DaMode::Lda => {
            let v = lda_variance(truth)?;
            let mean_terms = quad(&v.xi_x, &truth.sigma_x)? + quad(&v.xi_y, &truth.sigma_x)?;
            DaBreakdown {
                mode: *mode,
                v2: v.v2,
                trace_terms: v.v2 - mean_terms,
                mean_terms,
                separation: Some(separation_bound_check(truth)?),
            }
        }
        DaMode::Qda => {
            let v = qda_variance(truth)?;
            let mean_terms = quad(&v.xi_x, &truth.sigma_x)? + quad(&v.xi_y, &truth.sigma_y)?;
            DaBreakdown { mode: *mode, v2: v.v2, trace_terms: v.v2 - mean_terms, mean_terms, separation: None }
        }
    })
}

#[derive(Serialize)]
struct TermRow {
    order: usize,
    term: f64,
    partial_sum: f64,
}

#[derive(Serialize)]
struct KatoReport {
    command: &'static str,
    config: KatoFile,
    m: usize,
    base_eigenvalues: Vec<f64>,
    delta_spectral_norm: f64,
    series: PartialSum,
    abs_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    bias_probe: Option<BiasProbeSummary>,
}

#[derive(Serialize)]
struct BiasProbeSummary {
    p: usize,
    n: usize,
    replications: usize,
    mean_sqrt_n_second_order: f64,
    lower_bound: f64,
}

impl BiasProbeSummary {
    fn new(p: usize, n: usize, replications: usize, b: &BiasProbe) -> Self {
        BiasProbeSummary {
            p,
            n,
            replications,
            mean_sqrt_n_second_order: b.mean_sqrt_n_second_order,
            lower_bound: b.lower_bound,
        }
    }
}

#[derive(Serialize)]
struct ExpansionRow {
    t: f64,
    lhs: f64,
    rhs: f64,
    linear: f64,
    quadratic: f64,
    remainder: f64,
    abs_error: f64,
}

impl ExpansionRow {
    fn new(t: f64, c: &ExpansionCheck) -> Self {
        ExpansionRow {
            t,
            lhs: c.lhs,
            rhs: c.rhs,
            linear: c.linear,
            quadratic: c.quadratic,
            remainder: c.remainder,
            abs_error: (c.lhs - c.rhs).abs(),
        }
    }
}

#[derive(Serialize)]
struct ExpansionReport {
    command: &'static str,
    config: ExpansionFile,
    n: usize,
    normalizer: f64,
    rows: Vec<ExpansionRow>,
    max_abs_error: f64,
}

#[derive(Serialize)]
struct RegimeReport {
    command: &'static str,
    config: RegimeFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    selected: Option<RegimeRow>,
    table: Vec<RegimeRow>,
}

fn load_experiment_with_seed(common: &Common) -> Result<ExperimentConfig> {
    let mut c = config::load_experiment(&common.config)?;
    if let Some(seed) = common.seed {
        c.seed = RngStream::new(seed, c.seed.stream_id);
    }
    Ok(c)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs one command, writing its outputs into `--out`.
pub fn run(command: &Command) -> Result<()> {
    match command.common().threads {
        None => run_in_pool(command),
        Some(0) => Err(Error::invalid("threads", "must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?
            .install(|| run_in_pool(command)),
    }
}

fn run_in_pool(command: &Command) -> Result<()> {
    let start = Instant::now();
    let common = command.common();
    let config_bytes = fs::read(&common.config).map_err(|e| Error::config("config", format!("{}: {e}", common.config.display())))?;
    fs::create_dir_all(&common.out)?;
    let mut out = Outputs { dir: &common.out, format: common.format, written: Vec::new() };
    let name = command.name();
    let base_dir = config::parent_dir(&common.config);

    let seed = match command {
        Command::Posterior(_) | Command::Da(_) => {
            let c = load_experiment_with_seed(common)?;
            let file = ExperimentFile::from_config(&c);
            let column = RegimeColumn::for_prior(Some(&c.prior));
            if matches!(command, Command::Da(_)) {
                let variance = da_breakdown(&c)?;
                let posterior = run_posterior_bvm(&c)?;
                write_distribution(&mut out, &posterior.standardized, IndexName::Draw)?;
                let result = DaResult { posterior, variance };
                out.json("report.json", &Report { command: name, config: &file, regime: regime_for(&c, column), result })?;
            } else {
                let report = run_posterior_bvm(&c)?;
                write_distribution(&mut out, &report.standardized, IndexName::Draw)?;
                out.json("report.json", &Report { command: name, config: &file, regime: regime_for(&c, column), result: report })?;
            }
            c.seed.seed
        }
        Command::Coverage(_) => {
            let c = load_experiment_with_seed(common)?;
            let file = ExperimentFile::from_config(&c);
            let report = coverage_study(&c)?;
            out.csv("replications.csv", report.rows.iter())?;
            let column = RegimeColumn::for_prior(Some(&c.prior));
            out.json("report.json", &Report { command: name, config: &file, regime: regime_for(&c, column), result: report })?;
            c.seed.seed
        }
        Command::Freq(_) => {
            let c = load_experiment_with_seed(common)?;
            let file = ExperimentFile::from_config(&c);
            let report = frequentist_check(&c)?;
            write_distribution(&mut out, &report.statistics, IndexName::Replication)?;
            out.json("report.json", &Report { command: name, config: &file, regime: regime_for(&c, RegimeColumn::PlugIn), result: report })?;
            c.seed.seed
        }
        Command::Kato(_) => {
            let mut f = KatoFile::load(&common.config)?;
            if let Some(s) = common.seed {
                f.seed = s;
            }
            let report = run_kato(&f, base_dir)?;
            out.csv(
                "terms.csv",
                report.series.terms.iter().scan(0.0, |acc, &term| {
                    *acc += term;
                    Some((term, *acc))
                })
                .enumerate()
                .map(|(k, (term, partial_sum))| TermRow { order: k + 1, term, partial_sum }),
            )?;
            out.json("report.json", &report)?;
            f.seed
        }
        Command::ExpandCheck(_) => {
            let mut f = ExpansionFile::load(&common.config)?;
            if let Some(s) = common.seed {
                f.seed = s;
            }
            let report = run_expansion(&f, base_dir)?;
            out.csv("expansion.csv", report.rows.iter())?;
            out.json("report.json", &report)?;
            f.seed
        }
        Command::Regimes(_) => {
            let f = RegimeFile::load(&common.config)?;
            let column = RegimeColumn::for_prior(f.prior.as_ref());
            let selected = match (&f.functional, f.mode) {
                (Some(func), _) => Some(regime_row(RegimeRowKind::of_functional(func), column, f.p, f.n)),
                (None, Some(mode)) => Some(regime_row(RegimeRowKind::of_mode(mode), column, f.p, f.n)),
                (None, None) => None,
            };
            let table = full_regime_table(f.p, f.n);
            out.csv("regimes.csv", table.iter())?;
            out.json("report.json", &RegimeReport { command: name, config: f, selected, table })?;
            common.seed.unwrap_or(0)
        }
    };

    let manifest = Manifest {
        command: name,
        config: common.config.display().to_string(),
        config_hash: sha256_hex(&config_bytes),
        seed,
        versions: Versions { covbvm: env!("CARGO_PKG_VERSION"), schema: config::SCHEMA_VERSION },
        threads: rayon::current_num_threads(),
        outputs: out.written.clone(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(common.out.join("manifest.json"), text)?;
    Ok(())
}

fn run_kato(f: &KatoFile, base_dir: &Path) -> Result<KatoReport> {
    let base = f.base.resolve(f.p, base_dir, "base")?;
    let p = base.dim();
    let delta = match &f.delta {
        DeltaSource::Random(r) => {
            random_perturbation(p, r.random.epsilon, &mut RngStream::new(f.seed, 0).rng()).map_err(|e| e.at("delta"))?
        }
        DeltaSource::Matrix(m) => m.resolve(Some(p), base_dir, "delta")?,
    };
    let ctx = KatoContext::from_matrices(&base, &delta, f.m).map_err(|e| match e {
        Error::ZeroEigengap { .. } => e,
        other => other.at("m"),
    })?;
    let series = kato_partial_sum(&ctx, f.order).map_err(|e| match e {
        Error::OrderTooHigh { .. } => Error::config("order", e.to_string()),
        other => other,
    })?;
    let bias_probe = match &f.bias_probe {
        None => None,
        Some(b) => {
            let sigma = b.truth.resolve_spd(b.p, base_dir, "bias_probe.truth")?;
            let probe = second_order_bias_probe(&sigma, b.n, b.replications, RngStream::new(f.seed, 1))
                .map_err(|e| e.at("bias_probe"))?;
            Some(BiasProbeSummary::new(sigma.dim(), b.n, b.replications, &probe))
        }
    };
    Ok(KatoReport {
        command: "kato",
        config: f.clone(),
        m: f.m,
        base_eigenvalues: ctx.values().to_vec(),
        delta_spectral_norm: delta.spectral_norm()?,
        abs_error: (series.exact - series.value).abs(),
        series,
        bias_probe,
    })
}

fn run_expansion(f: &ExpansionFile, base_dir: &Path) -> Result<ExpansionReport> {
    let sigma = f.truth.resolve_spd(f.p, base_dir, "truth")?;
    let p = sigma.dim();
    let truth = TruthSpec::new(sigma);
    let dir = linearization(&f.functional, &truth).map_err(|e| e.at("functional"))?;
    let omega = match &f.omega {
        Some(m) => m.resolve_spd(Some(p), base_dir, "omega")?,
        None => truth.omega_star.clone(),
    };
    if f.n == 0 {
        return Err(Error::config("n", "must be positive"));
    }
    let data = draw_mvn(&truth.sigma_star, f.n, &mut RngStream::new(f.seed, 0).rng())?;
    let sigma_hat = sample_covariance(&data, false);
    let rows = f
        .t
        .iter()
        .map(|&t| likelihood_expansion_check(&omega, &dir, t, &sigma_hat, f.n).map(|c| ExpansionRow::new(t, &c)))
        .collect::<Result<Vec<_>>>()?;
    let max_abs_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    Ok(ExpansionReport { command: "expand-check", config: f.clone(), n: f.n, normalizer: dir.normalizer, rows, max_abs_error })
}
