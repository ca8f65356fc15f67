//! Simulation experiments: posterior BvM checks, credible-interval coverage,
//! frequentist plug-in checks, MGF diagnostics and the `(p, n)` regime table.
//!
//! Replication `r` of any study runs on `seed.child(r)`; within a replication
//! the data come from `fork(DATA_TAG)` and the posterior from
//! `fork(POSTERIOR_TAG)`. Results are reduced in replication order, so the
//! output does not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::discriminant::{da_center, da_posterior_draws, DaDataset, DaMode, DaTruth};
use crate::error::{Error, Result};
use crate::functionals::{
    asymptotic_variance, eigengap, evaluate, evaluate_at_precision, plug_in_center, standardize, FunctionalSpec,
    TruthSpec,
};
use crate::linalg::{sample_covariance, Dataset, SpdMatrix};
use crate::model::{PriorSpec, Target};
use crate::rng::RngStream;
use crate::samplers::{conjugate_posterior_draws, draw_mvn, gaussian_prior_posterior_draws, McmcConfig};

const DATA_TAG: u64 = 1;
const POSTERIOR_TAG: u64 = 2;

/// Eigenvalue experiments refuse truths whose eigengap is at or below this.
pub const MIN_EXPERIMENT_EIGENGAP: f64 = 0.1;
pub const MIN_DRAWS: usize = 100;
pub const DEFAULT_MGF_GRID: [f64; 9] = [-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];

/// `P(Z ≤ t)` for `Z ~ N(0, 1)`, as `½ erfc(−t/√2)`.
///
/// `erfc` is the musl implementation, accurate to within an ulp.
pub fn std_normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / std::f64::consts::SQRT_2)
}

/// Standard normal quantile function.
pub fn std_normal_quantile(u: f64) -> f64 {
    Normal::standard().inverse_cdf(u)
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// `sup_x |F_N(x) − F(x)|`, evaluated at the jumps of the empirical CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let s = sorted(samples);
    let n = s.len() as f64;
    Ok(s.iter().enumerate().fold(0.0, |acc, (i, &x)| {
        let f = cdf(x);
        let above = ((i + 1) as f64 / n - f).abs();
        let below = (i as f64 / n - f).abs();
        acc.max(above).max(below)
    }))
}

/// Type-7 (linear interpolation) sample quantile.
pub fn quantile(samples: &[f64], q: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid("q", "quantile level outside [0, 1]"));
    }
    let s = sorted(samples);
    Ok(quantile_sorted(&s, q))
}

fn quantile_sorted(s: &[f64], q: f64) -> f64 {
    let h = (s.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(s.len() - 1);
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

pub fn mean_sd(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// Effective sample size by Geyer's initial monotone positive sequence,
/// clamped to `[1, N]`. A constant chain has ESS `N`.
pub fn ess(chain: &[f64]) -> Result<f64> {
    if chain.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = chain.len();
    let mean = chain.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = chain.iter().map(|x| x - mean).collect();
    let autocov = |lag: usize| -> f64 {
        centered[..n - lag].iter().zip(&centered[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
    };
    let gamma0 = autocov(0);
    if !(gamma0 > 0.0) {
        return Ok(n as f64);
    }
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = autocov(2 * k) + autocov(2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum += pair;
        prev = pair;
        k += 1;
    }
    let tau = (2.0 * sum / gamma0 - 1.0).max(1.0 / n as f64);
    Ok((n as f64 / tau).clamp(1.0, n as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MgfPoint {
    pub t: f64,
    pub empirical: f64,
    pub target: f64,
}

/// Empirical `mean(exp(t·s))` against the standard normal MGF `exp(t²/2)`.
pub fn mgf_diagnostic(standardized: &[f64], t_grid: &[f64]) -> Result<Vec<MgfPoint>> {
    if standardized.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = standardized.len() as f64;
    t_grid
        .iter()
        .map(|&t| {
            if !(t.abs() <= 2.0) {
                return Err(Error::invalid("mgf_grid", format!("|t| = {} exceeds 2", t.abs())));
            }
            let empirical = standardized.iter().map(|s| (t * s).exp()).sum::<f64>() / n;
            Ok(MgfPoint { t, empirical, target: (0.5 * t * t).exp() })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QqPoint {
    pub theoretical: f64,
    pub empirical: f64,
}

/// Sorted samples against the normal quantiles at `(i − ½)/N`.
pub fn qq_points(standardized: &[f64]) -> Vec<QqPoint> {
    let n = standardized.len() as f64;
    sorted(standardized)
        .into_iter()
        .enumerate()
        .map(|(i, empirical)| QqPoint { theoretical: std_normal_quantile((i as f64 + 0.5) / n), empirical })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub density: f64,
    pub normal_density: f64,
}

/// Equal-width bins on `[lo, hi)`; samples outside are counted in no bin.
pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Vec<HistBin>> {
    if bins == 0 || !(lo < hi) {
        return Err(Error::invalid("bins", "need at least one bin over a nonempty range"));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        if x >= lo && x < hi {
            counts[(((x - lo) / width) as usize).min(bins - 1)] += 1;
        }
    }
    let total = samples.len().max(1) as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| {
            let a = lo + k as f64 * width;
            let b = a + width;
            HistBin {
                lo: a,
                hi: b,
                count,
                density: count as f64 / (total * width),
                normal_density: (std_normal_cdf(b) - std_normal_cdf(a)) / width,
            }
        })
        .collect())
}

/// Which functional an experiment studies.
#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    Matrix { truth: TruthSpec, functional: FunctionalSpec },
    Discriminant { truth: DaTruth, mode: DaMode },
}

impl Experiment {
    pub fn dim(&self) -> usize {
        match self {
            Experiment::Matrix { truth, .. } => truth.dim(),
            Experiment::Discriminant { truth, .. } => truth.dim(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Experiment::Matrix { functional, .. } => functional.label(),
            Experiment::Discriminant { mode: DaMode::Lda, .. } => "lda".into(),
            Experiment::Discriminant { mode: DaMode::Qda, .. } => "qda".into(),
        }
    }

    /// Functional value at the truth.
    pub fn truth_value(&self) -> Result<f64> {
        match self {
            Experiment::Matrix { truth, functional } => evaluate(functional, &truth.sigma_star),
            Experiment::Discriminant { truth, mode } => truth.functional(*mode),
        }
    }

    pub fn truth_variance(&self) -> Result<f64> {
        match self {
            Experiment::Matrix { truth, functional } => asymptotic_variance(functional, truth),
            Experiment::Discriminant { truth, mode } => truth.variance(*mode),
        }
    }
}

/// Where the variance used for standardization is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// At the truth.
    #[default]
    Truth,
    /// At the sample estimates.
    PlugIn,
}

/// Random-walk settings for experiments; the step count follows from `n_draws`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSettings {
    /// Defaults to a quarter of the recorded iterations, i.e. 20% of all steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(default = "one")]
    pub thinning: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_scale: Option<f64>,
    #[serde(default = "yes")]
    pub adapt: bool,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

impl Default for McmcSettings {
    fn default() -> Self {
        McmcSettings { burn_in: None, thinning: 1, step_scale: None, adapt: true }
    }
}

impl McmcSettings {
    /// Sampler configuration that records exactly `n_draws` states.
    pub fn to_config(&self, n_draws: usize) -> McmcConfig {
        let kept = n_draws * self.thinning;
        let burn_in = self.burn_in.unwrap_or(kept.div_ceil(4));
        McmcConfig {
            steps: burn_in + kept,
            burn_in: Some(burn_in),
            thinning: self.thinning,
            step_scale: self.step_scale,
            adapt: self.adapt,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub prior: PriorSpec,
    pub n: usize,
    pub n_draws: usize,
    pub replications: usize,
    pub alpha: f64,
    pub seed: RngStream,
    pub mcmc: McmcSettings,
    pub variance_mode: VarianceMode,
    pub mgf_grid: Vec<f64>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, prior: PriorSpec, n: usize, seed: RngStream) -> Self {
        ExperimentConfig {
            experiment,
            prior,
            n,
            n_draws: 1000,
            replications: 1,
            alpha: 0.1,
            seed,
            mcmc: McmcSettings::default(),
            variance_mode: VarianceMode::Truth,
            mgf_grid: DEFAULT_MGF_GRID.to_vec(),
        }
    }

    /// Checks everything that does not require sampling.
    pub fn validate(&self) -> Result<()> {
        self.prior.validate().map_err(|e| e.at("prior"))?;
        if self.n == 0 {
            return Err(Error::invalid("n", "must be positive"));
        }
        if self.n_draws < MIN_DRAWS {
            return Err(Error::invalid("n_draws", format!("must be at least {MIN_DRAWS}")));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications", "must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("{} is outside (0, 1)", self.alpha)));
        }
        if let Some(t) = self.mgf_grid.iter().find(|t| !(t.abs() <= 2.0)) {
            return Err(Error::invalid("mgf_grid", format!("|t| = {} exceeds 2", t.abs())));
        }
        self.mcmc.to_config(self.n_draws).validate().map_err(|e| e.at("mcmc"))?;
        let p = self.experiment.dim();
        match &self.experiment {
            Experiment::Matrix { truth, functional } => {
                functional.validate(p).map_err(|e| e.at("functional"))?;
                let needs_inverse = functional.target() == Target::Precision
                    || matches!(functional, FunctionalSpec::LogDet | FunctionalSpec::Entropy);
                if needs_inverse && self.n <= p {
                    return Err(Error::invalid("n", format!("need n > p = {p} for this functional")));
                }
                if let FunctionalSpec::Eigenvalue { m, target } = functional {
                    let gap = eigengap(truth, *m, *target).map_err(|e| e.at("functional"))?;
                    if !(gap > MIN_EXPERIMENT_EIGENGAP) {
                        return Err(Error::ZeroEigengap { m: *m, gap, threshold: MIN_EXPERIMENT_EIGENGAP });
                    }
                }
            }
            Experiment::Discriminant { .. } => {
                if self.n <= p {
                    return Err(Error::invalid("n", format!("need n > p = {p} for discriminant experiments")));
                }
                if !matches!(self.prior, PriorSpec::ConstrainedGaussian { .. }) {
                    return Err(Error::invalid("prior", "discriminant experiments use the constrained Gaussian prior"));
                }
            }
        }
        let v = self.experiment.truth_variance()?;
        if !(v > 0.0) {
            return Err(Error::NonPositiveVariance(v));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BvMReport {
    pub functional: String,
    pub n: usize,
    pub n_draws: usize,
    pub ks: f64,
    pub empirical_mean: f64,
    pub empirical_sd: f64,
    pub credible_interval: (f64, f64),
    pub covered: bool,
    pub truth_value: f64,
    pub center: f64,
    pub variance: f64,
    pub mgf_grid: Vec<MgfPoint>,
    pub ess: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptance_rate: Option<f64>,
    /// Standardized posterior values, in draw order.
    #[serde(skip)]
    pub standardized: Vec<f64>,
}

/// Posterior values of the functional, plug-in center and standardization variance.
struct PosteriorSample {
    values: Vec<f64>,
    center: f64,
    variance: f64,
    acceptance_rate: Option<f64>,
}

fn spd_estimate(s: crate::linalg::SymMatrix, n: usize) -> Result<SpdMatrix> {
    let p = s.dim();
    SpdMatrix::new(s).map_err(|_| Error::SingularSample { n, p })
}

fn sample_matrix_posterior(
    config: &ExperimentConfig,
    truth: &TruthSpec,
    functional: &FunctionalSpec,
    stream: RngStream,
) -> Result<PosteriorSample> {
    let data = draw_mvn(&truth.sigma_star, config.n, &mut stream.fork(DATA_TAG).rng())?;
    let post = stream.fork(POSTERIOR_TAG);
    let draws = match config.prior {
        PriorSpec::Wishart { b } => conjugate_posterior_draws(&data, b, config.n_draws, post)?,
        PriorSpec::ConstrainedGaussian { lambda_cap } => {
            gaussian_prior_posterior_draws(&data, lambda_cap, &config.mcmc.to_config(config.n_draws), post)?
        }
    };
    let values = draws.draws.iter().map(|d| evaluate_at_precision(functional, d)).collect::<Result<Vec<_>>>()?;
    let center = plug_in_center(functional, &data)?;
    let variance = match config.variance_mode {
        VarianceMode::Truth => asymptotic_variance(functional, truth)?,
        VarianceMode::PlugIn => {
            let sigma_hat = spd_estimate(sample_covariance(&data, false), config.n)?;
            asymptotic_variance(functional, &TruthSpec::new(sigma_hat))?
        }
    };
    Ok(PosteriorSample { values, center, variance, acceptance_rate: draws.meta.acceptance_rate })
}

/// The truth a plug-in variance is evaluated at: sample means and centered covariances.
fn estimated_da_truth(data: &DaDataset, truth: &DaTruth, mode: DaMode) -> Result<DaTruth> {
    let n = data.n();
    let sx = sample_covariance(data.x(), true);
    let sy = sample_covariance(data.y(), true);
    let (sx, sy) = match mode {
        DaMode::Lda => {
            let pooled = spd_estimate(sx.add(&sy)?.scaled(0.5), n)?;
            (pooled.clone(), pooled)
        }
        DaMode::Qda => (spd_estimate(sx, n)?, spd_estimate(sy, n)?),
    };
    DaTruth::new(data.x().mean(), data.y().mean(), sx, sy, truth.z.clone())
}

fn sample_da_posterior(config: &ExperimentConfig, truth: &DaTruth, mode: DaMode, stream: RngStream) -> Result<PosteriorSample> {
    let PriorSpec::ConstrainedGaussian { lambda_cap } = config.prior else {
        return Err(Error::invalid("prior", "discriminant experiments use the constrained Gaussian prior"));
    };
    let data = DaDataset::simulate(truth, config.n, &mut stream.fork(DATA_TAG).rng())?;
    let draws = da_posterior_draws(&data, lambda_cap, mode, &config.mcmc.to_config(config.n_draws), stream.fork(POSTERIOR_TAG))?;
    let values = draws.draws.iter().map(|d| d.discriminant(mode, &truth.z)).collect::<Result<Vec<_>>>()?;
    let center = da_center(&data, mode, &truth.z)?;
    let variance = match config.variance_mode {
        VarianceMode::Truth => truth.variance(mode)?,
        VarianceMode::PlugIn => estimated_da_truth(&data, truth, mode)?.variance(mode)?,
    };
    Ok(PosteriorSample { values, center, variance, acceptance_rate: draws.meta.acceptance_rate })
}

fn posterior_replication(config: &ExperimentConfig, stream: RngStream) -> Result<BvMReport> {
    let sample = match &config.experiment {
        Experiment::Matrix { truth, functional } => sample_matrix_posterior(config, truth, functional, stream)?,
        Experiment::Discriminant { truth, mode } => sample_da_posterior(config, truth, *mode, stream)?,
    };
    let standardized = standardize(&sample.values, sample.center, sample.variance, config.n)?;
    let (empirical_mean, empirical_sd) = mean_sd(&standardized)?;
    let raw = sorted(&sample.values);
    let lo = quantile_sorted(&raw, config.alpha / 2.0);
    let hi = quantile_sorted(&raw, 1.0 - config.alpha / 2.0);
    let truth_value = config.experiment.truth_value()?;
    Ok(BvMReport {
        functional: config.experiment.label(),
        n: config.n,
        n_draws: sample.values.len(),
        ks: ks_statistic(&standardized, std_normal_cdf)?,
        empirical_mean,
        empirical_sd,
        credible_interval: (lo, hi),
        covered: lo <= truth_value && truth_value <= hi,
        truth_value,
        center: sample.center,
        variance: sample.variance,
        mgf_grid: mgf_diagnostic(&standardized, &config.mgf_grid)?,
        ess: ess(&sample.values)?,
        acceptance_rate: sample.acceptance_rate,
        standardized,
    })
}

/// One dataset from the truth, one posterior sample, standardized with the
/// plug-in center and the configured variance.
pub fn run_posterior_bvm(config: &ExperimentConfig) -> Result<BvMReport> {
    config.validate()?;
    posterior_replication(config, config.seed)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicationRow {
    pub replication: usize,
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
    pub truth_value: f64,
    pub covered: bool,
    pub ks: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageReport {
    pub functional: String,
    pub alpha: f64,
    pub coverage: f64,
    pub replications: usize,
    /// `1 − α ± 4·√(α(1−α)/R)`.
    pub band: (f64, f64),
    pub rows: Vec<ReplicationRow>,
}

/// Fraction of replications whose equal-tailed credible interval contains the truth.
pub fn coverage_study(config: &ExperimentConfig) -> Result<CoverageReport> {
    config.validate()?;
    let rows = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let rep = posterior_replication(config, config.seed.child(r as u64))?;
            Ok(ReplicationRow {
                replication: r,
                center: rep.center,
                lo: rep.credible_interval.0,
                hi: rep.credible_interval.1,
                truth_value: rep.truth_value,
                covered: rep.covered,
                ks: rep.ks,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let covered = rows.iter().filter(|r| r.covered).count();
    let r = config.replications as f64;
    let a = config.alpha;
    let half = 4.0 * (a * (1.0 - a) / r).sqrt();
    Ok(CoverageReport {
        functional: config.experiment.label(),
        alpha: a,
        coverage: covered as f64 / r,
        replications: config.replications,
        band: (1.0 - a - half, 1.0 - a + half),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequentistReport {
    pub functional: String,
    pub n: usize,
    pub replications: usize,
    pub ks: f64,
    pub mean: f64,
    pub sd: f64,
    pub truth_value: f64,
    pub variance: f64,
    /// `√n (f̂ − f*) / V` per replication.
    #[serde(skip)]
    pub statistics: Vec<f64>,
}

fn plug_in_replication(config: &ExperimentConfig, stream: RngStream) -> Result<f64> {
    let mut rng = stream.fork(DATA_TAG).rng();
    match &config.experiment {
        Experiment::Matrix { truth, functional } => {
            let data: Dataset = draw_mvn(&truth.sigma_star, config.n, &mut rng)?;
            plug_in_center(functional, &data)
        }
        Experiment::Discriminant { truth, mode } => {
            let data = DaDataset::simulate(truth, config.n, &mut rng)?;
            da_center(&data, *mode, &truth.z)
        }
    }
}

/// Sampling law of the standardized plug-in estimator `√n (f̂ − f*) / V`
/// over fresh datasets, compared with `N(0, 1)`.
pub fn frequentist_check(config: &ExperimentConfig) -> Result<FrequentistReport> {
    config.validate()?;
    let truth_value = config.experiment.truth_value()?;
    let variance = config.experiment.truth_variance()?;
    let estimates = (0..config.replications)
        .into_par_iter()
        .map(|r| plug_in_replication(config, config.seed.child(r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let statistics = standardize(&estimates, truth_value, variance, config.n)?;
    let (mean, sd) = mean_sd(&statistics)?;
    Ok(FrequentistReport {
        functional: config.experiment.label(),
        n: config.n,
        replications: config.replications,
        ks: ks_statistic(&statistics, std_normal_cdf)?,
        mean,
        sd,
        truth_value,
        variance,
        statistics,
    })
}

/// Column of the regime table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeColumn {
    PlugIn,
    Conjugate,
    NonConjugate,
}

impl RegimeColumn {
    pub fn for_prior(prior: Option<&PriorSpec>) -> Self {
        match prior {
            None => RegimeColumn::PlugIn,
            Some(p) if p.is_conjugate() => RegimeColumn::Conjugate,
            Some(_) => RegimeColumn::NonConjugate,
        }
    }
}

/// Row key of the regime table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeRowKind {
    SigmaEntry,
    OmegaEntry,
    SigmaQuadratic,
    OmegaQuadratic,
    LogDet,
    SigmaEigenvalue,
    OmegaEigenvalue,
    Lda,
    Qda,
}

impl RegimeRowKind {
    pub const ALL: [RegimeRowKind; 9] = [
        RegimeRowKind::SigmaEntry,
        RegimeRowKind::OmegaEntry,
        RegimeRowKind::SigmaQuadratic,
        RegimeRowKind::OmegaQuadratic,
        RegimeRowKind::LogDet,
        RegimeRowKind::SigmaEigenvalue,
        RegimeRowKind::OmegaEigenvalue,
        RegimeRowKind::Lda,
        RegimeRowKind::Qda,
    ];

    /// Bilinear forms share the quadratic-form row and entropy the log-determinant row.
    pub fn of_functional(f: &FunctionalSpec) -> Self {
        let cov = f.target() == Target::Covariance;
        match f {
            FunctionalSpec::Entry { .. } if cov => RegimeRowKind::SigmaEntry,
            FunctionalSpec::Entry { .. } => RegimeRowKind::OmegaEntry,
            FunctionalSpec::Quadratic { .. } | FunctionalSpec::Bilinear { .. } if cov => RegimeRowKind::SigmaQuadratic,
            FunctionalSpec::Quadratic { .. } | FunctionalSpec::Bilinear { .. } => RegimeRowKind::OmegaQuadratic,
            FunctionalSpec::LogDet | FunctionalSpec::Entropy => RegimeRowKind::LogDet,
            FunctionalSpec::Eigenvalue { .. } if cov => RegimeRowKind::SigmaEigenvalue,
            FunctionalSpec::Eigenvalue { .. } => RegimeRowKind::OmegaEigenvalue,
        }
    }

    pub fn of_mode(mode: DaMode) -> Self {
        match mode {
            DaMode::Lda => RegimeRowKind::Lda,
            DaMode::Qda => RegimeRowKind::Qda,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RegimeRowKind::SigmaEntry => "sigma_ij",
            RegimeRowKind::OmegaEntry => "omega_ij",
            RegimeRowKind::SigmaQuadratic => "v'Sigma v",
            RegimeRowKind::OmegaQuadratic => "v'Omega v",
            RegimeRowKind::LogDet => "log det Sigma",
            RegimeRowKind::SigmaEigenvalue => "lambda_m(Sigma)",
            RegimeRowKind::OmegaEigenvalue => "lambda_m(Omega)",
            RegimeRowKind::Lda => "LDA",
            RegimeRowKind::Qda => "QDA",
        }
    }

    /// Exponent `k` in the requirement `p^k ≪ n`; `None` means any regime.
    pub fn exponent(self, column: RegimeColumn) -> Option<u32> {
        use RegimeColumn::*;
        use RegimeRowKind::*;
        match (self, column) {
            (SigmaEntry | SigmaQuadratic, PlugIn) => None,
            (SigmaEntry | SigmaQuadratic, Conjugate) => Some(1),
            (SigmaEntry | SigmaQuadratic, NonConjugate) => Some(2),
            (OmegaEntry | OmegaQuadratic, PlugIn | Conjugate) => Some(2),
            (OmegaEntry | OmegaQuadratic, NonConjugate) => Some(3),
            (LogDet, _) => Some(3),
            (SigmaEigenvalue | OmegaEigenvalue | Lda, PlugIn | Conjugate) => Some(2),
            (SigmaEigenvalue | OmegaEigenvalue | Lda, NonConjugate) => Some(4),
            (Qda, PlugIn | Conjugate) => Some(3),
            (Qda, NonConjugate) => Some(4),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeRow {
    pub functional: &'static str,
    pub column: RegimeColumn,
    pub required: String,
    pub satisfied: bool,
}

fn requirement(exponent: Option<u32>) -> String {
    match exponent {
        None => "any (p, n)".into(),
        Some(1) => "p ≪ n".into(),
        Some(k) => {
            let sup = ["⁰", "¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹"];
            format!("p{} ≪ n", sup[k as usize % 10])
        }
    }
}

/// Advisory `(p, n)` requirement; `a ≪ b` is read as `10·a ≤ b`.
pub fn regime_row(kind: RegimeRowKind, column: RegimeColumn, p: usize, n: usize) -> RegimeRow {
    let exponent = kind.exponent(column);
    let satisfied = match exponent {
        None => true,
        Some(k) => 10.0 * (p as f64).powi(k as i32) <= n as f64,
    };
    RegimeRow { functional: kind.name(), column, required: requirement(exponent), satisfied }
}

pub fn regime_table(functional: &FunctionalSpec, prior: Option<&PriorSpec>, p: usize, n: usize) -> RegimeRow {
    regime_row(RegimeRowKind::of_functional(functional), RegimeColumn::for_prior(prior), p, n)
}

/// Every row and column at the given `(p, n)`.
pub fn full_regime_table(p: usize, n: usize) -> Vec<RegimeRow> {
    let columns = [RegimeColumn::PlugIn, RegimeColumn::Conjugate, RegimeColumn::NonConjugate];
    RegimeRowKind::ALL
        .iter()
        .flat_map(|&k| columns.iter().map(move |&c| regime_row(k, c, p, n)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_examples() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(40.0) - 1.0).abs() < 1e-12);
        assert!((std_normal_cdf(1.959964) - 0.975).abs() < 1e-6);
        assert!(std_normal_cdf(-40.0) >= 0.0);
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_statistic(&[0.0], std_normal_cdf).unwrap(), 0.5);
        assert_eq!(ks_statistic(&[], std_normal_cdf).unwrap_err(), Error::EmptySamples);
        let n = 1000;
        let q: Vec<f64> = (0..n).map(|i| std_normal_quantile((i as f64 + 0.5) / n as f64)).collect();
        assert!(ks_statistic(&q, std_normal_cdf).unwrap() <= 0.5 / n as f64 + 1e-6);
    }

    #[test]
    fn quantile_type7() {
        let s = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(quantile(&s, 0.0).unwrap(), 1.0);
        assert_eq!(quantile(&s, 1.0).unwrap(), 4.0);
        assert_eq!(quantile(&s, 0.5).unwrap(), 2.5);
        assert!((quantile(&s, 0.1).unwrap() - 1.3).abs() < 1e-15);
    }

    #[test]
    fn mgf_examples() {
        let pts = mgf_diagnostic(&[0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(pts[0].empirical, 1.0);
        assert_eq!(pts[0].target, 1.0);
        assert_eq!(pts[1].empirical, 1.0);
        assert!(pts[1].target > 1.6);
        assert!(mgf_diagnostic(&[0.0], &[2.5]).is_err());
    }

    #[test]
    fn ess_bounds() {
        let iid: Vec<f64> = (0..1000).map(|i| std_normal_quantile(((i * 7919) % 1000) as f64 / 1000.0 + 0.0005)).collect();
        let e = ess(&iid).unwrap();
        assert!(e > 0.0 && e <= 1000.0);
        assert_eq!(ess(&[1.0; 50]).unwrap(), 50.0);
        // a slowly drifting chain carries little information
        let drift: Vec<f64> = (0..1000).map(|i| (i as f64 / 200.0).sin()).collect();
        assert!(ess(&drift).unwrap() < 50.0);
    }

    #[test]
    fn regime_examples() {
        let entry = FunctionalSpec::Entry { i: 1, j: 2, target: Target::Covariance };
        let r = regime_table(&entry, Some(&PriorSpec::Wishart { b: 3 }), 10, 1000);
        assert_eq!(r.required, "p ≪ n");
        assert!(r.satisfied);
        let gauss = PriorSpec::ConstrainedGaussian { lambda_cap: 5.0 };
        let r = regime_table(&FunctionalSpec::LogDet, Some(&gauss), 10, 1000);
        assert_eq!(r.required, "p³ ≪ n");
        assert!(!r.satisfied);
        let eig = FunctionalSpec::Eigenvalue { m: 1, target: Target::Covariance };
        let r = regime_table(&eig, Some(&gauss), 3, 1_000_000);
        assert_eq!(r.required, "p⁴ ≪ n");
        assert!(r.satisfied);
        assert!(regime_table(&entry, None, 1000, 10).satisfied);
        assert_eq!(full_regime_table(5, 100).len(), 27);
    }

    #[test]
    fn mcmc_settings_record_exact_draw_count() {
        for (n_draws, thin) in [(100, 1), (101, 1), (777, 3)] {
            let c = McmcSettings { thinning: thin, ..Default::default() }.to_config(n_draws);
            assert_eq!((c.steps - c.burn_in()) / c.thinning, n_draws);
            assert!(c.burn_in() * 5 >= c.steps);
        }
    }

    #[test]
    fn histogram_counts() {
        let h = histogram(&[-0.5, 0.1, 0.2, 5.0], -1.0, 1.0, 2).unwrap();
        assert_eq!(h[0].count, 1);
        assert_eq!(h[1].count, 2);
        assert!((h[1].density - 0.5).abs() < 1e-15);
    }
}
