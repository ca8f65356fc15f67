//! JSON experiment configs.
//!
//! Every file carries `"schema": 1` (assumed when absent). Unknown keys are
//! rejected and errors report the offending field path.
//!
//! Matrices (`truth`, `x.sigma`, `base`, `delta`, ...) may be written as
//!
//! ```json
//! "identity"                      // needs "p"
//! {"diag": [3.0, 2.0, 1.0]}
//! {"equicorrelation": 0.3}        // unit diagonal, constant off-diagonal; needs "p"
//! [[1.0, 0.3], [0.3, 1.0]]        // inline rows
//! {"csv": "sigma.csv"}            // relative to the config file
//! ```
//!
//! A matrix experiment (`posterior`, `coverage`, `freq`):
//!
//! ```json
//! {"schema": 1, "p": 3, "n": 3000, "truth": "identity",
//!  "functional": {"kind": "entry", "i": 1, "j": 2, "target": "cov"},
//!  "prior": {"kind": "wishart", "b": 3},
//!  "n_draws": 10000, "replications": 1, "alpha": 0.1}
//! ```
//!
//! A discriminant experiment (`da`, and also `posterior`, `coverage`, `freq`):
//!
//! ```json
//! {"schema": 1, "mode": "qda", "z": [0.5, 0.0],
//!  "x": {"n": 4000, "mu": [0.0, 0.0], "sigma": "identity"},
//!  "y": {"n": 4000, "mu": [1.0, 0.0], "sigma": {"diag": [1.5, 1.0]}},
//!  "prior": {"kind": "constrained_gaussian", "lambda_cap": 10.0},
//!  "n_draws": 20000, "mcmc": {"thinning": 2}}
//! ```
//!
//! Optional keys with defaults: `n_draws` 1000, `replications` 1, `alpha` 0.1,
//! `mcmc` (burn-in 20% of all steps, thinning 1, adaptive step size),
//! `variance_mode` `"truth"`, `mgf_grid` −2..2 by 0.5, `seed` 0, `stream` 0.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::discriminant::{DaMode, DaTruth};
use crate::error::{Error, Result};
use crate::functionals::{FunctionalSpec, TruthSpec};
use crate::harness::{Experiment, ExperimentConfig, McmcSettings, VarianceMode, DEFAULT_MGF_GRID};
use crate::linalg::{SpdMatrix, SymMatrix};
use crate::model::PriorSpec;
use crate::rng::RngStream;

pub const SCHEMA_VERSION: u32 = 1;

fn schema_v1() -> u32 {
    SCHEMA_VERSION
}

/// Parses JSON, reporting errors with the JSON path of the offending value.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { String::new() } else { path };
        Error::config(field, e.into_inner().to_string())
    })
}

fn check_schema(schema: u32) -> Result<()> {
    if schema != SCHEMA_VERSION {
        return Err(Error::config("schema", format!("unsupported schema version {schema}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagSource {
    pub diag: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquicorrelationSource {
    pub equicorrelation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSource {
    pub csv: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSource {
    Named(String),
    Rows(Vec<Vec<f64>>),
    Diag(DiagSource),
    Equicorrelation(EquicorrelationSource),
    Csv(CsvSource),
}

impl MatrixSource {
    pub fn rows(m: &SymMatrix) -> Self {
        MatrixSource::Rows(m.to_rows())
    }

    /// Dimension implied by the source itself, if any.
    fn own_dim(&self) -> Option<usize> {
        match self {
            MatrixSource::Rows(r) => Some(r.len()),
            MatrixSource::Diag(d) => Some(d.diag.len()),
            _ => None,
        }
    }

    /// Resolves to a symmetric matrix; errors name `field`.
    pub fn resolve(&self, p: Option<usize>, base_dir: &Path, field: &str) -> Result<SymMatrix> {
        let need_p = || p.ok_or_else(|| Error::config("p", format!("`p` is required when `{field}` has no explicit entries")));
        let m = match self {
            MatrixSource::Named(name) if name == "identity" => Ok(SymMatrix::identity(need_p()?)),
            MatrixSource::Named(name) => Err(Error::config(field, format!("unknown matrix name `{name}`"))),
            MatrixSource::Rows(rows) => SymMatrix::from_rows(rows).map_err(|e| e.at(field)),
            MatrixSource::Diag(d) => Ok(SymMatrix::from_diag(&d.diag)),
            MatrixSource::Equicorrelation(e) => {
                let p = need_p()?;
                let rows: Vec<Vec<f64>> =
                    (0..p).map(|i| (0..p).map(|j| if i == j { 1.0 } else { e.equicorrelation }).collect()).collect();
                SymMatrix::from_rows(&rows).map_err(|e| e.at(field))
            }
            MatrixSource::Csv(c) => SymMatrix::read_csv(base_dir.join(&c.csv)).map_err(|e| e.at(field)),
        }?;
        if let Some(p) = p {
            if m.dim() != p {
                return Err(Error::config(field, format!("matrix has dimension {} but p = {p}", m.dim())));
            }
        }
        if m.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::config(field, "non-finite entry"));
        }
        Ok(m)
    }

    pub fn resolve_spd(&self, p: Option<usize>, base_dir: &Path, field: &str) -> Result<SpdMatrix> {
        let m = self.resolve(p, base_dir, field)?;
        SpdMatrix::new(m).map_err(|e| Error::config(field, format!("not positive definite: {e}")))
    }
}

/// One class of a discriminant experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassFile {
    pub n: usize,
    pub mu: Vec<f64>,
    pub sigma: MatrixSource,
}

fn default_draws() -> usize {
    1000
}

fn default_reps() -> usize {
    1
}

fn default_alpha() -> f64 {
    0.1
}

fn default_grid() -> Vec<f64> {
    DEFAULT_MGF_GRID.to_vec()
}

/// On-disk form of [`ExperimentConfig`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    #[serde(default = "schema_v1")]
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<MatrixSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<FunctionalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<DaMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<ClassFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<ClassFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
    pub prior: PriorSpec,
    #[serde(default = "default_draws")]
    pub n_draws: usize,
    #[serde(default = "default_reps")]
    pub replications: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub mcmc: McmcSettings,
    #[serde(default)]
    pub variance_mode: VarianceMode,
    #[serde(default = "default_grid")]
    pub mgf_grid: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

impl ExperimentFile {
    pub fn into_config(self, base_dir: &Path) -> Result<ExperimentConfig> {
        check_schema(self.schema)?;
        let (experiment, n) = match (&self.functional, self.mode) {
            (Some(_), Some(_)) => return Err(Error::config("mode", "give either `functional` or `mode`, not both")),
            (None, None) => return Err(Error::config("functional", "missing `functional` (or `mode` for discriminant experiments)")),
            (Some(f), None) => {
                for (name, present) in [("x", self.x.is_some()), ("y", self.y.is_some()), ("z", self.z.is_some())] {
                    if present {
                        return Err(Error::config(name, "only valid for discriminant experiments"));
                    }
                }
                let truth = self.truth.as_ref().ok_or_else(|| Error::config("truth", "missing field"))?;
                let p = self.p.or(truth.own_dim());
                let sigma = truth.resolve_spd(p, base_dir, "truth")?;
                f.validate(sigma.dim()).map_err(|e| e.at("functional"))?;
                let n = self.n.ok_or_else(|| Error::config("n", "missing field"))?;
                (Experiment::Matrix { truth: TruthSpec::new(sigma), functional: f.clone() }, n)
            }
            (None, Some(mode)) => {
                if self.truth.is_some() {
                    return Err(Error::config("truth", "discriminant experiments take `x.sigma` and `y.sigma`"));
                }
                let x = self.x.as_ref().ok_or_else(|| Error::config("x", "missing field"))?;
                let y = self.y.as_ref().ok_or_else(|| Error::config("y", "missing field"))?;
                let z = self.z.clone().ok_or_else(|| Error::config("z", "missing field"))?;
                if y.n != x.n {
                    return Err(Error::config("y.n", format!("class sizes must be equal: x.n = {}, y.n = {}", x.n, y.n)));
                }
                if let Some(n) = self.n {
                    if n != x.n {
                        return Err(Error::config("n", format!("n = {n} disagrees with x.n = {}", x.n)));
                    }
                }
                let p = self.p.unwrap_or(x.mu.len());
                let sx = x.sigma.resolve_spd(Some(p), base_dir, "x.sigma")?;
                let sy = y.sigma.resolve_spd(Some(p), base_dir, "y.sigma")?;
                let truth = DaTruth::new(x.mu.clone(), y.mu.clone(), sx, sy, z).map_err(|e| match e.field() {
                    Some("mu_x") => Error::config("x.mu", e.to_string()),
                    Some("mu_y") => Error::config("y.mu", e.to_string()),
                    Some("z") => Error::config("z", e.to_string()),
                    _ => e.at("x"),
                })?;
                if mode == DaMode::Lda {
                    truth.variance(DaMode::Lda).map_err(|e| Error::config("y.sigma", e.to_string()))?;
                }
                (Experiment::Discriminant { truth, mode }, x.n)
            }
        };
        let config = ExperimentConfig {
            experiment,
            prior: self.prior,
            n,
            n_draws: self.n_draws,
            replications: self.replications,
            alpha: self.alpha,
            seed: RngStream::new(self.seed, self.stream),
            mcmc: self.mcmc,
            variance_mode: self.variance_mode,
            mgf_grid: self.mgf_grid,
        };
        config.validate().map_err(|e| match e {
            Error::InvalidArgument { field, message } | Error::ConfigParse { field, message } => Error::config(field, message),
            other => other,
        })?;
        Ok(config)
    }

    /// Canonical file for a config: matrices inline, every default spelled out.
    pub fn from_config(c: &ExperimentConfig) -> Self {
        let mut file = ExperimentFile {
            schema: SCHEMA_VERSION,
            p: None,
            n: Some(c.n),
            truth: None,
            functional: None,
            mode: None,
            x: None,
            y: None,
            z: None,
            prior: c.prior,
            n_draws: c.n_draws,
            replications: c.replications,
            alpha: c.alpha,
            mcmc: c.mcmc.clone(),
            variance_mode: c.variance_mode,
            mgf_grid: c.mgf_grid.clone(),
            seed: c.seed.seed,
            stream: c.seed.stream_id,
        };
        match &c.experiment {
            Experiment::Matrix { truth, functional } => {
                file.truth = Some(MatrixSource::rows(&truth.sigma_star));
                file.functional = Some(functional.clone());
            }
            Experiment::Discriminant { truth, mode } => {
                file.mode = Some(*mode);
                file.x = Some(ClassFile { n: c.n, mu: truth.mu_x.clone(), sigma: MatrixSource::rows(&truth.sigma_x) });
                file.y = Some(ClassFile { n: c.n, mu: truth.mu_y.clone(), sigma: MatrixSource::rows(&truth.sigma_y) });
                file.z = Some(truth.z.clone());
            }
        }
        file
    }
}

pub fn parse_experiment(text: &str, base_dir: &Path) -> Result<ExperimentConfig> {
    from_json::<ExperimentFile>(text)?.into_config(base_dir)
}

pub fn load_experiment(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    parse_experiment(&std::fs::read_to_string(path)?, parent_dir(path))
}

pub fn to_json(c: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(&ExperimentFile::from_config(c)).expect("config serializes")
}

pub(crate) fn parent_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomDelta {
    /// Spectral norm of the random perturbation.
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomDeltaSource {
    pub random: RandomDelta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaSource {
    Random(RandomDeltaSource),
    Matrix(MatrixSource),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasProbeFile {
    /// Diagonal truth `Σ*`.
    pub truth: MatrixSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    pub n: usize,
    pub replications: usize,
}

fn default_order() -> usize {
    3
}

/// Config of the `kato` command: the series for `λ_m(base + delta)` and an
/// optional second-order bias probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KatoFile {
    #[serde(default = "schema_v1")]
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    pub base: MatrixSource,
    pub delta: DeltaSource,
    pub m: usize,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias_probe: Option<BiasProbeFile>,
    #[serde(default)]
    pub seed: u64,
}

impl KatoFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f: KatoFile = from_json(&std::fs::read_to_string(path)?)?;
        check_schema(f.schema)?;
        Ok(f)
    }
}

fn default_t() -> Vec<f64> {
    vec![-2.0, 1.0, 3.0]
}

/// Config of the `expand-check` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionFile {
    #[serde(default = "schema_v1")]
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    pub n: usize,
    /// Truth the data are drawn from and the linearization is taken at.
    pub truth: MatrixSource,
    pub functional: FunctionalSpec,
    /// Expansion point; defaults to `Ω*`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<MatrixSource>,
    #[serde(default = "default_t")]
    pub t: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl ExpansionFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f: ExpansionFile = from_json(&std::fs::read_to_string(path)?)?;
        check_schema(f.schema)?;
        Ok(f)
    }
}

/// Config of the `regimes` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeFile {
    #[serde(default = "schema_v1")]
    pub schema: u32,
    pub p: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<FunctionalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<DaMode>,
    /// Absent for the plug-in column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorSpec>,
}

impl RegimeFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f: RegimeFile = from_json(&std::fs::read_to_string(path)?)?;
        check_schema(f.schema)?;
        if f.functional.is_some() && f.mode.is_some() {
            return Err(Error::config("mode", "give either `functional` or `mode`, not both"));
        }
        Ok(f)
    }
}
