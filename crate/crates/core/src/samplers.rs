//! Seeded samplers: multivariate normals, Wishart matrices, the conjugate
//! Wishart posterior and a random-walk Metropolis kernel over symmetric
//! matrices for the constrained Gaussian prior.

use std::path::Path;

use rand::Rng;
use rand_distr::{ChiSquared, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sample_covariance, Dataset, SpdMatrix, SymMatrix};
use crate::model::{self, PriorSpec};
use crate::rng::RngStream;

/// Acceptance rate the burn-in adaptation steers toward.
pub const TARGET_ACCEPTANCE: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DrawMethod {
    Conjugate,
    Mcmc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrawMeta {
    pub method: DrawMethod,
    pub acceptance_rate: Option<f64>,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    pub stream_id: u64,
    /// Proposal scale after adaptation (MCMC only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_scale: Option<f64>,
}

/// Ordered posterior draws of the precision matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorDraws {
    pub draws: Vec<SpdMatrix>,
    pub meta: DrawMeta,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Writes `draw_00000.csv`, `draw_00001.csv`, ... and `meta.json` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (k, d) in self.draws.iter().enumerate() {
            d.write_csv(dir.join(format!("draw_{k:05}.csv")))?;
        }
        let meta = serde_json::to_string_pretty(&self.meta).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(dir.join("meta.json"), meta)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let meta: DrawMeta = serde_json::from_str(&std::fs::read_to_string(dir.join("meta.json"))?)
            .map_err(|e| Error::config("meta.json", e.to_string()))?;
        let mut draws = Vec::new();
        loop {
            let path = dir.join(format!("draw_{:05}.csv", draws.len()));
            if !path.exists() {
                break;
            }
            draws.push(SpdMatrix::new(SymMatrix::read_csv(path)?)?);
        }
        Ok(PosteriorDraws { draws, meta })
    }
}

pub fn standard_normal_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// `n` rows of `N(0, cov)`, each row `L z` with `L` the Cholesky factor of `cov`.
pub fn draw_mvn<R: Rng + ?Sized>(cov: &SpdMatrix, n: usize, rng: &mut R) -> Result<Dataset> {
    draw_mvn_mean(&vec![0.0; cov.dim()], cov, n, rng)
}

pub fn draw_mvn_mean<R: Rng + ?Sized>(
    mean: &[f64],
    cov: &SpdMatrix,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    let p = cov.dim();
    if mean.len() != p {
        return Err(Error::DimensionMismatch { expected: p, found: mean.len() });
    }
    if n == 0 {
        return Err(Error::EmptyData);
    }
    let l = cov.cholesky();
    let mut rows = Vec::with_capacity(n * p);
    let mut z = vec![0.0; p];
    for _ in 0..n {
        z.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
        rows.extend(l.mul_vec(&z).iter().zip(mean).map(|(x, m)| x + m));
    }
    Ok(Dataset::from_raw(n, p, rows))
}

/// `Σ_{l=1..df} Z_l Z_lᵀ` with `Z_l ~ N(0, scale)`.
///
/// Sampled through the Bartlett decomposition: `W = L A Aᵀ Lᵀ` with `A` lower
/// triangular, `A_ii² ~ χ²_{df−i+1}` and `A_ij ~ N(0, 1)` below the diagonal,
/// so the cost does not grow with `df`.
pub fn draw_wishart<R: Rng + ?Sized>(scale: &SpdMatrix, df: usize, rng: &mut R) -> Result<SpdMatrix> {
    let p = scale.dim();
    if df < p {
        return Err(Error::DegreesOfFreedomTooSmall { df, p });
    }
    let mut a = vec![0.0; p * p];
    for i in 0..p {
        let chi = ChiSquared::new((df - i) as f64).expect("positive degrees of freedom");
        a[i * p + i] = rng.sample(chi).sqrt();
        for j in 0..i {
            a[i * p + j] = rng.sample(StandardNormal);
        }
    }
    let mut w = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let x: f64 = (0..=j).map(|k| a[i * p + k] * a[j * p + k]).sum();
            w[i * p + j] = x;
            w[j * p + i] = x;
        }
    }
    let whitened = SymMatrix::new(p, w)?;
    SpdMatrix::new(scale.cholesky().sandwich(&whitened)?)
}

/// Wishart posterior `W_p((nΣ̂ + I)⁻¹, n + p + b − 1)` of the precision matrix
/// under the `W_p(I, p + b − 1)` prior.
#[derive(Clone, Debug)]
pub struct ConjugatePosterior {
    pub scale: SpdMatrix,
    pub df: usize,
}

impl ConjugatePosterior {
    /// From the uncentered second-moment matrix `sigma_hat` of `n` samples.
    /// `n = 0` gives the prior.
    pub fn from_moments(sigma_hat: &SymMatrix, n: usize, b: usize) -> Result<Self> {
        if b == 0 {
            return Err(Error::invalid("b", "Wishart prior requires b >= 1"));
        }
        let p = sigma_hat.dim();
        let precision = sigma_hat.scaled(n as f64).add(&SymMatrix::identity(p))?;
        Ok(ConjugatePosterior { scale: SpdMatrix::new(precision)?.inverse(), df: n + p + b - 1 })
    }

    pub fn from_data(data: &Dataset, b: usize) -> Result<Self> {
        Self::from_moments(&sample_covariance(data, false), data.n(), b)
    }

    pub fn mean(&self) -> SymMatrix {
        self.scale.scaled(self.df as f64)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SpdMatrix> {
        draw_wishart(&self.scale, self.df, rng)
    }
}

pub fn conjugate_posterior_draws(
    data: &Dataset,
    b: usize,
    n_draws: usize,
    stream: RngStream,
) -> Result<PosteriorDraws> {
    let post = ConjugatePosterior::from_data(data, b)?;
    conjugate_draws_from(&post, n_draws, stream)
}

pub fn conjugate_draws_from(
    post: &ConjugatePosterior,
    n_draws: usize,
    stream: RngStream,
) -> Result<PosteriorDraws> {
    let mut rng = stream.rng();
    let draws = (0..n_draws).map(|_| post.draw(&mut rng)).collect::<Result<Vec<_>>>()?;
    Ok(PosteriorDraws {
        draws,
        meta: DrawMeta {
            method: DrawMethod::Conjugate,
            acceptance_rate: None,
            burn_in: 0,
            thinning: 1,
            seed: stream.seed,
            stream_id: stream.stream_id,
            step_scale: None,
        },
    })
}

/// Random-walk Metropolis state over the upper-triangular coordinates of a
/// symmetric matrix. Proposals add independent `N(0, step_scale²)` noise to
/// each of the `p(p+1)/2` free entries.
#[derive(Clone, Debug)]
pub struct RandomWalk {
    state: SymMatrix,
    log_density: f64,
    step_scale: f64,
    proposed: u64,
    accepted: u64,
}

impl RandomWalk {
    pub fn new(init: SymMatrix, log_target: impl Fn(&SymMatrix) -> f64, step_scale: f64) -> Result<Self> {
        if !(step_scale > 0.0 && step_scale.is_finite()) {
            return Err(Error::invalid("step_scale", "must be positive and finite"));
        }
        let log_density = log_target(&init);
        if !log_density.is_finite() {
            return Err(Error::BadInit);
        }
        Ok(RandomWalk { state: init, log_density, step_scale, proposed: 0, accepted: 0 })
    }

    pub fn state(&self) -> &SymMatrix {
        &self.state
    }

    pub fn log_density(&self) -> f64 {
        self.log_density
    }

    pub fn step_scale(&self) -> f64 {
        self.step_scale
    }

    /// Re-evaluates the current state after the target changed (Gibbs sweeps).
    pub fn refresh(&mut self, log_target: impl Fn(&SymMatrix) -> f64) {
        self.log_density = log_target(&self.state);
    }

    pub fn reset_counts(&mut self) {
        self.proposed = 0;
        self.accepted = 0;
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// One Metropolis step; returns the acceptance probability of the proposal.
    pub fn step<R: Rng + ?Sized>(&mut self, log_target: impl Fn(&SymMatrix) -> f64, rng: &mut R) -> f64 {
        let p = self.state.dim();
        let mut data = self.state.as_slice().to_vec();
        for i in 0..p {
            for j in i..p {
                let eps: f64 = rng.sample(StandardNormal);
                let x = data[i * p + j] + self.step_scale * eps;
                data[i * p + j] = x;
                data[j * p + i] = x;
            }
        }
        let proposal = SymMatrix::new(p, data).expect("finite proposal");
        let proposed_density = log_target(&proposal);
        self.proposed += 1;
        let log_ratio = proposed_density - self.log_density;
        let accept_prob = if proposed_density == f64::NEG_INFINITY {
            0.0
        } else if log_ratio >= 0.0 {
            1.0
        } else {
            log_ratio.exp()
        };
        // u < 1 always, so an acceptance probability of 1 always accepts
        // and a probability of 0 never does.
        let u: f64 = rng.random();
        if u < accept_prob {
            self.state = proposal;
            self.log_density = proposed_density;
            self.accepted += 1;
        }
        accept_prob
    }

    /// Robbins–Monro update of `log(step_scale)` toward [`TARGET_ACCEPTANCE`].
    pub fn adapt(&mut self, iteration: usize, accept_prob: f64) {
        let gain = 1.0 / ((iteration + 1) as f64).powf(0.6);
        self.step_scale *= (gain * (accept_prob - TARGET_ACCEPTANCE)).exp();
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub states: Vec<SymMatrix>,
    pub acceptance_rate: f64,
}

/// Plain random-walk Metropolis with a fixed proposal scale, recording every state.
pub fn metropolis_chain<R: Rng + ?Sized>(
    log_target: impl Fn(&SymMatrix) -> f64,
    init: &SymMatrix,
    steps: usize,
    step_scale: f64,
    rng: &mut R,
) -> Result<Chain> {
    let mut walk = RandomWalk::new(init.clone(), &log_target, step_scale)?;
    let mut states = Vec::with_capacity(steps);
    for _ in 0..steps {
        walk.step(&log_target, rng);
        states.push(walk.state().clone());
    }
    Ok(Chain { states, acceptance_rate: walk.acceptance_rate() })
}

/// Sampler settings for the non-conjugate posteriors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcConfig {
    /// Total iterations, burn-in included.
    pub steps: usize,
    /// Defaults to 20% of `steps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(default = "one")]
    pub thinning: usize,
    /// Initial proposal scale; defaults to `1/√(n·p)`.
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

impl McmcConfig {
    pub fn new(steps: usize) -> Self {
        McmcConfig { steps, burn_in: None, thinning: 1, step_scale: None, adapt: true }
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.steps / 5)
    }

    pub fn initial_step_scale(&self, n: usize, p: usize) -> f64 {
        self.step_scale.unwrap_or(1.0 / ((n * p) as f64).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::invalid("steps", "must be positive"));
        }
        if self.burn_in() >= self.steps {
            return Err(Error::invalid("burn_in", "must be smaller than steps"));
        }
        if self.thinning == 0 {
            return Err(Error::invalid("thinning", "must be positive"));
        }
        if let Some(s) = self.step_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid("step_scale", "must be positive and finite"));
            }
        }
        Ok(())
    }
}

/// Pushes the spectrum of a symmetric matrix strictly inside the support
/// `{‖Ω‖ < 2Λ, ‖Ω⁻¹‖ ≤ 2Λ}` of the constrained Gaussian prior.
pub fn project_into_support(omega: &SymMatrix, lambda_cap: f64) -> Result<SpdMatrix> {
    let hi = 2.0 * lambda_cap * (1.0 - 1e-6);
    let lo = 1.0 / (2.0 * lambda_cap) * (1.0 + 1e-6);
    if !(lo < hi) {
        return Err(Error::BadInit);
    }
    let eig = omega.eig()?;
    let projected = eig.map_values(|x| x.clamp(lo, hi));
    SpdMatrix::new(projected).map_err(|_| Error::BadInit)
}

/// Posterior of `Ω` under the constrained Gaussian prior, by adaptive
/// random-walk Metropolis started at the projected `(Σ̂ + I/n)⁻¹`.
pub fn gaussian_prior_posterior_draws(
    data: &Dataset,
    lambda_cap: f64,
    config: &McmcConfig,
    stream: RngStream,
) -> Result<PosteriorDraws> {
    if data.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteLikelihood);
    }
    let sigma_hat = sample_covariance(data, false);
    gaussian_prior_draws_from_moments(&sigma_hat, data.n(), lambda_cap, config, stream)
}

pub fn gaussian_prior_draws_from_moments(
    sigma_hat: &SymMatrix,
    n: usize,
    lambda_cap: f64,
    config: &McmcConfig,
    stream: RngStream,
) -> Result<PosteriorDraws> {
    config.validate()?;
    let prior = PriorSpec::constrained_gaussian(lambda_cap)?;
    let p = sigma_hat.dim();
    let regularized = sigma_hat.add_scaled(&SymMatrix::identity(p), 1.0 / n as f64)?;
    let init = project_into_support(SpdMatrix::new(regularized)?.inverse().as_sym(), lambda_cap)?;

    let log_target = |omega: &SymMatrix| -> f64 {
        let lp = model::log_prior(&prior, omega);
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        match SpdMatrix::new(omega.clone()) {
            Ok(spd) => lp + model::log_likelihood_unchecked(&spd, sigma_hat, n),
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let mut rng = stream.rng();
    let mut walk = RandomWalk::new(init.into_sym(), log_target, config.initial_step_scale(n, p))?;
    let burn_in = config.burn_in();
    for it in 0..burn_in {
        let a = walk.step(log_target, &mut rng);
        if config.adapt {
            walk.adapt(it, a);
        }
    }
    walk.reset_counts();
    let mut draws = Vec::with_capacity((config.steps - burn_in) / config.thinning + 1);
    for it in 0..(config.steps - burn_in) {
        walk.step(log_target, &mut rng);
        if (it + 1) % config.thinning == 0 {
            draws.push(SpdMatrix::new(walk.state().clone())?);
        }
    }
    Ok(PosteriorDraws {
        draws,
        meta: DrawMeta {
            method: DrawMethod::Mcmc,
            acceptance_rate: Some(walk.acceptance_rate()),
            burn_in,
            thinning: config.thinning,
            seed: stream.seed,
            stream_id: stream.stream_id,
            step_scale: Some(walk.step_scale()),
        },
    })
}
