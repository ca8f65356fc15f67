//! Linear and quadratic discriminant functionals for two Gaussian classes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, sample_covariance, Dataset, SpdMatrix, SymMatrix};
use crate::model::{self, PriorSpec};
use crate::rng::RngStream;
use crate::samplers::{draw_mvn_mean, project_into_support, DrawMeta, DrawMethod, McmcConfig, RandomWalk};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DaMode {
    Lda,
    Qda,
}

/// Tolerance (relative to the largest entry) for treating `Σ_X*` and `Σ_Y*` as equal.
pub const COVARIANCE_MATCH_TOL: f64 = 1e-10;

/// True class parameters and the fixed new observation `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTruth", deny_unknown_fields)]
pub struct DaTruth {
    pub mu_x: Vec<f64>,
    pub mu_y: Vec<f64>,
    pub sigma_x: SpdMatrix,
    pub sigma_y: SpdMatrix,
    pub z: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTruth {
    mu_x: Vec<f64>,
    mu_y: Vec<f64>,
    sigma_x: SpdMatrix,
    sigma_y: SpdMatrix,
    z: Vec<f64>,
}

impl TryFrom<RawTruth> for DaTruth {
    type Error = Error;

    fn try_from(r: RawTruth) -> Result<Self> {
        DaTruth::new(r.mu_x, r.mu_y, r.sigma_x, r.sigma_y, r.z)
    }
}

impl DaTruth {
    pub fn new(mu_x: Vec<f64>, mu_y: Vec<f64>, sigma_x: SpdMatrix, sigma_y: SpdMatrix, z: Vec<f64>) -> Result<Self> {
        let p = sigma_x.dim();
        for (name, len) in [("mu_x", mu_x.len()), ("mu_y", mu_y.len()), ("sigma_y", sigma_y.dim()), ("z", z.len())] {
            if len != p {
                return Err(Error::DimensionMismatch { expected: p, found: len }.at(name));
            }
        }
        if mu_x.iter().chain(&mu_y).chain(&z).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("truth"));
        }
        Ok(DaTruth { mu_x, mu_y, sigma_x, sigma_y, z })
    }

    /// Shared covariance for both classes.
    pub fn lda(mu_x: Vec<f64>, mu_y: Vec<f64>, sigma: SpdMatrix, z: Vec<f64>) -> Result<Self> {
        Self::new(mu_x, mu_y, sigma.clone(), sigma, z)
    }

    pub fn dim(&self) -> usize {
        self.sigma_x.dim()
    }

    fn shared_sigma(&self) -> Result<&SpdMatrix> {
        let diff = self.sigma_x.sub(&self.sigma_y)?.max_abs();
        let scale = self.sigma_x.max_abs().max(self.sigma_y.max_abs()).max(1.0);
        if diff > COVARIANCE_MATCH_TOL * scale {
            return Err(Error::CovarianceMismatch);
        }
        Ok(&self.sigma_x)
    }

    /// `Δ(μ_X*, μ_Y*, Ω*)` in the requested mode.
    pub fn functional(&self, mode: DaMode) -> Result<f64> {
        match mode {
            DaMode::Lda => lda_discriminant(&self.mu_x, &self.mu_y, &self.shared_sigma()?.inverse(), &self.z),
            DaMode::Qda => qda_discriminant(&self.mu_x, &self.mu_y, &self.sigma_x.inverse(), &self.sigma_y.inverse(), &self.z),
        }
    }

    pub fn variance(&self, mode: DaMode) -> Result<f64> {
        match mode {
            DaMode::Lda => Ok(lda_variance(self)?.v2),
            DaMode::Qda => Ok(qda_variance(self)?.v2),
        }
    }
}

/// Training samples of equal size from both classes.
#[derive(Clone, Debug, PartialEq)]
pub struct DaDataset {
    x: Dataset,
    y: Dataset,
}

impl DaDataset {
    pub fn new(x: Dataset, y: Dataset) -> Result<Self> {
        if x.p() != y.p() {
            return Err(Error::DimensionMismatch { expected: x.p(), found: y.p() }.at("y"));
        }
        if x.n() != y.n() {
            return Err(Error::DimensionMismatch { expected: x.n(), found: y.n() }.at("y.n"));
        }
        Ok(DaDataset { x, y })
    }

    pub fn x(&self) -> &Dataset {
        &self.x
    }

    pub fn y(&self) -> &Dataset {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn p(&self) -> usize {
        self.x.p()
    }

    /// Draws `n` samples per class from the truth.
    pub fn simulate<R: Rng + ?Sized>(truth: &DaTruth, n: usize, rng: &mut R) -> Result<Self> {
        let x = draw_mvn_mean(&truth.mu_x, &truth.sigma_x, n, rng)?;
        let y = draw_mvn_mean(&truth.mu_y, &truth.sigma_y, n, rng)?;
        Self::new(x, y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DaDraw {
    pub mu_x: Vec<f64>,
    pub mu_y: Vec<f64>,
    pub omega_x: SpdMatrix,
    pub omega_y: SpdMatrix,
}

impl DaDraw {
    pub fn discriminant(&self, mode: DaMode, z: &[f64]) -> Result<f64> {
        match mode {
            DaMode::Lda => lda_discriminant(&self.mu_x, &self.mu_y, &self.omega_x, z),
            DaMode::Qda => qda_discriminant(&self.mu_x, &self.mu_y, &self.omega_x, &self.omega_y, z),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DaDraws {
    pub draws: Vec<DaDraw>,
    pub meta: DrawMeta,
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn check_dims(p: usize, vecs: &[&[f64]]) -> Result<()> {
    for v in vecs {
        if v.len() != p {
            return Err(Error::DimensionMismatch { expected: p, found: v.len() });
        }
    }
    Ok(())
}

/// `−(z−μ_X)ᵀΩ_X(z−μ_X) + (z−μ_Y)ᵀΩ_Y(z−μ_Y) + log(det Ω_X / det Ω_Y)`.
pub fn qda_discriminant(mu_x: &[f64], mu_y: &[f64], omega_x: &SpdMatrix, omega_y: &SpdMatrix, z: &[f64]) -> Result<f64> {
    let p = omega_x.dim();
    if omega_y.dim() != p {
        return Err(Error::DimensionMismatch { expected: p, found: omega_y.dim() });
    }
    check_dims(p, &[mu_x, mu_y, z])?;
    let qx = omega_x.quad_form(&diff(z, mu_x))?;
    let qy = omega_y.quad_form(&diff(z, mu_y))?;
    Ok(-qx + qy + omega_x.log_det() - omega_y.log_det())
}

/// `−(z−μ_X)ᵀΩ(z−μ_X) + (z−μ_Y)ᵀΩ(z−μ_Y)`.
pub fn lda_discriminant(mu_x: &[f64], mu_y: &[f64], omega: &SymMatrix, z: &[f64]) -> Result<f64> {
    check_dims(omega.dim(), &[mu_x, mu_y, z])?;
    Ok(-omega.quad_form(&diff(z, mu_x))? + omega.quad_form(&diff(z, mu_y))?)
}

fn invert_sample(s: SymMatrix, n: usize) -> Result<SpdMatrix> {
    let p = s.dim();
    SpdMatrix::new(s).map(|m| m.inverse()).map_err(|_| Error::SingularSample { n, p })
}

/// Plug-in center: sample means with inverse centered sample covariances
/// (pooled `½(Σ̂_X + Σ̂_Y)` for LDA).
pub fn da_center(data: &DaDataset, mode: DaMode, z: &[f64]) -> Result<f64> {
    let (x, y) = (data.x(), data.y());
    let (mx, my) = (x.mean(), y.mean());
    let sx = sample_covariance(x, true);
    let sy = sample_covariance(y, true);
    let n = data.n();
    match mode {
        DaMode::Lda => {
            let pooled = sx.add(&sy)?.scaled(0.5);
            lda_discriminant(&mx, &my, invert_sample(pooled, n)?.as_sym(), z)
        }
        DaMode::Qda => qda_discriminant(&mx, &my, &invert_sample(sx, n)?, &invert_sample(sy, n)?, z),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LdaVariance {
    pub v2: f64,
    pub phi: SymMatrix,
    pub xi_x: Vec<f64>,
    pub xi_y: Vec<f64>,
}

/// `V² = 4‖Σ*^{1/2}ΦΣ*^{1/2}‖_F² + ξ_XᵀΩ*ξ_X + ξ_YᵀΩ*ξ_Y` with
/// `Φ = ½Ω*(d_X d_Xᵀ − d_Y d_Yᵀ)Ω*`, `d = z − μ*`, `ξ_X = 2(z−μ_X*)`, `ξ_Y = 2(μ_Y*−z)`.
pub fn lda_variance(truth: &DaTruth) -> Result<LdaVariance> {
    let sigma = truth.shared_sigma()?;
    let omega = sigma.inverse();
    let dx = diff(&truth.z, &truth.mu_x);
    let dy = diff(&truth.z, &truth.mu_y);
    let inner = SymMatrix::outer(&dx).sub(&SymMatrix::outer(&dy))?.scaled(0.5);
    let phi = omega.congruence(&inner)?;
    let xi_x: Vec<f64> = dx.iter().map(|d| 2.0 * d).collect();
    let xi_y: Vec<f64> = dy.iter().map(|d| -2.0 * d).collect();
    let trace_term = model::whitened_frobenius(&phi, sigma)?.powi(2);
    let v2 = 4.0 * trace_term + omega.quad_form(&xi_x)? + omega.quad_form(&xi_y)?;
    Ok(LdaVariance { v2, phi, xi_x, xi_y })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QdaVariance {
    pub v2: f64,
    pub phi_x: SymMatrix,
    pub phi_y: SymMatrix,
    pub xi_x: Vec<f64>,
    pub xi_y: Vec<f64>,
}

/// `V² = 2‖Σ_X^{1/2}Φ_XΣ_X^{1/2}‖_F² + 2‖Σ_Y^{1/2}Φ_YΣ_Y^{1/2}‖_F² + ξ_XᵀΩ_X*ξ_X + ξ_YᵀΩ_Y*ξ_Y`
/// with `Φ_X = −Ω_X*(Σ_X* − d_X d_Xᵀ)Ω_X*` and `Φ_Y = Ω_Y*(Σ_Y* − d_Y d_Yᵀ)Ω_Y*`.
pub fn qda_variance(truth: &DaTruth) -> Result<QdaVariance> {
    let omega_x = truth.sigma_x.inverse();
    let omega_y = truth.sigma_y.inverse();
    let dx = diff(&truth.z, &truth.mu_x);
    let dy = diff(&truth.z, &truth.mu_y);
    let phi_x = omega_x.congruence(&truth.sigma_x.sub(&SymMatrix::outer(&dx))?)?.scaled(-1.0);
    let phi_y = omega_y.congruence(&truth.sigma_y.sub(&SymMatrix::outer(&dy))?)?;
    let xi_x: Vec<f64> = dx.iter().map(|d| 2.0 * d).collect();
    let xi_y: Vec<f64> = dy.iter().map(|d| -2.0 * d).collect();
    let v2 = 2.0 * model::whitened_frobenius(&phi_x, &truth.sigma_x)?.powi(2)
        + 2.0 * model::whitened_frobenius(&phi_y, &truth.sigma_y)?.powi(2)
        + omega_x.quad_form(&xi_x)?
        + omega_y.quad_form(&xi_y)?;
    Ok(QdaVariance { v2, phi_x, phi_y, xi_x, xi_y })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeparationCheck {
    pub v2: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `V² ≥ 2 λ_min(Ω*) ‖μ_X* − μ_Y*‖²`.
pub fn separation_bound_check(truth: &DaTruth) -> Result<SeparationCheck> {
    let v = lda_variance(truth)?;
    let sep = diff(&truth.mu_x, &truth.mu_y);
    let lambda_min = truth.shared_sigma()?.inverse().min_eigenvalue()?;
    let bound = 2.0 * lambda_min * dot(&sep, &sep);
    Ok(SeparationCheck { v2: v.v2, bound, holds: v.v2 >= bound - 1e-10 })
}

/// `(n/2) log det Ω − (n/2) tr(Ω Σ̃)` with `Σ̃ = (1/n) Σ (x_i − μ)(x_i − μ)ᵀ`.
pub fn da_log_likelihood(mu: &[f64], omega: &SpdMatrix, data: &Dataset) -> Result<f64> {
    if data.p() != omega.dim() {
        return Err(Error::DimensionMismatch { expected: omega.dim(), found: data.p() });
    }
    let scatter = data.scatter_about(mu)?;
    model::log_likelihood(omega, &scatter, data.n())
}

/// Per-class sufficient statistics: `n`, `X̄` and the centered `Σ̂_c`.
struct ClassStats {
    n: usize,
    mean: Vec<f64>,
    centered: SymMatrix,
}

impl ClassStats {
    fn new(data: &Dataset) -> Self {
        ClassStats { n: data.n(), mean: data.mean(), centered: sample_covariance(data, true) }
    }

    /// `Σ̃(μ) = Σ̂_c + (X̄ − μ)(X̄ − μ)ᵀ`.
    fn scatter(&self, mu: &[f64]) -> SymMatrix {
        self.centered.add(&SymMatrix::outer(&diff(&self.mean, mu))).expect("same dimension")
    }

    /// Exact draw from `μ | Ω ~ N((I + nΩ)⁻¹ nΩ X̄, (I + nΩ)⁻¹)` under the `N(0, I)` prior.
    fn draw_mean<R: Rng + ?Sized>(&self, omega: &SymMatrix, rng: &mut R) -> Result<Vec<f64>> {
        let p = omega.dim();
        let n = self.n as f64;
        let precision = SpdMatrix::new(SymMatrix::identity(p).add_scaled(omega, n)?)?;
        let rhs: Vec<f64> = omega.matvec(&self.mean)?.iter().map(|x| n * x).collect();
        let mean = precision.cholesky().solve(&rhs);
        let cov = precision.inverse();
        Ok(draw_mvn_mean(&mean, &cov, 1, rng)?.row(0).to_vec())
    }
}

struct GibbsRun {
    means: Vec<Vec<Vec<f64>>>,
    omegas: Vec<SpdMatrix>,
    acceptance_rate: f64,
    step_scale: f64,
}

/// Metropolis-within-Gibbs over `(μ_1, …, μ_k, Ω)` with one precision shared by
/// all listed classes.
fn gibbs_shared_precision(
    classes: &[ClassStats],
    lambda_cap: f64,
    config: &McmcConfig,
    stream: RngStream,
) -> Result<GibbsRun> {
    let prior = PriorSpec::constrained_gaussian(lambda_cap)?;
    let p = classes[0].centered.dim();
    let total_n: usize = classes.iter().map(|c| c.n).sum();
    let mut pooled = SymMatrix::zeros(p);
    for c in classes {
        pooled = pooled.add_scaled(&c.centered, c.n as f64 / total_n as f64)?;
    }
    let regularized = pooled.add_scaled(&SymMatrix::identity(p), 1.0 / total_n as f64)?;
    let init = SpdMatrix::new(regularized)
        .map_err(|_| Error::SingularSample { n: total_n, p })
        .and_then(|s| project_into_support(s.inverse().as_sym(), lambda_cap))?;

    let mut rng = stream.rng();
    let mut mus: Vec<Vec<f64>> = classes.iter().map(|c| c.mean.clone()).collect();
    // Σ_c n_c Σ̃_c(μ_c) / N: the likelihood of the shared Ω is l(Ω; that, N).
    let scatter_of = |mus: &[Vec<f64>]| -> SymMatrix {
        let mut s = SymMatrix::zeros(p);
        for (c, mu) in classes.iter().zip(mus) {
            s = s.add_scaled(&c.scatter(mu), c.n as f64 / total_n as f64).expect("same dimension");
        }
        s
    };
    let target = |scatter: &SymMatrix| {
        let scatter = scatter.clone();
        move |omega: &SymMatrix| -> f64 {
            let lp = model::log_prior(&prior, omega);
            if lp == f64::NEG_INFINITY {
                return lp;
            }
            match SpdMatrix::new(omega.clone()) {
                Ok(spd) => lp + model::log_likelihood_unchecked(&spd, &scatter, total_n),
                Err(_) => f64::NEG_INFINITY,
            }
        }
    };

    let mut walk = RandomWalk::new(init.into_sym(), target(&scatter_of(&mus)), config.initial_step_scale(total_n, p))?;
    let burn_in = config.burn_in();
    let mut means = Vec::new();
    let mut omegas = Vec::new();
    for it in 0..config.steps {
        if it == burn_in {
            walk.reset_counts();
        }
        for (c, mu) in classes.iter().zip(mus.iter_mut()) {
            *mu = c.draw_mean(walk.state(), &mut rng)?;
        }
        let log_target = target(&scatter_of(&mus));
        walk.refresh(&log_target);
        let a = walk.step(&log_target, &mut rng);
        if it < burn_in {
            if config.adapt {
                walk.adapt(it, a);
            }
        } else if (it - burn_in + 1) % config.thinning == 0 {
            means.push(mus.clone());
            omegas.push(SpdMatrix::new(walk.state().clone())?);
        }
    }
    Ok(GibbsRun { means, omegas, acceptance_rate: walk.acceptance_rate(), step_scale: walk.step_scale() })
}

/// Posterior draws of `(μ_X, μ_Y, Ω_X, Ω_Y)` under `N(0, I)` mean priors and the
/// constrained Gaussian precision prior. QDA runs the two classes as
/// independent chains on `stream.child(0)` and `stream.child(1)`.
pub fn da_posterior_draws(
    data: &DaDataset,
    lambda_cap: f64,
    mode: DaMode,
    config: &McmcConfig,
    stream: RngStream,
) -> Result<DaDraws> {
    config.validate()?;
    let x = ClassStats::new(data.x());
    let y = ClassStats::new(data.y());
    let (draws, acceptance_rate, step_scale) = match mode {
        DaMode::Lda => {
            let run = gibbs_shared_precision(&[x, y], lambda_cap, config, stream)?;
            let draws = run
                .means
                .into_iter()
                .zip(run.omegas)
                .map(|(mut mu, omega)| {
                    let mu_y = mu.pop().expect("two classes");
                    let mu_x = mu.pop().expect("two classes");
                    DaDraw { mu_x, mu_y, omega_x: omega.clone(), omega_y: omega }
                })
                .collect();
            (draws, run.acceptance_rate, run.step_scale)
        }
        DaMode::Qda => {
            let (rx, ry) = rayon::join(
                || gibbs_shared_precision(std::slice::from_ref(&x), lambda_cap, config, stream.child(0)),
                || gibbs_shared_precision(std::slice::from_ref(&y), lambda_cap, config, stream.child(1)),
            );
            let (rx, ry) = (rx?, ry?);
            let draws = rx
                .means
                .into_iter()
                .zip(rx.omegas)
                .zip(ry.means.into_iter().zip(ry.omegas))
                .map(|((mut mx, ox), (mut my, oy))| DaDraw {
                    mu_x: mx.pop().expect("one class"),
                    mu_y: my.pop().expect("one class"),
                    omega_x: ox,
                    omega_y: oy,
                })
                .collect();
            (draws, 0.5 * (rx.acceptance_rate + ry.acceptance_rate), 0.5 * (rx.step_scale + ry.step_scale))
        }
    };
    Ok(DaDraws {
        draws,
        meta: DrawMeta {
            method: DrawMethod::Mcmc,
            acceptance_rate: Some(acceptance_rate),
            burn_in: config.burn_in(),
            thinning: config.thinning,
            seed: stream.seed,
            stream_id: stream.stream_id,
            step_scale: Some(step_scale),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(d: &[f64]) -> SpdMatrix {
        SpdMatrix::from_diag(d).unwrap()
    }

    #[test]
    fn qda_examples() {
        let i2 = SpdMatrix::identity(2);
        assert_eq!(qda_discriminant(&[1.0, 2.0], &[1.0, 2.0], &i2, &i2, &[0.3, -1.0]).unwrap(), 0.0);
        let v = qda_discriminant(&[1.0, 0.0], &[0.0, 2.0], &i2, &i2, &[1.0, 0.0]).unwrap();
        assert!((v - 5.0).abs() < 1e-14);
        let v = qda_discriminant(&[0.0], &[2.0], &spd(&[1.0]), &spd(&[2.0]), &[1.0]).unwrap();
        assert!((v - (1.0 - 2f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn lda_examples() {
        let i2 = SpdMatrix::identity(2);
        assert_eq!(lda_discriminant(&[1.0, 1.0], &[1.0, 1.0], &i2, &[3.0, 0.0]).unwrap(), 0.0);
        assert_eq!(lda_discriminant(&[0.0, 0.0], &[2.0, 4.0], &i2, &[1.0, 2.0]).unwrap(), 0.0);
        let omega = SpdMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let (mx, my, z) = ([0.2, -1.0], [1.0, 0.4], [0.0, 0.7]);
        let a = lda_discriminant(&mx, &my, &omega, &z).unwrap();
        let b = qda_discriminant(&mx, &my, &omega, &omega, &z).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn lda_variance_examples() {
        let t = DaTruth::lda(vec![1.0, 1.0], vec![1.0, 1.0], SpdMatrix::identity(2), vec![1.0, 1.0]).unwrap();
        assert_eq!(lda_variance(&t).unwrap().v2, 0.0);
        let t = DaTruth::lda(vec![0.0, 0.0], vec![2.0, 0.0], SpdMatrix::identity(2), vec![1.0, 0.0]).unwrap();
        let v = lda_variance(&t).unwrap();
        assert!(v.phi.max_abs() < 1e-15);
        assert_eq!(v.xi_x, vec![2.0, 0.0]);
        assert_eq!(v.xi_y, vec![2.0, 0.0]);
        assert!((v.v2 - 8.0).abs() < 1e-14);
    }

    #[test]
    fn lda_requires_shared_covariance() {
        let t = DaTruth::new(vec![0.0], vec![1.0], spd(&[1.0]), spd(&[2.0]), vec![0.0]).unwrap();
        assert_eq!(lda_variance(&t).unwrap_err(), Error::CovarianceMismatch);
    }

    #[test]
    fn qda_variance_at_coincident_means() {
        for p in 1..5 {
            let t = DaTruth::new(vec![0.5; p], vec![0.5; p], SpdMatrix::identity(p), SpdMatrix::identity(p), vec![0.5; p]).unwrap();
            let v = qda_variance(&t).unwrap();
            assert!((v.v2 - 4.0 * p as f64).abs() < 1e-12);
            assert!((v.phi_x.sub(&SymMatrix::identity(p).scaled(-1.0)).unwrap().max_abs()) < 1e-15);
        }
    }

    #[test]
    fn separation_examples() {
        let t = DaTruth::lda(vec![0.0, 0.0], vec![2.0, 0.0], SpdMatrix::identity(2), vec![0.3, -0.7]).unwrap();
        let c = separation_bound_check(&t).unwrap();
        assert!((c.bound - 8.0).abs() < 1e-12);
        assert!(c.holds && c.v2 >= 8.0);
        let t = DaTruth::lda(vec![1.0, 0.0], vec![1.0, 0.0], SpdMatrix::identity(2), vec![0.0, 3.0]).unwrap();
        assert_eq!(separation_bound_check(&t).unwrap().bound, 0.0);
    }

    #[test]
    fn center_examples() {
        let x = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let same = DaDataset::new(x.clone(), x.clone()).unwrap();
        assert_eq!(da_center(&same, DaMode::Lda, &[0.5]).unwrap(), 0.0);
        assert_eq!(da_center(&same, DaMode::Qda, &[0.5]).unwrap(), 0.0);

        // X̄ = 4/3, s_X = 14/9; Y = {1, 2, 6}: Ȳ = 3, s_Y = 14/3.
        let y = Dataset::from_rows(&[vec![1.0], vec![2.0], vec![6.0]]).unwrap();
        let d = DaDataset::new(x, y).unwrap();
        let (sx, sy) = (14.0 / 9.0, 14.0 / 3.0);
        let z = 2.0;
        let lda = (-(z - 4.0 / 3.0f64).powi(2) + (z - 3.0f64).powi(2)) / (0.5 * (sx + sy));
        assert!((da_center(&d, DaMode::Lda, &[z]).unwrap() - lda).abs() < 1e-12);
        let qda = -(z - 4.0 / 3.0f64).powi(2) / sx + (z - 3.0f64).powi(2) / sy + (sy / sx).ln();
        assert!((da_center(&d, DaMode::Qda, &[z]).unwrap() - qda).abs() < 1e-12);
    }

    #[test]
    fn unequal_sizes_rejected() {
        let x = Dataset::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let y = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let err = DaDataset::new(x, y).unwrap_err();
        assert_eq!(err.field(), Some("y.n"));
    }

    #[test]
    fn log_likelihood_examples() {
        let data = Dataset::from_rows(&[vec![1.0, 0.5], vec![-0.3, 2.0], vec![0.7, -1.1]]).unwrap();
        let omega = SpdMatrix::from_rows(&[vec![1.5, 0.2], vec![0.2, 0.8]]).unwrap();
        let a = da_log_likelihood(&[0.0, 0.0], &omega, &data).unwrap();
        let b = model::log_likelihood(&omega, &sample_covariance(&data, false), 3).unwrap();
        assert!((a - b).abs() < 1e-12);
        let mu = [0.2, 0.1];
        let direct = da_log_likelihood(&mu, &SpdMatrix::identity(2), &data).unwrap();
        let tr = data.scatter_about(&mu).unwrap().trace();
        assert!((direct + 1.5 * tr).abs() < 1e-12);
    }

    #[test]
    fn truth_json_schema() {
        let json = r#"{"mu_x":[0.0],"mu_y":[1.0],"sigma_x":{"dim":1,"entries":[[1.0]]},
            "sigma_y":{"dim":1,"entries":[[2.0]]},"z":[0.5]}"#;
        let t: DaTruth = serde_json::from_str(json).unwrap();
        assert_eq!(t.dim(), 1);
        let bad = json.replace("\"z\":[0.5]", "\"z\":[0.5, 1.0]");
        assert!(serde_json::from_str::<DaTruth>(&bad).is_err());
    }
}
