//! Gaussian log-likelihood, prior log-densities, perturbed precision
//! matrices and the exact second-order expansion of the log-likelihood.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SpdMatrix, SymMatrix};

/// Whether a quantity is a function of the covariance `Σ` or the precision `Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "cov", alias = "covariance")]
    Covariance,
    #[serde(rename = "prec", alias = "precision")]
    Precision,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorSpec {
    /// `W_p(I, p + b − 1)` on `Ω`.
    Wishart { b: usize },
    /// Density `∝ exp(−‖Ω‖_F²/2)` on `{Ω = Ωᵀ, ‖Ω‖ < 2Λ, ‖Ω⁻¹‖ ≤ 2Λ}`.
    #[serde(alias = "gaussian")]
    ConstrainedGaussian { lambda_cap: f64 },
}

impl PriorSpec {
    pub fn wishart(b: usize) -> Result<Self> {
        let p = PriorSpec::Wishart { b };
        p.validate()?;
        Ok(p)
    }

    pub fn constrained_gaussian(lambda_cap: f64) -> Result<Self> {
        let p = PriorSpec::ConstrainedGaussian { lambda_cap };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PriorSpec::Wishart { b } if b < 1 => Err(Error::invalid("b", "must be at least 1")),
            PriorSpec::ConstrainedGaussian { lambda_cap } if !(lambda_cap > 0.0 && lambda_cap.is_finite()) => {
                Err(Error::invalid("lambda_cap", "must be finite and positive"))
            }
            _ => Ok(()),
        }
    }

    pub fn is_conjugate(&self) -> bool {
        matches!(self, PriorSpec::Wishart { .. })
    }
}

/// `l_n(Ω) = (n/2) log det Ω − (n/2) tr(Ω Σ̂)`, without the normalizing constant.
pub fn log_likelihood(omega: &SpdMatrix, sigma_hat: &SymMatrix, n: usize) -> Result<f64> {
    if omega.dim() != sigma_hat.dim() {
        return Err(Error::DimensionMismatch { expected: omega.dim(), found: sigma_hat.dim() });
    }
    Ok(log_likelihood_unchecked(omega, sigma_hat, n))
}

pub(crate) fn log_likelihood_unchecked(omega: &SpdMatrix, sigma_hat: &SymMatrix, n: usize) -> f64 {
    let tr = omega.trace_product(sigma_hat).expect("dimensions checked by caller");
    0.5 * n as f64 * (omega.log_det() - tr)
}

/// Unnormalized prior log-density; `−∞` outside the support.
pub fn log_prior(prior: &PriorSpec, omega: &SymMatrix) -> f64 {
    match *prior {
        PriorSpec::Wishart { b } => match SpdMatrix::new(omega.clone()) {
            Ok(spd) => 0.5 * (b as f64 - 2.0) * spd.log_det() - 0.5 * omega.trace(),
            Err(_) => f64::NEG_INFINITY,
        },
        PriorSpec::ConstrainedGaussian { lambda_cap } => {
            if in_gaussian_support(omega, lambda_cap) {
                -0.5 * omega.as_slice().iter().map(|x| x * x).sum::<f64>()
            } else {
                f64::NEG_INFINITY
            }
        }
    }
}

/// `Ω ≻ 0`, `‖Ω‖ < 2Λ` and `‖Ω⁻¹‖ ≤ 2Λ`.
pub fn in_gaussian_support(omega: &SymMatrix, lambda_cap: f64) -> bool {
    if crate::linalg::cholesky(omega).is_err() {
        return false;
    }
    let Ok(eig) = omega.eig() else { return false };
    let max = eig.values[0];
    let min = *eig.values.last().expect("dim >= 1");
    min > 0.0 && max < 2.0 * lambda_cap && 1.0 / min <= 2.0 * lambda_cap
}

/// Direction of the local perturbation used in the BvM argument.
///
/// `phi` is the user-facing linearization matrix (`Φ` for covariance
/// functionals, `Ψ` for precision ones). `shift` is the matching direction in
/// precision space: `Φ` itself, or `−Ω*ΨΩ*` for precision targets.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationDirection {
    pub phi: SymMatrix,
    pub target: Target,
    /// `‖Σ*^{1/2} Φ Σ*^{1/2}‖_F` or `‖Ω*^{1/2} Ψ Ω*^{1/2}‖_F`.
    pub normalizer: f64,
    pub rank_bound: usize,
    pub shift: SymMatrix,
}

pub const RANK_REL_TOL: f64 = 1e-10;

impl PerturbationDirection {
    pub fn covariance(phi: SymMatrix, sigma_star: &SpdMatrix) -> Result<Self> {
        let normalizer = whitened_frobenius(&phi, sigma_star)?;
        Self::build(phi.clone(), Target::Covariance, normalizer, phi)
    }

    pub fn precision(psi: SymMatrix, omega_star: &SpdMatrix) -> Result<Self> {
        let normalizer = whitened_frobenius(&psi, omega_star)?;
        let shift = omega_star.congruence(&psi)?.scaled(-1.0);
        Self::build(psi, Target::Precision, normalizer, shift)
    }

    fn build(phi: SymMatrix, target: Target, normalizer: f64, shift: SymMatrix) -> Result<Self> {
        if !(normalizer > 0.0) {
            return Err(Error::NonPositiveVariance(normalizer));
        }
        let rank_bound = phi.numerical_rank(RANK_REL_TOL)?;
        Ok(PerturbationDirection { phi, target, normalizer, rank_bound, shift })
    }

    /// Replaces the rank bound with a caller-supplied upper bound.
    pub fn with_rank_bound(mut self, r: usize) -> Result<Self> {
        if r < self.rank_bound {
            return Err(Error::invalid("rank_bound", format!("{r} is below the numerical rank {}", self.rank_bound)));
        }
        self.rank_bound = r;
        Ok(self)
    }

    /// Generic asymptotic variance `2 · normalizer²`.
    pub fn variance(&self) -> f64 {
        2.0 * self.normalizer * self.normalizer
    }
}

/// `‖A^{1/2} M A^{1/2}‖_F`, computed as `‖Lᵀ M L‖_F` with `A = L Lᵀ`.
pub fn whitened_frobenius(m: &SymMatrix, a: &SpdMatrix) -> Result<f64> {
    Ok(a.cholesky().inner_sandwich(m)?.frobenius_norm())
}

/// `Ω_t = Ω + √2 t · shift / (√n · normalizer)`.
pub fn perturbed_precision(omega: &SymMatrix, dir: &PerturbationDirection, t: f64, n: usize) -> Result<SymMatrix> {
    if omega.dim() != dir.shift.dim() {
        return Err(Error::DimensionMismatch { expected: omega.dim(), found: dir.shift.dim() });
    }
    if t == 0.0 {
        return Ok(omega.clone());
    }
    let c = SQRT_2 * t / ((n as f64).sqrt() * dir.normalizer);
    omega.add_scaled(&dir.shift, c)
}

/// `∫₀^h (h − s)² / (1 − s)³ ds = −log(1 − h) − h − h²/2` for `h < 1`.
pub fn taylor_remainder(h: f64) -> f64 {
    if h.abs() < 0.05 {
        // Σ_{k≥3} h^k / k; the closed form cancels catastrophically here.
        let mut term = h * h * h;
        let mut sum = 0.0;
        for k in 3..40 {
            sum += term / k as f64;
            term *= h;
            if term.abs() < 1e-30 {
                break;
            }
        }
        sum
    } else {
        -(-h).ln_1p() - h - 0.5 * h * h
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionCheck {
    /// `l_n(Ω_t) − l_n(Ω)` evaluated directly.
    pub lhs: f64,
    /// Linear term minus quadratic term minus remainder.
    pub rhs: f64,
    pub linear: f64,
    pub quadratic: f64,
    /// `(n/2) Σ_j R(h_j)`, the amount subtracted in `rhs`.
    pub remainder: f64,
    /// Eigenvalues of `Σ^{1/2}(Ω − Ω_t)Σ^{1/2}` with `Σ = Ω⁻¹`.
    pub h: Vec<f64>,
}

/// Evaluates both sides of the exact likelihood expansion around `Ω`.
pub fn likelihood_expansion_check(
    omega: &SpdMatrix,
    dir: &PerturbationDirection,
    t: f64,
    sigma_hat: &SymMatrix,
    n: usize,
) -> Result<ExpansionCheck> {
    let p = omega.dim();
    if sigma_hat.dim() != p {
        return Err(Error::DimensionMismatch { expected: p, found: sigma_hat.dim() });
    }
    let omega_t = perturbed_precision(omega, dir, t, n)?;
    let sigma = omega.inverse();
    let diff = omega.sub(&omega_t)?;
    let h = sigma.cholesky().inner_sandwich(&diff)?.eig()?.values;
    if let Some(&h_max) = h.first() {
        if h_max >= 1.0 {
            return Err(Error::PerturbationTooLarge { h: h_max });
        }
    }
    let omega_t = SpdMatrix::new(omega_t)?;
    let lhs = log_likelihood(&omega_t, sigma_hat, n)? - log_likelihood(omega, sigma_hat, n)?;

    let nf = n as f64;
    let resid = sigma.sub(sigma_hat)?;
    let linear = t * nf.sqrt() / (SQRT_2 * dir.normalizer) * resid.trace_product(&dir.shift)?;
    let ratio = (whitened_frobenius(&dir.shift, &sigma)? / dir.normalizer).powi(2);
    let quadratic = 0.5 * t * t * ratio;
    let remainder = 0.5 * nf * h.iter().map(|&x| taylor_remainder(x)).sum::<f64>();
    Ok(ExpansionCheck { lhs, rhs: linear - quadratic - remainder, linear, quadratic, remainder, h })
}
