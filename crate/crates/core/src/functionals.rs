//! Matrix functionals: evaluation, plug-in centering, linearization matrices
//! and closed-form asymptotic variances.
//!
//! Indices (`i`, `j`, `m`) are 1-based throughout, matching the JSON schema:
//!
//! ```json
//! {"kind": "entry", "i": 1, "j": 2, "target": "cov"}
//! {"kind": "quadratic", "v": [1.0, 1.0], "target": "prec"}
//! {"kind": "bilinear", "u": [1.0, 0.0], "v": [0.0, 1.0], "target": "cov"}
//! {"kind": "log_det"}
//! {"kind": "entropy"}
//! {"kind": "eigenvalue", "m": 1, "target": "cov"}
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sample_covariance, Dataset, SpdMatrix, SymMatrix};
use crate::model::{PerturbationDirection, Target};

/// Relative eigengap below which the eigenvalue functional is refused.
pub const EIGENGAP_REL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionalSpec {
    Entry { i: usize, j: usize, target: Target },
    Quadratic { v: Vec<f64>, target: Target },
    Bilinear { u: Vec<f64>, v: Vec<f64>, target: Target },
    LogDet,
    Entropy,
    Eigenvalue { m: usize, target: Target },
}

impl FunctionalSpec {
    pub fn target(&self) -> Target {
        match self {
            FunctionalSpec::Entry { target, .. }
            | FunctionalSpec::Quadratic { target, .. }
            | FunctionalSpec::Bilinear { target, .. }
            | FunctionalSpec::Eigenvalue { target, .. } => *target,
            FunctionalSpec::LogDet | FunctionalSpec::Entropy => Target::Covariance,
        }
    }

    /// Short human-readable name, e.g. `sigma_12` or `lambda_1(Omega)`.
    pub fn label(&self) -> String {
        let sym = |t: Target| if t == Target::Covariance { "Sigma" } else { "Omega" };
        match self {
            FunctionalSpec::Entry { i, j, target: Target::Covariance } => format!("sigma_{i}{j}"),
            FunctionalSpec::Entry { i, j, target: Target::Precision } => format!("omega_{i}{j}"),
            FunctionalSpec::Quadratic { target, .. } => format!("v'{}v", sym(*target)),
            FunctionalSpec::Bilinear { target, .. } => format!("u'{}v", sym(*target)),
            FunctionalSpec::LogDet => "log_det(Sigma)".into(),
            FunctionalSpec::Entropy => "entropy(Sigma)".into(),
            FunctionalSpec::Eigenvalue { m, target } => format!("lambda_{m}({})", sym(*target)),
        }
    }

    /// Checks indices and vectors against dimension `p`.
    pub fn validate(&self, p: usize) -> Result<()> {
        let index = |name: &str, k: usize| {
            if k == 0 || k > p {
                Err(Error::invalid(name, format!("index {k} outside [1, {p}]")))
            } else {
                Ok(())
            }
        };
        let vector = |name: &str, v: &[f64]| {
            if v.len() != p {
                Err(Error::invalid(name, format!("length {} but p = {p}", v.len())))
            } else if v.iter().any(|x| !x.is_finite()) {
                Err(Error::invalid(name, "non-finite entry"))
            } else if v.iter().all(|&x| x == 0.0) {
                Err(Error::invalid(name, "vector must be nonzero"))
            } else {
                Ok(())
            }
        };
        match self {
            FunctionalSpec::Entry { i, j, .. } => {
                index("i", *i)?;
                index("j", *j)
            }
            FunctionalSpec::Quadratic { v, .. } => vector("v", v),
            FunctionalSpec::Bilinear { u, v, .. } => {
                vector("u", u)?;
                vector("v", v)
            }
            FunctionalSpec::LogDet | FunctionalSpec::Entropy => Ok(()),
            FunctionalSpec::Eigenvalue { m, .. } => index("m", *m),
        }
    }
}

/// Covariance together with its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthSpec {
    pub sigma_star: SpdMatrix,
    pub omega_star: SpdMatrix,
}

impl TruthSpec {
    pub fn new(sigma_star: SpdMatrix) -> Self {
        let omega_star = sigma_star.inverse();
        TruthSpec { sigma_star, omega_star }
    }

    pub fn dim(&self) -> usize {
        self.sigma_star.dim()
    }

    pub fn matrix(&self, target: Target) -> &SpdMatrix {
        match target {
            Target::Covariance => &self.sigma_star,
            Target::Precision => &self.omega_star,
        }
    }
}

/// Value of a linear-type functional on the matrix it targets.
fn on_matrix(f: &FunctionalSpec, m: &SymMatrix) -> Result<f64> {
    f.validate(m.dim())?;
    match f {
        FunctionalSpec::Entry { i, j, .. } => Ok(m.get(i - 1, j - 1)),
        FunctionalSpec::Quadratic { v, .. } => m.quad_form(v),
        FunctionalSpec::Bilinear { u, v, .. } => m.bilinear(u, v),
        FunctionalSpec::Eigenvalue { m: k, .. } => Ok(m.eig()?.values[k - 1]),
        FunctionalSpec::LogDet | FunctionalSpec::Entropy => unreachable!("handled by callers"),
    }
}

fn entropy_from_log_det(p: usize, log_det_sigma: f64) -> f64 {
    let p = p as f64;
    0.5 * p + 0.5 * p * (2.0 * PI).ln() + 0.5 * log_det_sigma
}

/// Evaluates `f` at covariance `sigma`; precision targets use `sigma⁻¹`.
pub fn evaluate(f: &FunctionalSpec, sigma: &SpdMatrix) -> Result<f64> {
    match f {
        FunctionalSpec::LogDet => Ok(sigma.log_det()),
        FunctionalSpec::Entropy => Ok(entropy_from_log_det(sigma.dim(), sigma.log_det())),
        _ if f.target() == Target::Precision => on_matrix(f, &sigma.inverse()),
        _ => on_matrix(f, sigma),
    }
}

/// Evaluates `f` at the covariance `omega⁻¹`; the form posterior draws arrive in.
pub fn evaluate_at_precision(f: &FunctionalSpec, omega: &SpdMatrix) -> Result<f64> {
    match f {
        FunctionalSpec::LogDet => Ok(-omega.log_det()),
        FunctionalSpec::Entropy => Ok(entropy_from_log_det(omega.dim(), -omega.log_det())),
        _ if f.target() == Target::Precision => on_matrix(f, omega),
        _ => on_matrix(f, &omega.inverse()),
    }
}

/// Plug-in center `f(Σ̂)` with `Σ̂` the uncentered sample covariance
/// (`Σ̂⁻¹` for precision targets).
pub fn plug_in_center(f: &FunctionalSpec, data: &Dataset) -> Result<f64> {
    let sigma_hat = sample_covariance(data, false);
    plug_in_from_moments(f, &sigma_hat, data.n())
}

pub fn plug_in_from_moments(f: &FunctionalSpec, sigma_hat: &SymMatrix, n: usize) -> Result<f64> {
    let needs_inverse = !matches!(
        (f, f.target()),
        (FunctionalSpec::Entry { .. } | FunctionalSpec::Quadratic { .. } | FunctionalSpec::Bilinear { .. } | FunctionalSpec::Eigenvalue { .. }, Target::Covariance)
    );
    if !needs_inverse {
        return on_matrix(f, sigma_hat);
    }
    let p = sigma_hat.dim();
    let spd = SpdMatrix::new(sigma_hat.clone()).map_err(|_| Error::SingularSample { n, p })?;
    evaluate(f, &spd)
}

/// Eigengap of `λ_m` (1-based) on `Σ*` or `Ω*`; one-sided at the ends.
pub fn eigengap(truth: &TruthSpec, m: usize, target: Target) -> Result<f64> {
    let values = truth.matrix(target).eig()?.values;
    gap_at(&values, m)
}

pub(crate) fn gap_at(values: &[f64], m: usize) -> Result<f64> {
    let p = values.len();
    if m == 0 || m > p {
        return Err(Error::invalid("m", format!("index {m} outside [1, {p}]")));
    }
    let k = m - 1;
    let below = (k + 1 < p).then(|| (values[k] - values[k + 1]).abs());
    let above = (k > 0).then(|| (values[k - 1] - values[k]).abs());
    Ok(match (above, below) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => f64::INFINITY,
    })
}

fn basis(p: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; p];
    e[k - 1] = 1.0;
    e
}

/// Linearization matrix `Φ` (or `Ψ`) at the truth, with its normalizer.
pub fn linearization(f: &FunctionalSpec, truth: &TruthSpec) -> Result<PerturbationDirection> {
    let p = truth.dim();
    f.validate(p)?;
    let (phi, rank) = match f {
        FunctionalSpec::Entry { i, j, .. } => (SymMatrix::sym_outer(&basis(p, *i), &basis(p, *j))?, 2),
        FunctionalSpec::Quadratic { v, .. } => (SymMatrix::outer(v), 1),
        FunctionalSpec::Bilinear { u, v, .. } => (SymMatrix::sym_outer(u, v)?, 2),
        FunctionalSpec::LogDet => (truth.omega_star.as_sym().clone(), p),
        FunctionalSpec::Entropy => (truth.omega_star.scaled(0.5), p),
        FunctionalSpec::Eigenvalue { m, target } => {
            let matrix = truth.matrix(*target);
            let eig = matrix.eig()?;
            let gap = gap_at(&eig.values, *m)?;
            let threshold = EIGENGAP_REL_TOL * eig.values[0].abs();
            if !(gap > threshold) {
                return Err(Error::ZeroEigengap { m: *m, gap, threshold });
            }
            (SymMatrix::outer(&eig.vector(m - 1)), 1)
        }
    };
    let dir = match f.target() {
        Target::Covariance => PerturbationDirection::covariance(phi, &truth.sigma_star)?,
        Target::Precision => PerturbationDirection::precision(phi, &truth.omega_star)?,
    };
    dir.with_rank_bound(rank.max(1))
}

/// Closed-form asymptotic variance of `√n (f(Σ) − f(Σ̂))`.
pub fn asymptotic_variance(f: &FunctionalSpec, truth: &TruthSpec) -> Result<f64> {
    let dir = linearization(f, truth)?;
    let m = truth.matrix(f.target());
    let closed = match f {
        FunctionalSpec::Entry { i, j, .. } => {
            let (i, j) = (i - 1, j - 1);
            m.get(i, i) * m.get(j, j) + m.get(i, j).powi(2)
        }
        FunctionalSpec::Quadratic { v, .. } => 2.0 * m.quad_form(v)?.powi(2),
        FunctionalSpec::Bilinear { u, v, .. } => m.bilinear(u, v)?.powi(2) + m.quad_form(u)? * m.quad_form(v)?,
        FunctionalSpec::LogDet => 2.0 * truth.dim() as f64,
        FunctionalSpec::Entropy => 0.5 * truth.dim() as f64,
        FunctionalSpec::Eigenvalue { m: k, .. } => 2.0 * m.eig()?.values[k - 1].powi(2),
    };
    let generic = dir.variance();
    debug_assert!(
        (closed - generic).abs() <= 1e-10 * closed.abs().max(generic.abs()),
        "closed-form variance {closed} disagrees with 2‖·‖_F² = {generic}"
    );
    Ok(closed)
}

/// `v ↦ √n (v − center) / √variance`.
pub fn standardize(values: &[f64], center: f64, variance: f64, n: usize) -> Result<Vec<f64>> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::NonPositiveVariance(variance));
    }
    let scale = (n as f64).sqrt() / variance.sqrt();
    Ok(values.iter().map(|v| scale * (v - center)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cov(i: usize, j: usize) -> FunctionalSpec {
        FunctionalSpec::Entry { i, j, target: Target::Covariance }
    }

    #[test]
    fn evaluate_examples() {
        let s = SpdMatrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 1.0]]).unwrap();
        assert_eq!(evaluate(&cov(1, 2), &s).unwrap(), 0.3);
        let q = FunctionalSpec::Quadratic { v: vec![1.0, 1.0], target: Target::Covariance };
        assert_eq!(evaluate(&q, &SpdMatrix::identity(2)).unwrap(), 2.0);
        let e = FunctionalSpec::Eigenvalue { m: 2, target: Target::Covariance };
        assert_eq!(evaluate(&e, &SpdMatrix::from_diag(&[5.0, 2.0, 1.0]).unwrap()).unwrap(), 2.0);
    }

    #[test]
    fn evaluate_routes_agree() {
        let s = SpdMatrix::from_rows(&[vec![2.0, 0.3, 0.1], vec![0.3, 1.0, -0.2], vec![0.1, -0.2, 1.5]]).unwrap();
        let omega = s.inverse();
        let specs = [
            cov(1, 3),
            FunctionalSpec::Entry { i: 2, j: 2, target: Target::Precision },
            FunctionalSpec::LogDet,
            FunctionalSpec::Entropy,
            FunctionalSpec::Eigenvalue { m: 1, target: Target::Precision },
        ];
        for f in &specs {
            let a = evaluate(f, &s).unwrap();
            let b = evaluate_at_precision(f, &omega).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{f:?}");
        }
    }

    #[test]
    fn plug_in_examples() {
        let data = Dataset::from_rows(&[vec![2.0]]).unwrap();
        assert_eq!(plug_in_center(&cov(1, 1), &data).unwrap(), 4.0);
        let data = Dataset::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]]).unwrap();
        assert_eq!(plug_in_center(&FunctionalSpec::LogDet, &data).unwrap(), 0.0);
        let data = Dataset::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let prec = FunctionalSpec::Entry { i: 1, j: 1, target: Target::Precision };
        assert_eq!(plug_in_center(&prec, &data).unwrap_err(), Error::SingularSample { n: 1, p: 2 });
    }

    #[test]
    fn linearization_examples() {
        let truth = TruthSpec::new(SpdMatrix::identity(3));
        let dir = linearization(&cov(1, 2), &truth).unwrap();
        assert_eq!(dir.phi.get(0, 1), 0.5);
        assert_eq!(dir.phi.get(1, 0), 0.5);
        assert_eq!(dir.phi.max_abs(), 0.5);
        assert_eq!(dir.rank_bound, 2);

        let dir = linearization(&FunctionalSpec::LogDet, &truth).unwrap();
        assert_eq!(dir.phi, SymMatrix::identity(3));
        assert!((dir.normalizer - 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(dir.rank_bound, 3);

        let truth = TruthSpec::new(SpdMatrix::from_diag(&[3.0, 1.0]).unwrap());
        let e = FunctionalSpec::Eigenvalue { m: 1, target: Target::Covariance };
        let dir = linearization(&e, &truth).unwrap();
        assert_eq!(dir.phi, SymMatrix::from_diag(&[1.0, 0.0]));
        assert_eq!(dir.rank_bound, 1);
    }

    #[test]
    fn variance_examples() {
        assert_eq!(asymptotic_variance(&cov(1, 2), &TruthSpec::new(SpdMatrix::identity(3))).unwrap(), 1.0);
        let t7 = TruthSpec::new(SpdMatrix::from_diag(&[1.0, 2.0, 3.0, 0.5, 1.0, 4.0, 2.0]).unwrap());
        assert_eq!(asymptotic_variance(&FunctionalSpec::LogDet, &t7).unwrap(), 14.0);
        let q = FunctionalSpec::Quadratic { v: vec![1.0, 0.0], target: Target::Covariance };
        let t = TruthSpec::new(SpdMatrix::from_diag(&[3.0, 1.0]).unwrap());
        assert_eq!(asymptotic_variance(&q, &t).unwrap(), 18.0);
    }

    #[test]
    fn eigengap_examples() {
        let t = TruthSpec::new(SpdMatrix::from_diag(&[3.0, 2.0, 1.0]).unwrap());
        assert_eq!(eigengap(&t, 1, Target::Covariance).unwrap(), 1.0);
        assert_eq!(eigengap(&t, 2, Target::Covariance).unwrap(), 1.0);
        assert_eq!(eigengap(&t, 3, Target::Covariance).unwrap(), 1.0);
        let tie = TruthSpec::new(SpdMatrix::from_diag(&[5.0, 5.0, 1.0]).unwrap());
        assert_eq!(eigengap(&tie, 1, Target::Covariance).unwrap(), 0.0);
        let e = FunctionalSpec::Eigenvalue { m: 1, target: Target::Covariance };
        assert!(matches!(linearization(&e, &tie), Err(Error::ZeroEigengap { .. })));
    }

    #[test]
    fn standardize_examples() {
        assert_eq!(standardize(&[1.5], 1.5, 2.0, 10).unwrap(), vec![0.0]);
        let z = standardize(&[1.2], 1.0, 4.0, 100).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12);
        let a = standardize(&[0.3, -0.2], 0.1, 2.0, 50).unwrap();
        let b = standardize(&[10.3, 9.8], 10.1, 2.0, 50).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(standardize(&[1.0], 0.0, 0.0, 1).unwrap_err(), Error::NonPositiveVariance(0.0));
    }

    #[test]
    fn validation_errors() {
        let t = TruthSpec::new(SpdMatrix::identity(2));
        assert!(linearization(&cov(3, 1), &t).is_err());
        let zero = FunctionalSpec::Quadratic { v: vec![0.0, 0.0], target: Target::Covariance };
        assert!(asymptotic_variance(&zero, &t).is_err());
    }

    #[test]
    fn json_schema() {
        let f: FunctionalSpec = serde_json::from_str(r#"{"kind":"entry","i":1,"j":2,"target":"cov"}"#).unwrap();
        assert_eq!(f, cov(1, 2));
        let f: FunctionalSpec = serde_json::from_str(r#"{"kind":"log_det"}"#).unwrap();
        assert_eq!(f, FunctionalSpec::LogDet);
        let f: FunctionalSpec = serde_json::from_str(r#"{"kind":"eigenvalue","m":1,"target":"precision"}"#).unwrap();
        assert_eq!(f, FunctionalSpec::Eigenvalue { m: 1, target: Target::Precision });
        assert!(serde_json::from_str::<FunctionalSpec>(r#"{"kind":"entry","i":1,"j":2,"target":"cov","x":0}"#).is_err());
    }
}
