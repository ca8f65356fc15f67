//! Dense symmetric linear algebra.
//!
//! Matrices are small (p up to a few hundred) and stored row-major in a full
//! `p × p` buffer. [`SymMatrix`] symmetrizes its input on construction, and
//! [`SpdMatrix`] additionally carries its Cholesky factor, so holding one is
//! proof that the factorization succeeded.

use std::fmt;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative symmetry tolerance accepted without complaint on construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-13;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

/// JSON wire form: `{"dim": p, "entries": [[...], ...]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJson {
    dim: usize,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<MatrixJson> for SymMatrix {
    type Error = Error;

    fn try_from(value: MatrixJson) -> Result<Self> {
        let m = SymMatrix::from_rows(&value.entries)?;
        if m.dim != value.dim {
            return Err(Error::DimensionMismatch { expected: value.dim, found: m.dim });
        }
        Ok(m)
    }
}

impl From<SymMatrix> for MatrixJson {
    fn from(m: SymMatrix) -> Self {
        MatrixJson { dim: m.dim, entries: m.to_rows() }
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymMatrix").field("dim", &self.dim).field("rows", &self.to_rows()).finish()
    }
}

impl SymMatrix {
    /// Builds a symmetric matrix from a row-major buffer, replacing it by `(A + Aᵀ)/2`.
    pub fn new(dim: usize, mut data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "matrix dimension must be positive"));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (data[i * dim + j] + data[j * dim + i]);
                data[i * dim + j] = avg;
                data[j * dim + i] = avg;
            }
        }
        Ok(SymMatrix { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![1.0; dim])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * dim + i] = *d;
        }
        m
    }

    /// `v vᵀ`.
    pub fn outer(v: &[f64]) -> Self {
        let dim = v.len();
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = v[i] * v[j];
            }
        }
        SymMatrix { dim, data }
    }

    /// `(u vᵀ + v uᵀ) / 2`.
    pub fn sym_outer(u: &[f64], v: &[f64]) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: u.len(), found: v.len() });
        }
        let dim = u.len();
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = 0.5 * (u[i] * v[j] + v[i] * u[j]);
            }
        }
        Ok(SymMatrix { dim, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    fn check_dim(&self, other: &SymMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> SymMatrix {
        SymMatrix { dim: self.dim, data: self.data.iter().map(|x| c * x).collect() }
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, other: &SymMatrix, c: f64) -> Result<SymMatrix> {
        self.check_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect();
        Ok(SymMatrix { dim: self.dim, data })
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.add_scaled(other, 1.0)
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.add_scaled(other, -1.0)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `tr(A B)`, which for symmetric arguments is the Frobenius inner product.
    pub fn trace_product(&self, other: &SymMatrix) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        Ok((0..self.dim).map(|i| dot(self.row(i), v)).collect())
    }

    /// `uᵀ A v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: u.len() });
        }
        Ok(dot(u, &self.matvec(v)?))
    }

    pub fn quad_form(&self, v: &[f64]) -> Result<f64> {
        self.bilinear(v, v)
    }

    /// `A B A` (symmetric whenever both factors are).
    pub fn congruence(&self, inner: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(inner)?;
        let p = self.dim;
        let ab = matmul(&self.data, &inner.data, p);
        SymMatrix::new(p, matmul(&ab, &self.data, p))
    }

    /// `Uᵀ A U` for a square row-major `U`.
    pub fn rotate(&self, u: &[f64]) -> Result<SymMatrix> {
        let p = self.dim;
        if u.len() != p * p {
            return Err(Error::DimensionMismatch { expected: p * p, found: u.len() });
        }
        let au = matmul(&self.data, u, p);
        SymMatrix::new(p, matmul(&transpose(u, p), &au, p))
    }

    /// `A B` as a plain row-major buffer (not symmetric in general).
    pub fn product(&self, other: &SymMatrix) -> Result<Vec<f64>> {
        self.check_dim(other)?;
        Ok(matmul(&self.data, &other.data, self.dim))
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        eig_sym(self)
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.eig()?.values.iter().fold(0.0, |acc: f64, x| acc.max(x.abs())))
    }

    /// Numerical rank: eigenvalues below `rel_tol · ‖A‖` count as zero.
    pub fn numerical_rank(&self, rel_tol: f64) -> Result<usize> {
        let values = self.eig()?.values;
        let norm = values.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()));
        if norm == 0.0 {
            return Ok(0);
        }
        Ok(values.iter().filter(|x| x.abs() > rel_tol * norm).count())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim {
            let row: Vec<String> = self.row(i).iter().map(|x| format!("{x:?}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        SymMatrix::from_rows(&parse_csv_rows(text)?)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_csv_string())?)
    }
}

/// Symmetric positive-definite matrix together with its Cholesky factor.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymMatrix", into = "SymMatrix")]
pub struct SpdMatrix {
    base: SymMatrix,
    factor: Cholesky,
}

impl fmt::Debug for SpdMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SpdMatrix").field(&self.base).finish()
    }
}

impl TryFrom<SymMatrix> for SpdMatrix {
    type Error = Error;

    fn try_from(m: SymMatrix) -> Result<Self> {
        SpdMatrix::new(m)
    }
}

impl From<SpdMatrix> for SymMatrix {
    fn from(m: SpdMatrix) -> Self {
        m.base
    }
}

impl Deref for SpdMatrix {
    type Target = SymMatrix;

    fn deref(&self) -> &SymMatrix {
        &self.base
    }
}

impl SpdMatrix {
    pub fn new(base: SymMatrix) -> Result<Self> {
        let factor = cholesky(&base)?;
        Ok(SpdMatrix { base, factor })
    }

    pub fn identity(dim: usize) -> Self {
        SpdMatrix::new(SymMatrix::identity(dim)).expect("identity is positive definite")
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        SpdMatrix::new(SymMatrix::from_diag(diag))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        SpdMatrix::new(SymMatrix::from_rows(rows)?)
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.base
    }

    pub fn into_sym(self) -> SymMatrix {
        self.base
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.factor
    }

    pub fn log_det(&self) -> f64 {
        self.factor.log_det()
    }

    pub fn inverse(&self) -> SpdMatrix {
        let inv = self.factor.inverse();
        // The inverse of an SPD matrix is SPD; round-off can only bite for
        // condition numbers near 1e16, where the caller has bigger problems.
        SpdMatrix::new(inv).expect("inverse of an SPD matrix is SPD")
    }

    /// Symmetric square root `U diag(√λ) Uᵀ`.
    pub fn sqrt(&self) -> Result<SymMatrix> {
        let eig = self.base.eig()?;
        Ok(eig.map_values(|x| x.max(0.0).sqrt()))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*self.base.eig()?.values.last().expect("dim >= 1"))
    }
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.lower
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.get(i, i).ln()).sum::<f64>()
    }

    /// `L z`.
    pub fn mul_vec(&self, z: &[f64]) -> Vec<f64> {
        let p = self.dim;
        (0..p).map(|i| (0..=i).map(|j| self.lower[i * p + j] * z[j]).sum()).collect()
    }

    /// `L S Lᵀ` for symmetric `S`.
    pub fn sandwich(&self, s: &SymMatrix) -> Result<SymMatrix> {
        let p = self.dim;
        if s.dim() != p {
            return Err(Error::DimensionMismatch { expected: p, found: s.dim() });
        }
        let ls = matmul(&self.lower, s.as_slice(), p);
        SymMatrix::new(p, matmul(&ls, &transpose(&self.lower, p), p))
    }

    /// `Lᵀ S L` for symmetric `S`; shares its spectrum with `A^{1/2} S A^{1/2}`.
    pub fn inner_sandwich(&self, s: &SymMatrix) -> Result<SymMatrix> {
        let p = self.dim;
        if s.dim() != p {
            return Err(Error::DimensionMismatch { expected: p, found: s.dim() });
        }
        let sl = matmul(s.as_slice(), &self.lower, p);
        SymMatrix::new(p, matmul(&transpose(&self.lower, p), &sl, p))
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let p = self.dim;
        let mut y = b.to_vec();
        for i in 0..p {
            let s = y[i] - dot(&self.lower[i * p..i * p + i], &y[..i]);
            y[i] = s / self.lower[i * p + i];
        }
        for i in (0..p).rev() {
            let s = y[i] - (i + 1..p).map(|k| self.lower[k * p + i] * y[k]).sum::<f64>();
            y[i] = s / self.lower[i * p + i];
        }
        y
    }

    pub fn inverse(&self) -> SymMatrix {
        let p = self.dim;
        let mut data = vec![0.0; p * p];
        let mut e = vec![0.0; p];
        for j in 0..p {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..p {
                data[i * p + j] = col[i];
            }
        }
        SymMatrix::new(p, data).expect("finite inverse")
    }
}

/// Cholesky factorization; fails with `NotPositiveDefinite` on the first pivot `<= 0`.
pub fn cholesky(m: &SymMatrix) -> Result<Cholesky> {
    let p = m.dim();
    let a = m.as_slice();
    let mut l = vec![0.0; p * p];
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d -= l[j * p + k] * l[j * p + k];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[j * p + j] = djj;
        for i in (j + 1)..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= l[i * p + k] * l[j * p + k];
            }
            l[i * p + j] = s / djj;
        }
    }
    Ok(Cholesky { dim: p, lower: l })
}

pub fn log_det(m: &SpdMatrix) -> f64 {
    m.log_det()
}

pub fn spd_inverse(m: &SpdMatrix) -> SpdMatrix {
    m.inverse()
}

/// Eigenvalues in nonincreasing order with matching orthonormal eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Row-major `p × p`; column `k` is the eigenvector for `values[k]`.
    pub vectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        let p = self.dim();
        (0..p).map(|i| self.vectors[i * p + k]).collect()
    }

    /// `U diag(f(λ)) Uᵀ`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let p = self.dim();
        let mapped: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mut data = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                data[i * p + j] = (0..p)
                    .map(|k| self.vectors[i * p + k] * mapped[k] * self.vectors[j * p + k])
                    .sum();
            }
        }
        SymMatrix::new(p, data).expect("finite reconstruction")
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map_values(|x| x)
    }
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps until the off-diagonal Frobenius mass drops below `1e-13 · ‖A‖_F`.
/// Columns are sign-normalized so that each eigenvector's largest-magnitude
/// coordinate is positive; exact ties keep index order.
pub fn eig_sym(m: &SymMatrix) -> Result<EigenDecomposition> {
    let p = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut v = vec![0.0; p * p];
    for i in 0..p {
        v[i * p + i] = 1.0;
    }
    let scale = m.frobenius_norm();
    let target = JACOBI_REL_TOL * scale;

    let off_mass = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    s += a[i * p + j] * a[i * p + j];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = scale == 0.0 || off_mass(&a) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for ip in 0..p {
            for iq in (ip + 1)..p {
                let apq = a[ip * p + iq];
                if apq == 0.0 {
                    continue;
                }
                let app = a[ip * p + ip];
                let aqq = a[iq * p + iq];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..p {
                    if k == ip || k == iq {
                        continue;
                    }
                    let akp = a[k * p + ip];
                    let akq = a[k * p + iq];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * p + ip] = new_kp;
                    a[ip * p + k] = new_kp;
                    a[k * p + iq] = new_kq;
                    a[iq * p + k] = new_kq;
                }
                a[ip * p + ip] = app - t * apq;
                a[iq * p + iq] = aqq + t * apq;
                a[ip * p + iq] = 0.0;
                a[iq * p + ip] = 0.0;
                for k in 0..p {
                    let vkp = v[k * p + ip];
                    let vkq = v[k * p + iq];
                    v[k * p + ip] = c * vkp - s * vkq;
                    v[k * p + iq] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_mass(&a) <= target;
    }

    let mut order: Vec<usize> = (0..p).collect();
    // stable sort keeps exact ties in index order
    order.sort_by(|&i, &j| a[j * p + j].partial_cmp(&a[i * p + i]).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&k| a[k * p + k]).collect();
    let mut vectors = vec![0.0; p * p];
    for (col, &k) in order.iter().enumerate() {
        let mut lead: f64 = 0.0;
        for i in 0..p {
            let x = v[i * p + k];
            if x.abs() > lead.abs() {
                lead = x;
            }
        }
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for i in 0..p {
            vectors[i * p + col] = sign * v[i * p + k];
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub spectral: f64,
    pub frobenius: f64,
}

pub fn norms(m: &SymMatrix) -> Result<Norms> {
    Ok(Norms { spectral: m.spectral_norm()?, frobenius: m.frobenius_norm() })
}

/// `n × p` sample matrix, one observation per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    rows: Vec<f64>,
}

impl Dataset {
    pub fn new(n: usize, p: usize, rows: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyData);
        }
        if p == 0 {
            return Err(Error::invalid("p", "dimension must be positive"));
        }
        if rows.len() != n * p {
            return Err(Error::DimensionMismatch { expected: n * p, found: rows.len() });
        }
        if rows.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("dataset"));
        }
        Ok(Dataset { n, p, rows })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyData);
        }
        let p = rows[0].len();
        let mut flat = Vec::with_capacity(n * p);
        for r in rows {
            if r.len() != p {
                return Err(Error::DimensionMismatch { expected: p, found: r.len() });
            }
            flat.extend_from_slice(r);
        }
        Self::new(n, p, flat)
    }

    /// Unchecked constructor for sampler output that is finite by construction.
    pub(crate) fn from_raw(n: usize, p: usize, rows: Vec<f64>) -> Self {
        debug_assert_eq!(rows.len(), n * p);
        Dataset { n, p, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks_exact(self.p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rows
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.p];
        for r in self.rows() {
            for (acc, x) in m.iter_mut().zip(r) {
                *acc += x;
            }
        }
        m.iter_mut().for_each(|x| *x /= self.n as f64);
        m
    }

    /// `(1/n) Σ (x_i − c)(x_i − c)ᵀ` about an arbitrary center.
    pub fn scatter_about(&self, center: &[f64]) -> Result<SymMatrix> {
        let p = self.p;
        if center.len() != p {
            return Err(Error::DimensionMismatch { expected: p, found: center.len() });
        }
        let mut s = vec![0.0; p * p];
        let mut d = vec![0.0; p];
        for r in self.rows() {
            for k in 0..p {
                d[k] = r[k] - center[k];
            }
            for i in 0..p {
                let di = d[i];
                for j in i..p {
                    s[i * p + j] += di * d[j];
                }
            }
        }
        let inv_n = 1.0 / self.n as f64;
        for i in 0..p {
            for j in i..p {
                let x = s[i * p + j] * inv_n;
                s[i * p + j] = x;
                s[j * p + i] = x;
            }
        }
        SymMatrix::new(p, s)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        Self::from_rows(&parse_csv_rows(text)?)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for r in self.rows() {
            let row: Vec<String> = r.iter().map(|x| format!("{x:?}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Sample covariance, uncentered `(1/n) Σ XᵢXᵢᵀ` or centered about the sample mean.
///
/// The result is only positive semi-definite; callers that need an inverse
/// go through [`SpdMatrix::new`].
pub fn sample_covariance(data: &Dataset, centered: bool) -> SymMatrix {
    let center = if centered { data.mean() } else { vec![0.0; data.p()] };
    data.scatter_about(&center).expect("center has dimension p")
}

fn parse_csv_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::config(format!("line {}", line + 1), e.to_string()))?;
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::config(format!("line {}", line + 1), format!("`{f}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn matmul(a: &[f64], b: &[f64], p: usize) -> Vec<f64> {
    let mut c = vec![0.0; p * p];
    for i in 0..p {
        for k in 0..p {
            let aik = a[i * p + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..p {
                c[i * p + j] += aik * b[k * p + j];
            }
        }
    }
    c
}

pub(crate) fn transpose(a: &[f64], p: usize) -> Vec<f64> {
    let mut t = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            t[j * p + i] = a[i * p + j];
        }
    }
    t
}
