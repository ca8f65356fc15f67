//! Dense reference computations shared by the integration tests. Everything
//! here works on plain row-major `Vec<f64>` so the oracles do not go through
//! the library's own factorizations.
#![allow(dead_code)]

use covbvm::{SpdMatrix, SymMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn matmul(a: &[f64], b: &[f64], p: usize) -> Vec<f64> {
    let mut out = vec![0.0; p * p];
    for i in 0..p {
        for k in 0..p {
            let aik = a[i * p + k];
            for j in 0..p {
                out[i * p + j] += aik * b[k * p + j];
            }
        }
    }
    out
}

pub fn trace(a: &[f64], p: usize) -> f64 {
    (0..p).map(|i| a[i * p + i]).sum()
}

pub fn matvec(a: &[f64], v: &[f64]) -> Vec<f64> {
    let p = v.len();
    (0..p).map(|i| (0..p).map(|j| a[i * p + j] * v[j]).sum()).collect()
}

pub fn quad(a: &[f64], v: &[f64]) -> f64 {
    matvec(a, v).iter().zip(v).map(|(x, y)| x * y).sum()
}

pub fn outer(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter().flat_map(|x| v.iter().map(move |y| x * y)).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| c * x).collect()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &[f64], p: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut inv: Vec<f64> = (0..p * p).map(|k| if k / p == k % p { 1.0 } else { 0.0 }).collect();
    for col in 0..p {
        let pivot = (col..p).max_by(|&x, &y| m[x * p + col].abs().total_cmp(&m[y * p + col].abs())).unwrap();
        for j in 0..p {
            m.swap(col * p + j, pivot * p + j);
            inv.swap(col * p + j, pivot * p + j);
        }
        let d = m[col * p + col];
        for j in 0..p {
            m[col * p + j] /= d;
            inv[col * p + j] /= d;
        }
        for i in 0..p {
            if i != col {
                let f = m[i * p + col];
                for j in 0..p {
                    m[i * p + j] -= f * m[col * p + j];
                    inv[i * p + j] -= f * inv[col * p + j];
                }
            }
        }
    }
    inv
}

/// `log |det a|` by Gaussian elimination with partial pivoting.
pub fn log_abs_det(a: &[f64], p: usize) -> f64 {
    let mut m = a.to_vec();
    let mut acc = 0.0;
    for col in 0..p {
        let pivot = (col..p).max_by(|&x, &y| m[x * p + col].abs().total_cmp(&m[y * p + col].abs())).unwrap();
        for j in 0..p {
            m.swap(col * p + j, pivot * p + j);
        }
        let d = m[col * p + col];
        acc += d.abs().ln();
        for i in col + 1..p {
            let f = m[i * p + col] / d;
            for j in col..p {
                m[i * p + j] -= f * m[col * p + j];
            }
        }
    }
    acc
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn go(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, whole: f64, m: f64, fm: f64, tol: f64, depth: u32) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        go(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1) + go(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    go(f, a, fa, b, fb, whole, m, fm, tol, 50)
}

pub fn equicorrelation(p: usize, rho: f64) -> SpdMatrix {
    let data = (0..p * p).map(|k| if k / p == k % p { 1.0 } else { rho }).collect();
    SpdMatrix::new(SymMatrix::new(p, data).unwrap()).unwrap()
}

pub fn random_sym<R: Rng + ?Sized>(p: usize, rng: &mut R) -> SymMatrix {
    let mut data = vec![0.0; p * p];
    for i in 0..p {
        for j in i..p {
            let x: f64 = rng.sample(StandardNormal);
            data[i * p + j] = x;
            data[j * p + i] = x;
        }
    }
    SymMatrix::new(p, data).unwrap()
}

/// `G Gᵀ / p + c I` with Gaussian `G`.
pub fn random_spd<R: Rng + ?Sized>(p: usize, c: f64, rng: &mut R) -> SpdMatrix {
    let g: Vec<f64> = (0..p * p).map(|_| rng.sample(StandardNormal)).collect();
    let mut data = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            let s: f64 = (0..p).map(|k| g[i * p + k] * g[j * p + k]).sum();
            data[i * p + j] = s / p as f64 + if i == j { c } else { 0.0 };
        }
    }
    SpdMatrix::new(SymMatrix::new(p, data).unwrap()).unwrap()
}

pub fn random_vec<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<f64> {
    (0..p).map(|_| rng.sample(StandardNormal)).collect()
}
