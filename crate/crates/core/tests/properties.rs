//! Invariants checked over generated inputs.

mod common;

use covbvm::config;
use covbvm::discriminant::{lda_discriminant, qda_discriminant, separation_bound_check, DaTruth};
use covbvm::functionals::{FunctionalSpec, TruthSpec};
use covbvm::harness::{ks_statistic, quantile, std_normal_cdf, Experiment, ExperimentConfig};
use covbvm::model::{PriorSpec, Target};
use covbvm::perturbation::{compositions, kato_term, KatoContext};
use covbvm::{RngStream, SpdMatrix, SymMatrix};
use proptest::prelude::*;
use rand::Rng;

use common::*;

fn spd(p: usize) -> impl Strategy<Value = SpdMatrix> {
    (prop::collection::vec(-2.0..2.0f64, p * p), 0.05..1.0f64).prop_map(move |(g, c)| {
        let mut data = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                data[i * p + j] = (0..p).map(|k| g[i * p + k] * g[j * p + k]).sum::<f64>() + if i == j { c } else { 0.0 };
            }
        }
        SpdMatrix::new(SymMatrix::new(p, data).unwrap()).unwrap()
    })
}

fn sized_spd() -> impl Strategy<Value = SpdMatrix> {
    (1usize..7).prop_flat_map(spd)
}

fn vec_of(p: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, p)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

proptest! {
    #[test]
    fn cholesky_reconstructs(a in sized_spd()) {
        let p = a.dim();
        let l = a.cholesky();
        for i in 0..p {
            for j in 0..p {
                let s: f64 = (0..p).map(|k| l.get(i, k) * l.get(j, k)).sum();
                prop_assert!((s - a.get(i, j)).abs() <= 1e-10 * a.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn eigendecomposition_reconstructs(a in sized_spd()) {
        let eig = a.eig().unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        let back = eig.reconstruct();
        prop_assert!(back.sub(a.as_sym()).unwrap().max_abs() <= 1e-10 * a.max_abs().max(1.0));
    }

    #[test]
    fn inverse_is_two_sided(a in sized_spd()) {
        let p = a.dim();
        let prod = matmul(a.as_slice(), a.inverse().as_slice(), p);
        let cond = a.eig().unwrap().values[0] / a.min_eigenvalue().unwrap();
        for i in 0..p {
            for j in 0..p {
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((prod[i * p + j] - target).abs() <= 1e-12 * cond.max(1.0) * p as f64);
            }
        }
    }

    #[test]
    fn ks_is_permutation_invariant(xs in prop::collection::vec(-4.0..4.0f64, 1..200), seed in any::<u64>()) {
        let mut shuffled = xs.clone();
        let mut rng = RngStream::new(seed, 0).rng();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        let a = ks_statistic(&xs, std_normal_cdf).unwrap();
        prop_assert_eq!(a, ks_statistic(&shuffled, std_normal_cdf).unwrap());
        prop_assert!(a >= 0.5 / xs.len() as f64 - 1e-15 && a <= 1.0);
    }

    #[test]
    fn quantiles_are_monotone(xs in prop::collection::vec(-10.0..10.0f64, 1..100), q1 in 0.0..=1.0f64, q2 in 0.0..=1.0f64) {
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        let (a, b) = (quantile(&xs, lo).unwrap(), quantile(&xs, hi).unwrap());
        prop_assert!(a <= b);
        let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(min <= a && b <= max);
    }

    #[test]
    fn discriminants_are_antisymmetric(
        (ox, oy, mx, my, z) in (1usize..6).prop_flat_map(|p| (spd(p), spd(p), vec_of(p), vec_of(p), vec_of(p)))
    ) {
        let q = qda_discriminant(&mx, &my, &ox, &oy, &z).unwrap();
        let swapped = qda_discriminant(&my, &mx, &oy, &ox, &z).unwrap();
        prop_assert!((q + swapped).abs() <= 1e-9 * q.abs().max(1.0));
        let l = lda_discriminant(&mx, &my, ox.as_sym(), &z).unwrap();
        prop_assert!((l + lda_discriminant(&my, &mx, ox.as_sym(), &z).unwrap()).abs() <= 1e-9 * l.abs().max(1.0));
        let same = qda_discriminant(&mx, &my, &ox, &ox, &z).unwrap();
        prop_assert!((same - l).abs() <= 1e-9 * l.abs().max(1.0));
    }

    #[test]
    fn separation_bound_holds(
        (sigma, mx, my, z) in (1usize..6).prop_flat_map(|p| (spd(p), vec_of(p), vec_of(p), vec_of(p)))
    ) {
        let truth = DaTruth::lda(mx, my, sigma, z).unwrap();
        prop_assert!(separation_bound_check(&truth).unwrap().holds);
    }

    #[test]
    fn composition_counts(total in 0usize..7, parts in 1usize..7) {
        let all = compositions(total, parts);
        prop_assert_eq!(all.len(), binomial(total + parts - 1, parts - 1));
        prop_assert!(all.iter().all(|c| c.len() == parts && c.iter().sum::<usize>() == total));
    }

    #[test]
    fn second_order_term_closed_form(
        (values, delta, m) in (2usize..7).prop_flat_map(|p| (
            prop::collection::vec(0.0..10.0f64, p),
            prop::collection::vec(-1.0..1.0f64, p * p),
            1..=p,
        ))
    ) {
        let p = values.len();
        let mut a = values;
        a.sort_by(|x, y| y.total_cmp(x));
        let gap_ok = (0..p).all(|j| j == m - 1 || (a[m - 1] - a[j]).abs() > 0.05);
        prop_assume!(gap_ok);
        let sym: Vec<f64> = (0..p * p).map(|k| 0.5 * (delta[k] + delta[(k % p) * p + k / p])).collect();
        let d = SymMatrix::new(p, sym).unwrap();
        let ctx = KatoContext::new(a.clone(), d.clone(), m).unwrap();
        let closed: f64 = (0..p).filter(|&j| j != m - 1).map(|j| d.get(m - 1, j).powi(2) / (a[m - 1] - a[j])).sum();
        prop_assert!((kato_term(&ctx, 2).unwrap() - closed).abs() <= 1e-12 * closed.abs().max(1.0));
    }

    #[test]
    fn experiment_config_round_trips(seed in any::<u64>(), stream in 0u64..1000, n in 5usize..10_000, alpha in 0.01..0.5f64, rho in -0.3..0.6f64) {
        let experiment = Experiment::Matrix {
            truth: TruthSpec::new(equicorrelation(3, rho)),
            functional: FunctionalSpec::Quadratic { v: vec![1.0, -0.5, 0.25], target: Target::Precision },
        };
        let mut c = ExperimentConfig::new(experiment, PriorSpec::wishart(2).unwrap(), n, RngStream::new(seed, stream));
        c.alpha = alpha;
        let text = config::to_json(&c);
        let back = config::parse_experiment(&text, std::path::Path::new(".")).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn rng_streams_are_reproducible(seed in any::<u64>(), stream in any::<u64>()) {
        let s = RngStream::new(seed, stream);
        let a: Vec<u64> = (0..4).map({ let mut r = s.rng(); move |_| r.random() }).collect();
        let b: Vec<u64> = (0..4).map({ let mut r = s.rng(); move |_| r.random() }).collect();
        prop_assert_eq!(&a, &b);
        let c: Vec<u64> = (0..4).map({ let mut r = s.child(1).rng(); move |_| r.random() }).collect();
        prop_assert_ne!(&a, &c);
    }
}
