//! Solver properties checked in reference arithmetic and against a dense
//! binary64 eigensolver.

mod support;

use eigenformats::arnoldi::{partial_schur, start_vector, Krylov, PartialSchurResult, SolverConfig};
use eigenformats::formats::{Float16, Float32, Float64, Posit16, Posit32, Takum16, Takum32};
use eigenformats::matrix::SparseMatrix;
use eigenformats::{Reference, Scalar};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{dense, gen};

fn tol(x: f64) -> Reference {
    Reference::from_f64(x)
}

fn solve<T: Scalar>(m: &SparseMatrix, cfg: &SolverConfig) -> PartialSchurResult<T> {
    let a = m.to_csr::<T>();
    partial_schur(|x: &[T], y: &mut [T]| a.matvec(x, y), m.n_rows(), cfg).unwrap()
}

fn lift<T: Scalar>(v: &[T]) -> Vec<Reference> {
    v.iter().map(|x| x.to_reference()).collect()
}

fn matvec_ref(m: &SparseMatrix, x: &[Reference]) -> Vec<Reference> {
    let mut y = vec![Reference::ZERO; m.n_rows()];
    for e in m.entries() {
        y[e.row] = y[e.row] + e.value * x[e.col];
    }
    y
}

fn norm_ref(v: &[Reference]) -> Reference {
    v.iter().fold(Reference::ZERO, |a, &x| a + x * x).sqrt()
}

/// `||M V_k - V_{k+1} H_k||_F / (k eps ||M||_F)` after one full expansion.
fn arnoldi_defect<T: Scalar>(m: &SparseMatrix, k: usize, seed: u64) -> f64 {
    let n = m.n_rows();
    let a = m.to_csr::<T>();
    let mut kr = Krylov::<T>::new(n, k, &start_vector(n, seed), seed).unwrap();
    kr.expand(&|x: &[T], y: &mut [T]| a.matvec(x, y), k).unwrap();
    let k = kr.size();
    let v: Vec<Vec<Reference>> = kr.basis().iter().map(|c| lift(c)).collect();
    let mut sq = Reference::ZERO;
    for j in 0..k {
        let mut d = matvec_ref(m, &v[j]);
        for (i, vi) in v.iter().enumerate().take((j + 2).min(v.len())) {
            let h = kr.h(i, j).to_reference();
            for (x, &y) in d.iter_mut().zip(vi) {
                *x = *x - h * y;
            }
        }
        sq = d.iter().fold(sq, |a, &x| a + x * x);
    }
    let scale = Reference::from_f64(k as f64) * T::machine_epsilon().to_reference() * m.frobenius_norm();
    (sq.sqrt() / scale).to_f64()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn arnoldi_relation_holds_in_every_precision(n in 30usize..70, seed in any::<u64>()) {
        let m = gen::random_symmetric(&mut ChaCha8Rng::seed_from_u64(seed), n, 3 * n);
        let k = 24;
        for (name, d) in [
            ("Float64", arnoldi_defect::<Float64>(&m, k, seed)),
            ("Float32", arnoldi_defect::<Float32>(&m, k, seed)),
            ("Posit32", arnoldi_defect::<Posit32>(&m, k, seed)),
            ("Takum32", arnoldi_defect::<Takum32>(&m, k, seed)),
            ("Float16", arnoldi_defect::<Float16>(&m, k, seed)),
            ("Posit16", arnoldi_defect::<Posit16>(&m, k, seed)),
            ("Takum16", arnoldi_defect::<Takum16>(&m, k, seed)),
        ] {
            prop_assert!(d <= 10.0, "{} defect {}", name, d);
        }
    }

    #[test]
    fn converged_residuals_are_true_residuals(n in 40usize..90, seed in any::<u64>()) {
        let m = gen::random_symmetric(&mut ChaCha8Rng::seed_from_u64(seed), n, 2 * n);
        fn check<T: Scalar>(m: &SparseMatrix, t: f64, seed: u64) -> Result<(), TestCaseError> {
            let cfg = SolverConfig::new(6, tol(t), m.n_rows()).with_seed(seed);
            let res = solve::<T>(m, &cfg);
            prop_assert!(res.converged);
            for (q, th) in res.q.iter().zip(res.eigenvalues()) {
                let q = lift(q);
                let th = th.to_reference();
                let r: Vec<Reference> = matvec_ref(m, &q).iter().zip(&q).map(|(&a, &b)| a - th * b).collect();
                let rel = (norm_ref(&r) / th.abs()).to_f64();
                prop_assert!(rel <= 10.0 * t, "{}: {} > 10 * {}", T::FORMAT, rel, t);
            }
            Ok(())
        }
        check::<Float64>(&m, 1e-10, seed)?;
        check::<Float32>(&m, 1e-4, seed)?;
        check::<Posit32>(&m, 1e-5, seed)?;
        check::<Takum32>(&m, 1e-5, seed)?;
    }

    #[test]
    fn matches_dense_eigenvalues(n in 20usize..80, seed in any::<u64>()) {
        let m = gen::random_symmetric(&mut ChaCha8Rng::seed_from_u64(seed), n, 2 * n);
        let want = dense::eigenvalues(&m);
        let cfg = SolverConfig::new(8, tol(1e-12), n).with_seed(seed);
        let res = solve::<Float64>(&m, &cfg);
        prop_assert!(res.converged);
        let scale = want[0].abs();
        for (got, w) in res.eigenvalues().iter().zip(&want) {
            prop_assert!((got.0 - w).abs() <= 1e-10 * scale, "{} vs {}", got.0, w);
        }
    }

    #[test]
    fn scaling_scales_the_selected_values(n in 30usize..60, seed in any::<u64>(), c in 0.1f64..10.0) {
        let m = gen::random_symmetric(&mut ChaCha8Rng::seed_from_u64(seed), n, 2 * n);
        let cm = SparseMatrix::from_triplets(n, n, m.entries().iter().map(|e| (e.row, e.col, e.value * tol(c))));
        let cfg = SolverConfig::new(6, tol(1e-12), n).with_seed(seed);
        let base = solve::<Float64>(&m, &cfg).eigenvalues();
        let scaled = solve::<Float64>(&cm, &cfg).eigenvalues();
        let top = base[0].0.abs();
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert!((a.0 * c - b.0).abs() <= 1e-9 * c * top, "{} * {} vs {}", a.0, c, b.0);
        }
    }

    #[test]
    fn power_of_two_scaling_is_exact(n in 30usize..60, seed in any::<u64>(), e in -8i32..8) {
        let m = gen::random_symmetric(&mut ChaCha8Rng::seed_from_u64(seed), n, 2 * n);
        let c = tol(2f64.powi(e));
        let cm = SparseMatrix::from_triplets(n, n, m.entries().iter().map(|x| (x.row, x.col, x.value * c)));
        let cfg = SolverConfig::new(6, tol(1e-10), n).with_seed(seed);
        let base = solve::<Float64>(&m, &cfg);
        let scaled = solve::<Float64>(&cm, &cfg);
        prop_assert_eq!(base.restarts_used, scaled.restarts_used);
        for (a, b) in base.eigenvalues().iter().zip(scaled.eigenvalues()) {
            prop_assert_eq!(a.0 * 2f64.powi(e), b.0);
        }
    }

    #[test]
    fn repeated_runs_are_bit_identical(n in 30usize..60, seed in any::<u64>()) {
        let m = gen::random_symmetric(&mut ChaCha8Rng::seed_from_u64(seed), n, 2 * n);
        let cfg = SolverConfig::new(4, tol(1e-4), n).with_seed(seed);
        prop_assert_eq!(solve::<Posit16>(&m, &cfg), solve::<Posit16>(&m, &cfg));
        prop_assert_eq!(solve::<Takum16>(&m, &cfg), solve::<Takum16>(&m, &cfg));
    }
}

#[test]
fn tridiagonal_spectrum_in_single_precision() {
    let n = 200;
    let m = gen::tridiag(n);
    let cfg = SolverConfig::new(12, tol(1e-6), n);
    let res = solve::<Float32>(&m, &cfg);
    assert!(res.converged);
    for (i, v) in res.eigenvalues().iter().enumerate() {
        let want = gen::tridiag_eigenvalue(n, n - i);
        assert!((v.to_f64() - want).abs() / want < 1e-5, "{i}: {v:?} vs {want}");
    }
}

#[test]
fn fewer_pairs_than_requested_is_a_config_error() {
    let m = gen::tridiag(10);
    let cfg = SolverConfig::new(12, tol(1e-8), 10);
    let a = m.to_csr::<Float64>();
    assert!(partial_schur(|x: &[Float64], y: &mut [Float64]| a.matvec(x, y), 10, &cfg).is_err());
}
