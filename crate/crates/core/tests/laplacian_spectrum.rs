//! Spectra of normalized Laplacians against closed forms, a dense solver and
//! the reference-arithmetic solver.

mod support;

use eigenformats::arnoldi::{partial_schur, SolverConfig};
use eigenformats::laplacian::{degrees, normalized_laplacian, prepare_graph};
use eigenformats::matrix::SparseMatrix;
use eigenformats::Reference;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{dense, gen};

fn edges(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> SparseMatrix {
    SparseMatrix::from_triplets(
        n,
        n,
        pairs
            .into_iter()
            .flat_map(|(i, j)| [(i, j, Reference::ONE), (j, i, Reference::ONE)]),
    )
}

fn reference_top(l: &SparseMatrix, want: usize) -> Vec<f64> {
    let n = l.n_rows();
    let a = l.to_csr::<Reference>();
    let cfg = SolverConfig::new(want, Reference::parse_decimal("1e-20").unwrap(), n);
    let res = partial_schur(|x: &[Reference], y: &mut [Reference]| a.matvec(x, y), n, &cfg).unwrap();
    assert!(res.converged);
    res.eigenvalues().iter().map(|v| v.to_f64()).collect()
}

fn descending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

#[test]
fn cycle_graph() {
    let n = 40;
    let l = normalized_laplacian(&edges(n, (0..n).map(|i| (i, (i + 1) % n)))).unwrap();
    let want = descending((0..n).map(|k| 1.0 - (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()).collect());
    let got = descending(dense::eigenvalues(&l));
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12, "{g} vs {w}");
    }
    // even cycles are bipartite, so 2 is an eigenvalue
    assert!((reference_top(&l, 3)[0] - 2.0).abs() < 1e-15);
}

#[test]
fn path_graph() {
    let n = 30;
    let l = normalized_laplacian(&edges(n, (0..n - 1).map(|i| (i, i + 1)))).unwrap();
    let want = descending((0..n).map(|k| 1.0 - (std::f64::consts::PI * k as f64 / (n - 1) as f64).cos()).collect());
    let got = descending(dense::eigenvalues(&l));
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12, "{g} vs {w}");
    }
    for (g, w) in reference_top(&l, 5).iter().zip(&want) {
        assert!((g - w).abs() < 1e-15, "{g} vs {w}");
    }
}

#[test]
fn complete_graph() {
    let n = 16;
    let l = normalized_laplacian(&edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))).unwrap();
    let got = descending(dense::eigenvalues(&l));
    let top = n as f64 / (n - 1) as f64;
    assert!(got[..n - 1].iter().all(|g| (g - top).abs() < 1e-12), "{got:?}");
    assert!(got[n - 1].abs() < 1e-12);
}

#[test]
fn star_graph() {
    let n = 20;
    let l = normalized_laplacian(&edges(n, (1..n).map(|i| (0, i)))).unwrap();
    let got = descending(dense::eigenvalues(&l));
    assert!((got[0] - 2.0).abs() < 1e-12);
    assert!(got[1..n - 1].iter().all(|g| (g - 1.0).abs() < 1e-12));
    assert!(got[n - 1].abs() < 1e-12);
}

#[test]
fn weights_do_not_enter_the_off_diagonal() {
    let n = 6;
    let a = SparseMatrix::from_triplets(
        n,
        n,
        (0..n - 1).flat_map(|i| {
            let w = Reference::from_i64(i as i64 + 1);
            [(i, i + 1, w), (i + 1, i, w)]
        }),
    );
    let l = normalized_laplacian(&a).unwrap();
    let d = degrees(&a);
    let v = l.get(1, 2).to_f64();
    let want = -1.0 / (d[1] * d[2]).sqrt().to_f64();
    assert!((v - want).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_lies_in_zero_two(n in 2usize..50, p in 0.02f64..0.9, iso in 0usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gen::random_graph(&mut rng, n, p, iso);
        let l = prepare_graph(a).unwrap();
        for v in dense::eigenvalues(&l) {
            prop_assert!((-1e-12..=2.0 + 1e-12).contains(&v), "{}", v);
        }
    }

    #[test]
    fn reference_spectrum_lies_in_zero_two(n in 14usize..40, p in 0.05f64..0.6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = prepare_graph(gen::random_graph(&mut rng, n, p, 0)).unwrap();
        for v in reference_top(&l, 4) {
            prop_assert!((-1e-12..=2.0 + 1e-12).contains(&v), "{}", v);
        }
    }
}
