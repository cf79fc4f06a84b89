//! Test matrix generators.

use eigenformats::matrix::SparseMatrix;
use eigenformats::Reference;
use rand::Rng;

fn r(x: f64) -> Reference {
    Reference::from_f64(x)
}

/// The `(-1, 2, -1)` second-difference matrix.
pub fn tridiag(n: usize) -> SparseMatrix {
    SparseMatrix::from_triplets(
        n,
        n,
        (0..n).flat_map(|i| {
            let mut t = vec![(i, i, r(2.0))];
            if i > 0 {
                t.push((i, i - 1, r(-1.0)));
                t.push((i - 1, i, r(-1.0)));
            }
            t
        }),
    )
}

/// Eigenvalue `k` (1-based, ascending) of `tridiag(n)`.
pub fn tridiag_eigenvalue(n: usize, k: usize) -> f64 {
    2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos()
}

/// Symmetric matrix with a spread diagonal and `extra` random off-diagonal
/// pairs, all entries exactly representable in binary64.
pub fn random_symmetric(rng: &mut impl Rng, n: usize, extra: usize) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, r(rng.random_range(-4.0..4.0))));
    }
    for _ in 0..extra {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i != j {
            let v = r(rng.random_range(-1.0..1.0));
            t.push((i, j, v));
            t.push((j, i, v));
        }
    }
    SparseMatrix::from_triplets(n, n, t)
}

/// Unweighted simple graph on `n` vertices with edge probability `p`; the
/// last `isolated` vertices get no edges.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64, isolated: usize) -> SparseMatrix {
    let active = n - isolated.min(n);
    let mut t = Vec::new();
    for i in 0..active {
        for j in i + 1..active {
            if rng.random_bool(p) {
                t.push((i, j, Reference::ONE));
                t.push((j, i, Reference::ONE));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, t)
}

/// `m` random orthonormal columns of length `n`, in reference arithmetic.
pub fn random_orthonormal(rng: &mut impl Rng, n: usize, m: usize) -> Vec<Vec<Reference>> {
    let mut cols: Vec<Vec<Reference>> = Vec::with_capacity(m);
    while cols.len() < m {
        let mut v: Vec<Reference> = (0..n).map(|_| r(rng.random_range(-1.0..1.0))).collect();
        for _ in 0..2 {
            for q in &cols {
                let d = q.iter().zip(&v).fold(Reference::ZERO, |a, (&x, &y)| a + x * y);
                for (y, &x) in v.iter_mut().zip(q) {
                    *y = *y - d * x;
                }
            }
        }
        let nrm = v.iter().fold(Reference::ZERO, |a, &x| a + x * x).sqrt();
        if nrm > r(1e-3) {
            cols.push(v.into_iter().map(|x| x / nrm).collect());
        }
    }
    cols
}

/// A shuffle of `0..m`.
pub fn permutation(rng: &mut impl Rng, m: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}
