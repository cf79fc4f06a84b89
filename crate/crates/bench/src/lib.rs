//! Inputs shared by the benchmarks.

use eigenformats::matrix::SparseMatrix;
use eigenformats::Reference;

/// The `(-1, 2, -1)` second-difference matrix of order `n`.
pub fn tridiag(n: usize) -> SparseMatrix {
    let r = Reference::from_f64;
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

/// Deterministic values in `[-1, 1)` spread over a few binades.
pub fn operands(n: usize) -> Vec<Reference> {
    (0..n)
        .map(|i| {
            let x = ((i as f64 * 0.618_033_988_75).fract() - 0.5) * 2.0;
            Reference::from_f64(x * (1 + i % 7) as f64)
        })
        .collect()
}
