//! Type-generic Arnoldi eigensolver with Krylov–Schur restarts.
//!
//! The solver computes a partial Schur decomposition `M Q = Q R` for the
//! `want` wanted eigenvalues of a symmetric operator. Every inner product,
//! norm and small dense computation runs in the scalar type `T` itself.

pub mod dense;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formats::{Reference, Scalar};
use dense::{axpy, dot, norm, orthonormalize, symmetric_eigen, Dense};

/// Which end of the spectrum is wanted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenOrdering {
    LargestMagnitude,
    LargestAlgebraic,
}

impl EigenOrdering {
    fn before<T: Scalar>(self, a: T, b: T) -> bool {
        match self {
            EigenOrdering::LargestMagnitude => a.abs() > b.abs(),
            EigenOrdering::LargestAlgebraic => a > b,
        }
    }

    /// Stable sort of indices by this ordering.
    fn sort<T: Scalar>(self, values: &[T]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&i, &j| {
            if self.before(values[i], values[j]) {
                std::cmp::Ordering::Less
            } else if self.before(values[j], values[i]) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        });
        idx
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub want: usize,
    pub tol: Reference,
    pub min_dim: usize,
    pub max_dim: usize,
    pub max_restarts: usize,
    pub seed: u64,
    pub ordering: EigenOrdering,
}

impl SolverConfig {
    /// Default subspace sizes for an operator of dimension `n`:
    /// `min_dim = max(2 want, 20)` and `max_dim = max(3 want, 30)`, capped so
    /// that `min_dim < max_dim <= n`.
    pub fn new(want: usize, tol: Reference, n: usize) -> SolverConfig {
        let max_dim = (3 * want).max(30).min(n);
        let min_dim = (2 * want).max(20).min(max_dim.saturating_sub(1));
        SolverConfig {
            want,
            tol,
            min_dim,
            max_dim,
            max_restarts: 1000,
            seed: 0,
            ordering: EigenOrdering::LargestMagnitude,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> SolverConfig {
        self.seed = seed;
        self
    }

    pub fn validate(&self, n: usize) -> Result<(), SolverError> {
        let ok = self.want >= 1
            && self.want <= self.min_dim
            && self.min_dim < self.max_dim
            && self.max_dim <= n
            && self.tol > Reference::ZERO
            && self.tol.is_finite();
        if ok {
            Ok(())
        } else {
            Err(SolverError::InvalidConfig(format!(
                "need 1 <= want ({}) <= min_dim ({}) < max_dim ({}) <= n ({n}) and tol > 0",
                self.want, self.min_dim, self.max_dim
            )))
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("non-real value while normalizing the start vector")]
    StartVector,
    #[error("operator produced a non-real value")]
    NonReal,
    #[error("no fresh direction found after repeated Krylov breakdowns")]
    Breakdown,
    #[error("projected eigenproblem did not converge")]
    SmallEigen,
    #[error("requested {requested} pairs but only {available} are available")]
    Width { requested: usize, available: usize },
}

/// `M Q = Q R` for the wanted part of the spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSchurResult<T> {
    /// Columns of `Q`.
    pub q: Vec<Vec<T>>,
    /// `R` by rows; diagonal for symmetric operators.
    pub r: Vec<Vec<T>>,
    /// Residual norm estimate per column.
    pub residuals: Vec<T>,
    pub converged: bool,
    pub restarts_used: usize,
    pub matvecs_used: usize,
}

impl<T: Scalar> PartialSchurResult<T> {
    pub fn width(&self) -> usize {
        self.q.len()
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        (0..self.r.len()).map(|i| self.r[i][i]).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPairs<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
    pub ordering: EigenOrdering,
}

/// Leading `count` diagonal entries of `R` with the matching columns of `Q`.
pub fn extract_eigenpairs<T: Scalar>(
    r: &PartialSchurResult<T>,
    count: usize,
    ordering: EigenOrdering,
) -> Result<EigenPairs<T>, SolverError> {
    if count > r.width() {
        return Err(SolverError::Width {
            requested: count,
            available: r.width(),
        });
    }
    Ok(EigenPairs {
        values: r.eigenvalues()[..count].to_vec(),
        vectors: r.q[..count].to_vec(),
        ordering,
    })
}

/// Pseudo-random unit vector in reference arithmetic.
pub fn start_vector(n: usize, seed: u64) -> Vec<Reference> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Reference> = (0..n)
        .map(|_| Reference::from_f64(rng.random_range(-1.0..1.0)))
        .collect();
    let nrm = norm(&v);
    v.into_iter().map(|x| x / nrm).collect()
}

fn scale_down<T: Scalar>(w: &mut [T], by: T) {
    for x in w {
        *x = *x / by;
    }
}

fn round_vector<T: Scalar>(v: &[Reference]) -> Vec<T> {
    v.iter().map(T::from_reference).collect()
}

/// Arnoldi factorization `M V_k = V_k H_k + v_k h_k^T` with `v_k = V[k]`.
///
/// `h` has `max_dim + 1` rows and `max_dim` columns. Columns before `locked`
/// are converged Schur vectors that take no further part in restarts.
#[derive(Clone, Debug)]
pub struct Krylov<T> {
    n: usize,
    max_dim: usize,
    v: Vec<Vec<T>>,
    h: Vec<Vec<T>>,
    k: usize,
    locked: usize,
    /// The basis spans the whole space; there is no residual vector.
    exhausted: bool,
    seed: u64,
    fresh: u64,
    matvecs: usize,
}

impl<T: Scalar> Krylov<T> {
    /// Start from `v0` rounded into `T` and normalized there.
    pub fn new(n: usize, max_dim: usize, v0: &[Reference], seed: u64) -> Result<Krylov<T>, SolverError> {
        let mut v: Vec<T> = round_vector(v0);
        let nrm = norm(&v);
        if !nrm.is_finite() || nrm.is_zero() {
            return Err(SolverError::StartVector);
        }
        for x in &mut v {
            *x = *x / nrm;
        }
        if v.iter().any(|x| x.is_non_real()) {
            return Err(SolverError::StartVector);
        }
        Ok(Krylov {
            n,
            max_dim,
            v: vec![v],
            h: vec![vec![T::zero(); max_dim]; max_dim + 1],
            k: 0,
            locked: 0,
            exhausted: false,
            seed,
            fresh: 0,
            matvecs: 0,
        })
    }

    pub fn size(&self) -> usize {
        self.k
    }

    pub fn basis(&self) -> &[Vec<T>] {
        &self.v
    }

    /// Entry `(i, j)` of the `(k + 1) x k` projected matrix.
    pub fn h(&self, i: usize, j: usize) -> T {
        self.h[i][j]
    }

    pub fn locked(&self) -> usize {
        self.locked
    }

    pub fn matvecs(&self) -> usize {
        self.matvecs
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    /// Orthogonalize `w` against `V[0..=j]`, accumulating the coefficients
    /// into `coef`. Returns the norms before and after; `w` is left at unit
    /// length unless the remainder vanished.
    fn orthogonalize(&self, j: usize, w: &mut [T], coef: &mut [T]) -> (T, T) {
        let before = norm(w);
        if before.is_zero() || !before.is_finite() {
            return (before, before);
        }
        // work on a unit vector and carry the length separately; small
        // remainders would otherwise lose most of their bits in tapered formats
        scale_down(w, before);
        let mut len = before;
        let limit = T::from_f64(std::f64::consts::FRAC_1_SQRT_2);
        for pass in 0..3 {
            let c: Vec<T> = self.v[..=j].iter().map(|q| dot(q, w)).collect();
            for (q, &ci) in self.v[..=j].iter().zip(&c) {
                axpy(-ci, q, w);
            }
            for (acc, ci) in coef.iter_mut().zip(c) {
                *acc = *acc + ci * len;
            }
            let drop = norm(w);
            if drop.is_zero() || !drop.is_finite() {
                return (before, drop * len);
            }
            scale_down(w, drop);
            len = len * drop;
            // second pass always; a third only if the second removed a lot
            let settled = !(drop < limit);
            if pass == 1 && settled {
                break;
            }
            if pass == 2 && !settled {
                // still collapsing: numerically inside the span
                return (before, T::zero());
            }
        }
        (before, len)
    }

    fn is_breakdown(before: T, after: T) -> bool {
        after.is_zero() || !after.is_finite() || after <= T::machine_epsilon() * before
    }

    /// A unit vector orthogonal to `V[0..=j]`.
    fn fresh_vector(&mut self, j: usize) -> Result<Vec<T>, SolverError> {
        for _ in 0..3 {
            self.fresh += 1;
            let seed = self.seed ^ self.fresh.wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let mut w: Vec<T> = round_vector(&start_vector(self.n, seed));
            let mut scratch = vec![T::zero(); j + 1];
            let (before, after) = self.orthogonalize(j, &mut w, &mut scratch);
            if !Self::is_breakdown(before, after) {
                return Ok(w);
            }
        }
        Err(SolverError::Breakdown)
    }

    /// Extend the factorization to `to` columns (or until the basis spans
    /// the space).
    pub fn expand<F: Fn(&[T], &mut [T])>(&mut self, op: &F, to: usize) -> Result<(), SolverError> {
        let to = to.min(self.max_dim);
        while self.k < to && !self.exhausted {
            let j = self.k;
            let mut w = vec![T::zero(); self.n];
            op(&self.v[j], &mut w);
            self.matvecs += 1;
            if w.iter().any(|x| x.is_non_real()) {
                return Err(SolverError::NonReal);
            }
            let mut coef = vec![T::zero(); j + 1];
            let (before, after) = self.orthogonalize(j, &mut w, &mut coef);
            for (i, c) in coef.into_iter().enumerate() {
                self.h[i][j] = c;
            }
            self.k = j + 1;
            self.v.truncate(j + 1);
            if j + 1 == self.n {
                self.h[j + 1][j] = T::zero();
                self.exhausted = true;
                break;
            }
            if Self::is_breakdown(before, after) {
                self.h[j + 1][j] = T::zero();
                let f = self.fresh_vector(j)?;
                self.v.push(f);
            } else {
                self.h[j + 1][j] = after;
                self.v.push(w);
            }
        }
        Ok(())
    }

    /// Ritz pairs of the active block, sorted by `ordering`.
    pub fn ritz(&self, ordering: EigenOrdering) -> Result<Ritz<T>, SolverError> {
        let a = self.locked;
        let m = self.k;
        let p = m - a;
        let half = T::from_f64(0.5);
        let mut block = Dense::zeros(p);
        for i in 0..p {
            for j in 0..p {
                let x = (self.h[a + i][a + j] + self.h[a + j][a + i]) * half;
                block.set(i, j, x);
            }
        }
        let (theta, u) = symmetric_eigen(&block).map_err(|_| SolverError::SmallEigen)?;
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(SolverError::NonReal);
        }
        let order = ordering.sort(&theta);
        let mut vectors: Vec<Vec<T>> = order.iter().map(|&c| (0..p).map(|j| u.at(j, c)).collect()).collect();
        // accumulated rotations drift from orthonormal at low precision
        if !orthonormalize(&mut vectors) {
            return Err(SolverError::SmallEigen);
        }
        let residuals = vectors
            .iter()
            .map(|y| {
                let mut s = T::zero();
                for (j, &yj) in y.iter().enumerate() {
                    s = s + self.h[m][a + j] * yj;
                }
                s.abs()
            })
            .collect();
        Ok(Ritz {
            values: order.iter().map(|&c| theta[c]).collect(),
            vectors,
            residuals,
        })
    }

    /// Frobenius norm of the square part of the projected matrix.
    pub fn h_norm(&self) -> T {
        let m = self.k;
        let entries: Vec<T> = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| self.h[i][j]).collect();
        norm(&entries)
    }

    /// `sum_j V[locked + j] * y[j]`
    fn combine(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        for (j, &c) in y.iter().enumerate() {
            axpy(c, &self.v[self.locked + j], &mut out);
        }
        out
    }

    /// Krylov–Schur truncation: keep the first `keep` Ritz pairs, of which the
    /// first `lock` become locked.
    pub fn truncate(&mut self, ritz: &Ritz<T>, keep: usize, lock: usize) {
        assert!(lock <= keep && keep < ritz.values.len());
        let a = self.locked;
        let m = self.k;
        let coupling: Vec<T> = ritz
            .vectors
            .iter()
            .take(keep)
            .map(|y| {
                let mut s = T::zero();
                for (j, &yj) in y.iter().enumerate() {
                    s = s + self.h[m][a + j] * yj;
                }
                s
            })
            .collect();
        let new_cols: Vec<Vec<T>> = ritz.vectors[..keep].iter().map(|y| self.combine(y)).collect();
        let residual = if self.exhausted { None } else { Some(self.v[m].clone()) };

        self.v.truncate(a);
        self.v.extend(new_cols);
        let k = a + keep;
        for row in self.h.iter_mut() {
            for (j, x) in row.iter_mut().enumerate() {
                if j >= a {
                    *x = T::zero();
                }
            }
        }
        for row in self.h[a..].iter_mut() {
            for x in row[..a].iter_mut() {
                *x = T::zero();
            }
        }
        for i in 0..keep {
            self.h[a + i][a + i] = ritz.values[i];
            // locked pairs are decoupled from the residual
            self.h[k][a + i] = if i < lock { T::zero() } else { coupling[i] };
        }
        self.k = k;
        self.locked = a + lock;
        match residual {
            Some(r) => self.v.push(r),
            None => self.exhausted = false,
        }
    }
}

/// Sorted Ritz values of the active block with their coordinate vectors and
/// residual norms.
#[derive(Clone, Debug)]
pub struct Ritz<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
    pub residuals: Vec<T>,
}

/// Partial Schur decomposition of the symmetric operator `op` of dimension
/// `n` by thick-restart Krylov–Schur with locking.
///
/// A pair counts as converged when its residual estimate is at most
/// `max(tol |theta|, eps ||H||_F)`.
pub fn partial_schur<T, F>(op: F, n: usize, cfg: &SolverConfig) -> Result<PartialSchurResult<T>, SolverError>
where
    T: Scalar,
    F: Fn(&[T], &mut [T]),
{
    cfg.validate(n)?;
    let v0 = start_vector(n, cfg.seed);
    let mut kr = Krylov::<T>::new(n, cfg.max_dim, &v0, cfg.seed)?;
    let tol = T::from_reference(&cfg.tol);
    let eps = T::machine_epsilon();
    let mut restarts = 0usize;
    loop {
        kr.expand(&op, cfg.max_dim)?;
        let ritz = kr.ritz(cfg.ordering)?;
        let floor = eps * kr.h_norm();
        let is_conv = |i: usize| {
            let bound = tol * ritz.values[i].abs();
            let bound = if bound > floor { bound } else { floor };
            ritz.residuals[i] <= bound
        };
        let lead = (0..ritz.values.len()).take_while(|&i| is_conv(i)).count();
        let need = cfg.want - kr.locked;
        let out_of_restarts = restarts >= cfg.max_restarts;
        if lead >= need || out_of_restarts || ritz.values.len() <= need {
            return Ok(assemble(&kr, &ritz, cfg, lead >= need, restarts));
        }
        let keep = (cfg.min_dim - kr.locked).min(ritz.values.len() - 1);
        kr.truncate(&ritz, keep, lead);
        restarts += 1;
    }
}

fn assemble<T: Scalar>(
    kr: &Krylov<T>,
    ritz: &Ritz<T>,
    cfg: &SolverConfig,
    converged: bool,
    restarts: usize,
) -> PartialSchurResult<T> {
    let need = (cfg.want - kr.locked).min(ritz.values.len());
    let mut values: Vec<T> = (0..kr.locked).map(|i| kr.h[i][i]).collect();
    let mut vectors: Vec<Vec<T>> = kr.v[..kr.locked].to_vec();
    let mut residuals = vec![T::zero(); kr.locked];
    for i in 0..need {
        values.push(ritz.values[i]);
        vectors.push(kr.combine(&ritz.vectors[i]));
        residuals.push(ritz.residuals[i]);
    }
    let order = cfg.ordering.sort(&values);
    let m = order.len();
    let mut r = vec![vec![T::zero(); m]; m];
    for (i, &o) in order.iter().enumerate() {
        r[i][i] = values[o];
    }
    PartialSchurResult {
        q: order.iter().map(|&o| vectors[o].clone()).collect(),
        r,
        residuals: order.iter().map(|&o| residuals[o]).collect(),
        converged,
        restarts_used: restarts,
        matvecs_used: kr.matvecs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{Float16, Float64, Posit32};
    use crate::matrix::SparseMatrix;

    fn diag_op(d: Vec<f64>) -> impl Fn(&[Float64], &mut [Float64]) {
        move |x, y| {
            for i in 0..x.len() {
                y[i] = Float64(d[i]) * x[i];
            }
        }
    }

    fn tridiag(n: usize) -> SparseMatrix {
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

    fn tol(v: f64) -> Reference {
        Reference::from_f64(v)
    }

    #[test]
    fn default_dimensions() {
        let c = SolverConfig::new(12, tol(1e-8), 1000);
        assert_eq!((c.min_dim, c.max_dim, c.max_restarts), (24, 36, 1000));
        let c = SolverConfig::new(3, tol(1e-8), 1000);
        assert_eq!((c.min_dim, c.max_dim), (20, 30));
        let c = SolverConfig::new(12, tol(1e-8), 13);
        assert_eq!((c.min_dim, c.max_dim), (12, 13));
        assert!(c.validate(13).is_ok());
        assert!(SolverConfig::new(12, tol(1e-8), 12).validate(12).is_err());
    }

    #[test]
    fn identity_converges_in_one_expansion() {
        let n = 50;
        let cfg = SolverConfig::new(12, tol(1e-12), n);
        let res = partial_schur::<Float64, _>(|x, y| y.copy_from_slice(x), n, &cfg).unwrap();
        assert!(res.converged);
        assert_eq!(res.restarts_used, 0);
        assert_eq!(res.width(), 12);
        for v in res.eigenvalues() {
            assert!((v.0 - 1.0).abs() < 1e-14);
        }
        for i in 0..12 {
            for j in 0..12 {
                let d = dot(&res.q[i], &res.q[j]).0;
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn diagonal_largest_three() {
        let d: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let mut cfg = SolverConfig::new(3, tol(1e-12), 20);
        cfg.min_dim = 8;
        cfg.max_dim = 12;
        let res = partial_schur(diag_op(d), 20, &cfg).unwrap();
        assert!(res.converged);
        let vals: Vec<f64> = res.eigenvalues().iter().map(|v| v.0).collect();
        for (v, want) in vals.iter().zip([20.0, 19.0, 18.0]) {
            assert!((v - want).abs() < 1e-10, "{vals:?}");
        }
        let pairs = extract_eigenpairs(&res, 3, cfg.ordering).unwrap();
        // unit coordinate vectors up to sign
        for (c, idx) in pairs.vectors.iter().zip([19, 18, 17]) {
            assert!((c[idx].0.abs() - 1.0).abs() < 1e-6);
        }
        assert!(extract_eigenpairs(&res, 0, cfg.ordering).unwrap().values.is_empty());
        assert!(extract_eigenpairs(&res, 4, cfg.ordering).is_err());
    }

    #[test]
    fn tridiagonal_closed_form() {
        let n = 100;
        let a = tridiag(n).to_csr::<Float64>();
        let cfg = SolverConfig::new(12, tol(1e-12), n);
        let res = partial_schur(|x: &[Float64], y: &mut [Float64]| a.matvec(x, y), n, &cfg).unwrap();
        assert!(res.converged);
        let top = res.eigenvalues()[0].0;
        let exact = 2.0 - 2.0 * (100.0 * std::f64::consts::PI / 101.0).cos();
        assert!((top - exact).abs() / exact < 1e-12, "{top} {exact}");
    }

    #[test]
    fn deterministic() {
        let n = 60;
        let a = tridiag(n).to_csr::<Posit32>();
        let cfg = SolverConfig::new(4, tol(1e-6), n).with_seed(9);
        let run = || partial_schur(|x: &[Posit32], y: &mut [Posit32]| a.matvec(x, y), n, &cfg).unwrap();
        assert_eq!(run(), run());
    }

    #[test]
    fn low_precision_run_converges() {
        let n = 80;
        let a = tridiag(n).to_csr::<Float16>();
        let cfg = SolverConfig::new(12, tol(1e-4), n);
        let res = partial_schur(|x: &[Float16], y: &mut [Float16]| a.matvec(x, y), n, &cfg).unwrap();
        assert!(res.converged);
        let exact = 2.0 - 2.0 * (80.0 * std::f64::consts::PI / 81.0).cos();
        // sequential fp16 dot products over 80 terms cost a few dozen ulps
        assert!((res.eigenvalues()[0].to_f64() - exact).abs() < 5e-2);
    }

    #[test]
    fn non_real_operator_is_an_error() {
        let n = 40;
        let cfg = SolverConfig::new(3, tol(1e-8), n);
        let op = |_: &[Float64], y: &mut [Float64]| y.fill(Float64(f64::NAN));
        assert_eq!(partial_schur(op, n, &cfg).unwrap_err(), SolverError::NonReal);
    }
}
