//! Vector kernels and the small symmetric eigensolver, all in the target
//! scalar with no wider accumulators.

use crate::formats::Scalar;

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Euclidean norm. The plain sum of squares is used unless it overflows,
/// underflows to zero or turns non-real; then the vector is scaled by its
/// largest magnitude first.
pub fn norm<T: Scalar>(v: &[T]) -> T {
    let s = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
    if s.is_finite() && !s.is_zero() {
        return s.sqrt();
    }
    let mut scale = T::zero();
    for &x in v {
        let a = x.abs();
        if a.is_non_real() {
            return a;
        }
        if a > scale {
            scale = a;
        }
    }
    if scale.is_zero() || !scale.is_finite() {
        return scale;
    }
    let s = v.iter().fold(T::zero(), |acc, &x| {
        let y = x / scale;
        acc + y * y
    });
    scale * s.sqrt()
}

/// `sqrt(a^2 + b^2)` without intermediate overflow.
pub fn hypot<T: Scalar>(a: T, b: T) -> T {
    let (a, b) = (a.abs(), b.abs());
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if big.is_zero() {
        return big;
    }
    let r = small / big;
    big * (T::one() + r * r).sqrt()
}

/// `y += alpha * x`
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

/// Gram-Schmidt with one reorthogonalization pass over `cols` in order, so
/// earlier columns move least. Returns `false` if a column vanishes.
pub fn orthonormalize<T: Scalar>(cols: &mut [Vec<T>]) -> bool {
    for k in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(k);
        let y = &mut rest[0];
        for _ in 0..2 {
            for q in done.iter() {
                let c = dot(q, y);
                axpy(-c, q, y);
            }
        }
        let nrm = norm(y);
        if nrm.is_zero() || !nrm.is_finite() {
            return false;
        }
        for x in y.iter_mut() {
            *x = *x / nrm;
        }
    }
    true
}

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(n: usize) -> Dense<T> {
        Dense {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct NoConvergence;

/// Eigen-decomposition of a symmetric matrix by Householder tridiagonalization
/// and implicit QL with Wilkinson-type shifts. Returns eigenvalues in the
/// order produced by QL and the eigenvector matrix (columns). Only the lower
/// triangle of `a` is read.
pub fn symmetric_eigen<T: Scalar>(a: &Dense<T>) -> Result<(Vec<T>, Dense<T>), NoConvergence> {
    let n = a.n;
    if n == 0 {
        return Ok((Vec::new(), Dense::zeros(0)));
    }
    let mut v = a.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e, 30 * n)?;
    Ok((d, v))
}

fn tred2<T: Scalar>(v: &mut Dense<T>, d: &mut [T], e: &mut [T]) {
    let n = v.n;
    let zero = T::zero();
    for j in 0..n {
        d[j] = v.at(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for &dk in &d[..i] {
            scale = scale + dk.abs();
        }
        if scale.is_zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.at(i - 1, j);
                v.set(i, j, zero);
                v.set(j, i, zero);
            }
        } else {
            for dk in &mut d[..i] {
                *dk = *dk / scale;
                h = h + *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in &mut e[..i] {
                *ej = zero;
            }
            for j in 0..i {
                f = d[j];
                v.set(j, i, f);
                g = e[j] + v.at(j, j) * f;
                for k in j + 1..i {
                    g = g + v.at(k, j) * d[k];
                    e[k] = e[k] + v.at(k, j) * f;
                }
                e[j] = g;
            }
            f = zero;
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let x = v.at(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, x);
                }
                d[j] = v.at(i - 1, j);
                v.set(i, j, zero);
            }
        }
        d[i] = h;
    }
    // accumulate the transformations
    for i in 0..n - 1 {
        let x = v.at(i, i);
        v.set(n - 1, i, x);
        v.set(i, i, T::one());
        let h = d[i + 1];
        if !h.is_zero() {
            for k in 0..=i {
                d[k] = v.at(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = zero;
                for k in 0..=i {
                    g = g + v.at(k, i + 1) * v.at(k, j);
                }
                for k in 0..=i {
                    let x = v.at(k, j) - g * d[k];
                    v.set(k, j, x);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, zero);
        }
    }
    for j in 0..n {
        d[j] = v.at(n - 1, j);
        v.set(n - 1, j, zero);
    }
    v.set(n - 1, n - 1, T::one());
    e[0] = zero;
}

fn tql2<T: Scalar>(v: &mut Dense<T>, d: &mut [T], e: &mut [T], max_iter: usize) -> Result<(), NoConvergence> {
    let n = v.n;
    let zero = T::zero();
    let one = T::one();
    let two = one + one;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = zero;
    let mut f = zero;
    let mut tst1 = zero;
    let eps = T::machine_epsilon();
    let mut iter = 0usize;
    for l in 0..n {
        let t = d[l].abs() + e[l].abs();
        if t > tst1 {
            tst1 = t;
        }
        let mut m = l;
        while m < n - 1 && !(e[m].abs() <= eps * tst1) {
            m += 1;
        }
        if m > l {
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = hypot(p, one);
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..] {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = one;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v.at(k, i + 1);
                        let vki = v.at(k, i);
                        v.set(k, i + 1, s * vki + c * h);
                        v.set(k, i, c * vki - s * h);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(e[l].abs() > eps * tst1) {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = zero;
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(NoConvergence);
    }
    Ok(())
}
