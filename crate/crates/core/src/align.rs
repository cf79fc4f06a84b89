//! Matching of computed eigenpairs to reference eigenpairs and the resulting
//! error metrics. Everything here runs in reference arithmetic.

use std::ops::{Add, Neg, Sub};

use thiserror::Error;

use crate::formats::Reference;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlignError {
    #[error("{side} vector {index} is zero")]
    ZeroColumn { side: &'static str, index: usize },
    #[error("expected {expected} columns, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("non-finite similarity")]
    NonFinite,
}

fn dot(a: &[Reference], b: &[Reference]) -> Reference {
    a.iter().zip(b).fold(Reference::ZERO, |acc, (&x, &y)| acc + x * y)
}

fn norm(a: &[Reference]) -> Reference {
    dot(a, a).sqrt()
}

/// `C[i][j] = |<r_i, s_j>| / (|r_i| |s_j|)`.
pub fn similarity(r: &[Vec<Reference>], s: &[Vec<Reference>]) -> Result<Vec<Vec<Reference>>, AlignError> {
    if r.len() != s.len() {
        return Err(AlignError::Shape {
            expected: r.len(),
            found: s.len(),
        });
    }
    let norms = |side: &'static str, v: &[Vec<Reference>]| -> Result<Vec<Reference>, AlignError> {
        v.iter()
            .enumerate()
            .map(|(index, c)| {
                let n = norm(c);
                if n.is_zero() {
                    Err(AlignError::ZeroColumn { side, index })
                } else if !n.is_finite() {
                    Err(AlignError::NonFinite)
                } else {
                    Ok(n)
                }
            })
            .collect()
    };
    let nr = norms("reference", r)?;
    let ns = norms("computed", s)?;
    Ok(r.iter()
        .zip(&nr)
        .map(|(ri, &a)| s.iter().zip(&ns).map(|(sj, &b)| dot(ri, sj).abs() / (a * b)).collect())
        .collect())
}

/// Values the assignment solver can work with.
pub trait AssignValue: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> {
    fn zero() -> Self;
    fn infinity() -> Self;
}

impl AssignValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn infinity() -> Self {
        f64::INFINITY
    }
}

impl AssignValue for Reference {
    fn zero() -> Self {
        Reference::ZERO
    }
    fn infinity() -> Self {
        Reference::INFINITY
    }
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, O(m^3)). Returns `p` with row `i` matched to column `p[i]`.
pub fn min_cost_assignment<V: AssignValue>(cost: &[Vec<V>]) -> Vec<usize> {
    let m = cost.len();
    // 1-based with a virtual column 0, as in the classical formulation
    let mut u = vec![V::zero(); m + 1];
    let mut v = vec![V::zero(); m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=m {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![V::infinity(); m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = V::infinity();
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if j1 == 0 {
                // only possible with non-finite costs; take the first free column
                j1 = (1..=m).find(|&j| !used[j]).unwrap();
                delta = V::zero();
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] = u[p[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0usize; m];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}

/// Permutation maximizing `sum_i C[i][perm[i]]`, i.e. the minimum-cost
/// assignment on `-C`.
pub fn assign<V: AssignValue>(c: &[Vec<V>]) -> Vec<usize> {
    let neg: Vec<Vec<V>> = c.iter().map(|row| row.iter().map(|&x| -x).collect()).collect();
    min_cost_assignment(&neg)
}

/// Position of the largest-magnitude entry of a reference vector (first on
/// ties) and its sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignAnchor {
    pub index: usize,
    pub negative: bool,
}

pub fn anchor(v: &[Reference]) -> SignAnchor {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    SignAnchor {
        index: best,
        negative: v.get(best).is_some_and(|x| x.is_sign_negative() && !x.is_zero()),
    }
}

pub fn anchors(r: &[Vec<Reference>]) -> Vec<SignAnchor> {
    r.iter().map(|v| anchor(v)).collect()
}

/// Negate each computed column whose anchor entry has the opposite sign to
/// the reference. Returns the applied signs (`1` or `-1`).
pub fn resolve_signs(s: &mut [Vec<Reference>], anchors: &[SignAnchor]) -> Vec<i8> {
    s.iter_mut()
        .zip(anchors)
        .map(|(col, a)| {
            let x = col[a.index];
            let flip = !x.is_zero() && x.is_sign_negative() != a.negative;
            if flip {
                for y in col.iter_mut() {
                    *y = -*y;
                }
                -1
            } else {
                1
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentReport {
    /// Reference pair `i` was matched with computed pair `permutation[i]`.
    pub permutation: Vec<usize>,
    pub signs: Vec<i8>,
    pub eigenvalue_abs_error: Reference,
    pub eigenvalue_rel_error: Reference,
    pub eigenvector_abs_error: Reference,
    pub eigenvector_rel_error: Reference,
}

fn relative(abs: Reference, scale: Reference) -> Reference {
    if abs.is_zero() {
        Reference::ZERO
    } else if scale.is_zero() {
        Reference::INFINITY
    } else {
        abs / scale
    }
}

/// Errors of the first `count` aligned pairs: 2-norm of the value difference
/// and Frobenius norm of the vector difference, each also relative to the
/// reference. A zero reference with a nonzero difference is infinitely wrong.
pub fn truncate_and_measure(
    ref_values: &[Reference],
    ref_vectors: &[Vec<Reference>],
    values: &[Reference],
    vectors: &[Vec<Reference>],
    count: usize,
) -> (Reference, Reference, Reference, Reference) {
    let k = count.min(ref_values.len()).min(values.len());
    let mut dv = Reference::ZERO;
    let mut rv = Reference::ZERO;
    for i in 0..k {
        let d = values[i] - ref_values[i];
        dv = dv + d * d;
        rv = rv + ref_values[i] * ref_values[i];
    }
    let mut dx = Reference::ZERO;
    let mut rx = Reference::ZERO;
    for i in 0..k {
        for (a, b) in ref_vectors[i].iter().zip(&vectors[i]) {
            let d = *b - *a;
            dx = dx + d * d;
            rx = rx + *a * *a;
        }
    }
    let (dv, rv, dx, rx) = (dv.sqrt(), rv.sqrt(), dx.sqrt(), rx.sqrt());
    (dv, relative(dv, rv), dx, relative(dx, rx))
}

/// Full alignment of computed pairs against a reference: similarity,
/// assignment, permutation, sign resolution, truncation to `count` and the
/// error metrics.
pub fn align(
    ref_values: &[Reference],
    ref_vectors: &[Vec<Reference>],
    ref_anchors: &[SignAnchor],
    values: &[Reference],
    vectors: &[Vec<Reference>],
    count: usize,
) -> Result<AlignmentReport, AlignError> {
    let c = similarity(ref_vectors, vectors)?;
    if c.iter().flatten().any(|x| !x.is_finite()) {
        return Err(AlignError::NonFinite);
    }
    let perm = assign(&c);
    let pv: Vec<Reference> = perm.iter().map(|&j| values[j]).collect();
    let mut px: Vec<Vec<Reference>> = perm.iter().map(|&j| vectors[j].clone()).collect();
    let signs = resolve_signs(&mut px, ref_anchors);
    let (va, vr, xa, xr) = truncate_and_measure(ref_values, ref_vectors, &pv, &px, count);
    Ok(AlignmentReport {
        permutation: perm,
        signs,
        eigenvalue_abs_error: va,
        eigenvalue_rel_error: vr,
        eigenvector_abs_error: xa,
        eigenvector_rel_error: xr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn r(v: f64) -> Reference {
        Reference::from_f64(v)
    }

    fn cols(v: &[&[f64]]) -> Vec<Vec<Reference>> {
        v.iter().map(|c| c.iter().map(|&x| r(x)).collect()).collect()
    }

    fn brute_force(c: &[Vec<f64>]) -> f64 {
        (0..c.len())
            .permutations(c.len())
            .map(|p| p.iter().enumerate().map(|(i, &j)| c[i][j]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn similarity_examples() {
        let e = cols(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let c = similarity(&e, &e).unwrap();
        assert_eq!(c, cols(&[&[1.0, 0.0], &[0.0, 1.0]]));
        let neg = cols(&[&[-1.0, 0.0], &[0.0, -1.0]]);
        assert_eq!(similarity(&e, &neg).unwrap(), c);
        let s = 0.5f64.sqrt();
        let c = similarity(&cols(&[&[1.0, 0.0]]), &cols(&[&[s, s]])).unwrap();
        assert!((c[0][0].to_f64() - s).abs() < 1e-15);
        assert!(matches!(
            similarity(&e, &cols(&[&[1.0, 0.0], &[0.0, 0.0]])),
            Err(AlignError::ZeroColumn { side: "computed", index: 1 })
        ));
    }

    #[test]
    fn assign_examples() {
        let id = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(assign(&id), vec![0, 1, 2]);
        let anti = vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]];
        assert_eq!(assign(&anti), vec![2, 1, 0]);
        assert!(assign::<f64>(&[]).is_empty());
    }

    #[test]
    fn assign_in_reference_arithmetic() {
        let c: Vec<Vec<Reference>> = vec![vec![r(0.1), r(0.9)], vec![r(0.8), r(0.3)]];
        assert_eq!(assign(&c), vec![1, 0]);
    }

    #[test]
    fn anchors_break_ties_low() {
        let a = anchor(&[r(0.5), r(-0.5), r(0.1)]);
        assert_eq!(a, SignAnchor { index: 0, negative: false });
        let a = anchor(&[r(0.1), r(-0.7), r(0.7)]);
        assert_eq!(a, SignAnchor { index: 1, negative: true });
    }

    #[test]
    fn sign_examples() {
        let reference = cols(&[&[1.0, 0.2, 0.0], &[0.0, -0.9, 0.1], &[0.3, 0.0, 0.8]]);
        let a = anchors(&reference);
        let mut s = reference.iter().map(|c| c.iter().map(|&x| -x).collect()).collect::<Vec<Vec<_>>>();
        assert_eq!(resolve_signs(&mut s, &a), vec![-1, -1, -1]);
        assert_eq!(s, reference);
        assert_eq!(resolve_signs(&mut s, &a), vec![1, 1, 1]);

        let mut mixed = reference.clone();
        for c in [0usize, 2] {
            for x in mixed[c].iter_mut() {
                *x = -*x;
            }
        }
        assert_eq!(resolve_signs(&mut mixed, &a), vec![-1, 1, -1]);
        assert_eq!(mixed, reference);

        // a zero at the anchor leaves the column alone
        let mut z = cols(&[&[0.0, -1.0, 0.0]]);
        assert_eq!(resolve_signs(&mut z, &[SignAnchor { index: 0, negative: false }]), vec![1]);
    }

    #[test]
    fn measure_examples() {
        let vals = [r(2.0), r(1.0)];
        let vecs = cols(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let (va, vr, xa, xr) = truncate_and_measure(&vals, &vecs, &vals, &vecs, 2);
        assert!(va.is_zero() && vr.is_zero() && xa.is_zero() && xr.is_zero());

        let comp = [r(2.2), r(1.1)];
        let (_, vr, _, _) = truncate_and_measure(&vals, &vecs, &comp, &vecs, 2);
        assert!((vr.to_f64() - 0.1).abs() < 1e-15);

        let (_, vr, _, _) = truncate_and_measure(&[r(0.0)], &vecs, &[r(1.0)], &vecs, 1);
        assert!(vr.is_infinite());
    }

    #[test]
    fn buffer_pairs_are_dropped() {
        let m = 12;
        let vals: Vec<Reference> = (0..m).map(|i| r(12.0 - i as f64)).collect();
        let vecs: Vec<Vec<Reference>> = (0..m)
            .map(|i| (0..m).map(|j| if i == j { r(1.0) } else { r(0.0) }).collect())
            .collect();
        let mut comp = vals.clone();
        comp[10] = r(100.0);
        comp[11] = r(-100.0);
        let rep = align(&vals, &vecs, &anchors(&vecs), &comp, &vecs, 10).unwrap();
        assert!(rep.eigenvalue_abs_error.is_zero());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn hungarian_is_optimal(m in 1usize..=6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let c: Vec<Vec<f64>> = (0..m).map(|_| (0..m).map(|_| rng.random::<f64>()).collect()).collect();
            let p = assign(&c);
            prop_assert_eq!(p.iter().copied().sorted().collect::<Vec<_>>(), (0..m).collect::<Vec<_>>());
            let got: f64 = p.iter().enumerate().map(|(i, &j)| c[i][j]).sum();
            prop_assert!((got - brute_force(&c)).abs() < 1e-12);
        }
    }
}
