//! Polynomial roots: companion-matrix eigenvalues polished by Aberth
//! iterations, then grouped into multiplicities.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Poly, RatFunError};

/// A root together with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Clustering radius `1e-8 · (1 + max|root|)`.
pub fn cluster_radius(roots: &[Complex64]) -> f64 {
    1e-8 * (1.0 + roots.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Roots with multiplicities. Fails on constant (or zero) polynomials.
pub fn poly_roots(p: &Poly) -> Result<Vec<Root>, RatFunError> {
    let raw = raw_roots(p)?;
    let clusters = cluster(&raw);
    Ok(clusters
        .into_iter()
        .map(|members| {
            let k = members.len();
            let centroid = members.iter().sum::<Complex64>() / k as f64;
            Root {
                value: polish_multiple(p, centroid, k),
                multiplicity: k,
            }
        })
        .collect())
}

/// All `deg(p)` roots without multiplicity grouping.
pub fn raw_roots(p: &Poly) -> Result<Vec<Complex64>, RatFunError> {
    if p.is_zero() || p.degree() == 0 {
        return Err(RatFunError::DegreeZero);
    }
    let n = p.degree();
    let monic = p.monic();
    if n == 1 {
        return Ok(vec![-monic.coeff(0)]);
    }
    // companion matrix: subdiagonal ones, last column -a_k
    let mut comp = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        comp[(i, n - 1)] = -monic.coeff(i);
    }
    let eig = comp
        .try_schur(1e-15, 10_000)
        .and_then(|s| s.eigenvalues())
        .ok_or(RatFunError::NoConvergence)?;
    let mut roots: Vec<Complex64> = eig.iter().copied().collect();
    aberth_polish(&monic, &mut roots, 30);
    Ok(roots)
}

/// Aberth–Ehrlich refinement; an update is kept only when it lowers |p|.
fn aberth_polish(p: &Poly, roots: &mut [Complex64], iters: usize) {
    let n = roots.len();
    for _ in 0..iters {
        let mut moved = false;
        for k in 0..n {
            let z = roots[k];
            let (v, d) = p.eval_with_derivative(z);
            if v.norm() == 0.0 || d.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let mut s = Complex64::new(0.0, 0.0);
            for (j, &zj) in roots.iter().enumerate() {
                if j != k {
                    let diff = z - zj;
                    if diff.norm() > 0.0 {
                        s += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * s;
            if denom.norm() < 1e-300 {
                continue;
            }
            let cand = z - ratio / denom;
            if cand.re.is_finite() && cand.im.is_finite() && p.eval(cand).norm() < v.norm() {
                if (cand - z).norm() > 1e-16 * (1.0 + z.norm()) {
                    moved = true;
                }
                roots[k] = cand;
            }
        }
        if !moved {
            break;
        }
    }
}

/// Newton on `p^(k-1)`, which has a simple root at a k-fold root of `p`.
fn polish_multiple(p: &Poly, z: Complex64, k: usize) -> Complex64 {
    let mut d = p.clone();
    for _ in 1..k {
        d = d.derivative();
    }
    polish_simple(&d, z)
}

fn polish_simple(p: &Poly, mut z: Complex64) -> Complex64 {
    for _ in 0..5 {
        let (v, d) = p.eval_with_derivative(z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - v / d;
        if p.eval(cand).norm() < v.norm() {
            z = cand;
        } else {
            break;
        }
    }
    z
}

/// Greedy grouping around each seed. A group of `k` roots is accepted when
/// its diameter is at most `2·r_k` with `r_k = max(r_cluster, 1e-14^{1/k}·(1+max|root|))`;
/// a k-fold root computed in double precision spreads over a radius that
/// scales like `eps^{1/k}`.
fn cluster(roots: &[Complex64]) -> Vec<Vec<Complex64>> {
    let scale = 1.0 + roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let base = cluster_radius(roots);
    let radius = |k: usize| base.max(1e-14f64.powf(1.0 / k as f64) * scale);
    let mut left: Vec<Complex64> = roots.to_vec();
    let mut groups = Vec::new();
    while let Some(seed) = left.pop() {
        let mut near: Vec<Complex64> = left.clone();
        near.sort_by(|a, b| (a - seed).norm().total_cmp(&(b - seed).norm()));
        // largest group of nearest neighbours that fits its own radius
        let mut take = 0;
        for s in 1..=near.len() {
            if diameter(&[seed], &near[..s]) <= 2.0 * radius(s + 1) {
                take = s;
            }
        }
        let mut group = vec![seed];
        for z in &near[..take] {
            let pos = left.iter().position(|w| w == z).unwrap();
            group.push(left.swap_remove(pos));
        }
        groups.push(group);
    }
    groups
}

fn diameter(a: &[Complex64], b: &[Complex64]) -> f64 {
    let all: Vec<_> = a.iter().chain(b.iter()).collect();
    let mut d: f64 = 0.0;
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            d = d.max((all[i] - all[j]).norm());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};

    fn sorted(mut r: Vec<Root>) -> Vec<Root> {
        r.sort_by(|a, b| {
            a.value
                .re
                .partial_cmp(&b.value.re)
                .unwrap()
                .then(a.value.im.partial_cmp(&b.value.im).unwrap())
        });
        r
    }

    #[test]
    fn perfect_square() {
        let r = poly_roots(&Poly::from_real(&[1.0, 2.0, 1.0])).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 2);
        assert!((r[0].value - re(-1.0)).norm() < 1e-12);
    }

    #[test]
    fn factored_cubic() {
        // (λ+1)(λ²+2λ+2) = λ³ + 3λ² + 4λ + 2
        let r = sorted(poly_roots(&Poly::from_real(&[2.0, 4.0, 3.0, 1.0])).unwrap());
        assert_eq!(r.len(), 3);
        let want = [c(-1.0, -1.0), re(-1.0), c(-1.0, 1.0)];
        for (got, w) in r.iter().zip(want) {
            assert_eq!(got.multiplicity, 1);
            assert!((got.value - w).norm() < 1e-13, "{got:?} vs {w}");
        }
    }

    #[test]
    fn triple_root_is_grouped() {
        let p = Poly::from_roots(&[re(1.0), re(1.0), re(1.0)]);
        let r = poly_roots(&p).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 3);
        assert!((r[0].value - re(1.0)).norm() < 1e-10);
    }

    #[test]
    fn constant_is_rejected() {
        assert!(matches!(
            poly_roots(&Poly::from_real(&[3.0])),
            Err(RatFunError::DegreeZero)
        ));
    }
}
