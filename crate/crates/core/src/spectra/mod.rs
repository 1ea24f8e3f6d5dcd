//! Spectra and resolvent data: `σ(A0)`, the growth parameter `n_φ`, the level
//! curve `|φ| = 1`, circulant-truncation spectra and the two-sided resolvent
//! norm through the matrix symbol.

mod contour;
mod hypothesis;

pub use contour::{omega_contour, ContourSet, Window};
pub use hypothesis::{hypothesis_check, HypothesisConfig, HypothesisReport, PredictedRate};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::charfun::SystemPair;
use crate::linalg::{c, eye, golden_max, min_singular, re, spectral_norm, CMat};
use crate::ratfun::{rat_derivs_at_zero, Poly, RatFun};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("φ(0) = {0} is not 1")]
    NotNormalized(Complex64),
    #[error("leading order {0} of 1 - |φ(is)|² is odd")]
    OddLeadingOrder(usize),
    #[error("λ = {0} lies on the level set |φ(λ)| = 1")]
    OnLevelSet(Complex64),
    #[error("λ = {0} lies in the spectrum of A0")]
    InSpectrumOfA0(Complex64),
    #[error("grid cell at {0} contains both a pole and a level curve; refine the window")]
    WindowTooCoarse(Complex64),
    #[error("0 is a pole of φ")]
    PoleAtZero,
}

/// Eigenvalues from the complex Schur form.
pub fn eigvals(a: &CMat) -> Result<Vec<Complex64>, SpectraError> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    a.clone()
        .try_schur(f64::EPSILON, 100_000)
        .and_then(|s| s.eigenvalues())
        .map(|v| v.iter().copied().collect())
        .ok_or(SpectraError::NoConvergence)
}

/// Largest distance from a point of `a` to the nearest point of `b`, symmetrized.
pub fn set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

/// Multiset matching distance by greedy nearest pairing; exact when the
/// points are well separated relative to the error.
pub fn matched_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for p in a {
        let mut best = None;
        for (j, q) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (p - q).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Laurent symbol `A0 + e^{-iθ}A1`.
pub fn symbol(system: &SystemPair, theta: f64) -> CMat {
    &system.a0 + &system.a1 * Complex64::from_polar(1.0, -theta)
}

/// Block symbol of mode `j` of the circulant truncation: `A0 + ω_j A1` with `ω_j = e^{2πij/N}`.
pub fn mode_symbol(system: &SystemPair, n: usize, j: usize) -> CMat {
    let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
    &system.a0 + &system.a1 * w
}

/// Eigenvalue of a circulant truncation with the mode it belongs to.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TaggedEig {
    pub value: Complex64,
    pub mode: usize,
}

/// `σ(A_N)` as the union of the mode spectra.
pub fn circulant_spectrum(system: &SystemPair, n: usize) -> Result<Vec<TaggedEig>, SpectraError> {
    let mut out = Vec::with_capacity(n * system.m);
    for j in 0..n {
        for value in eigvals(&mode_symbol(system, n, j))? {
            out.push(TaggedEig { value, mode: j });
        }
    }
    Ok(out)
}

/// Dense `Nm×Nm` circulant truncation `A_N` (for cross-checks).
pub fn circulant_dense(system: &SystemPair, n: usize) -> CMat {
    let m = system.m;
    let mut a = CMat::zeros(n * m, n * m);
    for k in 0..n {
        a.view_mut((k * m, k * m), (m, m)).copy_from(&system.a0);
        let prev = (k + n - 1) % n;
        a.view_mut((k * m, prev * m), (m, m)).copy_from(&system.a1);
    }
    a
}

/// Dense `Nm×Nm` one-sided truncation (block lower bidiagonal).
pub fn onesided_dense(system: &SystemPair, n: usize) -> CMat {
    let m = system.m;
    let mut a = CMat::zeros(n * m, n * m);
    for k in 0..n {
        a.view_mut((k * m, k * m), (m, m)).copy_from(&system.a0);
        if k > 0 {
            a.view_mut((k * m, (k - 1) * m), (m, m)).copy_from(&system.a1);
        }
    }
    a
}

/// Leading behaviour of `1 - |φ(is)|²` at `s = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthParam {
    /// Even order of the first nonvanishing coefficient, if found within `K_max`.
    pub n: Option<usize>,
    /// Coefficient of `s^n` divided by `|p(0)|²`.
    pub leading: f64,
    /// Result of the second-order test `φ''(0) ≠ φ'(0)²`.
    pub second_order_test: bool,
    /// Whether the second-order test agrees with `n == Some(2)`.
    pub consistent: bool,
}

/// Numerator and denominator of `1 - |φ(is)|²` as real-variable polynomials in `s`.
pub fn level_polys(phi: &RatFun) -> (Poly, Poly) {
    let i = c(0.0, 1.0);
    let p1 = phi.den().scale_argument(i);
    let p2 = phi.den().conj_coeffs().scale_argument(-i);
    let q1 = phi.num().scale_argument(i);
    let q2 = phi.num().conj_coeffs().scale_argument(-i);
    let d = &p1 * &p2;
    let num = &d - &(&q1 * &q2);
    (num, d)
}

/// `n_φ` from the Taylor expansion of `1 - |φ(is)|²` at 0.
pub fn growth_param(phi: &RatFun, k_max: usize) -> Result<GrowthParam, SpectraError> {
    let at0 = phi.value(re(0.0));
    if (at0 - re(1.0)).norm() > 1e-10 {
        return Err(SpectraError::NotNormalized(at0));
    }
    let (num, den) = level_polys(phi);
    let scale = (0..=k_max).map(|k| den.coeff(k).norm()).fold(0.0, f64::max);
    let d0 = den.coeff(0).norm();
    let mut n = None;
    for k in 0..=k_max {
        if num.coeff(k).norm() > 1e-9 * scale {
            if k % 2 == 1 {
                return Err(SpectraError::OddLeadingOrder(k));
            }
            n = Some(k);
            break;
        }
    }
    let leading = n.map(|k| num.coeff(k).re / d0).unwrap_or(0.0);
    let d = rat_derivs_at_zero(phi, 2).map_err(|_| SpectraError::PoleAtZero)?;
    let gap = (d[2] - d[1] * d[1]).norm();
    let second_order_test = gap > 1e-9 * (d[2].norm() + d[1].norm_sqr()).max(1e-300);
    Ok(GrowthParam {
        n,
        leading,
        second_order_test,
        consistent: second_order_test == (n == Some(2)),
    })
}

/// `‖R(λ, A0)‖₂`, `‖R A1 R‖₂` and `|φ(λ)|`; the two-sided resolvent norm
/// lies within `‖R‖` of `‖R A1 R‖/(1 - |φ|)` when `|φ(λ)| < 1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResolventBracket {
    pub r_norm: f64,
    pub rar_norm: f64,
    pub phi_abs: f64,
}

impl ResolventBracket {
    pub fn center(&self) -> f64 {
        self.rar_norm / (1.0 - self.phi_abs)
    }
}

pub fn resolvent_bracket(system: &SystemPair, lambda: Complex64) -> Result<ResolventBracket, SpectraError> {
    let shifted = eye(system.m) * lambda - &system.a0;
    let r = shifted
        .try_inverse()
        .ok_or(SpectraError::InSpectrumOfA0(lambda))?;
    let rar = &r * &system.a1 * &r;
    Ok(ResolventBracket {
        r_norm: spectral_norm(&r),
        rar_norm: spectral_norm(&rar),
        phi_abs: system.phi.value(lambda).norm(),
    })
}

/// `sup_θ ‖(λ - A0 - e^{-iθ}A1)^{-1}‖₂`: the ℓ² resolvent norm of the
/// two-sided operator.
pub fn resolvent_norm_twosided(
    system: &SystemPair,
    lambda: Complex64,
    theta_points: usize,
) -> Result<f64, SpectraError> {
    for z in system.spectrum_a0() {
        if (z - lambda).norm() < 1e-12 * (1.0 + z.norm()) {
            return Err(SpectraError::InSpectrumOfA0(lambda));
        }
    }
    let phi = system.phi.value(lambda).norm();
    if (1.0 - phi).abs() < 1e-10 {
        return Err(SpectraError::OnLevelSet(lambda));
    }
    let m = system.m;
    let f = |th: f64| {
        let s = eye(m) * lambda - symbol(system, th);
        let sv = min_singular(&s);
        if sv == 0.0 {
            f64::INFINITY
        } else {
            1.0 / sv
        }
    };
    Ok(sup_on_circle(f, theta_points.max(16)))
}

/// Max of a periodic function: uniform grid, then golden-section around the
/// three best grid points.
pub(crate) fn sup_on_circle(f: impl Fn(f64) -> f64 + Sync, points: usize) -> f64 {
    use rayon::prelude::*;
    let h = 2.0 * std::f64::consts::PI / points as f64;
    let vals: Vec<f64> = (0..points).into_par_iter().map(|k| f(k as f64 * h)).collect();
    let mut idx: Vec<usize> = (0..points).collect();
    idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let mut best = vals[idx[0]];
    for &k in idx.iter().take(3) {
        let t = k as f64 * h;
        let (_, v) = golden_max(&f, t - h, t + h, 60);
        best = best.max(v);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;

    fn robot() -> SystemPair {
        SystemPair::new("robot", from_real_rows(1, &[-1.0]), from_real_rows(1, &[1.0])).unwrap()
    }

    #[test]
    fn scalar_eigvals() {
        assert_eq!(eigvals(&from_real_rows(1, &[-1.0])).unwrap(), vec![re(-1.0)]);
    }

    #[test]
    fn companion_eigvals() {
        let a = from_real_rows(3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -6.0, -11.0, -6.0]);
        let ev = eigvals(&a).unwrap();
        assert!(set_distance(&ev, &[re(-1.0), re(-2.0), re(-3.0)]) < 1e-10);
    }

    #[test]
    fn robot_growth_param() {
        let g = growth_param(&robot().phi, 8).unwrap();
        assert_eq!(g.n, Some(2));
        assert!(g.consistent);
    }

    #[test]
    fn quartic_growth_param() {
        let phi = RatFun::new(Poly::from_real(&[2.0]), Poly::from_real(&[2.0, 2.0, 1.0])).unwrap();
        let g = growth_param(&phi, 8).unwrap();
        assert_eq!(g.n, Some(4));
        // 1 - |φ(is)|² = s⁴/(4 + s⁴)
        assert!((g.leading - 0.25).abs() < 1e-12);
        assert!(!g.second_order_test && g.consistent);
    }

    #[test]
    fn unnormalized_rejected() {
        let phi = RatFun::new(Poly::from_real(&[2.0]), Poly::from_real(&[1.0, 1.0])).unwrap();
        assert!(matches!(growth_param(&phi, 8), Err(SpectraError::NotNormalized(_))));
    }

    #[test]
    fn robot_circulant_spectrum() {
        let sp: Vec<Complex64> = circulant_spectrum(&robot(), 4).unwrap().iter().map(|e| e.value).collect();
        let want = [re(0.0), c(-1.0, 1.0), re(-2.0), c(-1.0, -1.0)];
        assert!(set_distance(&sp, &want) < 1e-15);
    }

    #[test]
    fn robot_resolvent_at_two() {
        let v = resolvent_norm_twosided(&robot(), re(2.0), 1024).unwrap();
        assert!((v - 0.5).abs() < 1e-12, "{v}");
    }

    #[test]
    fn level_set_rejected() {
        assert!(matches!(
            resolvent_norm_twosided(&robot(), re(0.0), 64),
            Err(SpectraError::OnLevelSet(_))
        ));
    }
}
