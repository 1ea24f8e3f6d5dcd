//! Characteristic function of a coupled pair `(A0, A1)`: the scalar rational
//! `φ` with `A1·R(λ, A0)·A1 = φ(λ)·A1`, read off the adjugate polynomial of
//! `λI - A0`.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{c, eye, frob_inner, frobenius, re, solve, trace, CMat};
use crate::ratfun::{rat_reduce, Poly, RatFun, RatFunError};
use crate::spectra::eigvals;

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharFunError {
    #[error("A1 is the zero matrix")]
    ZeroA1,
    #[error("no characteristic function: A1·M_{k}·A1 is not proportional to A1 (relative residual {residual:.3e})")]
    NoCharacteristicFunction { k: usize, residual: f64 },
    #[error("A0 and A1 must be square matrices of equal size (got {0}x{1} and {2}x{3})")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error(transparent)]
    RatFun(#[from] RatFunError),
}

/// A coupled pair together with its characteristic data.
#[derive(Clone, Debug)]
pub struct SystemPair {
    pub label: String,
    pub m: usize,
    pub a0: CMat,
    pub a1: CMat,
    /// Monic characteristic polynomial of `A0`.
    pub p0: Poly,
    /// Reduced characteristic function.
    pub phi: RatFun,
    /// Free-form notes attached by constructors (e.g. a literal sign choice).
    pub flags: Vec<String>,
}

impl SystemPair {
    pub fn new(label: impl Into<String>, a0: CMat, a1: CMat) -> Result<Self, CharFunError> {
        Self::with_tol(label, a0, a1, DEFAULT_TOL)
    }

    pub fn with_tol(
        label: impl Into<String>,
        a0: CMat,
        a1: CMat,
        tol: f64,
    ) -> Result<Self, CharFunError> {
        check_shapes(&a0, &a1)?;
        let (_, p0) = adjugate_polynomial(&a0);
        let phi = extract_phi(&a0, &a1, tol)?;
        Ok(SystemPair {
            label: label.into(),
            m: a0.nrows(),
            a0,
            a1,
            p0,
            phi,
            flags: Vec::new(),
        })
    }

    /// True when both matrices have (numerically) real entries.
    pub fn is_real(&self) -> bool {
        self.a0.iter().chain(self.a1.iter()).all(|z| z.im == 0.0)
    }

    pub fn spectrum_a0(&self) -> Vec<Complex64> {
        eigvals(&self.a0).unwrap_or_default()
    }

    pub fn spectral_radius_a0(&self) -> f64 {
        self.spectrum_a0().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn check_shapes(a0: &CMat, a1: &CMat) -> Result<(), CharFunError> {
    if a0.nrows() != a0.ncols()
        || a1.nrows() != a1.ncols()
        || a0.nrows() != a1.nrows()
        || a0.nrows() == 0
    {
        return Err(CharFunError::ShapeMismatch(a0.nrows(), a0.ncols(), a1.nrows(), a1.ncols()));
    }
    if !crate::linalg::all_finite(a0) || !crate::linalg::all_finite(a1) {
        return Err(CharFunError::NonFinite);
    }
    Ok(())
}

/// Faddeev–LeVerrier: `adj(λI - A0) = Σ λ^k M_k` and the monic `p0`.
pub fn adjugate_polynomial(a0: &CMat) -> (Vec<CMat>, Poly) {
    let m = a0.nrows();
    let mut mats = vec![CMat::zeros(m, m); m];
    let mut coeffs = vec![re(0.0); m + 1];
    coeffs[m] = re(1.0);
    mats[m - 1] = eye(m);
    for j in 1..=m {
        let k = m - j;
        let am = a0 * &mats[k];
        coeffs[k] = -trace(&am) / j as f64;
        if k > 0 {
            mats[k - 1] = am + eye(m) * coeffs[k];
        }
    }
    (mats, Poly::new(coeffs))
}

/// `φ = q/p0` with `q_k = <A1 M_k A1, A1>_F / ||A1||_F²`, after checking
/// that every `A1 M_k A1` is proportional to `A1`.
///
/// The residual test is `||B_k - q_k A1||_F ≤ tol·||A1||_F²·(1 + ||M_k||_F)`;
/// `B_k` is quadratic in `A1`, so the bound carries the square.
pub fn extract_phi(a0: &CMat, a1: &CMat, tol: f64) -> Result<RatFun, CharFunError> {
    check_shapes(a0, a1)?;
    let n1 = frobenius(a1);
    if n1 == 0.0 {
        return Err(CharFunError::ZeroA1);
    }
    let n1sq = n1 * n1;
    let (mats, p0) = adjugate_polynomial(a0);
    let mut q = Vec::with_capacity(mats.len());
    for (k, mk) in mats.iter().enumerate() {
        let bk = a1 * mk * a1;
        let qk = frob_inner(&bk, a1) / n1sq;
        let resid = frobenius(&(bk - a1 * qk));
        let bound = tol * n1sq * (1.0 + frobenius(mk));
        if resid > bound {
            return Err(CharFunError::NoCharacteristicFunction {
                k,
                residual: resid / (n1sq * (1.0 + frobenius(mk))),
            });
        }
        q.push(qk);
    }
    let real = a0.iter().chain(a1.iter()).all(|z| z.im == 0.0);
    let qmax = q.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let clean = |z: Complex64, scale: f64| {
        let z = if real { re(z.re) } else { z };
        if z.norm() <= 1e-13 * scale {
            re(0.0)
        } else {
            z
        }
    };
    let q: Vec<Complex64> = q.into_iter().map(|z| clean(z, qmax)).collect();
    let pmax = p0.max_abs_coeff();
    let p: Vec<Complex64> = p0
        .coeffs()
        .iter()
        .map(|&z| if real { c(z.re, 0.0) } else { z })
        .map(|z| if z.norm() <= 1e-15 * pmax { re(0.0) } else { z })
        .collect();
    let r = RatFun::new(Poly::new(q), Poly::new(p))?;
    Ok(rat_reduce(&r))
}

/// Sample points on the circle of radius `2(1 + ρ(A0))`.
pub fn verify_points(system: &SystemPair, samples: usize) -> Vec<Complex64> {
    let radius = 2.0 * (1.0 + system.spectral_radius_a0());
    (0..samples)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / samples as f64 + 0.1;
            Complex64::from_polar(radius, th)
        })
        .collect()
}

/// Max over samples of `||A1 Z - φ(λ)A1||_F / (||A1||_F·max(1, |φ(λ)|))`
/// where `(λI - A0)Z = A1` is solved densely.
pub fn verify_char(system: &SystemPair, samples: usize) -> f64 {
    verify_char_with(system, samples, |z| system.phi.value(z))
}

/// [`verify_char`] against an arbitrary candidate for `φ`.
pub fn verify_char_with(
    system: &SystemPair,
    samples: usize,
    phi: impl Fn(Complex64) -> Complex64,
) -> f64 {
    let m = system.m;
    let n1 = frobenius(&system.a1);
    verify_points(system, samples)
        .into_iter()
        .map(|lam| {
            let shifted = eye(m) * lam - &system.a0;
            match solve(&shifted, &system.a1) {
                Some(z) => {
                    let f = phi(lam);
                    let lhs = &system.a1 * z;
                    frobenius(&(lhs - &system.a1 * f)) / (n1 * f.norm().max(1.0))
                }
                None => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;
    use crate::ratfun::rat_derivs_at_zero;

    #[test]
    fn scalar_adjugate() {
        let (mats, p0) = adjugate_polynomial(&from_real_rows(1, &[-1.0]));
        assert_eq!(mats.len(), 1);
        assert_eq!(mats[0][(0, 0)], re(1.0));
        assert_eq!(p0, Poly::from_real(&[1.0, 1.0]));
    }

    #[test]
    fn identity_adjugate() {
        let (mats, p0) = adjugate_polynomial(&eye(3));
        // (λ-1)^3 and adj = (λ-1)^2 I = λ² I - 2λ I + I
        for (k, w) in [-1.0, 3.0, -3.0, 1.0].iter().enumerate() {
            assert!((p0.coeff(k) - re(*w)).norm() < 1e-14);
        }
        for (k, w) in [1.0, -2.0, 1.0].iter().enumerate() {
            assert!((&mats[k] - eye(3) * re(*w)).norm() < 1e-14);
        }
    }

    #[test]
    fn robot_phi() {
        let s = SystemPair::new("robot", from_real_rows(1, &[-1.0]), from_real_rows(1, &[1.0])).unwrap();
        assert_eq!(s.phi.num(), &Poly::from_real(&[1.0]));
        assert_eq!(s.phi.den(), &Poly::from_real(&[1.0, 1.0]));
        assert!(verify_char(&s, 20) <= 1e-12);
    }

    #[test]
    fn full_rank_identity_coupling_fails() {
        let a0 = from_real_rows(2, &[0.0, 1.0, -1.0, -1.0]);
        let err = extract_phi(&a0, &eye(2), DEFAULT_TOL).unwrap_err();
        assert!(matches!(err, CharFunError::NoCharacteristicFunction { .. }));
        // oracle: A1 R(λ) A1 = R(λ) is not a multiple of I at two points
        for lam in [re(1.0), c(0.0, 2.0)] {
            let r = solve(&(eye(2) * lam - &a0), &eye(2)).unwrap();
            assert!(r[(0, 1)].norm() > 0.1);
        }
    }

    #[test]
    fn zero_coupling_rejected() {
        let err = extract_phi(&eye(2), &CMat::zeros(2, 2), DEFAULT_TOL).unwrap_err();
        assert_eq!(err, CharFunError::ZeroA1);
    }

    #[test]
    fn perturbed_phi_is_detected() {
        let s = SystemPair::new("robot", from_real_rows(1, &[-1.0]), from_real_rows(1, &[1.0])).unwrap();
        let r = verify_char_with(&s, 20, |z| s.phi.value(z) + 0.1);
        assert!(r >= 0.05, "{r}");
    }

    #[test]
    fn derivative_identity_at_zero() {
        // platoon α = (6, 11, 6)
        let a0 = from_real_rows(3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -6.0, -11.0, -6.0]);
        let mut a1 = CMat::zeros(3, 3);
        a1[(0, 1)] = re(-1.0);
        let s = SystemPair::new("platoon", a0.clone(), a1.clone()).unwrap();
        let d = rat_derivs_at_zero(&s.phi, 1).unwrap();
        let inv = a0.clone().try_inverse().unwrap();
        let lhs = -(&a1 * &inv * &inv * &a1);
        let rhs = &a1 * d[1];
        assert!(frobenius(&(lhs - &rhs)) <= 1e-9 * frobenius(&rhs));
    }
}
