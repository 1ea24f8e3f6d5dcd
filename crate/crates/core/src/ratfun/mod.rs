//! Complex polynomials and proper rational functions: evaluation, roots,
//! Taylor data at the origin, pole cancellation, partial fractions and the
//! closed-form inverse Laplace transform of a partial-fraction expansion.

mod partial;
mod poly;
mod roots;

pub use partial::{inverse_laplace_eval, partial_fractions, LaplaceValue, PartialFractions, PfTerm};
pub use poly::Poly;
pub use roots::{cluster_radius, poly_roots, raw_roots, Root};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RatFunError {
    #[error("polynomial has degree zero; it has no roots")]
    DegreeZero,
    #[error("evaluation point {0} lies within 1e-12 of a pole")]
    NearPole(Complex64),
    #[error("numerator and denominator still share a root near {0}")]
    NotReduced(Complex64),
    #[error("rational function must satisfy deg(num) < deg(den)")]
    ImproperFraction,
    #[error("eigenvalue iteration for the companion matrix did not converge")]
    NoConvergence,
    #[error("exponential overflow in inverse Laplace evaluation at t = {0}")]
    Overflow(f64),
}

/// Proper rational function `num/den` with monic denominator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatFun {
    num: Poly,
    den: Poly,
    reduced: bool,
    poles: Vec<Root>,
}

impl RatFun {
    /// Normalizes `den` to be monic and caches its roots.
    pub fn new(num: Poly, den: Poly) -> Result<Self, RatFunError> {
        if den.is_zero() || den.degree() == 0 {
            return Err(RatFunError::ImproperFraction);
        }
        if !num.is_zero() && num.degree() >= den.degree() {
            return Err(RatFunError::ImproperFraction);
        }
        let lead = den.leading();
        let num = num.scale(lead.inv());
        let den = den.monic();
        let poles = poly_roots(&den)?;
        Ok(RatFun { num, den, reduced: false, poles })
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    /// Poles with multiplicity (roots of the denominator).
    pub fn poles(&self) -> &[Root] {
        &self.poles
    }

    /// Evaluation without the pole-distance check.
    pub fn value(&self, z: Complex64) -> Complex64 {
        self.num.eval(z) / self.den.eval(z)
    }

    /// True when all coefficients are real to `tol` relative.
    pub fn has_real_coeffs(&self, tol: f64) -> bool {
        self.num.is_real(tol) && self.den.is_real(tol)
    }

    /// `φ*(z) = conj(φ(conj z))`.
    pub fn conj_coeffs(&self) -> RatFun {
        RatFun {
            num: self.num.conj_coeffs(),
            den: self.den.conj_coeffs(),
            reduced: self.reduced,
            poles: self
                .poles
                .iter()
                .map(|r| Root { value: r.value.conj(), multiplicity: r.multiplicity })
                .collect(),
        }
    }
}

/// `q(λ)/p(λ)` by Horner; fails within 1e-12 (relative) of a pole.
pub fn rat_eval(r: &RatFun, z: Complex64) -> Result<Complex64, RatFunError> {
    for pole in &r.poles {
        if (z - pole.value).norm() < 1e-12 * (1.0 + pole.value.norm()) {
            return Err(RatFunError::NearPole(z));
        }
    }
    Ok(r.value(z))
}

/// `[φ(0), φ'(0), …, φ^(K)(0)]` from the Taylor series of `q/p` at 0.
pub fn rat_derivs_at_zero(r: &RatFun, k_max: usize) -> Result<Vec<Complex64>, RatFunError> {
    let p0 = r.den.coeff(0);
    if p0.norm() < 1e-12 * r.den.max_abs_coeff() {
        return Err(RatFunError::NearPole(Complex64::new(0.0, 0.0)));
    }
    let mut series: Vec<Complex64> = Vec::with_capacity(k_max + 1);
    for n in 0..=k_max {
        let mut acc = r.num.coeff(n);
        for k in 1..=n.min(r.den.degree()) {
            acc -= r.den.coeff(k) * series[n - k];
        }
        series.push(acc / p0);
    }
    // the zeroth entry must be bit-identical to rat_eval at 0
    series[0] = r.value(Complex64::new(0.0, 0.0));
    let mut fact = 1.0;
    Ok(series
        .into_iter()
        .enumerate()
        .map(|(n, c)| {
            if n > 0 {
                fact *= n as f64;
            }
            c * fact
        })
        .collect())
}

/// Cancels common roots of numerator and denominator (within the clustering
/// radius) and sets the reduced flag. Idempotent.
pub fn rat_reduce(r: &RatFun) -> RatFun {
    if r.num.is_zero() || r.num.degree() == 0 {
        let mut out = r.clone();
        out.reduced = true;
        return out;
    }
    let num_roots = match poly_roots(&r.num) {
        Ok(v) => v,
        Err(_) => {
            let mut out = r.clone();
            out.reduced = true;
            return out;
        }
    };
    let all: Vec<Complex64> = num_roots
        .iter()
        .map(|z| z.value)
        .chain(r.poles.iter().map(|z| z.value))
        .collect();
    let radius = cluster_radius(&all);

    let mut num = r.num.clone();
    let mut den = r.den.clone();
    let mut cancelled = false;
    for nr in &num_roots {
        if let Some(pole) = r
            .poles
            .iter()
            .find(|pole| (pole.value - nr.value).norm() <= radius)
        {
            let k = nr.multiplicity.min(pole.multiplicity);
            for _ in 0..k {
                num = num.deflate(nr.value).0;
                den = den.deflate(pole.value).0;
            }
            cancelled = true;
        }
    }
    if !cancelled {
        let mut out = r.clone();
        out.reduced = true;
        return out;
    }
    let mut out = match RatFun::new(num, den) {
        Ok(v) => v,
        // den cancelled down to a constant only when num was a multiple of it,
        // which cannot happen for a proper fraction
        Err(_) => r.clone(),
    };
    out.reduced = true;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};

    fn robot() -> RatFun {
        RatFun::new(Poly::from_real(&[1.0]), Poly::from_real(&[1.0, 1.0])).unwrap()
    }

    #[test]
    fn robot_eval() {
        let v = rat_eval(&robot(), re(1.0)).unwrap();
        assert!((v - re(0.5)).norm() < 1e-15);
    }

    #[test]
    fn near_pole_is_rejected() {
        assert!(matches!(
            rat_eval(&robot(), re(-1.0 + 1e-14)),
            Err(RatFunError::NearPole(_))
        ));
    }

    #[test]
    fn derivatives_of_geometric_series() {
        let d = rat_derivs_at_zero(&robot(), 3).unwrap();
        let want = [1.0, -1.0, 2.0, -6.0];
        for (g, w) in d.iter().zip(want) {
            assert!((g - re(w)).norm() < 1e-13);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        // platoon_pair(1,1,1): 2/((λ+1)(λ²+2λ+2))
        let r = RatFun::new(Poly::from_real(&[2.0]), Poly::from_real(&[2.0, 4.0, 3.0, 1.0])).unwrap();
        let d = rat_derivs_at_zero(&r, 3).unwrap();
        let h = 1e-4;
        let f = |x: f64| r.value(re(x)).re;
        let fd1 = (f(h) - f(-h)) / (2.0 * h);
        let fd2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        let fd3 = (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h * h * h);
        assert!((d[1].re - fd1).abs() <= 1e-6 * d[1].re.abs());
        assert!((d[2].re - fd2).abs() <= 1e-6 * d[2].re.abs().max(1.0));
        // third difference carries O(h²)+roundoff/h³ error
        assert!((d[3].re - fd3).abs() <= 1e-3 * d[3].re.abs().max(1.0));
    }

    #[test]
    fn reduce_cancels_common_factor() {
        let r = RatFun::new(Poly::from_real(&[1.0, 1.0]), Poly::from_real(&[2.0, 3.0, 1.0])).unwrap();
        let red = rat_reduce(&r);
        assert!(red.is_reduced());
        assert_eq!(red.den().degree(), 1);
        assert_eq!(red.num().degree(), 0);
        assert!((red.den().coeff(0) - re(2.0)).norm() < 1e-12);
        assert!((red.num().coeff(0) - re(1.0)).norm() < 1e-12);
    }

    #[test]
    fn reduce_respects_cluster_radius() {
        let mk = |delta: f64| {
            let num = Poly::from_roots(&[re(-1.0 - delta)]);
            let den = Poly::from_roots(&[re(-1.0), re(-2.0), c(-0.5, 1.0)]);
            rat_reduce(&RatFun::new(num, den).unwrap())
        };
        assert_eq!(mk(1e-13).den().degree(), 2);
        assert_eq!(mk(1e-3).den().degree(), 3);
    }

    #[test]
    fn reduce_is_idempotent() {
        let r = RatFun::new(Poly::from_real(&[1.0, 1.0]), Poly::from_real(&[2.0, 3.0, 1.0])).unwrap();
        let once = rat_reduce(&r);
        let twice = rat_reduce(&once);
        assert_eq!(once.num(), twice.num());
        assert_eq!(once.den(), twice.den());
    }
}
