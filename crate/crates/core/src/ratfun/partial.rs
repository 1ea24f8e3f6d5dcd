use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{cluster_radius, poly_roots, Poly, RatFun, RatFunError};

/// One term `coeff / (λ - pole)^order`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfTerm {
    pub pole: Complex64,
    pub order: usize,
    pub coeff: Complex64,
}

/// Partial-fraction expansion, grouped by pole with orders `1..=n_j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartialFractions {
    pub terms: Vec<PfTerm>,
}

impl PartialFractions {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coeff / (z - t.pole).powu(t.order as u32))
            .sum()
    }

    /// Distinct poles with their maximal order.
    pub fn poles(&self) -> Vec<(Complex64, usize)> {
        let mut out: Vec<(Complex64, usize)> = Vec::new();
        for t in &self.terms {
            match out.iter_mut().find(|(p, _)| *p == t.pole) {
                Some(entry) => entry.1 = entry.1.max(t.order),
                None => out.push((t.pole, t.order)),
            }
        }
        out
    }

    pub fn max_pole_modulus(&self) -> f64 {
        self.terms.iter().map(|t| t.pole.norm()).fold(0.0, f64::max)
    }
}

/// Value of the inverse Laplace transform `g(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceValue {
    pub value: Complex64,
    /// Some term had `Re(ξ)·t < -700` and was flushed to zero.
    pub flushed: bool,
}

/// Expansion of a reduced proper rational function. Coefficients come from
/// the confluent (derivative) formula at each pole; a least-squares solve
/// on sample points replaces it when recombination misses 1e-9.
pub fn partial_fractions(r: &RatFun) -> Result<PartialFractions, RatFunError> {
    check_reduced(r)?;
    let mut terms = Vec::new();
    for pole in r.poles() {
        let nj = pole.multiplicity;
        let mut rest = r.den().clone();
        for _ in 0..nj {
            rest = rest.deflate(pole.value).0;
        }
        let qs = r.num().shift(pole.value);
        let ps = rest.shift(pole.value);
        let h = series_div(&qs, &ps, nj);
        for (rr, hr) in h.into_iter().enumerate() {
            terms.push(PfTerm { pole: pole.value, order: nj - rr, coeff: hr });
        }
    }
    terms.sort_by(|a, b| {
        (a.pole.re, a.pole.im, a.order)
            .partial_cmp(&(b.pole.re, b.pole.im, b.order))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let pf = PartialFractions { terms };
    if recombination_residual(r, &pf) <= 1e-9 {
        return Ok(pf);
    }
    let lsq = least_squares_fit(r, &pf);
    if recombination_residual(r, &lsq) < recombination_residual(r, &pf) {
        Ok(lsq)
    } else {
        Ok(pf)
    }
}

/// `g(t) = Σ A_{j,k} t^{k-1} e^{ξ_j t} / (k-1)!`.
pub fn inverse_laplace_eval(pf: &PartialFractions, t: f64) -> Result<LaplaceValue, RatFunError> {
    let mut flushed = false;
    let mut acc = Complex64::new(0.0, 0.0);
    for term in &pf.terms {
        let expo = term.pole.re * t;
        if expo < -700.0 {
            flushed = true;
            continue;
        }
        if expo > 700.0 {
            return Err(RatFunError::Overflow(t));
        }
        let k = term.order - 1;
        let mut poly = 1.0;
        for i in 1..=k {
            poly *= t / i as f64;
        }
        acc += term.coeff * poly * (term.pole * t).exp();
    }
    Ok(LaplaceValue { value: acc, flushed })
}

fn check_reduced(r: &RatFun) -> Result<(), RatFunError> {
    if r.num().is_zero() || r.num().degree() == 0 {
        return Ok(());
    }
    let num_roots = poly_roots(r.num())?;
    let all: Vec<Complex64> = num_roots
        .iter()
        .map(|z| z.value)
        .chain(r.poles().iter().map(|z| z.value))
        .collect();
    let radius = cluster_radius(&all);
    for nr in &num_roots {
        if r.poles().iter().any(|p| (p.value - nr.value).norm() <= radius) {
            return Err(RatFunError::NotReduced(nr.value));
        }
    }
    Ok(())
}

/// First `n` Taylor coefficients of `a/b` given the Taylor coefficients of both.
fn series_div(a: &Poly, b: &Poly, n: usize) -> Vec<Complex64> {
    let b0 = b.coeff(0);
    let mut out: Vec<Complex64> = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = a.coeff(k);
        for i in 1..=k {
            acc -= b.coeff(i) * out[k - i];
        }
        out.push(acc / b0);
    }
    out
}

fn sample_points(r: &RatFun) -> Vec<Complex64> {
    let rad = 2.0 * (1.0 + r.poles().iter().map(|p| p.value.norm()).fold(0.0, f64::max));
    (0..20)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.37) / 20.0;
            let scale = if k % 2 == 0 { rad } else { 0.6 * rad };
            Complex64::from_polar(scale, th)
        })
        .collect()
}

/// Max relative recombination error over 20 fixed sample points.
pub(crate) fn recombination_residual(r: &RatFun, pf: &PartialFractions) -> f64 {
    sample_points(r)
        .into_iter()
        .map(|z| {
            let want = r.value(z);
            (pf.eval(z) - want).norm() / want.norm().max(1e-300)
        })
        .fold(0.0, f64::max)
}

fn least_squares_fit(r: &RatFun, template: &PartialFractions) -> PartialFractions {
    let pts: Vec<Complex64> = {
        let mut v = sample_points(r);
        let rad = 3.0 * (1.0 + template.max_pole_modulus());
        v.extend((0..40).map(|k| Complex64::from_polar(rad, 0.1 + k as f64 * 0.157)));
        v
    };
    let n = template.terms.len();
    let mut a = DMatrix::<Complex64>::zeros(pts.len(), n);
    let mut b = DVector::<Complex64>::zeros(pts.len());
    for (i, &z) in pts.iter().enumerate() {
        for (j, t) in template.terms.iter().enumerate() {
            a[(i, j)] = (z - t.pole).powu(t.order as u32).inv();
        }
        b[i] = r.value(z);
    }
    let svd = a.svd(true, true);
    let x = svd.solve(&b, 1e-14).unwrap_or_else(|_| DVector::zeros(n));
    PartialFractions {
        terms: template
            .terms
            .iter()
            .zip(x.iter())
            .map(|(t, &coeff)| PfTerm { coeff, ..*t })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use crate::ratfun::rat_reduce;

    #[test]
    fn cover_up_rule() {
        let r = RatFun::new(Poly::from_real(&[1.0]), Poly::from_real(&[2.0, 3.0, 1.0])).unwrap();
        let pf = partial_fractions(&r).unwrap();
        assert_eq!(pf.terms.len(), 2);
        for t in &pf.terms {
            assert_eq!(t.order, 1);
            let want = if (t.pole - re(-1.0)).norm() < 1e-9 { 1.0 } else { -1.0 };
            assert!((t.coeff - re(want)).norm() < 1e-12);
        }
    }

    #[test]
    fn double_pole_single_term() {
        let z = 1.7;
        let r = RatFun::new(Poly::from_real(&[z * z]), Poly::from_real(&[z * z, 2.0 * z, 1.0])).unwrap();
        let pf = partial_fractions(&r).unwrap();
        let top: Vec<_> = pf.terms.iter().filter(|t| t.coeff.norm() > 1e-9).collect();
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].order, 2);
        assert!((top[0].coeff - re(z * z)).norm() < 1e-8);
        assert!((top[0].pole - re(-z)).norm() < 1e-8);
    }

    #[test]
    fn rejects_unreduced_input() {
        let r = RatFun::new(Poly::from_real(&[1.0, 1.0]), Poly::from_real(&[2.0, 3.0, 1.0])).unwrap();
        assert!(matches!(partial_fractions(&r), Err(RatFunError::NotReduced(_))));
        assert!(partial_fractions(&rat_reduce(&r)).is_ok());
    }

    #[test]
    fn robot_inverse_laplace() {
        let r = RatFun::new(Poly::from_real(&[1.0]), Poly::from_real(&[1.0, 1.0])).unwrap();
        let pf = partial_fractions(&r).unwrap();
        let g = inverse_laplace_eval(&pf, 1.0).unwrap();
        assert!((g.value.re - (-1.0f64).exp()).abs() < 1e-15);
        assert!(!g.flushed);
        let far = inverse_laplace_eval(&pf, 800.0).unwrap();
        assert!(far.flushed);
        assert_eq!(far.value, re(0.0));
    }
}
