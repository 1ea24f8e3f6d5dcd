use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Dense complex polynomial, ascending powers: `coeffs[k]` multiplies `λ^k`.
///
/// Trailing exact zeros are trimmed, so the last stored coefficient is
/// nonzero unless the polynomial is zero (empty coefficient vector).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl From<Vec<Complex64>> for Poly {
    fn from(coeffs: Vec<Complex64>) -> Self {
        Poly::new(coeffs)
    }
}

impl From<Poly> for Vec<Complex64> {
    fn from(p: Poly) -> Self {
        p.coeffs
    }
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|z| *z == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    /// Monic polynomial with the given roots (repeated as listed).
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Poly::constant(Complex64::new(1.0, 0.0));
        for &r in roots {
            p = &p * &Poly::new(vec![-r, Complex64::new(1.0, 0.0)]);
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, x: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Divides through by the leading coefficient.
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.leading().inv())
    }

    /// Coefficient-wise complex conjugate (the polynomial `p*` with `p*(z) = conj(p(conj z))`).
    pub fn conj_coeffs(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// The polynomial `s ↦ p(w s)`.
    pub fn scale_argument(&self, w: Complex64) -> Poly {
        let mut pw = Complex64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            out.push(c * pw);
            pw *= w;
        }
        Poly::new(out)
    }

    /// Taylor coefficients at `x0`: the polynomial `h ↦ p(x0 + h)`.
    pub fn shift(&self, x0: Complex64) -> Poly {
        // repeated synthetic division
        let n = self.coeffs.len();
        let mut a = self.coeffs.clone();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let t = a[j + 1] * x0;
                a[j] += t;
            }
        }
        Poly::new(a)
    }

    /// Synthetic division by `(λ - r)`: returns quotient and remainder.
    pub fn deflate(&self, r: Complex64) -> (Poly, Complex64) {
        if self.coeffs.is_empty() {
            return (Poly::zero(), Complex64::new(0.0, 0.0));
        }
        let n = self.coeffs.len();
        let mut q = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (0..n).rev() {
            acc = acc * r + self.coeffs[k];
            if k > 0 {
                q[k - 1] = acc;
            }
        }
        (Poly::new(q), acc)
    }

    /// True when every coefficient has |imag| ≤ tol·max|coeff|.
    pub fn is_real(&self, tol: f64) -> bool {
        let s = self.max_abs_coeff();
        self.coeffs.iter().all(|c| c.im.abs() <= tol * s)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            match k {
                0 => {}
                1 => write!(f, "·λ")?,
                _ => write!(f, "·λ^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};

    #[test]
    fn trims_trailing_zeros() {
        let p = Poly::new(vec![re(1.0), re(0.0), re(0.0)]);
        assert_eq!(p.degree(), 0);
        assert!(Poly::new(vec![re(0.0)]).is_zero());
    }

    #[test]
    fn shift_matches_direct_expansion() {
        // (λ+1)^2 at λ = -1 + h is h^2
        let p = Poly::from_real(&[1.0, 2.0, 1.0]);
        let s = p.shift(re(-1.0));
        assert!(s.coeff(0).norm() < 1e-15 && s.coeff(1).norm() < 1e-15);
        assert!((s.coeff(2) - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn deflate_exact_root() {
        let p = Poly::from_roots(&[re(-1.0), c(-1.0, 1.0), c(-1.0, -1.0)]);
        let (q, r) = p.deflate(re(-1.0));
        assert!(r.norm() < 1e-14);
        // q = λ^2 + 2λ + 2
        for (k, want) in [2.0, 2.0, 1.0].iter().enumerate() {
            assert!((q.coeff(k) - re(*want)).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_and_horner_agree() {
        let p = Poly::from_real(&[3.0, -1.0, 0.5, 2.0]);
        let x = c(0.3, -0.7);
        let (v, d) = p.eval_with_derivative(x);
        assert!((v - p.eval(x)).norm() < 1e-14);
        assert!((d - p.derivative().eval(x)).norm() < 1e-14);
    }
}
