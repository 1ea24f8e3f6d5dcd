//! Cesàro means, kernel projections, power bounds and the circulant resolvent.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{PNorm, SemigroupError};
use crate::charfun::SystemPair;
use crate::linalg::{eye, re, spectral_norm, CMat, CVec};
use crate::monotone::phi_eps_max;
use crate::ratfun::rat_derivs_at_zero;
use crate::spectra::{mode_symbol, SpectraError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CesaroClass {
    #[serde(rename = "decays-to-0")]
    DecaysToZero,
    #[serde(rename = "O(1/n)")]
    InverseN,
    #[serde(rename = "stagnates")]
    Stagnates,
}

#[derive(Clone, Debug, Serialize)]
pub struct CesaroResult {
    /// `‖v_n‖_p` for `n = 1..=n_max`.
    pub norms: Vec<f64>,
    /// Slope of `log ‖v_n‖` against `log n` over the last decade.
    pub exponent: f64,
    pub class: CesaroClass,
}

fn a1_a0inv(system: &SystemPair) -> Result<CMat, SemigroupError> {
    let inv = system.a0.clone().try_inverse().ok_or(SemigroupError::ZeroInSpectrum)?;
    Ok(&system.a1 * inv)
}

/// `v_n = (1/n) Σ_{k=1}^n φ(0)^k S^k M x0` with `(Mx)_k = A1 A0^{-1} x_k` and
/// `S` the right shift; `x0` is supported on indices `0..x0.len()`.
pub fn cesaro_norms(
    system: &SystemPair,
    x0: &[CVec],
    p: PNorm,
    n_max: usize,
) -> Result<CesaroResult, SemigroupError> {
    if x0.iter().any(|v| v.len() != system.m) || n_max == 0 {
        return Err(SemigroupError::ShapeMismatch);
    }
    let mm = a1_a0inv(system)?;
    let phi0 = system.phi.value(re(0.0));
    let y: Vec<CVec> = x0.iter().map(|v| &mm * v).collect();
    let len = y.len();
    let mut w = vec![CVec::zeros(system.m); len + n_max + 1];
    let mut block_norm = vec![0.0f64; w.len()];
    let mut total = 0.0f64;
    let mut settled_max = 0.0f64;
    let mut power = re(1.0);
    let mut norms = Vec::with_capacity(n_max);
    let contrib = |x: f64| match p {
        PNorm::One => x,
        PNorm::Two => x * x,
        PNorm::Inf => 0.0,
    };
    for n in 1..=n_max {
        power *= phi0;
        for (i, yi) in y.iter().enumerate() {
            let pos = n + i;
            w[pos] += yi * power;
            let new = w[pos].norm();
            total += contrib(new) - contrib(block_norm[pos]);
            block_norm[pos] = new;
        }
        // positions ≤ n no longer change
        settled_max = settled_max.max(block_norm[n]);
        let norm = match p {
            PNorm::One => total,
            PNorm::Two => total.max(0.0).sqrt(),
            PNorm::Inf => block_norm[n..n + len]
                .iter()
                .copied()
                .fold(settled_max, f64::max),
        };
        norms.push(norm / n as f64);
    }
    let lo = (n_max / 10).max(1);
    let exponent = slope(&norms, lo, n_max);
    let ratio = norms[n_max - 1] / norms[lo - 1];
    let class = if exponent <= -0.9 {
        CesaroClass::InverseN
    } else if ratio >= 0.9 {
        CesaroClass::Stagnates
    } else {
        CesaroClass::DecaysToZero
    };
    Ok(CesaroResult { norms, exponent, class })
}

/// Least-squares slope of `log y_n` against `log n` for `n ∈ [lo, hi]`.
fn slope(y: &[f64], lo: usize, hi: usize) -> f64 {
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .filter(|&n| y[n - 1] > 0.0)
        .map(|n| ((n as f64).ln(), y[n - 1].ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[derive(Clone, Debug)]
pub struct KernelProjection {
    /// The repeated block `LQx`.
    pub block: CVec,
    /// `‖A_N P_N x‖₂`.
    pub kernel_residual: f64,
    /// Residual of the least-squares solve on the range basis.
    pub range_residual: f64,
}

impl KernelProjection {
    pub fn sequence(&self, n: usize) -> Vec<CVec> {
        vec![self.block.clone(); n]
    }
}

/// Projection onto `Ker A_N` along `Ran A_N` for the circulant truncation:
/// `P_N x = (LQx, …, LQx)` with `Qx = (1/N) Σ A1 A0^{-1} x_k` and `L` the
/// inverse of `A1 A0^{-1}` from `Ran(A0^{-1} A1)` onto `Ran A1`.
pub fn kernel_projection(system: &SystemPair, x: &[CVec]) -> Result<KernelProjection, SemigroupError> {
    let n = x.len();
    if n == 0 || x.iter().any(|v| v.len() != system.m) {
        return Err(SemigroupError::ShapeMismatch);
    }
    let inv = system.a0.clone().try_inverse().ok_or(SemigroupError::ZeroInSpectrum)?;
    let d = rat_derivs_at_zero(&system.phi, 1).map_err(|_| SemigroupError::ZeroInSpectrum)?;
    if d[1].norm() < 1e-12 {
        return Err(SemigroupError::PhiPrimeZero);
    }
    let mm = &system.a1 * &inv;
    let mut q = CVec::zeros(system.m);
    for v in x {
        q += &mm * v;
    }
    q /= re(n as f64);

    let k = &inv * &system.a1;
    let svd = k.clone().svd(true, false);
    let u = svd.u.ok_or(SemigroupError::RangeInconsistent(f64::INFINITY))?;
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-12 * smax).count();
    let basis = u.columns(0, rank).into_owned();
    let image = &mm * &basis;
    let coef = image
        .clone()
        .svd(true, true)
        .solve(&q, 1e-14)
        .map_err(|_| SemigroupError::RangeInconsistent(f64::INFINITY))?;
    let range_residual = (&image * &coef - &q).norm();
    let qn = q.norm().max(f64::MIN_POSITIVE);
    if range_residual > 1e-9 * qn.max(1e-300) && q.norm() > 0.0 {
        return Err(SemigroupError::RangeInconsistent(range_residual / qn));
    }
    let block = &basis * coef;
    let kernel_residual = (n as f64).sqrt() * ((&system.a0 + &system.a1) * &block).norm();
    Ok(KernelProjection { block, kernel_residual, range_residual })
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerBound {
    pub eps: f64,
    pub n: usize,
    pub p: PNorm,
    /// `max_{k≤n} ‖B^k‖` for each sampled `n` (powers of two and `n_max`).
    pub running_max: Vec<(usize, f64)>,
    pub sup: f64,
    /// The running maximum grew by at most 1% over the last decade.
    pub stable: bool,
}

/// `sup_{n ≤ n_max} ‖B^n‖_p` for `B = εA_N + I` (circulant truncation).
pub fn power_bound_check(
    system: &SystemPair,
    n: usize,
    eps: f64,
    n_max: usize,
    p: PNorm,
) -> Result<PowerBound, SemigroupError> {
    let eps_max = phi_eps_max(&system.phi).map_err(|e| SemigroupError::Unsupported(e.to_string()))?;
    if !(eps > 0.0 && eps < eps_max) {
        return Err(SemigroupError::EpsTooLarge { eps, eps_max });
    }
    let seq: Vec<f64> = match p {
        PNorm::Two => {
            let per_mode: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|j| {
                    let b = eye(system.m) + mode_symbol(system, n, j) * re(eps);
                    let mut pw = eye(system.m);
                    let mut ln_scale = 0.0;
                    let mut out = Vec::with_capacity(n_max);
                    for _ in 0..n_max {
                        pw = &pw * &b;
                        let s = spectral_norm(&pw);
                        if s > 1e100 || (s < 1e-100 && s > 0.0) {
                            pw /= re(s);
                            ln_scale += s.ln();
                            out.push(ln_scale.exp());
                        } else {
                            out.push(s * ln_scale.exp());
                        }
                    }
                    out
                })
                .collect();
            (0..n_max)
                .map(|k| per_mode.iter().map(|v| v[k]).fold(0.0, f64::max))
                .collect()
        }
        _ => {
            if system.m != 1 {
                return Err(SemigroupError::Unsupported(
                    "power bounds for p = 1, ∞ need a scalar block".into(),
                ));
            }
            // first column of B^k; 1- and ∞-norms of a circulant coincide
            let d = re(1.0) + system.a0[(0, 0)] * eps;
            let o = system.a1[(0, 0)] * eps;
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            col[0] = re(1.0);
            let mut out = Vec::with_capacity(n_max);
            for _ in 0..n_max {
                let next: Vec<Complex64> = (0..n).map(|k| d * col[k] + o * col[(k + n - 1) % n]).collect();
                col = next;
                out.push(col.iter().map(|z| z.norm()).sum());
            }
            out
        }
    };
    let mut running = Vec::with_capacity(n_max);
    let mut best = 1.0f64;
    for v in &seq {
        best = best.max(*v);
        running.push(best);
    }
    let tenth = (n_max / 10).max(1);
    let stable = running[n_max - 1] <= 1.01 * running[tenth - 1];
    let mut sampled = Vec::new();
    let mut k = 1;
    while k < n_max {
        sampled.push((k, running[k - 1]));
        k *= 2;
    }
    sampled.push((n_max, running[n_max - 1]));
    Ok(PowerBound { eps, n, p, running_max: sampled, sup: best, stable })
}

/// `(λ − A_N)^{-1} y` for the circulant truncation through
/// `x_k = R y_k + (1 − φ^N)^{-1} Σ_{ℓ<N} φ^ℓ R A1 R y_{k−1−ℓ}` (indices mod `N`).
pub fn circulant_resolvent_apply(
    system: &SystemPair,
    lambda: Complex64,
    y: &[CVec],
) -> Result<Vec<CVec>, SemigroupError> {
    let n = y.len();
    if n == 0 || y.iter().any(|v| v.len() != system.m) {
        return Err(SemigroupError::ShapeMismatch);
    }
    let r = (eye(system.m) * lambda - &system.a0)
        .try_inverse()
        .ok_or(SpectraError::InSpectrumOfA0(lambda))?;
    let phi = system.phi.value(lambda);
    let denom = re(1.0) - phi.powi(n as i32);
    if denom.norm() < 1e-14 {
        return Err(SpectraError::OnLevelSet(lambda).into());
    }
    let rar = &r * &system.a1 * &r;
    let u: Vec<CVec> = y.iter().map(|v| &rar * v).collect();
    let pows: Vec<Complex64> = (0..n).map(|l| phi.powi(l as i32)).collect();
    Ok((0..n)
        .map(|k| {
            let mut acc = CVec::zeros(system.m);
            for (l, w) in pows.iter().enumerate() {
                acc += &u[(k + 2 * n - 1 - l) % n] * *w;
            }
            &r * &y[k] + acc / denom
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_real_rows};
    use crate::spectra::circulant_dense;

    fn robot() -> SystemPair {
        SystemPair::new("robot", from_real_rows(1, &[-1.0]), from_real_rows(1, &[1.0])).unwrap()
    }

    fn platoon() -> SystemPair {
        let a0 = from_real_rows(3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -6.0, -11.0, -6.0]);
        let mut a1 = CMat::zeros(3, 3);
        a1[(0, 1)] = re(-1.0);
        SystemPair::new("platoon", a0, a1).unwrap()
    }

    fn scalar(v: f64) -> CVec {
        CVec::from_element(1, re(v))
    }

    #[test]
    fn robot_unit_stagnates() {
        let r = cesaro_norms(&robot(), &[scalar(1.0)], PNorm::One, 500).unwrap();
        assert!(r.norms.iter().all(|v| *v == 1.0));
        assert_eq!(r.class, CesaroClass::Stagnates);
    }

    #[test]
    fn robot_difference_is_inverse_n() {
        let r = cesaro_norms(&robot(), &[scalar(1.0), scalar(-1.0)], PNorm::One, 500).unwrap();
        for (k, v) in r.norms.iter().enumerate() {
            assert_eq!(*v, 2.0 / (k + 1) as f64);
        }
        assert_eq!(r.class, CesaroClass::InverseN);
    }

    #[test]
    fn robot_projection_is_mean() {
        let x: Vec<CVec> = [1.0, 2.0, 6.0].iter().map(|v| scalar(*v)).collect();
        let p = kernel_projection(&robot(), &x).unwrap();
        assert!((p.block[0] - re(3.0)).norm() < 1e-14);
        assert!(p.kernel_residual < 1e-14);
    }

    #[test]
    fn robot_power_bound_is_one() {
        let r = power_bound_check(&robot(), 16, 0.5, 2000, PNorm::Inf).unwrap();
        assert!((r.sup - 1.0).abs() < 1e-12);
        assert!(r.stable);
    }

    #[test]
    fn resolvent_formula_matches_dense() {
        let s = platoon();
        let n = 7;
        let y: Vec<CVec> = (0..n)
            .map(|k| CVec::from_fn(3, |i, _| c((k + i) as f64 * 0.3 - 1.0, (k * i) as f64 * 0.1)))
            .collect();
        let lam = c(0.7, 0.4);
        let x = circulant_resolvent_apply(&s, lam, &y).unwrap();
        let a = circulant_dense(&s, n);
        let flat = CVec::from_iterator(3 * n, y.iter().flat_map(|v| v.iter().copied()));
        let dense = (eye(3 * n) * lam - a).lu().solve(&flat).unwrap();
        let got = CVec::from_iterator(3 * n, x.iter().flat_map(|v| v.iter().copied()));
        assert!((got - &dense).norm() <= 1e-10 * dense.norm());
    }
}
