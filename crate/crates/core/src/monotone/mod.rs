//! Complete and total monotonicity of a characteristic function.
//!
//! Complete monotonicity is decided on the inverse Laplace transform `g`
//! (nonnegative iff CM). Total monotonicity is decided on the coefficients
//! `a_{ε,n}` of `φ((μ-1)/ε) = Σ a_n μ^{-(n+1)}`, which for a partial-fraction
//! expansion `Σ A_{j,k}/(λ-ξ_j)^k` read
//! `a_n = Σ A_{j,k} C(n,k-1) ε^k (εξ_j+1)^{n-k+1}`.

pub mod quad;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{golden_min, log_grid, re};
use crate::ratfun::{
    inverse_laplace_eval, partial_fractions, rat_reduce, PartialFractions, RatFun, RatFunError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonotoneError {
    #[error("pole {0} is not in the open left half-plane")]
    PoleInRightHalfPlane(Complex64),
    #[error("inverse Laplace transform is not real (relative imaginary part {0:.3e})")]
    NonRealOnAxis(f64),
    #[error("ε = {eps} is not in (0, {eps_max})")]
    EpsTooLarge { eps: f64, eps_max: f64 },
    #[error(transparent)]
    RatFun(#[from] RatFunError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MonoKind {
    CM,
    TM,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Certified,
    Refuted,
    RefutedAtTestedEps,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Witness {
    /// `g(t) < 0`.
    Cm { t: f64, g: f64 },
    /// `a_{ε,n} < 0`.
    Tm { eps: f64, n: usize, a: f64 },
}

/// Sign of an asymptotic regime of `g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AsymptoticSign {
    Positive,
    /// The leading part is a nonnegative trigonometric sum touching zero and
    /// carries every pole, so `g = e^{σt}·h(t)` exactly.
    NonNegativeExact,
    Negative,
    Indeterminate,
}

impl AsymptoticSign {
    fn ok(self) -> bool {
        matches!(self, AsymptoticSign::Positive | AsymptoticSign::NonNegativeExact)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CmEvidence {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: usize,
    pub samples: usize,
    pub g_min: f64,
    pub t_at_min: f64,
    pub g_max_abs: f64,
    pub imag_rel: f64,
    pub small_t: AsymptoticSign,
    pub large_t: AsymptoticSign,
}

#[derive(Clone, Debug, Serialize)]
pub struct TmEpsReport {
    pub eps: f64,
    pub n_checked: usize,
    pub min_a: f64,
    pub n_at_min: usize,
    pub scale: f64,
    pub tail_dominant_real: bool,
    pub n_star: Option<usize>,
    pub certified: bool,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TmEvidence {
    pub n: usize,
    pub eps_max: f64,
    pub per_eps: Vec<TmEpsReport>,
}

#[derive(Clone, Debug, Serialize)]
pub enum Evidence {
    Cm(CmEvidence),
    Tm(TmEvidence),
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotoneCertificate {
    pub kind: MonoKind,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub evidence: Evidence,
}

impl MonotoneCertificate {
    /// ε at which a TM certificate was obtained.
    pub fn certified_eps(&self) -> Option<f64> {
        match &self.evidence {
            Evidence::Tm(tm) => tm.per_eps.iter().find(|r| r.certified).map(|r| r.eps),
            Evidence::Cm(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CmGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: usize,
}

impl Default for CmGrid {
    fn default() -> Self {
        CmGrid { t_min: 1e-3, t_max: 1e3, points_per_decade: 200 }
    }
}

pub const DEFAULT_TM_N: usize = 400;

fn reduced(phi: &RatFun) -> RatFun {
    if phi.is_reduced() {
        phi.clone()
    } else {
        rat_reduce(phi)
    }
}

fn check_poles(phi: &RatFun) -> Result<(), MonotoneError> {
    for p in phi.poles() {
        if p.value.re >= 0.0 {
            return Err(MonotoneError::PoleInRightHalfPlane(p.value));
        }
    }
    Ok(())
}

/// PF terms with nonnegligible coefficients.
fn significant(pf: &PartialFractions) -> PartialFractions {
    let amax = pf.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
    PartialFractions {
        terms: pf
            .terms
            .iter()
            .filter(|t| t.coeff.norm() > 1e-13 * amax)
            .copied()
            .collect(),
    }
}

/// `g(t)`, real part.
pub fn g_value(pf: &PartialFractions, t: f64) -> Result<Complex64, MonotoneError> {
    Ok(inverse_laplace_eval(pf, t)?.value)
}

pub fn cm_certify(phi: &RatFun, grid: CmGrid) -> Result<MonotoneCertificate, MonotoneError> {
    let phi = reduced(phi);
    check_poles(&phi)?;
    let cert = |verdict, witness, ev| MonotoneCertificate {
        kind: MonoKind::CM,
        verdict,
        witness,
        evidence: Evidence::Cm(ev),
    };
    if phi.num().is_zero() {
        let ev = CmEvidence {
            t_min: grid.t_min,
            t_max: grid.t_max,
            points_per_decade: grid.points_per_decade,
            samples: 0,
            g_min: 0.0,
            t_at_min: grid.t_min,
            g_max_abs: 0.0,
            imag_rel: 0.0,
            small_t: AsymptoticSign::NonNegativeExact,
            large_t: AsymptoticSign::NonNegativeExact,
        };
        return Ok(cert(Verdict::Certified, None, ev));
    }
    let pf = significant(&partial_fractions(&phi)?);
    let ts = log_grid(grid.t_min, grid.t_max, grid.points_per_decade);
    let vals: Vec<Complex64> = ts
        .par_iter()
        .map(|&t| g_value(&pf, t))
        .collect::<Result<_, _>>()?;
    let gmax = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let imax = vals.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let imag_rel = if gmax > 0.0 { imax / gmax } else { 0.0 };
    if imag_rel > 1e-10 {
        return Err(MonotoneError::NonRealOnAxis(imag_rel));
    }
    let g: Vec<f64> = vals.iter().map(|z| z.re).collect();

    let mut minima: Vec<usize> = (0..g.len())
        .filter(|&i| {
            (i == 0 || g[i] <= g[i - 1]) && (i + 1 == g.len() || g[i] <= g[i + 1])
        })
        .collect();
    minima.sort_by(|&a, &b| g[a].total_cmp(&g[b]));
    minima.truncate(32);
    let mut best = (ts[minima[0]], g[minima[0]]);
    for &i in &minima {
        let lo = ts[i.saturating_sub(1)];
        let hi = ts[(i + 1).min(ts.len() - 1)];
        if hi > lo {
            let (t, v) = golden_min(|t| g_value(&pf, t).map(|z| z.re).unwrap_or(0.0), lo, hi, 60);
            if v < best.1 {
                best = (t, v);
            }
        }
        if g[i] < best.1 {
            best = (ts[i], g[i]);
        }
    }
    let small_t = small_t_sign(&phi);
    let large_t = large_t_sign(&pf);
    let ev = CmEvidence {
        t_min: grid.t_min,
        t_max: grid.t_max,
        points_per_decade: grid.points_per_decade,
        samples: ts.len(),
        g_min: best.1,
        t_at_min: best.0,
        g_max_abs: gmax,
        imag_rel,
        small_t,
        large_t,
    };
    if best.1 < -1e-10 * gmax {
        let w = Witness::Cm { t: best.0, g: best.1 };
        return Ok(cert(Verdict::Refuted, Some(w), ev));
    }
    if best.1 >= -1e-12 * gmax && small_t.ok() && large_t.ok() {
        return Ok(cert(Verdict::Certified, None, ev));
    }
    Ok(cert(Verdict::Inconclusive, None, ev))
}

/// `g(t) ~ q_e t^{d-e-1}/(d-e-1)!` as `t → 0⁺`, with `q_e` the leading
/// numerator coefficient (denominator monic).
fn small_t_sign(phi: &RatFun) -> AsymptoticSign {
    let qmax = phi.num().max_abs_coeff();
    let lead = phi
        .num()
        .coeffs()
        .iter()
        .rev()
        .find(|z| z.norm() > 1e-12 * qmax)
        .copied()
        .unwrap_or_default();
    if lead.im.abs() > 1e-10 * lead.norm() {
        AsymptoticSign::Indeterminate
    } else if lead.re > 0.0 {
        AsymptoticSign::Positive
    } else {
        AsymptoticSign::Negative
    }
}

/// Sign of the slowest-decaying group of terms as `t → ∞`.
fn large_t_sign(pf: &PartialFractions) -> AsymptoticSign {
    let sigma = pf.terms.iter().map(|t| t.pole.re).fold(f64::NEG_INFINITY, f64::max);
    let in_group = |p: Complex64| p.re >= sigma - 1e-9 * (1.0 + sigma.abs());
    let group: Vec<_> = pf.terms.iter().filter(|t| in_group(t.pole)).collect();
    let k = group.iter().map(|t| t.order).max().unwrap_or(1);
    let top: Vec<_> = group.iter().filter(|t| t.order == k).collect();
    let freqs: Vec<f64> = top.iter().map(|t| t.pole.im).collect();
    let h = |t: f64| -> f64 {
        top.iter()
            .map(|term| (term.coeff * Complex64::from_polar(1.0, term.pole.im * t)).re)
            .sum()
    };
    if freqs.iter().all(|w| w.abs() <= 1e-12 * (1.0 + sigma.abs())) {
        let v = h(0.0);
        return if v > 0.0 { AsymptoticSign::Positive } else { AsymptoticSign::Negative };
    }
    let wmin = freqs
        .iter()
        .map(|w| w.abs())
        .filter(|w| *w > 1e-12)
        .fold(f64::INFINITY, f64::min);
    let span = 40.0 * 2.0 * std::f64::consts::PI / wmin;
    let samples = 20_000;
    let vals: Vec<f64> = (0..samples).map(|i| h(span * i as f64 / samples as f64)).collect();
    let hmax = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let hmin = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let all_poles_in_group = pf.terms.iter().all(|t| in_group(t.pole) && t.order == 1);
    if hmin > 1e-9 * hmax {
        AsymptoticSign::Positive
    } else if hmin >= -1e-12 * hmax && all_poles_in_group {
        AsymptoticSign::NonNegativeExact
    } else if hmin < -1e-9 * hmax {
        AsymptoticSign::Negative
    } else {
        AsymptoticSign::Indeterminate
    }
}

/// `min_j(-2 Re ξ_j / |ξ_j|²)`: the supremum of `ε` with `|εξ_j + 1| < 1` for all poles.
pub fn eps_max(poles: &[Complex64]) -> Result<f64, MonotoneError> {
    let mut best = f64::INFINITY;
    for &p in poles {
        if p.re >= 0.0 {
            return Err(MonotoneError::PoleInRightHalfPlane(p));
        }
        best = best.min(-2.0 * p.re / p.norm_sqr());
    }
    Ok(best)
}

pub fn phi_eps_max(phi: &RatFun) -> Result<f64, MonotoneError> {
    let poles: Vec<Complex64> = phi.poles().iter().map(|r| r.value).collect();
    eps_max(&poles)
}

#[derive(Clone, Debug, Serialize)]
pub struct TmCoefficients {
    pub eps: f64,
    pub a: Vec<f64>,
    /// `εξ + 1` of the dominant pole (largest modulus, then highest order).
    pub tail_base: Complex64,
    pub tail_dominant_real: bool,
    /// From this index on the dominant term exceeds the sum of all others.
    pub n_star: Option<usize>,
    /// Largest `|Im a_n|` relative to `max |a_n|` before discarding.
    pub imag_rel: f64,
    /// Bound on `Σ_{n>N} |a_n|`.
    pub tail_bound: f64,
}

/// One PF term rewritten as `coef · C(n, k-1) · z^n`.
#[derive(Clone, Copy, Debug)]
struct Piece {
    z: Complex64,
    k: usize,
    coeff: Complex64,
}

fn pieces(pf: &PartialFractions, eps: f64) -> Vec<Piece> {
    pf.terms
        .iter()
        .map(|t| Piece { z: t.pole * eps + 1.0, k: t.order, coeff: t.coeff * eps.powi(t.order as i32) })
        .collect()
}

/// Streams `a_n` for increasing `n` in O(#terms) per step.
struct CoeffStream {
    pieces: Vec<Piece>,
    // v_p(n) = C(n, k-1) z^{n-k+1}
    v: Vec<Complex64>,
    n: usize,
}

impl CoeffStream {
    fn new(pieces: Vec<Piece>) -> Self {
        let v = pieces
            .iter()
            .map(|p| if p.k == 1 { re(1.0) } else { re(0.0) })
            .collect();
        CoeffStream { pieces, v, n: 0 }
    }

    /// Returns `a_n` (complex) and `Σ|piece_n|`, then advances.
    fn next(&mut self) -> (Complex64, f64) {
        let mut sum = re(0.0);
        let mut abs = 0.0;
        for (p, v) in self.pieces.iter().zip(&self.v) {
            let term = p.coeff * v;
            sum += term;
            abs += term.norm();
        }
        let n = self.n;
        for (p, v) in self.pieces.iter().zip(self.v.iter_mut()) {
            let r = p.k - 1;
            if n + 1 == r {
                *v = re(1.0);
            } else if n + 1 > r {
                *v *= p.z * ((n + 1) as f64 / (n + 1 - r) as f64);
            }
        }
        self.n += 1;
        (sum, abs)
    }
}

fn dominant_and_nstar(ps: &[Piece]) -> (Complex64, bool, Option<usize>) {
    let live: Vec<&Piece> = ps.iter().filter(|p| p.coeff.norm() > 0.0).collect();
    if live.is_empty() {
        return (re(0.0), false, None);
    }
    let rmax = live.iter().map(|p| p.z.norm()).fold(0.0, f64::max);
    let tie = |p: &Piece| p.z.norm() >= rmax * (1.0 - 1e-12);
    let kmax = live.iter().filter(|p| tie(p)).map(|p| p.k).max().unwrap();
    let dom: Vec<&&Piece> = live.iter().filter(|p| tie(p) && p.k == kmax).collect();
    let base = dom[0].z;
    if dom.len() != 1 || base.re <= 0.0 || base.im.abs() > 1e-12 * base.norm() {
        return (base, false, None);
    }
    let d = dom[0];
    let z = d.z.re;
    // dominant term D(n) = dcoef · C(n, b) · z^n
    let dcoef = d.coeff * d.z.powi(1 - d.k as i32);
    if dcoef.re <= 0.0 || dcoef.im.abs() > 1e-10 * dcoef.norm() {
        return (base, false, None);
    }
    let b = d.k - 1;
    struct Ratio {
        lnc: f64,
        a: usize,
        lnq: f64,
    }
    let mut rest = Vec::new();
    let mut n0 = b;
    for p in live.iter() {
        if std::ptr::eq(*p, *d) {
            continue;
        }
        let a = p.k - 1;
        let qz = p.z.norm();
        if qz == 0.0 {
            // contributes only at n = k - 1
            n0 = n0.max(p.k);
            continue;
        }
        let q = qz / z;
        let lnc = (p.coeff * p.z.powi(1 - p.k as i32)).norm().ln() - dcoef.re.ln();
        if q >= 1.0 - 1e-12 {
            if a >= b {
                return (base, true, None);
            }
        } else {
            let bound = (a as f64 - q * b as f64) / (1.0 - q) - 1.0;
            if bound.is_finite() && bound > n0 as f64 {
                n0 = bound.ceil() as usize;
            }
        }
        rest.push(Ratio { lnc, a, lnq: q.ln().min(0.0) });
    }
    let ln_binom_ratio = |n: usize, a: usize| -> f64 {
        // ln C(n, a) - ln C(n, b), n ≥ b
        let mut s = 0.0;
        for i in 0..a {
            s += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        }
        for i in 0..b {
            s -= ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        }
        s
    };
    let cap = 2_000_000;
    let mut n = n0.max(b);
    while n <= cap {
        let total: f64 = rest
            .iter()
            .map(|r| (r.lnc + ln_binom_ratio(n, r.a) + n as f64 * r.lnq).exp())
            .sum();
        if total < 1.0 {
            return (base, true, Some(n));
        }
        n = if n < 1000 { n + 1 } else { n + n / 1000 };
    }
    (base, true, None)
}

pub fn tm_coeffs(phi: &RatFun, eps: f64, n: usize) -> Result<TmCoefficients, MonotoneError> {
    let phi = reduced(phi);
    let em = phi_eps_max(&phi)?;
    if !(eps > 0.0 && eps < em) {
        return Err(MonotoneError::EpsTooLarge { eps, eps_max: em });
    }
    let pf = significant(&partial_fractions(&phi)?);
    let ps = pieces(&pf, eps);
    let (tail_base, tail_dominant_real, n_star) = dominant_and_nstar(&ps);
    let mut stream = CoeffStream::new(ps);
    let mut a = Vec::with_capacity(n + 1);
    let mut imag: f64 = 0.0;
    for _ in 0..=n {
        let (v, _) = stream.next();
        imag = imag.max(v.im.abs());
        a.push(v.re);
    }
    let amax = a.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tail_bound = tail_sum(&mut stream, amax);
    Ok(TmCoefficients {
        eps,
        a,
        tail_base,
        tail_dominant_real,
        n_star,
        imag_rel: if amax > 0.0 { imag / amax } else { 0.0 },
        tail_bound,
    })
}

/// Sums `Σ|pieces|` from the stream's position until the terms are negligible,
/// then closes with a geometric bound.
fn tail_sum(stream: &mut CoeffStream, scale: f64) -> f64 {
    let mut total = 0.0;
    let mut prev = f64::INFINITY;
    for _ in 0..5_000_000 {
        let (_, abs) = stream.next();
        total += abs;
        if abs < 1e-18 * scale.max(1e-300) && abs <= prev {
            let r = if prev.is_finite() && prev > 0.0 { (abs / prev).min(0.999_999) } else { 0.5 };
            return total + abs * r / (1.0 - r);
        }
        prev = abs;
    }
    f64::INFINITY
}

/// Default ε grid `eps_max · 2^{-k}`, `k = 1..=8`.
pub fn default_eps_grid(eps_max: f64) -> Vec<f64> {
    (1..=8).map(|k| eps_max * 0.5f64.powi(k)).collect()
}

const SCAN_CAP: usize = 400_000;

pub fn tm_certify(
    phi: &RatFun,
    eps_grid: Option<&[f64]>,
    n: usize,
) -> Result<MonotoneCertificate, MonotoneError> {
    let phi = reduced(phi);
    let em = phi_eps_max(&phi)?;
    let grid: Vec<f64> = match eps_grid {
        Some(g) => g.to_vec(),
        None => default_eps_grid(em),
    };
    let pf = significant(&partial_fractions(&phi)?);
    let mut reports: Vec<TmEpsReport> = grid
        .par_iter()
        .map(|&eps| tm_at_eps(&pf, eps, em, n))
        .collect::<Result<_, _>>()?;
    reports.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let verdict;
    let mut witness = None;
    if reports.iter().any(|r| r.certified) {
        verdict = Verdict::Certified;
    } else if !reports.is_empty() && reports.iter().all(|r| r.witness.is_some()) {
        verdict = Verdict::RefutedAtTestedEps;
        witness = reports.last().and_then(|r| r.witness);
    } else {
        verdict = Verdict::Inconclusive;
    }
    Ok(MonotoneCertificate {
        kind: MonoKind::TM,
        verdict,
        witness,
        evidence: Evidence::Tm(TmEvidence { n, eps_max: em, per_eps: reports }),
    })
}

fn tm_at_eps(pf: &PartialFractions, eps: f64, em: f64, n: usize) -> Result<TmEpsReport, MonotoneError> {
    if !(eps > 0.0 && eps < em) {
        return Err(MonotoneError::EpsTooLarge { eps, eps_max: em });
    }
    let ps = pieces(pf, eps);
    let (_, dominant_real, n_star) = dominant_and_nstar(&ps);
    let mut stream = CoeffStream::new(ps);
    let n_hi = match n_star {
        Some(s) if s <= SCAN_CAP => n.max(s),
        _ => n,
    };
    let mut a = Vec::with_capacity(n_hi + 1);
    let mut abs_bounds = Vec::with_capacity(n_hi + 1);
    for _ in 0..=n_hi {
        let (v, abs) = stream.next();
        a.push(v.re);
        abs_bounds.push(abs);
    }
    let scale = a.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let (n_at_min, min_a) = a
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let mut witness = a
        .iter()
        .position(|&v| v < -1e-10 * scale)
        .map(|i| Witness::Tm { eps, n: i, a: a[i] });
    let certified = dominant_real
        && n_star.is_some_and(|s| s <= SCAN_CAP)
        && min_a >= -1e-12 * scale;
    if witness.is_none() && !certified {
        // keep scanning until negatives can no longer exceed the threshold
        let mut idx = n_hi + 1;
        while idx <= SCAN_CAP {
            let (v, abs) = stream.next();
            if v.re < -1e-10 * scale {
                witness = Some(Witness::Tm { eps, n: idx, a: v.re });
                break;
            }
            if abs < 1e-12 * scale && idx > 4 * n_hi {
                break;
            }
            idx += 1;
        }
    }
    Ok(TmEpsReport {
        eps,
        n_checked: n_hi,
        min_a,
        n_at_min,
        scale,
        tail_dominant_real: dominant_real,
        n_star,
        certified,
        witness,
    })
}

/// `b_n = Σ_{k≤n} a_k C(n,k) β^{k+1} (1-β)^{n-k}`.
pub fn tm_rescale(a: &[f64], beta: f64) -> Vec<f64> {
    let n = a.len();
    let mut out = Vec::with_capacity(n);
    // w[k] = C(row,k) β^k (1-β)^{row-k}
    let mut w = vec![0.0; n];
    if n > 0 {
        w[0] = 1.0;
    }
    for row in 0..n {
        if row > 0 {
            for k in (1..=row).rev() {
                w[k] = (1.0 - beta) * w[k] + beta * w[k - 1];
            }
            w[0] *= 1.0 - beta;
        }
        let s: f64 = (0..=row).map(|k| a[k] * w[k]).sum();
        out.push(beta * s);
    }
    out
}

/// Table `a^{(ℓ)}_n` for `ℓ = 0..=L`, `n = 0..=N`.
pub fn conv_powers(a: &[f64], l_max: usize, n: usize) -> Vec<Vec<f64>> {
    let get = |k: usize| a.get(k).copied().unwrap_or(0.0);
    let mut table = Vec::with_capacity(l_max + 1);
    let mut cur = vec![0.0; n + 1];
    cur[0] = 1.0;
    table.push(cur.clone());
    for _ in 0..l_max {
        let next: Vec<f64> = (0..=n)
            .map(|i| (0..=i).map(|k| get(k) * cur[i - k]).sum())
            .collect();
        table.push(next.clone());
        cur = next;
    }
    table
}

#[derive(Clone, Debug, Serialize)]
pub struct IndChainReport {
    pub holds: bool,
    pub n_max: usize,
    pub worst_first_gap: f64,
    pub worst_second: f64,
    pub first_failure: Option<usize>,
}

/// Checks `Σ_{ℓ<n} a^{(ℓ+2)}_{n-1-ℓ} ≤ Σ_{ℓ<n} a^{(2)}_{n-1-ℓ} ≤ 1` for `1 ≤ n ≤ n_max`.
pub fn ind_chain_check(a: &[f64], n_max: usize) -> IndChainReport {
    let table = conv_powers(a, n_max + 1, n_max);
    let slack = 1e-12;
    let mut worst_first_gap = f64::NEG_INFINITY;
    let mut worst_second = f64::NEG_INFINITY;
    let mut first_failure = None;
    for n in 1..=n_max {
        let lhs: f64 = (0..n).map(|l| table[l + 2][n - 1 - l]).sum();
        let mid: f64 = (0..n).map(|l| table[2][n - 1 - l]).sum();
        worst_first_gap = worst_first_gap.max(lhs - mid);
        worst_second = worst_second.max(mid);
        if (lhs > mid + slack || mid > 1.0 + slack) && first_failure.is_none() {
            first_failure = Some(n);
        }
    }
    IndChainReport {
        holds: first_failure.is_none(),
        n_max,
        worst_first_gap,
        worst_second,
        first_failure,
    }
}

/// `g(t) = (1/ε) e^{-t/ε} Σ a_n (t/ε)^n / n!`, Poisson weights by recurrence.
pub fn g_series(a: &[f64], eps: f64, t: f64) -> f64 {
    let x = t / eps;
    // start the weights at the mode to avoid underflow of e^{-x}
    let mode = (x.floor() as usize).min(a.len().saturating_sub(1));
    let mut lw = -x + mode as f64 * x.ln() - ln_factorial(mode);
    if x == 0.0 {
        lw = if mode == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let wm = lw.exp();
    let mut sum = a.get(mode).copied().unwrap_or(0.0) * wm;
    let mut w = wm;
    for n in (0..mode).rev() {
        w *= (n + 1) as f64 / x;
        sum += a[n] * w;
    }
    w = wm;
    for (n, an) in a.iter().enumerate().skip(mode + 1) {
        w *= x / n as f64;
        sum += an * w;
    }
    sum / eps
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct LaplaceCheck {
    pub quadrature_err: f64,
    pub series_err: f64,
    pub max_err: f64,
    pub eps: f64,
    pub terms: usize,
}

/// Compares `φ(λ)` with `∫_0^∞ e^{-λt} g(t) dt` and with `Σ a_n (1+ελ)^{-(n+1)}`.
pub fn laplace_check(phi: &RatFun, lambdas: &[f64]) -> Result<LaplaceCheck, MonotoneError> {
    let phi = reduced(phi);
    check_poles(&phi)?;
    let pf = significant(&partial_fractions(&phi)?);
    let eps = 0.5 * phi_eps_max(&phi)?;
    let coeffs = tm_coeffs(&phi, eps, 400)?;
    // extend the series until the tail is negligible
    let mut terms = coeffs.a.len();
    let mut a = coeffs.a.clone();
    if coeffs.tail_bound > 1e-15 {
        let ps = pieces(&pf, eps);
        let mut stream = CoeffStream::new(ps);
        a.clear();
        loop {
            let (v, abs) = stream.next();
            a.push(v.re);
            if (a.len() > 400 && abs < 1e-17) || a.len() > 2_000_000 {
                break;
            }
        }
        terms = a.len();
    }
    let mut qerr: f64 = 0.0;
    let mut serr: f64 = 0.0;
    for &lam in lambdas {
        let want = phi.value(re(lam)).re;
        let q = quad::integrate_half_line(
            |t| (-lam * t).exp() * g_value(&pf, t).map(|z| z.re).unwrap_or(0.0),
            1e-12,
            1e-15,
        );
        let mu = 1.0 / (1.0 + eps * lam);
        let mut pw = mu;
        let mut s = 0.0;
        for an in &a {
            s += an * pw;
            pw *= mu;
        }
        qerr = qerr.max((q - want).abs() / want.abs().max(1e-300));
        serr = serr.max((s - want).abs() / want.abs().max(1e-300));
    }
    Ok(LaplaceCheck { quadrature_err: qerr, series_err: serr, max_err: qerr.max(serr), eps, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::Poly;

    fn robot() -> RatFun {
        RatFun::new(Poly::from_real(&[1.0]), Poly::from_real(&[1.0, 1.0])).unwrap()
    }

    /// `(a²+b²)c / ((λ+c)(λ²+2aλ+a²+b²))`
    pub(crate) fn pair(a: f64, b: f64, c: f64) -> RatFun {
        let k = (a * a + b * b) * c;
        let den = &Poly::from_real(&[c, 1.0]) * &Poly::from_real(&[a * a + b * b, 2.0 * a, 1.0]);
        rat_reduce(&RatFun::new(Poly::from_real(&[k]), den).unwrap())
    }

    #[test]
    fn eps_max_rules() {
        assert_eq!(eps_max(&[re(-1.0)]).unwrap(), 2.0);
        let cpx = [Complex64::new(-1.0, 1.0), Complex64::new(-1.0, -1.0)];
        assert!((eps_max(&cpx).unwrap() - 1.0).abs() < 1e-15);
        let all = [re(-1.0), cpx[0], cpx[1]];
        assert!((eps_max(&all).unwrap() - 1.0).abs() < 1e-15);
        assert!(eps_max(&[re(0.5)]).is_err());
    }

    #[test]
    fn robot_tm_coefficients() {
        let c = tm_coeffs(&robot(), 0.5, 100).unwrap();
        for (n, a) in c.a.iter().enumerate() {
            assert!((a - 0.5f64.powi(n as i32 + 1)).abs() <= 1e-12);
        }
        assert!(c.tail_dominant_real);
        let total: f64 = c.a.iter().sum();
        assert!((total + c.tail_bound - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn eps_outside_range_rejected() {
        assert!(matches!(tm_coeffs(&robot(), 2.0, 10), Err(MonotoneError::EpsTooLarge { .. })));
    }

    #[test]
    fn robot_is_cm_and_tm() {
        assert_eq!(cm_certify(&robot(), CmGrid::default()).unwrap().verdict, Verdict::Certified);
        assert_eq!(tm_certify(&robot(), None, DEFAULT_TM_N).unwrap().verdict, Verdict::Certified);
    }

    #[test]
    fn pair_closed_form() {
        let (a, b, c) = (1.0f64, 1.0f64, 1.0f64);
        let pf = partial_fractions(&pair(a, b, c)).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let k = (a * a + b * b) * c / ((a - c).powi(2) + b * b);
            let want = k * ((-c * t).exp() + ((c - a) / b * (b * t).sin() - (b * t).cos()) * (-a * t).exp());
            let got = g_value(&pf, t).unwrap().re;
            assert!((got - want).abs() <= 1e-10, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn pair_cm_boundary() {
        let r = cm_certify(&pair(0.5, 1.0, 1.0), CmGrid::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
        match r.witness {
            Some(Witness::Cm { g, .. }) => assert!(g < 0.0),
            _ => panic!("missing witness"),
        }
        assert_eq!(cm_certify(&pair(1.0, 1.0, 1.0), CmGrid::default()).unwrap().verdict, Verdict::Certified);
    }

    #[test]
    fn pair_tm_boundary() {
        let c = tm_coeffs(&pair(2.0, 1.0, 1.0), 0.1, 200).unwrap();
        assert!(c.a.iter().all(|&x| x >= -1e-14));
        assert_eq!(tm_certify(&pair(2.0, 1.0, 1.0), None, DEFAULT_TM_N).unwrap().verdict, Verdict::Certified);
        let r = tm_certify(&pair(1.0, 1.0, 1.0), None, DEFAULT_TM_N).unwrap();
        assert_eq!(r.verdict, Verdict::RefutedAtTestedEps);
        assert!(matches!(r.witness, Some(Witness::Tm { a, .. }) if a < 0.0));
    }

    #[test]
    fn rescale_identity_and_two_paths() {
        let a = [0.3, 0.2, 0.1];
        assert_eq!(tm_rescale(&a, 1.0), a.to_vec());
        let direct = tm_coeffs(&robot(), 0.5, 60).unwrap().a;
        let from_one = tm_rescale(&tm_coeffs(&robot(), 1.0, 60).unwrap().a, 0.5);
        for (x, y) in direct.iter().zip(&from_one) {
            assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn conv_power_sums() {
        let c = tm_coeffs(&robot(), 0.5, 400).unwrap();
        let table = conv_powers(&c.a, 5, 400);
        assert_eq!(table[1], c.a);
        for row in table.iter() {
            let s: f64 = row.iter().sum();
            assert!((s - 1.0).abs() <= 1e-9, "{s}");
        }
    }

    #[test]
    fn ind_chain_robot() {
        let c = tm_coeffs(&robot(), 0.5, 200).unwrap();
        assert!(ind_chain_check(&c.a, 200).holds);
    }

    #[test]
    fn g_series_matches_closed_form() {
        let c = tm_coeffs(&robot(), 0.5, 59).unwrap();
        for t in [0.5, 1.0, 5.0] {
            assert!((g_series(&c.a, 0.5, t) - (-t).exp()).abs() <= 1e-10);
        }
    }

    #[test]
    fn laplace_paths_agree() {
        let r = laplace_check(&robot(), &[0.0, 0.5, 1.0, 2.0]).unwrap();
        assert!(r.max_err <= 1e-8, "{r:?}");
    }
}
