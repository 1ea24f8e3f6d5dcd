//! Norm curves `t ↦ ‖A_N T_N(t)‖_p` with lower/upper brackets.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::blocks::{circulant_exp, circulant_generator, onesided_blocks, onesided_generator, ScaledColumn};
use super::{expm_dense, Kind, PNorm, Quantity, SemigroupError, TruncationSpec};
use crate::charfun::SystemPair;
use crate::linalg::{frobenius, golden_max, re, spectral_norm, CMat, CVec};
use crate::spectra::{circulant_dense, onesided_dense, symbol};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Sample {
    /// Geometric midpoint of the bracket.
    pub fn mid(&self) -> f64 {
        (self.lower * self.upper).sqrt()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayCurve {
    pub label: String,
    pub kind: Kind,
    /// Truncation sizes the curve covers (one entry unless a supremum).
    pub n_list: Vec<usize>,
    pub p: PNorm,
    pub quantity: Quantity,
    pub samples: Vec<Sample>,
    pub exact: bool,
    /// Largest relative block discrepancy against a dense exponential, when checked.
    pub dense_error: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurveOptions {
    pub quantity: Quantity,
    pub seed: u64,
    /// Random probes for lower brackets of mixed norms.
    pub probes: usize,
    /// Compare against `expm_dense` of the assembled matrix when `N·m ≤ 512`.
    pub dense_check: bool,
    /// Largest `N·m` handled by a dense SVD for one-sided `p = 2`.
    pub dense_svd_max: usize,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            quantity: Quantity::Derivative,
            seed: 0,
            probes: 32,
            dense_check: false,
            dense_svd_max: 256,
        }
    }
}

/// `max |λ| e^{t Re λ}` over a spectrum.
pub fn spectral_lower_bound(spectrum: &[Complex64], t: f64) -> f64 {
    spectrum
        .iter()
        .map(|z| z.norm() * (t * z.re).exp())
        .fold(0.0, f64::max)
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms.filter(|x| *x > f64::NEG_INFINITY).collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Bracket of the `p ∈ {1, ∞}` norm (Euclidean norm on each block) of a
/// block-Toeplitz or block-circulant matrix whose first block column (and
/// last block row, read backwards) is `col`.
///
/// The `1 → 1` norm is `sup_{|v|=1} Σ‖D_ℓ v‖` and the `∞ → ∞` norm is
/// `sup_{|u|=1} Σ‖D_ℓ^H u‖`; the upper value is `Σ‖D_ℓ‖₂`, the lower value
/// the best of several fixed-point ascents. Returns `(lower, upper, exact)`.
pub fn column_bracket(col: &ScaledColumn, p: PNorm, seed: u64, probes: usize) -> (f64, f64, bool) {
    let m = col.blocks[0].ncols();
    let blocks: Vec<CMat> = match p {
        PNorm::Inf => col.blocks.iter().map(|b| b.adjoint()).collect(),
        _ => col.blocks.clone(),
    };
    let upper = log_sum_exp(
        blocks
            .iter()
            .zip(&col.ln_scale)
            .map(|(b, s)| spectral_norm(b).ln() + s),
    )
    .exp();
    if m == 1 {
        return (upper, upper, true);
    }
    let shift = col
        .ln_scale
        .iter()
        .zip(&blocks)
        .map(|(s, b)| s + frobenius(b).ln())
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return (0.0, 0.0, true);
    }
    let weights: Vec<f64> = col.ln_scale.iter().map(|s| (s - shift).exp()).collect();
    let value = |v: &CVec| -> f64 {
        blocks
            .iter()
            .zip(&weights)
            .map(|(b, w)| w * (b * v).norm())
            .sum()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<CVec> = (0..m)
        .map(|i| {
            let mut v = CVec::zeros(m);
            v[i] = re(1.0);
            v
        })
        .collect();
    for _ in 0..probes {
        let v = DVector::from_fn(m, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        starts.push(v.normalize());
    }
    let best = starts
        .into_iter()
        .map(|mut v| {
            let mut val = value(&v);
            for _ in 0..60 {
                let mut g = CVec::zeros(m);
                for (b, w) in blocks.iter().zip(&weights) {
                    let bv = b * &v;
                    let nrm = bv.norm();
                    if nrm > 0.0 {
                        g += b.adjoint() * bv * re(w / nrm);
                    }
                }
                let gn = g.norm();
                if gn == 0.0 {
                    break;
                }
                let next = g / re(gn);
                let nv = value(&next);
                if nv <= val * (1.0 + 1e-14) {
                    val = val.max(nv);
                    break;
                }
                v = next;
                val = nv;
            }
            val
        })
        .fold(0.0, f64::max);
    let lower = (best.ln() + shift).exp().min(upper);
    (lower, upper, false)
}

/// `‖T‖₂` bracket for the lower block-Toeplitz matrix with first column `col`.
fn onesided_two_norm(col: &ScaledColumn, dense_max: usize, seed: u64) -> (f64, f64, bool) {
    let n = col.len();
    let m = col.blocks[0].nrows();
    let shift = (0..n).map(|l| col.ln_norm(l)).fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return (0.0, 0.0, true);
    }
    let d: Vec<CMat> = (0..n)
        .map(|l| &col.blocks[l] * re((col.ln_scale[l] - shift).exp()))
        .collect();
    if n * m <= dense_max {
        let mut t = CMat::zeros(n * m, n * m);
        for k in 0..n {
            for l in 0..=k {
                t.view_mut((k * m, l * m), (m, m)).copy_from(&d[k - l]);
            }
        }
        let v = (spectral_norm(&t).ln() + shift).exp();
        return (v, v, true);
    }
    let apply = |x: &[CVec]| -> Vec<CVec> {
        (0..n)
            .into_par_iter()
            .map(|k| {
                let mut acc = CVec::zeros(m);
                for l in 0..=k {
                    acc += &d[l] * &x[k - l];
                }
                acc
            })
            .collect()
    };
    let apply_adj = |y: &[CVec]| -> Vec<CVec> {
        (0..n)
            .into_par_iter()
            .map(|k| {
                let mut acc = CVec::zeros(m);
                for l in 0..n - k {
                    acc += d[l].adjoint() * &y[k + l];
                }
                acc
            })
            .collect()
    };
    let norm = |x: &[CVec]| x.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<CVec> = (0..n)
        .map(|_| DVector::from_fn(m, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    let mut est = 0.0;
    for _ in 0..500 {
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= re(nx));
        let y = apply(&x);
        let ny = norm(&y);
        let prev = est;
        est = ny;
        x = apply_adj(&y);
        if (est - prev).abs() <= 1e-10 * est {
            break;
        }
    }
    // upper: Frobenius and the Riesz–Thorin interpolation of scalar 1/∞ norms
    let frob: f64 = (0..n)
        .map(|l| (n - l) as f64 * frobenius(&d[l]).powi(2))
        .sum::<f64>()
        .sqrt();
    let mut col_sums = vec![0.0; m];
    let mut row_sums = vec![0.0; m];
    for b in &d {
        for i in 0..m {
            for j in 0..m {
                col_sums[j] += b[(i, j)].norm();
                row_sums[i] += b[(i, j)].norm();
            }
        }
    }
    let n1 = col_sums.iter().copied().fold(0.0, f64::max);
    let ninf = row_sums.iter().copied().fold(0.0, f64::max);
    let upper = frob.min((n1 * ninf).sqrt());
    let sc = shift.exp();
    (est * sc, upper.max(est) * sc, false)
}

fn check_grid(ts: &[f64]) -> Result<(), SemigroupError> {
    if ts.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SemigroupError::Unsupported("t grid must be finite, nonnegative and increasing".into()));
    }
    Ok(())
}

/// Bracket for one `(N, t)` together with the first block column used.
fn truncation_point(
    system: &SystemPair,
    spec: TruncationSpec,
    p: PNorm,
    t: f64,
    opts: &CurveOptions,
) -> Result<(Sample, bool, Vec<CMat>), SemigroupError> {
    let n = spec.n;
    match spec.kind {
        Kind::Onesided => {
            let b = onesided_blocks(system, n, t)?;
            let col = match opts.quantity {
                Quantity::Derivative => onesided_generator(system, &b),
                Quantity::Semigroup => b,
            };
            let (lower, upper, exact) = match p {
                PNorm::Two => onesided_two_norm(&col, opts.dense_svd_max, opts.seed),
                _ => column_bracket(&col, p, opts.seed, opts.probes),
            };
            let blocks = if opts.dense_check { col.materialize() } else { Vec::new() };
            Ok((Sample { t, lower, upper }, exact, blocks))
        }
        Kind::Circulant => {
            let e = circulant_exp(system, n, t)?;
            let f = match opts.quantity {
                Quantity::Derivative => circulant_generator(system, &e),
                Quantity::Semigroup => e,
            };
            let need_col = opts.dense_check || p != PNorm::Two;
            let col = if need_col { f.column() } else { Vec::new() };
            let (lower, upper, exact) = match p {
                PNorm::Two => {
                    let v = f.modes.iter().map(spectral_norm).fold(0.0, f64::max);
                    (v, v, true)
                }
                _ => column_bracket(&ScaledColumn::unscaled(col.clone()), p, opts.seed, opts.probes),
            };
            Ok((Sample { t, lower, upper }, exact, col))
        }
        Kind::Laurent => {
            if p != PNorm::Two {
                return Err(SemigroupError::Unsupported("the Laurent curve is available for p = 2 only".into()));
            }
            let v = laurent_point(system, t, opts.quantity)?;
            Ok((Sample { t, lower: v, upper: v }, true, Vec::new()))
        }
    }
}

pub fn decay_curve(
    system: &SystemPair,
    spec: TruncationSpec,
    p: PNorm,
    ts: &[f64],
    opts: &CurveOptions,
) -> Result<DecayCurve, SemigroupError> {
    check_grid(ts)?;
    if spec.kind != Kind::Laurent && spec.n < 2 {
        return Err(SemigroupError::Unsupported("truncation size must be at least 2".into()));
    }
    let dense = opts.dense_check && spec.kind != Kind::Laurent && spec.n * system.m <= 512;
    let local = CurveOptions { dense_check: dense, ..*opts };
    let dense_a = if dense {
        Some(match spec.kind {
            Kind::Onesided => onesided_dense(system, spec.n),
            _ => circulant_dense(system, spec.n),
        })
    } else {
        None
    };
    let points = ts
        .par_iter()
        .map(|&t| {
            let (s, exact, col) = truncation_point(system, spec, p, t, &local)?;
            let err = match &dense_a {
                Some(a) => {
                    let e = expm_dense(a, t)?;
                    let full = match opts.quantity {
                        Quantity::Derivative => a * e,
                        Quantity::Semigroup => e,
                    };
                    let m = system.m;
                    let scale = (0..spec.n)
                        .map(|l| frobenius(&full.view((l * m, 0), (m, m)).into_owned()))
                        .fold(0.0, f64::max);
                    let worst = (0..spec.n)
                        .map(|l| frobenius(&(full.view((l * m, 0), (m, m)).into_owned() - &col[l])))
                        .fold(0.0, f64::max);
                    Some(if scale > 0.0 { worst / scale } else { worst })
                }
                None => None,
            };
            Ok((s, exact, err))
        })
        .collect::<Result<Vec<_>, SemigroupError>>()?;
    let exact = points.iter().all(|p| p.1);
    let dense_error = if dense {
        Some(points.iter().filter_map(|p| p.2).fold(0.0, f64::max))
    } else {
        None
    };
    Ok(DecayCurve {
        label: system.label.clone(),
        kind: spec.kind,
        n_list: if spec.kind == Kind::Laurent { Vec::new() } else { vec![spec.n] },
        p,
        quantity: opts.quantity,
        samples: points.into_iter().map(|p| p.0).collect(),
        exact,
        dense_error,
    })
}

/// `sup_θ ‖S(θ)·exp(tS(θ))‖₂` (or `‖exp(tS(θ))‖₂`) for the Laurent symbol `S(θ) = A0 + e^{-iθ}A1`.
pub fn laurent_point(system: &SystemPair, t: f64, quantity: Quantity) -> Result<f64, SemigroupError> {
    let f = |th: f64| -> f64 {
        let s = symbol(system, th);
        match expm_dense(&s, t) {
            Ok(e) => match quantity {
                Quantity::Derivative => spectral_norm(&(&s * e)),
                Quantity::Semigroup => spectral_norm(&e),
            },
            Err(_) => f64::NAN,
        }
    };
    let pi = std::f64::consts::PI;
    let w = if t > 0.0 { (10.0 / t.sqrt()).min(pi) } else { pi };
    let mut thetas: Vec<f64> = (0..1024).map(|k| -pi + 2.0 * pi * k as f64 / 1024.0).collect();
    let graded = 256;
    for k in 1..=graded {
        let x = w * (k as f64 / graded as f64).powi(2);
        thetas.push(x);
        thetas.push(-x);
    }
    thetas.push(0.0);
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    let vals: Vec<f64> = thetas.par_iter().map(|&th| f(th)).collect();
    if vals.iter().any(|v| v.is_nan()) {
        return Err(SemigroupError::Overflow(t));
    }
    let mut idx: Vec<usize> = (0..thetas.len()).collect();
    idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let mut best = vals[idx[0]];
    let last = thetas.len() - 1;
    for &k in idx.iter().take(3) {
        let lo = if k == 0 { thetas[last] - 2.0 * pi } else { thetas[k - 1] };
        let hi = if k == last { thetas[0] + 2.0 * pi } else { thetas[k + 1] };
        let (_, v) = golden_max(f, lo, hi, 80);
        best = best.max(v);
    }
    Ok(best)
}

/// Two-sided operator on `ℓ²(ℤ; ℂ^m)`, `p = 2`.
pub fn laurent_decay(system: &SystemPair, ts: &[f64], quantity: Quantity) -> Result<DecayCurve, SemigroupError> {
    check_grid(ts)?;
    let samples = ts
        .iter()
        .map(|&t| laurent_point(system, t, quantity).map(|v| Sample { t, lower: v, upper: v }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DecayCurve {
        label: system.label.clone(),
        kind: Kind::Laurent,
        n_list: Vec::new(),
        p: PNorm::Two,
        quantity,
        samples,
        exact: true,
        dense_error: None,
    })
}

/// Pointwise maximum of the brackets over `ns`.
pub fn sup_over_n(
    system: &SystemPair,
    kind: Kind,
    ns: &[usize],
    p: PNorm,
    ts: &[f64],
    opts: &CurveOptions,
) -> Result<DecayCurve, SemigroupError> {
    if ns.is_empty() {
        return Err(SemigroupError::Unsupported("empty list of truncation sizes".into()));
    }
    let curves = ns
        .iter()
        .map(|&n| decay_curve(system, TruncationSpec { kind, n }, p, ts, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(pointwise_max(&curves))
}

/// Pointwise maximum of brackets sampled on a common grid.
pub fn pointwise_max(curves: &[DecayCurve]) -> DecayCurve {
    let mut out = curves[0].clone();
    for c in &curves[1..] {
        for (s, o) in out.samples.iter_mut().zip(&c.samples) {
            s.lower = s.lower.max(o.lower);
            s.upper = s.upper.max(o.upper);
        }
        out.exact &= c.exact;
        out.n_list.extend(&c.n_list);
        out.dense_error = match (out.dense_error, c.dense_error) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;
    use crate::spectra::circulant_spectrum;

    fn robot() -> SystemPair {
        SystemPair::new("robot", from_real_rows(1, &[-1.0]), from_real_rows(1, &[1.0])).unwrap()
    }

    fn platoon() -> SystemPair {
        let a0 = from_real_rows(3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -6.0, -11.0, -6.0]);
        let mut a1 = CMat::zeros(3, 3);
        a1[(0, 1)] = re(-1.0);
        SystemPair::new("platoon", a0, a1).unwrap()
    }

    fn opts() -> CurveOptions {
        CurveOptions::default()
    }

    #[test]
    fn circulant_norm_at_zero() {
        let spec = TruncationSpec { kind: Kind::Circulant, n: 4 };
        let c = decay_curve(&robot(), spec, PNorm::One, &[0.0], &opts()).unwrap();
        assert!((c.samples[0].upper - 2.0).abs() < 1e-14);
        assert!(c.exact);
    }

    #[test]
    fn robot_onesided_closed_form() {
        // D_ℓ = e^{-t}(t^{ℓ-1}/(ℓ-1)! - t^ℓ/ℓ!), D_0 = -e^{-t}
        let n = 10;
        for t in [0.5, 2.0, 7.0] {
            let c = decay_curve(&robot(), TruncationSpec { kind: Kind::Onesided, n }, PNorm::One, &[t], &opts())
                .unwrap();
            let mut want = (-t).exp();
            let mut pw = 1.0;
            for l in 1..n {
                let prev = pw;
                pw *= t / l as f64;
                want += (-t).exp() * (prev - pw).abs();
            }
            assert!((c.samples[0].upper - want).abs() <= 1e-12 * want, "t={t}");
        }
    }

    #[test]
    fn dense_cross_check() {
        let ts = [0.5, 1.0, 2.0, 5.0, 10.0];
        for kind in [Kind::Onesided, Kind::Circulant] {
            let o = CurveOptions { dense_check: true, ..opts() };
            let c = decay_curve(&platoon(), TruncationSpec { kind, n: 16 }, PNorm::Two, &ts, &o).unwrap();
            assert!(c.dense_error.unwrap() <= 1e-8, "{kind:?}: {:?}", c.dense_error);
        }
    }

    #[test]
    fn mixed_norm_bracket_is_ordered() {
        let ts = [0.5, 3.0, 20.0];
        for p in [PNorm::One, PNorm::Inf] {
            for kind in [Kind::Onesided, Kind::Circulant] {
                let c = decay_curve(&platoon(), TruncationSpec { kind, n: 8 }, p, &ts, &opts()).unwrap();
                for s in &c.samples {
                    assert!(s.lower <= s.upper && s.lower > 0.0);
                }
            }
        }
    }

    #[test]
    fn robot_circulant_bounded_by_spectral_and_one() {
        let n = 32;
        let c = decay_curve(&robot(), TruncationSpec { kind: Kind::Circulant, n }, PNorm::Two, &[100.0], &opts())
            .unwrap();
        let spec: Vec<Complex64> = circulant_spectrum(&robot(), n).unwrap().iter().map(|e| e.value).collect();
        let lb = spectral_lower_bound(&spec, 100.0);
        assert!(c.samples[0].lower >= lb - 1e-15 && c.samples[0].upper <= 1.0);
    }

    #[test]
    fn laurent_robot_matches_scalar_optimum() {
        let t = 100.0;
        let v = laurent_point(&robot(), t, Quantity::Derivative).unwrap();
        let g = |th: f64| (Complex64::from_polar(1.0, -th) - 1.0).norm() * (t * (th.cos() - 1.0)).exp();
        let (_, best) = golden_max(g, 0.0, 1.0, 200);
        assert!((v - best).abs() <= 1e-9 * best);
    }

    #[test]
    fn circulant_below_laurent() {
        let ts = [1.0, 10.0, 100.0];
        let l = laurent_decay(&platoon(), &ts, Quantity::Derivative).unwrap();
        for n in [4, 16, 64] {
            let c = decay_curve(&platoon(), TruncationSpec { kind: Kind::Circulant, n }, PNorm::Two, &ts, &opts())
                .unwrap();
            for (a, b) in c.samples.iter().zip(&l.samples) {
                assert!(a.upper <= b.upper * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn sup_single_is_identity() {
        let ts = [1.0, 2.0];
        let spec = TruncationSpec { kind: Kind::Circulant, n: 8 };
        let a = decay_curve(&robot(), spec, PNorm::Two, &ts, &opts()).unwrap();
        let b = sup_over_n(&robot(), Kind::Circulant, &[8], PNorm::Two, &ts, &opts()).unwrap();
        assert_eq!(a.samples, b.samples);
    }
}
