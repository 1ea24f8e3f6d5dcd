//! Structured exponentials of truncations.
//!
//! One-sided: `exp(tA_N)` is block lower-triangular Toeplitz, so it is the
//! element `exp(t(A0 + zA1))` of the algebra of matrix polynomials modulo
//! `z^N`. It is computed by a Taylor series on `t/2^s` followed by `s`
//! squarings (truncated block convolutions). Blocks are stored as
//! `B_ℓ = C_ℓ·exp(ln_kappa − ℓ·ln_rho)` so that entries decaying or growing
//! geometrically in `ℓ` stay representable.
//!
//! Circulant: the block DFT diagonalizes `A_N` into the mode symbols
//! `A0 + ω_j A1`.

use rayon::prelude::*;

use super::{expm_dense, SemigroupError};
use crate::charfun::SystemPair;
use crate::linalg::{eye, frobenius, norm_one, re, CMat};
use crate::spectra::mode_symbol;

/// Block column whose `ℓ`-th block is `blocks[ℓ]·exp(ln_scale[ℓ])`.
#[derive(Clone, Debug)]
pub struct ScaledColumn {
    pub blocks: Vec<CMat>,
    pub ln_scale: Vec<f64>,
}

impl ScaledColumn {
    pub fn unscaled(blocks: Vec<CMat>) -> Self {
        let ln_scale = vec![0.0; blocks.len()];
        ScaledColumn { blocks, ln_scale }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, l: usize) -> CMat {
        &self.blocks[l] * re(self.ln_scale[l].exp())
    }

    pub fn materialize(&self) -> Vec<CMat> {
        (0..self.len()).map(|l| self.block(l)).collect()
    }

    /// `ln ‖block ℓ‖_F`, `-∞` for a zero block.
    pub fn ln_norm(&self, l: usize) -> f64 {
        frobenius(&self.blocks[l]).ln() + self.ln_scale[l]
    }
}

/// First block column of `exp(tA_N)` for the one-sided truncation.
pub fn onesided_blocks(system: &SystemPair, n: usize, t: f64) -> Result<ScaledColumn, SemigroupError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(SemigroupError::NonFinite);
    }
    let m = system.m;
    if t == 0.0 {
        let mut blocks = vec![CMat::zeros(m, m); n];
        blocks[0] = eye(m);
        return Ok(ScaledColumn::unscaled(blocks));
    }
    let n0 = norm_one(&system.a0);
    let n1 = norm_one(&system.a1);
    let s = ((t * (n0 + n1) / 0.5).log2().ceil()).max(0.0) as i32;
    let h = t * 0.5f64.powi(s);
    let rho = if n > 1 { n as f64 / (std::f64::consts::E * h * n1) } else { 1.0 };

    // Taylor series of exp(hA0 + z·ρhA1) mod z^n
    let ha0 = &system.a0 * re(h);
    let ha1 = &system.a1 * re(rho * h);
    let mut sum: Vec<CMat> = vec![CMat::zeros(m, m); n];
    sum[0] = eye(m);
    let mut term = sum.clone();
    let cap = n + 400;
    let mut converged = false;
    let mut quiet = 0;
    for k in 1..=cap {
        let mut next = vec![CMat::zeros(m, m); n];
        let top = k.min(n - 1);
        for l in 0..=top {
            let mut v = &ha0 * &term[l];
            if l > 0 {
                v += &ha1 * &term[l - 1];
            }
            next[l] = v * re(1.0 / k as f64);
        }
        term = next;
        let mut small = true;
        for l in 0..=top {
            sum[l] += &term[l];
            if frobenius(&term[l]) > 1e-18 * frobenius(&sum[l]) {
                small = false;
            }
        }
        quiet = if small && k + 1 >= n { quiet + 1 } else { 0 };
        if quiet >= 2 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SemigroupError::ToleranceNotMet);
    }
    let mut ln_rho = rho.ln();
    let mut ln_kappa = 0.0;
    let mut c = sum;
    for _ in 0..s {
        c = square_truncated(&c);
        ln_kappa *= 2.0;
        renormalize(&mut c, &mut ln_rho, &mut ln_kappa);
    }
    if c.iter().any(|b| !crate::linalg::all_finite(b)) {
        return Err(SemigroupError::Overflow(t * (n0 + n1)));
    }
    let ln_scale = (0..n).map(|l| ln_kappa - l as f64 * ln_rho).collect();
    Ok(ScaledColumn { blocks: c, ln_scale })
}

fn square_truncated(c: &[CMat]) -> Vec<CMat> {
    let n = c.len();
    (0..n)
        .into_par_iter()
        .map(|l| {
            let mut acc = &c[0] * &c[l];
            for i in 1..=l {
                acc += &c[i] * &c[l - i];
            }
            acc
        })
        .collect()
}

/// Rescales `C_ℓ ← C_ℓ·e^{ℓδ − γ}` so the end blocks have equal size and the largest block has size 1.
fn renormalize(c: &mut [CMat], ln_rho: &mut f64, ln_kappa: &mut f64) {
    let logs: Vec<f64> = c.iter().map(|b| frobenius(b).ln()).collect();
    let finite: Vec<usize> = (0..c.len()).filter(|&l| logs[l].is_finite()).collect();
    let (Some(&first), Some(&last)) = (finite.first(), finite.last()) else { return };
    let delta = if last > first { -(logs[last] - logs[first]) / (last - first) as f64 } else { 0.0 };
    let gamma = finite
        .iter()
        .map(|&l| logs[l] + l as f64 * delta)
        .fold(f64::NEG_INFINITY, f64::max);
    for (l, b) in c.iter_mut().enumerate() {
        *b *= re((l as f64 * delta - gamma).exp());
    }
    *ln_rho += delta;
    *ln_kappa += gamma;
}

/// First block column of `A_N exp(tA_N)` from that of `exp(tA_N)`:
/// `D_ℓ = A0 B_ℓ + A1 B_{ℓ-1}`.
pub fn onesided_generator(system: &SystemPair, b: &ScaledColumn) -> ScaledColumn {
    let n = b.len();
    let mut blocks = Vec::with_capacity(n);
    let mut ln_scale = Vec::with_capacity(n);
    for l in 0..n {
        let x = &system.a0 * &b.blocks[l];
        let sx = b.ln_scale[l];
        if l == 0 {
            blocks.push(x);
            ln_scale.push(sx);
            continue;
        }
        let y = &system.a1 * &b.blocks[l - 1];
        let sy = b.ln_scale[l - 1];
        let s = sx.max(sy);
        blocks.push(x * re((sx - s).exp()) + y * re((sy - s).exp()));
        ln_scale.push(s);
    }
    ScaledColumn { blocks, ln_scale }
}

/// Mode factors `E_j(t) = exp(t(A0 + ω_j A1))` of a circulant truncation.
#[derive(Clone, Debug)]
pub struct CirculantFactors {
    pub t: f64,
    pub modes: Vec<CMat>,
}

impl CirculantFactors {
    /// First block column `C_d = (1/N) Σ_j E_j ω_j^{-d}` of the reconstructed matrix.
    pub fn column(&self) -> Vec<CMat> {
        inverse_block_dft(&self.modes)
    }
}

pub fn circulant_exp(system: &SystemPair, n: usize, t: f64) -> Result<CirculantFactors, SemigroupError> {
    let modes = (0..n)
        .into_par_iter()
        .map(|j| expm_dense(&mode_symbol(system, n, j), t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CirculantFactors { t, modes })
}

/// Mode factors of `A_N exp(tA_N)`: `(A0 + ω_j A1)·E_j(t)`.
pub fn circulant_generator(system: &SystemPair, f: &CirculantFactors) -> CirculantFactors {
    let n = f.modes.len();
    let modes = f
        .modes
        .iter()
        .enumerate()
        .map(|(j, e)| mode_symbol(system, n, j) * e)
        .collect();
    CirculantFactors { t: f.t, modes }
}

pub(crate) fn inverse_block_dft(modes: &[CMat]) -> Vec<CMat> {
    let n = modes.len();
    let (r, c) = (modes[0].nrows(), modes[0].ncols());
    (0..n)
        .into_par_iter()
        .map(|d| {
            let mut acc = CMat::zeros(r, c);
            for (j, e) in modes.iter().enumerate() {
                let k = (j * d) % n;
                let w = num_complex::Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / n as f64);
                acc += e * w;
            }
            acc / re(n as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;
    use crate::spectra::{circulant_dense, onesided_dense};

    fn robot() -> SystemPair {
        SystemPair::new("robot", from_real_rows(1, &[-1.0]), from_real_rows(1, &[1.0])).unwrap()
    }

    fn pair211() -> SystemPair {
        let (a, b, c) = (2.0, 1.0, 1.0);
        let al = [(a * a + b * b) * c, a * a + b * b + 2.0 * a * c, 2.0 * a + c];
        let a0 = from_real_rows(3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -al[0], -al[1], -al[2]]);
        let mut a1 = CMat::zeros(3, 3);
        a1[(0, 1)] = re(-1.0);
        SystemPair::new("pair", a0, a1).unwrap()
    }

    fn ln_factorial(n: usize) -> f64 {
        (1..=n).map(|k| (k as f64).ln()).sum()
    }

    #[test]
    fn robot_blocks_are_poisson_weights() {
        for &(n, t) in &[(8usize, 0.5), (32, 3.0), (64, 40.0), (200, 500.0)] {
            let col = onesided_blocks(&robot(), n, t).unwrap();
            for l in 0..n {
                let want = l as f64 * t.ln() - ln_factorial(l) - t;
                let got = col.ln_norm(l);
                assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()), "n={n} t={t} l={l}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn zero_time() {
        let col = onesided_blocks(&pair211(), 5, 0.0).unwrap();
        assert_eq!(col.block(0), eye(3));
        for l in 1..5 {
            assert_eq!(frobenius(&col.block(l)), 0.0);
        }
    }

    #[test]
    fn onesided_matches_dense() {
        let s = pair211();
        let n = 16;
        let col = onesided_blocks(&s, n, 5.0).unwrap().materialize();
        let dense = expm_dense(&onesided_dense(&s, n), 5.0).unwrap();
        let scale = frobenius(&dense);
        for (l, b) in col.iter().enumerate() {
            let d = dense.view((3 * l, 0), (3, 3)).into_owned();
            assert!(frobenius(&(&d - b)) <= 1e-8 * scale, "block {l}");
        }
    }

    #[test]
    fn onesided_semigroup_law() {
        let s = pair211();
        let n = 12;
        let bt = onesided_blocks(&s, n, 1.5).unwrap().materialize();
        let bs = onesided_blocks(&s, n, 2.5).unwrap().materialize();
        let bts = onesided_blocks(&s, n, 4.0).unwrap().materialize();
        for l in 0..n {
            let mut acc = CMat::zeros(3, 3);
            for i in 0..=l {
                acc += &bt[i] * &bs[l - i];
            }
            assert!(frobenius(&(&acc - &bts[l])) <= 1e-8 * (1.0 + frobenius(&bts[l])));
        }
    }

    #[test]
    fn circulant_reconstruction_matches_dense() {
        let s = pair211();
        let n = 8;
        let f = circulant_exp(&s, n, 2.0).unwrap();
        let col = f.column();
        let dense = expm_dense(&circulant_dense(&s, n), 2.0).unwrap();
        for (d, b) in col.iter().enumerate() {
            let want = dense.view((3 * d, 0), (3, 3)).into_owned();
            assert!(frobenius(&(&want - b)) <= 1e-9 * frobenius(&dense));
        }
    }

    #[test]
    fn robot_modes() {
        let f = circulant_exp(&robot(), 6, 1.3).unwrap();
        for (j, e) in f.modes.iter().enumerate() {
            let w = num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / 6.0);
            assert!((e[(0, 0)] - ((w - 1.0) * 1.3).exp()).norm() <= 1e-14);
        }
    }
}
