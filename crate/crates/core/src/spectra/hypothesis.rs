//! Hypothesis report: which decay law the standing assumptions predict.

use num_complex::Complex64;
use serde::Serialize;

use super::{growth_param, level_polys, GrowthParam};
use crate::charfun::SystemPair;
use crate::linalg::{c, log_grid, re};
use crate::monotone::{cm_certify, tm_certify, CmGrid, Verdict, Witness, DEFAULT_TM_N};
use crate::ratfun::Poly;

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisConfig {
    pub s_min: f64,
    pub s_max: f64,
    pub s_per_decade: usize,
    /// Points per axis of the right-half-plane grid.
    pub rhp_points: usize,
    pub k_max: usize,
    pub cm_grid: CmGrid,
    pub tm_n: usize,
    pub tm_eps: Option<Vec<f64>>,
}

impl Default for HypothesisConfig {
    fn default() -> Self {
        HypothesisConfig {
            s_min: 1e-4,
            s_max: 1e4,
            s_per_decade: 50,
            rhp_points: 60,
            k_max: 8,
            cm_grid: CmGrid::default(),
            tm_n: DEFAULT_TM_N,
            tm_eps: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PredictedRate {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "t^{-1/2} log-factor")]
    LogFactor,
    #[serde(rename = "t^{-1/2} sharp")]
    Sharp,
}

/// Sampled evidence behind `omega_ok`.
#[derive(Clone, Debug, Serialize)]
pub struct OmegaCheck {
    pub s_samples: usize,
    /// `min (1 - |φ(is)|²) / (c_n s^n)` over the two-sided grid, `c_n` the leading Taylor coefficient.
    pub min_margin_ratio: f64,
    pub min_level: f64,
    pub rhp_max_abs: f64,
    pub rhp_radius: f64,
    pub degree_gap: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub label: String,
    pub hurwitz: bool,
    pub spectrum_a0: Vec<Complex64>,
    pub phi_at_zero: Complex64,
    pub omega_ok: bool,
    pub omega: Option<OmegaCheck>,
    pub n_phi: Option<usize>,
    pub growth: Option<GrowthParam>,
    pub cm: Option<Verdict>,
    pub cm_witness: Option<Witness>,
    pub tm: Option<Verdict>,
    pub tm_witness: Option<Witness>,
    pub tm_eps: Option<f64>,
    pub phi_is_p0_ratio: bool,
    pub predicted_rate: PredictedRate,
    pub flags: Vec<String>,
    pub notes: Vec<String>,
}

pub fn hypothesis_check(system: &SystemPair, cfg: &HypothesisConfig) -> HypothesisReport {
    let phi = &system.phi;
    let mut flags = system.flags.clone();
    let mut notes = Vec::new();

    let spectrum_a0 = system.spectrum_a0();
    let hurwitz = !spectrum_a0.is_empty() && spectrum_a0.iter().all(|z| z.re < 0.0);
    if !hurwitz {
        flags.push("A0 has an eigenvalue with nonnegative real part".into());
    }
    let phi_at_zero = phi.value(re(0.0));
    let normalized = (phi_at_zero - re(1.0)).norm() <= 1e-10;
    if !normalized {
        flags.push(format!("φ(0) = {phi_at_zero} differs from 1"));
    }

    let growth = match growth_param(phi, cfg.k_max) {
        Ok(g) => {
            if !g.consistent {
                flags.push("growth order disagrees with the second-order derivative test".into());
            }
            Some(g)
        }
        Err(e) => {
            flags.push(format!("growth parameter: {e}"));
            None
        }
    };
    let n_phi = growth.as_ref().and_then(|g| g.n);

    let omega = if normalized { Some(omega_check(system, cfg, n_phi)) } else { None };
    let omega_ok = normalized
        && omega.as_ref().is_some_and(|o| o.min_level > 0.0 && o.rhp_max_abs < 1.0 && o.degree_gap);
    if normalized && !omega_ok {
        flags.push("level region |φ| ≥ 1 leaves the open left half-plane".into());
    }
    notes.push(format!(
        "omega_ok sampled on s ∈ ±[{:e}, {:e}] ({} per decade) and a {}² right-half-plane grid",
        cfg.s_min, cfg.s_max, cfg.s_per_decade, cfg.rhp_points
    ));

    let (mut cm, mut cm_witness) = (None, None);
    match cm_certify(phi, cfg.cm_grid) {
        Ok(r) => {
            cm = Some(r.verdict);
            cm_witness = r.witness;
        }
        Err(e) => flags.push(format!("CM check skipped: {e}")),
    }
    let (mut tm, mut tm_witness, mut tm_eps) = (None, None, None);
    match tm_certify(phi, cfg.tm_eps.as_deref(), cfg.tm_n) {
        Ok(r) => {
            tm = Some(r.verdict);
            tm_witness = r.witness;
            tm_eps = r.certified_eps();
        }
        Err(e) => flags.push(format!("TM check skipped: {e}")),
    }

    let phi_is_p0_ratio = is_p0_ratio(system);

    let base = hurwitz && omega_ok && cm == Some(Verdict::Certified) && n_phi == Some(2);
    let predicted_rate = if !base {
        PredictedRate::None
    } else if tm == Some(Verdict::Certified) && phi_is_p0_ratio {
        PredictedRate::Sharp
    } else {
        PredictedRate::LogFactor
    };

    HypothesisReport {
        label: system.label.clone(),
        hurwitz,
        spectrum_a0,
        phi_at_zero,
        omega_ok,
        omega,
        n_phi,
        growth,
        cm,
        cm_witness,
        tm,
        tm_witness,
        tm_eps,
        phi_is_p0_ratio,
        predicted_rate,
        flags,
        notes,
    }
}

/// `φ = p0(0)/p0`, i.e. `q·p0 = p0(0)·p` coefficientwise.
fn is_p0_ratio(system: &SystemPair) -> bool {
    let lhs = system.phi.num() * &system.p0;
    let rhs = system.phi.den().scale(system.p0.coeff(0));
    let diff = &lhs - &rhs;
    let scale = lhs.max_abs_coeff().max(rhs.max_abs_coeff()).max(1e-300);
    diff.coeffs().iter().all(|z| z.norm() <= 1e-10 * scale)
}

fn omega_check(system: &SystemPair, cfg: &HypothesisConfig, n_phi: Option<usize>) -> OmegaCheck {
    let phi = &system.phi;
    let (num, den) = level_polys(phi);
    // drop the roundoff below the leading order so h stays accurate near 0
    let lead = n_phi.unwrap_or(0);
    let num = Poly::new(
        num.coeffs()
            .iter()
            .enumerate()
            .map(|(k, z)| if k < lead { re(0.0) } else { *z })
            .collect(),
    );
    let d0 = den.coeff(0).norm();
    let c_n = num.coeff(lead).re / d0;
    let mut min_level = f64::INFINITY;
    let mut min_margin_ratio = f64::INFINITY;
    let ss = log_grid(cfg.s_min, cfg.s_max, cfg.s_per_decade);
    for &s0 in &ss {
        for s in [s0, -s0] {
            let h = (num.eval(re(s)) / den.eval(re(s))).re;
            min_level = min_level.min(h);
            if c_n > 0.0 {
                min_margin_ratio = min_margin_ratio.min(h / (c_n * s.abs().powi(lead as i32)));
            }
        }
    }
    let pole_max = phi.poles().iter().map(|r| r.value.norm()).fold(0.0, f64::max);
    let radius = 2.0 * (1.0 + pole_max);
    let n = cfg.rhp_points.max(4);
    let mut rhp_max_abs: f64 = 0.0;
    for i in 1..=n {
        let x = radius * i as f64 / n as f64;
        for j in 0..=2 * n {
            let y = -radius + radius * j as f64 / n as f64;
            let lam = c(x, y);
            if lam.norm() < 1e-3 {
                continue;
            }
            rhp_max_abs = rhp_max_abs.max(phi.value(lam).norm());
        }
    }
    OmegaCheck {
        s_samples: 2 * ss.len(),
        min_margin_ratio,
        min_level,
        rhp_max_abs,
        rhp_radius: radius,
        degree_gap: phi.num().degree() < phi.den().degree() || phi.num().is_zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;

    #[test]
    fn robot_report() {
        let s = SystemPair::new("robot", from_real_rows(1, &[-1.0]), from_real_rows(1, &[1.0])).unwrap();
        let r = hypothesis_check(&s, &HypothesisConfig::default());
        assert!(r.hurwitz && r.omega_ok && r.phi_is_p0_ratio);
        assert_eq!(r.n_phi, Some(2));
        assert_eq!(r.cm, Some(Verdict::Certified));
        assert_eq!(r.tm, Some(Verdict::Certified));
        assert_eq!(r.predicted_rate, PredictedRate::Sharp);
    }

    #[test]
    fn unstable_a0_predicts_nothing() {
        let s = SystemPair::new("up", from_real_rows(1, &[1.0]), from_real_rows(1, &[1.0])).unwrap();
        let r = hypothesis_check(&s, &HypothesisConfig::default());
        assert!(!r.hurwitz);
        assert_eq!(r.predicted_rate, PredictedRate::None);
    }
}
