//! Self-contained verification suite over the model gallery. Each criterion
//! returns a one-line detail; `run_all` is what `chainsys verify` and the
//! acceptance tests execute.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charfun::{verify_char, SystemPair};
use crate::linalg::{c, eye, log_grid, re, CVec};
use crate::models::{cascade, gallery, platoon, platoon_from_zeros, platoon_pair, robot};
use crate::monotone::{
    cm_certify, ind_chain_check, phi_eps_max, tm_certify, tm_coeffs, tm_rescale, CmGrid, Verdict, DEFAULT_TM_N,
};
use crate::ratfun::{Poly, RatFun};
use crate::semigroup::{
    cesaro_norms, circulant_resolvent_apply, decay_curve, fit_rate, kernel_projection, laurent_decay,
    power_bound_check, spectral_lower_bound, sup_over_n, CesaroClass, CurveOptions, Kind, PNorm, Quantity,
    TruncationSpec,
};
use crate::spectra::{
    circulant_dense, circulant_spectrum, eigvals, growth_param, matched_distance, resolvent_bracket,
    resolvent_norm_twosided, set_distance,
};

#[derive(Clone, Debug, serde::Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub const CRITERIA: [(usize, &str, fn() -> Check); 13] = [
    (1, "characteristic extraction", c1_extraction),
    (2, "monotonicity boundary", c2_boundary),
    (3, "TM coefficients", c3_tm_coefficients),
    (4, "growth parameter", c4_growth),
    (5, "circulant spectra", c5_circulant_spectra),
    (6, "uniform decay, circulant robot", c6_uniform_decay),
    (7, "one-sided robot sharpness", c7_onesided_robot),
    (8, "no-log TM rate", c8_no_log_rate),
    (9, "uniform semigroup bound", c9_uniform_bound),
    (10, "Cesàro classification", c10_cesaro),
    (11, "power-boundedness", c11_power_bound),
    (12, "resolvent machinery", c12_resolvent),
    (13, "kernel projection", c13_kernel_projection),
];

pub fn run(id: usize) -> Option<CriterionResult> {
    let (id, name, f) = *CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let out = f();
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail) = match out {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Some(CriterionResult { id, name, passed, detail, seconds })
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|c| run(c.0)).collect()
}

pub fn format_line(r: &CriterionResult) -> String {
    format!(
        "[{}] {:>2}. {} ({:.1}s): {}",
        if r.passed { "PASS" } else { "FAIL" },
        r.id,
        r.name,
        r.seconds,
        r.detail
    )
}

fn coeff_close(a: &Poly, b: &Poly, tol: f64) -> bool {
    let n = a.coeffs().len().max(b.coeffs().len());
    let scale = a.max_abs_coeff().max(b.max_abs_coeff()).max(1.0);
    (0..n).all(|k| (a.coeff(k) - b.coeff(k)).norm() <= tol * scale)
}

fn c1_extraction() -> Check {
    let r = robot().map_err(err)?;
    ensure!(
        coeff_close(r.phi.num(), &Poly::from_real(&[1.0]), 1e-14)
            && coeff_close(r.phi.den(), &Poly::from_real(&[1.0, 1.0]), 1e-14),
        "robot φ = {:?}",
        r.phi
    );
    let mut worst = verify_char(&r, 64);
    let mut family: Vec<SystemPair> = vec![
        platoon_from_zeros([1.0, 2.0, 3.0], false).map_err(err)?,
        platoon_pair(2.0, 1.0, 1.0).map_err(err)?,
        platoon_pair(1.0, 1.0, 1.0).map_err(err)?,
        platoon_pair(0.5, 1.0, 1.0).map_err(err)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..6 {
        let z: Vec<f64> = (0..3).map(|_| rng.gen_range(0.2..4.0)).collect();
        family.push(platoon_from_zeros([z[0], z[1], z[2]], false).map_err(err)?);
    }
    for s in &family {
        // φ = α0/p0: numerator constant α0, denominator p0
        let a0 = s.p0.coeff(0);
        let want = RatFun::new(Poly::constant(a0), s.p0.clone()).map_err(err)?;
        ensure!(
            coeff_close(s.phi.num(), want.num(), 1e-10) && coeff_close(s.phi.den(), want.den(), 1e-10),
            "{}: φ differs from α0/p0",
            s.label
        );
        worst = worst.max(verify_char(s, 64));
    }
    ensure!(worst <= 1e-9, "verify_char residual {worst:.2e} > 1e-9");
    Ok(format!("robot and {} platoon systems, max residual {worst:.1e}", family.len()))
}

fn pair_phi(a: f64, b: f64, c: f64) -> Result<RatFun, String> {
    Ok(platoon_pair(a, b, c).map_err(err)?.phi)
}

fn c2_boundary() -> Check {
    let start = Instant::now();
    let vals: Vec<f64> = (1..=8).map(|k| 0.25 * k as f64).collect();
    let mut inconclusive = 0;
    for &a in &vals {
        for &cc in &vals {
            let phi = pair_phi(a, 1.0, cc)?;
            let cm = cm_certify(&phi, CmGrid::default()).map_err(err)?.verdict;
            let tm = tm_certify(&phi, None, DEFAULT_TM_N).map_err(err)?.verdict;
            let cm_ok = if a > cc {
                cm == Verdict::Certified
            } else if a == cc {
                cm != Verdict::Refuted
            } else {
                cm == Verdict::Refuted
            };
            ensure!(cm_ok, "a={a} c={cc}: CM verdict {cm:?}");
            if cm == Verdict::Inconclusive {
                inconclusive += 1;
            }
            let tm_ok = if a > cc { tm == Verdict::Certified } else { tm == Verdict::RefutedAtTestedEps };
            ensure!(tm_ok, "a={a} c={cc}: TM verdict {tm:?}");
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs <= 60.0, "grid took {secs:.1}s");
    Ok(format!("64 grid points consistent ({inconclusive} CM inconclusive on a = c) in {secs:.1}s"))
}

fn c3_tm_coefficients() -> Check {
    let phi = robot().map_err(err)?.phi;
    let half = tm_coeffs(&phi, 0.5, 100).map_err(err)?;
    let worst = half
        .a
        .iter()
        .enumerate()
        .map(|(n, a)| (a - 0.5f64.powi(n as i32 + 1)).abs())
        .fold(0.0, f64::max);
    ensure!(worst <= 1e-12, "robot a_n error {worst:.2e}");
    let mut rescale_err: f64 = 0.0;
    let mut sum_err: f64 = 0.0;
    let others = [
        phi.clone(),
        platoon_from_zeros([1.0, 2.0, 3.0], false).map_err(err)?.phi,
        cascade(&[1.0, 2.0]).map_err(err)?.phi,
    ];
    for f in &others {
        let em = phi_eps_max(f).map_err(err)?;
        let base = tm_coeffs(f, 0.8 * em, 300).map_err(err)?;
        let beta = 0.375;
        let direct = tm_coeffs(f, 0.8 * em * beta, 300).map_err(err)?;
        let via = tm_rescale(&base.a, beta);
        for (x, y) in direct.a.iter().zip(&via) {
            rescale_err = rescale_err.max((x - y).abs());
        }
        let long = tm_coeffs(f, 0.8 * em * beta, 4000).map_err(err)?;
        ensure!(long.tail_bound <= 1e-10, "tail bound {:.2e} after 4000 terms", long.tail_bound);
        let total: f64 = long.a.iter().sum::<f64>();
        sum_err = sum_err.max((total - 1.0).abs());
    }
    ensure!(rescale_err <= 1e-10, "rescaling identity error {rescale_err:.2e}");
    ensure!(sum_err <= 1e-9, "Σ a_n differs from 1 by {sum_err:.2e}");
    let robot_sum: f64 = tm_coeffs(&phi, 0.5, 2000).map_err(err)?.a.iter().sum();
    ensure!((robot_sum - 1.0).abs() <= 1e-9, "robot Σ a_n = {robot_sum}");
    Ok(format!("a_n error {worst:.1e}, rescale {rescale_err:.1e}, Σ a_n − 1 ≤ {sum_err:.1e}"))
}

fn c4_growth() -> Check {
    let mut count = 0;
    for e in gallery() {
        let cm = cm_certify(&e.system.phi, CmGrid::default()).map_err(err)?.verdict;
        if cm != Verdict::Certified {
            continue;
        }
        let g = growth_param(&e.system.phi, 8).map_err(err)?;
        ensure!(g.n == Some(2) && g.consistent, "{}: n_φ = {:?}", e.system.label, g.n);
        count += 1;
    }
    ensure!(count >= 4, "only {count} CM-certified gallery systems");
    let quartic = RatFun::new(Poly::from_real(&[2.0]), Poly::from_real(&[2.0, 2.0, 1.0])).map_err(err)?;
    let g = growth_param(&quartic, 8).map_err(err)?;
    ensure!(g.n == Some(4), "2/(λ²+2λ+2): n_φ = {:?}", g.n);
    Ok(format!("n_φ = 2 on {count} CM systems, 4 for 2/(λ²+2λ+2)"))
}

fn c5_circulant_spectra() -> Check {
    let r = robot().map_err(err)?;
    let mut robot_worst: f64 = 0.0;
    for n in 2..=64 {
        let got: Vec<Complex64> = circulant_spectrum(&r, n).map_err(err)?.iter().map(|e| e.value).collect();
        let want: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64) - 1.0)
            .collect();
        robot_worst = robot_worst.max(set_distance(&got, &want));
    }
    ensure!(robot_worst <= 1e-10, "robot set distance {robot_worst:.2e}");
    let mut dense_worst: f64 = 0.0;
    let mut level_worst: f64 = 0.0;
    for e in gallery() {
        let s = &e.system;
        let a0_spec = s.spectrum_a0();
        for n in 2..=32 {
            let blocks: Vec<Complex64> = circulant_spectrum(s, n).map_err(err)?.iter().map(|e| e.value).collect();
            let dense = eigvals(&circulant_dense(s, n)).map_err(err)?;
            dense_worst = dense_worst.max(matched_distance(&blocks, &dense));
            for lam in &blocks {
                if a0_spec.iter().any(|z| (z - lam).norm() <= 1e-7 * (1.0 + lam.norm())) {
                    continue;
                }
                level_worst = level_worst.max((s.phi.value(*lam).powi(n as i32) - 1.0).norm());
            }
        }
    }
    ensure!(dense_worst <= 1e-8, "block vs dense eigenvalues {dense_worst:.2e}");
    ensure!(level_worst <= 1e-8, "|φ^N − 1| up to {level_worst:.2e}");
    Ok(format!(
        "robot {robot_worst:.1e}, dense match {dense_worst:.1e}, |φ^N − 1| ≤ {level_worst:.1e}"
    ))
}

fn c6_uniform_decay() -> Check {
    let r = robot().map_err(err)?;
    let ns: Vec<usize> = (2..=9).map(|k| 1usize << k).collect();
    let ts = log_grid(1e2, 1e4, 40);
    let sup = sup_over_n(&r, Kind::Circulant, &ns, PNorm::Two, &ts, &CurveOptions::default()).map_err(err)?;
    let plain = fit_rate(&sup, (1e2, 1e4), false).map_err(err)?;
    let logged = fit_rate(&sup, (1e2, 1e4), true).map_err(err)?;
    ensure!((0.45..=0.55).contains(&plain.alpha), "α = {:.4}", plain.alpha);
    ensure!(logged.beta.abs() <= 0.2, "β = {:.4}", logged.beta);
    // ‖A_N T_N(N²)‖ ≥ c/N with c = 4e^{-2π²}
    let cst = 4.0 * (-2.0 * std::f64::consts::PI.powi(2)).exp();
    let mut worst = f64::INFINITY;
    for n in 2..=512usize {
        let t = (n * n) as f64;
        let curve = decay_curve(&r, TruncationSpec { kind: Kind::Circulant, n }, PNorm::Two, &[t], &CurveOptions::default())
            .map_err(err)?;
        let spec: Vec<Complex64> = circulant_spectrum(&r, n).map_err(err)?.iter().map(|e| e.value).collect();
        let lb = spectral_lower_bound(&spec, t);
        ensure!(curve.samples[0].lower >= lb * (1.0 - 1e-12), "N={n}: norm below spectral bound");
        worst = worst.min(curve.samples[0].lower * n as f64 / cst);
    }
    ensure!(worst >= 1.0, "N·‖A_N T_N(N²)‖ / c drops to {worst:.3}");
    Ok(format!(
        "α = {:.4}, β = {:.4} (with-log α = {:.3}); min N·‖A_N T_N(N²)‖/c = {worst:.2}",
        plain.alpha, logged.beta, logged.alpha
    ))
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn c7_onesided_robot() -> Check {
    let r = robot().map_err(err)?;
    let ns = [2usize, 3, 4, 6, 8, 12, 16, 24, 32];
    let ts = log_grid(0.1, 200.0, 20);
    let mut eq_worst: f64 = 0.0;
    let mut bound_slack = f64::INFINITY;
    for p in [PNorm::One, PNorm::Inf] {
        let mut prev: Option<Vec<f64>> = None;
        for &n in &ns {
            let spec = TruncationSpec { kind: Kind::Onesided, n };
            let curve = decay_curve(&r, spec, p, &ts, &CurveOptions::default()).map_err(err)?;
            ensure!(curve.exact, "N={n}: bracket not exact");
            for s in &curve.samples {
                let bound = ((n - 1) as f64 * s.t.ln() - ln_factorial(n - 1) - s.t).exp();
                ensure!(s.lower >= bound * (1.0 - 1e-12), "N={n} t={}: {} < {}", s.t, s.lower, bound);
                if bound > 0.0 {
                    bound_slack = bound_slack.min(s.lower / bound);
                }
            }
            let tn = n as f64;
            let at = decay_curve(&r, spec, p, &[tn], &CurveOptions::default()).map_err(err)?;
            let closed = ((n - 1) as f64 * tn.ln() - ln_factorial(n - 1) - tn).exp();
            eq_worst = eq_worst.max((at.samples[0].upper - closed).abs() / closed);
            let uppers: Vec<f64> = curve.samples.iter().map(|s| s.upper).collect();
            if let Some(pv) = &prev {
                for (k, (a, b)) in pv.iter().zip(&uppers).enumerate() {
                    ensure!(*a <= b * (1.0 + 1e-12), "nesting fails at N={n}, t={}", ts[k]);
                }
            }
            prev = Some(uppers);
        }
    }
    ensure!(eq_worst <= 1e-9, "equality at t = N off by {eq_worst:.2e}");
    Ok(format!("bound holds (min ratio {bound_slack:.3}), equality at t = N to {eq_worst:.1e}, nesting holds"))
}

fn c8_no_log_rate() -> Check {
    let systems = [robot().map_err(err)?, platoon_from_zeros([1.0, 2.0, 3.0], false).map_err(err)?];
    let ts = log_grid(1.0, 1e4, 40);
    let mut notes = Vec::new();
    for s in &systems {
        let curve = laurent_decay(s, &ts, Quantity::Derivative).map_err(err)?;
        let scaled: Vec<(f64, f64)> = curve.samples.iter().map(|p| (p.t, p.upper * p.t.sqrt())).collect();
        let bound = scaled.iter().map(|p| p.1).fold(0.0, f64::max);
        ensure!(bound.is_finite(), "{}: unbounded", s.label);
        let tail: Vec<(f64, f64)> = scaled
            .iter()
            .filter(|p| p.0 >= 1e3)
            .map(|p| (p.0.ln(), p.1.ln()))
            .collect();
        let k = tail.len() as f64;
        let mx = tail.iter().map(|p| p.0).sum::<f64>() / k;
        let my = tail.iter().map(|p| p.1).sum::<f64>() / k;
        let slope = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / tail.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        ensure!(slope.abs() <= 0.05, "{}: slope of log(y·t^½) is {slope:.4}", s.label);
        notes.push(format!("{} slope {slope:+.4}, sup y·t^½ = {bound:.3}", s.label));
    }
    Ok(notes.join("; "))
}

fn c9_uniform_bound() -> Check {
    let ts = log_grid(1.0, 1e4, 40);
    let ns: Vec<usize> = (2..=8).map(|k| 1usize << k).collect();
    let opts = CurveOptions { quantity: Quantity::Semigroup, ..CurveOptions::default() };
    let mut notes = Vec::new();
    for e in gallery().into_iter().filter(|e| e.expect_cm) {
        let s = &e.system;
        let sup = sup_over_n(s, Kind::Circulant, &ns, PNorm::Two, &ts, &opts).map_err(err)?;
        let mut running = Vec::with_capacity(ts.len());
        let mut best: f64 = 0.0;
        for p in &sup.samples {
            best = best.max(p.upper);
            running.push((p.t, best));
        }
        let at_1e3 = running.iter().rfind(|p| p.0 <= 1e3 * (1.0 + 1e-12)).unwrap().1;
        let end = running.last().unwrap().1;
        ensure!(end.is_finite() && end <= 1.01 * at_1e3, "{}: running max grows {at_1e3:.4} → {end:.4}", s.label);
        notes.push(format!("{} {end:.3}", s.label));
    }
    Ok(format!("plateaus: {}", notes.join(", ")))
}

fn blocks_from(values: &[[f64; 3]]) -> Vec<CVec> {
    values.iter().map(|v| CVec::from_iterator(3, v.iter().map(|x| re(*x)))).collect()
}

fn c10_cesaro() -> Check {
    let r = robot().map_err(err)?;
    let one = |v: f64| CVec::from_element(1, re(v));
    let n_max = 2000;
    let unit = cesaro_norms(&r, &[one(1.0)], PNorm::One, n_max).map_err(err)?;
    ensure!(unit.norms.iter().all(|v| *v == 1.0), "e1 norms are not identically 1");
    ensure!(unit.class == CesaroClass::Stagnates, "e1 class {:?}", unit.class);
    let diff = cesaro_norms(&r, &[one(1.0), one(-1.0)], PNorm::One, n_max).map_err(err)?;
    ensure!(
        diff.norms.iter().enumerate().all(|(k, v)| *v == 2.0 / (k + 1) as f64),
        "e1 − e2 norms differ from 2/n"
    );
    ensure!(diff.class == CesaroClass::InverseN, "e1 − e2 class {:?}", diff.class);
    let p = platoon_from_zeros([1.0, 2.0, 3.0], false).map_err(err)?;
    let x0 = blocks_from(&[[1.0, 0.3, -0.2], [-0.4, 0.5, 0.1], [-0.6, -1.0, 0.7]]);
    let pl = cesaro_norms(&p, &x0, PNorm::Two, n_max).map_err(err)?;
    ensure!(pl.exponent <= -0.9, "platoon exponent {:.3}", pl.exponent);
    Ok(format!(
        "robot e1 stagnates at 1, e1 − e2 equals 2/n, platoon exponent {:.3}",
        pl.exponent
    ))
}

fn c11_power_bound() -> Check {
    let r = robot().map_err(err)?;
    let pb = power_bound_check(&r, 32, 0.5, 10_000, PNorm::Inf).map_err(err)?;
    ensure!((pb.sup - 1.0).abs() <= 1e-12, "robot sup ‖B^n‖_∞ = {}", pb.sup);
    let p = platoon_from_zeros([1.0, 2.0, 3.0], false).map_err(err)?;
    let em = phi_eps_max(&p.phi).map_err(err)?;
    let pp = power_bound_check(&p, 64, em / 4.0, 10_000, PNorm::Two).map_err(err)?;
    ensure!(pp.sup.is_finite() && pp.stable, "platoon sup {} stable {}", pp.sup, pp.stable);
    let mut count = 0;
    for e in gallery() {
        let cert = tm_certify(&e.system.phi, None, DEFAULT_TM_N).map_err(err)?;
        let Some(eps) = cert.certified_eps() else { continue };
        let a = tm_coeffs(&e.system.phi, eps, 200).map_err(err)?;
        let chain = ind_chain_check(&a.a, 200);
        ensure!(chain.holds, "{}: chain inequality fails at n = {:?}", e.system.label, chain.first_failure);
        count += 1;
    }
    ensure!(count >= 3, "only {count} TM-certified systems");
    Ok(format!(
        "robot ‖B^n‖_∞ = 1; platoon sup ‖B^n‖₂ = {:.4} (stable); chain inequality on {count} TM systems",
        pp.sup
    ))
}

fn c12_resolvent() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_gap = f64::NEG_INFINITY;
    for s in [robot().map_err(err)?, platoon_pair(2.0, 1.0, 1.0).map_err(err)?] {
        let spec = s.spectrum_a0();
        let mut taken = 0;
        let mut tries = 0;
        while taken < 20 {
            tries += 1;
            ensure!(tries < 100_000, "{}: could not sample λ", s.label);
            let lam = c(rng.gen_range(-0.5..3.0), rng.gen_range(-3.0..3.0));
            if spec.iter().any(|z| (z - lam).norm() < 1e-2) || s.phi.value(lam).norm() >= 1.0 - 1e-3 {
                continue;
            }
            let br = resolvent_bracket(&s, lam).map_err(err)?;
            let norm = resolvent_norm_twosided(&s, lam, 1024).map_err(err)?;
            let gap = (norm - br.center()).abs() - br.r_norm;
            let slack = 1e-9 * (norm + br.center());
            ensure!(gap <= slack, "{} λ={lam}: bracket violated by {gap:.2e}", s.label);
            worst_gap = worst_gap.max(gap / norm);
            taken += 1;
        }
    }
    let mut worst_res: f64 = 0.0;
    for e in gallery() {
        let s = &e.system;
        for n in [5usize, 16] {
            let y: Vec<CVec> = (0..n)
                .map(|_| CVec::from_fn(s.m, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect();
            for lam in [c(0.7, 0.4), c(-0.3, 2.0), c(2.5, -1.0)] {
                let x = circulant_resolvent_apply(s, lam, &y).map_err(err)?;
                let a = circulant_dense(s, n);
                let flat = CVec::from_iterator(s.m * n, y.iter().flat_map(|v| v.iter().copied()));
                let dense = (eye(s.m * n) * lam - a).lu().solve(&flat).ok_or("dense solve failed")?;
                let got = CVec::from_iterator(s.m * n, x.iter().flat_map(|v| v.iter().copied()));
                worst_res = worst_res.max((got - &dense).norm() / dense.norm());
            }
        }
    }
    ensure!(worst_res <= 1e-8, "resolvent formula error {worst_res:.2e}");
    Ok(format!("bracket slack ≤ {worst_gap:.1e} (relative), formula vs dense {worst_res:.1e}"))
}

fn c13_kernel_projection() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut pattern: f64 = 0.0;
    let mut kernel: f64 = 0.0;
    let mut idem: f64 = 0.0;
    let systems = [
        platoon_from_zeros([1.0, 2.0, 3.0], false).map_err(err)?,
        platoon_pair(2.0, 1.0, 1.0).map_err(err)?,
        platoon([6.0, 11.0, 6.0], "platoon(6,11,6)".into()).map_err(err)?,
    ];
    for s in &systems {
        let alpha0 = -s.a0[(2, 0)].re;
        let alpha1 = -s.a0[(2, 1)].re;
        for n in [4usize, 16, 33] {
            let x: Vec<CVec> = (0..n)
                .map(|_| CVec::from_fn(3, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect();
            let xnorm = x.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
            let pr = kernel_projection(s, &x).map_err(err)?;
            let cx: Complex64 = x.iter().map(|v| v[0]).sum::<Complex64>() / n as f64;
            let want = [cx, -cx * alpha0 / alpha1, re(0.0)];
            let scale = cx.norm().max(1e-300);
            for i in 0..3 {
                pattern = pattern.max((pr.block[i] - want[i]).norm() / scale);
            }
            kernel = kernel.max(pr.kernel_residual / xnorm);
            let again = kernel_projection(s, &pr.sequence(n)).map_err(err)?;
            idem = idem.max((&again.block - &pr.block).norm() / pr.block.norm());
        }
    }
    ensure!(pattern <= 1e-10, "pattern error {pattern:.2e}");
    ensure!(kernel <= 1e-9, "‖A_N P_N x‖/‖x‖ = {kernel:.2e}");
    ensure!(idem <= 1e-10, "‖P_N² x − P_N x‖ relative {idem:.2e}");
    Ok(format!("pattern {pattern:.1e}, kernel residual {kernel:.1e}, idempotence {idem:.1e}"))
}
