//! Model gallery, constructors and system files.
//!
//! The platoon family uses the companion form
//! `A0 = [[0,1,0],[0,0,1],[-α0,-α1,-α2]]` with a single `-1` coupling the
//! predecessor's velocity into the spacing equation, so `φ = α0/p0`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charfun::{CharFunError, SystemPair};
use crate::linalg::{c, from_real_rows, re, CMat};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("file error: {0}")]
    File(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    CharFun(#[from] CharFunError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Robot,
    Platoon,
    PlatoonFromZeros,
    PlatoonPair,
    Cascade,
    Custom,
}

impl FromStr for ModelName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "robot" => ModelName::Robot,
            "platoon" => ModelName::Platoon,
            "platoon_from_zeros" => ModelName::PlatoonFromZeros,
            "platoon_pair" => ModelName::PlatoonPair,
            "cascade" => ModelName::Cascade,
            "custom" => ModelName::Custom,
            _ => return Err(format!("unknown model `{s}`")),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelSpecifier {
    pub name: ModelName,
    pub params: Vec<f64>,
    pub path: Option<PathBuf>,
}

impl ModelSpecifier {
    pub fn new(name: ModelName, params: &[f64]) -> Self {
        ModelSpecifier { name, params: params.to_vec(), path: None }
    }
}

fn arity(spec: &ModelSpecifier, allowed: &[usize]) -> Result<(), ModelError> {
    if allowed.contains(&spec.params.len()) {
        Ok(())
    } else {
        Err(ModelError::BadParams(format!(
            "{:?} takes {:?} parameters, got {}",
            spec.name,
            allowed,
            spec.params.len()
        )))
    }
}

pub fn build(spec: &ModelSpecifier) -> Result<SystemPair, ModelError> {
    if spec.params.iter().any(|x| !x.is_finite()) {
        return Err(ModelError::BadParams("non-finite parameter".into()));
    }
    let p = &spec.params;
    match spec.name {
        ModelName::Robot => {
            arity(spec, &[0])?;
            robot()
        }
        ModelName::Platoon => {
            arity(spec, &[3])?;
            platoon([p[0], p[1], p[2]], "platoon".into())
        }
        ModelName::PlatoonFromZeros => {
            arity(spec, &[3, 4])?;
            let literal = match p.get(3) {
                None => false,
                Some(s) if *s == 1.0 => false,
                Some(s) if *s == -1.0 => true,
                Some(s) => return Err(ModelError::BadParams(format!("sign must be 1 or -1, got {s}"))),
            };
            platoon_from_zeros([p[0], p[1], p[2]], literal)
        }
        ModelName::PlatoonPair => {
            arity(spec, &[3])?;
            platoon_pair(p[0], p[1], p[2])
        }
        ModelName::Cascade => {
            if p.is_empty() {
                return Err(ModelError::BadParams("cascade needs at least one rate".into()));
            }
            cascade(p)
        }
        ModelName::Custom => {
            let path = spec
                .path
                .as_ref()
                .ok_or_else(|| ModelError::BadParams("custom model needs a file".into()))?;
            load(path)
        }
    }
}

pub fn robot() -> Result<SystemPair, ModelError> {
    Ok(SystemPair::new("robot", from_real_rows(1, &[-1.0]), from_real_rows(1, &[1.0]))?)
}

pub fn platoon(alpha: [f64; 3], label: String) -> Result<SystemPair, ModelError> {
    let a0 = from_real_rows(3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -alpha[0], -alpha[1], -alpha[2]]);
    let mut a1 = CMat::zeros(3, 3);
    a1[(0, 1)] = re(-1.0);
    Ok(SystemPair::new(label, a0, a1)?)
}

/// `p0(λ) = (λ+ζ1)(λ+ζ2)(λ+ζ3)`. With `literal_sign` the constant term is
/// negated, which puts a positive real eigenvalue into `σ(A0)`.
pub fn platoon_from_zeros(z: [f64; 3], literal_sign: bool) -> Result<SystemPair, ModelError> {
    let prod = z[0] * z[1] * z[2];
    let a0 = if literal_sign { -prod } else { prod };
    let a1 = z[0] * z[1] + z[1] * z[2] + z[2] * z[0];
    let a2 = z[0] + z[1] + z[2];
    let label = format!("platoon_from_zeros({},{},{})", z[0], z[1], z[2]);
    let mut s = platoon([a0, a1, a2], label)?;
    if literal_sign {
        s.flags.push("literal negative sign for α0 requested; A0 then has a positive real eigenvalue".into());
    }
    Ok(s)
}

/// `σ(A0) = {−c, −a ± ib}` and `φ = (a²+b²)c / ((λ+c)(λ²+2aλ+a²+b²))`.
pub fn platoon_pair(a: f64, b: f64, c: f64) -> Result<SystemPair, ModelError> {
    let alpha = [(a * a + b * b) * c, a * a + b * b + 2.0 * a * c, 2.0 * a + c];
    platoon(alpha, format!("platoon_pair({a},{b},{c})"))
}

/// Lower bidiagonal `A0` (diagonal `−ζ_i`, unit subdiagonal) and
/// `A1 = (Π ζ_i) e_1 e_mᵀ`, so `φ = Π ζ_i / Π (λ + ζ_i)`.
pub fn cascade(z: &[f64]) -> Result<SystemPair, ModelError> {
    let m = z.len();
    let mut a0 = CMat::zeros(m, m);
    for i in 0..m {
        a0[(i, i)] = re(-z[i]);
        if i > 0 {
            a0[(i, i - 1)] = re(1.0);
        }
    }
    let mut a1 = CMat::zeros(m, m);
    a1[(0, m - 1)] = re(z.iter().product());
    let names: Vec<String> = z.iter().map(|x| x.to_string()).collect();
    Ok(SystemPair::new(format!("cascade({})", names.join(",")), a0, a1)?)
}

/// Gallery entry with the expected complete-monotonicity status.
pub struct GalleryEntry {
    pub system: SystemPair,
    pub expect_cm: bool,
}

pub fn gallery() -> Vec<GalleryEntry> {
    let entries: Vec<(Result<SystemPair, ModelError>, bool)> = vec![
        (robot(), true),
        (platoon_from_zeros([1.0, 2.0, 3.0], false), true),
        (platoon_pair(2.0, 1.0, 1.0), true),
        (platoon_pair(1.0, 1.0, 1.0), true),
        (cascade(&[1.0, 2.0]), true),
        (platoon_pair(0.5, 1.0, 1.0), false),
    ];
    entries
        .into_iter()
        .map(|(s, cm)| GalleryEntry { system: s.expect("gallery systems are admissible"), expect_cm: cm })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    schema: u32,
    label: String,
    m: usize,
    #[serde(rename = "A0")]
    a0: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "A1")]
    a1: Vec<Vec<[f64; 2]>>,
}

fn to_rows(a: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect())
        .collect()
}

fn from_rows(rows: &[Vec<[f64; 2]>], m: usize, name: &str) -> Result<CMat, ModelError> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(ModelError::Schema(format!("{name} must be {m}x{m}")));
    }
    Ok(CMat::from_fn(m, m, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

pub fn to_json(system: &SystemPair) -> String {
    let f = SystemFile {
        schema: 1,
        label: system.label.clone(),
        m: system.m,
        a0: to_rows(&system.a0),
        a1: to_rows(&system.a1),
    };
    serde_json::to_string_pretty(&f).expect("plain data serializes")
}

pub fn from_json(text: &str) -> Result<SystemPair, ModelError> {
    from_json_with_tol(text, crate::charfun::DEFAULT_TOL)
}

/// Like `from_json` with an explicit extraction tolerance.
pub fn from_json_with_tol(text: &str, tol: f64) -> Result<SystemPair, ModelError> {
    let f: SystemFile = serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))?;
    if f.schema != 1 {
        return Err(ModelError::Schema(format!("unsupported schema version {}", f.schema)));
    }
    if f.m == 0 {
        return Err(ModelError::Schema("m must be positive".into()));
    }
    let a0 = from_rows(&f.a0, f.m, "A0")?;
    let a1 = from_rows(&f.a1, f.m, "A1")?;
    Ok(SystemPair::with_tol(f.label, a0, a1, tol)?)
}

pub fn save(system: &SystemPair, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, to_json(system)).map_err(|e| ModelError::File(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<SystemPair, ModelError> {
    load_with_tol(path, crate::charfun::DEFAULT_TOL)
}

pub fn load_with_tol(path: &Path, tol: f64) -> Result<SystemPair, ModelError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| ModelError::File(format!("{}: {e}", path.display())))?;
    from_json_with_tol(&text, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfun::verify_char;
    use crate::ratfun::Poly;
    use crate::spectra::{eigvals, matched_distance};

    #[test]
    fn robot_phi() {
        let s = robot().unwrap();
        assert_eq!(s.phi.num(), &Poly::from_real(&[1.0]));
        assert_eq!(s.phi.den(), &Poly::from_real(&[1.0, 1.0]));
    }

    #[test]
    fn pair_phi_and_spectrum() {
        let s = platoon_pair(1.0, 1.0, 1.0).unwrap();
        let want = Poly::from_real(&[2.0, 4.0, 3.0, 1.0]);
        for k in 0..4 {
            assert!((s.phi.den().coeff(k) - want.coeff(k)).norm() < 1e-12);
        }
        assert!((s.phi.num().coeff(0).re - 2.0).abs() < 1e-12);
        let eig = eigvals(&s.a0).unwrap();
        assert!(matched_distance(&eig, &[c(-1.0, 0.0), c(-1.0, 1.0), c(-1.0, -1.0)]) <= 1e-8);
    }

    #[test]
    fn cascade_phi() {
        let s = cascade(&[1.0, 2.0]).unwrap();
        let want_den = Poly::from_real(&[2.0, 3.0, 1.0]);
        for k in 0..3 {
            assert!((s.phi.den().coeff(k) - want_den.coeff(k)).norm() <= 1e-10);
        }
        assert!((s.phi.num().coeff(0).re - 2.0).abs() <= 1e-10);
        assert_eq!(s.phi.num().degree(), 0);
    }

    #[test]
    fn gallery_verifies() {
        for e in gallery() {
            assert!(verify_char(&e.system, 32) <= 1e-9, "{}", e.system.label);
        }
    }

    #[test]
    fn literal_sign_is_flagged() {
        let s = platoon_from_zeros([1.0, 2.0, 3.0], true).unwrap();
        assert!(!s.flags.is_empty());
        assert!(eigvals(&s.a0).unwrap().iter().any(|z| z.re > 0.0));
    }

    #[test]
    fn arity_is_checked() {
        let spec = ModelSpecifier::new(ModelName::PlatoonPair, &[1.0, 2.0]);
        assert!(matches!(build(&spec), Err(ModelError::BadParams(_))));
    }

    #[test]
    fn json_round_trip() {
        let s = platoon_pair(2.0, 1.0, 1.0).unwrap();
        let back = from_json(&to_json(&s)).unwrap();
        assert_eq!(back.a0, s.a0);
        assert_eq!(back.a1, s.a1);
        assert_eq!(back.label, s.label);
    }

    #[test]
    fn zero_coupling_file_rejected() {
        let text = r#"{"schema":1,"label":"z","m":1,"A0":[[[-1,0]]],"A1":[[[0,0]]]}"#;
        assert!(matches!(from_json(text), Err(ModelError::CharFun(CharFunError::ZeroA1))));
    }
}
