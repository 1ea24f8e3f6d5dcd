use chainsys::linalg::re;
use chainsys::monotone::{cm_certify, tm_certify, CmGrid, Verdict, DEFAULT_TM_N};
use chainsys::ratfun::{rat_reduce, Poly, RatFun};

fn pair(a: f64, b: f64, c: f64) -> RatFun {
    let k = (a * a + b * b) * c;
    let den = &Poly::from_real(&[c, 1.0]) * &Poly::from_real(&[a * a + b * b, 2.0 * a, 1.0]);
    rat_reduce(&RatFun::new(Poly::constant(re(k)), den).unwrap())
}

#[test]
fn verdicts_follow_parameter_ordering() {
    let vals: Vec<f64> = (1..=8).map(|k| 0.25 * k as f64).collect();
    let mut bad = Vec::new();
    for &a in &vals {
        for &c in &vals {
            let phi = pair(a, 1.0, c);
            let cm = cm_certify(&phi, CmGrid::default()).unwrap().verdict;
            let tm = tm_certify(&phi, None, DEFAULT_TM_N).unwrap().verdict;
            let cm_ok = if a > c {
                cm == Verdict::Certified
            } else if a == c {
                cm != Verdict::Refuted
            } else {
                cm == Verdict::Refuted
            };
            let tm_ok = if a > c { tm == Verdict::Certified } else { tm == Verdict::RefutedAtTestedEps };
            if !(cm_ok && tm_ok) {
                bad.push(format!("a={a} c={c}: cm {cm:?} tm {tm:?}"));
            }
        }
    }
    assert!(bad.is_empty(), "{bad:#?}");
}
