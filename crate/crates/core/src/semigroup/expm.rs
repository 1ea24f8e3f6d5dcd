//! Scaling and squaring with diagonal Padé approximants (orders 3 to 13).

use crate::linalg::{all_finite, eye, norm_one, re, CMat};

use super::SemigroupError;

const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
    (13, 5.371920351148152),
];

fn pade_coeffs(m: usize) -> &'static [f64] {
    match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        _ => &[
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ],
    }
}

/// `exp(tM)`.
pub fn expm_dense(m: &CMat, t: f64) -> Result<CMat, SemigroupError> {
    let n = m.nrows();
    if !all_finite(m) || !t.is_finite() {
        return Err(SemigroupError::NonFinite);
    }
    if t == 0.0 || n == 0 {
        return Ok(eye(n));
    }
    let a = m * re(t);
    if n == 1 {
        return Ok(CMat::from_element(1, 1, a[(0, 0)].exp()));
    }
    let norm = norm_one(&a);
    for &(order, theta) in &THETA[..4] {
        if norm <= theta {
            return Ok(pade(&a, order));
        }
    }
    let s = ((norm / THETA[4].1).log2().ceil()).max(0.0) as i32;
    let scaled = &a * re(0.5f64.powi(s));
    let mut x = pade(&scaled, 13);
    for _ in 0..s {
        x = &x * &x;
    }
    if !all_finite(&x) {
        return Err(SemigroupError::Overflow(norm));
    }
    Ok(x)
}

fn pade(a: &CMat, order: usize) -> CMat {
    let b = pade_coeffs(order);
    let n = a.nrows();
    let id = eye(n);
    let a2 = a * a;
    let (u, v) = if order == 13 {
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let w1 = &a6 * re(b[13]) + &a4 * re(b[11]) + &a2 * re(b[9]);
        let w2 = &a6 * re(b[7]) + &a4 * re(b[5]) + &a2 * re(b[3]) + &id * re(b[1]);
        let z1 = &a6 * re(b[12]) + &a4 * re(b[10]) + &a2 * re(b[8]);
        let z2 = &a6 * re(b[6]) + &a4 * re(b[4]) + &a2 * re(b[2]) + &id * re(b[0]);
        let u = a * (&a6 * &w1 + w2);
        let v = &a6 * &z1 + z2;
        (u, v)
    } else {
        // even powers A^0, A^2, ..., A^{order-1}
        let mut pows = vec![id.clone(), a2.clone()];
        while pows.len() < order.div_ceil(2) {
            let next = pows.last().unwrap() * &a2;
            pows.push(next);
        }
        let mut u = CMat::zeros(n, n);
        let mut v = CMat::zeros(n, n);
        for (k, p) in pows.iter().enumerate() {
            u += p * re(b[2 * k + 1]);
            v += p * re(b[2 * k]);
        }
        (a * u, v)
    };
    let q = &v - &u;
    let p = &v + &u;
    q.lu().solve(&p).unwrap_or_else(|| CMat::from_element(n, n, re(f64::NAN)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, frobenius};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_time_is_identity() {
        let m = CMat::from_element(3, 3, c(1.0, 2.0));
        assert_eq!(expm_dense(&m, 0.0).unwrap(), eye(3));
    }

    #[test]
    fn diagonal() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = re(-1.0);
        m[(1, 1)] = re(-2.0);
        let e = expm_dense(&m, 1.0).unwrap();
        assert!((e[(0, 0)].re - (-1f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)].re - (-2f64).exp()).abs() < 1e-15);
        assert!(e[(0, 1)].norm() == 0.0);
    }

    #[test]
    fn nilpotent_jordan_block() {
        let mut m = CMat::zeros(3, 3);
        m[(0, 1)] = re(1.0);
        m[(1, 2)] = re(1.0);
        let e = expm_dense(&m, 2.0).unwrap();
        assert!((e[(0, 2)].re - 2.0).abs() < 1e-14);
        assert!((e[(0, 1)].re - 2.0).abs() < 1e-14);
    }

    /// Classical RK4 with many small steps as an independent integrator.
    fn rk4(m: &CMat, t: f64, steps: usize) -> CMat {
        let h = t / steps as f64;
        let mut y = eye(m.nrows());
        for _ in 0..steps {
            let k1 = m * &y;
            let k2 = m * (&y + &k1 * re(h / 2.0));
            let k3 = m * (&y + &k2 * re(h / 2.0));
            let k4 = m * (&y + &k3 * re(h));
            y += (k1 + k2 * re(2.0) + k3 * re(2.0) + k4) * re(h / 6.0);
        }
        y
    }

    #[test]
    fn random_matrix_against_integrator() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = CMat::from_fn(8, 8, |_, _| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
        let e = expm_dense(&m, 3.0).unwrap();
        let r = rk4(&m, 3.0, 20_000);
        assert!(frobenius(&(&e - &r)) <= 1e-10 * frobenius(&r));
    }

    #[test]
    fn semigroup_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = CMat::from_fn(4, 4, |_, _| c(rng.gen_range(-2.0..1.0), rng.gen_range(-1.0..1.0)));
        let lhs = expm_dense(&m, 5.0).unwrap();
        let rhs = expm_dense(&m, 2.0).unwrap() * expm_dense(&m, 3.0).unwrap();
        assert!(frobenius(&(&lhs - &rhs)) <= 1e-10 * frobenius(&lhs).max(1.0));
    }
}
