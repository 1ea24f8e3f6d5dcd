//! Marching squares for the level curve `|φ(λ)| = 1`.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SpectraError;
use crate::ratfun::RatFun;

/// Axis-aligned rectangle in the complex plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    /// Square window centred at `c` with half-width `r`.
    pub fn around(c: Complex64, r: f64) -> Self {
        Window { re_min: c.re - r, re_max: c.re + r, im_min: c.im - r, im_max: c.im + r }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContourSet {
    pub window: Window,
    /// Number of cells along the real and imaginary axes.
    pub resolution: (usize, usize),
    pub polylines: Vec<Vec<Complex64>>,
    pub closed: Vec<bool>,
    /// Node mask, row-major in `im` then `re`: true where `|φ| ≥ 1`.
    pub inside: Vec<bool>,
    /// Largest `||φ(v)| - 1|` over emitted vertices.
    pub max_vertex_error: f64,
}

impl ContourSet {
    pub fn vertices(&self) -> impl Iterator<Item = &Complex64> {
        self.polylines.iter().flatten()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Edge {
    // edge from node (i, j) to (i+1, j)
    H(usize, usize),
    // edge from node (i, j) to (i, j+1)
    V(usize, usize),
}

pub fn omega_contour(
    phi: &RatFun,
    window: Window,
    resolution: (usize, usize),
) -> Result<ContourSet, SpectraError> {
    let (nx, ny) = (resolution.0.max(2), resolution.1.max(2));
    let dx = (window.re_max - window.re_min) / nx as f64;
    let dy = (window.im_max - window.im_min) / ny as f64;
    let node = |i: usize, j: usize| {
        Complex64::new(window.re_min + i as f64 * dx, window.im_min + j as f64 * dy)
    };
    let f = |z: Complex64| {
        let v = phi.value(z).norm();
        if v.is_finite() {
            v - 1.0
        } else {
            1e300
        }
    };
    let mut vals = vec![0.0; (nx + 1) * (ny + 1)];
    for j in 0..=ny {
        for i in 0..=nx {
            vals[j * (nx + 1) + i] = f(node(i, j));
        }
    }
    let at = |i: usize, j: usize| vals[j * (nx + 1) + i];
    let poles: Vec<Complex64> = phi.poles().iter().map(|r| r.value).collect();

    let mut points: HashMap<Edge, Complex64> = HashMap::new();
    let mut point_on = |e: Edge| -> Complex64 {
        *points.entry(e).or_insert_with(|| {
            let (a, b) = match e {
                Edge::H(i, j) => (node(i, j), node(i + 1, j)),
                Edge::V(i, j) => (node(i, j), node(i, j + 1)),
            };
            bisect(&f, a, b)
        })
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let v = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let mut case = 0;
            for (k, x) in v.iter().enumerate() {
                if *x >= 0.0 {
                    case |= 1 << k;
                }
            }
            if case == 0 || case == 15 {
                continue;
            }
            let lo = node(i, j);
            let hi = node(i + 1, j + 1);
            if poles
                .iter()
                .any(|p| p.re >= lo.re && p.re <= hi.re && p.im >= lo.im && p.im <= hi.im)
            {
                return Err(SpectraError::WindowTooCoarse(0.5 * (lo + hi)));
            }
            let bottom = Edge::H(i, j);
            let right = Edge::V(i + 1, j);
            let top = Edge::H(i, j + 1);
            let left = Edge::V(i, j);
            let centre_in = f(0.5 * (lo + hi)) >= 0.0;
            let segs: &[(Edge, Edge)] = match case {
                1 | 14 => &[(left, bottom)],
                2 | 13 => &[(bottom, right)],
                3 | 12 => &[(left, right)],
                4 | 11 => &[(right, top)],
                6 | 9 => &[(bottom, top)],
                7 | 8 => &[(left, top)],
                5 => {
                    if centre_in {
                        &[(left, top), (bottom, right)]
                    } else {
                        &[(left, bottom), (right, top)]
                    }
                }
                10 => {
                    if centre_in {
                        &[(left, bottom), (right, top)]
                    } else {
                        &[(left, top), (bottom, right)]
                    }
                }
                _ => &[],
            };
            segments.extend_from_slice(segs);
        }
    }

    // chain segments through shared edges
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        by_edge.entry(*a).or_default().push(k);
        by_edge.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    let mut closed = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let mut chain = std::collections::VecDeque::from(vec![a, b]);
        for forward in [true, false] {
            loop {
                let end = if forward { *chain.back().unwrap() } else { *chain.front().unwrap() };
                let next = by_edge[&end].iter().copied().find(|&k| !used[k]);
                let Some(k) = next else { break };
                used[k] = true;
                let (p, q) = segments[k];
                let other = if p == end { q } else { p };
                if forward {
                    chain.push_back(other);
                } else {
                    chain.push_front(other);
                }
            }
        }
        let is_closed = chain.len() > 2 && chain.front() == chain.back();
        if is_closed {
            chain.pop_back();
        }
        polylines.push(chain.into_iter().map(&mut point_on).collect::<Vec<_>>());
        closed.push(is_closed);
    }
    let max_vertex_error = polylines
        .iter()
        .flatten()
        .map(|z: &Complex64| f(*z).abs())
        .fold(0.0, f64::max);
    Ok(ContourSet {
        window,
        resolution: (nx, ny),
        polylines,
        closed,
        inside: vals.iter().map(|v| *v >= 0.0).collect(),
        max_vertex_error,
    })
}

fn bisect(f: &impl Fn(Complex64) -> f64, mut a: Complex64, mut b: Complex64) -> Complex64 {
    let mut fa = f(a);
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm >= 0.0) == (fa >= 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::Poly;

    #[test]
    fn robot_contour_is_unit_circle() {
        let phi = RatFun::new(Poly::from_real(&[1.0]), Poly::from_real(&[1.0, 1.0])).unwrap();
        let w = Window { re_min: -2.5, re_max: 0.7, im_min: -1.6, im_max: 1.6 };
        let cs = omega_contour(&phi, w, (400, 400)).unwrap();
        assert_eq!(cs.polylines.len(), 1);
        assert!(cs.closed[0]);
        let dev = cs
            .vertices()
            .map(|z| ((z + 1.0).norm() - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(dev <= 2e-3, "{dev}");
        assert!(cs.max_vertex_error <= 1e-3);
    }

    #[test]
    fn pole_on_contour_cell_is_rejected() {
        let phi = RatFun::new(Poly::from_real(&[1.0]), Poly::from_real(&[1.0, 1.0])).unwrap();
        // coarse grid: one cell straddles both the pole and the circle
        let w = Window { re_min: -3.0, re_max: 1.0, im_min: -2.0, im_max: 2.0 };
        assert!(matches!(
            omega_contour(&phi, w, (2, 2)),
            Err(SpectraError::WindowTooCoarse(_))
        ));
    }
}
