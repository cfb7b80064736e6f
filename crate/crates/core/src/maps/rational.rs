use num_complex::Complex;

use super::HoloMap;
use crate::error::{Error, Result};
use crate::geometry::BoundaryCurve;
use crate::point::C2;
use crate::scalar::{Cx, Real};

/// A boundary curve in C^2 with a marked sample.
#[derive(Clone, Copy, Debug)]
pub struct MarkedCurve<'a, T: Real> {
    pub curve: &'a BoundaryCurve<C2<T>>,
    pub index: usize,
}

impl<T: Real> MarkedCurve<'_, T> {
    fn point(&self) -> C2<T> {
        self.curve.points()[self.index]
    }

    fn tangent(&self) -> Cx<T> {
        self.curve.tangents()[self.index].z
    }
}

/// `(z, w) -> (z, w + sum a_i / (z - z_i))` from pole data `(z_i, c_i)`,
/// `c_i` the first-coordinate tangent at the marked point.
pub fn rational_shear_from_boundary<T: Real>(
    poles: &[(Cx<T>, Cx<T>)],
    coeffs: &[Cx<T>],
) -> Result<HoloMap<T>> {
    if poles.len() != coeffs.len() {
        return Err(Error::InvalidParameter("one coefficient per pole required".into()));
    }
    if let Some(k) = coeffs.iter().position(|a| a.norm() == T::zero()) {
        return Err(Error::InvalidParameter(format!("coefficient {k} is zero")));
    }
    if let Some(k) = poles.iter().position(|(_, c)| c.norm() == T::zero()) {
        return Err(Error::InvalidParameter(format!("tangent at pole {k} is zero")));
    }
    HoloMap::RationalShear {
        poles: poles.iter().map(|(z, _)| *z).collect(),
        coeffs: coeffs.to_vec(),
    }
    .validated()
}

/// Coefficients `a_i = magnitude * exp(i (arg c_i + pi i / m))`, so the
/// asymptotic rays `a_i / (c_i t)` of the `2m` curve halves point in `2m`
/// evenly spaced directions.
///
/// Verified on the samples within parameter distance `window` of each marked
/// point: along each half, `|w|` of the image strictly increases towards the
/// marked point, and the `w`-projections of distinct halves are disjoint.
pub fn choose_shear_coeffs<T: Real>(
    curves: &[MarkedCurve<'_, T>],
    magnitude: T,
    window: T,
) -> Result<Vec<Cx<T>>> {
    let m = curves.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    if !(magnitude > T::zero()) {
        return Err(Error::InvalidParameter("coefficient magnitude must be positive".into()));
    }
    let mut data = Vec::with_capacity(m);
    for (i, mc) in curves.iter().enumerate() {
        let c = mc.tangent();
        if !(c.norm() > T::zero()) {
            return Err(Error::Precondition(format!("curve {i} has zero z-tangent at its marked point")));
        }
        data.push((mc.point().z, c));
    }
    let coeffs: Vec<Cx<T>> = data
        .iter()
        .enumerate()
        .map(|(i, (_, c))| {
            let phase = c.arg() + T::PI() * T::lit(i as f64) / T::lit(m as f64);
            Complex::from_polar(magnitude, phase)
        })
        .collect();
    let shear = rational_shear_from_boundary(&data, &coeffs)?;

    let mut halves: Vec<(String, Vec<Cx<T>>)> = Vec::with_capacity(2 * m);
    for (i, mc) in curves.iter().enumerate() {
        for (side, dir) in [("+", 1isize), ("-", -1isize)] {
            let name = format!("curve {i}{side}");
            let mut image = Vec::new();
            let mut k = mc.index;
            let mut travelled = T::zero();
            while let Some(next) = mc.curve.neighbor(k, dir) {
                if next == mc.index {
                    break;
                }
                let dt = (mc.curve.params()[next] - mc.curve.params()[k]).abs();
                let dt = if mc.curve.closed() && dt > (mc.curve.range().1 - mc.curve.range().0) * T::lit(0.5) {
                    mc.curve.range().1 - mc.curve.range().0 - dt
                } else {
                    dt
                };
                travelled = travelled + dt;
                if travelled > window {
                    break;
                }
                image.push(shear.eval(mc.curve.points()[next])?.w);
                k = next;
            }
            if image.len() < 2 {
                return Err(Error::InvalidParameter(format!("{name}: fewer than 2 samples in the window")));
            }
            if let Some(bad) = image.windows(2).position(|p| !(p[0].norm() > p[1].norm())) {
                log::debug!("{name}: |w| not monotone at sample {bad}");
                return Err(Error::ShearVerification(name.clone(), name));
            }
            halves.push((name, image));
        }
    }
    for a in 0..halves.len() {
        for b in 0..a {
            if polylines_cross(&halves[a].1, &halves[b].1) {
                return Err(Error::ShearVerification(halves[b].0.clone(), halves[a].0.clone()));
            }
        }
    }
    Ok(coeffs)
}

fn cross<T: Real>(a: Cx<T>, b: Cx<T>) -> T {
    a.re * b.im - a.im * b.re
}

/// Closed-segment intersection test.
fn segments_cross<T: Real>(p1: Cx<T>, p2: Cx<T>, q1: Cx<T>, q2: Cx<T>) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    let z = T::zero();
    if ((d1 > z && d2 < z) || (d1 < z && d2 > z)) && ((d3 > z && d4 < z) || (d3 < z && d4 > z)) {
        return true;
    }
    let on = |a: Cx<T>, b: Cx<T>, p: Cx<T>, d: T| {
        d == z && p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn polylines_cross<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> bool {
    a.windows(2).any(|s| b.windows(2).any(|t| segments_cross(s[0], s[1], t[0], t[1])))
}
