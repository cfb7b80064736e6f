use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::HoloMap;
use crate::point::C2;
use crate::scalar::{Cx, Real};

/// Samples to keep almost fixed and samples to push beyond `radius`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PusherRequest<T> {
    pub k: Vec<C2<T>>,
    pub v: Vec<C2<T>>,
    pub radius: T,
    pub eps: T,
    /// A point the map must fix exactly.
    pub fixed: Option<C2<T>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PusherResult<T> {
    pub map: HoloMap<T>,
    /// `max |phi(x) - x|` over the K samples.
    pub displacement: T,
    /// `min |phi(v)|` over the V samples.
    pub expulsion: T,
    pub degree: usize,
    /// Coordinate the shear is a function of.
    pub axis: usize,
}

/// Produces an automorphism meeting a [`PusherRequest`] or explains why not.
pub trait Pusher<T: Real>: Sync {
    fn push(&self, req: &PusherRequest<T>) -> Result<PusherResult<T>>;
}

/// Measures a candidate against the request's own samples.
pub fn pusher_margins<T: Real>(map: &HoloMap<T>, req: &PusherRequest<T>) -> Result<(T, T)> {
    let mut disp = T::zero();
    for x in &req.k {
        let y = map.eval(*x)?;
        disp = disp.max(if y.is_finite() { (y - *x).norm() } else { T::infinity() });
    }
    let mut exp = T::infinity();
    for v in &req.v {
        let y = map.eval(*v)?;
        exp = exp.min(if y.is_finite() { y.norm() } else { T::infinity() });
    }
    Ok((disp, exp))
}

/// Polynomial shear `x_other += c (x_axis^d - p^d)` for whichever coordinate
/// `x_axis` separates K from V radially, doubling `d` up to `max_degree`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ModelPusher {
    pub max_degree: usize,
}

impl Default for ModelPusher {
    fn default() -> Self {
        Self { max_degree: 64 }
    }
}

impl ModelPusher {
    fn candidate<T: Real>(&self, req: &PusherRequest<T>, axis: usize, d: usize) -> Option<HoloMap<T>> {
        let other = 1 - axis;
        let b = req.v.iter().map(|v| v.coord(axis).norm()).fold(T::infinity(), T::min);
        if !(b > T::zero()) || !b.is_finite() {
            return None;
        }
        let df = d as i32;
        // |c| b^d = 2R; phase aligning c u^d with the other coordinate on V
        let mut acc = Complex::new(T::zero(), T::zero());
        for v in &req.v {
            acc = acc + v.coord(other) * v.coord(axis).powi(df).conj();
        }
        let phase = if acc.norm() > T::zero() { acc / acc.norm() } else { Complex::new(T::one(), T::zero()) };
        let mag = T::lit(2.0) * req.radius / b.powi(df);
        if !(mag.is_finite() && mag > T::zero()) {
            return None;
        }
        let c = phase * mag;
        let mut coeffs: Vec<Cx<T>> = vec![Complex::new(T::zero(), T::zero()); d + 1];
        coeffs[d] = c;
        if let Some(p) = req.fixed {
            coeffs[0] = -(c * p.coord(axis).powi(df));
        }
        HoloMap::shear(other, coeffs).ok()
    }
}

impl<T: Real> Pusher<T> for ModelPusher {
    fn push(&self, req: &PusherRequest<T>) -> Result<PusherResult<T>> {
        if req.v.is_empty() {
            return Ok(PusherResult {
                map: HoloMap::identity(),
                displacement: T::zero(),
                expulsion: T::infinity(),
                degree: 0,
                axis: 0,
            });
        }
        let sep = |axis: usize| {
            let a = req.k.iter().chain(req.fixed.iter()).map(|x| x.coord(axis).norm()).fold(T::zero(), T::max);
            let b = req.v.iter().map(|x| x.coord(axis).norm()).fold(T::infinity(), T::min);
            (a, b)
        };
        let mut d = 1;
        while d <= self.max_degree {
            for axis in 0..2 {
                let (a, b) = sep(axis);
                if !(b > a) {
                    continue;
                }
                let Some(map) = self.candidate(req, axis, d) else { continue };
                let (disp, exp) = pusher_margins(&map, req)?;
                if disp < req.eps && exp >= req.radius {
                    return Ok(PusherResult { map, displacement: disp, expulsion: exp, degree: d, axis });
                }
            }
            d *= 2;
        }
        let (a0, b0) = sep(0);
        let (a1, b1) = sep(1);
        Err(Error::DegreeCap {
            cap: self.max_degree,
            detail: format!(
                "radial separation |z|: K <= {:e}, V >= {:e}; |w|: K <= {:e}, V >= {:e}",
                a0.as_f64(),
                b0.as_f64(),
                a1.as_f64(),
                b1.as_f64()
            ),
        })
    }
}
