use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::WeierstrassP;
use crate::error::{Error, Result};
use crate::scalar::Real;

const CIRCLE_SAMPLES: usize = 256;
const SAFETY: f64 = 1.1;

/// Bound `M` on `f = wp - 1/z^2` over the closed disc of radius `r0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LaurentTail<T> {
    pub r0: T,
    pub m: T,
}

impl<T: Real> LaurentTail<T> {
    /// `|wp(z)| <= 1/r^2 + M` on `|z| = r <= r0`.
    pub fn upper(&self, r: T) -> T {
        (r * r).recip() + self.m
    }

    /// `|wp(z)| >= k^2/r^2 - M` on the disc of radius `r/k`.
    pub fn lower(&self, r: T, k: u32) -> T {
        let k = T::lit(k as f64);
        k * k / (r * r) - self.m
    }
}

impl<T: Real> WeierstrassP<T> {
    /// Largest admissible `r0`: half the distance to the nearest nonzero
    /// lattice point.
    pub fn tail_radius_limit(&self) -> T {
        self.lattice().systole() * T::lit(0.5)
    }

    /// Maximum of `|wp(z) - 1/z^2|` on `|z| = r0` (which bounds the disc by
    /// the maximum principle), inflated by 10%.
    pub fn bound_tail(&self, r0: T) -> Result<LaurentTail<T>> {
        let limit = self.tail_radius_limit();
        if !(r0 < limit) {
            return Err(Error::RadiusTooLarge { r0: r0.as_f64(), limit: limit.as_f64() });
        }
        if !(r0 > self.pole_margin()) {
            return Err(Error::InvalidParameter("r0 must exceed the pole margin".into()));
        }
        let mut m = T::zero();
        for j in 0..CIRCLE_SAMPLES {
            let z = Complex::from_polar(r0, T::TAU() * T::lit(j as f64 / CIRCLE_SAMPLES as f64));
            let f = self.eval(z)? - (z * z).inv();
            m = m.max(f.norm());
        }
        Ok(LaurentTail { r0, m: m * T::lit(SAFETY) })
    }

    /// Smallest `k >= 2` such that `(k^2 - r^2 M)/r^2` exceeds the sampled
    /// supremum of `|wp|` over the torus minus the disc of radius `r`, for
    /// every `r` in a decreasing sequence below `r0`.
    pub fn star_condition_k(&self, r0: T) -> Result<u32> {
        let tail = self.bound_tail(r0)?;
        let grid = self.abs_grid(48)?;
        let mut k = 2u32;
        for r in star_radii(r0) {
            let sup = self.sup_outside(r, &grid)?;
            let need = (r * r * (sup + tail.m)).sqrt();
            let kr = need.floor().to_u32().unwrap_or(u32::MAX).saturating_add(1);
            k = k.max(kr);
        }
        Ok(k)
    }

    /// `|wp|` on a regular grid of the fundamental domain, with `|z|`.
    pub(crate) fn abs_grid(&self, n: usize) -> Result<Vec<(T, T)>> {
        let half = T::lit(0.5);
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let s = -half + (T::lit(i as f64) + half) / T::lit(n as f64);
                let t = -half + (T::lit(j as f64) + half) / T::lit(n as f64);
                let z = self.lattice().from_coords(s, t);
                let d = self.lattice().distance_to_lattice(z);
                if d > self.pole_margin() * T::lit(2.0) {
                    out.push((d, self.eval(z)?.norm()));
                }
            }
        }
        Ok(out)
    }

    /// Sampled supremum of `|wp|` over the torus minus the disc of radius `r`
    /// about the pole: the boundary circle plus grid points outside it.
    pub(crate) fn sup_outside(&self, r: T, grid: &[(T, T)]) -> Result<T> {
        let mut sup = grid.iter().filter(|(d, _)| *d >= r).map(|(_, v)| *v).fold(T::zero(), T::max);
        for j in 0..CIRCLE_SAMPLES {
            let z = Complex::from_polar(r, T::TAU() * T::lit(j as f64 / CIRCLE_SAMPLES as f64));
            sup = sup.max(self.eval(z)?.norm());
        }
        Ok(sup)
    }
}

/// `r0 (1 - 1e-3) 0.8^j`, j = 0..24.
pub(crate) fn star_radii<T: Real>(r0: T) -> impl Iterator<Item = T> {
    (0..25).map(move |j| r0 * T::lit((1.0 - 1e-3) * 0.8f64.powi(j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::Summation;
    use crate::geometry::Lattice;

    type C = Complex<f64>;

    #[test]
    fn tail_scales_like_r_squared() {
        let p = WeierstrassP::new(Lattice::<f64>::square());
        let g2 = p.invariants().g2.norm();
        let mut prev = f64::INFINITY;
        for r0 in [0.2, 0.1, 0.05, 0.02] {
            let t = p.bound_tail(r0).unwrap();
            let ratio = t.m / (r0 * r0);
            // Laurent oracle: wp - 1/z^2 = (g2/20) z^2 + O(z^4)
            assert!(ratio <= prev + 1e-9);
            assert!(ratio < 1.1 * g2 / 20.0 * 1.05 + 1.0);
            prev = ratio;
        }
        let t = p.bound_tail(0.02).unwrap();
        assert!((t.m / 0.02f64.powi(2) - 1.1 * g2 / 20.0).abs() < 0.01 * g2);
    }

    #[test]
    fn tail_bounds_hold_on_samples() {
        let p = WeierstrassP::new(Lattice::<f64>::square());
        let t = p.bound_tail(0.3).unwrap();
        for r in [0.3, 0.2, 0.1] {
            for j in 0..64 {
                let z = C::from_polar(r, j as f64 * 0.1);
                assert!(p.eval(z).unwrap().norm() <= t.upper(r));
            }
            let k = 3;
            for j in 0..64 {
                let z = C::from_polar(r / k as f64 * (j as f64 + 4.0) / 68.0, j as f64 * 0.37);
                let v = p.eval(z).unwrap().norm();
                assert!(v >= t.lower(r, k), "r={r} z={z} v={v} lower={} m={}", t.lower(r, k), t.m);
            }
        }
    }

    #[test]
    fn r0_limit_enforced() {
        let p = WeierstrassP::new(Lattice::<f64>::square());
        assert!(matches!(p.bound_tail(0.5), Err(Error::RadiusTooLarge { .. })));
    }

    #[test]
    fn star_k_is_valid_and_stable_under_doubling() {
        let l = Lattice::<f64>::square();
        let p = WeierstrassP::new(l);
        let k = p.star_condition_k(0.3).unwrap();
        assert!(k >= 2);
        let tail = p.bound_tail(0.3).unwrap();
        let grid = p.abs_grid(48).unwrap();
        for r in star_radii(0.3) {
            let sup = p.sup_outside(r, &grid).unwrap();
            let kk = k as f64;
            assert!((kk * kk - r * r * tail.m) / (r * r) > sup);
        }
        let p2 = WeierstrassP::with_options(l, 120, Summation::Rows).unwrap();
        let k2 = p2.star_condition_k(0.3).unwrap();
        assert!((k as i64 - k2 as i64).abs() <= 1);
    }
}
