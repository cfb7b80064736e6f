//! The Weierstrass function of a period lattice, its derivative, invariants,
//! preimages and the Laurent-tail bounds used near the pole.

mod preimage;
mod series;
mod tail;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Lattice;
use crate::scalar::{is_finite_cx, Cx, Real};

pub use preimage::Preimage;
pub use tail::LaurentTail;

/// Default truncation `N`.
pub const DEFAULT_TRUNCATION: usize = 60;
/// Default pole margin as a fraction of the systole.
pub const DEFAULT_POLE_MARGIN: f64 = 1e-3;
/// Required agreement between truncations `N` and `2N`.
pub const DOUBLING_TOLERANCE: f64 = 1e-8;

/// Summation order of the lattice series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summation {
    /// Rows summed in closed form, rows `|m| <= N` kept. Exponentially convergent.
    #[default]
    Rows,
    /// The literal block `Omega_N`. Converges like `N^-2`.
    Lattice,
}

/// `g2`, `g3` of a lattice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EllipticInvariants<T> {
    pub g2: Complex<T>,
    pub g3: Complex<T>,
}

impl<T: Real> EllipticInvariants<T> {
    /// `g2^3 - 27 g3^2`; nonzero for every nondegenerate lattice.
    pub fn discriminant(&self) -> Cx<T> {
        self.g2 * self.g2 * self.g2 - self.g3 * self.g3 * T::lit(27.0)
    }
}

/// Truncated Eisenstein sums `g2 = 60 sum' w^-4`, `g3 = 140 sum' w^-6`.
pub fn invariants<T: Real>(
    lattice: &Lattice<T>,
    n: usize,
    summation: Summation,
) -> Result<EllipticInvariants<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("truncation N must be >= 1".into()));
    }
    let (g4, g6) = match summation {
        Summation::Rows => series::row_eisenstein(lattice.reduced_basis(), n),
        Summation::Lattice => {
            series::lattice_eisenstein([lattice.omega1(), lattice.omega2()], n)
        }
    };
    Ok(EllipticInvariants { g2: g4 * T::lit(60.0), g3: g6 * T::lit(140.0) })
}

/// Truncated Weierstrass function of a lattice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WeierstrassP<T> {
    lattice: Lattice<T>,
    truncation: usize,
    pole_margin: T,
    summation: Summation,
    invariants: EllipticInvariants<T>,
}

impl<T: Real> WeierstrassP<T> {
    pub fn new(lattice: Lattice<T>) -> Self {
        Self::with_options(lattice, DEFAULT_TRUNCATION, Summation::Rows)
            .expect("default truncation is valid")
    }

    pub fn with_options(lattice: Lattice<T>, truncation: usize, summation: Summation) -> Result<Self> {
        let invariants = invariants(&lattice, truncation, summation)?;
        Ok(Self {
            lattice,
            truncation,
            pole_margin: lattice.systole() * T::lit(DEFAULT_POLE_MARGIN),
            summation,
            invariants,
        })
    }

    pub fn with_pole_margin(mut self, margin: T) -> Self {
        self.pole_margin = margin;
        self
    }

    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn pole_margin(&self) -> T {
        self.pole_margin
    }

    pub fn summation(&self) -> Summation {
        self.summation
    }

    /// Invariants computed with this evaluator's truncation and summation.
    pub fn invariants(&self) -> EllipticInvariants<T> {
        self.invariants
    }

    fn check_pole(&self, z: Cx<T>) -> Result<()> {
        if !is_finite_cx(z) {
            return Err(Error::InvalidParameter(format!("non-finite argument {z}")));
        }
        let d = self.lattice.distance_to_lattice(z);
        if d <= self.pole_margin {
            return Err(Error::PoleProximity { distance: d.as_f64(), margin: self.pole_margin.as_f64() });
        }
        Ok(())
    }

    fn raw_wp(&self, z: Cx<T>) -> Cx<T> {
        match self.summation {
            Summation::Rows => series::row_wp(z, self.lattice.reduced_basis(), self.truncation),
            Summation::Lattice => series::lattice_wp(
                z,
                [self.lattice.omega1(), self.lattice.omega2()],
                self.truncation,
            ),
        }
    }

    fn raw_deriv(&self, z: Cx<T>) -> Cx<T> {
        match self.summation {
            Summation::Rows => {
                series::row_wp_deriv(z, self.lattice.reduced_basis(), self.truncation)
            }
            Summation::Lattice => series::lattice_wp_deriv(
                z,
                [self.lattice.omega1(), self.lattice.omega2()],
                self.truncation,
            ),
        }
    }

    /// `wp(z)`, evaluated at the reduced representative of `z`.
    pub fn eval(&self, z: Cx<T>) -> Result<Cx<T>> {
        let z = self.lattice.reduce(z);
        self.check_pole(z)?;
        Ok(self.raw_wp(z))
    }

    /// `wp'(z)`, evaluated at the reduced representative of `z`.
    pub fn deriv(&self, z: Cx<T>) -> Result<Cx<T>> {
        let z = self.lattice.reduce(z);
        self.check_pole(z)?;
        Ok(self.raw_deriv(z))
    }

    /// `(wp(z), wp'(z))` at the reduced representative.
    pub fn eval_with_deriv(&self, z: Cx<T>) -> Result<(Cx<T>, Cx<T>)> {
        let z = self.lattice.reduce(z);
        self.check_pole(z)?;
        Ok((self.raw_wp(z), self.raw_deriv(z)))
    }

    /// `wp''(z) = 6 wp^2 - g2/2`.
    pub fn second_deriv(&self, z: Cx<T>) -> Result<Cx<T>> {
        let p = self.eval(z)?;
        Ok(p * p * T::lit(6.0) - self.invariants.g2 * T::lit(0.5))
    }

    /// The truncated series summed at `z` itself, without reducing first.
    /// Agrees with [`Self::eval`] up to the truncation error.
    pub fn eval_unreduced(&self, z: Cx<T>) -> Result<Cx<T>> {
        self.check_pole(z)?;
        Ok(self.raw_wp(z))
    }

    pub fn deriv_unreduced(&self, z: Cx<T>) -> Result<Cx<T>> {
        self.check_pole(z)?;
        Ok(self.raw_deriv(z))
    }

    /// A-priori truncation error estimate at `z`.
    ///
    /// Rows: the first omitted rows contribute about
    /// `8 |pi/b1|^2 exp(-2 pi ((N+1) Im tau - |Im(z/b1)|))`.
    /// Lattice: the omitted block tail is about `3 pi |z|^2 / (A (N h)^2)`,
    /// `A` the cell area and `h` its smallest height.
    pub fn truncation_error_estimate(&self, z: Cx<T>) -> T {
        let n = T::lit(self.truncation as f64);
        match self.summation {
            Summation::Rows => {
                let [b1, b2] = self.lattice.reduced_basis();
                let tau = b2 / b1;
                let y = (z / b1).im.abs();
                let pi = T::PI();
                let k = (pi / b1.norm()).powi(2) * T::lit(8.0);
                k * (-(pi * T::lit(2.0)) * ((n + T::one()) * tau.im - y)).exp()
            }
            Summation::Lattice => {
                let a = self.lattice.area();
                let h = a / self.lattice.omega1().norm().max(self.lattice.omega2().norm());
                T::lit(3.0) * T::PI() * z.norm_sqr() / (a * (n * h).powi(2))
            }
        }
    }

    /// Relative difference between truncations `N` and `2N` at `z`.
    pub fn truncation_check(&self, z: Cx<T>) -> Result<T> {
        let a = self.eval(z)?;
        let doubled = Self::with_options(self.lattice, self.truncation * 2, self.summation)?
            .with_pole_margin(self.pole_margin);
        let b = doubled.eval(z)?;
        Ok((a - b).norm() / b.norm().max(T::min_positive_value()))
    }

    /// Whether the `N` versus `2N` agreement meets [`DOUBLING_TOLERANCE`].
    pub fn truncation_converged(&self, z: Cx<T>) -> Result<bool> {
        Ok(self.truncation_check(z)? <= T::lit(DOUBLING_TOLERANCE))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    type C = Complex<f64>;

    fn sq() -> WeierstrassP<f64> {
        WeierstrassP::new(Lattice::square())
    }

    #[test]
    fn square_lattice_invariants() {
        // g2 of the (1, i) lattice is Gamma(1/4)^8 / (16 pi^2) = 189.0727201...
        let gamma_quarter: f64 = 3.625_609_908_221_908;
        let expect = gamma_quarter.powi(8) / (16.0 * std::f64::consts::PI.powi(2));
        let inv = sq().invariants();
        assert!((inv.g2.re - expect).abs() < 1e-9 * expect, "{} vs {}", inv.g2, expect);
        assert!(inv.g3.norm() < 1e-8 * inv.g2.norm());
        assert!(inv.discriminant().norm() > 1.0);
    }

    #[test]
    fn hexagonal_lattice_g2_vanishes() {
        let l = Lattice::new(C::new(1.0, 0.0), C::from_polar(1.0, std::f64::consts::PI / 3.0)).unwrap();
        let inv = invariants(&l, 60, Summation::Rows).unwrap();
        assert!(inv.g2.norm() < 1e-9 * inv.g3.norm());
    }

    #[test]
    fn pole_margin_is_an_error() {
        let p = sq();
        assert!(matches!(p.eval(C::new(1e-5, 0.0)), Err(Error::PoleProximity { .. })));
        assert!(matches!(p.eval(C::new(1.0, 1.0)), Err(Error::PoleProximity { .. })));
        assert!(p.eval(C::new(0.01, 0.0)).is_ok());
    }

    #[test]
    fn half_period_value_is_real_on_conjugation_symmetric_lattice() {
        let l = Lattice::new(C::new(2.0, 0.0), C::new(0.0, 2.0)).unwrap();
        let v = WeierstrassP::new(l).eval(C::new(1.0, 0.0)).unwrap();
        assert!(v.im.abs() < 1e-12 * v.re.abs());
    }

    #[test]
    fn doubling_check_passes_for_rows() {
        let p = sq();
        assert!(p.truncation_converged(C::new(0.23, 0.31)).unwrap());
        let lat = WeierstrassP::with_options(Lattice::square(), 60, Summation::Lattice).unwrap();
        assert!(!lat.truncation_converged(C::new(0.23, 0.31)).unwrap());
    }

    #[test]
    fn zero_truncation_rejected() {
        assert!(WeierstrassP::with_options(Lattice::<f64>::square(), 0, Summation::Rows).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let p = WeierstrassP::<f32>::new(Lattice::square());
        let z = Complex::new(0.23f32, 0.31);
        let a = p.eval(z).unwrap();
        let b = sq().eval(C::new(0.23, 0.31)).unwrap();
        assert!(((a.re as f64) - b.re).abs() < 1e-4 * b.norm());
    }
}
