use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Lattice;
use crate::scalar::{Cx, Real};

/// A point of `C / X`, stored by its reduced representative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TorusPoint<T> {
    rep: Complex<T>,
    lattice: Lattice<T>,
}

impl<T: Real> TorusPoint<T> {
    pub fn new(z: Cx<T>, lattice: Lattice<T>) -> Self {
        Self { rep: lattice.reduce(z), lattice }
    }

    pub fn rep(&self) -> Cx<T> {
        self.rep
    }

    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    pub fn equivalent(&self, other: &Self, tol: T) -> bool {
        self.lattice.equivalent(self.rep, other.rep, tol)
    }

    pub fn distance(&self, other: &Self) -> T {
        self.lattice.torus_distance(self.rep, other.rep)
    }

    pub fn translate(&self, c: Cx<T>) -> Self {
        Self::new(self.rep + c, self.lattice)
    }

    /// `2p` lies in the lattice.
    pub fn is_half_period(&self, tol: T) -> bool {
        self.lattice.is_lattice_point(self.rep * T::lit(2.0), tol)
    }
}

/// A closed disc on the torus. The radius is kept below half the systole so
/// the disc lifts injectively to the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TorusDisc<T> {
    center: TorusPoint<T>,
    radius: T,
}

impl<T: Real> TorusDisc<T> {
    pub fn new(center: TorusPoint<T>, radius: T) -> Result<Self> {
        let limit = center.lattice().systole() / T::lit(2.0);
        if !(radius > T::zero()) || radius >= limit {
            return Err(Error::DiscTooLarge { radius: radius.as_f64(), limit: limit.as_f64() });
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> TorusPoint<T> {
        self.center
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    /// Boundary point at angle `theta` (representative near the center).
    pub fn boundary_point(&self, theta: T) -> Cx<T> {
        self.center.rep() + Complex::from_polar(self.radius, theta)
    }

    /// Signed distance: negative inside the disc.
    pub fn signed_distance(&self, z: Cx<T>) -> T {
        self.center.lattice().torus_distance(z, self.center.rep()) - self.radius
    }

    pub fn contains_interior(&self, z: Cx<T>) -> bool {
        self.signed_distance(z) < T::zero()
    }
}

/// A region removed from the torus: a closed disc or a single point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", tag = "kind", rename_all = "snake_case")]
pub enum Removed<T> {
    Disc { disc: TorusDisc<T> },
    Point { point: TorusPoint<T> },
}

impl<T: Real> Removed<T> {
    pub fn disc(center: Cx<T>, radius: T, lattice: Lattice<T>) -> Result<Self> {
        Ok(Removed::Disc { disc: TorusDisc::new(lattice.point(center), radius)? })
    }

    pub fn point(at: Cx<T>, lattice: Lattice<T>) -> Self {
        Removed::Point { point: lattice.point(at) }
    }

    pub fn center(&self) -> TorusPoint<T> {
        match self {
            Removed::Disc { disc } => disc.center(),
            Removed::Point { point } => *point,
        }
    }

    /// Radius, zero for a point.
    pub fn radius(&self) -> T {
        match self {
            Removed::Disc { disc } => disc.radius(),
            Removed::Point { .. } => T::zero(),
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, Removed::Point { .. })
    }

    /// Distance from `z` to the region (negative inside a disc).
    pub fn signed_distance(&self, z: Cx<T>) -> T {
        let c = self.center();
        c.lattice().torus_distance(z, c.rep()) - self.radius()
    }

    /// Whether `z` is in the interior of a disc, or equals the removed point.
    pub fn contains(&self, z: Cx<T>, tol: T) -> bool {
        match self {
            Removed::Disc { disc } => disc.contains_interior(z),
            Removed::Point { point } => point.lattice().torus_distance(z, point.rep()) <= tol,
        }
    }
}

/// Checks that removed regions are pairwise disjoint on the torus.
pub fn check_disjoint<T: Real>(removed: &[Removed<T>]) -> Result<()> {
    for i in 0..removed.len() {
        for j in 0..i {
            let (a, b) = (&removed[i], &removed[j]);
            let d = a.center().distance(&b.center());
            if d <= a.radius() + b.radius() {
                return Err(Error::OverlappingRegions(j, i));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn disc_radius_limited_by_systole() {
        let l = Lattice::<f64>::square();
        assert!(TorusDisc::new(l.point(C::new(0.1, 0.1)), 0.49).is_ok());
        assert!(matches!(
            TorusDisc::new(l.point(C::new(0.1, 0.1)), 0.5),
            Err(Error::DiscTooLarge { .. })
        ));
    }

    #[test]
    fn torus_equivalence_is_an_equivalence_relation() {
        let l = Lattice::new(C::new(1.0, 0.1), C::new(0.2, 0.9)).unwrap();
        let pts: Vec<C> = (0..6)
            .map(|k| {
                let b = C::new(0.1 * k as f64, 0.05) + l.omega1() * (k % 3) as f64;
                if k % 2 == 0 {
                    b
                } else {
                    C::new(0.1 * (k - 1) as f64, 0.05) - l.omega2() * 2.0
                }
            })
            .collect();
        let eq = |a: C, b: C| l.equivalent(a, b, 1e-9);
        for &a in &pts {
            assert!(eq(a, a));
            for &b in &pts {
                assert_eq!(eq(a, b), eq(b, a));
                for &c in &pts {
                    if eq(a, b) && eq(b, c) {
                        assert!(eq(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn overlapping_regions_rejected() {
        let l = Lattice::<f64>::square();
        let a = Removed::disc(C::new(0.0, 0.0), 0.2, l).unwrap();
        let b = Removed::disc(C::new(0.95, 0.0), 0.2, l).unwrap();
        assert_eq!(check_disjoint(&[a, b]), Err(Error::OverlappingRegions(0, 1)));
        let c = Removed::point(C::new(0.5, 0.5), l);
        assert!(check_disjoint(&[a, c]).is_ok());
    }
}
