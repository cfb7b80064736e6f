use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_disjoint, Lattice, Removed, TorusPoint};
use crate::scalar::{Cx, Real};

/// Sample points on a torus with guaranteed separation and clearance.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SampleGrid<T> {
    lattice: Lattice<T>,
    points: Vec<Complex<T>>,
    min_separation: T,
    margin: T,
    /// Size of the underlying regular grid before exclusions, when regular.
    full_shape: Option<(usize, usize)>,
}

impl<T: Real> SampleGrid<T> {
    /// Wraps arbitrary torus points. `exclusions` are points (e.g. poles of
    /// an embedding) that must stay `margin` away from every sample, together
    /// with the lattice itself.
    pub fn from_points(
        lattice: Lattice<T>,
        points: Vec<Cx<T>>,
        margin: T,
        exclusions: &[Cx<T>],
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let points: Vec<_> = points.into_iter().map(|z| lattice.reduce(z)).collect();
        for z in &points {
            if lattice.distance_to_lattice(*z) < margin
                || exclusions.iter().any(|e| lattice.torus_distance(*z, *e) < margin)
            {
                return Err(Error::InvalidParameter(format!(
                    "grid point {z} violates the exclusion margin"
                )));
            }
        }
        let min_separation = min_torus_separation(&lattice, &points);
        Ok(Self { lattice, points, min_separation, margin, full_shape: None })
    }

    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    pub fn points(&self) -> &[Cx<T>] {
        &self.points
    }

    pub fn torus_points(&self) -> impl Iterator<Item = TorusPoint<T>> + '_ {
        self.points.iter().map(move |z| self.lattice.point(*z))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min_separation(&self) -> T {
        self.min_separation
    }

    pub fn margin(&self) -> T {
        self.margin
    }

    pub fn full_shape(&self) -> Option<(usize, usize)> {
        self.full_shape
    }
}

/// Regular grid of spacing about `density` on the fundamental domain, minus
/// the removed regions inflated by `margin` and minus a `margin`-ball around
/// the lattice (the pole of the Weierstrass function).
pub fn sample_torus_minus<T: Real>(
    lattice: &Lattice<T>,
    removed: &[Removed<T>],
    density: T,
    margin: T,
) -> Result<SampleGrid<T>> {
    if !(margin > T::zero()) || !(density > T::zero()) {
        return Err(Error::InvalidParameter("margin and density must be positive".into()));
    }
    check_disjoint(removed)?;
    let ns = (lattice.omega1().norm() / density).ceil().to_usize().unwrap_or(1).max(1);
    let nt = (lattice.omega2().norm() / density).ceil().to_usize().unwrap_or(1).max(1);
    let half = T::lit(0.5);
    let points: Vec<Cx<T>> = (0..ns * nt)
        .into_par_iter()
        .filter_map(|idx| {
            let (i, j) = (idx / nt, idx % nt);
            let s = -half + (T::lit(i as f64) + half) / T::lit(ns as f64);
            let t = -half + (T::lit(j as f64) + half) / T::lit(nt as f64);
            let z = lattice.from_coords(s, t);
            let ok = lattice.distance_to_lattice(z) >= margin
                && removed.iter().all(|r| r.signed_distance(z) >= margin);
            ok.then_some(z)
        })
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let steps = [
        lattice.omega1() / T::lit(ns as f64),
        lattice.omega2() / T::lit(nt as f64),
    ];
    let min_separation = [steps[0], steps[1], steps[0] + steps[1], steps[0] - steps[1]]
        .iter()
        .map(|v| v.norm())
        .fold(T::infinity(), T::min);
    Ok(SampleGrid {
        lattice: *lattice,
        points,
        min_separation,
        margin,
        full_shape: Some((ns, nt)),
    })
}

fn min_torus_separation<T: Real>(lattice: &Lattice<T>, points: &[Cx<T>]) -> T {
    if points.len() < 2 {
        return T::infinity();
    }
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            points[..i]
                .iter()
                .map(|p| lattice.torus_distance(points[i], *p))
                .fold(T::infinity(), T::min)
        })
        .reduce(|| T::infinity(), T::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type C = Complex<f64>;

    #[test]
    fn plain_grid_excludes_only_the_pole() {
        let l = Lattice::<f64>::square();
        let g = sample_torus_minus(&l, &[], 0.05, 0.03).unwrap();
        let (ns, nt) = g.full_shape().unwrap();
        assert_eq!((ns, nt), (20, 20));
        // centres at odd multiples of 1/40: the four closest to 0 are at distance ~0.035
        assert_eq!(g.len(), 400);
        let g = sample_torus_minus(&l, &[], 0.05, 0.04).unwrap();
        assert_eq!(g.len(), 396);
        assert!((g.min_separation() - 0.05).abs() < 1e-12);
        for z in g.points() {
            assert!(l.distance_to_lattice(*z) >= 0.04);
        }
    }

    #[test]
    fn covering_disc_gives_empty_grid() {
        let l = Lattice::<f64>::square();
        let d = Removed::disc(C::new(0.0, 0.0), 0.49, l).unwrap();
        assert_eq!(sample_torus_minus(&l, &[d], 0.1, 0.3).unwrap_err(), Error::EmptyGrid);
    }

    #[test]
    fn grid_count_tracks_area_fraction() {
        let l = Lattice::<f64>::square();
        let margin = 0.01;
        let (r1, r2) = (0.1, 0.15);
        let removed = [
            Removed::disc(C::new(0.2, 0.2), r1, l).unwrap(),
            Removed::disc(C::new(-0.25, -0.2), r2, l).unwrap(),
        ];
        let full = sample_torus_minus(&l, &[], 0.005, margin).unwrap().len() as f64;
        let got = sample_torus_minus(&l, &removed, 0.005, margin).unwrap().len() as f64;
        let frac = 1.0 - PI * ((r1 + margin).powi(2) + (r2 + margin).powi(2)) / l.area();
        let expect = full * frac;
        assert!((got - expect).abs() / expect < 0.10, "got {got}, expect {expect}");
    }

    #[test]
    fn from_points_checks_margin() {
        let l = Lattice::<f64>::square();
        assert!(SampleGrid::from_points(l, vec![C::new(0.001, 0.0)], 0.01, &[]).is_err());
        let g = SampleGrid::from_points(l, vec![C::new(0.3, 0.0), C::new(0.3, 0.95)], 0.01, &[])
            .unwrap();
        assert!((g.min_separation() - 0.05).abs() < 1e-12);
    }
}
