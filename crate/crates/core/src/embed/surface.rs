use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_disjoint, sample_torus_minus, BoundaryCurve, Lattice, Removed, SampleGrid};
use crate::scalar::{Cx, Real};

/// A torus with one or two discs or points removed.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TorusSurface<T: Real> {
    lattice: Lattice<T>,
    removed: Vec<Removed<T>>,
    /// Boundary circle of each removed disc; `None` for points.
    boundaries: Vec<Option<BoundaryCurve<Cx<T>>>>,
}

/// Counter-clockwise circle `c + r e^{it}`, `t` in `[0, 2 pi)`.
pub fn circle<T: Real>(center: Cx<T>, radius: T, n: usize) -> Result<BoundaryCurve<Cx<T>>> {
    let chord = radius * T::lit(2.0) * (T::PI() / T::lit(n as f64)).sin();
    BoundaryCurve::from_fn(
        move |t: T| center + Complex::from_polar(radius, t),
        T::zero(),
        T::TAU(),
        n,
        true,
        chord * T::lit(1.01),
    )
}

impl<T: Real> TorusSurface<T> {
    pub fn new(lattice: Lattice<T>, removed: Vec<Removed<T>>, boundary_samples: usize) -> Result<Self> {
        if removed.is_empty() || removed.len() > 2 {
            return Err(Error::InvalidParameter(format!(
                "expected 1 or 2 removed regions, got {}",
                removed.len()
            )));
        }
        check_disjoint(&removed)?;
        let boundaries = removed
            .iter()
            .map(|r| match r {
                Removed::Disc { disc } => circle(disc.center().rep(), disc.radius(), boundary_samples).map(Some),
                Removed::Point { .. } => Ok(None),
            })
            .collect::<Result<_>>()?;
        Ok(Self { lattice, removed, boundaries })
    }

    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    pub fn removed(&self) -> &[Removed<T>] {
        &self.removed
    }

    pub fn boundary(&self, i: usize) -> Option<&BoundaryCurve<Cx<T>>> {
        self.boundaries.get(i).and_then(|b| b.as_ref())
    }

    /// Boundary circle of region `i` re-sampled with `n` points.
    pub fn boundary_with(&self, i: usize, n: usize) -> Result<BoundaryCurve<Cx<T>>> {
        match self.removed.get(i) {
            Some(Removed::Disc { disc }) => circle(disc.center().rep(), disc.radius(), n),
            _ => Err(Error::InvalidParameter(format!("region {i} is not a disc"))),
        }
    }

    /// Whether `z` lies in the interior of removed region `i` (for a point:
    /// equals it within `tol`).
    pub fn in_region(&self, i: usize, z: Cx<T>, tol: T) -> bool {
        self.removed[i].contains(z, tol)
    }

    /// Index of the removed region containing `z`.
    pub fn region_of(&self, z: Cx<T>, tol: T) -> Option<usize> {
        (0..self.removed.len()).find(|&i| self.in_region(i, z, tol))
    }

    pub fn grid(&self, density: T, margin: T) -> Result<SampleGrid<T>> {
        sample_torus_minus(&self.lattice, &self.removed, density, margin)
    }
}
