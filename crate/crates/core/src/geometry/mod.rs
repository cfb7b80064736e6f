//! Period lattices, the torus `C / X`, curves and sample grids.

mod curve;
mod grid;
mod lattice;
mod torus;

pub use curve::{BoundaryCurve, CurvePoint};
pub use grid::{sample_torus_minus, SampleGrid};
pub use lattice::{Lattice, LatticeSpec};
pub use torus::{check_disjoint, Removed, TorusDisc, TorusPoint};
