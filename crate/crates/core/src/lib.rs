//! Holomorphic embeddings of punctured tori into C^2, the maps used to build
//! and straighten them, and basin-of-attraction machinery for the embedding
//! of general Jordan domains.

// negated comparisons reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod elliptic;
pub mod basin;
pub mod embed;
mod error;
pub mod geometry;
pub mod maps;
mod point;
mod scalar;

pub use error::{Error, Result};
pub use point::C2;
pub use scalar::{is_finite_cx, Cx, Real};

pub type Lattice64 = geometry::Lattice<f64>;
pub type WeierstrassP64 = elliptic::WeierstrassP<f64>;
pub type Cx64 = Cx<f64>;
pub type C2f64 = C2<f64>;
pub type Lattice32 = geometry::Lattice<f32>;
pub type WeierstrassP32 = elliptic::WeierstrassP<f32>;
pub type HoloMap64 = maps::HoloMap<f64>;
