//! Basins of attraction of automorphism sequences near the halving map, an
//! induction that grows such a sequence step by step, and sampled helpers
//! for it.

mod hull;
mod induction;
mod pusher;
mod sequence;

pub use hull::{hull_estimate, possibly_in_hull, HullParams};
pub use induction::{fb_induction_step, model_scenario, InductionParams, InductionState, StepMargins};
pub use pusher::{pusher_margins, ModelPusher, Pusher, PusherRequest, PusherResult};
pub use sequence::{
    basin_membership, basin_membership_all, basin_raster, check_star, unit_ball_samples, AutoSequence, BasinQuery,
    Membership, Slice, StarCheck,
};
