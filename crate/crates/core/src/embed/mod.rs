//! Torus embeddings built from translates of the Weierstrass function, the
//! coordinate normalizations that mark boundary points, and sampled checks of
//! the hypotheses those constructions need.

mod embedding;
mod normalize;
mod puncture;
mod report;
mod surface;

pub use embedding::{
    build_embedding, build_embedding_degenerate, choose_pq_for_discs, closest_pair, verify_injectivity,
    verify_injectivity_points, EmbeddingKind, EmbeddingMap, InjectivityParams, PqChoice, PqParams, PAIR_TOL,
};
pub use normalize::{
    default_tube, map_curve, map_curve2, normalize_cord1, normalize_cord2, twist_to_second_boundary,
    verify_theorem_main_hypotheses, Curve2, MarkedPoint, NormalizationResult, NormalizeParams, TwistParams,
};
pub use puncture::{puncture_max_locator, PunctureParams, PunctureResult};
pub use report::{Check, VerificationReport};
pub use surface::{circle, TorusSurface};
