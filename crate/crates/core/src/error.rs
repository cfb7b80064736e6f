use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the library. Numeric payloads are widened to `f64`
/// so the error type does not depend on the scalar parameter.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("periods are R-linearly dependent (Im(omega2/omega1) = {ratio_im:e})")]
    DegenerateLattice { ratio_im: f64 },

    #[error("disc radius {radius} must be below half the systole ({limit})")]
    DiscTooLarge { radius: f64, limit: f64 },

    #[error("removed regions {0} and {1} overlap")]
    OverlappingRegions(usize, usize),

    #[error("sample grid is empty: margin/density leave no admissible points")]
    EmptyGrid,

    #[error("consecutive curve samples {index}..{} are {spacing} apart (bound {bound})", index + 1)]
    CurveSpacing { index: usize, spacing: f64, bound: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point at distance {distance:e} from the lattice is inside the pole margin {margin:e}")]
    PoleProximity { distance: f64, margin: f64 },

    #[error("preimage search did not converge ({detail})")]
    NonConvergence { detail: String },

    #[error("radius {r0} too large: must be below {limit}")]
    RadiusTooLarge { r0: f64, limit: f64 },

    #[error("point lies on the excluded fiber z = {pole} of leaf #{leaf}")]
    PoleFiber { leaf: usize, pole: String },

    #[error("leaf #{leaf} ({kind}) has no symbolic inverse")]
    NonInvertibleLeaf { leaf: usize, kind: &'static str },

    #[error("duplicate pole {0} in rational shear")]
    DuplicatePole(String),

    #[error("linear map is singular (determinant {det:e})")]
    SingularLinear { det: f64 },

    #[error("shear image curves {0} and {1} intersect near the marked points")]
    ShearVerification(String, String),

    #[error("2(p - q) lies in the lattice; use the degenerate construction")]
    DegeneratePair,

    #[error("degenerate construction requires 2(p - q) in the lattice and p != q")]
    NotDegenerate,

    #[error("point {0} is not inside a removed region")]
    NotInRemoved(String),

    #[error("{stage}: search exhausted ({detail})")]
    SearchExhausted { stage: &'static str, detail: String },

    #[error("pusher shortfall: {0}")]
    PusherShortfall(String),

    #[error("(*) violated: worst margin {margin:e} at step {step}; try a smaller epsilon")]
    StarViolation { step: usize, margin: f64 },

    #[error("induction hypothesis ({which}) fails at step {step}: margin {margin:e}")]
    InductionViolation { which: char, step: usize, margin: f64 },

    #[error("polynomial degree cap {cap} reached ({detail})")]
    DegreeCap { cap: usize, detail: String },

    #[error("precondition failed: {0}")]
    Precondition(String),
}
