//! Error taxonomy shared by all modules.
//!
//! Every operation returns [`Result`]; variants carry enough payload to name
//! the violated invariant in CLI messages.

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Materialized dimension exceeds the configured cap.
    #[error("model too large: dimension {dim} exceeds cap {cap}")]
    ModelTooLarge { dim: usize, cap: usize },

    /// A declared model violates a structural invariant.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Resolvent point too close to the spectrum.
    #[error("near-singular resolvent: lambda {lambda} is within {distance:.3e} of eigenvalue {eigenvalue}")]
    NearSingular {
        lambda: Complex64,
        eigenvalue: Complex64,
        distance: f64,
    },

    /// A linear system factored to a vanishing pivot.
    #[error("singular linear system: pivot magnitude {pivot:.3e} at step {step}")]
    SingularSystem { pivot: f64, step: usize },

    /// Eigenvalue iteration did not converge.
    #[error("eigenvalue iteration failed to converge after {iterations} iterations")]
    NumericFailure { iterations: usize },

    /// The requested sigma_n needs more declared Riesz points than the model has.
    #[error("insufficient riesz points: sigma_{n} needs {required} nonzero Riesz points, model declares {available}")]
    InsufficientRieszPoints {
        n: usize,
        required: usize,
        available: usize,
    },

    /// Consecutive Riesz moduli coincide, so no separating annulus exists.
    #[error("no separation: moduli at indices {index} and {} coincide at {modulus}", index + 1)]
    NoSeparation { index: usize, modulus: f64 },

    /// Contour quadrature hit the node cap without certifying.
    #[error("quadrature failure: residual {residual:.3e} after {nodes} nodes")]
    QuadratureFailure { residual: f64, nodes: usize },

    /// An eigenvalue sits too close to the in/out decision boundary of a spectral set.
    #[error("ambiguous membership: eigenvalue {eigenvalue} is {distance:.3e} from spectral set point {point}")]
    AmbiguousMembership {
        eigenvalue: Complex64,
        point: Complex64,
        distance: f64,
    },

    /// Shift fails |xi| > 2r.
    #[error("inadmissible shift: |xi| = {xi_abs:.6} must exceed 2r = {:.6}", 2.0 * radius)]
    InadmissibleShift { xi_abs: f64, radius: f64 },

    /// (A - xi P) is numerically singular.
    #[error("shift-singular: A - xi P is singular for xi = {xi}")]
    ShiftSingular { xi: Complex64 },

    /// The spectral set handed to a Drazin construction does not contain 0.
    #[error("spectral set must contain 0 for a Drazin construction")]
    SigmaWithoutZero,

    /// A contour circle passes through or encloses the wrong spectrum.
    #[error("invalid contour: {0}")]
    InvalidContour(String),

    /// Laurent point outside the convergence annulus.
    #[error("annulus violation: |lambda| = {lambda_abs:.6} not in ({inner:.6}, {outer:.6})")]
    AnnulusViolation {
        lambda_abs: f64,
        inner: f64,
        outer: f64,
    },

    /// n0 >= n1 in a non-uniqueness comparison.
    #[error("ordering error: n0 = {n0} must be strictly less than n1 = {n1}")]
    Ordering { n0: usize, n1: usize },

    /// Perturbation does not commute with the model.
    #[error("commutation error: |AR - RA| = {residual:.3e} exceeds {tolerance:.1e}")]
    Commutation { residual: f64, tolerance: f64 },

    /// Declared perturbation is not Riesz-type.
    #[error("perturbation is not Riesz-type: eigenvalue {eigenvalue} has modulus {:.6} >= 1/2", eigenvalue.norm())]
    NotRieszType { eigenvalue: Complex64 },

    /// No sigma_m partition of the perturbed spectrum is Drazin-eligible.
    #[error("no eligible sigma: {0}")]
    NoEligibleSigma(String),

    /// exp(tA) would overflow at the requested horizon.
    #[error("horizon too large: |tA| scale {scale:.3e} is beyond the exponential range")]
    HorizonTooLarge { scale: f64 },

    /// A projection failed its residual certificates.
    #[error("uncertified projection: idem residual {idem:.3e}, commute residual {commute:.3e}")]
    Uncertified { idem: f64, commute: f64 },

    /// Spectrum on the complement range has nonnegative real part.
    #[error("no decay: spectral abscissa {abscissa:.6} on R(I-P) is not negative enough")]
    NoDecay { abscissa: f64 },

    /// theta admits an invertible-part eigenvalue.
    #[error("theta too large: {theta:.6} does not separate sigma(AP) from the invertible spectrum (offender {offender})")]
    ThetaTooLarge { theta: f64, offender: Complex64 },

    /// Forcing descriptor outside the closed-form family.
    #[error("unsupported forcing: {0}")]
    UnsupportedForcing(String),

    /// Evaluation time outside the validity interval.
    #[error("horizon error: t = {t:.6} outside [0, {limit:.6}]")]
    Horizon { t: f64, limit: f64 },

    /// Initial data incompatible with the series constraint.
    #[error("incompatible initial data: position residual {pos:.3e}, velocity residual {vel:.3e}")]
    IncompatibleInitialData { pos: f64, vel: f64 },

    /// Reference integrator step size underflowed.
    #[error("oracle failure: step size {step:.3e} underflowed")]
    OracleFailure { step: f64 },

    /// Operation needs declared structure the model does not carry.
    #[error("model is not structured: {0}")]
    NotStructured(String),

    /// Malformed model spec file or scalar literal.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors the CLI maps to exit code 2 (unreadable input), as
    /// opposed to violated mathematical preconditions (exit code 3).
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_))
    }
}
