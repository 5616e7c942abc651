//! Finite-dimensional operator models with spectral sets containing 0:
//! Drazin inverses relative to a spectral set, built and cross-certified four
//! ways, plus the semigroup and second-order-ODE identities they support.
//!
//! Module map:
//!
//! - [`opmodel`]: operator models, materialization, resolvent solves
//! - [`spectral`]: eigenvalues, the sigma_n / sigma'_n partition, the
//!   accumulation diagnostic at 0
//! - [`projector`]: spectral projections by contour quadrature, with exact
//!   diagonal oracles
//! - [`drazin`]: sigma-relative Drazin inverses (algebraic, contour,
//!   Laurent, functional calculus), non-uniqueness gaps, Riesz perturbations
//! - [`semigroup`]: e^{tA} evolution, decay envelopes, the improper-integral
//!   inverse formula, and the Q projection
//! - [`ode2`]: x'' = A^2 x + f(t) by the spectral-split series/group formula,
//!   with a one-step reference integrator as oracle
//! - [`modelfile`]: the JSON-shaped model spec file format

pub mod drazin;
pub mod error;
pub mod linalg;
pub mod modelfile;
pub mod ode2;
pub mod opmodel;
pub mod projector;
pub mod quad;
pub mod scalar;
pub mod semigroup;
pub mod spectral;
pub mod tol;

pub use error::{Error, Result};
pub use opmodel::{OperatorModel, Reduction};
pub use spectral::{SpectralPoint, SpectralSet};
