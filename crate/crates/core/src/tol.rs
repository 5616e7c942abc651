//! Certification thresholds and numeric guards, in one place.
//!
//! Residual thresholds are what an acceptance run checks against; guards are
//! internal caps and cutoffs. Values are fixed here, not configurable.

/// Distance below which a resolvent point counts as being on the spectrum.
pub const EPS_SPEC: f64 = 1e-12;

/// Relative residual bound for resolvent solves.
pub const RESOLVENT_REL: f64 = 1e-10;

/// Materialized dimension cap.
pub const DIM_CAP: usize = 4096;

/// Contour quadrature starts at this node count and doubles.
pub const NODE_START: usize = 32;

/// Contour quadrature node cap.
pub const NODE_CAP: usize = 4096;

/// Node-doubling target for the projection idempotency residual.
pub const IDEM_TARGET: f64 = 1e-10;

/// Acceptance threshold for projection idempotency; above it a projection is
/// flagged uncertified.
pub const IDEM_CERT: f64 = 1e-8;

/// Acceptance threshold for the projection commutation residual |AP - PA|.
pub const COMMUTE_CERT: f64 = 1e-8;

/// Drazin axiom residual |BAB - B|.
pub const BAB_RESIDUAL: f64 = 1e-10;

/// Drazin axiom residual |AB - BA|.
pub const DRAZIN_COMMUTE: f64 = 1e-10;

/// Hausdorff bound between the residue spectrum and the spectral set.
pub const SIGMA_MATCH: f64 = 1e-8;

/// Agreement bound between the algebraic, contour, and functional-calculus
/// inverse representations.
pub const CROSS_METHOD: f64 = 1e-8;

/// Agreement bound between inverses built from distinct admissible shifts.
pub const XI_INDEPENDENCE: f64 = 1e-9;

/// |gap_norm - predicted| bound for the non-uniqueness gap on diagonal models.
pub const GAP_MATCH: f64 = 1e-8;

/// Commutation guard for Riesz perturbations.
pub const PERTURB_COMMUTE: f64 = 1e-12;

/// Margin below which a perturbed spectrum has no usable Riesz/invertible split.
pub const SIGMA_MARGIN_MIN: f64 = 1e-6;

/// Laurent series terms below this norm stop the summation.
pub const LAURENT_TERM_CUTOFF: f64 = 1e-14;

/// ODE series terms below this bound stop the summation.
pub const SERIES_TERM_CUTOFF: f64 = 1e-12;

/// ODE series term cap.
pub const SERIES_TERM_CAP: usize = 200;

/// Compatibility residual bound for ODE initial data.
pub const COMPATIBILITY: f64 = 1e-8;

/// Sup-norm bound for series-vs-integrator agreement.
pub const ODE_ORACLE: f64 = 1e-6;

/// Slack subtracted from the spectral gap when fitting the decay rate mu.
pub const MU_SLACK: f64 = 1e-6;

/// Residual bound for Q-projection commutation QP = PQ = Q.
pub const Q_COMMUTE: f64 = 1e-9;

/// Residual bound for the semigroup integral identity, as a multiple of tol.
pub const INTEGRAL_FACTOR: f64 = 10.0;

/// Power iteration relative tolerance for operator 2-norms.
pub const POWER_TOL: f64 = 1e-12;

/// Power iteration cap.
pub const POWER_CAP: usize = 10_000;

/// QR eigenvalue iteration cap, per matrix dimension.
pub const QR_SWEEPS_PER_EIGENVALUE: usize = 40;

/// Point-membership tolerance when matching declared eigenvalues to
/// spectral-set points.
pub const MEMBERSHIP: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::assertions_on_constants)]
    fn threshold_ordering() {
        assert!(EPS_SPEC < RESOLVENT_REL);
        assert!(IDEM_TARGET < IDEM_CERT);
        assert!(BAB_RESIDUAL < SIGMA_MATCH);
        assert!(XI_INDEPENDENCE < CROSS_METHOD);
    }
}
