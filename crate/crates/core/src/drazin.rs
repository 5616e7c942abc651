//! Drazin inverses relative to a spectral set containing 0.
//!
//! The algebraic route is B = (A - xi P_sigma)^{-1} (I - P_sigma) for any
//! shift |xi| > 2r; the same operator is recovered by a weighted contour
//! integral around the complement spectrum, by the Laurent expansion of the
//! resolvent, and (for diagonal models) by applying the scalar function
//! h = 0 on sigma, 1/lambda elsewhere. Certificates measure the inverse
//! axioms as residuals instead of trusting any one construction.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::opmodel::OperatorModel;
use crate::projector::{self, OrientedContour, SpectralProjection};
use crate::spectral::{self, SpectralSet};
use crate::tol;

/// A candidate inverse with the residuals of the three axioms: BAB = B,
/// AB = BA, and sigma(A(I - AB)) = sigma.
#[derive(Debug, Clone)]
pub struct DrazinCertificate {
    pub b_matrix: CMat,
    pub bab_residual: f64,
    pub commute_residual: f64,
    pub residue_spectrum: Vec<Complex64>,
    /// Hausdorff distance between the residue spectrum and the realized part
    /// of sigma (plus 0 whenever rank P < n), multiplicities ignored.
    pub sigma_match: f64,
    pub xi_used: Complex64,
}

impl DrazinCertificate {
    pub fn passes(&self) -> bool {
        self.bab_residual <= tol::BAB_RESIDUAL
            && self.commute_residual <= tol::DRAZIN_COMMUTE
            && self.sigma_match <= tol::SIGMA_MATCH
    }
}

/// xi = -1 whenever sigma permits it, otherwise a real shift safely outside
/// the 2r disc.
pub fn default_xi(sigma: &SpectralSet) -> Complex64 {
    if sigma.radius_r < 0.5 {
        Complex64::new(-1.0, 0.0)
    } else {
        Complex64::new(-(2.0 * sigma.radius_r + 1.0), 0.0)
    }
}

fn checked_inverse(
    model: &OperatorModel,
    sigma: &SpectralSet,
    xi: Complex64,
) -> Result<(CMat, SpectralProjection)> {
    if !sigma.contains_zero {
        return Err(Error::SigmaWithoutZero);
    }
    if xi.norm() <= 2.0 * sigma.radius_r {
        return Err(Error::InadmissibleShift { xi_abs: xi.norm(), radius: sigma.radius_r });
    }
    let projection = projector::projection_auto(model, sigma)?;
    let a = model.materialize()?;
    let n = a.nrows();
    let shifted = &a - &(&projection.matrix * xi);
    let rhs = linalg::identity(n) - &projection.matrix;
    let b = linalg::lu_solve(&shifted, &rhs).map_err(|_| Error::ShiftSingular { xi })?;
    Ok((b, projection))
}

fn certificate_from(
    a: &CMat,
    b: CMat,
    projection: &SpectralProjection,
    sigma: &SpectralSet,
    xi: Complex64,
) -> Result<DrazinCertificate> {
    let n = a.nrows();
    let ab = a.dot(&b);
    let bab_residual = linalg::op_norm(&(&b.dot(&ab) - &b));
    let commute_residual = linalg::op_norm(&(&ab - &b.dot(a)));
    let residue = a.dot(&(&linalg::identity(n) - &ab));
    let residue_spectrum = linalg::eigenvalues(&residue)?;

    // sigma(A P_sigma) at truncation scale: the realized points of sigma,
    // plus 0 whenever P has a kernel
    let mut expected = sigma.realized_points();
    let trace_re: f64 = (0..n).map(|i| projection.matrix[[i, i]].re).sum();
    if trace_re < n as f64 - 0.5
        && !expected.iter().any(|p| p.norm() <= tol::MEMBERSHIP)
    {
        expected.push(Complex64::new(0.0, 0.0));
    }
    let sigma_match = linalg::hausdorff(&residue_spectrum, &expected);

    Ok(DrazinCertificate {
        b_matrix: b,
        bab_residual,
        commute_residual,
        residue_spectrum,
        sigma_match,
        xi_used: xi,
    })
}

/// B = (A - xi P_sigma)^{-1} (I - P_sigma), fully certified.
pub fn drazin_algebraic(
    model: &OperatorModel,
    sigma: &SpectralSet,
    xi: Complex64,
) -> Result<DrazinCertificate> {
    let (b, projection) = checked_inverse(model, sigma, xi)?;
    let a = model.materialize()?;
    certificate_from(&a, b, &projection, sigma, xi)
}

/// The inverse matrix alone, with the default shift.
pub fn drazin_inverse(model: &OperatorModel, sigma: &SpectralSet) -> Result<CMat> {
    let (b, _) = checked_inverse(model, sigma, default_xi(sigma))?;
    Ok(b)
}

/// (1/2 pi i) contour integral of lambda^{-1} (lambda I - A)^{-1} over
/// counterclockwise circles around the complement spectrum sigma'.
///
/// The clockwise unbounded-domain boundary deforms to these circles because
/// lambda^{-1} R(lambda; A) decays like |lambda|^{-2}, so the outer circle
/// contributes nothing in the limit.
pub fn drazin_contour(
    model: &OperatorModel,
    sigma_prime: &SpectralSet,
    contour: &OrientedContour,
) -> Result<CMat> {
    let prepared = model.prepare()?;
    for circle in &contour.circles {
        if circle.center.norm() <= circle.radius {
            return Err(Error::InvalidContour(format!(
                "circle centered {} radius {} passes around 0",
                circle.center, circle.radius
            )));
        }
    }
    contour.validate_against(&prepared.spectrum)?;
    for &e in &prepared.spectrum {
        let member = sigma_prime.classify(e)?;
        let enclosed = contour.encloses(e);
        if member && !enclosed {
            return Err(Error::InvalidContour(format!(
                "sigma' point {e} is not enclosed by the contour"
            )));
        }
        if !member && enclosed {
            return Err(Error::InvalidContour(format!(
                "contour encloses {e}, which is not in sigma'"
            )));
        }
    }
    let (matrix, _) = projector::quadrature_weighted(
        &prepared,
        contour,
        |lambda| Complex64::new(1.0, 0.0) / lambda,
        |current, previous| match previous {
            Some(prev) => linalg::op_norm(&(current - prev)) < tol::IDEM_TARGET,
            None => false,
        },
    )?;
    Ok(matrix)
}

/// Truncated Laurent expansion of the resolvent at lambda inside the annulus
/// r(A P_sigma) < |lambda| < 1/r(A^{D,sigma}).
#[derive(Debug, Clone)]
pub struct LaurentExpansion {
    pub matrix: CMat,
    /// Geometric bound on the dropped tails of both series.
    pub tail_bound: f64,
    pub principal_terms: usize,
    pub analytic_terms: usize,
}

pub fn laurent_resolvent(
    model: &OperatorModel,
    sigma: &SpectralSet,
    lambda: Complex64,
    p_max: usize,
) -> Result<LaurentExpansion> {
    let prepared = model.prepare()?;
    let (b, projection) = checked_inverse(model, sigma, default_xi(sigma))?;

    let inner = sigma
        .realized_points()
        .iter()
        .map(|p| p.norm())
        .fold(0.0, f64::max);
    let mut outer = f64::INFINITY;
    for &e in &prepared.spectrum {
        if !sigma.classify(e)? {
            outer = outer.min(e.norm());
        }
    }
    let mag = lambda.norm();
    if mag <= inner || mag >= outer {
        return Err(Error::AnnulusViolation { lambda_abs: mag, inner, outer });
    }

    let n = prepared.dim();
    let inv_lambda = Complex64::new(1.0, 0.0) / lambda;
    // the scalar power folds into the running matrix term so neither factor
    // overflows on its own deep into the series
    let a_over_lambda: CMat = &prepared.matrix * inv_lambda;
    let b_lambda: CMat = &b * lambda;

    // principal part: sum_{p>=1} lambda^{-p} A^{p-1} P
    let mut sum = CMat::zeros((n, n));
    let mut term: CMat = &projection.matrix * inv_lambda;
    let mut principal_terms = 0;
    let mut last_principal = 0.0;
    while principal_terms < p_max {
        last_principal = linalg::frobenius(&term);
        sum += &term;
        principal_terms += 1;
        if last_principal < tol::LAURENT_TERM_CUTOFF {
            break;
        }
        term = a_over_lambda.dot(&term);
    }

    // analytic part: -sum_{p>=0} lambda^p B^{p+1}
    let mut term_b = b.clone();
    let mut analytic_terms = 0;
    let mut last_analytic = 0.0;
    while analytic_terms < p_max {
        last_analytic = linalg::frobenius(&term_b);
        sum -= &term_b;
        analytic_terms += 1;
        if last_analytic < tol::LAURENT_TERM_CUTOFF {
            break;
        }
        term_b = b_lambda.dot(&term_b);
    }

    let q_in = if inner > 0.0 { inner / mag } else { 0.0 };
    let q_out = if outer.is_finite() { mag / outer } else { 0.0 };
    let tail_in = if q_in > 0.0 { last_principal * q_in / (1.0 - q_in) } else { 0.0 };
    let tail_out = if q_out > 0.0 { last_analytic * q_out / (1.0 - q_out) } else { 0.0 };
    let tail_bound = tail_in + tail_out + 1e-13;

    Ok(LaurentExpansion { matrix: sum, tail_bound, principal_terms, analytic_terms })
}

/// h(A) for diagonal models, h = 0 on sigma and 1/lambda off it, with the
/// spectrum the spectral mapping theorem predicts: {0} plus the reciprocals
/// of the spectrum outside sigma.
#[derive(Debug, Clone)]
pub struct FunctionalCalculusInverse {
    pub matrix: CMat,
    pub predicted_spectrum: Vec<Complex64>,
}

pub fn functional_calculus_inverse(
    model: &OperatorModel,
    sigma: &SpectralSet,
) -> Result<FunctionalCalculusInverse> {
    let prepared = model.prepare()?;
    let entries = prepared.diag_entries().ok_or_else(|| {
        Error::NotStructured("functional calculus application needs a diagonal model".into())
    })?;
    let mut values = Vec::with_capacity(entries.len());
    let mut predicted = vec![Complex64::new(0.0, 0.0)];
    for &d in &entries {
        if sigma.classify(d)? {
            values.push(Complex64::new(0.0, 0.0));
        } else {
            let h = Complex64::new(1.0, 0.0) / d;
            values.push(h);
            if !predicted.iter().any(|p| (p - h).norm() <= tol::MEMBERSHIP) {
                predicted.push(h);
            }
        }
    }
    Ok(FunctionalCalculusInverse { matrix: linalg::diag(&values), predicted_spectrum: predicted })
}

/// |A^{D,sigma_{n0}} - A^{D,sigma_{n1}}| with its diagonal-model prediction
/// max 1/|lambda_k| over n0 < k <= n1; always strictly positive.
#[derive(Debug, Clone, Copy)]
pub struct NonuniquenessGap {
    pub gap_norm: f64,
    pub predicted: f64,
}

pub fn nonuniqueness_gap(
    model: &OperatorModel,
    n0: usize,
    n1: usize,
) -> Result<NonuniquenessGap> {
    if n0 >= n1 {
        return Err(Error::Ordering { n0, n1 });
    }
    let (sigma0, _) = spectral::partition_sigma_n(model, n0)?;
    let (sigma1, _) = spectral::partition_sigma_n(model, n1)?;
    let b0 = drazin_inverse(model, &sigma0)?;
    let b1 = drazin_inverse(model, &sigma1)?;
    let gap_norm = linalg::op_norm(&(&b0 - &b1));
    let sequence = model.riesz_sequence()?;
    let predicted = sequence[n0..n1]
        .iter()
        .map(|z| 1.0 / z.norm())
        .fold(0.0, f64::max);
    Ok(NonuniquenessGap { gap_norm, predicted })
}

/// Result of perturbing A by a commuting Riesz operator: the perturbed model,
/// the sigma_m chosen for it, and the certificate witnessing that A + R is
/// still Drazin invertible relative to a spectral set containing 0.
#[derive(Debug, Clone)]
pub struct PerturbOutcome {
    pub perturbed: OperatorModel,
    pub sigma: SpectralSet,
    pub certificate: DrazinCertificate,
}

pub fn perturb_riesz(model: &OperatorModel, perturbation: &OperatorModel) -> Result<PerturbOutcome> {
    let a = model.materialize()?;
    let r = perturbation.materialize()?;
    if a.nrows() != r.nrows() {
        return Err(Error::InvalidModel(format!(
            "perturbation dimension {} does not match the model dimension {}",
            r.nrows(),
            a.nrows()
        )));
    }

    let commute = linalg::op_norm(&(&a.dot(&r) - &r.dot(&a)));
    if commute > tol::PERTURB_COMMUTE {
        return Err(Error::Commutation { residual: commute, tolerance: tol::PERTURB_COMMUTE });
    }
    let r_spectrum = perturbation.prepare()?.spectrum;
    if let Some(&offender) = r_spectrum.iter().find(|e| e.norm() >= 0.5) {
        return Err(Error::NotRieszType { eigenvalue: offender });
    }
    if !perturbation.declared_invertible().is_empty() {
        return Err(Error::NotRieszType {
            eigenvalue: perturbation.declared_invertible()[0],
        });
    }

    let perturbed = perturbed_model(model, perturbation, &a, &r);
    let sigma = eligible_sigma(&perturbed)?;
    let xi = default_xi(&sigma);
    let certificate = drazin_algebraic(&perturbed, &sigma, xi)?;
    Ok(PerturbOutcome { perturbed, sigma, certificate })
}

/// Coordinate-wise sum when both models are plain diagonals (R's Riesz list
/// covers every coordinate); dense sum otherwise.
fn perturbed_model(
    model: &OperatorModel,
    perturbation: &OperatorModel,
    a: &CMat,
    r: &CMat,
) -> OperatorModel {
    if let (
        OperatorModel::Diagonal { riesz: ar, invertible: ai },
        OperatorModel::Diagonal { riesz: rr, invertible: ri },
    ) = (model, perturbation)
    {
        if ri.is_empty() && rr.len() == ar.len() + ai.len() {
            let riesz: Vec<Complex64> = ar.iter().zip(rr.iter()).map(|(x, y)| x + y).collect();
            let invertible: Vec<Complex64> =
                ai.iter().zip(rr[ar.len()..].iter()).map(|(x, y)| x + y).collect();
            let candidate = OperatorModel::diagonal(riesz, invertible);
            if candidate.validate().is_ok() {
                return candidate;
            }
        }
    }
    OperatorModel::dense(a + r)
}

/// The largest-index (smallest-radius) Drazin-eligible sigma_m of a
/// structured model; for dense models, the split of the spectrum at
/// modulus 1/2.
fn eligible_sigma(model: &OperatorModel) -> Result<SpectralSet> {
    if model.riesz_sequence().is_ok() {
        let sequence = model.riesz_sequence()?;
        if sequence.is_empty() {
            let sigma = spectral::sigma_riesz(model)?;
            if sigma.drazin_eligible() {
                return Ok(sigma);
            }
            return Err(Error::NoEligibleSigma(
                "the perturbed Riesz part is empty and 0 is not isolated".into(),
            ));
        }
        for m in (0..sequence.len()).rev() {
            match spectral::partition_sigma_n(model, m) {
                Ok((sigma, _)) if sigma.drazin_eligible() => return Ok(sigma),
                _ => continue,
            }
        }
        return Err(Error::NoEligibleSigma(format!(
            "no sigma_m of the perturbed spectrum has radius below 1/2 (smallest modulus {})",
            sequence.last().map(|z| z.norm()).unwrap_or(0.0)
        )));
    }

    // dense: classify realized spectrum against the 1/2 circle
    let prepared = model.prepare()?;
    let mut inside: Vec<Complex64> = Vec::new();
    let mut outside_min = f64::INFINITY;
    let mut zero_mult = 0usize;
    for &e in &prepared.spectrum {
        if e.norm() <= tol::EPS_SPEC {
            zero_mult += 1;
        } else if e.norm() < 0.5 {
            if !inside.iter().any(|q| (q - e).norm() <= tol::MEMBERSHIP) {
                inside.push(e);
            }
        } else {
            outside_min = outside_min.min(e.norm());
        }
    }
    let radius = inside.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let gap = if outside_min.is_finite() {
        let margin = outside_min - radius;
        if margin <= 2.0 * tol::SIGMA_MARGIN_MIN {
            return Err(Error::NoEligibleSigma(format!(
                "perturbed spectrum leaves only a {margin:.3e} margin around modulus 1/2"
            )));
        }
        margin / 2.0
    } else {
        radius.max(1.0)
    };
    let mut points = vec![spectral::SpectralPoint {
        value: Complex64::new(0.0, 0.0),
        multiplicity: zero_mult,
    }];
    for v in inside {
        let mult = prepared
            .spectrum
            .iter()
            .filter(|e| (*e - v).norm() <= tol::MEMBERSHIP)
            .count();
        points.push(spectral::SpectralPoint { value: v, multiplicity: mult });
    }
    Ok(SpectralSet::new(points, true, gap))
}
