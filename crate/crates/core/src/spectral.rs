//! Spectral sets sigma_n = {0, lambda_{n+1}, lambda_{n+2}, ...} and their
//! complements, eigenvalue computation, and the accumulation diagnostic at 0.
//!
//! 0 is always listed in a sigma_n, with multiplicity 0 when it is not an
//! eigenvalue at truncation scale ("virtual"): the modeled operator has
//! 0 in the closure of its spectrum even when the finite model does not.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::opmodel::OperatorModel;
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint {
    pub value: Complex64,
    /// Algebraic multiplicity realized at truncation scale; 0 marks a
    /// virtual point.
    pub multiplicity: usize,
}

/// A clopen spectrum cluster: finitely many centers, a radius
/// r = sup |lambda|, and the distance to the complement spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSet {
    pub points: Vec<SpectralPoint>,
    pub contains_zero: bool,
    pub radius_r: f64,
    pub separation_gap: f64,
}

impl SpectralSet {
    /// Builds a set from points; radius is derived, the gap is supplied by
    /// the construction that knows the complement.
    pub fn new(points: Vec<SpectralPoint>, contains_zero: bool, separation_gap: f64) -> Self {
        let radius_r = points.iter().map(|p| p.value.norm()).fold(0.0, f64::max);
        SpectralSet { points, contains_zero, radius_r, separation_gap }
    }

    /// Points realized at truncation scale (multiplicity >= 1), deduplicated.
    pub fn realized_points(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        for p in &self.points {
            if p.multiplicity >= 1 && !out.iter().any(|q| (q - p.value).norm() <= tol::MEMBERSHIP) {
                out.push(p.value);
            }
        }
        out
    }

    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    /// Set membership of an eigenvalue; the virtual 0 counts as a set point.
    /// Values that land between the member tolerance and 10x it are refused
    /// as ambiguous.
    pub fn classify(&self, z: Complex64) -> Result<bool> {
        let mut dist = f64::INFINITY;
        let mut nearest = Complex64::new(0.0, 0.0);
        for p in &self.points {
            let d = (z - p.value).norm();
            if d < dist {
                dist = d;
                nearest = p.value;
            }
        }
        if self.contains_zero {
            let d = z.norm();
            if d < dist {
                dist = d;
                nearest = Complex64::new(0.0, 0.0);
            }
        }
        if dist <= tol::MEMBERSHIP {
            Ok(true)
        } else if dist <= 10.0 * tol::MEMBERSHIP {
            Err(Error::AmbiguousMembership { eigenvalue: z, point: nearest, distance: dist })
        } else {
            Ok(false)
        }
    }

    /// r < 1/2 with 0 inside, the hypothesis under which xi = -1 is an
    /// admissible shift.
    pub fn drazin_eligible(&self) -> bool {
        self.contains_zero && self.radius_r < 0.5
    }
}

/// All eigenvalues with algebraic multiplicity. Structured models return
/// their declared entries; dense blocks go through the QR iteration.
pub fn eigensolve(model: &OperatorModel) -> Result<Vec<Complex64>> {
    Ok(model.prepare()?.spectrum)
}

/// The partition sigma_n = {0, lambda_{n+1}, ...}, sigma'_n = everything
/// else, over the declared Riesz sequence.
///
/// `separation_gap` is the modulus midpoint rule: half the distance between
/// |lambda_n| and |lambda_{n+1}| (for n = 0, between the invertible part and
/// |lambda_1|).
pub fn partition_sigma_n(model: &OperatorModel, n: usize) -> Result<(SpectralSet, SpectralSet)> {
    let prepared = model.prepare()?;
    let sequence = model.riesz_sequence()?;
    if n + 1 > sequence.len() {
        return Err(Error::InsufficientRieszPoints {
            n,
            required: n + 1,
            available: sequence.len(),
        });
    }

    let spectrum = &prepared.spectrum;
    let mult_of = |value: Complex64| {
        spectrum.iter().filter(|e| (*e - value).norm() <= tol::MEMBERSHIP).count()
    };
    let zero_mult = spectrum.iter().filter(|e| e.norm() <= tol::MEMBERSHIP).count();

    // complement side beyond the declared sequence: realized spectrum that is
    // neither 0 nor a sequence point
    let residual_points: Vec<Complex64> = {
        let mut out: Vec<Complex64> = Vec::new();
        for &e in spectrum {
            if e.norm() <= tol::MEMBERSHIP {
                continue;
            }
            if sequence.iter().any(|&s| (e - s).norm() <= tol::MEMBERSHIP) {
                continue;
            }
            if !out.iter().any(|&q| (q - e).norm() <= tol::MEMBERSHIP) {
                out.push(e);
            }
        }
        out
    };

    let kept = &sequence[n..];
    let dropped = &sequence[..n];
    let radius_kept = kept[0].norm();

    let gap = if n >= 1 {
        let outer = sequence[n - 1].norm();
        if outer - radius_kept <= 0.0 {
            return Err(Error::NoSeparation { index: n, modulus: outer });
        }
        (outer - radius_kept) / 2.0
    } else {
        let complement_min =
            residual_points.iter().map(|e| e.norm()).fold(f64::INFINITY, f64::min);
        if complement_min.is_finite() {
            if complement_min - radius_kept <= 0.0 {
                return Err(Error::NoSeparation { index: 0, modulus: complement_min });
            }
            (complement_min - radius_kept) / 2.0
        } else {
            // no complement spectrum at all; any exterior circle works
            radius_kept.max(1.0)
        }
    };

    let dedup_with_mult = |values: &[Complex64]| -> Vec<SpectralPoint> {
        let mut out: Vec<SpectralPoint> = Vec::new();
        for &v in values {
            if !out.iter().any(|p| (p.value - v).norm() <= tol::MEMBERSHIP) {
                out.push(SpectralPoint { value: v, multiplicity: mult_of(v) });
            }
        }
        out
    };

    let mut sigma_points = vec![SpectralPoint {
        value: Complex64::new(0.0, 0.0),
        multiplicity: zero_mult,
    }];
    sigma_points.extend(dedup_with_mult(kept));
    let sigma = SpectralSet::new(sigma_points, true, gap);

    let mut prime_points = dedup_with_mult(dropped);
    prime_points.extend(dedup_with_mult(&residual_points));
    let sigma_prime = SpectralSet::new(prime_points, false, gap);

    Ok((sigma, sigma_prime))
}

/// The sigma that collects 0 and the whole declared Riesz part (the n = 0
/// partition, but defined even when the nonzero sequence is empty).
pub fn sigma_riesz(model: &OperatorModel) -> Result<SpectralSet> {
    let prepared = model.prepare()?;
    let sequence = model.riesz_sequence().unwrap_or_default();
    let spectrum = &prepared.spectrum;
    let zero_mult = spectrum.iter().filter(|e| e.norm() <= tol::MEMBERSHIP).count();
    let mut points = vec![SpectralPoint {
        value: Complex64::new(0.0, 0.0),
        multiplicity: zero_mult,
    }];
    for &v in &sequence {
        if !points.iter().any(|p| (p.value - v).norm() <= tol::MEMBERSHIP) {
            let mult = spectrum.iter().filter(|e| (*e - v).norm() <= tol::MEMBERSHIP).count();
            points.push(SpectralPoint { value: v, multiplicity: mult });
        }
    }
    let radius = points.iter().map(|p| p.value.norm()).fold(0.0, f64::max);
    let complement_min = spectrum
        .iter()
        .filter(|e| {
            e.norm() > tol::MEMBERSHIP
                && !sequence.iter().any(|&s| (*e - s).norm() <= tol::MEMBERSHIP)
        })
        .map(|e| e.norm())
        .fold(f64::INFINITY, f64::min);
    let gap = if complement_min.is_finite() {
        if complement_min - radius <= 0.0 {
            return Err(Error::NoSeparation { index: 0, modulus: complement_min });
        }
        (complement_min - radius) / 2.0
    } else {
        radius.max(1.0)
    };
    Ok(SpectralSet::new(points, true, gap))
}

#[derive(Debug, Clone)]
pub struct BrowderDiagnostic {
    pub isolated_at_zero: bool,
    /// omega(A): the closed disc intersected with the Riesz points and 0.
    pub witness: SpectralSet,
}

/// Checks 0 not in acc sigma_b(A) against the declared structure: true iff no
/// invertible-part eigenvalue lies in the punctured disc of the given radius.
///
/// For dense models with no declared split, every nonzero eigenvalue counts
/// as invertible-part spectrum.
pub fn acc_browder_diagnostic(
    model: &OperatorModel,
    disc_radius: f64,
) -> Result<BrowderDiagnostic> {
    assert!(disc_radius > 0.0, "disc radius must be positive");
    let prepared = model.prepare()?;
    let riesz: Vec<Complex64> = model.riesz_sequence().unwrap_or_default();
    let declared_invertible = model.declared_invertible();

    // invertible-side surrogate for sigma_b: declared invertible points plus
    // dense-block eigenvalues that are neither 0 nor declared Riesz points
    let mut invertible_side = declared_invertible;
    for &e in &prepared.spectrum {
        if e.norm() <= tol::EPS_SPEC {
            continue;
        }
        let declared = riesz.iter().any(|&s| (e - s).norm() <= tol::MEMBERSHIP)
            || invertible_side.iter().any(|&s| (e - s).norm() <= tol::MEMBERSHIP);
        if !declared {
            invertible_side.push(e);
        }
    }

    let offender = invertible_side.iter().find(|e| e.norm() < disc_radius && e.norm() > 0.0);

    let zero_mult = prepared.spectrum.iter().filter(|e| e.norm() <= tol::MEMBERSHIP).count();
    let mut witness_points = vec![SpectralPoint {
        value: Complex64::new(0.0, 0.0),
        multiplicity: zero_mult,
    }];
    for &v in &riesz {
        if v.norm() <= disc_radius
            && !witness_points.iter().any(|p| (p.value - v).norm() <= tol::MEMBERSHIP)
        {
            let mult = prepared
                .spectrum
                .iter()
                .filter(|e| (*e - v).norm() <= tol::MEMBERSHIP)
                .count();
            witness_points.push(SpectralPoint { value: v, multiplicity: mult });
        }
    }
    let witness = SpectralSet::new(witness_points, true, disc_radius / 2.0);

    Ok(BrowderDiagnostic { isolated_at_zero: offender.is_none(), witness })
}
