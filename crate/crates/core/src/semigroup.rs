//! T(t) = e^{tA} evolution, the decay envelope |T(t)(I-P)| <= M e^{-mu t},
//! the improper-integral inverse formula, and the spectral projection Q.
//!
//! The identity under test: when T(t)(I-P) decays,
//!   (A - P)^{-1}(I - P) = - integral_0^inf T(t)(I - P) dt,
//! and there is a spectral projection Q with QP = PQ = Q such that
//! A^{D,sigma(AQ)}(I-P) equals the same operator.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::opmodel::{BlockView, OperatorModel, Prepared};
use crate::projector::{self, OrientedContour, SpectralProjection};
use crate::quad;
use crate::spectral::{SpectralPoint, SpectralSet};
use crate::tol;

/// Largest real part representable through exp without overflow.
const EXP_ARG_MAX: f64 = 700.0;

/// e^{tA}: exact eigen-exponentials on diagonal blocks, Pade scaling and
/// squaring on dense blocks. Negative t is permitted (group mode).
pub fn evolve(model: &OperatorModel, t: f64) -> Result<CMat> {
    evolve_prepared(&model.prepare()?, t)
}

pub(crate) fn evolve_prepared(prepared: &Prepared, t: f64) -> Result<CMat> {
    let n = prepared.dim();
    let mut out = CMat::zeros((n, n));
    for (offset, view) in prepared.blocks() {
        match view {
            BlockView::Diag(entries) => {
                for (i, &d) in entries.iter().enumerate() {
                    let exponent = d * t;
                    if exponent.re > EXP_ARG_MAX {
                        return Err(Error::HorizonTooLarge { scale: exponent.re });
                    }
                    out[[offset + i, offset + i]] = exponent.exp();
                }
            }
            BlockView::Dense(matrix) => {
                let scaled: CMat = matrix * Complex64::new(t, 0.0);
                let block = linalg::expm(&scaled)?;
                let d = block.nrows();
                out.slice_mut(ndarray::s![offset..offset + d, offset..offset + d])
                    .assign(&block);
            }
        }
    }
    Ok(out)
}

/// e^{-tP} = I - P + e^{-t} P, exactly as written (term by term, so the
/// result is bit-identical to the formula). Requires a certified projection:
/// the identity is an identity only when P^2 = P.
pub fn exp_projection(p: &SpectralProjection, t: f64) -> Result<CMat> {
    if !p.is_certified() {
        return Err(Error::Uncertified { idem: p.idem_residual, commute: p.commute_residual });
    }
    let n = p.matrix.nrows();
    let decay = Complex64::new((-t).exp(), 0.0);
    Ok((linalg::identity(n) - &p.matrix) + &(&p.matrix * decay))
}

#[derive(Debug, Clone)]
pub struct DecayFit {
    pub time_grid: Vec<f64>,
    pub norms: Vec<f64>,
    pub fit_m: f64,
    pub fit_mu: f64,
}

impl DecayFit {
    /// norms[k] <= fit_m e^{-fit_mu t_k}, up to fp slack.
    pub fn envelope_holds(&self) -> bool {
        self.time_grid
            .iter()
            .zip(self.norms.iter())
            .all(|(&t, &norm)| norm <= self.fit_m * (-self.fit_mu * t).exp() * (1.0 + 1e-9))
    }
}

/// Spectrum of A restricted to R(I - P).
pub fn spectrum_on_complement(model: &OperatorModel, p: &CMat) -> Result<Vec<Complex64>> {
    complement_spectrum(&model.prepare()?, p)
}

/// Finite surrogate of the sigma(AP) hypothesis: every eigenvalue of AP must
/// have modulus below 1/2 and nonpositive real part. Returns the offenders;
/// empty means the hypothesis holds at truncation scale.
pub fn ap_hypothesis_offenders(model: &OperatorModel, p: &CMat) -> Result<Vec<Complex64>> {
    let prepared = model.prepare()?;
    let ap = prepared.matrix.dot(p);
    let spectrum = linalg::eigenvalues(&ap)?;
    Ok(spectrum
        .into_iter()
        .filter(|e| e.norm() >= 0.5 || e.re > 1e-12)
        .collect())
}

/// Spectrum of A restricted to R(I - P): coordinate submatrix when P is an
/// exact 0/1 diagonal, otherwise (I-P)A(I-P) + cP with the rank-P cluster at
/// c filtered out.
pub(crate) fn complement_spectrum(prepared: &Prepared, p: &CMat) -> Result<Vec<Complex64>> {
    let n = prepared.dim();
    let a = &prepared.matrix;
    if let Some(free) = exact_coordinate_complement(p) {
        if free.is_empty() {
            return Ok(Vec::new());
        }
        let mut sub = CMat::zeros((free.len(), free.len()));
        for (i, &fi) in free.iter().enumerate() {
            for (j, &fj) in free.iter().enumerate() {
                sub[[i, j]] = a[[fi, fj]];
            }
        }
        return linalg::eigenvalues(&sub);
    }

    let rank: f64 = (0..n).map(|i| p[[i, i]].re).sum();
    let rank = rank.round() as usize;
    if rank >= n {
        return Ok(Vec::new());
    }
    let shift = Complex64::new(2.0 * linalg::op_norm(a) + 1.0, 0.0);
    let q: CMat = linalg::identity(n) - p;
    let deflated: CMat = q.dot(a).dot(&q) + &(p * shift);
    let mut eigenvalues = linalg::eigenvalues(&deflated)?;
    eigenvalues.sort_by(|x, y| (y - shift).norm().total_cmp(&(x - shift).norm()));
    eigenvalues.truncate(n - rank);
    Ok(eigenvalues)
}

/// Some(free coordinates) iff P is exactly a 0/1 diagonal matrix.
fn exact_coordinate_complement(p: &CMat) -> Option<Vec<usize>> {
    let n = p.nrows();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut free = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = p[[i, j]];
            if i == j {
                if v == zero {
                    free.push(i);
                } else if v != one {
                    return None;
                }
            } else if v != zero {
                return None;
            }
        }
    }
    Some(free)
}

/// Fits the envelope |T(t)(I-P)| <= M e^{-mu t}: mu is the spectral gap on
/// R(I-P) minus a fixed slack, M the smallest constant that dominates the
/// sampled norms.
pub fn decay_fit(model: &OperatorModel, p: &SpectralProjection, grid: &[f64]) -> Result<DecayFit> {
    let prepared = model.prepare()?;
    decay_fit_prepared(&prepared, p, grid)
}

pub(crate) fn decay_fit_prepared(
    prepared: &Prepared,
    p: &SpectralProjection,
    grid: &[f64],
) -> Result<DecayFit> {
    let complement = complement_spectrum(prepared, &p.matrix)?;
    let n = prepared.dim();
    let complement_matrix: CMat = linalg::identity(n) - &p.matrix;

    if complement.is_empty() {
        // P = I: the complement subspace is zero and every norm vanishes
        let norms = vec![0.0; grid.len()];
        return Ok(DecayFit { time_grid: grid.to_vec(), norms, fit_m: 0.0, fit_mu: 1.0 });
    }

    let abscissa = complement.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    if abscissa >= 0.0 {
        return Err(Error::NoDecay { abscissa });
    }
    let fit_mu = -abscissa - tol::MU_SLACK;
    if fit_mu <= 0.0 {
        return Err(Error::NoDecay { abscissa });
    }

    let mut norms = Vec::with_capacity(grid.len());
    for &t in grid {
        let flow = evolve_prepared(prepared, t)?;
        norms.push(linalg::op_norm(&flow.dot(&complement_matrix)));
    }
    let fit_m = norms
        .iter()
        .zip(grid.iter())
        .map(|(&norm, &t)| norm * (fit_mu * t).exp())
        .fold(0.0, f64::max);
    Ok(DecayFit { time_grid: grid.to_vec(), norms, fit_m, fit_mu })
}

#[derive(Debug, Clone)]
pub struct ImproperIntegral {
    /// J = -integral_0^{T*} T(t)(I-P) dt.
    pub matrix: CMat,
    /// T*: where the analytic tail bound drops below tol.
    pub tail_cutoff: f64,
    pub panels: usize,
}

/// -integral_0^{T*} T(t)(I-P) dt with T* = log(M/tol)/mu; the dropped tail is
/// bounded by tol/mu analytically, so |J - (A-P)^{-1}(I-P)| <= 10 tol for the
/// decay rates the fixtures carry.
pub fn improper_integral(
    model: &OperatorModel,
    p: &SpectralProjection,
    tolerance: f64,
) -> Result<ImproperIntegral> {
    let prepared = model.prepare()?;
    improper_integral_prepared(&prepared, p, tolerance)
}

pub(crate) fn improper_integral_prepared(
    prepared: &Prepared,
    p: &SpectralProjection,
    tolerance: f64,
) -> Result<ImproperIntegral> {
    assert!(tolerance > 0.0, "tolerance must be positive");
    let complement = complement_spectrum(prepared, &p.matrix)?;
    let n = prepared.dim();
    if complement.is_empty() {
        return Ok(ImproperIntegral { matrix: CMat::zeros((n, n)), tail_cutoff: 0.0, panels: 0 });
    }
    let abscissa = complement.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    if abscissa >= 0.0 {
        return Err(Error::NoDecay { abscissa });
    }
    let mu = -abscissa;
    let probe_grid: Vec<f64> = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|s| s / mu)
        .collect();
    let fit = decay_fit_prepared(prepared, p, &probe_grid)?;
    if fit.fit_m <= tolerance {
        return Ok(ImproperIntegral { matrix: CMat::zeros((n, n)), tail_cutoff: 0.0, panels: 0 });
    }
    let t_star = (fit.fit_m / tolerance).ln() / fit.fit_mu;
    let complement_matrix: CMat = linalg::identity(n) - &p.matrix;
    let integrand = |t: f64| -> Result<Array2<Complex64>> {
        Ok(evolve_prepared(prepared, t)?.dot(&complement_matrix))
    };
    let (integral, panels) = quad::integrate_panels(integrand, 0.0, t_star, tolerance / 10.0)?;
    Ok(ImproperIntegral { matrix: -integral, tail_cutoff: t_star, panels })
}

/// The full probe record: decay fit plus the integral estimate.
#[derive(Debug, Clone)]
pub struct SemigroupProbe {
    pub time_grid: Vec<f64>,
    pub norms: Vec<f64>,
    pub fit_m: f64,
    pub fit_mu: f64,
    pub integral_estimate: CMat,
    pub tail_cutoff: f64,
}

pub fn probe(
    model: &OperatorModel,
    p: &SpectralProjection,
    grid: &[f64],
    tolerance: f64,
) -> Result<SemigroupProbe> {
    let prepared = model.prepare()?;
    let fit = decay_fit_prepared(&prepared, p, grid)?;
    let integral = improper_integral_prepared(&prepared, p, tolerance)?;
    Ok(SemigroupProbe {
        time_grid: fit.time_grid,
        norms: fit.norms,
        fit_m: fit.fit_m,
        fit_mu: fit.fit_mu,
        integral_estimate: integral.matrix,
        tail_cutoff: integral.tail_cutoff,
    })
}

#[derive(Debug, Clone)]
pub struct QProjection {
    pub q: SpectralProjection,
    pub sigma_aq: SpectralSet,
    pub qp_residual: f64,
    pub pq_residual: f64,
    /// |A^{D,sigma(AQ)}(I-P) - (A-P)^{-1}(I-P)|.
    pub identity_residual: f64,
}

impl QProjection {
    pub fn passes(&self) -> bool {
        self.qp_residual <= tol::Q_COMMUTE
            && self.pq_residual <= tol::Q_COMMUTE
            && self.identity_residual <= tol::CROSS_METHOD
    }
}

/// Q = contour projection over the circle |lambda| = theta, which captures
/// sigma = D(0, theta) intersected with sigma(AP); certifies QP = PQ = Q and
/// the identity A^{D,sigma(AQ)}(I-P) = (A-P)^{-1}(I-P).
pub fn q_projection(
    model: &OperatorModel,
    p: &SpectralProjection,
    theta: f64,
) -> Result<QProjection> {
    assert!(theta > 0.0, "theta must be positive");
    let prepared = model.prepare()?;
    let complement = complement_spectrum(&prepared, &p.matrix)?;
    if let Some(&offender) = complement.iter().find(|e| e.norm() <= theta) {
        return Err(Error::ThetaTooLarge { theta, offender });
    }

    let contour = OrientedContour::circle(Complex64::new(0.0, 0.0), theta, 1);
    contour.validate_against(&prepared.spectrum)?;

    // sigma(AQ) = {0} union the nonzero spectrum of AP inside the disc
    let ap = prepared.matrix.dot(&p.matrix);
    let ap_spectrum = linalg::eigenvalues(&ap)?;
    let zero_mult = prepared.spectrum.iter().filter(|e| e.norm() <= tol::MEMBERSHIP).count();
    let mut points =
        vec![SpectralPoint { value: Complex64::new(0.0, 0.0), multiplicity: zero_mult }];
    for &e in &ap_spectrum {
        if e.norm() > tol::MEMBERSHIP
            && e.norm() < theta
            && !points.iter().any(|q| (q.value - e).norm() <= tol::MEMBERSHIP)
        {
            let mult = prepared
                .spectrum
                .iter()
                .filter(|a| (*a - e).norm() <= tol::MEMBERSHIP)
                .count();
            points.push(SpectralPoint { value: e, multiplicity: mult });
        }
    }
    let inside_radius = points.iter().map(|p| p.value.norm()).fold(0.0, f64::max);
    let outside_min = prepared
        .spectrum
        .iter()
        .map(|e| e.norm())
        .filter(|&m| m > theta)
        .fold(f64::INFINITY, f64::min);
    let gap = if outside_min.is_finite() {
        (outside_min - inside_radius) / 2.0
    } else {
        inside_radius.max(1.0)
    };
    let sigma_aq = SpectralSet::new(points, true, gap);

    let (q_matrix, nodes_used) = projector::quadrature_weighted(
        &prepared,
        &contour,
        |_| Complex64::new(1.0, 0.0),
        |m, _| linalg::op_norm(&(&m.dot(m) - m)) < tol::IDEM_TARGET,
    )?;
    let idem_residual = linalg::op_norm(&(&q_matrix.dot(&q_matrix) - &q_matrix));
    let commute_residual =
        linalg::op_norm(&(&prepared.matrix.dot(&q_matrix) - &q_matrix.dot(&prepared.matrix)));
    let q = SpectralProjection { matrix: q_matrix, idem_residual, commute_residual, nodes_used };

    let qp_residual = linalg::op_norm(&(&q.matrix.dot(&p.matrix) - &q.matrix));
    let pq_residual = linalg::op_norm(&(&p.matrix.dot(&q.matrix) - &q.matrix));

    let b = crate::drazin::drazin_inverse(model, &sigma_aq)?;
    let n = prepared.dim();
    let complement_matrix: CMat = linalg::identity(n) - &p.matrix;
    let shifted: CMat = &prepared.matrix - &p.matrix;
    let direct = linalg::lu_solve(&shifted, &complement_matrix)?;
    let identity_residual = linalg::op_norm(&(&b.dot(&complement_matrix) - &direct));

    Ok(QProjection { q, sigma_aq, qp_residual, pq_residual, identity_residual })
}
