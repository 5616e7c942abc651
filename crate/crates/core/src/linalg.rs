//! Dense complex linear algebra kernels.
//!
//! Everything downstream works over `Array2<Complex64>`:
//!
//! - partial-pivot LU solve (exact-zero preserving, so block-diagonal and
//!   triangular inputs keep their structure bit-exactly)
//! - eigenvalues via Householder Hessenberg reduction + shifted QR iteration
//! - operator 2-norm via power iteration on A^H A
//! - matrix exponential via Pade-13 scaling and squaring
//! - pairwise tree summation for bit-stable quadrature accumulation

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn identity(n: usize) -> CMat {
    let mut m = CMat::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = ONE;
    }
    m
}

pub fn diag(entries: &[Complex64]) -> CMat {
    let n = entries.len();
    let mut m = CMat::zeros((n, n));
    for (i, &d) in entries.iter().enumerate() {
        m[[i, i]] = d;
    }
    m
}

pub fn conj_transpose(a: &CMat) -> CMat {
    a.t().map(|z| z.conj())
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Maximum column absolute sum.
pub fn norm_1(a: &CMat) -> f64 {
    let (rows, cols) = a.dim();
    (0..cols)
        .map(|j| (0..rows).map(|i| a[[i, j]].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Solves A X = RHS by LU with partial pivoting.
///
/// Eliminations with an exactly-zero multiplier are skipped, so exact zeros
/// in block-diagonal or triangular inputs are never polluted by rounding.
pub fn lu_solve(a: &CMat, rhs: &CMat) -> Result<CMat> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "lu_solve needs a square matrix");
    assert_eq!(rhs.nrows(), n, "rhs row count must match");
    let ncols = rhs.ncols();

    let mut lu = a.to_owned();
    let mut x = rhs.to_owned();

    for k in 0..n {
        let mut p = k;
        let mut pmax = lu[[k, k]].norm();
        for i in k + 1..n {
            let m = lu[[i, k]].norm();
            if m > pmax {
                pmax = m;
                p = i;
            }
        }
        if pmax < 1e-300 {
            return Err(Error::SingularSystem { pivot: pmax, step: k });
        }
        if p != k {
            for j in k..n {
                lu.swap([k, j], [p, j]);
            }
            for j in 0..ncols {
                x.swap([k, j], [p, j]);
            }
        }
        let piv = lu[[k, k]];
        for i in k + 1..n {
            let m = lu[[i, k]] / piv;
            if m == ZERO {
                continue;
            }
            for j in k + 1..n {
                let delta = m * lu[[k, j]];
                lu[[i, j]] -= delta;
            }
            for j in 0..ncols {
                let delta = m * x[[k, j]];
                x[[i, j]] -= delta;
            }
        }
    }

    for k in (0..n).rev() {
        let piv = lu[[k, k]];
        for j in 0..ncols {
            let mut acc = x[[k, j]];
            for i in k + 1..n {
                acc -= lu[[k, i]] * x[[i, j]];
            }
            x[[k, j]] = acc / piv;
        }
    }
    Ok(x)
}

/// Operator 2-norm (largest singular value) by power iteration on A^H A.
///
/// Deterministic start vector; stops when the Rayleigh residual drops below
/// `tol::POWER_TOL` relative, capped at `tol::POWER_CAP` iterations.
pub fn op_norm(a: &CMat) -> f64 {
    let (rows, cols) = a.dim();
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let fro = frobenius(a);
    if fro == 0.0 {
        return 0.0;
    }
    let ah = conj_transpose(a);

    let start = |phase: f64| -> CVec {
        Array1::from_iter((0..cols).map(|k| {
            let k = k as f64;
            Complex64::new(1.0 + 0.37 * ((k + phase) % 7.0), 0.61 - 0.11 * ((k + phase) % 5.0))
        }))
    };

    for attempt in 0..2 {
        let mut v = start(attempt as f64 * 1.3);
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.mapv_inplace(|z| z / vnorm);
        let mut rho = 0.0f64;
        for _ in 0..tol::POWER_CAP {
            let w = ah.dot(&a.dot(&v));
            rho = v
                .iter()
                .zip(w.iter())
                .map(|(vi, wi)| (vi.conj() * wi).re)
                .sum::<f64>();
            let residual = v
                .iter()
                .zip(w.iter())
                .map(|(vi, wi)| (wi - vi * Complex64::new(rho, 0.0)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if residual <= tol::POWER_TOL * rho.abs().max(f64::MIN_POSITIVE) {
                return rho.max(0.0).sqrt();
            }
            let wnorm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if wnorm < 1e-280 * fro {
                break; // start vector landed in the null space; retry once
            }
            v = w.mapv(|z| z / wnorm);
        }
        if rho > 0.0 {
            return rho.sqrt();
        }
    }
    0.0
}

/// Pairwise tree reduction of equally-shaped matrices; summation order is a
/// pure function of the term count.
pub fn pairwise_sum(terms: &[CMat]) -> CMat {
    assert!(!terms.is_empty(), "pairwise_sum needs at least one term");
    if terms.len() == 1 {
        return terms[0].clone();
    }
    let mid = terms.len() / 2;
    pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
}

/// Hausdorff distance between two finite point sets; infinity if exactly one
/// side is empty.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => {
            let one_sided = |xs: &[Complex64], ys: &[Complex64]| {
                xs.iter()
                    .map(|x| ys.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max)
            };
            one_sided(a, b).max(one_sided(b, a))
        }
    }
}

// ---------------------------------------------------------------------------
// Eigenvalues: Hessenberg reduction + shifted QR iteration
// ---------------------------------------------------------------------------

/// All eigenvalues of a dense complex matrix, with algebraic multiplicity.
///
/// Columns already in Hessenberg form are skipped by the reduction and
/// exactly-zero subdiagonals deflate immediately, so triangular and
/// block-triangular inputs return their diagonal entries bit-exactly.
pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "eigenvalues needs a square matrix");
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a[[0, 0]]]);
    }

    let mut h = a.to_owned();
    hessenberg_in_place(&mut h);

    let eps = f64::EPSILON;
    let hnorm = frobenius(&h).max(f64::MIN_POSITIVE);
    let cap = tol::QR_SWEEPS_PER_EIGENVALUE * n;

    let mut eigs = Vec::with_capacity(n);
    let mut hi = n;
    let mut total_sweeps = 0usize;
    let mut stagnant = 0usize;

    while hi > 0 {
        for i in 1..hi {
            let scale = h[[i - 1, i - 1]].norm() + h[[i, i]].norm();
            let threshold = if scale == 0.0 { eps * hnorm } else { eps * scale };
            if h[[i, i - 1]].norm() <= threshold {
                h[[i, i - 1]] = ZERO;
            }
        }

        if hi == 1 || h[[hi - 1, hi - 2]] == ZERO {
            eigs.push(h[[hi - 1, hi - 1]]);
            hi -= 1;
            stagnant = 0;
            continue;
        }

        let mut lo = hi - 1;
        while lo > 0 && h[[lo, lo - 1]] != ZERO {
            lo -= 1;
        }

        total_sweeps += 1;
        stagnant += 1;
        if total_sweeps > cap {
            return Err(Error::NumericFailure { iterations: total_sweeps });
        }

        let shift = if stagnant.is_multiple_of(12) {
            // exceptional shift to break rare cycling
            let mut s = h[[hi - 1, hi - 2]].norm();
            if hi >= 3 {
                s += h[[hi - 2, hi - 3]].norm();
            }
            Complex64::new(s, 0.0) + h[[hi - 1, hi - 1]]
        } else {
            wilkinson_shift(
                h[[hi - 2, hi - 2]],
                h[[hi - 2, hi - 1]],
                h[[hi - 1, hi - 2]],
                h[[hi - 1, hi - 1]],
            )
        };
        qr_step(&mut h, lo, hi, shift);
    }

    Ok(eigs)
}

fn hessenberg_in_place(h: &mut CMat) {
    let n = h.nrows();
    for k in 0..n.saturating_sub(2) {
        let below: f64 = (k + 2..n).map(|i| h[[i, k]].norm_sqr()).sum();
        if below == 0.0 {
            continue; // column already reduced; keep its exact zeros
        }
        let x0 = h[[k + 1, k]];
        let xnorm = (x0.norm_sqr() + below).sqrt();
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;

        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[[i, k]]).collect();
        v[0] -= alpha;
        let vnorm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sqr == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sqr;

        // left: rows k+1..n, all columns k..n
        for j in k..n {
            let mut w = ZERO;
            for (idx, vi) in v.iter().enumerate() {
                w += vi.conj() * h[[k + 1 + idx, j]];
            }
            w *= beta;
            for (idx, vi) in v.iter().enumerate() {
                let delta = w * vi;
                h[[k + 1 + idx, j]] -= delta;
            }
        }
        // right: columns k+1..n, all rows
        for r in 0..n {
            let mut w = ZERO;
            for (idx, vi) in v.iter().enumerate() {
                w += h[[r, k + 1 + idx]] * vi;
            }
            w *= beta;
            for (idx, vi) in v.iter().enumerate() {
                let delta = w * vi.conj();
                h[[r, k + 1 + idx]] -= delta;
            }
        }
    }
}

/// Eigenvalue of [[a, b], [c, d]] closest to d.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let trace = a + d;
    let det = a * d - b * c;
    let disc = (trace * trace - 4.0 * det).sqrt();
    let r1 = if (trace + disc).norm() >= (trace - disc).norm() {
        (trace + disc) * 0.5
    } else {
        (trace - disc) * 0.5
    };
    if r1 == ZERO {
        return d; // both roots are 0
    }
    let r2 = det / r1;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Complex Givens pair (c real, s) with [[c, s], [-conj(s), c]] (a, b)^T = (r, 0)^T.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b == ZERO {
        return (1.0, ZERO);
    }
    if a == ZERO {
        return (0.0, b.conj() / b.norm());
    }
    let denom = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let c = a.norm() / denom;
    let s = (a / a.norm()) * b.conj() / denom;
    (c, s)
}

/// One explicit single-shift QR sweep on the active block rows/cols [lo, hi).
fn qr_step(h: &mut CMat, lo: usize, hi: usize, shift: Complex64) {
    let n = h.nrows();
    for i in lo..hi {
        h[[i, i]] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo - 1);
    for i in lo..hi - 1 {
        let (c, s) = givens(h[[i, i]], h[[i + 1, i]]);
        rotations.push((c, s));
        for j in i..n {
            let t1 = h[[i, j]];
            let t2 = h[[i + 1, j]];
            h[[i, j]] = c * t1 + s * t2;
            h[[i + 1, j]] = -s.conj() * t1 + c * t2;
        }
        h[[i + 1, i]] = ZERO;
    }
    for (idx, &(c, s)) in rotations.iter().enumerate() {
        let i = lo + idx;
        for r in 0..(i + 2).min(n) {
            let t1 = h[[r, i]];
            let t2 = h[[r, i + 1]];
            h[[r, i]] = c * t1 + s.conj() * t2;
            h[[r, i + 1]] = -s * t1 + c * t2;
        }
    }
    for i in lo..hi {
        h[[i, i]] += shift;
    }
}

// ---------------------------------------------------------------------------
// Matrix exponential: Pade-13 scaling and squaring
// ---------------------------------------------------------------------------

const EXPM_THETA_13: f64 = 5.371920351148152;
const EXPM_MAX_SQUARINGS: i32 = 60;
const EXPM_PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// exp(A) by [13/13] Pade approximation with 1-norm scaling and repeated
/// squaring; backward error is at the unit-roundoff level inside the theta
/// bound.
pub fn expm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "expm needs a square matrix");
    let norm = norm_1(a);
    if !norm.is_finite() {
        return Err(Error::HorizonTooLarge { scale: norm });
    }
    let mut squarings: i32 = 0;
    if norm > EXPM_THETA_13 {
        squarings = (norm / EXPM_THETA_13).log2().ceil() as i32;
        if squarings > EXPM_MAX_SQUARINGS {
            return Err(Error::HorizonTooLarge { scale: norm });
        }
    }
    let scale = Complex64::new(2.0f64.powi(-squarings), 0.0);
    let a1: CMat = a * scale;
    let a2 = a1.dot(&a1);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let b: Vec<Complex64> = EXPM_PADE_13.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let eye = identity(n);

    let w1: CMat = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let w2: CMat = a6.dot(&w1) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &eye * b[1];
    let u = a1.dot(&w2);
    let z1: CMat = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v: CMat = a6.dot(&z1) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &eye * b[0];

    let mut f = lu_solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        f = f.dot(&f);
    }
    Ok(f)
}
