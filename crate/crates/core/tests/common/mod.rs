//! Seeded fixture generators shared by the integration suites.
//!
//! Randomized models keep their Riesz moduli strictly below 1/2 with a
//! bounded decrease ratio, so every sigma_n partition has a usable annulus
//! and power iterations converge quickly. Set DRAZINKIT_SEED to reproduce a
//! particular run.
#![allow(dead_code)] // each test binary uses its own subset

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

use drazinkit_core::linalg::CMat;
use drazinkit_core::opmodel::OperatorModel;

pub const DEFAULT_SEED: u64 = 0x2026_0810;

/// One deterministic stream per label, all derived from DRAZINKIT_SEED.
pub fn rng_for(label: &str) -> ChaCha8Rng {
    let seed = std::env::var("DRAZINKIT_SEED")
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .unwrap_or(DEFAULT_SEED);
    let mut mixed = seed ^ 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        mixed = mixed.wrapping_mul(0x1000_0000_01b3).wrapping_add(b as u64);
    }
    ChaCha8Rng::seed_from_u64(mixed)
}

fn polar(rng: &mut ChaCha8Rng, modulus: f64) -> Complex64 {
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(modulus, angle)
}

fn polar_decaying(rng: &mut ChaCha8Rng, modulus: f64) -> Complex64 {
    // arguments in (2pi/3, 4pi/3) keep Re <= -modulus/2
    let angle = rng.gen_range(2.0 * std::f64::consts::FRAC_PI_3..4.0 * std::f64::consts::FRAC_PI_3);
    Complex64::from_polar(modulus, angle)
}

fn polar_left_half(rng: &mut ChaCha8Rng, modulus: f64) -> Complex64 {
    // arguments in [pi/2, 3pi/2] keep Re <= 0
    let angle = rng.gen_range(std::f64::consts::FRAC_PI_2..3.0 * std::f64::consts::FRAC_PI_2);
    Complex64::from_polar(modulus, angle)
}

/// Riesz moduli descending from (0.2, 0.45) with ratio in (1.2, 1.9);
/// invertible moduli in (1.05, inv_max), pairwise separated.
pub fn random_diagonal(
    rng: &mut ChaCha8Rng,
    riesz_count: usize,
    invertible_count: usize,
    decaying: bool,
    inv_max: f64,
) -> OperatorModel {
    let mut riesz = Vec::with_capacity(riesz_count);
    let mut modulus = rng.gen_range(0.2..0.45);
    for _ in 0..riesz_count {
        riesz.push(polar(rng, modulus));
        modulus /= rng.gen_range(1.2..1.9);
    }
    let mut invertible: Vec<Complex64> = Vec::with_capacity(invertible_count);
    while invertible.len() < invertible_count {
        let m = rng.gen_range(1.05..inv_max);
        let candidate = if decaying { polar_decaying(rng, m) } else { polar(rng, m) };
        if invertible.iter().all(|q| (q - candidate).norm() > 0.05) {
            invertible.push(candidate);
        }
    }
    let model = OperatorModel::diagonal(riesz, invertible);
    model.validate().expect("generated model must be valid");
    model
}

/// A model fit for the semigroup hypotheses: the Riesz part sits in the
/// closed left half-plane (so sigma(AP) has nonpositive real parts) and the
/// invertible part strictly decays.
pub fn random_semigroup_model(
    rng: &mut ChaCha8Rng,
    riesz_count: usize,
    invertible_count: usize,
) -> OperatorModel {
    let mut riesz = Vec::with_capacity(riesz_count);
    let mut modulus = rng.gen_range(0.2..0.45);
    for _ in 0..riesz_count {
        riesz.push(polar_left_half(rng, modulus));
        modulus /= rng.gen_range(1.2..1.9);
    }
    let mut invertible: Vec<Complex64> = Vec::with_capacity(invertible_count);
    while invertible.len() < invertible_count {
        let m = rng.gen_range(1.05..5.0);
        let candidate = polar_decaying(rng, m);
        if invertible.iter().all(|q| (q - candidate).norm() > 0.05) {
            invertible.push(candidate);
        }
    }
    let model = OperatorModel::diagonal(riesz, invertible);
    model.validate().expect("generated model must be valid");
    model
}

pub fn jordan_block(size: usize, eigenvalue: Complex64) -> CMat {
    let mut j = Array2::zeros((size, size));
    for i in 0..size {
        j[[i, i]] = eigenvalue;
        if i + 1 < size {
            j[[i, i + 1]] = Complex64::new(1.0, 0.0);
        }
    }
    j
}

/// Direct sum of a nilpotent Jordan block (the Riesz part realized at 0) and
/// a random diagonal model.
pub fn jordan_fixture(rng: &mut ChaCha8Rng, block_size: usize, inv_max: f64) -> OperatorModel {
    let riesz_count = rng.gen_range(1..4);
    let invertible_count = rng.gen_range(1..3);
    let diagonal = random_diagonal(rng, riesz_count, invertible_count, false, inv_max);
    OperatorModel::direct_sum(vec![
        OperatorModel::dense(jordan_block(block_size, Complex64::new(0.0, 0.0))),
        diagonal,
    ])
}
