//! Seeded random sampling of frames, operators and vectors.
//!
//! All randomness flows through [`ChaCha20Rng`]. A single 64-bit seed expands
//! into independent per-trial streams with [`trial_rng`], so a trial draws the
//! same numbers whether trials run serially or in parallel.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::{complex_polar_orthonormalize, polar_orthonormalize};

pub type SeededRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Counter-based stream: the key is derived from `seed`, the ChaCha stream id
/// is the trial index.
pub fn trial_rng(seed: u64, trial: u64) -> SeededRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(len, |_, _| gaussian(rng))
}

pub fn random_unit_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = gaussian_vector(len, rng);
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Haar-distributed `n × p` orthonormal frame.
pub fn random_frame<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> DMatrix<f64> {
    polar_orthonormalize(&gaussian_matrix(n, p, rng)).expect("Gaussian samples are finite")
}

pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    random_frame(n, n, rng)
}

pub fn random_complex_gaussian<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| Complex64::new(gaussian(rng), gaussian(rng)))
}

pub fn random_complex_frame<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> DMatrix<Complex64> {
    complex_polar_orthonormalize(&random_complex_gaussian(n, p, rng)).expect("Gaussian samples are finite")
}

pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    random_complex_frame(n, n, rng)
}

/// Random skew-symmetric `p × p` matrix.
pub fn random_skew<R: Rng + ?Sized>(p: usize, rng: &mut R) -> DMatrix<f64> {
    let g = gaussian_matrix(p, p, rng);
    (&g - g.transpose()) * 0.5
}
