//! Additive complex Gaussian noise on input-state amplitudes.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("signal has zero energy")]
    ZeroSignal,
    #[error("SNR must be finite, got {0}")]
    NonFiniteSnr(f64),
}

/// Target SNR in dB, or `None` for a noiseless run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self { snr_db: None, seed: 0 }
    }

    pub fn at_snr(snr_db: f64, seed: u64) -> Self {
        Self {
            snr_db: Some(snr_db),
            seed,
        }
    }
}

fn energy(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm_sqr()).sum()
}

/// Draws the noise realisation for `spec`, scaled so the energy ratio
/// against `signal` equals the target SNR.
///
/// Real and imaginary parts are independent zero-mean normals of equal
/// variance. The whole draw is rescaled afterwards, so the realised SNR is
/// exact for every seed.
pub fn noise_vector(signal: &[Complex64], snr_db: f64, seed: u64) -> Result<Vec<Complex64>, NoiseError> {
    if !snr_db.is_finite() {
        return Err(NoiseError::NonFiniteSnr(snr_db));
    }
    let signal_energy = energy(signal);
    if signal_energy == 0.0 {
        return Err(NoiseError::ZeroSignal);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Complex64> = signal
        .iter()
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let target = signal_energy / 10f64.powf(snr_db / 10.0);
    let scale = (target / energy(&raw)).sqrt();
    Ok(raw.into_iter().map(|v| v * scale).collect())
}

/// `Ã_m = Â_m + ν_m`. A noiseless spec returns the input unchanged.
pub fn add_noise(amplitudes: &[Complex64], spec: &NoiseSpec) -> Result<Vec<Complex64>, NoiseError> {
    match spec.snr_db {
        None => Ok(amplitudes.to_vec()),
        Some(snr_db) => {
            let noise = noise_vector(amplitudes, snr_db, spec.seed)?;
            Ok(amplitudes.iter().zip(noise).map(|(a, v)| a + v).collect())
        }
    }
}

/// `10·log10(Σ|signal|² / Σ|noise|²)`; `+∞` when the noise has no energy.
pub fn snr_of(signal: &[Complex64], noise: &[Complex64]) -> f64 {
    let noise_energy = energy(noise);
    if noise_energy == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (energy(signal) / noise_energy).log10()
}
