//! Reference patterns fed to the thinning procedure.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pattern::{dft_pattern_samples, PatternError, PatternSamples};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReferenceError {
    #[error("element index {index} outside a {n}-element lattice")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("element index {0} listed twice")]
    Duplicate(usize),
    #[error("reference layout has no active elements")]
    NoActiveElements,
    #[error("sidelobe level must be below 0 dB, got {0}")]
    InvalidSll(f64),
    #[error("Chebyshev synthesis needs at least 4 elements, got {0}")]
    TooFewElements(usize),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReferenceKind {
    /// Isophoric thinned layout with the listed elements on.
    Layout { indices: Vec<usize> },
    /// Dolph-Chebyshev taper at the given sidelobe level.
    Chebyshev { sll_ref_db: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpec {
    pub kind: ReferenceKind,
    pub n: usize,
    pub spacing: f64,
}

impl ReferenceSpec {
    pub fn build(&self) -> Result<PatternSamples, ReferenceError> {
        match &self.kind {
            ReferenceKind::Layout { indices } => layout_reference(self.n, self.spacing, indices),
            ReferenceKind::Chebyshev { sll_ref_db } => chebyshev_reference(self.n, self.spacing, *sll_ref_db),
        }
    }
}

/// Pattern samples of an isophoric layout.
pub fn layout_reference(n: usize, spacing: f64, indices: &[usize]) -> Result<PatternSamples, ReferenceError> {
    if indices.is_empty() {
        return Err(ReferenceError::NoActiveElements);
    }
    let mut seen = BTreeSet::new();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    for &index in indices {
        if index >= n {
            return Err(ReferenceError::IndexOutOfRange { index, n });
        }
        if !seen.insert(index) {
            return Err(ReferenceError::Duplicate(index));
        }
        w[index] = Complex64::new(1.0, 0.0);
    }
    Ok(PatternSamples::from_excitations(&w, spacing)?)
}

/// Chebyshev polynomial `T_order(x)` on the whole real line.
fn chebyshev_poly(order: f64, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        (order * x.acos()).cos()
    } else if x > 1.0 {
        (order * x.acosh()).cosh()
    } else {
        let sign = if order as i64 % 2 == 0 { 1.0 } else { -1.0 };
        sign * (order * (-x).acosh()).cosh()
    }
}

/// Dolph-Chebyshev excitations, peak-normalised to 1.
///
/// Samples `T_{N−1}(x₀ cos(πk/N))` on the unit circle and transforms back to
/// element weights. `x₀ = cosh(acosh(R)/(N−1))` with voltage ripple ratio
/// `R = 10^(−SLL/20)`. The result is real, positive and symmetric about
/// the array centre.
pub fn chebyshev_excitations(n: usize, sll_ref_db: f64) -> Result<Vec<f64>, ReferenceError> {
    if sll_ref_db >= 0.0 || sll_ref_db.is_nan() {
        return Err(ReferenceError::InvalidSll(sll_ref_db));
    }
    if n < 4 {
        return Err(ReferenceError::TooFewElements(n));
    }
    let order = (n - 1) as f64;
    let ripple = 10f64.powf(-sll_ref_db / 20.0);
    let x0 = (ripple.acosh() / order).cosh();
    let nf = n as f64;
    let samples: Vec<Complex64> = (0..n)
        .map(|k| {
            let value = chebyshev_poly(order, x0 * (PI * k as f64 / nf).cos());
            if n % 2 == 1 {
                Complex64::new(value, 0.0)
            } else {
                // half-sample delay keeps the even-length taper symmetric
                Complex64::cis(PI * k as f64 / nf) * value
            }
        })
        .collect();
    let spectrum: Vec<f64> = dft_pattern_samples(&samples)?.iter().map(|z| z.re).collect();

    let weights: Vec<f64> = if n % 2 == 1 {
        let half = n.div_ceil(2);
        spectrum[1..half]
            .iter()
            .rev()
            .chain(&spectrum[..half])
            .copied()
            .collect()
    } else {
        let half = n / 2 + 1;
        spectrum[1..half]
            .iter()
            .rev()
            .chain(&spectrum[1..half])
            .copied()
            .collect()
    };
    let peak = weights.iter().copied().fold(0.0, f64::max);
    Ok(weights.into_iter().map(|w| w / peak).collect())
}

/// Pattern samples of an `n`-element Dolph-Chebyshev array.
pub fn chebyshev_reference(n: usize, spacing: f64, sll_ref_db: f64) -> Result<PatternSamples, ReferenceError> {
    let w: Vec<Complex64> = chebyshev_excitations(n, sll_ref_db)?
        .into_iter()
        .map(|w| Complex64::new(w, 0.0))
        .collect();
    Ok(PatternSamples::from_excitations(&w, spacing)?)
}
