//! Array thinning from inverse-QFT probabilities.
//!
//! Pattern samples are cyclically shifted, loaded as a quantum state and
//! passed through the inverse QFT. The output probabilities are ranked, and
//! the first `K` ranked elements are kept for the smallest `K` whose pattern
//! meets the matching threshold `Ψ ≤ η`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{FeatureKind, FeatureSpec, MetricsBundle, MetricsError};
use crate::noise::{add_noise, NoiseError, NoiseSpec};
use crate::pattern::{cyclic_shift, ArrayLayout, ExcitationMode, PatternError, PatternSamples};
use crate::qsim::{build_iqft, probabilities, run_circuit, sample_measurements, QsimError, Statevector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThinningError {
    #[error("no thinned layout with K <= {n} reaches psi <= {eta}; relax the threshold eta or increase N")]
    NoFeasibleThinning { n: usize, eta: f64 },
    #[error("matching threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),
    #[error("length mismatch: {probabilities} probabilities for {elements} elements")]
    LengthMismatch { probabilities: usize, elements: usize },
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Cyclically shifted, unit-normalised pattern samples as an `L`-qubit state.
pub fn prepare_input_state(reference: &PatternSamples) -> Result<Statevector, ThinningError> {
    prepare_noisy_input_state(reference, &NoiseSpec::noiseless())
}

/// As [`prepare_input_state`], with noise added to the normalised amplitudes
/// before the state is renormalised.
pub fn prepare_noisy_input_state(reference: &PatternSamples, noise: &NoiseSpec) -> Result<Statevector, ThinningError> {
    let n = reference.len();
    if !n.is_power_of_two() {
        return Err(QsimError::NotPowerOfTwo(n).into());
    }
    let shifted = cyclic_shift(reference.samples())?;
    let clean = Statevector::new(shifted)?;
    if noise.snr_db.is_none() {
        return Ok(clean);
    }
    let noisy = add_noise(clean.amplitudes(), noise)?;
    Ok(Statevector::new(noisy)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Readout {
    /// Exact Born-rule probabilities.
    Exact,
    /// Empirical frequencies from `shots` simulated measurements.
    Shots { shots: u64, seed: u64 },
}

pub fn read_probabilities(state: &Statevector, readout: Readout) -> Result<Vec<f64>, ThinningError> {
    match readout {
        Readout::Exact => Ok(probabilities(state)),
        Readout::Shots { shots, seed } => {
            let counts = sample_measurements(state, shots, seed)?;
            Ok(counts.iter().map(|&c| c as f64 / shots as f64).collect())
        }
    }
}

/// Runs the inverse QFT on `state` and reads out the output probabilities.
pub fn iqft_probabilities(state: Statevector, readout: Readout) -> Result<Vec<f64>, ThinningError> {
    let circuit = build_iqft(state.num_qubits())?;
    let output = run_circuit(state, &circuit)?;
    read_probabilities(&output, readout)
}

/// Input preparation, inverse QFT and readout in one call.
pub fn quantum_probabilities(
    reference: &PatternSamples,
    noise: &NoiseSpec,
    readout: Readout,
) -> Result<Vec<f64>, ThinningError> {
    iqft_probabilities(prepare_noisy_input_state(reference, noise)?, readout)
}

/// Elements sorted by decreasing probability; ties go to the smaller index.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    order: Vec<usize>,
    sorted: Vec<f64>,
}

impl Ranking {
    /// `order[t]` is the element at rank `t`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Switches on the elements ranked `0..k` and nothing else.
    pub fn mask(&self, k: usize) -> Vec<bool> {
        let mut b = vec![false; self.order.len()];
        for &n in &self.order[..k.min(self.order.len())] {
            b[n] = true;
        }
        b
    }
}

pub fn rank_probabilities(p: &[f64]) -> Ranking {
    let mut order: Vec<usize> = (0..p.len()).collect();
    // stable, so equal values keep increasing index order
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
    let sorted = order.iter().map(|&n| p[n]).collect();
    Ranking { order, sorted }
}

/// Excitation of each element: 0 when off, otherwise 1 (isophoric) or
/// `√p_n` (amplitude).
pub fn excitations_from(p: &[f64], thinning: &[bool], mode: ExcitationMode) -> Result<Vec<f64>, ThinningError> {
    if p.len() != thinning.len() {
        return Err(ThinningError::LengthMismatch {
            probabilities: p.len(),
            elements: thinning.len(),
        });
    }
    Ok(p.iter()
        .zip(thinning)
        .map(|(&pn, &on)| match (on, mode) {
            (false, _) => 0.0,
            (true, ExcitationMode::Isophoric) => 1.0,
            (true, ExcitationMode::Amplitude) => pn.max(0.0).sqrt(),
        })
        .collect())
}

/// Outcome of [`synthesize`].
#[derive(Debug, Clone, PartialEq)]
pub struct ThinningResult {
    pub layout: ArrayLayout,
    pub probabilities: Vec<f64>,
    pub ranking: Ranking,
    pub psi: f64,
    pub threshold: f64,
}

impl ThinningResult {
    /// Number of active elements `K`.
    pub fn active_count(&self) -> usize {
        self.layout.active_count()
    }

    pub fn metrics(&self, feature: &FeatureSpec) -> Result<MetricsBundle, MetricsError> {
        MetricsBundle::evaluate(&self.layout, feature.grid(), self.psi, feature.mask_db())
    }

    pub fn report(&self, metrics: &MetricsBundle) -> ThinningReport {
        let n = self.layout.n_elements();
        let k = self.active_count();
        ThinningReport {
            n,
            d: self.layout.spacing(),
            k,
            tau: (n - k) as f64 / n as f64,
            eta: self.threshold,
            psi: self.psi,
            mode: self.layout.mode(),
            b: self.layout.thinning().iter().map(|&b| u8::from(b)).collect(),
            w: self.layout.excitations().to_vec(),
            p: self.probabilities.clone(),
            sll_db: metrics.sll_db,
            mean_sll_db: metrics.mean_sll_db,
            violations: metrics.violations,
            tau_percent: metrics.tau_percent,
        }
    }
}

/// JSON form of a thinning result together with its metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinningReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub d: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub tau: f64,
    pub eta: f64,
    pub psi: f64,
    pub mode: ExcitationMode,
    #[serde(rename = "B")]
    pub b: Vec<u8>,
    pub w: Vec<f64>,
    pub p: Vec<f64>,
    pub sll_db: Option<f64>,
    pub mean_sll_db: Option<f64>,
    pub violations: Option<usize>,
    pub tau_percent: f64,
}

/// Keeps the fewest top-ranked elements whose pattern satisfies `Ψ ≤ η`.
///
/// `K` is scanned upward from 1. A `K` whose cost cannot be evaluated, for
/// example an SLL feature on a pattern without a distinct main lobe, counts
/// as failing. The pattern on the feature grid is accumulated one element at
/// a time.
pub fn synthesize(
    p: &[f64],
    reference: &PatternSamples,
    feature: &FeatureSpec,
    eta: f64,
    mode: ExcitationMode,
) -> Result<ThinningResult, ThinningError> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(ThinningError::InvalidThreshold(eta));
    }
    let n = reference.len();
    if p.len() != n {
        return Err(ThinningError::LengthMismatch {
            probabilities: p.len(),
            elements: n,
        });
    }
    if let FeatureKind::PatternMatch(feature_ref) = feature.kind() {
        if feature_ref.len() != n {
            return Err(MetricsError::SizeMismatch {
                reference: feature_ref.len(),
                layout: n,
            }
            .into());
        }
    }

    let ranking = rank_probabilities(p);
    let weights = excitations_from(p, &vec![true; n], mode)?;
    let spacing = reference.spacing();
    let grid = feature.grid().points();
    let mut field = vec![Complex64::new(0.0, 0.0); grid.len()];

    for k in 1..=n {
        let element = ranking.order[k - 1];
        let w = weights[element];
        if w != 0.0 {
            let phase_step = 2.0 * PI * spacing * element as f64;
            for (f, &u) in field.iter_mut().zip(grid) {
                *f += Complex64::cis(phase_step * u) * w;
            }
        }
        match feature.cost_of_field(&field) {
            Ok(psi) if psi <= eta => {
                let thinning = ranking.mask(k);
                let excitations = excitations_from(p, &thinning, mode)?;
                let layout = ArrayLayout::new(spacing, thinning, excitations, mode)?;
                return Ok(ThinningResult {
                    layout,
                    probabilities: p.to_vec(),
                    ranking,
                    psi,
                    threshold: eta,
                });
            }
            _ => continue,
        }
    }
    Err(ThinningError::NoFeasibleThinning { n, eta })
}
