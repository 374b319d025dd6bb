//! Dense statevector simulator restricted to the gates needed by (inverse)
//! quantum Fourier transform circuits.
//!
//! Basis ordering: basis index `n` carries qubit 0 as its least-significant
//! bit. The ket |s_L … s_2 s_1⟩ therefore maps to `n = Σ s_ℓ · 2^(ℓ−1)`, so
//! qubit `ℓ − 1` holds `s_ℓ`. Every routine in this crate uses that
//! convention.
//!
//! The simulator is ideal: gates are exact unitaries and there is no
//! decoherence model.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Largest register accepted by [`build_iqft`]. A dense state of 2^24
/// amplitudes is 256 MiB.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QsimError {
    #[error("amplitude vector has zero norm")]
    ZeroNorm,
    #[error("amplitude count {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),
    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    IndexOutOfRange { index: usize, num_qubits: usize },
    #[error("gate addresses qubit {0} more than once")]
    RepeatedQubit(usize),
    #[error("circuit acts on {circuit} qubits but the state has {state}")]
    QubitCountMismatch { circuit: usize, state: usize },
    #[error("unsupported register size {0}, expected 1..={MAX_QUBITS}")]
    UnsupportedQubitCount(usize),
    #[error("shot count must be at least 1")]
    NoShots,
}

/// Unit-norm vector of 2^L complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    amplitudes: Vec<Complex64>,
    num_qubits: usize,
}

impl Statevector {
    /// Normalises `amplitudes` by their Euclidean norm.
    pub fn new(mut amplitudes: Vec<Complex64>) -> Result<Self, QsimError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QsimError::NotPowerOfTwo(len));
        }
        let norm = euclidean_norm(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(QsimError::ZeroNorm);
        }
        let inv = 1.0 / norm;
        amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(Self {
            amplitudes,
            num_qubits: len.trailing_zeros() as usize,
        })
    }

    /// Computational basis state |index⟩.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, QsimError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(QsimError::UnsupportedQubitCount(num_qubits));
        }
        let len = 1usize << num_qubits;
        if index >= len {
            return Err(QsimError::IndexOutOfRange { index, num_qubits });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes, num_qubits })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        euclidean_norm(&self.amplitudes)
    }

    /// Applies a single gate, consuming and returning the state.
    pub fn apply_gate(mut self, gate: &Gate) -> Result<Self, QsimError> {
        gate.validate(self.num_qubits)?;
        apply_in_place(&mut self.amplitudes, gate);
        Ok(self)
    }
}

fn euclidean_norm(values: &[Complex64]) -> f64 {
    values.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Elementary gates. Qubit indices are 0-based with qubit 0 the
/// least-significant bit of the basis index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Hadamard(usize),
    /// diag(1, 1, 1, e^{jθ}) on the two qubits; symmetric in its operands.
    ControlledPhase {
        control: usize,
        target: usize,
        angle: f64,
    },
    Swap(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Hadamard(q) => vec![q],
            Gate::ControlledPhase { control, target, .. } => vec![control, target],
            Gate::Swap(a, b) => vec![a, b],
        }
    }

    pub fn validate(&self, num_qubits: usize) -> Result<(), QsimError> {
        let qubits = self.qubits();
        for (i, &q) in qubits.iter().enumerate() {
            if q >= num_qubits {
                return Err(QsimError::IndexOutOfRange { index: q, num_qubits });
            }
            if qubits[..i].contains(&q) {
                return Err(QsimError::RepeatedQubit(q));
            }
        }
        Ok(())
    }

    /// Complex conjugate of the gate's unitary.
    pub fn conjugate(&self) -> Gate {
        match *self {
            Gate::ControlledPhase { control, target, angle } => Gate::ControlledPhase {
                control,
                target,
                angle: -angle,
            },
            other => other,
        }
    }
}

fn apply_in_place(amps: &mut [Complex64], gate: &Gate) {
    match *gate {
        Gate::Hadamard(q) => {
            let stride = 1usize << q;
            for block in (0..amps.len()).step_by(2 * stride) {
                for i in block..block + stride {
                    let a = amps[i];
                    let b = amps[i + stride];
                    amps[i] = (a + b) * FRAC_1_SQRT_2;
                    amps[i + stride] = (a - b) * FRAC_1_SQRT_2;
                }
            }
        }
        Gate::ControlledPhase { control, target, angle } => {
            let both = (1usize << control) | (1usize << target);
            let phase = Complex64::cis(angle);
            for (i, a) in amps.iter_mut().enumerate() {
                if i & both == both {
                    *a *= phase;
                }
            }
        }
        Gate::Swap(x, y) => {
            let (bx, by) = (1usize << x, 1usize << y);
            for i in 0..amps.len() {
                if i & bx != 0 && i & by == 0 {
                    amps.swap(i, i ^ bx ^ by);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateCounts {
    pub hadamard: usize,
    pub controlled_phase: usize,
    pub swap: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.hadamard + self.controlled_phase + self.swap
    }
}

/// Ordered list of gates on a fixed-size register.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSequence {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl GateSequence {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), QsimError> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn counts(&self) -> GateCounts {
        self.gates.iter().fold(GateCounts::default(), |mut c, g| {
            match g {
                Gate::Hadamard(_) => c.hadamard += 1,
                Gate::ControlledPhase { .. } => c.controlled_phase += 1,
                Gate::Swap(..) => c.swap += 1,
            }
            c
        })
    }

    /// Circuit realising the complex-conjugate unitary. For the symmetric
    /// Fourier matrices this is also the inverse.
    pub fn conjugate(&self) -> GateSequence {
        GateSequence {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().map(Gate::conjugate).collect(),
        }
    }
}

/// Inverse QFT on `num_qubits` qubits.
///
/// The circuit maps |m⟩ to (1/√N) Σ_n exp(+j2πmn/N) |n⟩, which is the
/// unitary-normalised IDFT used to recover excitations from pattern samples.
/// Structure: for each qubit from the most significant down, one Hadamard
/// followed by controlled phases π/2^k from every lower qubit, then the
/// bit-reversal as explicit swaps.
pub fn build_iqft(num_qubits: usize) -> Result<GateSequence, QsimError> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(QsimError::UnsupportedQubitCount(num_qubits));
    }
    let mut circuit = GateSequence::new(num_qubits);
    for target in (0..num_qubits).rev() {
        circuit.push(Gate::Hadamard(target))?;
        for control in (0..target).rev() {
            let k = target - control;
            circuit.push(Gate::ControlledPhase {
                control,
                target,
                angle: PI / (1u64 << k) as f64,
            })?;
        }
    }
    for q in 0..num_qubits / 2 {
        circuit.push(Gate::Swap(q, num_qubits - 1 - q))?;
    }
    Ok(circuit)
}

/// Forward QFT, the conjugate of [`build_iqft`].
pub fn build_qft(num_qubits: usize) -> Result<GateSequence, QsimError> {
    Ok(build_iqft(num_qubits)?.conjugate())
}

pub fn run_circuit(mut state: Statevector, circuit: &GateSequence) -> Result<Statevector, QsimError> {
    if circuit.num_qubits() != state.num_qubits() {
        return Err(QsimError::QubitCountMismatch {
            circuit: circuit.num_qubits(),
            state: state.num_qubits(),
        });
    }
    // Gates were validated on push.
    for gate in circuit.gates() {
        apply_in_place(&mut state.amplitudes, gate);
    }
    Ok(state)
}

/// Born-rule probabilities p_n = |amplitude_n|².
pub fn probabilities(state: &Statevector) -> Vec<f64> {
    state.amplitudes.iter().map(|a| a.norm_sqr()).collect()
}

/// Draws `shots` independent measurements in the computational basis and
/// returns the per-index histogram. Deterministic for a given seed.
pub fn sample_measurements(state: &Statevector, shots: u64, seed: u64) -> Result<Vec<u64>, QsimError> {
    if shots == 0 {
        return Err(QsimError::NoShots);
    }
    let weights = probabilities(state);
    let dist = WeightedIndex::new(&weights).map_err(|_| QsimError::ZeroNorm)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; weights.len()];
    for _ in 0..shots {
        counts[dist.sample(&mut rng)] += 1;
    }
    Ok(counts)
}
