use qthin_core::qsim::build_iqft;
use serde::Serialize;

use crate::CliError;

/// Analytic complexity comparison; nothing here is timed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedupReport {
    pub n: usize,
    /// `N / ln N`.
    pub ratio: f64,
    /// `N·log2 N` operations of a classical FFT.
    pub fft_operations: f64,
    /// Gate count of the inverse QFT circuit, when `N` is a power of two
    /// the simulator can build.
    pub iqft_gates: Option<usize>,
}

pub fn report_speedup(n: usize) -> Result<SpeedupReport, CliError> {
    if n < 2 {
        return Err(CliError::Config(format!("speedup needs N >= 2, got {n}")));
    }
    let nf = n as f64;
    let iqft_gates = n
        .is_power_of_two()
        .then(|| build_iqft(n.trailing_zeros() as usize).ok())
        .flatten()
        .map(|circuit| circuit.len());
    Ok(SpeedupReport {
        n,
        ratio: nf / nf.ln(),
        fft_operations: nf * nf.log2(),
        iqft_gates,
    })
}
