//! Experiment configuration.
//!
//! Configs are flat TOML tables. Every key except `experiment` and `n` has a
//! default that depends on the experiment; [`ExperimentConfig::resolve`]
//! fills them in and checks the result. The resolved form is what gets
//! written to `manifest.json`, so a manifest can be fed back in unchanged.
//!
//! ```toml
//! experiment = "validate"
//! n = 1024
//! indices = [0, 1, 3, 4, 5, 7, 9]
//! ```

use std::path::Path;

use qthin_core::pattern::ExcitationMode;
use qthin_core::qsim::MAX_QUBITS;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Validate,
    Noise,
    Assess,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceChoice {
    Layout,
    Chebyshev,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureChoice {
    /// Match the reference array factor.
    Pattern,
    /// Sidelobe mask at each `sll_ref_db`.
    Sll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadoutChoice {
    Exact,
    Shots,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Number of lattice positions, a power of two.
    pub n: usize,
    /// Element spacing in wavelengths.
    #[serde(default)]
    pub d: Option<f64>,
    /// Register width; must equal log2(n) when given.
    #[serde(default)]
    pub qubits: Option<usize>,
    #[serde(default)]
    pub reference: Option<ReferenceChoice>,
    /// Active elements of a layout reference.
    #[serde(default)]
    pub indices: Option<Vec<usize>>,
    /// Chebyshev sidelobe levels (dB) to sweep.
    #[serde(default)]
    pub sll_ref_db: Option<Vec<f64>>,
    /// Matching thresholds to sweep.
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
    #[serde(default)]
    pub feature: Option<FeatureChoice>,
    #[serde(default)]
    pub excitation: Option<ExcitationMode>,
    #[serde(default)]
    pub readout: Option<ReadoutChoice>,
    /// Shots per run in shots readout. Defaults to 2N.
    #[serde(default)]
    pub shots: Option<u64>,
    /// Base seed for measurement sampling and noise.
    #[serde(default)]
    pub seed: Option<u64>,
    /// SNR values (dB) for the noise sweep.
    #[serde(default)]
    pub snr_db: Option<Vec<f64>>,
    /// Noise realisations per SNR value.
    #[serde(default)]
    pub seeds: Option<u64>,
    /// Pattern grid intervals per element.
    #[serde(default)]
    pub grid_factor: Option<usize>,
}

#[derive(Deserialize)]
struct Manifest {
    config: ExperimentConfig,
}

fn invalid(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}

fn check_sweep(name: &str, values: &[f64], ok: impl Fn(f64) -> bool, rule: &str) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(invalid(format!("`{name}` must not be empty")));
    }
    if let Some(v) = values.iter().find(|&&v| !ok(v)) {
        return Err(invalid(format!("`{name}` value {v} {rule}")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses a TOML config, or the `config` member of a `.json` manifest.
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|ext| ext == "json") {
            let manifest: Manifest =
                serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            Ok(manifest.config)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    /// Fills defaults and validates. Resolving twice is a no-op.
    pub fn resolve(&self) -> Result<Self, CliError> {
        let mut c = self.clone();
        let n = c.n;
        if n < 2 || !n.is_power_of_two() || n > 1 << MAX_QUBITS {
            return Err(invalid(format!(
                "`n` must be a power of two between 2 and 2^{MAX_QUBITS}, got {n}"
            )));
        }
        let qubits = n.trailing_zeros() as usize;
        if let Some(given) = c.qubits {
            if given != qubits {
                return Err(invalid(format!("`qubits` = {given} but n = {n} needs {qubits}")));
            }
        }
        c.qubits = Some(qubits);

        let d = *c.d.get_or_insert(0.5);
        if !(d > 0.0 && d.is_finite()) {
            return Err(invalid(format!("`d` must be positive, got {d}")));
        }

        let assess = c.experiment == Experiment::Assess;
        let reference = *c.reference.get_or_insert(if assess {
            ReferenceChoice::Chebyshev
        } else {
            ReferenceChoice::Layout
        });
        if !assess && reference != ReferenceChoice::Layout {
            return Err(invalid("validate and noise runs need `reference = \"layout\"`"));
        }
        match reference {
            ReferenceChoice::Layout => {
                let indices = c
                    .indices
                    .as_ref()
                    .ok_or_else(|| invalid("layout reference needs `indices`"))?;
                if indices.is_empty() {
                    return Err(invalid("`indices` must not be empty"));
                }
                if let Some(i) = indices.iter().find(|&&i| i >= n) {
                    return Err(invalid(format!("index {i} outside 0..{n}")));
                }
                let mut sorted = indices.clone();
                sorted.sort_unstable();
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(invalid("`indices` contains duplicates"));
                }
                if c.sll_ref_db.is_some() {
                    return Err(invalid("`sll_ref_db` only applies to a chebyshev reference"));
                }
            }
            ReferenceChoice::Chebyshev => {
                let levels = c
                    .sll_ref_db
                    .as_ref()
                    .ok_or_else(|| invalid("chebyshev reference needs `sll_ref_db`"))?;
                check_sweep("sll_ref_db", levels, |v| v < 0.0 && v.is_finite(), "must be below 0 dB")?;
                if n < 4 {
                    return Err(invalid("chebyshev reference needs n >= 4"));
                }
                if c.indices.is_some() {
                    return Err(invalid("`indices` only applies to a layout reference"));
                }
            }
        }

        let feature = *c.feature.get_or_insert(if assess {
            FeatureChoice::Sll
        } else {
            FeatureChoice::Pattern
        });
        if feature == FeatureChoice::Sll && reference != ReferenceChoice::Chebyshev {
            return Err(invalid("`feature = \"sll\"` needs a chebyshev reference"));
        }
        c.excitation.get_or_insert(if assess {
            ExcitationMode::Amplitude
        } else {
            ExcitationMode::Isophoric
        });

        if c.eta.is_none() && !assess {
            c.eta = Some(vec![1e-9]);
        }
        let eta = c.eta.as_ref().ok_or_else(|| invalid("assess runs need `eta`"))?;
        check_sweep("eta", eta, |v| v > 0.0 && v.is_finite(), "must be positive")?;

        match *c.readout.get_or_insert(ReadoutChoice::Exact) {
            ReadoutChoice::Exact => {
                if c.shots.is_some() {
                    return Err(invalid("`shots` needs `readout = \"shots\"`"));
                }
            }
            ReadoutChoice::Shots => {
                if *c.shots.get_or_insert(2 * n as u64) == 0 {
                    return Err(invalid("`shots` must be at least 1"));
                }
            }
        }
        c.seed.get_or_insert(0);

        if c.experiment == Experiment::Noise {
            let snr = c.snr_db.as_ref().ok_or_else(|| invalid("noise runs need `snr_db`"))?;
            check_sweep("snr_db", snr, f64::is_finite, "must be finite")?;
            if *c.seeds.get_or_insert(10) == 0 {
                return Err(invalid("`seeds` must be at least 1"));
            }
        } else if c.snr_db.is_some() || c.seeds.is_some() {
            return Err(invalid("`snr_db` and `seeds` only apply to noise runs"));
        }

        if *c.grid_factor.get_or_insert(16) == 0 {
            return Err(invalid("`grid_factor` must be at least 1"));
        }
        Ok(c)
    }

    pub fn spacing(&self) -> f64 {
        self.d.unwrap_or(0.5)
    }

    pub fn grid_intervals(&self) -> usize {
        self.grid_factor.unwrap_or(16) * self.n
    }
}
