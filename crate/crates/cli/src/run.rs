//! Experiment runners.
//!
//! Each runner evaluates its sweep cells in parallel, then writes every
//! output file once all cells are done.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use qthin_core::io::write_power_pattern_csv;
use qthin_core::metrics::FeatureSpec;
use qthin_core::noise::NoiseSpec;
use qthin_core::pattern::{normalized_power_pattern, ArrayLayout, ExcitationMode, PatternSamples, UGrid};
use qthin_core::reference::{chebyshev_reference, layout_reference};
use qthin_core::thinning::{
    quantum_probabilities, rank_probabilities, synthesize, Readout, ThinningError, ThinningReport,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig, FeatureChoice, ReadoutChoice};
use crate::CliError;

/// A synthesis cell: the report on success, the error text otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub name: String,
    pub sll_ref_db: Option<f64>,
    pub eta: f64,
    pub report: Option<ThinningReport>,
    pub error: Option<String>,
}

impl CellResult {
    pub fn is_feasible(&self) -> bool {
        self.report.is_some()
    }

    pub fn active_count(&self) -> Option<usize> {
        self.report.as_ref().map(|r| r.k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidateOutcome {
    pub probabilities: Vec<f64>,
    pub cells: Vec<CellResult>,
    /// Per cell, whether the recovered active set equals the reference.
    pub recovered: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseCell {
    pub snr_db: f64,
    pub seed: u64,
    pub sorted: Vec<f64>,
    pub order: Vec<usize>,
    /// Whether the top `K_ref` ranks are exactly the reference actives.
    pub top_match: bool,
    /// `p̂_{K−1} / p̂_K` with `K` the number of reference actives.
    pub gap_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseOutcome {
    pub cells: Vec<NoiseCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssessOutcome {
    /// Sorted by shallowest `sll_ref_db` first, then largest `eta` first.
    pub cells: Vec<CellResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Validate(ValidateOutcome),
    Noise(NoiseOutcome),
    Assess(AssessOutcome),
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(path)?))
}

fn prepare_out_dir(out: &Path, config: &ExperimentConfig) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    write_json(
        &out.join("manifest.json"),
        &Manifest {
            tool: "qthin",
            version: env!("CARGO_PKG_VERSION"),
            config,
        },
    )
}

fn readout(config: &ExperimentConfig, seed: u64) -> Readout {
    match config.readout {
        Some(ReadoutChoice::Shots) => Readout::Shots {
            shots: config.shots.unwrap_or(2 * config.n as u64),
            seed,
        },
        _ => Readout::Exact,
    }
}

fn cell_name(sll_ref_db: Option<f64>, eta: f64) -> String {
    match sll_ref_db {
        Some(sll) => format!("sll{sll}_eta{eta}"),
        None => format!("eta{eta}"),
    }
}

fn synthesize_cell(
    p: &[f64],
    reference: &PatternSamples,
    feature: &FeatureSpec,
    config: &ExperimentConfig,
    sll_ref_db: Option<f64>,
    eta: f64,
) -> Result<CellResult, CliError> {
    let mode = config.excitation.unwrap_or(ExcitationMode::Isophoric);
    let name = cell_name(sll_ref_db, eta);
    match synthesize(p, reference, feature, eta, mode) {
        Ok(result) => {
            let metrics = result.metrics(feature)?;
            Ok(CellResult {
                name,
                sll_ref_db,
                eta,
                report: Some(result.report(&metrics)),
                error: None,
            })
        }
        Err(e @ ThinningError::NoFeasibleThinning { .. }) => Ok(CellResult {
            name,
            sll_ref_db,
            eta,
            report: None,
            error: Some(e.to_string()),
        }),
        Err(e) => Err(e.into()),
    }
}

fn write_cell(out: &Path, cell: &CellResult, grid: &UGrid, spacing: f64) -> Result<(), CliError> {
    let Some(report) = &cell.report else {
        return Ok(());
    };
    write_json(&out.join(format!("layout_{}.json", cell.name)), report)?;
    let mask: String = report.b.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
    write_text(&out.join(format!("mask_{}.txt", cell.name)), &(mask + "\n"))?;

    let thinning: Vec<bool> = report.b.iter().map(|&b| b == 1).collect();
    let layout = ArrayLayout::new(spacing, thinning, report.w.clone(), report.mode)?;
    let power = normalized_power_pattern(&layout, grid.points())?;
    let path = out.join(format!("pattern_{}.csv", cell.name));
    write_power_pattern_csv(create(&path)?, grid.points(), &power)?;
    Ok(())
}

fn write_probabilities(out: &Path, p: &[f64]) -> Result<(), CliError> {
    let mut csv = csv_writer(&out.join("probs.csv"))?;
    csv.write_record(["n", "p"])?;
    for (n, pn) in p.iter().enumerate() {
        csv.write_record([n.to_string(), pn.to_string()])?;
    }
    csv.flush().map_err(csv::Error::from)?;

    let ranking = rank_probabilities(p);
    let mut csv = csv_writer(&out.join("sorted_probs.csv"))?;
    csv.write_record(["t", "p"])?;
    for (t, pt) in ranking.sorted().iter().enumerate() {
        csv.write_record([t.to_string(), pt.to_string()])?;
    }
    csv.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn layout_indices(config: &ExperimentConfig) -> Vec<usize> {
    config.indices.clone().unwrap_or_default()
}

/// Recovers a known layout from its own pattern.
pub fn run_validate(config: &ExperimentConfig, out: &Path) -> Result<ValidateOutcome, CliError> {
    let config = config.resolve()?;
    if config.experiment != Experiment::Validate {
        return Err(CliError::Config("expected `experiment = \"validate\"`".into()));
    }
    let indices = layout_indices(&config);
    let spacing = config.spacing();
    let reference = layout_reference(config.n, spacing, &indices)?;
    let p = quantum_probabilities(
        &reference,
        &NoiseSpec::noiseless(),
        readout(&config, config.seed.unwrap_or(0)),
    )?;
    let grid = UGrid::uniform(config.grid_intervals())?;
    let feature = FeatureSpec::pattern_match(reference.clone(), grid.clone())?;

    let etas = config.eta.clone().unwrap_or_default();
    let cells = etas
        .par_iter()
        .map(|&eta| synthesize_cell(&p, &reference, &feature, &config, None, eta))
        .collect::<Result<Vec<_>, _>>()?;
    let expected: BTreeSet<usize> = indices.iter().copied().collect();
    let recovered = cells
        .iter()
        .map(|c| {
            c.report.as_ref().is_some_and(|r| {
                let got: BTreeSet<usize> = (0..r.n).filter(|&i| r.b[i] == 1).collect();
                got == expected
            })
        })
        .collect();
    let outcome = ValidateOutcome {
        probabilities: p,
        cells,
        recovered,
    };

    prepare_out_dir(out, &config)?;
    write_probabilities(out, &outcome.probabilities)?;
    for cell in &outcome.cells {
        write_cell(out, cell, &grid, spacing)?;
    }
    write_json(&out.join("summary.json"), &ValidateSummary::from(&outcome))?;
    Ok(outcome)
}

#[derive(Serialize)]
struct ValidateSummary {
    cells: Vec<ValidateSummaryRow>,
}

#[derive(Serialize)]
struct ValidateSummaryRow {
    eta: f64,
    #[serde(rename = "K")]
    k: Option<usize>,
    psi: Option<f64>,
    recovered: bool,
    error: Option<String>,
}

impl From<&ValidateOutcome> for ValidateSummary {
    fn from(outcome: &ValidateOutcome) -> Self {
        let cells = outcome
            .cells
            .iter()
            .zip(&outcome.recovered)
            .map(|(c, &recovered)| ValidateSummaryRow {
                eta: c.eta,
                k: c.active_count(),
                psi: c.report.as_ref().map(|r| r.psi),
                recovered,
                error: c.error.clone(),
            })
            .collect();
        Self { cells }
    }
}

/// Sorted output probabilities of a noisy known layout across SNR and seeds.
pub fn run_noise(config: &ExperimentConfig, out: &Path) -> Result<NoiseOutcome, CliError> {
    let config = config.resolve()?;
    if config.experiment != Experiment::Noise {
        return Err(CliError::Config("expected `experiment = \"noise\"`".into()));
    }
    let indices = layout_indices(&config);
    let reference = layout_reference(config.n, config.spacing(), &indices)?;
    let base_seed = config.seed.unwrap_or(0);
    let seeds = config.seeds.unwrap_or(10);
    let jobs: Vec<(f64, u64)> = config
        .snr_db
        .iter()
        .flatten()
        .flat_map(|&snr| (0..seeds).map(move |i| (snr, base_seed.wrapping_add(i))))
        .collect();
    let expected: BTreeSet<usize> = indices.iter().copied().collect();
    let k = indices.len();

    let cells = jobs
        .par_iter()
        .map(|&(snr_db, seed)| {
            let noise = NoiseSpec::at_snr(snr_db, seed);
            let p = quantum_probabilities(&reference, &noise, readout(&config, seed))?;
            let ranking = rank_probabilities(&p);
            let top: BTreeSet<usize> = ranking.order()[..k].iter().copied().collect();
            let sorted = ranking.sorted().to_vec();
            let gap_ratio = if k < sorted.len() {
                sorted[k - 1] / sorted[k]
            } else {
                f64::INFINITY
            };
            Ok(NoiseCell {
                snr_db,
                seed,
                order: ranking.order().to_vec(),
                sorted,
                top_match: top == expected,
                gap_ratio,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let outcome = NoiseOutcome { cells };

    prepare_out_dir(out, &config)?;
    let mut sweep = csv_writer(&out.join("noise_sweep.csv"))?;
    sweep.write_record(["snr_db", "seed", "t", "p_sorted"])?;
    let mut summary = csv_writer(&out.join("noise_summary.csv"))?;
    summary.write_record(["snr_db", "seed", "top_match", "gap_ratio"])?;
    for cell in &outcome.cells {
        let (snr, seed) = (cell.snr_db.to_string(), cell.seed.to_string());
        for (t, p) in cell.sorted.iter().enumerate() {
            sweep.write_record([snr.as_str(), seed.as_str(), &t.to_string(), &p.to_string()])?;
        }
        summary.write_record([snr, seed, cell.top_match.to_string(), cell.gap_ratio.to_string()])?;
    }
    sweep.flush().map_err(csv::Error::from)?;
    summary.flush().map_err(csv::Error::from)?;
    Ok(outcome)
}

fn descending(a: f64, b: f64) -> Ordering {
    b.total_cmp(&a)
}

/// Thins a tapered reference over a grid of sidelobe levels and thresholds.
pub fn run_assess(config: &ExperimentConfig, out: &Path) -> Result<AssessOutcome, CliError> {
    let config = config.resolve()?;
    if config.experiment != Experiment::Assess {
        return Err(CliError::Config("expected `experiment = \"assess\"`".into()));
    }
    let spacing = config.spacing();
    let grid = UGrid::uniform(config.grid_intervals())?;
    let seed = config.seed.unwrap_or(0);

    // reference, probabilities and the optional mask level per row
    let mut rows: Vec<Option<f64>> = match config.sll_ref_db.clone() {
        Some(levels) => levels.into_iter().map(Some).collect(),
        None => vec![None],
    };
    rows.sort_by(|a, b| descending(a.unwrap_or(0.0), b.unwrap_or(0.0)));
    rows.dedup();
    let prepared = rows
        .par_iter()
        .map(|&sll| {
            let reference = match sll {
                Some(sll) => chebyshev_reference(config.n, spacing, sll)?,
                None => layout_reference(config.n, spacing, &layout_indices(&config))?,
            };
            let p = quantum_probabilities(&reference, &NoiseSpec::noiseless(), readout(&config, seed))?;
            let feature = match (config.feature, sll) {
                (Some(FeatureChoice::Sll), Some(sll)) => FeatureSpec::sll_mask(sll, grid.clone())?,
                _ => FeatureSpec::pattern_match(reference.clone(), grid.clone())?,
            };
            Ok((sll, reference, p, feature))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut etas = config.eta.clone().unwrap_or_default();
    etas.sort_by(|a, b| descending(*a, *b));
    etas.dedup();
    let jobs: Vec<(usize, f64)> = (0..prepared.len())
        .flat_map(|row| etas.iter().map(move |&eta| (row, eta)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(row, eta)| {
            let (sll, reference, p, feature) = &prepared[row];
            synthesize_cell(p, reference, feature, &config, *sll, eta)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let outcome = AssessOutcome { cells };

    prepare_out_dir(out, &config)?;
    let mut table = csv_writer(&out.join("table.csv"))?;
    table.write_record([
        "sll_ref_db",
        "eta",
        "status",
        "K",
        "tau_percent",
        "mean_sll_db",
        "sll_db",
        "violations",
        "psi",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for cell in &outcome.cells {
        let r = cell.report.as_ref();
        table.write_record([
            opt(cell.sll_ref_db),
            cell.eta.to_string(),
            if r.is_some() { "ok" } else { "infeasible" }.to_string(),
            r.map(|r| r.k.to_string()).unwrap_or_default(),
            opt(r.map(|r| r.tau_percent)),
            opt(r.and_then(|r| r.mean_sll_db)),
            opt(r.and_then(|r| r.sll_db)),
            r.and_then(|r| r.violations).map(|v| v.to_string()).unwrap_or_default(),
            opt(r.map(|r| r.psi)),
        ])?;
        write_cell(out, cell, &grid, spacing)?;
    }
    table.flush().map_err(csv::Error::from)?;
    Ok(outcome)
}

/// Dispatches on `config.experiment`.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<RunOutcome, CliError> {
    Ok(match config.experiment {
        Experiment::Validate => RunOutcome::Validate(run_validate(config, out)?),
        Experiment::Noise => RunOutcome::Noise(run_noise(config, out)?),
        Experiment::Assess => RunOutcome::Assess(run_assess(config, out)?),
    })
}

/// Files a run wrote, relative to `out`, in sorted order.
pub fn list_outputs(out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(out)
        .map_err(|source| CliError::Io {
            path: out.to_path_buf(),
            source,
        })?
        .filter_map(|entry| entry.ok())
        .map(|entry| PathBuf::from(entry.file_name()))
        .collect();
    files.sort();
    Ok(files)
}
