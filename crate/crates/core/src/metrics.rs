//! Matching costs and radiation-performance indexes.
//!
//! All quantities are evaluated on a [`UGrid`]. Power patterns are
//! peak-normalised, integrals use the composite trapezoid rule, and dB
//! values are `10·log10` of power ratios.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::pattern::{array_factor_on_grid, normalize_power, ArrayLayout, PatternSamples, UGrid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("every element is switched off")]
    AllElementsOff,
    #[error("sidelobe region is empty")]
    EmptySidelobeRegion,
    #[error("power pattern has no unique main-beam peak")]
    NoPeak,
    #[error("reference has {reference} samples but the layout has {layout} elements")]
    SizeMismatch { reference: usize, layout: usize },
    #[error("sampled values ({values}) do not match the grid ({grid} points)")]
    GridMismatch { values: usize, grid: usize },
    #[error("sidelobe mask must be below 0 dB, got {0}")]
    InvalidSll(f64),
    #[error("sidelobe ranges must be sorted, disjoint and inside the grid")]
    InvalidRegion,
}

pub fn power_to_db(power: f64) -> f64 {
    10.0 * power.log10()
}

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Grid points outside the main lobe, stored as inclusive index ranges.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SidelobeRegion {
    ranges: Vec<(usize, usize)>,
}

impl SidelobeRegion {
    pub fn from_ranges(ranges: Vec<(usize, usize)>, grid_len: usize) -> Result<Self, MetricsError> {
        let mut prev_end: Option<usize> = None;
        for &(start, end) in &ranges {
            if start > end || end >= grid_len || prev_end.is_some_and(|p| start <= p) {
                return Err(MetricsError::InvalidRegion);
            }
            prev_end = Some(end);
        }
        Ok(Self { ranges })
    }

    pub fn ranges(&self) -> &[(usize, usize)] {
        &self.ranges
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.ranges.iter().any(|&(s, e)| (s..=e).contains(&index))
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.ranges.iter().flat_map(|&(s, e)| s..=e)
    }

    /// Region bounds in direction cosine.
    pub fn intervals(&self, grid: &UGrid) -> Vec<(f64, f64)> {
        let u = grid.points();
        self.ranges.iter().map(|&(s, e)| (u[s], u[e])).collect()
    }

    /// Total length in u.
    pub fn measure(&self, grid: &UGrid) -> f64 {
        self.intervals(grid).iter().map(|(a, b)| b - a).sum()
    }

    fn integrate(&self, grid: &UGrid, values: &[f64]) -> f64 {
        self.ranges
            .iter()
            .map(|&(s, e)| grid.trapezoid_range(values, s, e))
            .sum()
    }
}

fn is_strict_minimum(power: &[f64], i: usize) -> bool {
    power[i] < power[i - 1] && power[i] < power[i + 1]
}

/// Everything outside the main lobe.
///
/// The main lobe spans the open interval between the first strict discrete
/// local minima on either side of the global peak. A side with no such
/// minimum before the grid edge contributes nothing.
pub fn sidelobe_region(power: &[f64]) -> Result<SidelobeRegion, MetricsError> {
    let (peak, peak_value) = power
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(MetricsError::NoPeak)?;
    let near_peak = power.iter().filter(|&&p| p >= peak_value * (1.0 - 1e-9)).count();
    if peak_value <= 0.0 || peak_value.is_nan() || near_peak > 1 {
        return Err(MetricsError::NoPeak);
    }
    let last = power.len() - 1;
    let right = (peak + 1..last).find(|&i| is_strict_minimum(power, i));
    let left = (1..peak).rev().find(|&i| is_strict_minimum(power, i));

    let mut ranges = Vec::with_capacity(2);
    if let Some(l) = left {
        ranges.push((0, l));
    }
    if let Some(r) = right {
        ranges.push((r, last));
    }
    Ok(SidelobeRegion { ranges })
}

fn check_grid(values: usize, grid: &UGrid) -> Result<(), MetricsError> {
    if values != grid.len() {
        return Err(MetricsError::GridMismatch {
            values,
            grid: grid.len(),
        });
    }
    Ok(())
}

fn peak_normalized(field: &[Complex64]) -> Option<Vec<Complex64>> {
    let peak = field.iter().map(|a| a.norm()).fold(0.0, f64::max);
    (peak > 0.0).then(|| field.iter().map(|a| a / peak).collect())
}

/// `∫ |Â(u) − Â_ref(u)|² du` over the grid, each field pre-divided by its
/// peak modulus. `reference` must already be peak-normalised.
pub fn pattern_match_cost(field: &[Complex64], reference: &[Complex64], grid: &UGrid) -> Result<f64, MetricsError> {
    check_grid(field.len(), grid)?;
    check_grid(reference.len(), grid)?;
    let field = peak_normalized(field).ok_or(MetricsError::AllElementsOff)?;
    let integrand: Vec<f64> = field.iter().zip(reference).map(|(a, b)| (a - b).norm_sqr()).collect();
    Ok(grid.trapezoid(&integrand))
}

/// Pattern-match cost of a layout against reference samples.
pub fn cost_pattern_match(layout: &ArrayLayout, reference: &PatternSamples, grid: &UGrid) -> Result<f64, MetricsError> {
    if reference.len() != layout.n_elements() {
        return Err(MetricsError::SizeMismatch {
            reference: reference.len(),
            layout: layout.n_elements(),
        });
    }
    let field = array_factor_on_grid(&layout.weights(), layout.spacing(), grid.points());
    let reference = reference_field(reference, grid).ok_or(MetricsError::AllElementsOff)?;
    pattern_match_cost(&field, &reference, grid)
}

/// Peak-normalised continuous reference pattern on the grid.
fn reference_field(reference: &PatternSamples, grid: &UGrid) -> Option<Vec<Complex64>> {
    let field = array_factor_on_grid(&reference.excitations(), reference.spacing(), grid.points());
    peak_normalized(&field)
}

/// One-sided hinge `∫_Ω max(0, P(u) − s)² du` with `s = 10^(SLL_ref/10)`.
pub fn cost_sll_mask(
    power: &[f64],
    grid: &UGrid,
    region: &SidelobeRegion,
    sll_ref_db: f64,
) -> Result<f64, MetricsError> {
    check_grid(power.len(), grid)?;
    if region.is_empty() {
        return Err(MetricsError::EmptySidelobeRegion);
    }
    let level = db_to_power(sll_ref_db);
    let excess: Vec<f64> = power.iter().map(|&p| (p - level).max(0.0).powi(2)).collect();
    Ok(region.integrate(grid, &excess))
}

/// Highest sidelobe relative to the peak, in dB.
pub fn peak_sll(power: &[f64], region: &SidelobeRegion) -> Result<f64, MetricsError> {
    region
        .indices()
        .map(|i| power[i])
        .max_by(f64::total_cmp)
        .map(power_to_db)
        .ok_or(MetricsError::EmptySidelobeRegion)
}

/// `10·log10((1/2)·∫_Ω P(u) du)`.
pub fn mean_sll(power: &[f64], grid: &UGrid, region: &SidelobeRegion) -> Result<f64, MetricsError> {
    check_grid(power.len(), grid)?;
    if region.is_empty() {
        return Err(MetricsError::EmptySidelobeRegion);
    }
    Ok(power_to_db(0.5 * region.integrate(grid, power)))
}

/// Number of grid points in Ω whose power exceeds the mask. Depends on the
/// grid density.
pub fn mask_violations(power: &[f64], region: &SidelobeRegion, sll_ref_db: f64) -> usize {
    let level = db_to_power(sll_ref_db);
    region.indices().filter(|&i| power[i] > level).count()
}

/// Thinning percentage `100·(N − K)/N`.
pub fn thinning_percentage(n: usize, k: usize) -> f64 {
    100.0 * (n - k) as f64 / n as f64
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureKind {
    /// Match the reference array factor itself.
    PatternMatch(PatternSamples),
    /// Keep sidelobes below a mask level (dB, < 0).
    SllMask { sll_ref_db: f64 },
}

/// The pattern feature to be matched, with the grid it is evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    kind: FeatureKind,
    grid: UGrid,
    reference_field: Vec<Complex64>,
}

impl FeatureSpec {
    pub fn pattern_match(reference: PatternSamples, grid: UGrid) -> Result<Self, MetricsError> {
        let reference_field = reference_field(&reference, &grid).ok_or(MetricsError::AllElementsOff)?;
        Ok(Self {
            kind: FeatureKind::PatternMatch(reference),
            grid,
            reference_field,
        })
    }

    pub fn sll_mask(sll_ref_db: f64, grid: UGrid) -> Result<Self, MetricsError> {
        if sll_ref_db >= 0.0 || sll_ref_db.is_nan() {
            return Err(MetricsError::InvalidSll(sll_ref_db));
        }
        Ok(Self {
            kind: FeatureKind::SllMask { sll_ref_db },
            grid,
            reference_field: Vec::new(),
        })
    }

    pub fn kind(&self) -> &FeatureKind {
        &self.kind
    }

    pub fn grid(&self) -> &UGrid {
        &self.grid
    }

    /// Mask level used for violation counting, if the feature has one.
    pub fn mask_db(&self) -> Option<f64> {
        match self.kind {
            FeatureKind::SllMask { sll_ref_db } => Some(sll_ref_db),
            FeatureKind::PatternMatch(_) => None,
        }
    }

    /// Ψ of a field already sampled on [`Self::grid`].
    pub fn cost_of_field(&self, field: &[Complex64]) -> Result<f64, MetricsError> {
        match self.kind {
            FeatureKind::PatternMatch(_) => pattern_match_cost(field, &self.reference_field, &self.grid),
            FeatureKind::SllMask { sll_ref_db } => {
                check_grid(field.len(), &self.grid)?;
                let power = normalize_power(field).ok_or(MetricsError::AllElementsOff)?;
                let region = sidelobe_region(&power)?;
                cost_sll_mask(&power, &self.grid, &region, sll_ref_db)
            }
        }
    }

    /// Ψ of a layout, evaluated from scratch.
    pub fn cost(&self, layout: &ArrayLayout) -> Result<f64, MetricsError> {
        let field = array_factor_on_grid(&layout.weights(), layout.spacing(), self.grid.points());
        self.cost_of_field(&field)
    }
}

/// Radiation indexes reported for a synthesised layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsBundle {
    pub psi: f64,
    pub tau_percent: f64,
    pub sll_db: Option<f64>,
    pub mean_sll_db: Option<f64>,
    pub violations: Option<usize>,
}

impl MetricsBundle {
    /// Sidelobe indexes are `None` when the pattern has no sidelobe region.
    /// Violations are only counted when a mask level is given.
    pub fn evaluate(layout: &ArrayLayout, grid: &UGrid, psi: f64, mask_db: Option<f64>) -> Result<Self, MetricsError> {
        let field = array_factor_on_grid(&layout.weights(), layout.spacing(), grid.points());
        let power = normalize_power(&field).ok_or(MetricsError::AllElementsOff)?;
        let region = sidelobe_region(&power).unwrap_or_default();
        let (sll_db, mean_sll_db) = if region.is_empty() {
            (None, None)
        } else {
            (Some(peak_sll(&power, &region)?), Some(mean_sll(&power, grid, &region)?))
        };
        Ok(Self {
            psi,
            tau_percent: thinning_percentage(layout.n_elements(), layout.active_count()),
            sll_db,
            mean_sll_db,
            violations: mask_db.map(|db| mask_violations(&power, &region, db)),
        })
    }
}
