//! Classical linear-array mathematics.
//!
//! Element `n` sits at `z = n·d` with the spacing `d` in wavelengths, so the
//! array factor of excitations `w_n` is `A(u) = Σ_n w_n exp(j·2π·d·u·n)`.
//! Sampling it at `u_m = −m/(N·d)` gives the DFT `A_m = Σ_n w_n e^{−j2πnm/N}`.
//! Phases are fixed at zero, so the beam always points broadside.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PatternError {
    #[error("need at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("element spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),
    #[error("grating period 1/d = {period} is below 2; spacings above half a wavelength alias the visible range")]
    PeriodTooSmall { period: f64 },
    #[error("cyclic shift by N/2 needs an even length, got {0}")]
    OddLength(usize),
    #[error("every element is switched off")]
    AllElementsOff,
    #[error("evaluation grid is empty")]
    EmptyGrid,
    #[error("layout vectors disagree in length: {thinning} switches, {excitations} excitations")]
    LengthMismatch { thinning: usize, excitations: usize },
    #[error("element {index} is off but has excitation {value}")]
    OffElementRadiates { index: usize, value: f64 },
    #[error("element {index} has invalid excitation {value} for {mode:?} mode")]
    InvalidExcitation {
        index: usize,
        value: f64,
        mode: ExcitationMode,
    },
}

/// `N` complex array-factor samples together with the element spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSamples {
    samples: Vec<Complex64>,
    spacing: f64,
}

impl PatternSamples {
    pub fn new(samples: Vec<Complex64>, spacing: f64) -> Result<Self, PatternError> {
        if samples.len() < 2 {
            return Err(PatternError::TooShort(samples.len()));
        }
        check_spacing(spacing)?;
        Ok(Self { samples, spacing })
    }

    /// Pattern samples radiated by the given excitations.
    pub fn from_excitations(excitations: &[Complex64], spacing: f64) -> Result<Self, PatternError> {
        Self::new(dft_pattern_samples(excitations)?, spacing)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Excitations recovered through the IDFT.
    pub fn excitations(&self) -> Vec<Complex64> {
        // length >= 2 is an invariant
        idft_excitations(&self.samples).expect("pattern has at least two samples")
    }

    /// Sample powers `|A_m|²`.
    pub fn powers(&self) -> Vec<f64> {
        self.samples.iter().map(|a| a.norm_sqr()).collect()
    }
}

fn check_spacing(spacing: f64) -> Result<(), PatternError> {
    if spacing > 0.0 && spacing.is_finite() {
        Ok(())
    } else {
        Err(PatternError::InvalidSpacing(spacing))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExcitationMode {
    /// Active elements all radiate with unit amplitude.
    Isophoric,
    /// Active elements carry continuous non-negative amplitudes.
    Amplitude,
}

/// A thinned uniform lattice: which elements are on and how they are fed.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayLayout {
    spacing: f64,
    thinning: Vec<bool>,
    excitations: Vec<f64>,
    mode: ExcitationMode,
}

impl ArrayLayout {
    pub fn new(
        spacing: f64,
        thinning: Vec<bool>,
        excitations: Vec<f64>,
        mode: ExcitationMode,
    ) -> Result<Self, PatternError> {
        check_spacing(spacing)?;
        if thinning.len() != excitations.len() {
            return Err(PatternError::LengthMismatch {
                thinning: thinning.len(),
                excitations: excitations.len(),
            });
        }
        for (index, (&on, &value)) in thinning.iter().zip(&excitations).enumerate() {
            if !on && value != 0.0 {
                return Err(PatternError::OffElementRadiates { index, value });
            }
            let valid = match mode {
                ExcitationMode::Isophoric => value == 0.0 || value == 1.0,
                ExcitationMode::Amplitude => value >= 0.0 && value.is_finite(),
            };
            if !valid {
                return Err(PatternError::InvalidExcitation { index, value, mode });
            }
        }
        Ok(Self {
            spacing,
            thinning,
            excitations,
            mode,
        })
    }

    /// Isophoric layout with the listed elements switched on. Indices are
    /// assumed distinct and in range.
    pub fn isophoric(n: usize, spacing: f64, active: &[usize]) -> Result<Self, PatternError> {
        let mut thinning = vec![false; n];
        for &i in active {
            thinning[i] = true;
        }
        let excitations = thinning.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self::new(spacing, thinning, excitations, ExcitationMode::Isophoric)
    }

    pub fn n_elements(&self) -> usize {
        self.thinning.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn thinning(&self) -> &[bool] {
        &self.thinning
    }

    pub fn excitations(&self) -> &[f64] {
        &self.excitations
    }

    pub fn mode(&self) -> ExcitationMode {
        self.mode
    }

    pub fn active_count(&self) -> usize {
        self.thinning.iter().filter(|&&b| b).count()
    }

    pub fn active_indices(&self) -> Vec<usize> {
        self.thinning
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    /// Effective complex weights `w_n·b_n`.
    pub fn weights(&self) -> Vec<Complex64> {
        self.thinning
            .iter()
            .zip(&self.excitations)
            .map(|(&b, &w)| Complex64::new(if b { w } else { 0.0 }, 0.0))
            .collect()
    }

    /// 0/1 text mask, one character per element.
    pub fn mask_string(&self) -> String {
        self.thinning.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Uniform direction-cosine grid over `[−1, 1]`, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct UGrid {
    points: Vec<f64>,
}

impl UGrid {
    /// Points per pattern sample in the default evaluation grid.
    pub const OVERSAMPLING: usize = 16;

    /// `intervals + 1` equally spaced points from −1 to 1.
    pub fn uniform(intervals: usize) -> Result<Self, PatternError> {
        if intervals == 0 {
            return Err(PatternError::EmptyGrid);
        }
        let total = intervals as f64;
        let points = (0..=intervals).map(|i| (2.0 * i as f64 - total) / total).collect();
        Ok(Self { points })
    }

    /// Default grid for an `n`-element lattice: `16·n` intervals, so u = 0
    /// is a grid point whenever `n` is even.
    pub fn for_elements(n: usize) -> Result<Self, PatternError> {
        Self::uniform(Self::OVERSAMPLING * n)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Composite trapezoid over index range `[start, end]` (inclusive).
    pub fn trapezoid_range(&self, values: &[f64], start: usize, end: usize) -> f64 {
        (start..end)
            .map(|i| 0.5 * (values[i] + values[i + 1]) * (self.points[i + 1] - self.points[i]))
            .sum()
    }

    /// Composite trapezoid over the whole grid.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        self.trapezoid_range(values, 0, self.points.len() - 1)
    }
}

fn transform(input: &[Complex64], direction: FftDirection) -> Result<Vec<Complex64>, PatternError> {
    let n = input.len();
    if n < 2 {
        return Err(PatternError::TooShort(n));
    }
    let mut out = input.to_vec();
    FftPlanner::new().plan_fft(n, direction).process(&mut out);
    Ok(out)
}

/// Pattern samples `A_m = Σ_n w_n exp(−j2πnm/N)`.
pub fn dft_pattern_samples(excitations: &[Complex64]) -> Result<Vec<Complex64>, PatternError> {
    transform(excitations, FftDirection::Forward)
}

/// Excitations `w_n = (1/N) Σ_m A_m exp(+j2πmn/N)`; exact inverse of
/// [`dft_pattern_samples`].
pub fn idft_excitations(samples: &[Complex64]) -> Result<Vec<Complex64>, PatternError> {
    let mut out = transform(samples, FftDirection::Inverse)?;
    let scale = 1.0 / samples.len() as f64;
    out.iter_mut().for_each(|x| *x *= scale);
    Ok(out)
}

/// Direction cosines of the DFT samples, `u_m = −m/(N·d)`.
///
/// Each value is reduced modulo the grating period `P = 1/d` into
/// `(−P/2, P/2]`. For `d = 1/2` this is the visible range `(−1, 1]`, so
/// `u = −1` is reported as `+1`. Spacings above half a wavelength are
/// rejected because distinct samples would alias onto the same visible
/// direction.
pub fn sample_directions(n: usize, spacing: f64) -> Result<Vec<f64>, PatternError> {
    check_spacing(spacing)?;
    let period = 1.0 / spacing;
    if period < 2.0 {
        return Err(PatternError::PeriodTooSmall { period });
    }
    Ok((0..n)
        .map(|m| {
            let raw = -(m as f64) / (n as f64 * spacing);
            let wrapped = raw.rem_euclid(period);
            if wrapped > period / 2.0 {
                wrapped - period
            } else {
                wrapped
            }
        })
        .collect())
}

/// `output[m] = input[(m + N/2) mod N]`.
pub fn cyclic_shift<T: Clone>(values: &[T]) -> Result<Vec<T>, PatternError> {
    let n = values.len();
    if !n.is_multiple_of(2) {
        return Err(PatternError::OddLength(n));
    }
    let half = n / 2;
    Ok(values[half..].iter().chain(&values[..half]).cloned().collect())
}

/// Periodic sinc `sin(Nx) / (N sin x)`.
///
/// At `x = mπ` the removable singularity takes its limit `(−1)^(m(N−1))`.
pub fn periodic_sinc(x: f64, n: usize) -> f64 {
    let s = x.sin();
    if s.abs() < 1e-12 {
        let m = (x / PI).round() as i64;
        return if (m * (n as i64 - 1)).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
    }
    (n as f64 * x).sin() / (n as f64 * s)
}

/// Continuous array factor rebuilt from its `N` samples.
///
/// `A(u) = Σ_m A_m · e^{j(N−1)x_m} · S(x_m)` with `x_m = π·d·u + mπ/N`.
/// The linear phase term places the phase reference on element 0, which
/// matches [`array_factor_direct`]. Without it the kernel describes an array
/// centred on the origin.
pub fn array_factor_interpolated(pattern: &PatternSamples, u: f64) -> Complex64 {
    let n = pattern.len();
    let nf = n as f64;
    pattern
        .samples()
        .iter()
        .enumerate()
        .map(|(m, a)| {
            let x = PI * pattern.spacing() * u + m as f64 * PI / nf;
            a * Complex64::cis((nf - 1.0) * x) * periodic_sinc(x, n)
        })
        .sum()
}

/// Array factor `Σ_n w_n b_n exp(j·2π·d·u·n)` at one direction.
pub fn array_factor_direct(layout: &ArrayLayout, u: f64) -> Complex64 {
    let k = 2.0 * PI * layout.spacing() * u;
    layout
        .thinning()
        .iter()
        .zip(layout.excitations())
        .enumerate()
        .filter(|(_, (&on, _))| on)
        .map(|(n, (_, &w))| Complex64::cis(k * n as f64) * w)
        .sum()
}

/// Array factor of arbitrary complex weights on every grid point, by Horner
/// evaluation of the polynomial in `z = e^{j2πdu}`.
pub fn array_factor_on_grid(weights: &[Complex64], spacing: f64, grid: &[f64]) -> Vec<Complex64> {
    grid.iter()
        .map(|&u| {
            let z = Complex64::cis(2.0 * PI * spacing * u);
            weights
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, w| acc * z + w)
        })
        .collect()
}

/// `|A(u)|²` normalised so that its maximum over the grid is exactly 1.
pub fn normalized_power_pattern(layout: &ArrayLayout, grid: &[f64]) -> Result<Vec<f64>, PatternError> {
    if grid.is_empty() {
        return Err(PatternError::EmptyGrid);
    }
    if layout.excitations().iter().all(|&w| w == 0.0) {
        return Err(PatternError::AllElementsOff);
    }
    let field = array_factor_on_grid(&layout.weights(), layout.spacing(), grid);
    normalize_power(&field).ok_or(PatternError::AllElementsOff)
}

/// Peak-normalised power of a sampled field; `None` if the field vanishes.
pub fn normalize_power(field: &[Complex64]) -> Option<Vec<f64>> {
    let power: Vec<f64> = field.iter().map(|a| a.norm_sqr()).collect();
    let peak = power.iter().copied().fold(0.0, f64::max);
    (peak > 0.0).then(|| power.iter().map(|p| p / peak).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn assert_close(got: &[Complex64], expected: &[Complex64], tol: f64) {
        assert_eq!(got.len(), expected.len());
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).norm() <= tol, "{g} vs {e}");
        }
    }

    #[test]
    fn dft_of_simple_vectors() {
        let a = dft_pattern_samples(&[c(1.0); 4]).unwrap();
        assert_close(&a, &[c(4.0), c(0.0), c(0.0), c(0.0)], 1e-12);
        let a = dft_pattern_samples(&[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        assert_close(&a, &[c(1.0); 4], 1e-12);
        assert_eq!(dft_pattern_samples(&[c(1.0)]), Err(PatternError::TooShort(1)));
    }

    #[test]
    fn idft_of_impulse_spectrum() {
        let mut a = vec![c(0.0); 8];
        a[0] = c(8.0);
        assert_close(&idft_excitations(&a).unwrap(), &[c(1.0); 8], 1e-12);
    }

    #[test]
    fn non_power_of_two_round_trip() {
        let w: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let back = idft_excitations(&dft_pattern_samples(&w).unwrap()).unwrap();
        assert_close(&back, &w, 1e-12);
    }

    #[test]
    fn directions_wrap_into_visible_range() {
        let u = sample_directions(4, 0.5).unwrap();
        for (g, e) in u.iter().zip([0.0, -0.5, 1.0, 0.5]) {
            assert_abs_diff_eq!(*g, e, epsilon = 1e-15);
        }
        assert_eq!(sample_directions(2, 0.5).unwrap(), vec![0.0, 1.0]);
        assert_eq!(sample_directions(7, 0.3).unwrap()[0], 0.0);
        assert!(matches!(
            sample_directions(4, 0.75),
            Err(PatternError::PeriodTooSmall { .. })
        ));
    }

    #[test]
    fn cyclic_shift_cases() {
        assert_eq!(cyclic_shift(&['a', 'b', 'c', 'd']).unwrap(), vec!['c', 'd', 'a', 'b']);
        assert_eq!(cyclic_shift(&['a', 'b']).unwrap(), vec!['b', 'a']);
        let x = [1, 2, 3, 4, 5, 6];
        assert_eq!(cyclic_shift(&cyclic_shift(&x).unwrap()).unwrap(), x.to_vec());
        assert_eq!(cyclic_shift(&[1, 2, 3]), Err(PatternError::OddLength(3)));
    }

    #[test]
    fn periodic_sinc_values() {
        assert_eq!(periodic_sinc(0.0, 4), 1.0);
        assert_abs_diff_eq!(periodic_sinc(PI / 4.0, 4), 0.0, epsilon = 1e-15);
        // cos(4π)/cos(π) by L'Hôpital
        assert_eq!(periodic_sinc(PI, 4), -1.0);
        assert_eq!(periodic_sinc(PI, 5), 1.0);
        assert_eq!(periodic_sinc(-2.0 * PI, 4), 1.0);
        assert!(periodic_sinc(PI + 1e-14, 4).is_finite());
    }

    #[test]
    fn interpolation_reproduces_samples_on_grid() {
        let w: Vec<Complex64> = (0..8)
            .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let pattern = PatternSamples::from_excitations(&w, 0.5).unwrap();
        let u = sample_directions(8, 0.5).unwrap();
        for (m, &um) in u.iter().enumerate() {
            let got = array_factor_interpolated(&pattern, um);
            assert!((got - pattern.samples()[m]).norm() < 1e-9);
        }

        let mut impulse = vec![c(0.0); 8];
        impulse[0] = c(1.0);
        let single = PatternSamples::new(impulse, 0.5).unwrap();
        assert!((array_factor_interpolated(&single, 0.0) - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn direct_array_factor() {
        let off = ArrayLayout::isophoric(8, 0.5, &[]).unwrap();
        assert_eq!(array_factor_direct(&off, 0.3), c(0.0));

        let one = ArrayLayout::new(
            0.5,
            vec![false, false, true],
            vec![0.0, 0.0, 2.5],
            ExcitationMode::Amplitude,
        )
        .unwrap();
        for u in [-1.0, -0.2, 0.0, 0.7] {
            assert_abs_diff_eq!(array_factor_direct(&one, u).norm(), 2.5, epsilon = 1e-12);
        }

        let validation = ArrayLayout::isophoric(1024, 0.5, &[0, 1, 3, 4, 5, 7, 9]).unwrap();
        assert_abs_diff_eq!(array_factor_direct(&validation, 0.0).re, 7.0, epsilon = 1e-12);
    }

    #[test]
    fn layout_invariants() {
        assert!(matches!(
            ArrayLayout::new(0.5, vec![false], vec![1.0], ExcitationMode::Amplitude),
            Err(PatternError::OffElementRadiates { index: 0, .. })
        ));
        assert!(matches!(
            ArrayLayout::new(0.5, vec![true], vec![0.5], ExcitationMode::Isophoric),
            Err(PatternError::InvalidExcitation { index: 0, .. })
        ));
        assert!(matches!(
            ArrayLayout::new(0.5, vec![true, true], vec![1.0], ExcitationMode::Isophoric),
            Err(PatternError::LengthMismatch { .. })
        ));
        let l = ArrayLayout::isophoric(5, 0.5, &[1, 3]).unwrap();
        assert_eq!(l.mask_string(), "01010");
        assert_eq!(l.active_indices(), vec![1, 3]);
    }

    #[test]
    fn power_pattern_cases() {
        let grid = UGrid::uniform(40).unwrap();
        let single = ArrayLayout::isophoric(4, 0.5, &[2]).unwrap();
        for p in normalized_power_pattern(&single, grid.points()).unwrap() {
            assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
        }

        // |1 + e^{jπu}|² = 2 + 2cos(πu)
        let pair = ArrayLayout::isophoric(2, 0.5, &[0, 1]).unwrap();
        let p = normalized_power_pattern(&pair, grid.points()).unwrap();
        assert_abs_diff_eq!(p[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[40], 0.0, epsilon = 1e-12);
        assert_eq!(p[20], 1.0);

        let validation = ArrayLayout::isophoric(16, 0.5, &[0, 1, 3, 4, 5, 7, 9]).unwrap();
        let grid = UGrid::for_elements(16).unwrap();
        let p = normalized_power_pattern(&validation, grid.points()).unwrap();
        let peak = p.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(grid.points()[peak], 0.0);

        let off = ArrayLayout::isophoric(4, 0.5, &[]).unwrap();
        assert_eq!(
            normalized_power_pattern(&off, grid.points()),
            Err(PatternError::AllElementsOff)
        );
    }

    #[test]
    fn grid_construction() {
        let g = UGrid::for_elements(4).unwrap();
        assert_eq!(g.len(), 65);
        assert_eq!(g.points()[0], -1.0);
        assert_eq!(g.points()[32], 0.0);
        assert_eq!(g.points()[64], 1.0);
        assert_abs_diff_eq!(g.trapezoid(&vec![3.0; 65]), 6.0, epsilon = 1e-12);
    }
}
