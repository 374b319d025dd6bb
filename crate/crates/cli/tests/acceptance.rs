//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qthin::{report_speedup, run_assess, run_noise, run_validate, ExperimentConfig};
use qthin_core::pattern::{array_factor_interpolated, dft_pattern_samples, idft_excitations, PatternSamples};
use qthin_core::qsim::{build_iqft, probabilities, run_circuit, Statevector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VALIDATION: [usize; 7] = [0, 1, 3, 4, 5, 7, 9];

type Check = Result<String, String>;

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).expect("acceptance config parses")
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn validation_recovery() -> Check {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let outcome = run_validate(
        &config("experiment = \"validate\"\nn = 1024\nd = 0.5\nindices = [0, 1, 3, 4, 5, 7, 9]\n"),
        out.path(),
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    let report = outcome.cells[0].report.as_ref().ok_or("no feasible thinning")?;
    ensure(report.k == 7, || format!("K = {}", report.k))?;
    ensure(outcome.recovered[0], || "B differs from the reference".into())?;
    let mut worst_on: f64 = 0.0;
    let mut worst_off: f64 = 0.0;
    for (n, &p) in outcome.probabilities.iter().enumerate() {
        if VALIDATION.contains(&n) {
            worst_on = worst_on.max((p - 1.0 / 7.0).abs());
        } else {
            worst_off = worst_off.max(p.abs());
        }
    }
    ensure(worst_on < 1e-10, || format!("|p - 1/7| = {worst_on:e} at an active"))?;
    ensure(worst_off < 1e-12, || format!("p = {worst_off:e} at an inactive"))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "K=7, B matches, max|p-1/7|={worst_on:.1e}, max off={worst_off:.1e}"
    ))
}

fn iqft_correctness() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for l in 1..=10 {
        let n = 1usize << l;
        let circuit = build_iqft(l).map_err(|e| e.to_string())?;
        let scale = 1.0 / (n as f64).sqrt();
        let kernel: Vec<Complex64> = (0..n)
            .map(|k| Complex64::cis(2.0 * PI * k as f64 / n as f64) * scale)
            .collect();
        for _ in 0..100 {
            let state = Statevector::new(random_vector(n, &mut rng)).map_err(|e| e.to_string())?;
            let oracle: Vec<f64> = (0..n)
                .map(|row| {
                    state
                        .amplitudes()
                        .iter()
                        .enumerate()
                        .map(|(col, a)| a * kernel[(row * col) % n])
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .collect();
            let got = probabilities(&run_circuit(state, &circuit).map_err(|e| e.to_string())?);
            for (g, o) in got.iter().zip(&oracle) {
                worst = worst.max((g - o).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(worst < 1e-10, || format!("max deviation {worst:e}"))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("max deviation {worst:.1e} over L=1..10"))
}

fn shots_stability() -> Check {
    let n = 1024;
    let mut layouts = Vec::new();
    for shots in [n / 2, n, 2 * n, 4 * n] {
        for seed in 0..5 {
            let out = tempfile::tempdir().map_err(|e| e.to_string())?;
            let text = format!(
                "experiment = \"validate\"\nn = {n}\nindices = [0, 1, 3, 4, 5, 7, 9]\nreadout = \"shots\"\nshots = {shots}\nseed = {seed}\n"
            );
            let outcome = run_validate(&config(&text), out.path()).map_err(|e| e.to_string())?;
            let report = outcome.cells[0]
                .report
                .as_ref()
                .ok_or_else(|| format!("R={shots} seed={seed}: infeasible"))?;
            layouts.push((shots, seed, report.b.clone()));
        }
    }
    let first = &layouts[0].2;
    for (shots, seed, b) in &layouts {
        ensure(b == first, || format!("R={shots} seed={seed} recovers a different B"))?;
    }
    let active: Vec<usize> = (0..n).filter(|&i| first[i] == 1).collect();
    ensure(active == VALIDATION, || format!("recovered {active:?}"))?;
    Ok(format!("{} runs, identical B = {active:?}", layouts.len()))
}

fn noise_robustness() -> Check {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let text = "experiment = \"noise\"\nn = 1024\nindices = [0, 1, 3, 4, 5, 7, 9]\nsnr_db = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0]\nseeds = 10\n";
    let outcome = run_noise(&config(text), out.path()).map_err(|e| e.to_string())?;
    // claimed gap exponents, relaxed by one order of magnitude
    let claims = [(0.0, 1), (10.0, 3), (20.0, 4), (30.0, 5), (40.0, 6), (50.0, 6)];
    let mut summary = Vec::new();
    for (snr, exponent) in claims {
        let cells: Vec<_> = outcome.cells.iter().filter(|c| c.snr_db == snr).collect();
        ensure(cells.len() == 10, || format!("{} seeds at {snr} dB", cells.len()))?;
        for c in &cells {
            ensure(c.top_match, || {
                format!("{snr} dB seed {}: actives not in ranks 0-6", c.seed)
            })?;
        }
        let min_gap = cells.iter().map(|c| c.gap_ratio).fold(f64::INFINITY, f64::min);
        let bound = 10f64.powi(exponent - 1);
        ensure(min_gap > bound, || {
            format!("{snr} dB: min p6/p7 = {min_gap:.3e} <= {bound:e}")
        })?;
        summary.push(format!("{snr}dB:{min_gap:.1e}"));
    }
    Ok(format!("top-7 always the actives; min p6/p7 {}", summary.join(" ")))
}

struct AssessGrid {
    levels: Vec<f64>,
    etas: Vec<f64>,
    /// `k[row][col]` for level row and threshold column.
    k: Vec<Vec<Option<usize>>>,
    tau: Vec<Vec<Option<f64>>>,
}

fn assess_grid() -> Result<AssessGrid, String> {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let text = "experiment = \"assess\"\nn = 256\nsll_ref_db = [-10.0, -12.5, -15.0]\neta = [0.05, 0.025, 0.0125]\n";
    let outcome = run_assess(&config(text), out.path()).map_err(|e| e.to_string())?;
    let levels = vec![-10.0, -12.5, -15.0];
    let etas = vec![0.05, 0.025, 0.0125];
    let lookup = |sll: f64, eta: f64| {
        outcome
            .cells
            .iter()
            .find(|c| c.sll_ref_db == Some(sll) && c.eta == eta)
            .and_then(|c| c.report.as_ref())
    };
    let k = levels
        .iter()
        .map(|&s| etas.iter().map(|&e| lookup(s, e).map(|r| r.k)).collect())
        .collect();
    let tau = levels
        .iter()
        .map(|&s| etas.iter().map(|&e| lookup(s, e).map(|r| r.tau_percent)).collect())
        .collect();
    Ok(AssessGrid { levels, etas, k, tau })
}

fn format_grid(grid: &AssessGrid) -> String {
    grid.k
        .iter()
        .zip(&grid.levels)
        .map(|(row, sll)| {
            let ks: Vec<String> = row
                .iter()
                .map(|k| k.map(|k| k.to_string()).unwrap_or_else(|| "-".into()))
                .collect();
            format!("{sll}dB:[{}]", ks.join(","))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn assess_rows(grid: &AssessGrid) -> Check {
    for (row, sll) in grid.k.iter().zip(&grid.levels) {
        for (col, pair) in row.windows(2).enumerate() {
            let (Some(a), Some(b)) = (pair[0], pair[1]) else {
                return Err(format!("{sll} dB: infeasible cell"));
            };
            ensure(b >= a, || {
                format!("{sll} dB: K falls from {a} to {b} at eta={}", grid.etas[col + 1])
            })?;
        }
    }
    Ok(format!("K(eta) {}", format_grid(grid)))
}

fn assess_columns(grid: &AssessGrid) -> Check {
    for (col, eta) in grid.etas.iter().enumerate() {
        for row in 1..grid.levels.len() {
            let (Some(a), Some(b)) = (grid.k[row - 1][col], grid.k[row][col]) else {
                return Err(format!("eta={eta}: infeasible cell"));
            };
            ensure(b >= a, || {
                format!(
                    "eta={eta}: K falls from {a} to {b} between {} and {} dB; K grid {}",
                    grid.levels[row - 1],
                    grid.levels[row],
                    format_grid(grid)
                )
            })?;
        }
    }
    Ok(format!("K(SLL) {}", format_grid(grid)))
}

fn assess_tau(grid: &AssessGrid) -> Check {
    let n = 256.0;
    for (krow, trow) in grid.k.iter().zip(&grid.tau) {
        for (k, tau) in krow.iter().zip(trow) {
            if let (Some(k), Some(tau)) = (k, tau) {
                let expected = 100.0 * (n - *k as f64) / n;
                ensure(*tau == expected, || format!("K={k}: tau {tau} != {expected}"))?;
            }
        }
    }
    let formula = |k: f64| 100.0 * (n - k) / n;
    ensure((formula(24.0) - 90.62).abs() <= 0.005 + 1e-12, || "K=24".into())?;
    ensure((formula(112.0) - 56.25).abs() < 1e-12, || "K=112".into())?;
    Ok("tau = 100(N-K)/N for every cell; K=24 -> 90.62%, K=112 -> 56.25%".into())
}

fn interpolation_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let samples = random_vector(64, &mut rng);
        let pattern = PatternSamples::new(samples.clone(), 0.5).map_err(|e| e.to_string())?;
        // excitations by direct inverse summation
        let w: Vec<Complex64> = (0..64)
            .map(|n| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(m, a)| a * Complex64::cis(2.0 * PI * (m * n) as f64 / 64.0))
                    .sum::<Complex64>()
                    / 64.0
            })
            .collect();
        for _ in 0..64 {
            let u: f64 = rng.random_range(-1.0..=1.0);
            let direct: Complex64 = w
                .iter()
                .enumerate()
                .map(|(n, x)| x * Complex64::cis(PI * u * n as f64))
                .sum();
            worst = worst.max((array_factor_interpolated(&pattern, u) - direct).norm());
        }
    }
    ensure(worst < 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e} over 3200 points"))
}

fn gate_counts() -> Check {
    for l in 1..=16 {
        let total = build_iqft(l).map_err(|e| e.to_string())?.len();
        let law = l + l * (l - 1) / 2 + l / 2;
        ensure(total == law, || format!("L={l}: {total} gates, law gives {law}"))?;
    }
    let r1024 = report_speedup(1024).map_err(|e| e.to_string())?.ratio;
    let r256 = report_speedup(256).map_err(|e| e.to_string())?.ratio;
    ensure((r1024 / 147.7 - 1.0).abs() < 0.01, || format!("N=1024 ratio {r1024}"))?;
    ensure((r256 / 46.2 - 1.0).abs() < 0.01, || format!("N=256 ratio {r256}"))?;
    Ok(format!(
        "law holds for L=1..16; N/lnN = {r1024:.1} (1024), {r256:.1} (256)"
    ))
}

fn fft_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_parseval: f64 = 0.0;
    let mut worst_round_trip: f64 = 0.0;
    for n in [16, 256, 1024] {
        for _ in 0..20 {
            let w = random_vector(n, &mut rng);
            let a = dft_pattern_samples(&w).map_err(|e| e.to_string())?;
            let lhs: f64 = a.iter().map(|x| x.norm_sqr()).sum();
            let rhs = n as f64 * w.iter().map(|x| x.norm_sqr()).sum::<f64>();
            worst_parseval = worst_parseval.max((lhs - rhs).abs() / rhs);
            let back = idft_excitations(&a).map_err(|e| e.to_string())?;
            let scale = w.iter().map(|x| x.norm()).fold(0.0, f64::max);
            for (b, x) in back.iter().zip(&w) {
                worst_round_trip = worst_round_trip.max((b - x).norm() / scale);
            }
        }
    }
    ensure(worst_parseval < 1e-9, || format!("Parseval error {worst_parseval:e}"))?;
    ensure(worst_round_trip < 1e-9, || {
        format!("round-trip error {worst_round_trip:e}")
    })?;
    Ok(format!(
        "Parseval {worst_parseval:.1e}, round trip {worst_round_trip:.1e} (relative)"
    ))
}

fn check(id: &str, title: &str, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(detail) => {
            println!("[PASS] {id:<3} {title}: {detail} ({secs:.2}s)");
            true
        }
        Err(detail) => {
            println!("[FAIL] {id:<3} {title}: {detail} ({secs:.2}s)");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut results = vec![
        check("1", "validation recovery", validation_recovery),
        check("2", "IQFT against dense IDFT", iqft_correctness),
        check("3", "shots stability", shots_stability),
        check("4", "noise robustness", noise_robustness),
    ];
    match assess_grid() {
        Ok(grid) => {
            results.push(check("5a", "K non-decreasing as eta tightens", || assess_rows(&grid)));
            results.push(check("5b", "K non-decreasing as SLL_ref deepens", || {
                assess_columns(&grid)
            }));
            results.push(check("5c", "thinning percentage", || assess_tau(&grid)));
        }
        Err(e) => {
            for id in ["5a", "5b", "5c"] {
                results.push(check(id, "assessment grid", || Err(e.clone())));
            }
        }
    }
    results.push(check("6", "interpolation equivalence", interpolation_equivalence));
    results.push(check("7", "gate-count law and speedup", gate_counts));
    results.push(check("8", "Parseval and FFT round trip", fft_properties));

    let failed = results.iter().filter(|&&ok| !ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
