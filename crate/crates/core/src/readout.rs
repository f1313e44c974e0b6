//! Single-delay readout: base-phase calibration, the brute-force decision
//! threshold, classification, and noisy accuracy estimates.

use std::io::Write;

use serde::Serialize;

use crate::basis::wavenumber_to_angular;
use crate::dynamics::{perturbative_excite, CouplingSet};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::oracle::{encode_phases, stream_balanced, BooleanFunction, FunctionCharacter, PhaseSet};
use crate::pipeline::Setup;
use crate::signal::{ionization_signal, NoiseModel, ProbeModel};

/// Relative tolerance under which two balanced signals count as tied.
const TIE_RTOL: f64 = 1e-9;

/// Balanced functions evaluated per parallel batch.
const BATCH: usize = 1 << 14;

/// Base phases that bring every level into phase at `tau_star`:
/// `phi_k = (omega_ref - omega_k) tau_star`, so that
/// `phi_k + omega_k tau_star` is the same for all k and the reference
/// level sits at 0°.
pub fn calibrate_phi0(energies: &[f64], tau_star: f64, reference_index: usize) -> Result<PhaseSet> {
    if !(tau_star > 0.0 && tau_star.is_finite()) {
        return Err(Error::domain(format!("readout delay must be positive, got {tau_star}")));
    }
    let reference = *energies.get(reference_index).ok_or_else(|| {
        Error::domain(format!(
            "reference index {reference_index} out of range for {} levels",
            energies.len()
        ))
    })?;
    PhaseSet::new(
        energies
            .iter()
            .map(|&e| (wavenumber_to_angular(reference - e) * tau_star).to_degrees())
            .collect(),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationResult {
    pub phi0: PhaseSet,
    pub tau_star: f64,
    pub s_constant: f64,
    pub s_balanced_max: f64,
    pub threshold: f64,
    pub worst_case_functions: Vec<BooleanFunction>,
    pub balanced_visited: u64,
}

impl CalibrationResult {
    /// Noiseless gap between the constant signal and the closest balanced
    /// one.
    pub fn margin(&self) -> f64 {
        self.s_constant - self.s_balanced_max
    }
}

/// Simulated `S(tau_star)` for `f` on the unshaped couplings with phases
/// `phi0 + 180° f`.
pub fn model_signal(
    f: &BooleanFunction,
    phi0: &PhaseSet,
    tau_star: f64,
    energies: &[f64],
    couplings: &CouplingSet,
    probe: &ProbeModel,
) -> Result<f64> {
    let wp = perturbative_excite(couplings, &encode_phases(f, phi0)?)?;
    Ok(ionization_signal(&wp, probe, energies, tau_star))
}

/// Signals of the constant function and of every balanced function at
/// `tau_star`; the threshold is the midpoint between the constant signal
/// and the largest balanced one.
pub fn compute_threshold(
    phi0: PhaseSet,
    tau_star: f64,
    energies: &[f64],
    couplings: &CouplingSet,
    probe: &ProbeModel,
    exec: Execution,
) -> Result<CalibrationResult> {
    let n = phi0.len();
    if couplings.len() != n || energies.len() != n || probe.amplitudes.len() != n {
        return Err(Error::domain("calibration inputs disagree on register size"));
    }
    if let Some(k) = couplings
        .effective()
        .zip(&probe.amplitudes)
        .position(|(x, &d)| x.norm() * d == 0.0)
    {
        return Err(Error::Calibration(format!(
            "level {k} has zero effective amplitude; constant and balanced signals are not guaranteed to separate"
        )));
    }

    let signal = |f: &BooleanFunction| model_signal(f, &phi0, tau_star, energies, couplings, probe);
    let s_constant = signal(&BooleanFunction::constant(n, false)?)?;

    let mut stream = stream_balanced(n)?;
    let mut s_balanced_max = f64::NEG_INFINITY;
    let mut worst: Vec<BooleanFunction> = Vec::new();
    let mut visited = 0u64;
    loop {
        let batch: Vec<BooleanFunction> = stream.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            break;
        }
        let values = exec.try_map_slice(&batch, signal)?;
        for (f, v) in batch.into_iter().zip(values) {
            visited += 1;
            let tol = TIE_RTOL * s_balanced_max.abs();
            if v > s_balanced_max + tol {
                s_balanced_max = v;
                worst.clear();
                worst.push(f);
            } else if (v - s_balanced_max).abs() <= tol {
                s_balanced_max = s_balanced_max.max(v);
                worst.push(f);
            }
        }
    }

    if !(s_constant > s_balanced_max) {
        return Err(Error::Calibration(format!(
            "constant signal {s_constant} does not exceed balanced maximum {s_balanced_max}"
        )));
    }
    Ok(CalibrationResult {
        phi0,
        tau_star,
        s_constant,
        s_balanced_max,
        threshold: 0.5 * (s_constant + s_balanced_max),
        worst_case_functions: worst,
        balanced_visited: visited,
    })
}

/// Constant at or above the threshold, balanced below it.
pub fn classify(measured: f64, calibration: &CalibrationResult) -> FunctionCharacter {
    if measured >= calibration.threshold {
        FunctionCharacter::Constant
    } else {
        FunctionCharacter::Balanced
    }
}

/// One application of the oracle and one measurement at `tau_star`, with
/// one noise draw from `rng`.
pub fn run_algorithm(
    f: &BooleanFunction,
    calibration: &CalibrationResult,
    setup: &Setup,
    noise: &NoiseModel,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<FunctionCharacter> {
    f.character()?;
    let measured = setup.measure(f, &calibration.phi0)? + noise.sample(rng);
    Ok(classify(measured, calibration))
}

/// Noiseless [`run_algorithm`].
pub fn run_noiseless(
    f: &BooleanFunction,
    calibration: &CalibrationResult,
    setup: &Setup,
) -> Result<FunctionCharacter> {
    let noise = NoiseModel::noiseless();
    run_algorithm(f, calibration, setup, &noise, &mut noise.rng())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

/// Wilson score interval for `successes` out of `trials` at normal
/// quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Interval {
    if trials == 0 {
        return Interval { low: 0.0, high: 1.0 };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Interval {
        low: (center - half).max(0.0),
        high: (center + half).min(1.0),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionAccuracy {
    pub function: BooleanFunction,
    pub truth: FunctionCharacter,
    pub trials: u64,
    pub correct: u64,
    pub accuracy: f64,
    pub interval: Interval,
}

#[derive(Debug, Clone, Serialize)]
pub struct AccuracyReport {
    pub trials: u64,
    pub correct: u64,
    pub accuracy: f64,
    /// 95% Wilson interval.
    pub interval: Interval,
    pub per_function_sigma: f64,
    pub per_function: Vec<FunctionAccuracy>,
}

/// Runs `trials` single-shot classifications, cycling through
/// `functions`. Trial `i` tests `functions[i % len]` with noise seeded
/// from `(noise.seed, i)`, so the report does not depend on how trials are
/// scheduled.
pub fn accuracy_monte_carlo(
    setup: &Setup,
    calibration: &CalibrationResult,
    functions: &[BooleanFunction],
    noise: &NoiseModel,
    trials: u64,
    exec: Execution,
) -> Result<AccuracyReport> {
    if functions.is_empty() {
        return Err(Error::domain("no functions to test"));
    }
    let truths = functions
        .iter()
        .map(|f| f.character())
        .collect::<Result<Vec<_>>>()?;
    let outcomes = exec.map_range(trials as usize, |i| {
        let f = &functions[i % functions.len()];
        let task = noise.for_task(i as u64);
        run_algorithm(f, calibration, setup, &task, &mut task.rng())
    });

    let mut per_correct = vec![0u64; functions.len()];
    let mut per_trials = vec![0u64; functions.len()];
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let slot = i % functions.len();
        per_trials[slot] += 1;
        if outcome? == truths[slot] {
            per_correct[slot] += 1;
        }
    }
    let correct: u64 = per_correct.iter().sum();
    let per_function = functions
        .iter()
        .zip(&truths)
        .zip(per_correct.iter().zip(&per_trials))
        .map(|((f, &truth), (&c, &t))| FunctionAccuracy {
            function: *f,
            truth,
            trials: t,
            correct: c,
            accuracy: if t == 0 { f64::NAN } else { c as f64 / t as f64 },
            interval: wilson_interval(c, t, 1.96),
        })
        .collect();
    Ok(AccuracyReport {
        trials,
        correct,
        accuracy: if trials == 0 { f64::NAN } else { correct as f64 / trials as f64 },
        interval: wilson_interval(correct, trials, 1.96),
        per_function_sigma: noise.per_point_sigma(),
        per_function,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginRow {
    pub function: BooleanFunction,
    pub truth: FunctionCharacter,
    pub signal: f64,
    pub classified: FunctionCharacter,
    /// Distance from the threshold, positive on the correct side.
    pub margin: f64,
}

pub fn margin_report(
    setup: &Setup,
    calibration: &CalibrationResult,
    functions: &[BooleanFunction],
    exec: Execution,
) -> Result<Vec<MarginRow>> {
    exec.try_map_slice(functions, |f| {
        let truth = f.character()?;
        let signal = setup.measure(f, &calibration.phi0)?;
        let classified = classify(signal, calibration);
        let margin = match truth {
            FunctionCharacter::Constant => signal - calibration.threshold,
            FunctionCharacter::Balanced => calibration.threshold - signal,
        };
        Ok(MarginRow {
            function: *f,
            truth,
            signal,
            classified,
            margin,
        })
    })
}

pub fn write_margin_csv<W: Write>(rows: &[MarginRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["function_bits", "character_truth", "signal_at_tau_star", "classified_as", "margin"])?;
    for r in rows {
        w.write_record([
            r.function.to_string(),
            r.truth.to_string(),
            format!("{:.15e}", r.signal),
            r.classified.to_string(),
            format!("{:.15e}", r.margin),
        ])?;
    }
    w.flush()?;
    Ok(())
}
