//! Experiment orchestration behind the command line: each `cmd_*` computes
//! a report, each `write_*` stores one in an output directory.
//!
//! Work is fanned out through [`Execution`], but results come back in task
//! order and files are written one at a time afterwards, so the output of
//! a run depends only on its configuration and seed.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{
    load_config, CouplingConfig, DelayGridConfig, LevelLabel, NoiseConfig, ProbeConfig, PulseConfig, RegisterConfig,
    RunConfig, ShaperConfig, ValidationConfig, SEED_ENV,
};

use crate::dynamics::{convergence_study, ConvergenceReport};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::oracle::{encode_phases, stream_all, BooleanFunction, FunctionCharacter, PhaseSet};
use crate::pipeline::Setup;
use crate::readout::{
    accuracy_monte_carlo, calibrate_phi0, margin_report, write_margin_csv, AccuracyReport, CalibrationResult,
    MarginRow,
};
use crate::signal::{add_noise, NoiseModel, Transient};

/// Comment line that opens every CSV output.
pub fn header_line(config: &RunConfig) -> String {
    format!("# wpdj config_sha256={} seed={}", config.hash(), config.seed)
}

/// `bits character` per line, constants first.
pub fn cmd_enumerate(inputs: usize) -> Result<Vec<(BooleanFunction, FunctionCharacter)>> {
    stream_all(inputs)?
        .map(|f| Ok((f, f.character()?)))
        .collect()
}

pub fn write_enumeration<W: Write>(rows: &[(BooleanFunction, FunctionCharacter)], mut out: W) -> Result<()> {
    for (f, c) in rows {
        writeln!(out, "{f} {c}")?;
    }
    Ok(())
}

/// Base phases: the configured override, or the calibrated alignment at
/// the readout delay.
pub fn base_phases(config: &RunConfig, setup: &Setup) -> Result<PhaseSet> {
    match &config.phi0_deg {
        Some(phi0) => PhaseSet::new(phi0.clone()),
        None => calibrate_phi0(
            &setup.energies(),
            setup.tau_star,
            config.reference_index.unwrap_or(setup.len() - 1),
        ),
    }
}

/// One transient per selected function over the configured delay grid.
/// Noise is added only when the config gives an explicit `noise.sigma`;
/// the i-th selected function draws from task `i` of the seed.
pub fn cmd_transients(config: &RunConfig, functions: &[BooleanFunction], exec: Execution) -> Result<Vec<Transient>> {
    if functions.is_empty() {
        return Err(Error::Selection("no functions selected".into()));
    }
    let mut unique: Vec<BooleanFunction> = Vec::with_capacity(functions.len());
    for f in functions {
        if !unique.contains(f) {
            unique.push(*f);
        }
    }
    let setup = config.setup()?;
    let phi0 = base_phases(config, &setup)?;
    let delays = config.delays()?;
    let noise = config.noise_model()?;
    let indexed: Vec<(usize, BooleanFunction)> = unique.into_iter().enumerate().collect();
    exec.try_map_slice(&indexed, |(i, f)| {
        f.character()?;
        let t = setup.transient_for(f, &phi0, &delays)?;
        Ok(match &noise {
            Some(n) => add_noise(&t, &n.for_task(*i as u64)),
            None => t,
        })
    })
}

pub fn transient_path(dir: &Path, t: &Transient) -> PathBuf {
    dir.join(format!("transient_{}.csv", t.function.as_deref().unwrap_or("unlabeled")))
}

pub fn write_transients(dir: &Path, config: &RunConfig, transients: &[Transient]) -> Result<Vec<PathBuf>> {
    let header = header_line(config);
    transients
        .iter()
        .map(|t| {
            let path = transient_path(dir, t);
            write_with_header(&path, &header, |w| t.write_csv(w))?;
            Ok(path)
        })
        .collect()
}

pub fn cmd_calibrate(config: &RunConfig, exec: Execution) -> Result<CalibrationResult> {
    let setup = config.setup()?;
    let phi0 = base_phases(config, &setup)?;
    setup.threshold_for(phi0, exec)
}

#[derive(Debug, Clone, Serialize)]
pub struct DjReport {
    pub calibration: CalibrationResult,
    pub margins: Vec<MarginRow>,
    pub noiseless_correct: usize,
    pub functions: usize,
    pub noise: NoiseModel,
    pub accuracy: AccuracyReport,
}

impl DjReport {
    pub fn noiseless_perfect(&self) -> bool {
        self.noiseless_correct == self.functions
    }
}

/// Calibrates, classifies every function once without noise, then runs
/// the noisy Monte Carlo over all of them.
pub fn cmd_dj(config: &RunConfig, exec: Execution) -> Result<DjReport> {
    let setup = config.setup()?;
    let phi0 = base_phases(config, &setup)?;
    let calibration = setup.threshold_for(phi0, exec)?;
    let functions: Vec<BooleanFunction> = stream_all(setup.len())?.collect();
    let margins = margin_report(&setup, &calibration, &functions, exec)?;
    let noiseless_correct = margins.iter().filter(|r| r.classified == r.truth).count();
    let noise = match config.noise_model()? {
        Some(n) => n,
        None => NoiseModel::with_per_point_sigma(
            config.noise.margin_fraction * calibration.margin(),
            config.noise.sequences,
            config.seed,
        )?,
    };
    let accuracy = accuracy_monte_carlo(&setup, &calibration, &functions, &noise, config.noise.trials, exec)?;
    Ok(DjReport {
        calibration,
        margins,
        noiseless_correct,
        functions: functions.len(),
        noise,
        accuracy,
    })
}

/// First-order vs Schrödinger propagation for the constant function's
/// pulse, over the configured field scales.
pub fn cmd_validate(config: &RunConfig, exec: Execution) -> Result<ConvergenceReport> {
    let setup = config.setup()?;
    let phi0 = base_phases(config, &setup)?;
    let phases = encode_phases(&BooleanFunction::constant(setup.len(), false)?, &phi0)?;
    let couplings = setup.propagation_couplings(&phases)?;
    convergence_study(
        &couplings,
        &config.profile()?,
        &setup.energies(),
        &config.validation.field_scales,
        exec,
    )
}

fn write_with_header(path: &Path, header: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    config_sha256: String,
    seed: u64,
    #[serde(flatten)]
    body: &'a T,
}

fn write_json<T: Serialize>(path: &Path, config: &RunConfig, body: &T) -> Result<()> {
    let tagged = Tagged {
        config_sha256: config.hash(),
        seed: config.seed,
        body,
    };
    let text = serde_json::to_string_pretty(&tagged).map_err(|e| Error::Table(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// `effective_config.json`, a reloadable copy of the resolved config.
pub fn write_effective_config(dir: &Path, config: &RunConfig) -> Result<PathBuf> {
    let path = dir.join("effective_config.json");
    std::fs::write(&path, config.echo())?;
    Ok(path)
}

pub fn write_calibration(dir: &Path, config: &RunConfig, calibration: &CalibrationResult) -> Result<PathBuf> {
    let path = dir.join("calibration.json");
    write_json(&path, config, calibration)?;
    Ok(path)
}

#[derive(Serialize)]
struct DjSummary<'a> {
    functions: usize,
    noiseless_correct: usize,
    threshold: f64,
    margin: f64,
    worst_case_functions: &'a [BooleanFunction],
    noise: &'a NoiseModel,
    trials: u64,
    correct: u64,
    accuracy: f64,
    accuracy_low: f64,
    accuracy_high: f64,
}

/// `calibration.json`, `margin_report.csv`, `accuracy.csv` and
/// `dj_summary.json`.
pub fn write_dj(dir: &Path, config: &RunConfig, report: &DjReport) -> Result<Vec<PathBuf>> {
    let header = header_line(config);
    let calibration = write_calibration(dir, config, &report.calibration)?;
    let margins = dir.join("margin_report.csv");
    write_with_header(&margins, &header, |w| write_margin_csv(&report.margins, w))?;

    let accuracy = dir.join("accuracy.csv");
    write_with_header(&accuracy, &header, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["function_bits", "character_truth", "trials", "correct", "accuracy", "ci_low", "ci_high"])?;
        for a in &report.accuracy.per_function {
            csv.write_record([
                a.function.to_string(),
                a.truth.to_string(),
                a.trials.to_string(),
                a.correct.to_string(),
                format!("{:.6}", a.accuracy),
                format!("{:.6}", a.interval.low),
                format!("{:.6}", a.interval.high),
            ])?;
        }
        csv.flush()?;
        Ok(())
    })?;

    let summary = dir.join("dj_summary.json");
    let acc = &report.accuracy;
    write_json(
        &summary,
        config,
        &DjSummary {
            functions: report.functions,
            noiseless_correct: report.noiseless_correct,
            threshold: report.calibration.threshold,
            margin: report.calibration.margin(),
            worst_case_functions: &report.calibration.worst_case_functions,
            noise: &report.noise,
            trials: acc.trials,
            correct: acc.correct,
            accuracy: acc.accuracy,
            accuracy_low: acc.interval.low,
            accuracy_high: acc.interval.high,
        },
    )?;
    Ok(vec![calibration, margins, accuracy, summary])
}

/// `convergence.csv` with the fitted slopes as comment lines.
pub fn write_convergence(dir: &Path, config: &RunConfig, report: &ConvergenceReport) -> Result<PathBuf> {
    let path = dir.join("convergence.csv");
    write_with_header(&path, &header_line(config), |w| {
        writeln!(w, "# population_slope={:.6}", report.population_slope)?;
        writeln!(w, "# amplitude_slope={:.6}", report.amplitude_slope)?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "field_scale",
            "excited_population",
            "first_order_population",
            "population_error",
            "first_order_error",
            "amplitude_error",
            "norm_drift",
        ])?;
        for r in &report.rows {
            csv.write_record([
                format!("{:e}", r.field_scale),
                format!("{:.15e}", r.excited_population),
                format!("{:.15e}", r.first_order_population),
                format!("{:.6e}", r.population_error),
                format!("{:.6e}", r.first_order_error),
                format!("{:.6e}", r.amplitude_error),
                format!("{:.3e}", r.norm_drift),
            ])?;
        }
        csv.flush()?;
        Ok(())
    })?;
    Ok(path)
}
