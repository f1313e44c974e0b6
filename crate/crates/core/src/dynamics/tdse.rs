//! Fixed-step RK4 propagation of the launch level coupled to the excited
//! manifold, in the interaction picture.
//!
//! State index 0 is the launch level (its own Hamiltonian set to zero),
//! indices 1..=N are the excited levels. With `Omega_k(t) = s mu_k eps_k
//! g(t) exp(i delta_k t)`, where `g` is the area-normalized Gaussian
//! temporal envelope:
//!
//! ```text
//! d psi_k / dt = -i Omega_k(t) psi_0
//! d psi_0 / dt = -i sum_k conj(Omega_k(t)) psi_k
//! ```

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use super::{perturbative_excite, CouplingSet, WavePacket};
use crate::basis::wavenumber_to_angular;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::oracle::PhaseSet;

/// Largest tolerated drift of the full state norm over one run.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

const FS_PER_PS: f64 = 1000.0;

/// Gaussian pump pulse in time. All fields in fs; t = 0 is the pulse peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseTemporalProfile {
    /// Intensity FWHM.
    pub duration_fwhm: f64,
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl PulseTemporalProfile {
    pub fn new(duration_fwhm: f64, start: f64, end: f64, step: f64) -> Result<Self> {
        if !(duration_fwhm > 0.0 && duration_fwhm.is_finite()) {
            return Err(Error::domain(format!(
                "pulse duration must be positive, got {duration_fwhm}"
            )));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::domain(format!("time step must be positive, got {step}")));
        }
        if !(start <= -3.0 * duration_fwhm && end >= 3.0 * duration_fwhm) {
            return Err(Error::domain(format!(
                "time grid [{start}, {end}] fs must span at least ±3 FWHM ({} fs)",
                3.0 * duration_fwhm
            )));
        }
        Ok(PulseTemporalProfile {
            duration_fwhm,
            start,
            end,
            step,
        })
    }

    /// Grid `[-span_fwhm * T, +span_fwhm * T]`.
    pub fn centered(duration_fwhm: f64, span_fwhm: f64, step: f64) -> Result<Self> {
        let half = span_fwhm * duration_fwhm;
        Self::new(duration_fwhm, -half, half, step)
    }

    /// Largest step (fs) that resolves the fastest beat among `energies`
    /// (cm⁻¹): `1 / (20 max|omega_k - omega_l|)`.
    pub fn max_step_for(energies: &[f64]) -> f64 {
        let (lo, hi) = energies
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        let spread = wavenumber_to_angular(hi - lo);
        if spread > 0.0 {
            FS_PER_PS / (20.0 * spread)
        } else {
            f64::INFINITY
        }
    }

    /// Centered grid with the step picked by [`Self::max_step_for`], capped
    /// at `cap` fs.
    pub fn resolving(duration_fwhm: f64, span_fwhm: f64, energies: &[f64], cap: f64) -> Result<Self> {
        Self::centered(duration_fwhm, span_fwhm, Self::max_step_for(energies).min(cap))
    }

    pub fn check_resolution(&self, energies: &[f64]) -> Result<()> {
        let limit = Self::max_step_for(energies);
        if self.step > limit {
            return Err(Error::domain(format!(
                "time step {} fs does not resolve level beats (needs <= {limit:.4} fs)",
                self.step
            )));
        }
        Ok(())
    }

    /// Area-normalized field envelope at `t_ps` (1/ps), so that its
    /// integral over all time is 1.
    pub fn envelope(&self, t_ps: f64) -> f64 {
        let width = self.duration_fwhm / FS_PER_PS;
        let area = width * (PI / (2.0 * LN_2)).sqrt();
        (-2.0 * LN_2 * (t_ps / width).powi(2)).exp() / area
    }

    pub fn steps(&self) -> usize {
        ((self.end - self.start) / self.step).ceil().max(1.0) as usize
    }
}

/// Result of one propagation.
#[derive(Debug, Clone)]
pub struct TdseOutcome {
    /// Excited amplitudes in the Schrödinger picture at `time_ref`.
    pub amplitudes: Vec<Complex64>,
    /// Amplitude left on the launch level.
    pub launch_amplitude: Complex64,
    pub excited_population: f64,
    pub norm_drift: f64,
    /// Grid end, ps after the pulse peak.
    pub time_ref: f64,
}

impl TdseOutcome {
    /// Excited amplitudes renormalized over the excited manifold.
    pub fn packet(&self) -> Result<WavePacket> {
        if self.excited_population <= 0.0 {
            return Err(Error::NoExcitation);
        }
        let norm = self.excited_population.sqrt();
        WavePacket::new(
            self.amplitudes.iter().map(|c| c / norm).collect(),
            self.time_ref,
        )
    }
}

pub fn propagate_tdse(
    couplings: &CouplingSet,
    profile: &PulseTemporalProfile,
    energies: &[f64],
    field_scale: f64,
) -> Result<TdseOutcome> {
    if energies.len() != couplings.len() {
        return Err(Error::domain(format!(
            "{} energies for {} couplings",
            energies.len(),
            couplings.len()
        )));
    }
    if !(field_scale >= 0.0 && field_scale.is_finite()) {
        return Err(Error::domain(format!(
            "field scale must be non-negative, got {field_scale}"
        )));
    }
    profile.check_resolution(energies)?;

    let strengths: Vec<Complex64> = couplings.effective().map(|x| x * field_scale).collect();
    let detunings: Vec<f64> = couplings
        .detunings()
        .iter()
        .map(|&d| wavenumber_to_angular(d))
        .collect();

    let rhs = |t: f64, psi: &[Complex64], out: &mut [Complex64]| {
        let g = profile.envelope(t);
        let mut launch = Complex64::new(0.0, 0.0);
        for k in 0..strengths.len() {
            let omega = strengths[k] * g * Complex64::from_polar(1.0, detunings[k] * t);
            out[k + 1] = Complex64::new(0.0, -1.0) * omega * psi[0];
            launch += omega.conj() * psi[k + 1];
        }
        out[0] = Complex64::new(0.0, -1.0) * launch;
    };

    let dim = couplings.len() + 1;
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    psi[0] = Complex64::new(1.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (psi.clone(), psi.clone(), psi.clone(), psi.clone());
    let mut scratch = psi.clone();

    let start = profile.start / FS_PER_PS;
    let end = profile.end / FS_PER_PS;
    let steps = profile.steps();
    let h = (end - start) / steps as f64;
    let mut drift: f64 = 0.0;

    for i in 0..steps {
        let t = start + i as f64 * h;
        rhs(t, &psi, &mut k1);
        for j in 0..dim {
            scratch[j] = psi[j] + k1[j] * (h / 2.0);
        }
        rhs(t + h / 2.0, &scratch, &mut k2);
        for j in 0..dim {
            scratch[j] = psi[j] + k2[j] * (h / 2.0);
        }
        rhs(t + h / 2.0, &scratch, &mut k3);
        for j in 0..dim {
            scratch[j] = psi[j] + k3[j] * h;
        }
        rhs(t + h, &scratch, &mut k4);
        for j in 0..dim {
            psi[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
        }
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        drift = drift.max((norm - 1.0).abs());
    }

    if drift > NORM_DRIFT_LIMIT {
        return Err(Error::IntegrationAccuracy {
            drift,
            limit: NORM_DRIFT_LIMIT,
        });
    }

    let amplitudes: Vec<Complex64> = psi[1..]
        .iter()
        .zip(energies)
        .map(|(c, &e)| c * Complex64::from_polar(1.0, -wavenumber_to_angular(e) * end))
        .collect();
    Ok(TdseOutcome {
        excited_population: amplitudes.iter().map(|c| c.norm_sqr()).sum(),
        amplitudes,
        launch_amplitude: psi[0],
        norm_drift: drift,
        time_ref: end,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub field_scale: f64,
    pub excited_population: f64,
    /// `s^2 sum_k |mu_k eps_k|^2`
    pub first_order_population: f64,
    /// `|P - P1| / P1`
    pub population_error: f64,
    /// `max_k |psi_k / s - (-i) x_k exp(-i omega_k t)| / max_k |x_k|`, the
    /// deviation of the raw amplitudes from first order.
    pub first_order_error: f64,
    /// Max elementwise distance of the renormalized packet from the
    /// perturbative one (global phase removed).
    pub amplitude_error: f64,
    pub norm_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares log-log slope of `population_error` against scale.
    pub population_slope: f64,
    /// Same for `first_order_error`.
    pub amplitude_slope: f64,
}

impl ConvergenceReport {
    /// True when `first_order_error` strictly decreases as the scale does.
    pub fn monotone(&self) -> bool {
        let mut rows: Vec<&ConvergenceRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| b.field_scale.total_cmp(&a.field_scale));
        rows.windows(2)
            .all(|w| w[1].first_order_error < w[0].first_order_error)
    }

    /// Decades between the largest and smallest scale.
    pub fn decades(&self) -> f64 {
        let (lo, hi) = self
            .rows
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.field_scale), hi.max(r.field_scale)));
        (hi / lo).log10()
    }

    pub fn smallest_scale(&self) -> Option<&ConvergenceRow> {
        self.rows
            .iter()
            .min_by(|a, b| a.field_scale.total_cmp(&b.field_scale))
    }
}

fn log_log_slope(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Propagates once per field scale and compares against first order.
pub fn convergence_study(
    couplings: &CouplingSet,
    profile: &PulseTemporalProfile,
    energies: &[f64],
    scales: &[f64],
    exec: Execution,
) -> Result<ConvergenceReport> {
    if scales.is_empty() {
        return Err(Error::domain("field scale list is empty"));
    }
    if scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::domain("field scales must be positive"));
    }
    let zero = PhaseSet::zeros(couplings.len());
    let reference = perturbative_excite(couplings, &zero)?;
    let x: Vec<Complex64> = couplings.effective().collect();
    let x_max = x.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let p1_unit: f64 = x.iter().map(|c| c.norm_sqr()).sum();

    let rows = exec.try_map_slice(scales, |&s| -> Result<ConvergenceRow> {
        let out = propagate_tdse(couplings, profile, energies, s)?;
        let predicted = reference.evolve(energies, out.time_ref);
        let amplitude_error = out.packet()?.distance_up_to_global_phase(&predicted);
        let first_order_error = out
            .amplitudes
            .iter()
            .zip(&x)
            .zip(energies)
            .map(|((c, xk), &e)| {
                let phase = Complex64::from_polar(1.0, -wavenumber_to_angular(e) * out.time_ref);
                (c / s - Complex64::new(0.0, -1.0) * xk * phase).norm()
            })
            .fold(0.0, f64::max)
            / x_max;
        let p1 = s * s * p1_unit;
        Ok(ConvergenceRow {
            field_scale: s,
            excited_population: out.excited_population,
            first_order_population: p1,
            population_error: (out.excited_population - p1).abs() / p1,
            first_order_error,
            amplitude_error,
            norm_drift: out.norm_drift,
        })
    })?;
    let population_slope = log_log_slope(rows.iter().map(|r| (r.field_scale, r.population_error)));
    let amplitude_slope = log_log_slope(rows.iter().map(|r| (r.field_scale, r.first_order_error)));
    Ok(ConvergenceReport {
        rows,
        population_slope,
        amplitude_slope,
    })
}
