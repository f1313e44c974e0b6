//! One resolved experimental setup: register, pump, shaper and probe.
//!
//! A single run goes function -> phases -> mask -> shaped couplings ->
//! wave packet -> signal at the readout delay.

use serde::Serialize;

use crate::basis::LevelBasis;
use crate::dynamics::{perturbative_excite, CouplingSet, WavePacket};
use crate::error::{Error, Result};
use crate::oracle::{encode_phases, BooleanFunction, PhaseSet};
use crate::readout::{calibrate_phi0, compute_threshold, CalibrationResult};
use crate::exec::Execution;
use crate::shaper::{MaskGeometry, PhaseMask, SpectralEnvelope};
use crate::signal::{ionization_signal, transient, ProbeModel, Transient};

#[derive(Debug, Clone)]
pub struct Setup {
    pub basis: LevelBasis,
    /// cm⁻¹, one per level.
    pub transition_freqs: Vec<f64>,
    pub envelope: SpectralEnvelope,
    pub geometry: MaskGeometry,
    pub dipoles: Vec<f64>,
    /// cm⁻¹; only the time-dependent propagation uses these.
    pub detunings: Vec<f64>,
    pub probe: ProbeModel,
    /// ps
    pub tau_star: f64,
    /// Shaper phase step in degrees, `None` for an ideal shaper.
    pub phase_accuracy: Option<f64>,
}

/// Launch-level energy that centers the transition band on `center`.
pub fn centering_launch_energy(energies: &[f64], center: f64) -> f64 {
    let (lo, hi) = energies
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    (lo + hi) / 2.0 - center
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SetupSummary {
    pub levels: usize,
    pub min_transition: f64,
    pub max_transition: f64,
    pub min_relative_field: f64,
}

impl Setup {
    pub fn new(
        basis: LevelBasis,
        launch_energy: f64,
        envelope: SpectralEnvelope,
        geometry: MaskGeometry,
        dipoles: Vec<f64>,
        probe: ProbeModel,
        tau_star: f64,
    ) -> Result<Self> {
        let n = basis.len();
        if dipoles.len() != n {
            return Err(Error::domain(format!("{} dipoles for {n} levels", dipoles.len())));
        }
        if probe.amplitudes.len() != n {
            return Err(Error::domain(format!(
                "{} probe amplitudes for {n} levels",
                probe.amplitudes.len()
            )));
        }
        if !(tau_star > 0.0 && tau_star.is_finite()) {
            return Err(Error::domain(format!("readout delay must be positive, got {tau_star}")));
        }
        let transition_freqs: Vec<f64> = basis.energies().iter().map(|e| e - launch_energy).collect();
        // every transition must be individually addressable
        PhaseMask::from_level_phases(geometry, &transition_freqs, &PhaseSet::zeros(n))?;
        CouplingSet::new(dipoles.clone(), vec![num_complex::Complex64::new(1.0, 0.0); n])?;
        Ok(Setup {
            basis,
            transition_freqs,
            envelope,
            geometry,
            dipoles,
            detunings: vec![0.0; n],
            probe,
            tau_star,
            phase_accuracy: None,
        })
    }

    pub fn with_phase_accuracy(mut self, accuracy: Option<f64>) -> Result<Self> {
        if let Some(a) = accuracy {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::domain(format!("phase accuracy must be positive, got {a}")));
            }
        }
        self.phase_accuracy = accuracy;
        Ok(self)
    }

    pub fn with_detunings(mut self, detunings: Vec<f64>) -> Result<Self> {
        if detunings.len() != self.len() || detunings.iter().any(|d| !d.is_finite()) {
            return Err(Error::domain("one finite detuning per level required"));
        }
        self.detunings = detunings;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.basis.energies()
    }

    /// Transform-limited couplings `mu_k |eps(nu_k)|`.
    pub fn unshaped_couplings(&self) -> Result<CouplingSet> {
        CouplingSet::from_envelope(self.dipoles.clone(), &self.envelope, &self.transition_freqs)
    }

    /// Couplings with detunings, for time-dependent propagation.
    pub fn propagation_couplings(&self, phases: &PhaseSet) -> Result<CouplingSet> {
        let shaped = self.unshaped_couplings()?.shaped(phases)?;
        CouplingSet::with_detunings(
            shaped.dipoles().to_vec(),
            shaped.field_values().to_vec(),
            self.detunings.clone(),
        )
    }

    pub fn summary(&self) -> SetupSummary {
        let fields: Vec<f64> = self
            .transition_freqs
            .iter()
            .map(|&f| self.envelope.magnitude(f) / self.envelope.peak_amplitude)
            .collect();
        SetupSummary {
            levels: self.len(),
            min_transition: self.transition_freqs.iter().copied().fold(f64::INFINITY, f64::min),
            max_transition: self.transition_freqs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min_relative_field: fields.into_iter().fold(f64::INFINITY, f64::min),
        }
    }

    /// The mask the shaper displays for `f`, quantized when the shaper has
    /// finite accuracy.
    pub fn mask_for(&self, f: &BooleanFunction, phi0: &PhaseSet) -> Result<PhaseMask> {
        let phases = encode_phases(f, phi0)?;
        let mask = PhaseMask::from_level_phases(self.geometry, &self.transition_freqs, &phases)?;
        Ok(match self.phase_accuracy {
            Some(a) => mask.quantized(a),
            None => mask,
        })
    }

    /// Excited packet left by the pulse shaped for `f`.
    pub fn packet_for(&self, f: &BooleanFunction, phi0: &PhaseSet) -> Result<WavePacket> {
        if f.len() != self.len() {
            return Err(Error::domain(format!(
                "function over {} inputs on a {}-level register",
                f.len(),
                self.len()
            )));
        }
        let mask = self.mask_for(f, phi0)?;
        let couplings =
            CouplingSet::through_mask(self.dipoles.clone(), &self.envelope, &mask, &self.transition_freqs)?;
        perturbative_excite(&couplings, &PhaseSet::zeros(self.len()))
    }

    /// Noiseless signal at the readout delay.
    pub fn measure(&self, f: &BooleanFunction, phi0: &PhaseSet) -> Result<f64> {
        let wp = self.packet_for(f, phi0)?;
        Ok(ionization_signal(&wp, &self.probe, &self.energies(), self.tau_star))
    }

    pub fn transient_for(&self, f: &BooleanFunction, phi0: &PhaseSet, delays: &[f64]) -> Result<Transient> {
        let wp = self.packet_for(f, phi0)?;
        Ok(transient(&wp, &self.probe, &self.energies(), delays)?.labeled(f.to_string()))
    }

    /// Calibrated base phases and decision threshold. `reference` defaults
    /// to the last level.
    pub fn calibrate(&self, reference: Option<usize>, exec: Execution) -> Result<CalibrationResult> {
        let phi0 = calibrate_phi0(&self.energies(), self.tau_star, reference.unwrap_or(self.len() - 1))?;
        self.threshold_for(phi0, exec)
    }

    pub fn threshold_for(&self, phi0: PhaseSet, exec: Execution) -> Result<CalibrationResult> {
        compute_threshold(
            phi0,
            self.tau_star,
            &self.energies(),
            &self.unshaped_couplings()?,
            &self.probe,
            exec,
        )
    }
}
