//! JSON run configuration.
//!
//! Every field has a default, so `{}` is a complete configuration. Loading
//! resolves all derived values (level labels, launch energy, mask start,
//! per-level couplings and probe weights) and writes them back into the
//! config, which makes the echoed file a fixed point of load.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::{LevelBasis, SpectroscopicConstants};
use crate::dynamics::PulseTemporalProfile;
use crate::error::{Error, Result};
use crate::oracle::{lookup_function, BooleanFunction, PhaseSet, REFERENCE_FUNCTIONS};
use crate::pipeline::{centering_launch_energy, Setup};
use crate::shaper::{MaskGeometry, SpectralEnvelope};
use crate::signal::{delay_grid, NoiseModel, ProbeModel};

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "WPDJ_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub register: RegisterConfig,
    pub spectroscopy: SpectroscopicConstants,
    /// Term energy of the launch level, cm⁻¹. Defaults to the value that
    /// centers the transitions on the pulse.
    pub launch_energy_cm: Option<f64>,
    pub shaper: ShaperConfig,
    pub pulse: PulseConfig,
    pub couplings: CouplingConfig,
    pub probe: ProbeConfig,
    pub noise: NoiseConfig,
    pub delay_grid: DelayGridConfig,
    pub tau_star_ps: f64,
    /// Level whose base phase is pinned to 0. Defaults to the last one.
    pub reference_index: Option<usize>,
    /// Base phases in degrees, bypassing calibration.
    pub phi0_deg: Option<Vec<f64>>,
    /// Bit strings or reference labels (`f1` ... `f10`) for `transients`.
    pub functions: Option<Vec<String>>,
    pub validation: ValidationConfig,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Set on echoed configs; ignored on load.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegisterConfig {
    pub inputs: usize,
    pub v_start: u32,
    pub j_values: Vec<u32>,
    /// Explicit `(v, J)` labels, overriding the ladder.
    pub levels: Option<Vec<LevelLabel>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelLabel {
    pub v: u32,
    #[serde(rename = "J")]
    pub j: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShaperConfig {
    pub pixel_count: usize,
    pub resolution_cm: f64,
    /// Low edge of pixel 0. Defaults to a window centered on the pulse.
    pub start_cm: Option<f64>,
    /// Phase step of the modulator in degrees; absent for an ideal shaper.
    pub phase_accuracy_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    pub center_cm: f64,
    pub fwhm_cm: f64,
    pub peak_amplitude: f64,
    pub duration_fs: f64,
    /// Half-width of the propagation window in units of `duration_fs`.
    pub span_fwhm: f64,
    /// Integrator step; chosen from the level spread when absent.
    pub step_fs: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingConfig {
    pub dipoles: Option<Vec<f64>>,
    pub detunings_cm: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub amplitudes: Option<Vec<f64>>,
    pub baseline: f64,
    /// `null` for no dephasing.
    pub coherence_time_ps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Single-shot standard deviation. When absent, the per-measurement
    /// deviation is `margin_fraction` times the calibrated margin.
    pub sigma: Option<f64>,
    pub margin_fraction: f64,
    /// Shots averaged per measurement.
    pub sequences: u64,
    /// Monte Carlo trials for `dj`.
    pub trials: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelayGridConfig {
    pub start_ps: f64,
    pub end_ps: f64,
    pub step_ps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    pub field_scales: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            register: RegisterConfig::default(),
            spectroscopy: SpectroscopicConstants::default(),
            launch_energy_cm: None,
            shaper: ShaperConfig::default(),
            pulse: PulseConfig::default(),
            couplings: CouplingConfig::default(),
            probe: ProbeConfig::default(),
            noise: NoiseConfig::default(),
            delay_grid: DelayGridConfig::default(),
            tau_star_ps: 5.0,
            reference_index: None,
            phi0_deg: None,
            functions: None,
            validation: ValidationConfig::default(),
            seed: 0,
            output_dir: PathBuf::from("out"),
            config_hash: None,
        }
    }
}

impl Default for RegisterConfig {
    fn default() -> Self {
        RegisterConfig {
            inputs: 8,
            v_start: 13,
            j_values: vec![17, 19],
            levels: None,
        }
    }
}

impl Default for ShaperConfig {
    fn default() -> Self {
        ShaperConfig {
            pixel_count: 128,
            resolution_cm: 4.2,
            start_cm: None,
            phase_accuracy_deg: None,
        }
    }
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig {
            center_cm: 12430.0,
            fwhm_cm: 150.0,
            peak_amplitude: 1.0,
            duration_fs: 160.0,
            span_fwhm: 5.0,
            step_fs: None,
        }
    }
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            amplitudes: None,
            baseline: 1.0,
            coherence_time_ps: Some(5000.0),
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            sigma: None,
            margin_fraction: 1.0 / 6.0,
            sequences: 10_000,
            trials: 100_000,
        }
    }
}

impl Default for DelayGridConfig {
    fn default() -> Self {
        DelayGridConfig {
            start_ps: 2.0,
            end_ps: 8.0,
            step_ps: 0.01,
        }
    }
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            field_scales: vec![1e-2, 1e-3, 1e-4],
        }
    }
}

fn per_level(field: &str, values: &Option<Vec<f64>>, n: usize) -> Result<()> {
    match values {
        Some(v) if v.len() != n => Err(Error::config(field, format!("{} values for {n} levels", v.len()))),
        _ => Ok(()),
    }
}

impl RunConfig {
    /// Parses JSON text, then resolves and validates it.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { "<root>".to_string() } else { path }, e.inner().to_string())
        })?;
        raw.resolve()
    }

    /// Fills every derived default and validates the result.
    pub fn resolve(mut self) -> Result<Self> {
        self.config_hash = None;
        let n = self.register.inputs;
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::config("register.inputs", format!("needs an even number of inputs, got {n}")));
        }
        let levels = match &self.register.levels {
            Some(levels) => {
                if levels.len() != n {
                    return Err(Error::config(
                        "register.levels",
                        format!("{} levels for {n} inputs", levels.len()),
                    ));
                }
                let labels: Vec<(u32, u32)> = levels.iter().map(|l| (l.v, l.j)).collect();
                LevelBasis::from_labels(&labels, &self.spectroscopy)?
            }
            None => LevelBasis::ladder(n, self.register.v_start, &self.register.j_values, &self.spectroscopy)?,
        };
        self.register.levels = Some(levels.levels().iter().map(|l| LevelLabel { v: l.v, j: l.j }).collect());

        if self.launch_energy_cm.is_none() {
            self.launch_energy_cm = Some(centering_launch_energy(&levels.energies(), self.pulse.center_cm));
        }
        if self.shaper.start_cm.is_none() {
            let g = MaskGeometry::centered(self.pulse.center_cm, self.shaper.pixel_count, self.shaper.resolution_cm)?;
            self.shaper.start_cm = Some(g.start_frequency);
        }
        per_level("couplings.dipoles", &self.couplings.dipoles, n)?;
        per_level("couplings.detunings_cm", &self.couplings.detunings_cm, n)?;
        per_level("probe.amplitudes", &self.probe.amplitudes, n)?;
        per_level("phi0_deg", &self.phi0_deg, n)?;
        self.couplings.dipoles.get_or_insert_with(|| vec![1.0; n]);
        self.couplings.detunings_cm.get_or_insert_with(|| vec![0.0; n]);
        self.probe.amplitudes.get_or_insert_with(|| vec![1.0; n]);
        match self.reference_index {
            Some(r) if r >= n => {
                return Err(Error::config("reference_index", format!("{r} out of range for {n} levels")));
            }
            None => self.reference_index = Some(n - 1),
            _ => {}
        }
        if let Some(phi0) = &self.phi0_deg {
            PhaseSet::new(phi0.clone())?;
        }

        let delays = self.delays()?;
        if !delays.iter().any(|&d| (d - self.tau_star_ps).abs() <= 1e-9 * self.tau_star_ps.abs().max(1.0)) {
            return Err(Error::config(
                "delay_grid",
                format!("grid does not contain the readout delay {} ps", self.tau_star_ps),
            ));
        }
        if let Some(functions) = &self.functions {
            self.parse_functions(functions)?;
        }
        if !(self.noise.margin_fraction > 0.0 && self.noise.margin_fraction.is_finite()) {
            return Err(Error::config("noise.margin_fraction", "must be positive"));
        }
        self.noise_model()?;
        self.profile()?;
        self.setup()?;
        Ok(self)
    }

    pub fn basis(&self) -> Result<LevelBasis> {
        let labels: Vec<(u32, u32)> = match &self.register.levels {
            Some(levels) => levels.iter().map(|l| (l.v, l.j)).collect(),
            None => return LevelBasis::ladder(
                self.register.inputs,
                self.register.v_start,
                &self.register.j_values,
                &self.spectroscopy,
            ),
        };
        LevelBasis::from_labels(&labels, &self.spectroscopy)
    }

    pub fn setup(&self) -> Result<Setup> {
        let basis = self.basis()?;
        let n = basis.len();
        let launch = self
            .launch_energy_cm
            .unwrap_or_else(|| centering_launch_energy(&basis.energies(), self.pulse.center_cm));
        let envelope = SpectralEnvelope::new(self.pulse.center_cm, self.pulse.fwhm_cm, self.pulse.peak_amplitude)?;
        let geometry = match self.shaper.start_cm {
            Some(start) => MaskGeometry::new(self.shaper.pixel_count, self.shaper.resolution_cm, start)?,
            None => MaskGeometry::centered(self.pulse.center_cm, self.shaper.pixel_count, self.shaper.resolution_cm)?,
        };
        let probe = ProbeModel::new(
            self.probe.amplitudes.clone().unwrap_or_else(|| vec![1.0; n]),
            self.probe.baseline,
            self.probe.coherence_time_ps.unwrap_or(f64::INFINITY),
        )?;
        Setup::new(
            basis,
            launch,
            envelope,
            geometry,
            self.couplings.dipoles.clone().unwrap_or_else(|| vec![1.0; n]),
            probe,
            self.tau_star_ps,
        )?
        .with_phase_accuracy(self.shaper.phase_accuracy_deg)?
        .with_detunings(self.couplings.detunings_cm.clone().unwrap_or_else(|| vec![0.0; n]))
    }

    pub fn delays(&self) -> Result<Vec<f64>> {
        delay_grid(self.delay_grid.start_ps, self.delay_grid.end_ps, self.delay_grid.step_ps)
    }

    /// Time grid for the Schrödinger solver.
    pub fn profile(&self) -> Result<PulseTemporalProfile> {
        let energies = self.basis()?.energies();
        match self.pulse.step_fs {
            Some(step) => {
                let p = PulseTemporalProfile::centered(self.pulse.duration_fs, self.pulse.span_fwhm, step)?;
                p.check_resolution(&energies)?;
                Ok(p)
            }
            None => PulseTemporalProfile::resolving(self.pulse.duration_fs, self.pulse.span_fwhm, &energies, 1.0),
        }
    }

    /// The configured noise, or `None` when it has to be scaled to the
    /// calibrated margin.
    pub fn noise_model(&self) -> Result<Option<NoiseModel>> {
        self.noise
            .sigma
            .map(|s| NoiseModel::new(s, self.noise.sequences, self.seed))
            .transpose()
    }

    pub fn parse_functions(&self, specs: &[String]) -> Result<Vec<BooleanFunction>> {
        if specs.is_empty() {
            return Err(Error::Selection("no functions selected".into()));
        }
        specs
            .iter()
            .map(|s| {
                let f = lookup_function(s.trim())?;
                if f.len() != self.register.inputs {
                    return Err(Error::Selection(format!(
                        "function {s} has {} inputs, register has {}",
                        f.len(),
                        self.register.inputs
                    )));
                }
                f.character()?;
                Ok(f)
            })
            .collect()
    }

    /// Functions for `transients`: the configured list, else the ten
    /// reference functions on an 8-input register, else all of them.
    pub fn selected_functions(&self) -> Result<Vec<BooleanFunction>> {
        match &self.functions {
            Some(specs) => self.parse_functions(specs),
            None if self.register.inputs == 8 => REFERENCE_FUNCTIONS
                .iter()
                .map(|(_, bits)| bits.parse::<BooleanFunction>())
                .collect(),
            None => crate::oracle::enumerate_all(self.register.inputs),
        }
    }

    /// Applies `WPDJ_SEED` if it is set.
    pub fn with_env_seed(mut self) -> Result<Self> {
        if let Ok(text) = std::env::var(SEED_ENV) {
            self.seed = text
                .trim()
                .parse()
                .map_err(|_| Error::config(SEED_ENV, format!("not an unsigned integer: {text:?}")))?;
        }
        Ok(self)
    }

    /// SHA-256 of the canonical JSON of this config, hex encoded. The
    /// output directory is left out, so moving a run does not change it.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.config_hash = None;
        canonical.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Pretty JSON carrying its own hash; loads back to `self`.
    pub fn echo(&self) -> String {
        let mut tagged = self.clone();
        tagged.config_hash = Some(self.hash());
        serde_json::to_string_pretty(&tagged).expect("config serializes") + "\n"
    }
}

/// Reads and resolves a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("<file>", format!("{}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_json(r#"{"seed": 7}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.shaper.pixel_count, 128);
        assert_eq!(cfg.shaper.resolution_cm, 4.2);
        assert_eq!(cfg.pulse.duration_fs, 160.0);
        assert_eq!(cfg.pulse.center_cm, 12430.0);
        assert_eq!(cfg.pulse.fwhm_cm, 150.0);
        assert_eq!(cfg.tau_star_ps, 5.0);
        assert_eq!(cfg.register.levels.as_ref().unwrap().len(), 8);
        assert_eq!(cfg.reference_index, Some(7));
    }

    #[test]
    fn echo_round_trip() {
        let cfg = RunConfig::from_json(r#"{"seed": 3, "noise": {"sigma": 0.5}}"#).unwrap();
        let again = RunConfig::from_json(&cfg.echo()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.echo(), again.echo());
        assert_eq!(cfg.hash(), again.hash());
    }

    #[test]
    fn field_named_in_errors() {
        let err = RunConfig::from_json(r#"{"shaper": {"pixel_count": "many"}}"#).unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "shaper.pixel_count"),
            e => panic!("unexpected {e}"),
        }
        let err = RunConfig::from_json(r#"{"pulse": {"colour": 1}}"#).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn odd_lengths_rejected() {
        assert!(RunConfig::from_json(r#"{"register": {"inputs": 7}}"#).is_err());
        let err = RunConfig::from_json(r#"{"functions": ["0011100"]}"#).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn grid_must_hold_tau_star() {
        let err = RunConfig::from_json(r#"{"tau_star_ps": 5.005, "delay_grid": {"step_ps": 0.01}}"#).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "delay_grid"));
    }

    #[test]
    fn physics_errors_come_from_owner() {
        let err = RunConfig::from_json(r#"{"pulse": {"fwhm_cm": -1}}"#).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }
}
