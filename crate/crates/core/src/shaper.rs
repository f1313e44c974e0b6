//! Pump pulse spectrum and the pixelated spectral phase mask.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{wrap_degrees, PhaseSet};

/// Gaussian spectral amplitude profile of the pump pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEnvelope {
    /// cm⁻¹
    pub center: f64,
    /// Full width at half maximum of the amplitude, cm⁻¹.
    pub fwhm: f64,
    pub peak_amplitude: f64,
}

impl SpectralEnvelope {
    pub fn new(center: f64, fwhm: f64, peak_amplitude: f64) -> Result<Self> {
        if !(fwhm > 0.0 && fwhm.is_finite()) {
            return Err(Error::domain(format!("bandwidth must be positive, got {fwhm}")));
        }
        if !(peak_amplitude >= 0.0 && peak_amplitude.is_finite()) {
            return Err(Error::domain(format!(
                "peak amplitude must be non-negative, got {peak_amplitude}"
            )));
        }
        if !center.is_finite() {
            return Err(Error::domain("center frequency is not finite"));
        }
        Ok(SpectralEnvelope {
            center,
            fwhm,
            peak_amplitude,
        })
    }

    pub fn magnitude(&self, freq: f64) -> f64 {
        let x = (freq - self.center) / self.fwhm;
        self.peak_amplitude * (-4.0 * std::f64::consts::LN_2 * x * x).exp()
    }
}

/// Pixel layout of the modulator: `pixel_count` pixels of width
/// `resolution` starting at `start_frequency`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskGeometry {
    pub pixel_count: usize,
    /// cm⁻¹ per pixel
    pub resolution: f64,
    /// Low edge of pixel 0, cm⁻¹.
    pub start_frequency: f64,
}

impl MaskGeometry {
    pub fn new(pixel_count: usize, resolution: f64, start_frequency: f64) -> Result<Self> {
        if pixel_count == 0 {
            return Err(Error::domain("mask needs at least one pixel"));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::domain(format!(
                "pixel resolution must be positive, got {resolution}"
            )));
        }
        if !start_frequency.is_finite() {
            return Err(Error::domain("mask start frequency is not finite"));
        }
        Ok(MaskGeometry {
            pixel_count,
            resolution,
            start_frequency,
        })
    }

    /// Window centered on `center`.
    pub fn centered(center: f64, pixel_count: usize, resolution: f64) -> Result<Self> {
        Self::new(
            pixel_count,
            resolution,
            center - pixel_count as f64 * resolution / 2.0,
        )
    }

    pub fn end_frequency(&self) -> f64 {
        self.start_frequency + self.pixel_count as f64 * self.resolution
    }

    pub fn low_edge(&self, pixel: usize) -> f64 {
        self.start_frequency + pixel as f64 * self.resolution
    }

    pub fn pixel_for_frequency(&self, freq: f64) -> Result<usize> {
        let out = || Error::OutOfWindow {
            freq,
            low: self.start_frequency,
            high: self.end_frequency(),
        };
        if !(freq >= self.start_frequency) {
            return Err(out());
        }
        let pixel = ((freq - self.start_frequency) / self.resolution).floor() as usize;
        if pixel >= self.pixel_count {
            return Err(out());
        }
        Ok(pixel)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMask {
    geometry: MaskGeometry,
    pixel_phases: Vec<f64>,
}

impl PhaseMask {
    /// Transform-limited (all-zero) mask.
    pub fn flat(geometry: MaskGeometry) -> Self {
        PhaseMask {
            geometry,
            pixel_phases: vec![0.0; geometry.pixel_count],
        }
    }

    pub fn new(geometry: MaskGeometry, pixel_phases: Vec<f64>) -> Result<Self> {
        if pixel_phases.len() != geometry.pixel_count {
            return Err(Error::domain(format!(
                "{} phases for {} pixels",
                pixel_phases.len(),
                geometry.pixel_count
            )));
        }
        if pixel_phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("mask phase is not finite"));
        }
        Ok(PhaseMask {
            geometry,
            pixel_phases: pixel_phases.into_iter().map(wrap_degrees).collect(),
        })
    }

    /// Writes each level's phase into the pixel holding its transition
    /// frequency. Pixels without a transition stay at 0°.
    pub fn from_level_phases(
        geometry: MaskGeometry,
        transition_freqs: &[f64],
        phases: &PhaseSet,
    ) -> Result<Self> {
        if transition_freqs.len() != phases.len() {
            return Err(Error::domain(format!(
                "{} transition frequencies for {} phases",
                transition_freqs.len(),
                phases.len()
            )));
        }
        let mut owner: Vec<Option<usize>> = vec![None; geometry.pixel_count];
        let mut mask = Self::flat(geometry);
        for (k, (&freq, &phase)) in transition_freqs.iter().zip(phases.degrees()).enumerate() {
            let pixel = geometry.pixel_for_frequency(freq)?;
            if let Some(first) = owner[pixel] {
                return Err(Error::PixelCollision {
                    pixel,
                    first,
                    second: k,
                });
            }
            owner[pixel] = Some(k);
            mask.pixel_phases[pixel] = phase;
        }
        Ok(mask)
    }

    pub fn geometry(&self) -> &MaskGeometry {
        &self.geometry
    }

    pub fn pixel_phases(&self) -> &[f64] {
        &self.pixel_phases
    }

    pub fn phase_at_frequency(&self, freq: f64) -> Result<f64> {
        Ok(self.pixel_phases[self.geometry.pixel_for_frequency(freq)?])
    }

    /// Every pixel rounded onto a grid of `accuracy` degrees.
    pub fn quantized(&self, accuracy: f64) -> Self {
        PhaseMask {
            geometry: self.geometry,
            pixel_phases: self
                .pixel_phases
                .iter()
                .map(|&p| wrap_degrees(quantize_phase(p, accuracy)))
                .collect(),
        }
    }

    /// Writes the mask as `pixel_index,low_edge_cm-1,phase_deg` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["pixel_index", "low_edge_cm-1", "phase_deg"])?;
        for (i, phase) in self.pixel_phases.iter().enumerate() {
            w.write_record([
                i.to_string(),
                format!("{}", self.geometry.low_edge(i)),
                format!("{phase}"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table written by [`PhaseMask::write_csv`]. Lines starting
    /// with `#` are skipped. At least two rows are needed to recover the
    /// pixel width.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(input);
        let headers = r.headers()?.clone();
        let expected = ["pixel_index", "low_edge_cm-1", "phase_deg"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(a, b)| a != b) {
            return Err(Error::Table(format!(
                "expected header {}, found {}",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut edges = Vec::new();
        let mut phases = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record?;
            let field = |i: usize| -> Result<&str> {
                record
                    .get(i)
                    .ok_or_else(|| Error::Table(format!("row {row}: missing column {i}")))
            };
            let index: usize = field(0)?
                .parse()
                .map_err(|e| Error::Table(format!("row {row}: pixel_index: {e}")))?;
            if index != row {
                return Err(Error::Table(format!("row {row}: pixel index {index} out of order")));
            }
            let parse = |i: usize, name: &str| -> Result<f64> {
                field(i)?
                    .parse()
                    .map_err(|e| Error::Table(format!("row {row}: {name}: {e}")))
            };
            edges.push(parse(1, "low_edge_cm-1")?);
            phases.push(parse(2, "phase_deg")?);
        }
        if edges.len() < 2 {
            return Err(Error::Table("need at least two pixels to infer the resolution".into()));
        }
        let resolution = edges[1] - edges[0];
        let geometry = MaskGeometry::new(edges.len(), resolution, edges[0])?;
        for (i, &edge) in edges.iter().enumerate() {
            if (edge - geometry.low_edge(i)).abs() > 1e-6 * resolution.max(1.0) {
                return Err(Error::Table(format!("pixel {i}: non-uniform edge {edge}")));
            }
        }
        PhaseMask::new(geometry, phases)
    }
}

/// Nearest multiple of `accuracy` degrees.
pub fn quantize_phase(phase: f64, accuracy: f64) -> f64 {
    assert!(accuracy > 0.0, "quantization step must be positive");
    (phase / accuracy).round() * accuracy
}

/// Complex spectral field at `freq` after the mask: Gaussian magnitude
/// times `exp(-i phi(pixel))`.
pub fn sample_field(envelope: &SpectralEnvelope, mask: &PhaseMask, freq: f64) -> Result<Complex64> {
    let phase = mask.phase_at_frequency(freq)?.to_radians();
    Ok(Complex64::from_polar(envelope.magnitude(freq), -phase))
}
