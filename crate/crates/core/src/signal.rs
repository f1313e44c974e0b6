//! Pump-probe ionization signal of an excited wave packet.
//!
//! The probe projects every level onto one ionic continuum with weight
//! `d_k`, so pathways interfere:
//!
//! ```text
//! S(tau) = baseline + sum_k |d_k c_k|^2
//!        + exp(-tau / T2) sum_{k != l} d_k d_l c_k conj(c_l) exp(-i (w_k - w_l) tau)
//! ```
//!
//! Only the cross terms dephase; populations do not decay.

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::basis::wavenumber_to_angular;
use crate::dynamics::WavePacket;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeModel {
    pub amplitudes: Vec<f64>,
    pub baseline: f64,
    /// T2 in ps.
    pub coherence_time: f64,
}

impl ProbeModel {
    pub fn new(amplitudes: Vec<f64>, baseline: f64, coherence_time: f64) -> Result<Self> {
        if amplitudes.iter().any(|&d| !(d >= 0.0 && d.is_finite())) {
            return Err(Error::domain("probe amplitudes must be finite and non-negative"));
        }
        if !(baseline >= 0.0 && baseline.is_finite()) {
            return Err(Error::domain(format!("baseline must be non-negative, got {baseline}")));
        }
        // infinite T2 is allowed: no dephasing
        if !(coherence_time > 0.0) {
            return Err(Error::domain(format!(
                "coherence time must be positive, got {coherence_time}"
            )));
        }
        Ok(ProbeModel {
            amplitudes,
            baseline,
            coherence_time,
        })
    }

    /// Equal unit weights.
    pub fn uniform(levels: usize, baseline: f64, coherence_time: f64) -> Result<Self> {
        Self::new(vec![1.0; levels], baseline, coherence_time)
    }

    pub fn decoherence(&self, tau: f64) -> f64 {
        (-tau / self.coherence_time).exp()
    }
}

/// The pieces `S` is assembled from, at one delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalParts {
    pub baseline: f64,
    /// `sum_k |d_k c_k|^2`
    pub incoherent: f64,
    /// `|sum_k d_k c_k exp(-i w_k tau)|^2`
    pub coherent: f64,
    /// `exp(-tau / T2)`
    pub decoherence: f64,
}

impl SignalParts {
    /// Cross-term sum, `coherent - incoherent`.
    pub fn cross(&self) -> f64 {
        self.coherent - self.incoherent
    }

    pub fn total(&self) -> f64 {
        self.baseline + self.incoherent + self.decoherence * self.cross()
    }
}

/// Probe-weighted probe amplitude of the packet at delay `tau`.
pub fn coherent_amplitude(wp: &WavePacket, probe: &ProbeModel, energies: &[f64], tau: f64) -> Complex64 {
    assert_eq!(wp.len(), probe.amplitudes.len(), "one probe weight per level");
    assert_eq!(wp.len(), energies.len(), "one energy per level");
    let dt = tau - wp.time_ref();
    wp.amplitudes()
        .iter()
        .zip(&probe.amplitudes)
        .zip(energies)
        .map(|((c, &d), &e)| c * d * Complex64::from_polar(1.0, -wavenumber_to_angular(e) * dt))
        .sum()
}

pub fn signal_parts(wp: &WavePacket, probe: &ProbeModel, energies: &[f64], tau: f64) -> SignalParts {
    let incoherent = wp
        .amplitudes()
        .iter()
        .zip(&probe.amplitudes)
        .map(|(c, &d)| (c * d).norm_sqr())
        .sum();
    SignalParts {
        baseline: probe.baseline,
        incoherent,
        coherent: coherent_amplitude(wp, probe, energies, tau).norm_sqr(),
        decoherence: probe.decoherence(tau),
    }
}

/// `S(tau)` for a delay `tau >= 0` ps after excitation.
pub fn ionization_signal(wp: &WavePacket, probe: &ProbeModel, energies: &[f64], tau: f64) -> f64 {
    signal_parts(wp, probe, energies, tau).total()
}

/// Evenly spaced delays from `start` to `end` inclusive. The step is
/// adjusted so that it divides the span, and points are placed as
/// `start + (end - start) i / n` so that round values land exactly.
pub fn delay_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && end.is_finite() && step > 0.0 && step.is_finite()) {
        return Err(Error::domain("delay grid bounds must be finite with a positive step"));
    }
    if start < 0.0 || end < start {
        return Err(Error::domain(format!("bad delay grid [{start}, {end}]")));
    }
    let n = ((end - start) / step).round() as usize;
    if n == 0 {
        return Ok(vec![start]);
    }
    Ok((0..=n)
        .map(|i| start + (end - start) * i as f64 / n as f64)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transient {
    pub delays: Vec<f64>,
    pub values: Vec<f64>,
    pub function: Option<String>,
    pub seed: Option<u64>,
    /// Per-point noise standard deviation applied, 0 when noiseless.
    pub noise_sigma: f64,
}

pub fn transient(
    wp: &WavePacket,
    probe: &ProbeModel,
    energies: &[f64],
    delays: &[f64],
) -> Result<Transient> {
    if delays.is_empty() {
        return Err(Error::domain("delay grid is empty"));
    }
    if delays.windows(2).any(|w| !(w[1] > w[0])) || delays[0] < 0.0 {
        return Err(Error::domain("delays must be non-negative and strictly increasing"));
    }
    Ok(Transient {
        delays: delays.to_vec(),
        values: delays
            .iter()
            .map(|&tau| ionization_signal(wp, probe, energies, tau))
            .collect(),
        function: None,
        seed: None,
        noise_sigma: 0.0,
    })
}

impl Transient {
    pub fn labeled(mut self, function: impl Into<String>) -> Self {
        self.function = Some(function.into());
        self
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    /// Index of the largest value (first one on ties).
    pub fn argmax(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if *v > self.values[best] { i } else { best })
    }

    /// Writes `delay_ps,signal,function,seed` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["delay_ps", "signal", "function", "seed"])?;
        let function = self.function.clone().unwrap_or_default();
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_default();
        for (d, v) in self.delays.iter().zip(&self.values) {
            w.write_record([format!("{d}"), format!("{v:.15e}"), function.clone(), seed.clone()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Additive Gaussian noise on a signal averaged over `sequences` shots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Single-shot standard deviation.
    pub sigma: f64,
    pub sequences: u64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, sequences: u64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("noise sigma must be non-negative, got {sigma}")));
        }
        if sequences == 0 {
            return Err(Error::domain("averaging needs at least one sequence"));
        }
        Ok(NoiseModel {
            sigma,
            sequences,
            seed,
        })
    }

    pub fn noiseless() -> Self {
        NoiseModel {
            sigma: 0.0,
            sequences: 1,
            seed: 0,
        }
    }

    /// Noise whose averaged per-point deviation is `per_point`.
    pub fn with_per_point_sigma(per_point: f64, sequences: u64, seed: u64) -> Result<Self> {
        Self::new(per_point * (sequences as f64).sqrt(), sequences, seed)
    }

    /// Standard deviation of one averaged measurement.
    pub fn per_point_sigma(&self) -> f64 {
        self.sigma / (self.sequences as f64).sqrt()
    }

    /// Independent copy for task `index`, reproducible from `(seed, index)`.
    pub fn for_task(&self, index: u64) -> Self {
        NoiseModel {
            seed: mix_seed(self.seed, index),
            ..*self
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// One draw of averaged noise.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let sd = self.per_point_sigma();
        if sd == 0.0 {
            return 0.0;
        }
        Normal::new(0.0, sd).expect("finite sigma").sample(rng)
    }
}

/// SplitMix64 finalizer over `seed + golden * (index + 1)`.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn add_noise(t: &Transient, noise: &NoiseModel) -> Transient {
    let mut rng = noise.rng();
    let mut out = t.clone();
    for v in &mut out.values {
        *v += noise.sample(&mut rng);
    }
    out.seed = Some(noise.seed);
    out.noise_sigma = noise.per_point_sigma();
    out
}
