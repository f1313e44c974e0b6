//! Excited-state wave packets.
//!
//! Two routes build the packet a shaped pump pulse leaves on the excited
//! manifold. [`perturbative_excite`] uses the weak-field result
//! `c_k ∝ exp(-i phi_k) mu_k eps_k`; [`propagate_tdse`] integrates the
//! full (2ⁿ+1)-level Schrödinger equation and serves as its numerical
//! check.

mod tdse;

pub use tdse::{
    convergence_study, propagate_tdse, ConvergenceReport, ConvergenceRow, PulseTemporalProfile,
    TdseOutcome, NORM_DRIFT_LIMIT,
};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::wavenumber_to_angular;
use crate::error::{Error, Result};
use crate::oracle::{BooleanFunction, PhaseSet};
use crate::shaper::{sample_field, PhaseMask, SpectralEnvelope};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavePacket {
    amplitudes: Vec<Complex64>,
    /// ps after excitation
    time_ref: f64,
}

impl WavePacket {
    pub fn new(amplitudes: Vec<Complex64>, time_ref: f64) -> Result<Self> {
        if amplitudes.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("wave packet amplitude is not finite"));
        }
        Ok(WavePacket {
            amplitudes,
            time_ref,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn time_ref(&self) -> f64 {
        self.time_ref
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Free evolution by `tau` ps: `c_k -> c_k exp(-i omega_k tau)` with
    /// `energies` in cm⁻¹.
    pub fn evolve(&self, energies: &[f64], tau: f64) -> WavePacket {
        assert_eq!(energies.len(), self.len(), "one energy per level");
        WavePacket {
            amplitudes: self
                .amplitudes
                .iter()
                .zip(energies)
                .map(|(c, &e)| c * Complex64::from_polar(1.0, -wavenumber_to_angular(e) * tau))
                .collect(),
            time_ref: self.time_ref + tau,
        }
    }

    pub fn with_global_phase(&self, theta: f64) -> WavePacket {
        let phase = Complex64::from_polar(1.0, theta);
        WavePacket {
            amplitudes: self.amplitudes.iter().map(|c| c * phase).collect(),
            time_ref: self.time_ref,
        }
    }

    /// `max_k |a_k - exp(i theta) b_k|` with theta chosen to align `other`
    /// onto `self`.
    pub fn distance_up_to_global_phase(&self, other: &WavePacket) -> f64 {
        assert_eq!(self.len(), other.len());
        let overlap: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| b.conj() * a)
            .sum();
        let align = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - align * b).norm())
            .fold(0.0, f64::max)
    }
}

/// Pump couplings from the launch level to each excited level.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSet {
    dipoles: Vec<f64>,
    field_values: Vec<Complex64>,
    /// cm⁻¹
    detunings: Vec<f64>,
}

impl CouplingSet {
    pub fn new(dipoles: Vec<f64>, field_values: Vec<Complex64>) -> Result<Self> {
        let n = dipoles.len();
        Self::with_detunings(dipoles, field_values, vec![0.0; n])
    }

    pub fn with_detunings(
        dipoles: Vec<f64>,
        field_values: Vec<Complex64>,
        detunings: Vec<f64>,
    ) -> Result<Self> {
        if dipoles.len() != field_values.len() || dipoles.len() != detunings.len() {
            return Err(Error::domain(format!(
                "coupling lengths differ: {} dipoles, {} fields, {} detunings",
                dipoles.len(),
                field_values.len(),
                detunings.len()
            )));
        }
        if dipoles.iter().any(|&mu| !(mu >= 0.0 && mu.is_finite())) {
            return Err(Error::domain("transition dipoles must be finite and non-negative"));
        }
        if field_values.iter().any(|e| !e.is_finite()) || detunings.iter().any(|d| !d.is_finite()) {
            return Err(Error::domain("field values and detunings must be finite"));
        }
        Ok(CouplingSet {
            dipoles,
            field_values,
            detunings,
        })
    }

    /// Unshaped couplings: the envelope magnitude at each transition.
    pub fn from_envelope(
        dipoles: Vec<f64>,
        envelope: &SpectralEnvelope,
        transition_freqs: &[f64],
    ) -> Result<Self> {
        let fields = transition_freqs
            .iter()
            .map(|&f| Complex64::new(envelope.magnitude(f), 0.0))
            .collect();
        Self::new(dipoles, fields)
    }

    /// Couplings as seen through a phase mask.
    pub fn through_mask(
        dipoles: Vec<f64>,
        envelope: &SpectralEnvelope,
        mask: &PhaseMask,
        transition_freqs: &[f64],
    ) -> Result<Self> {
        let fields = transition_freqs
            .iter()
            .map(|&f| sample_field(envelope, mask, f))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dipoles, fields)
    }

    pub fn len(&self) -> usize {
        self.dipoles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dipoles.is_empty()
    }

    pub fn dipoles(&self) -> &[f64] {
        &self.dipoles
    }

    pub fn field_values(&self) -> &[Complex64] {
        &self.field_values
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    /// `mu_k eps_k`.
    pub fn effective(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.dipoles
            .iter()
            .zip(&self.field_values)
            .map(|(&mu, &eps)| eps * mu)
    }

    /// The same couplings with `exp(-i phi_k)` folded into the fields.
    pub fn shaped(&self, phases: &PhaseSet) -> Result<Self> {
        if phases.len() != self.len() {
            return Err(Error::domain("phase set length does not match couplings"));
        }
        let fields = self
            .field_values
            .iter()
            .zip(phases.radians())
            .map(|(e, phi)| e * Complex64::from_polar(1.0, -phi))
            .collect();
        Self::with_detunings(self.dipoles.clone(), fields, self.detunings.clone())
    }
}

/// Unnormalized first-order amplitudes `exp(-i phi_k) mu_k eps_k`.
pub fn first_order_amplitudes(couplings: &CouplingSet, phases: &PhaseSet) -> Result<Vec<Complex64>> {
    if phases.len() != couplings.len() {
        return Err(Error::domain(format!(
            "{} phases for {} couplings",
            phases.len(),
            couplings.len()
        )));
    }
    Ok(couplings
        .effective()
        .zip(phases.radians())
        .map(|(x, phi)| x * Complex64::from_polar(1.0, -phi))
        .collect())
}

/// Weak-field wave packet at `time_ref = 0`, scaled to unit norm.
pub fn perturbative_excite(couplings: &CouplingSet, phases: &PhaseSet) -> Result<WavePacket> {
    let raw = first_order_amplitudes(couplings, phases)?;
    let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::NoExcitation);
    }
    WavePacket::new(raw.into_iter().map(|c| c / norm).collect(), 0.0)
}

/// Splits the first-order transfer into `(U_amp, U_phs)` on the
/// (2ⁿ+1)-dimensional space whose index 0 is the launch level.
///
/// `U_amp` is the truncated `1 - iHt`, so it is not exactly unitary;
/// `U_phs = diag(1, (-1)^f(0), (-1)^f(1), ...)` is.
pub fn unitary_factorization(
    amplitudes: &[Complex64],
    f: &BooleanFunction,
) -> Result<(Array2<Complex64>, Array2<Complex64>)> {
    if amplitudes.len() != f.len() {
        return Err(Error::domain(format!(
            "{} amplitudes for a function over {} inputs",
            amplitudes.len(),
            f.len()
        )));
    }
    let dim = amplitudes.len() + 1;
    let mut u_amp = Array2::<Complex64>::eye(dim);
    let mut u_phs = Array2::<Complex64>::eye(dim);
    for (k, a) in amplitudes.iter().enumerate() {
        u_amp[[k + 1, 0]] = *a;
        u_amp[[0, k + 1]] = -a.conj();
        u_phs[[k + 1, k + 1]] = Complex64::new(f.sign(k), 0.0);
    }
    Ok((u_amp, u_phs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::encode_phases;
    use approx::assert_abs_diff_eq;
    use ndarray::Array1;

    fn equal_couplings(n: usize) -> CouplingSet {
        CouplingSet::new(vec![1.0; n], vec![Complex64::new(0.7, 0.0); n]).unwrap()
    }

    fn f(s: &str) -> BooleanFunction {
        s.parse().unwrap()
    }

    #[test]
    fn uniform_superposition() {
        let phases = encode_phases(&f("00000000"), &PhaseSet::zeros(8)).unwrap();
        let wp = perturbative_excite(&equal_couplings(8), &phases).unwrap();
        for c in wp.amplitudes() {
            assert_abs_diff_eq!(c.re, 1.0 / 8f64.sqrt(), epsilon = 1e-15);
            assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-15);
        }
        assert_eq!(wp.time_ref(), 0.0);
    }

    #[test]
    fn balanced_signs() {
        let phases = encode_phases(&f("00001111"), &PhaseSet::zeros(8)).unwrap();
        let wp = perturbative_excite(&equal_couplings(8), &phases).unwrap();
        let s = 1.0 / 8f64.sqrt();
        for (k, c) in wp.amplitudes().iter().enumerate() {
            let expected = if k < 4 { s } else { -s };
            assert_abs_diff_eq!(c.re, expected, epsilon = 1e-15);
            assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn single_open_channel() {
        let mut dipoles = vec![0.0; 8];
        dipoles[0] = 1.0;
        let c = CouplingSet::new(dipoles, vec![Complex64::new(1.0, 0.0); 8]).unwrap();
        let phases = PhaseSet::new(vec![0.0; 8]).unwrap();
        let wp = perturbative_excite(&c, &phases).unwrap();
        assert_abs_diff_eq!(wp.amplitudes()[0].norm(), 1.0, epsilon = 1e-15);
        assert!(wp.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
        // any phase pattern leaves the populated level alone up to phase
        let other = PhaseSet::new(vec![73.0; 8]).unwrap();
        assert_abs_diff_eq!(
            perturbative_excite(&c, &other).unwrap().amplitudes()[0].norm(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn zero_couplings_rejected() {
        let c = CouplingSet::new(vec![0.0; 4], vec![Complex64::new(1.0, 0.0); 4]).unwrap();
        assert!(matches!(
            perturbative_excite(&c, &PhaseSet::zeros(4)),
            Err(Error::NoExcitation)
        ));
        assert!(CouplingSet::new(vec![-1.0], vec![Complex64::new(1.0, 0.0)]).is_err());
        assert!(CouplingSet::new(vec![1.0, 1.0], vec![Complex64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn shaped_couplings_match_explicit_phases() {
        let c = CouplingSet::new(
            vec![1.0, 0.5, 2.0, 1.5],
            vec![
                Complex64::new(0.3, 0.0),
                Complex64::new(0.9, 0.0),
                Complex64::new(0.4, 0.0),
                Complex64::new(0.2, 0.0),
            ],
        )
        .unwrap();
        let phases = PhaseSet::new(vec![10.0, 200.0, 33.3, 359.0]).unwrap();
        let a = perturbative_excite(&c, &phases).unwrap();
        let b = perturbative_excite(&c.shaped(&phases).unwrap(), &PhaseSet::zeros(4)).unwrap();
        assert!(a.distance_up_to_global_phase(&b) < 1e-15);
    }

    #[test]
    fn evolve_identity_and_populations() {
        let wp = WavePacket::new(
            vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
            0.0,
        )
        .unwrap();
        let energies = [100.0, 137.0];
        assert_eq!(wp.evolve(&energies, 0.0), wp);
        for tau in [0.1, 1.0, 5.0, 123.4] {
            let later = wp.evolve(&energies, tau);
            for (a, b) in later.amplitudes().iter().zip(wp.amplitudes()) {
                assert_abs_diff_eq!(a.norm(), b.norm(), epsilon = 1e-14);
            }
            assert_eq!(later.time_ref(), tau);
        }
    }

    #[test]
    fn two_level_relative_phase() {
        // closed form: relative phase of c1 against c0 advances by -dw tau
        let wp = WavePacket::new(vec![Complex64::new(1.0, 0.0); 2], 0.0).unwrap();
        let (e0, e1) = (0.0, 40.0);
        let dw = wavenumber_to_angular(e1 - e0);
        let tau = std::f64::consts::PI / dw;
        let out = wp.evolve(&[e0, e1], tau);
        let rel = out.amplitudes()[1] / out.amplitudes()[0];
        assert_abs_diff_eq!(rel.re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rel.im, 0.0, epsilon = 1e-12);
        let quarter = wp.evolve(&[e0, e1], tau / 2.0);
        let rel = quarter.amplitudes()[1] / quarter.amplitudes()[0];
        assert_abs_diff_eq!(rel.im, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn factorization_shapes() {
        let a: Vec<Complex64> = (0..8).map(|k| Complex64::new(0.1 * k as f64, 0.05)).collect();
        let (_, u_phs) = unitary_factorization(&a, &f("00000000")).unwrap();
        assert_eq!(u_phs, Array2::eye(9));
        let (_, u_phs) = unitary_factorization(&a, &f("11111111")).unwrap();
        for k in 0..9 {
            let expected = if k == 0 { 1.0 } else { -1.0 };
            assert_eq!(u_phs[[k, k]], Complex64::new(expected, 0.0));
        }
        let zero = vec![Complex64::new(0.0, 0.0); 8];
        let (u_amp, _) = unitary_factorization(&zero, &f("00001111")).unwrap();
        assert_eq!(u_amp, Array2::eye(9));
        let e0 = Array1::from_shape_fn(9, |i| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        assert_eq!(u_amp.dot(&e0), e0);
        assert!(unitary_factorization(&a, &f("0011")).is_err());
    }

    #[test]
    fn factorization_reproduces_first_order_amplitudes() {
        let couplings = CouplingSet::new(
            (0..8).map(|k| 1.0 + 0.1 * k as f64).collect(),
            (0..8).map(|k| Complex64::new(0.2 + 0.05 * k as f64, 0.0)).collect(),
        )
        .unwrap();
        let base = PhaseSet::new(crate::oracle::REFERENCE_BASE_PHASES.to_vec()).unwrap();
        let a = first_order_amplitudes(&couplings, &base).unwrap();
        for g in crate::oracle::enumerate_all(8).unwrap() {
            let (u_amp, u_phs) = unitary_factorization(&a, &g).unwrap();
            let e0 = Array1::from_shape_fn(9, |i| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
            let out = u_phs.dot(&u_amp.dot(&e0));
            let expected = first_order_amplitudes(&couplings, &encode_phases(&g, &base).unwrap()).unwrap();
            assert_eq!(out[0], Complex64::new(1.0, 0.0));
            for k in 0..8 {
                assert_abs_diff_eq!(out[k + 1].re, expected[k].re, epsilon = 1e-12);
                assert_abs_diff_eq!(out[k + 1].im, expected[k].im, epsilon = 1e-12);
            }
            // U_phs is a unitary involution
            let sq = u_phs.dot(&u_phs);
            assert_eq!(sq, Array2::eye(9));
            let adj = u_phs.t().mapv(|z| z.conj());
            assert_eq!(adj.dot(&u_phs), Array2::eye(9));
        }
    }

    #[test]
    fn global_phase_distance() {
        let wp = WavePacket::new(
            vec![Complex64::new(0.6, 0.1), Complex64::new(-0.2, 0.77)],
            0.0,
        )
        .unwrap();
        assert!(wp.distance_up_to_global_phase(&wp.with_global_phase(2.1)) < 1e-15);
    }
}
