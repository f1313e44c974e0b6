//! Rovibrational register: which molecular levels stand in for which
//! computational basis states, and where those levels sit in energy.
//!
//! Register index `k` runs most-significant-qubit-first, so for three
//! qubits `k = 5` is the bit string `101`. The default register pairs
//! consecutive vibrational levels `v = 13, 14, ...` with the rotational
//! doublet `J = 17, 19`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in cm/ps.
const SPEED_OF_LIGHT_CM_PER_PS: f64 = 0.029_979_245_8;

/// Highest vibrational quantum number the energy model is trusted for.
pub const VIBRATIONAL_CAP: u32 = 100;

/// Converts a wavenumber in cm⁻¹ to an angular frequency in rad/ps.
///
/// This is the only place the unit conversion happens; everything at rest
/// is kept in cm⁻¹.
#[inline]
pub fn wavenumber_to_angular(wavenumber: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT_CM_PER_PS * wavenumber
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RovibrationalLevel {
    pub v: u32,
    #[serde(rename = "J")]
    pub j: u32,
    /// Term energy in cm⁻¹.
    pub energy: f64,
}

/// Dunham-style constants for one electronic state, all in cm⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectroscopicConstants {
    pub omega_e: f64,
    pub omega_e_x_e: f64,
    pub b_e: f64,
    pub alpha_e: f64,
    pub t_e: f64,
}

impl Default for SpectroscopicConstants {
    /// Representative values only. The vibrational constants are chosen so
    /// that four vibrational levels with a J = 17/19 doublet fit inside a
    /// 150 cm⁻¹ pulse bandwidth and a 128 x 4.2 cm⁻¹ shaper window.
    fn default() -> Self {
        SpectroscopicConstants {
            omega_e: 80.0,
            omega_e_x_e: 0.35,
            b_e: 0.5,
            alpha_e: 0.005,
            t_e: 0.0,
        }
    }
}

impl SpectroscopicConstants {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("omega_e", self.omega_e),
            ("omega_e_x_e", self.omega_e_x_e),
            ("b_e", self.b_e),
            ("alpha_e", self.alpha_e),
            ("t_e", self.t_e),
        ];
        if let Some((name, _)) = all.iter().find(|(_, x)| !x.is_finite()) {
            return Err(Error::ModelValidity(format!("{name} is not finite")));
        }
        if self.omega_e <= 0.0 {
            return Err(Error::ModelValidity("omega_e must be positive".into()));
        }
        if self.b_e <= 0.0 {
            return Err(Error::ModelValidity("b_e must be positive".into()));
        }
        if self.omega_e_x_e < 0.0 || self.alpha_e < 0.0 {
            return Err(Error::ModelValidity(
                "omega_e_x_e and alpha_e must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Effective rotational constant B_v = B_e - alpha_e (v + 1/2).
    pub fn rotational_constant(&self, v: u32) -> f64 {
        self.b_e - self.alpha_e * (f64::from(v) + 0.5)
    }
}

/// Term energy E(v, J) = T_e + G(v) + B_v J(J+1), in cm⁻¹.
pub fn term_energy(constants: &SpectroscopicConstants, v: u32, j: u32) -> Result<f64> {
    let x = f64::from(v) + 0.5;
    let b_v = constants.rotational_constant(v);
    let rotational = f64::from(j) * f64::from(j + 1);
    if b_v <= 0.0 && rotational > 0.0 {
        return Err(Error::ModelValidity(format!(
            "effective rotational constant {b_v} <= 0 at v = {v}"
        )));
    }
    let vibrational = constants.omega_e * x - constants.omega_e_x_e * x * x;
    Ok(constants.t_e + vibrational + b_v * rotational)
}

/// Most-significant-bit-first binary expansion of `k` over `n` bits.
pub fn index_to_bits(k: usize, n: u32) -> Result<String> {
    if n == 0 || n >= usize::BITS || k >= (1usize << n) {
        return Err(Error::domain(format!("index {k} out of range for {n} qubits")));
    }
    Ok((0..n)
        .rev()
        .map(|bit| if (k >> bit) & 1 == 1 { '1' } else { '0' })
        .collect())
}

/// Inverse of [`index_to_bits`].
pub fn bits_to_index(bits: &str) -> Result<usize> {
    if bits.is_empty() || bits.len() >= usize::BITS as usize {
        return Err(Error::domain(format!("bad bit string length {}", bits.len())));
    }
    bits.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        other => Err(Error::domain(format!("invalid bit character {other:?}"))),
    })
}

/// The ordered register of levels. List order is the register index.
///
/// Registers of any even size are accepted so that functions over `2m`
/// inputs can be run; [`LevelBasis::qubits`] is `Some(n)` only when the
/// size is a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelBasis {
    levels: Vec<RovibrationalLevel>,
}

impl LevelBasis {
    pub fn new(levels: Vec<RovibrationalLevel>) -> Result<Self> {
        if levels.len() < 2 || !levels.len().is_multiple_of(2) {
            return Err(Error::domain(format!(
                "register needs an even number (>= 2) of levels, got {}",
                levels.len()
            )));
        }
        for (i, a) in levels.iter().enumerate() {
            if !a.energy.is_finite() {
                return Err(Error::ModelValidity(format!(
                    "level (v={}, J={}) has non-finite energy",
                    a.v, a.j
                )));
            }
            if levels[..i].iter().any(|b| b.v == a.v && b.j == a.j) {
                return Err(Error::domain(format!(
                    "level (v={}, J={}) appears twice",
                    a.v, a.j
                )));
            }
        }
        Ok(LevelBasis { levels })
    }

    /// Builds a register from `(v, J)` labels, evaluating energies with
    /// the given constants.
    pub fn from_labels(labels: &[(u32, u32)], constants: &SpectroscopicConstants) -> Result<Self> {
        constants.validate()?;
        let levels = labels
            .iter()
            .map(|&(v, j)| {
                Ok(RovibrationalLevel {
                    v,
                    j,
                    energy: term_energy(constants, v, j)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels)
    }

    /// `size` levels laid out as `v = v_start + k / |J|`, `J = j_values[k % |J|]`.
    ///
    /// With `size = 8`, `v_start = 13`, `j_values = [17, 19]` this is the
    /// three-qubit register (13,17), (13,19), (14,17), ..., (16,19).
    pub fn ladder(
        size: usize,
        v_start: u32,
        j_values: &[u32],
        constants: &SpectroscopicConstants,
    ) -> Result<Self> {
        if j_values.is_empty() {
            return Err(Error::domain("rotational ladder needs at least one J"));
        }
        let labels: Vec<(u32, u32)> = (0..size)
            .map(|k| (v_start + (k / j_values.len()) as u32, j_values[k % j_values.len()]))
            .collect();
        if labels.iter().any(|&(v, _)| v > VIBRATIONAL_CAP) {
            return Err(Error::ModelValidity(format!(
                "register reaches beyond v = {VIBRATIONAL_CAP}"
            )));
        }
        Self::from_labels(&labels, constants)
    }

    /// The default three-qubit register.
    pub fn three_qubit(constants: &SpectroscopicConstants) -> Result<Self> {
        Self::ladder(8, 13, &[17, 19], constants)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn qubits(&self) -> Option<u32> {
        self.levels
            .len()
            .is_power_of_two()
            .then(|| self.levels.len().trailing_zeros())
    }

    pub fn levels(&self) -> &[RovibrationalLevel] {
        &self.levels
    }

    pub fn level_for_index(&self, k: usize) -> Result<RovibrationalLevel> {
        self.levels.get(k).copied().ok_or_else(|| {
            Error::domain(format!("index {k} out of range for {} levels", self.len()))
        })
    }

    pub fn index_of(&self, v: u32, j: u32) -> Option<usize> {
        self.levels.iter().position(|l| l.v == v && l.j == j)
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_constants() -> SpectroscopicConstants {
        SpectroscopicConstants {
            omega_e: 0.0,
            omega_e_x_e: 0.0,
            b_e: 0.0,
            alpha_e: 0.0,
            t_e: 0.0,
        }
    }

    #[test]
    fn bits_msb_first() {
        assert_eq!(index_to_bits(5, 3).unwrap(), "101");
        assert_eq!(index_to_bits(0, 3).unwrap(), "000");
        assert_eq!(index_to_bits(7, 3).unwrap(), "111");
        assert!(matches!(index_to_bits(8, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn bits_round_trip() {
        for n in 1..=6 {
            let all: Vec<String> = (0..1usize << n).map(|k| index_to_bits(k, n).unwrap()).collect();
            for (k, s) in all.iter().enumerate() {
                assert_eq!(bits_to_index(s).unwrap(), k);
            }
            let mut dedup = all.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), all.len());
        }
        assert!(bits_to_index("10a").is_err());
    }

    #[test]
    fn three_qubit_table() {
        let basis = LevelBasis::three_qubit(&SpectroscopicConstants::default()).unwrap();
        let expected = [
            (13, 17),
            (13, 19),
            (14, 17),
            (14, 19),
            (15, 17),
            (15, 19),
            (16, 17),
            (16, 19),
        ];
        assert_eq!(basis.qubits(), Some(3));
        for (k, &(v, j)) in expected.iter().enumerate() {
            let level = basis.level_for_index(k).unwrap();
            assert_eq!((level.v, level.j), (v, j));
            assert_eq!(basis.index_of(v, j), Some(k));
        }
        assert!(basis.level_for_index(8).is_err());
    }

    #[test]
    fn term_energy_closed_form() {
        assert_eq!(term_energy(&zero_constants(), 13, 0).unwrap(), 0.0);
        let pure_rotor = SpectroscopicConstants {
            b_e: 1.0,
            ..zero_constants()
        };
        assert_eq!(term_energy(&pure_rotor, 0, 17).unwrap(), 306.0);

        // Hand evaluation: x = 13.5,
        // 255*13.5 = 3442.5, 1.6*13.5^2 = 291.6,
        // (0.5 - 0.005*13.5)*17*18 = 0.4325*306 = 132.345
        // => 3442.5 - 291.6 + 132.345 = 3283.245
        let c = SpectroscopicConstants {
            omega_e: 255.0,
            omega_e_x_e: 1.6,
            b_e: 0.50,
            alpha_e: 0.005,
            t_e: 0.0,
        };
        approx::assert_relative_eq!(term_energy(&c, 13, 17).unwrap(), 3283.245, epsilon = 1e-9);
    }

    #[test]
    fn negative_rotational_constant_rejected() {
        let c = SpectroscopicConstants {
            omega_e: 100.0,
            omega_e_x_e: 0.0,
            b_e: 0.1,
            alpha_e: 0.01,
            t_e: 0.0,
        };
        assert!(matches!(term_energy(&c, 20, 17), Err(Error::ModelValidity(_))));
        assert!(term_energy(&c, 20, 0).is_ok());
    }

    #[test]
    fn default_energies_increase_with_v() {
        let c = SpectroscopicConstants::default();
        for j in [0, 17, 19] {
            let mut prev = f64::NEG_INFINITY;
            for v in 0..=VIBRATIONAL_CAP {
                if j > 0 && c.rotational_constant(v) <= 0.0 {
                    assert!(matches!(term_energy(&c, v, j), Err(Error::ModelValidity(_))));
                    continue;
                }
                let e = term_energy(&c, v, j).unwrap();
                assert!(e.is_finite() && e > prev, "v={v} J={j}");
                prev = e;
            }
        }
    }

    #[test]
    fn rotational_spacing_below_vibrational() {
        let c = SpectroscopicConstants::default();
        for v in 13..16 {
            let rot = term_energy(&c, v, 19).unwrap() - term_energy(&c, v, 17).unwrap();
            let vib = term_energy(&c, v + 1, 17).unwrap() - term_energy(&c, v, 17).unwrap();
            assert!(rot > 0.0 && rot < vib, "v={v}: rot {rot} vib {vib}");
        }
    }

    #[test]
    fn rejects_odd_or_duplicate_registers() {
        let c = SpectroscopicConstants::default();
        assert!(LevelBasis::from_labels(&[(13, 17), (13, 19), (14, 17)], &c).is_err());
        assert!(LevelBasis::from_labels(&[(13, 17), (13, 17)], &c).is_err());
        let six = LevelBasis::ladder(6, 13, &[17, 19], &c).unwrap();
        assert_eq!(six.len(), 6);
        assert_eq!(six.qubits(), None);
    }

    #[test]
    fn unit_conversion() {
        approx::assert_relative_eq!(
            wavenumber_to_angular(1.0),
            2.0 * PI * 0.0299792458,
            max_relative = 1e-15
        );
    }
}
