//! Constant/balanced binary functions and their phase encoding.
//!
//! A function over `2m` inputs is stored as a bit vector whose string form
//! reads register index 0 first, e.g. `"00001111"` has `f(|4>) = 1`.
//! Function value 0 maps to a 0° phase increment and value 1 to 180°.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest domain a [`BooleanFunction`] can hold.
pub const MAX_INPUTS: usize = 32;

/// Largest domain [`enumerate_all`] will expand.
pub const MAX_ENUMERATED_INPUTS: usize = 28;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BooleanFunction {
    // Register index 0 is the most significant of the `len` low bits, so
    // numeric order equals lexicographic order of the bit strings.
    bits: u32,
    len: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionCharacter {
    Constant,
    Balanced,
}

impl fmt::Display for FunctionCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionCharacter::Constant => "constant",
            FunctionCharacter::Balanced => "balanced",
        })
    }
}

fn check_len(len: usize) -> Result<()> {
    if len < 2 || !len.is_multiple_of(2) || len > MAX_INPUTS {
        return Err(Error::domain(format!(
            "function length must be even and within 2..={MAX_INPUTS}, got {len}"
        )));
    }
    Ok(())
}

fn mask(len: usize) -> u32 {
    if len == 32 {
        u32::MAX
    } else {
        (1u32 << len) - 1
    }
}

impl BooleanFunction {
    pub fn from_values(values: &[bool]) -> Result<Self> {
        check_len(values.len())?;
        let bits = values.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
        Ok(BooleanFunction {
            bits,
            len: values.len() as u8,
        })
    }

    fn from_raw(bits: u32, len: usize) -> Self {
        BooleanFunction {
            bits: bits & mask(len),
            len: len as u8,
        }
    }

    pub fn constant(len: usize, value: bool) -> Result<Self> {
        check_len(len)?;
        Ok(Self::from_raw(if value { u32::MAX } else { 0 }, len))
    }

    pub fn len(&self) -> usize {
        usize::from(self.len)
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `f(|k>)`.
    pub fn value(&self, k: usize) -> bool {
        assert!(k < self.len(), "index {k} out of range for length {}", self.len);
        (self.bits >> (self.len() - 1 - k)) & 1 == 1
    }

    pub fn values(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(|k| self.value(k))
    }

    pub fn ones(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// `(-1)^f(|k>)`.
    pub fn sign(&self, k: usize) -> f64 {
        if self.value(k) {
            -1.0
        } else {
            1.0
        }
    }

    pub fn character(&self) -> Result<FunctionCharacter> {
        match self.ones() {
            0 => Ok(FunctionCharacter::Constant),
            n if n == self.len() => Ok(FunctionCharacter::Constant),
            n if 2 * n == self.len() => Ok(FunctionCharacter::Balanced),
            _ => Err(Error::PromiseViolated {
                bits: self.to_string(),
            }),
        }
    }

    pub fn complement(&self) -> Self {
        Self::from_raw(!self.bits, self.len())
    }
}

impl fmt::Display for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in self.values() {
            f.write_str(if v { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanFunction({self})")
    }
}

impl FromStr for BooleanFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::domain(format!("invalid bit {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(&values)
    }
}

impl Serialize for BooleanFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BooleanFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Lazily generated constant-then-balanced functions over `len` inputs.
#[derive(Debug, Clone)]
pub struct FunctionStream {
    len: usize,
    stage: u8,
    next_balanced: Option<u32>,
}

impl Iterator for FunctionStream {
    type Item = BooleanFunction;

    fn next(&mut self) -> Option<BooleanFunction> {
        match self.stage {
            0 => {
                self.stage = 1;
                Some(BooleanFunction::from_raw(0, self.len))
            }
            1 => {
                self.stage = 2;
                Some(BooleanFunction::from_raw(u32::MAX, self.len))
            }
            _ => {
                let current = self.next_balanced?;
                self.next_balanced = next_same_popcount(current, self.len);
                Some(BooleanFunction::from_raw(current, self.len))
            }
        }
    }
}

// Gosper's hack: smallest integer above `x` with the same popcount, or
// `None` once it would need more than `len` bits.
fn next_same_popcount(x: u32, len: usize) -> Option<u32> {
    let x = u64::from(x);
    let lowest = x & x.wrapping_neg();
    let ripple = x + lowest;
    let next = ripple | (((x ^ ripple) >> 2) / lowest);
    (next >> len == 0).then_some(next as u32)
}

/// Streams all constant and balanced functions over `input_count` inputs:
/// the two constants first, then the balanced functions in lexicographic
/// order of their bit strings.
pub fn stream_all(input_count: usize) -> Result<FunctionStream> {
    check_len(input_count)?;
    if input_count > MAX_ENUMERATED_INPUTS {
        return Err(Error::domain(format!(
            "refusing to enumerate {input_count} inputs (limit {MAX_ENUMERATED_INPUTS})"
        )));
    }
    let half = input_count / 2;
    Ok(FunctionStream {
        len: input_count,
        stage: 0,
        next_balanced: Some((1u32 << half) - 1),
    })
}

pub fn enumerate_all(input_count: usize) -> Result<Vec<BooleanFunction>> {
    Ok(stream_all(input_count)?.collect())
}

/// Balanced functions only, in the same order as [`enumerate_all`].
pub fn stream_balanced(input_count: usize) -> Result<impl Iterator<Item = BooleanFunction>> {
    Ok(stream_all(input_count)?.skip(2))
}

/// C(n, k).
pub fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// One phase in degrees per register index, each reduced into `[0, 360)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseSet {
    phases: Vec<f64>,
}

/// Reduces an angle in degrees into `[0, 360)`.
pub fn wrap_degrees(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

impl PhaseSet {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::domain(format!("phase {bad} is not finite")));
        }
        Ok(PhaseSet {
            phases: phases.into_iter().map(wrap_degrees).collect(),
        })
    }

    pub fn zeros(len: usize) -> Self {
        PhaseSet {
            phases: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn degrees(&self) -> &[f64] {
        &self.phases
    }

    pub fn radians(&self) -> impl Iterator<Item = f64> + '_ {
        self.phases.iter().map(|p| p.to_radians())
    }

    /// Adds `offset` degrees to every entry.
    pub fn shifted(&self, offset: f64) -> Self {
        PhaseSet {
            phases: self.phases.iter().map(|p| wrap_degrees(p + offset)).collect(),
        }
    }
}

/// `phi_k = base_k + 180° f(|k>)`, reduced mod 360.
pub fn encode_phases(f: &BooleanFunction, base: &PhaseSet) -> Result<PhaseSet> {
    if f.len() != base.len() {
        return Err(Error::domain(format!(
            "function has {} inputs but base phase set has {} entries",
            f.len(),
            base.len()
        )));
    }
    Ok(PhaseSet {
        phases: base
            .phases
            .iter()
            .zip(f.values())
            .map(|(p, v)| wrap_degrees(if v { p + 180.0 } else { *p }))
            .collect(),
    })
}

/// The ten three-qubit functions whose transients were published, by label.
pub const REFERENCE_FUNCTIONS: [(&str, &str); 10] = [
    ("f1", "00000000"),
    ("f2", "11111111"),
    ("f3", "00001111"),
    ("f4", "11110000"),
    ("f5", "01111000"),
    ("f6", "10000111"),
    ("f7", "11000110"),
    ("f8", "00111001"),
    ("f9", "11101000"),
    ("f10", "00010111"),
];

/// Base phases (degrees) used in the Li₂ experiment for levels
/// (13,17), (13,19), ..., (16,19). They were tuned against the real
/// molecule, so under any other energy model they are just a fixed set.
pub const REFERENCE_BASE_PHASES: [f64; 8] = [298.1, 352.0, 215.9, 137.9, 169.7, 337.6, 192.1, 0.0];

/// Resolves `f1`..`f10` labels or literal bit strings.
pub fn lookup_function(name: &str) -> Result<BooleanFunction> {
    let name = name.trim();
    if let Some((_, bits)) = REFERENCE_FUNCTIONS.iter().find(|(label, _)| *label == name) {
        return bits.parse();
    }
    name.parse()
        .map_err(|e| Error::Selection(format!("unknown function {name:?}: {e}")))
}
