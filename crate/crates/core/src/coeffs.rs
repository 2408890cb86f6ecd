//! Quasi-periodic coefficient functions.
//!
//! Every time-varying rate of the model is a finite trigonometric sum
//! `c + Σ aₖ·trig(ωₖ t)`. For rationally independent frequencies the
//! infimum and supremum over `[0, ∞)` are `c ∓ Σ|aₖ|`; for dependent
//! frequencies those values are outer bounds.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub amplitude: f64,
    #[serde(with = "frequency")]
    pub frequency: f64,
    pub kind: TrigKind,
}

impl Term {
    pub fn sin(amplitude: f64, frequency: f64) -> Self {
        Term { amplitude, frequency, kind: TrigKind::Sin }
    }

    pub fn cos(amplitude: f64, frequency: f64) -> Self {
        Term { amplitude, frequency, kind: TrigKind::Cos }
    }

    #[inline]
    fn eval(&self, t: f64) -> f64 {
        let phase = self.frequency * t;
        self.amplitude
            * match self.kind {
                TrigKind::Sin => phase.sin(),
                TrigKind::Cos => phase.cos(),
            }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoefficient")]
pub struct QuasiPeriodicCoefficient {
    pub constant: f64,
    #[serde(default)]
    pub terms: Vec<Term>,
}

#[derive(Deserialize)]
struct RawCoefficient {
    constant: f64,
    #[serde(default)]
    terms: Vec<Term>,
}

impl TryFrom<RawCoefficient> for QuasiPeriodicCoefficient {
    type Error = crate::Error;

    fn try_from(raw: RawCoefficient) -> Result<Self> {
        QuasiPeriodicCoefficient::new(raw.constant, raw.terms)
    }
}

impl QuasiPeriodicCoefficient {
    /// Checks that every number is finite and every frequency positive.
    /// Nonnegativity is a model-level property, see
    /// [`validate_params`](crate::model::validate_params).
    pub fn new(constant: f64, terms: Vec<Term>) -> Result<Self> {
        if !constant.is_finite() {
            return Err(invalid(format!("coefficient constant {constant} is not finite")));
        }
        for term in &terms {
            if !term.amplitude.is_finite() {
                return Err(invalid(format!("amplitude {} is not finite", term.amplitude)));
            }
            if !(term.frequency.is_finite() && term.frequency > 0.0) {
                return Err(invalid(format!(
                    "frequency {} must be finite and positive",
                    term.frequency
                )));
            }
        }
        Ok(QuasiPeriodicCoefficient { constant, terms })
    }

    pub fn constant(value: f64) -> Self {
        QuasiPeriodicCoefficient { constant: value, terms: Vec::new() }
    }

    /// `constant + amplitude·(sin(√2 t) + sin(t))`, the shape used throughout
    /// the built-in example.
    pub fn sin_pair(constant: f64, amplitude: f64) -> Self {
        QuasiPeriodicCoefficient {
            constant,
            terms: vec![
                Term::sin(amplitude, std::f64::consts::SQRT_2),
                Term::sin(amplitude, 1.0),
            ],
        }
    }

    /// `constant + amplitude·(cos(√2 t) + cos(t))`.
    pub fn cos_pair(constant: f64, amplitude: f64) -> Self {
        QuasiPeriodicCoefficient {
            constant,
            terms: vec![
                Term::cos(amplitude, std::f64::consts::SQRT_2),
                Term::cos(amplitude, 1.0),
            ],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = self.constant;
        for term in &self.terms {
            acc += term.eval(t);
        }
        acc
    }

    /// Same value as [`eval`](Self::eval), bit for bit, with the
    /// trigonometric evaluations shared through `cache`.
    #[inline]
    pub(crate) fn eval_cached(&self, cache: &mut PhaseCache) -> f64 {
        let mut acc = self.constant;
        for term in &self.terms {
            let (s, c) = cache.sin_cos(term.frequency);
            acc += term.amplitude
                * match term.kind {
                    TrigKind::Sin => s,
                    TrigKind::Cos => c,
                };
        }
        acc
    }

    pub fn amplitude_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.abs()).sum()
    }

    /// Lower bound `f^L`; exact for rationally independent frequencies.
    pub fn inf_bound(&self) -> f64 {
        self.constant - self.amplitude_sum()
    }

    /// Upper bound `f^M`; exact for rationally independent frequencies.
    pub fn sup_bound(&self) -> f64 {
        self.constant + self.amplitude_sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.inf_bound() >= 0.0
    }

    /// Min and max of the coefficient over `{0, step, 2·step, …} ∩ [0, horizon]`.
    pub fn empirical_extrema(&self, horizon: f64, step: f64) -> Result<(f64, f64)> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid(format!("step must be positive, got {step}")));
        }
        let n = (horizon / step).floor() as u64;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..=n {
            let v = self.eval(k as f64 * step);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok((lo, hi))
    }
}

/// Per-time memo of `(sin ωt, cos ωt)` keyed by the bit pattern of ω.
///
/// The example system uses only two distinct frequencies across its 14
/// coefficients, so this cuts the trigonometric work per vector-field
/// evaluation from 28 calls to 4.
pub(crate) struct PhaseCache {
    t: f64,
    len: usize,
    entries: [(u64, f64, f64); PhaseCache::CAPACITY],
}

impl PhaseCache {
    const CAPACITY: usize = 8;

    pub(crate) fn new(t: f64) -> Self {
        PhaseCache { t, len: 0, entries: [(0, 0.0, 0.0); Self::CAPACITY] }
    }

    #[inline]
    fn sin_cos(&mut self, frequency: f64) -> (f64, f64) {
        let key = frequency.to_bits();
        for &(k, s, c) in &self.entries[..self.len] {
            if k == key {
                return (s, c);
            }
        }
        let phase = frequency * self.t;
        let (s, c) = (phase.sin(), phase.cos());
        if self.len < Self::CAPACITY {
            self.entries[self.len] = (key, s, c);
            self.len += 1;
        }
        (s, c)
    }
}

/// Frequencies serialize as numbers, except √2 which round-trips through the
/// literal string `"sqrt2"`.
mod frequency {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::f64::consts::SQRT_2;
    use std::fmt;

    pub const SQRT2_TOKEN: &str = "sqrt2";

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if value.to_bits() == SQRT_2.to_bits() {
            s.serialize_str(SQRT2_TOKEN)
        } else {
            s.serialize_f64(*value)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct FrequencyVisitor;

        impl Visitor<'_> for FrequencyVisitor {
            type Value = f64;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive number or the string \"sqrt2\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                if v == SQRT2_TOKEN {
                    Ok(SQRT_2)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        d.deserialize_any(FrequencyVisitor)
    }
}
