//! The two-patch competitive system and its paired copy.
//!
//! State order is `(x1, y1, x2, y2)` everywhere: species x and y on patch 1,
//! then on patch 2.
//!
//! ```text
//! x1' = x1 (r1 - a11 x1 - a12 y1) + D1 (x2 - x1)
//! y1' = y1 (r2 - a21 x1 - a22 y1) + D2 (y2 - y1)
//! x2' = x2 (s1 - b11 x2 - b12 y2) + D1 (x1 - x2)
//! y2' = y2 (s2 - b21 x2 - b22 y2) + D2 (y1 - y2)
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coeffs::{PhaseCache, QuasiPeriodicCoefficient as Coef};
use crate::error::{Error, Result};

pub const COMPONENT_NAMES: [&str; 4] = ["x1", "y1", "x2", "y2"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub r1: Coef,
    pub r2: Coef,
    pub s1: Coef,
    pub s2: Coef,
    pub a11: Coef,
    pub a12: Coef,
    pub a21: Coef,
    pub a22: Coef,
    pub b11: Coef,
    pub b12: Coef,
    pub b21: Coef,
    pub b22: Coef,
    #[serde(rename = "D1")]
    pub d1: Coef,
    #[serde(rename = "D2")]
    pub d2: Coef,
}

/// Coefficient values frozen at one instant.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Rates {
    r1: f64,
    r2: f64,
    s1: f64,
    s2: f64,
    a11: f64,
    a12: f64,
    a21: f64,
    a22: f64,
    b11: f64,
    b12: f64,
    b21: f64,
    b22: f64,
    d1: f64,
    d2: f64,
}

impl SystemParams {
    /// All coefficients with their display names, in a fixed order.
    pub fn named(&self) -> [(&'static str, &Coef); 14] {
        [
            ("r1", &self.r1),
            ("r2", &self.r2),
            ("s1", &self.s1),
            ("s2", &self.s2),
            ("a11", &self.a11),
            ("a12", &self.a12),
            ("a21", &self.a21),
            ("a22", &self.a22),
            ("b11", &self.b11),
            ("b12", &self.b12),
            ("b21", &self.b21),
            ("b22", &self.b22),
            ("D1", &self.d1),
            ("D2", &self.d2),
        ]
    }

    /// All fourteen coefficients set to constants; diffusion and interaction
    /// terms default to zero so tests can switch on only what they need.
    pub fn constant(growth: [f64; 4], interaction: [f64; 8], diffusion: [f64; 2]) -> Self {
        let c = Coef::constant;
        let [r1, r2, s1, s2] = growth;
        let [a11, a12, a21, a22, b11, b12, b21, b22] = interaction;
        SystemParams {
            r1: c(r1),
            r2: c(r2),
            s1: c(s1),
            s2: c(s2),
            a11: c(a11),
            a12: c(a12),
            a21: c(a21),
            a22: c(a22),
            b11: c(b11),
            b12: c(b12),
            b21: c(b21),
            b22: c(b22),
            d1: c(diffusion[0]),
            d2: c(diffusion[1]),
        }
    }

    /// Multiplies every interaction coefficient `aᵢⱼ`, `bᵢⱼ` by `factor`.
    pub fn scale_interactions(&self, factor: f64) -> Self {
        let scale = |c: &Coef| Coef {
            constant: c.constant * factor,
            terms: c
                .terms
                .iter()
                .map(|t| crate::coeffs::Term { amplitude: t.amplitude * factor, ..*t })
                .collect(),
        };
        SystemParams {
            a11: scale(&self.a11),
            a12: scale(&self.a12),
            a21: scale(&self.a21),
            a22: scale(&self.a22),
            b11: scale(&self.b11),
            b12: scale(&self.b12),
            b21: scale(&self.b21),
            b22: scale(&self.b22),
            ..self.clone()
        }
    }

    #[inline]
    pub(crate) fn rates(&self, t: f64) -> Rates {
        let mut cache = PhaseCache::new(t);
        let mut e = |c: &Coef| c.eval_cached(&mut cache);
        Rates {
            r1: e(&self.r1),
            r2: e(&self.r2),
            s1: e(&self.s1),
            s2: e(&self.s2),
            a11: e(&self.a11),
            a12: e(&self.a12),
            a21: e(&self.a21),
            a22: e(&self.a22),
            b11: e(&self.b11),
            b12: e(&self.b12),
            b21: e(&self.b21),
            b22: e(&self.b22),
            d1: e(&self.d1),
            d2: e(&self.d2),
        }
    }
}

impl Rates {
    #[inline]
    pub(crate) fn field(&self, z: &[f64]) -> [f64; 4] {
        let (x1, y1, x2, y2) = (z[0], z[1], z[2], z[3]);
        [
            x1 * (self.r1 - self.a11 * x1 - self.a12 * y1) + self.d1 * (x2 - x1),
            y1 * (self.r2 - self.a21 * x1 - self.a22 * y1) + self.d2 * (y2 - y1),
            x2 * (self.s1 - self.b11 * x2 - self.b12 * y2) + self.d1 * (x1 - x2),
            y2 * (self.s2 - self.b21 * x2 - self.b22 * y2) + self.d2 * (y1 - y2),
        ]
    }
}

/// A coefficient that can go negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub name: &'static str,
    pub inf_bound: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} has lower bound {} < 0", self.name, self.inf_bound)
    }
}

/// Accepts iff every coefficient satisfies `constant − Σ|amplitude| ≥ 0`;
/// otherwise lists every offending coefficient.
pub fn validate_params(params: &SystemParams) -> Result<()> {
    let violations: Vec<Violation> = params
        .named()
        .into_iter()
        .filter(|(_, c)| !c.is_nonnegative())
        .map(|(name, c)| Violation { name, inf_bound: c.inf_bound() })
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(violations))
    }
}

/// Population densities, all strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct State([f64; 4]);

impl State {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        Self::from_array([x1, y1, x2, y2])
    }

    pub fn from_array(z: [f64; 4]) -> Result<Self> {
        for (name, &value) in COMPONENT_NAMES.iter().zip(&z) {
            // NaN fails this too.
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveState { name, value });
            }
        }
        Ok(State(z))
    }

    pub fn uniform(value: f64) -> Result<Self> {
        Self::from_array([value; 4])
    }

    pub fn as_array(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn to_array(self) -> [f64; 4] {
        self.0
    }

    pub fn x1(&self) -> f64 {
        self.0[0]
    }

    pub fn y1(&self) -> f64 {
        self.0[1]
    }

    pub fn x2(&self) -> f64 {
        self.0[2]
    }

    pub fn y2(&self) -> f64 {
        self.0[3]
    }
}

impl TryFrom<[f64; 4]> for State {
    type Error = Error;

    fn try_from(z: [f64; 4]) -> Result<Self> {
        State::from_array(z)
    }
}

impl From<State> for [f64; 4] {
    fn from(s: State) -> Self {
        s.0
    }
}

/// A solution and its shadow copy, integrated side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedState {
    pub primary: State,
    pub shadow: State,
}

impl PairedState {
    pub fn to_array(self) -> [f64; 8] {
        let mut out = [0.0; 8];
        out[..4].copy_from_slice(self.primary.as_array());
        out[4..].copy_from_slice(self.shadow.as_array());
        out
    }

    pub fn from_array(z: [f64; 8]) -> Result<Self> {
        Ok(PairedState {
            primary: State::from_array([z[0], z[1], z[2], z[3]])?,
            shadow: State::from_array([z[4], z[5], z[6], z[7]])?,
        })
    }
}

/// Time derivative `(x1', y1', x2', y2')` at `(t, z)`.
pub fn rhs(params: &SystemParams, t: f64, z: &State) -> [f64; 4] {
    params.rates(t).field(z.as_array())
}

/// Derivative of the uncoupled product system: the first four components
/// belong to `pz.primary`, the last four to `pz.shadow`.
pub fn adjoint_rhs(params: &SystemParams, t: f64, pz: &PairedState) -> [f64; 8] {
    let rates = params.rates(t);
    let a = rates.field(pz.primary.as_array());
    let b = rates.field(pz.shadow.as_array());
    [a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]]
}

/// The worked example with frequencies 1 and √2.
///
/// The printed form of this example has `D1(x2 − x1)` in the `x2'` equation.
/// That breaks the exchange structure of the model, so the patch-2 equation
/// here uses `D1(x1 − x2)` like every other diffusion term.
pub fn example51() -> SystemParams {
    SystemParams {
        r1: Coef::sin_pair(5.0, 0.5),
        a11: Coef::cos_pair(2.5, 0.5),
        a12: Coef::sin_pair(2.2, 0.3),
        d1: Coef::cos_pair(1.0, 0.1),
        r2: Coef::sin_pair(5.0, 0.4),
        a21: Coef::cos_pair(2.25, 0.6),
        a22: Coef::sin_pair(2.4, 0.4),
        d2: Coef::sin_pair(1.0, 0.2),
        s1: Coef::cos_pair(4.0, 0.5),
        b11: Coef::sin_pair(2.4, 0.7),
        b12: Coef::cos_pair(2.3, 0.5),
        s2: Coef::cos_pair(4.0, 0.3),
        b21: Coef::sin_pair(2.3, 0.5),
        b22: Coef::cos_pair(2.5, 0.3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::Term;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn example_is_valid() {
        validate_params(&example51()).unwrap();
        validate_params(&SystemParams::constant([1.0; 4], [0.5; 8], [0.1; 2])).unwrap();
    }

    #[test]
    fn validation_names_every_violation() {
        let mut p = example51();
        p.a11 = Coef::new(0.1, vec![Term::sin(0.5, 1.0)]).unwrap();
        p.d2 = Coef::constant(-1.0);
        match validate_params(&p) {
            Err(Error::Validation(v)) => {
                let names: Vec<_> = v.iter().map(|x| x.name).collect();
                assert_eq!(names, vec!["a11", "D2"]);
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn rhs_example_at_origin_time() {
        // At t = 0 every sine pair is 0 and every cosine pair is 2.
        let d = rhs(&example51(), 0.0, &State::uniform(1.0).unwrap());
        assert_close(&d, &[-0.7, -0.85, -0.7, -0.8], 1e-12);
    }

    #[test]
    fn diffusion_vanishes_on_diagonal() {
        let with = example51();
        let mut without = with.clone();
        without.d1 = Coef::constant(0.0);
        without.d2 = Coef::constant(0.0);
        let z = State::new(0.7, 1.3, 0.7, 1.3).unwrap();
        for k in 0..50 {
            let t = k as f64 * 0.37;
            assert_eq!(rhs(&with, t, &z), rhs(&without, t, &z));
        }
    }

    #[test]
    fn logistic_fixed_point() {
        let mut interaction = [0.0; 8];
        interaction[0] = 1.0;
        let p = SystemParams::constant([1.0, 0.0, 0.0, 0.0], interaction, [0.0; 2]);
        let d = rhs(&p, 3.0, &State::new(1.0, 0.5, 2.0, 0.3).unwrap());
        assert_eq!(d[0], 0.0);
    }

    #[test]
    fn state_rejects_nonpositive() {
        assert!(State::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(State::new(1.0, 1.0, -2.0, 1.0).is_err());
        assert!(State::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
        assert!(serde_json::from_str::<State>("[1, 1, 0, 1]").is_err());
        let s: State = serde_json::from_str("[1, 2, 3, 4]").unwrap();
        assert_eq!(s.y2(), 4.0);
    }

    #[test]
    fn adjoint_duplicates_rhs() {
        let p = example51();
        let one = State::uniform(1.0).unwrap();
        let pz = PairedState { primary: one, shadow: one };
        assert_close(
            &adjoint_rhs(&p, 0.0, &pz),
            &[-0.7, -0.85, -0.7, -0.8, -0.7, -0.85, -0.7, -0.8],
            1e-12,
        );

        let a = State::new(1.0, 2.0, 0.5, 1.5).unwrap();
        let b = State::new(0.2, 0.4, 2.0, 3.0).unwrap();
        let t = 4.2;
        let ab = adjoint_rhs(&p, t, &PairedState { primary: a, shadow: b });
        let ba = adjoint_rhs(&p, t, &PairedState { primary: b, shadow: a });
        assert_eq!(ab[..4], ba[4..]);
        assert_eq!(ab[4..], ba[..4]);
        assert_eq!(ab[..4], rhs(&p, t, &a));
        assert_eq!(ab[4..], rhs(&p, t, &b));
    }

    #[test]
    fn rates_match_direct_evaluation() {
        let p = example51();
        for k in 0..100 {
            let t = k as f64 * 1.1;
            let r = p.rates(t);
            assert_eq!(r.a12.to_bits(), p.a12.eval(t).to_bits());
            assert_eq!(r.d2.to_bits(), p.d2.eval(t).to_bits());
            assert_eq!(r.s1.to_bits(), p.s1.eval(t).to_bits());
        }
    }

    #[test]
    fn interaction_scaling() {
        let p = example51().scale_interactions(2.0);
        assert_eq!(p.a11.inf_bound(), 3.0);
        assert_eq!(p.r1, example51().r1);
    }
}
