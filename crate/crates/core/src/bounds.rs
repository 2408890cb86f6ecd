//! Dispersal-versus-growth hypotheses and the empirical attracting region.
//!
//! When every diffusion supremum lies below the matching growth infimum, all
//! positive solutions enter a compact region bounded away from the coordinate
//! hyperplanes. The closed form of that region is not available here, so
//! [`estimate_ultimate_bounds`] measures it: an ensemble of seeded initial
//! states is integrated past a burn-in time and the componentwise extrema of
//! the tail are widened by a safety margin.
//!
//! Initial states are drawn from ChaCha8 seeded with `seed`, using the member
//! index as the stream id. Draws for member `m` therefore depend only on
//! `(seed, m)`, never on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::integrator::{integrate, IntegrationOptions};
use crate::model::{State, SystemParams, COMPONENT_NAMES};

/// One inequality `lhs < rhs` together with its slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    pub holds: bool,
}

impl InequalityRecord {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::with_margin(name, lhs, rhs, rhs - lhs)
    }

    /// For callers that compute the margin in a specific algebraic order.
    pub(crate) fn with_margin(name: impl Into<String>, lhs: f64, rhs: f64, margin: f64) -> Self {
        InequalityRecord { name: name.into(), lhs, rhs, margin, holds: margin > 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersalReport {
    pub inequalities: Vec<InequalityRecord>,
    pub holds: bool,
}

impl DispersalReport {
    pub fn margins(&self) -> Vec<f64> {
        self.inequalities.iter().map(|r| r.margin).collect()
    }
}

/// Evaluates `D1^M < r1^L`, `D2^M < r2^L`, `D1^M < s1^L`, `D2^M < s2^L`.
pub fn check_dispersal_bound(params: &SystemParams) -> DispersalReport {
    let d1 = params.d1.sup_bound();
    let d2 = params.d2.sup_bound();
    let inequalities = vec![
        InequalityRecord::new("D1^M < r1^L", d1, params.r1.inf_bound()),
        InequalityRecord::new("D2^M < r2^L", d2, params.r2.inf_bound()),
        InequalityRecord::new("D1^M < s1^L", d1, params.s1.inf_bound()),
        InequalityRecord::new("D2^M < s2^L", d2, params.s2.inf_bound()),
    ];
    let holds = inequalities.iter().all(|r| r.holds);
    DispersalReport { inequalities, holds }
}

/// Four numbers in state order `(x1, y1, x2, y2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Components {
    pub fn splat(v: f64) -> Self {
        Components { x1: v, y1: v, x2: v, y2: v }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Components { x1: a[0], y1: a[1], x2: a[2], y2: a[3] }
    }

    pub fn min(&self) -> f64 {
        self.to_array().into_iter().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionOptions {
    pub seed: u64,
    pub ensemble_size: usize,
    /// Each initial component is drawn uniformly from `[lo, hi)`.
    pub ic_box: (f64, f64),
    pub burn_in: f64,
    pub horizon: f64,
    /// Lower bounds are multiplied by `1 − margin`, upper by `1 + margin`.
    pub margin: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for RegionOptions {
    fn default() -> Self {
        RegionOptions {
            seed: 42,
            ensemble_size: 16,
            ic_box: (0.1, 5.0),
            burn_in: 100.0,
            horizon: 300.0,
            margin: 0.05,
            execution: Execution::default(),
        }
    }
}

impl RegionOptions {
    fn validate(&self) -> Result<()> {
        if self.ensemble_size == 0 {
            return Err(invalid("ensemble_size must be at least 1"));
        }
        let (lo, hi) = self.ic_box;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(invalid(format!("ic_box must satisfy 0 < lo < hi, got ({lo}, {hi})")));
        }
        if !(self.burn_in >= 0.0 && self.horizon > self.burn_in && self.horizon.is_finite()) {
            return Err(invalid(format!(
                "need 0 <= burn_in < horizon, got burn_in = {}, horizon = {}",
                self.burn_in, self.horizon
            )));
        }
        if !(0.0..1.0).contains(&self.margin) {
            return Err(invalid(format!("margin must lie in [0, 1), got {}", self.margin)));
        }
        Ok(())
    }

    /// Seeded initial state of ensemble member `member`.
    pub fn initial_state(&self, member: usize) -> State {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(member as u64);
        let (lo, hi) = self.ic_box;
        let z: [f64; 4] = std::array::from_fn(|_| rng.random_range(lo..hi));
        State::from_array(z).expect("ic_box is strictly positive")
    }
}

/// Componentwise ultimate bounds of the attracting region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionEstimate {
    pub lower: Components,
    pub upper: Components,
    pub burn_in: f64,
    pub horizon: f64,
    pub ensemble_size: usize,
    pub margin: f64,
}

impl RegionEstimate {
    /// A region given directly by its bounds, e.g. for what-if checks.
    pub fn from_bounds(lower: Components, upper: Components) -> Result<Self> {
        let region = RegionEstimate {
            lower,
            upper,
            burn_in: 0.0,
            horizon: 0.0,
            ensemble_size: 0,
            margin: 0.0,
        };
        region.check_lower()?;
        for ((name, lo), hi) in COMPONENT_NAMES.iter().zip(lower.to_array()).zip(upper.to_array()) {
            if !(hi > lo) {
                return Err(invalid(format!("upper bound of {name} ({hi}) must exceed lower ({lo})")));
            }
        }
        Ok(region)
    }

    pub(crate) fn check_lower(&self) -> Result<()> {
        for (component, value) in COMPONENT_NAMES.iter().zip(self.lower.to_array()) {
            if !(value > 0.0) {
                return Err(Error::DegenerateRegion { component, value });
            }
        }
        Ok(())
    }

    pub fn contains(&self, z: &[f64; 4]) -> bool {
        let (lo, hi) = (self.lower.to_array(), self.upper.to_array());
        (0..4).all(|i| z[i] >= lo[i] && z[i] <= hi[i])
    }

    /// The same observed extrema with a different margin.
    pub fn with_margin(&self, margin: f64) -> Self {
        let observed_lo = self.lower.to_array().map(|v| v / (1.0 - self.margin));
        let observed_hi = self.upper.to_array().map(|v| v / (1.0 + self.margin));
        RegionEstimate {
            lower: Components::from_array(observed_lo.map(|v| v * (1.0 - margin))),
            upper: Components::from_array(observed_hi.map(|v| v * (1.0 + margin))),
            margin,
            ..self.clone()
        }
    }
}

/// Integrates `opts.ensemble_size` seeded trajectories over `[0, horizon]` and
/// bounds every recorded state with `t ≥ burn_in`.
pub fn estimate_ultimate_bounds(
    params: &SystemParams,
    opts: &RegionOptions,
    integration: &IntegrationOptions,
) -> Result<RegionEstimate> {
    opts.validate()?;
    let dispersal = check_dispersal_bound(params);
    if !dispersal.holds {
        return Err(invalid(
            "dispersal bounds do not hold; no attracting region is guaranteed",
        ));
    }
    let members: Vec<usize> = (0..opts.ensemble_size).collect();
    let extrema = opts.execution.map(&members, |&m| -> Result<([f64; 4], [f64; 4])> {
        let traj = integrate(params, &opts.initial_state(m), 0.0, opts.horizon, integration)?;
        let mut lo = [f64::INFINITY; 4];
        let mut hi = [f64::NEG_INFINITY; 4];
        for (_, z) in traj.iter().filter(|(t, _)| *t >= opts.burn_in) {
            for i in 0..4 {
                lo[i] = lo[i].min(z[i]);
                hi[i] = hi[i].max(z[i]);
            }
        }
        Ok((lo, hi))
    });

    let mut lo = [f64::INFINITY; 4];
    let mut hi = [f64::NEG_INFINITY; 4];
    for member in extrema {
        let (l, h) = member?;
        for i in 0..4 {
            lo[i] = lo[i].min(l[i]);
            hi[i] = hi[i].max(h[i]);
        }
    }
    if lo.iter().any(|v| !v.is_finite()) {
        return Err(invalid("no samples recorded after burn-in; reduce record_stride"));
    }
    let region = RegionEstimate {
        lower: Components::from_array(lo.map(|v| v * (1.0 - opts.margin))),
        upper: Components::from_array(hi.map(|v| v * (1.0 + opts.margin))),
        burn_in: opts.burn_in,
        horizon: opts.horizon,
        ensemble_size: opts.ensemble_size,
        margin: opts.margin,
    };
    region.check_lower()?;
    Ok(region)
}
