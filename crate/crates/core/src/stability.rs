//! Contraction certificate, Lyapunov decay and global attractivity.
//!
//! On the attracting region the log-distance
//!
//! ```text
//! V(z, z̃) = Σᵢ |ln xᵢ − ln x̃ᵢ| + Σᵢ |ln yᵢ − ln ỹᵢ|
//! ```
//!
//! between any two solutions satisfies `D⁺V ≤ −c·V` whenever the four margins
//!
//! ```text
//! P1 = a11^L + a21^L − D1^M / x2^L      P2 = b11^L + b21^L − D1^M / x1^L
//! P3 = a12^L + a22^L − D2^M / y2^L      P4 = b12^L + b22^L − D2^M / y1^L
//! ```
//!
//! are positive, with `η = min Pᵢ` and `c = min(η·x1^L, η·y1^L, η·x2^L, η·y2^L)`.
//! The four case-defined diffusion comparison terms of that estimate are not
//! evaluated one by one; [`verify_decay`] checks their combined consequence,
//! the exponential envelope `V(t) ≤ V(t₀)·e^{−c(t−t₀)}`, on integrated paired
//! trajectories.

use serde::{Deserialize, Serialize};

use crate::bounds::{InequalityRecord, RegionEstimate};
use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::integrator::{integrate, integrate_paired, IntegrationOptions, Trajectory};
use crate::model::{PairedState, State, SystemParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
    #[serde(rename = "P3")]
    pub p3: f64,
    #[serde(rename = "P4")]
    pub p4: f64,
    pub eta: f64,
    pub c: f64,
    pub region: RegionEstimate,
    pub inequalities: Vec<InequalityRecord>,
    pub holds: bool,
}

impl ConditionReport {
    pub fn margins(&self) -> [f64; 4] {
        [self.p1, self.p2, self.p3, self.p4]
    }
}

/// Evaluates the four contraction inequalities against `region`.
pub fn check_contraction(params: &SystemParams, region: &RegionEstimate) -> Result<ConditionReport> {
    region.check_lower()?;
    let lo = region.lower;
    let d1 = params.d1.sup_bound();
    let d2 = params.d2.sup_bound();
    let lb = |c: &crate::coeffs::QuasiPeriodicCoefficient| c.inf_bound();

    let rows = [
        ("a11^L + a21^L > D1^M / x2^L", lb(&params.a11) + lb(&params.a21), d1 / lo.x2),
        ("b11^L + b21^L > D1^M / x1^L", lb(&params.b11) + lb(&params.b21), d1 / lo.x1),
        ("a12^L + a22^L > D2^M / y2^L", lb(&params.a12) + lb(&params.a22), d2 / lo.y2),
        ("b12^L + b22^L > D2^M / y1^L", lb(&params.b12) + lb(&params.b22), d2 / lo.y1),
    ];
    // Records read "lhs < rhs" like the dispersal report: lhs is the
    // diffusion ratio, rhs the interaction sum.
    let inequalities: Vec<InequalityRecord> = rows
        .iter()
        .map(|&(name, interaction, ratio)| InequalityRecord::with_margin(name, ratio, interaction, interaction - ratio))
        .collect();
    let [p1, p2, p3, p4] = [0, 1, 2, 3].map(|i| inequalities[i].margin);
    let eta = p1.min(p2).min(p3).min(p4);
    let c = lo.to_array().into_iter().map(|l| l * eta).fold(f64::INFINITY, f64::min);
    Ok(ConditionReport {
        p1,
        p2,
        p3,
        p4,
        eta,
        c,
        region: region.clone(),
        inequalities,
        holds: eta > 0.0,
    })
}

/// L¹ distance between componentwise logarithms of two positive states.
pub fn lyapunov_value(z: &State, shadow: &State) -> f64 {
    log_distance(z.as_array(), shadow.as_array())
}

fn log_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.ln() - y.ln()).abs()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecayOptions {
    /// Absolute slack on the envelope and on the monotonicity check.
    pub tol: f64,
    /// Samples with `V` at or below this level are excluded from the rate fit;
    /// there the log-distance is dominated by rounding.
    pub fit_floor: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions { tol: 1e-8, fit_floor: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub c: f64,
    pub tol: f64,
    /// `(t, V(t))` at every recorded sample.
    pub samples: Vec<(f64, f64)>,
    /// Least-squares slope of `−ln V` over samples above the fit floor.
    pub fitted_rate: Option<f64>,
    pub envelope_violations: usize,
    /// Largest `V(t) − V(t₀)·e^{−c(t−t₀)}`; negative when the envelope holds
    /// strictly everywhere.
    pub max_violation: f64,
    /// Count of consecutive samples with `V(tₖ₊₁) > V(tₖ) + tol`.
    pub monotonicity_violations: usize,
}

/// Integrates the paired system from `(z0, shadow0)` at `t0` to `t1` and
/// checks the exponential envelope with rate `c`.
pub fn verify_decay(
    params: &SystemParams,
    z0: &State,
    shadow0: &State,
    (t0, t1): (f64, f64),
    c: f64,
    decay: &DecayOptions,
    integration: &IntegrationOptions,
) -> Result<DecayReport> {
    if !(decay.tol >= 0.0) {
        return Err(invalid("tol must be nonnegative"));
    }
    let pz = PairedState { primary: *z0, shadow: *shadow0 };
    let traj = integrate_paired(params, &pz, t0, t1, integration)?;
    let samples: Vec<(f64, f64)> = traj.iter().map(|(t, y)| (t, log_distance(&y[..4], &y[4..]))).collect();

    let v0 = samples[0].1;
    let mut envelope_violations = 0;
    let mut max_violation = f64::NEG_INFINITY;
    for &(t, v) in &samples {
        let excess = v - v0 * (-c * (t - t0)).exp();
        max_violation = max_violation.max(excess);
        if excess > decay.tol {
            envelope_violations += 1;
        }
    }
    let monotonicity_violations = samples.windows(2).filter(|w| w[1].1 > w[0].1 + decay.tol).count();

    let fit: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, v)| *v > decay.fit_floor)
        .map(|&(t, v)| (t, v.ln()))
        .collect();
    let fitted_rate = least_squares_slope(&fit).map(|s| -s);

    Ok(DecayReport {
        c,
        tol: decay.tol,
        samples,
        fitted_rate,
        envelope_violations,
        max_violation,
        monotonicity_violations,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, y) in points {
        sxy += (t - mt) * (y - my);
        sxx += (t - mt) * (t - mt);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttractOptions {
    pub t0: f64,
    pub t_end: f64,
    pub eps: f64,
    /// Spacing of the common comparison grid; `None` uses the record spacing
    /// of the first trajectory.
    pub grid_step: Option<f64>,
    /// Width of the windows over which the L¹ difference is integrated.
    pub window: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for AttractOptions {
    fn default() -> Self {
        AttractOptions {
            t0: 0.0,
            t_end: 300.0,
            eps: 1e-3,
            grid_step: None,
            window: 1.0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairConvergence {
    pub i: usize,
    pub j: usize,
    /// Earliest grid time after which the sup-norm difference stays below
    /// `eps` through `t_end`.
    pub converged_at: Option<f64>,
    pub final_difference: f64,
    /// Sup-norm difference on the common grid.
    pub differences: Vec<f64>,
    /// `∫ Σ|xᵢ − x̃ᵢ| + Σ|yᵢ − ỹᵢ| dt` over consecutive windows.
    pub window_integrals: Vec<f64>,
}

impl PairConvergence {
    pub fn converged(&self) -> bool {
        self.converged_at.is_some()
    }

    /// Largest difference at grid times `≥ t`.
    pub fn max_difference_after(&self, grid: &[f64], t: f64) -> f64 {
        grid.iter()
            .zip(&self.differences)
            .filter(|(g, _)| **g >= t)
            .map(|(_, d)| *d)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub eps: f64,
    pub grid: Vec<f64>,
    pub pairs: Vec<PairConvergence>,
    #[serde(skip)]
    pub trajectories: Vec<Trajectory>,
}

impl ConvergenceReport {
    pub fn all_converged(&self) -> bool {
        self.pairs.iter().all(PairConvergence::converged)
    }

    pub fn latest_convergence(&self) -> Option<f64> {
        self.pairs
            .iter()
            .map(|p| p.converged_at)
            .try_fold(f64::NEG_INFINITY, |acc, t| t.map(|t| acc.max(t)))
    }
}

/// Integrates every initial state and compares all pairs on a common grid.
pub fn attractivity_experiment(
    params: &SystemParams,
    ics: &[State],
    opts: &AttractOptions,
    integration: &IntegrationOptions,
) -> Result<ConvergenceReport> {
    if ics.len() < 2 {
        return Err(invalid("attractivity needs at least two initial states"));
    }
    if !(opts.t_end > opts.t0) {
        return Err(invalid("t_end must exceed t0"));
    }
    if !(opts.eps > 0.0 && opts.window > 0.0) {
        return Err(invalid("eps and window must be positive"));
    }
    let trajectories = opts
        .execution
        .map(ics, |z| integrate(params, z, opts.t0, opts.t_end, integration))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let step = match opts.grid_step {
        Some(s) if s > 0.0 => s,
        Some(s) => return Err(invalid(format!("grid_step must be positive, got {s}"))),
        None => trajectories[0].typical_spacing(),
    };
    let n = ((opts.t_end - opts.t0) / step - 1e-9).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|k| if k == n { opts.t_end } else { opts.t0 + k as f64 * step }).collect();
    let resampled: Vec<Vec<[f64; 4]>> = opts.execution.map(&trajectories, |traj| {
        let mut cursor = 0;
        grid.iter().map(|&t| traj.interpolate_forward(&mut cursor, t)).collect()
    });

    let mut index_pairs = Vec::new();
    for i in 0..ics.len() {
        for j in i + 1..ics.len() {
            index_pairs.push((i, j));
        }
    }
    let pairs = opts.execution.map(&index_pairs, |&(i, j)| {
        let (a, b) = (&resampled[i], &resampled[j]);
        let differences: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(u, v)| (0..4).map(|k| (u[k] - v[k]).abs()).fold(0.0, f64::max))
            .collect();
        let l1: Vec<f64> = a.iter().zip(b).map(|(u, v)| (0..4).map(|k| (u[k] - v[k]).abs()).sum()).collect();
        let converged_at = match differences.iter().rposition(|&d| d >= opts.eps) {
            None => Some(grid[0]),
            Some(last) if last + 1 < grid.len() => Some(grid[last + 1]),
            Some(_) => None,
        };
        PairConvergence {
            i,
            j,
            converged_at,
            final_difference: *differences.last().expect("grid is never empty"),
            window_integrals: window_integrals(&grid, &l1, opts.t0, opts.window),
            differences,
        }
    });
    Ok(ConvergenceReport { eps: opts.eps, grid, pairs, trajectories })
}

/// Trapezoid integrals of `values` over `[t0 + k·w, t0 + (k+1)·w]` for every
/// complete window on the grid.
fn window_integrals(grid: &[f64], values: &[f64], t0: f64, width: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut acc = 0.0;
    let mut boundary = t0 + width;
    for k in 1..grid.len() {
        acc += 0.5 * (values[k] + values[k - 1]) * (grid[k] - grid[k - 1]);
        // Grid points are not guaranteed to hit the boundary exactly.
        if grid[k] >= boundary - 1e-9 * width {
            out.push(acc);
            acc = 0.0;
            boundary += width;
        }
    }
    out
}
