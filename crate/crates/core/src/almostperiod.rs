//! Numerical ε-almost periods.
//!
//! A shift `T` is an ε-almost period on a window when
//! `sup_t ‖z(t+T) − z(t)‖∞ ≤ ε`. The supremum is estimated on a fine grid
//! through the trajectory's dense output.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::integrator::Trajectory;

/// Grid points per record interval used when no explicit grid step is given.
pub const DEFAULT_OVERSAMPLING: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlmostPeriodCandidate {
    pub shift: f64,
    pub defect: f64,
    pub epsilon: f64,
    pub accepted: bool,
}

fn window_grid(window: (f64, f64), step: f64) -> Vec<f64> {
    let (w0, w1) = window;
    let n = ((w1 - w0) / step - 1e-9).ceil().max(0.0) as usize;
    (0..=n).map(|k| if k == n { w1 } else { w0 + k as f64 * step }).collect()
}

fn resolve_grid_step<const N: usize>(traj: &Trajectory<N>, grid_step: Option<f64>) -> Result<f64> {
    match grid_step {
        Some(s) if s > 0.0 && s.is_finite() => Ok(s),
        Some(s) => Err(invalid(format!("grid step must be positive, got {s}"))),
        None if traj.len() > 1 => Ok(traj.typical_spacing() / DEFAULT_OVERSAMPLING),
        None => Err(invalid("trajectory has a single sample")),
    }
}

fn check_domain<const N: usize>(traj: &Trajectory<N>, window: (f64, f64), shifts: (f64, f64)) -> Result<()> {
    let (w0, w1) = window;
    if !(w1 >= w0) {
        return Err(invalid(format!("window ({w0}, {w1}) is reversed")));
    }
    let lo = w0.min(w0 + shifts.0);
    let hi = w1.max(w1 + shifts.1);
    for t in [lo, hi, w0, w1] {
        if !traj.contains(t) {
            return Err(Error::OutOfRange { t, start: traj.t0(), end: traj.t_end() });
        }
    }
    Ok(())
}

fn sup_distance<const N: usize>(traj: &Trajectory<N>, grid: &[f64], base: &[[f64; N]], shift: f64) -> f64 {
    let mut cursor = 0;
    let mut worst: f64 = 0.0;
    for (t, z) in grid.iter().zip(base) {
        let w = traj.interpolate_forward(&mut cursor, t + shift);
        for k in 0..N {
            worst = worst.max((w[k] - z[k]).abs());
        }
    }
    worst
}

fn base_values<const N: usize>(traj: &Trajectory<N>, grid: &[f64]) -> Vec<[f64; N]> {
    let mut cursor = 0;
    grid.iter().map(|&t| traj.interpolate_forward(&mut cursor, t)).collect()
}

/// `sup ‖z(t+T) − z(t)‖∞` over `t ∈ [w0, w1]`. `grid_step` defaults to a
/// tenth of the trajectory's record spacing.
pub fn defect<const N: usize>(
    traj: &Trajectory<N>,
    shift: f64,
    window: (f64, f64),
    grid_step: Option<f64>,
) -> Result<f64> {
    check_domain(traj, window, (shift, shift))?;
    let grid = window_grid(window, resolve_grid_step(traj, grid_step)?);
    let base = base_values(traj, &grid);
    Ok(sup_distance(traj, &grid, &base, shift))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanOptions {
    pub window: (f64, f64),
    pub t_min: f64,
    pub t_max: f64,
    pub t_step: f64,
    pub epsilon: f64,
    pub grid_step: Option<f64>,
    /// Number of best local minima reported when none is accepted.
    pub fallback_candidates: usize,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            window: (100.0, 150.0),
            t_min: 150.0,
            t_max: 200.0,
            t_step: 0.01,
            epsilon: 0.2,
            grid_step: None,
            fallback_candidates: 3,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub epsilon: f64,
    /// `(T, defect)` for every shift on the scan grid.
    pub rows: Vec<(f64, f64)>,
    /// Accepted local minima sorted by defect, or the best few local minima
    /// (all rejected) when nothing is accepted.
    pub candidates: Vec<AlmostPeriodCandidate>,
}

impl ScanResult {
    pub fn accepted(&self) -> impl Iterator<Item = &AlmostPeriodCandidate> {
        self.candidates.iter().filter(|c| c.accepted)
    }

    pub fn best(&self) -> Option<&AlmostPeriodCandidate> {
        self.candidates.first()
    }
}

/// Evaluates the defect for every shift in `[t_min, t_max]` on a `t_step`
/// grid and extracts local minima.
pub fn almost_period_scan<const N: usize>(traj: &Trajectory<N>, opts: &ScanOptions) -> Result<ScanResult> {
    if !(opts.t_step > 0.0 && opts.t_max >= opts.t_min) {
        return Err(invalid("scan needs t_step > 0 and t_max >= t_min"));
    }
    if !(opts.epsilon >= 0.0) {
        return Err(invalid("epsilon must be nonnegative"));
    }
    check_domain(traj, opts.window, (opts.t_min, opts.t_max))?;
    let grid = window_grid(opts.window, resolve_grid_step(traj, opts.grid_step)?);
    let base = base_values(traj, &grid);

    let n = ((opts.t_max - opts.t_min) / opts.t_step + 1e-9).floor() as usize;
    let defects = opts.execution.map_range(n + 1, |k| {
        let shift = opts.t_min + k as f64 * opts.t_step;
        (shift, sup_distance(traj, &grid, &base, shift))
    });

    let mut minima: Vec<AlmostPeriodCandidate> = (0..defects.len())
        .filter(|&k| {
            let d = defects[k].1;
            (k == 0 || d <= defects[k - 1].1) && (k + 1 == defects.len() || d <= defects[k + 1].1)
        })
        .map(|k| AlmostPeriodCandidate {
            shift: defects[k].0,
            defect: defects[k].1,
            epsilon: opts.epsilon,
            accepted: defects[k].1 <= opts.epsilon,
        })
        .collect();
    minima.sort_by(|a, b| a.defect.total_cmp(&b.defect).then(a.shift.total_cmp(&b.shift)));
    let candidates = if minima.iter().any(|c| c.accepted) {
        minima.into_iter().filter(|c| c.accepted).collect()
    } else {
        minima.into_iter().take(opts.fallback_candidates).collect()
    };
    Ok(ScanResult { epsilon: opts.epsilon, rows: defects, candidates })
}
