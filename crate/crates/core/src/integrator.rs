//! Positivity-preserving explicit Runge-Kutta integration with cubic Hermite
//! dense output.
//!
//! Any tentative step that produces a nonpositive or non-finite component is
//! rejected and retried with half the step, down to `h_min`. The true flow
//! keeps the open orthant invariant, so for admissible parameters the retry
//! always succeeds; failing below `h_min` is reported as [`Error::StepUnderflow`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{PairedState, State, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Classical fixed-step fourth-order Runge-Kutta.
    Rk4,
    /// Runge-Kutta-Fehlberg 4(5) with relative error control.
    Rkf45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrationOptions {
    pub method: Method,
    /// Fixed step for rk4, initial step for rkf45.
    pub h_init: f64,
    pub h_min: f64,
    /// Relative local error target (rkf45 only).
    pub rel_tol: f64,
    /// Record every n-th accepted step; the final state is always recorded.
    pub record_stride: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            method: Method::Rk4,
            h_init: 1e-3,
            h_min: 1e-10,
            rel_tol: 1e-8,
            record_stride: 10,
        }
    }
}

impl IntegrationOptions {
    pub fn rk4(h: f64) -> Self {
        IntegrationOptions { method: Method::Rk4, h_init: h, ..Default::default() }
    }

    pub fn rkf45(rel_tol: f64) -> Self {
        IntegrationOptions {
            method: Method::Rkf45,
            h_init: 1e-2,
            rel_tol,
            record_stride: 1,
            ..Default::default()
        }
    }

    pub fn with_stride(self, record_stride: usize) -> Self {
        IntegrationOptions { record_stride, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_init.is_finite() && self.h_init > 0.0) {
            return Err(invalid(format!("h_init must be positive, got {}", self.h_init)));
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_init) {
            return Err(invalid(format!(
                "h_min must satisfy 0 < h_min <= h_init, got h_min = {}",
                self.h_min
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(invalid(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol)));
        }
        if self.record_stride == 0 {
            return Err(invalid("record_stride must be at least 1"));
        }
        Ok(())
    }
}

/// Autonomous or time-dependent right-hand side on `R^N`.
pub trait VectorField<const N: usize>: Sync {
    fn eval(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

impl VectorField<4> for SystemParams {
    #[inline]
    fn eval(&self, t: f64, y: &[f64; 4]) -> [f64; 4] {
        self.rates(t).field(y)
    }
}

/// The product system: two uncoupled copies of the model on `R^8`.
pub struct Paired<'a>(pub &'a SystemParams);

impl VectorField<8> for Paired<'_> {
    #[inline]
    fn eval(&self, t: f64, y: &[f64; 8]) -> [f64; 8] {
        let rates = self.0.rates(t);
        let a = rates.field(&y[..4]);
        let b = rates.field(&y[4..]);
        [a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]]
    }
}

/// Adapter for closures, mostly useful in tests.
pub struct FnField<F>(pub F);

impl<const N: usize, F> VectorField<N> for FnField<F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N] + Sync,
{
    fn eval(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        (self.0)(t, y)
    }
}

/// Recorded solution with derivatives for cubic Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize = 4> {
    times: Vec<f64>,
    states: Vec<[f64; N]>,
    derivs: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    fn with_initial(t0: f64, y0: [f64; N], dy0: [f64; N]) -> Self {
        Trajectory { times: vec![t0], states: vec![y0], derivs: vec![dy0] }
    }

    fn push(&mut self, t: f64, y: [f64; N], dy: [f64; N]) {
        self.times.push(t);
        self.states.push(y);
        self.derivs.push(dy);
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[[f64; N]] {
        &self.states
    }

    pub fn derivatives(&self) -> &[[f64; N]] {
        &self.derivs
    }

    pub fn last(&self) -> &[f64; N] {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64; N])> + '_ {
        self.times.iter().copied().zip(self.states.iter())
    }

    /// Median distance between consecutive records, or 0 for a single sample.
    pub fn typical_spacing(&self) -> f64 {
        if self.times.len() < 2 {
            return 0.0;
        }
        let mut gaps: Vec<f64> = self.times.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(f64::total_cmp);
        gaps[gaps.len() / 2]
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t0() && t <= self.t_end()
    }

    fn check_range(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::OutOfRange { t, start: self.t0(), end: self.t_end() })
        }
    }

    /// Dense output at `t`; returns stored nodes bit for bit.
    pub fn interpolate(&self, t: f64) -> Result<[f64; N]> {
        self.check_range(t)?;
        let i = self.times.partition_point(|&x| x <= t).saturating_sub(1);
        Ok(self.hermite(i, t))
    }

    /// Like [`interpolate`](Self::interpolate) for nondecreasing query
    /// sequences: `cursor` carries the segment index between calls.
    pub(crate) fn interpolate_forward(&self, cursor: &mut usize, t: f64) -> [f64; N] {
        let last = self.times.len() - 1;
        while *cursor < last && self.times[*cursor + 1] <= t {
            *cursor += 1;
        }
        self.hermite(*cursor, t)
    }

    fn hermite(&self, i: usize, t: f64) -> [f64; N] {
        let t0 = self.times[i];
        if t == t0 || i + 1 >= self.times.len() {
            return self.states[i];
        }
        let t1 = self.times[i + 1];
        let h = t1 - t0;
        let s = (t - t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let (y0, y1) = (&self.states[i], &self.states[i + 1]);
        let (d0, d1) = (&self.derivs[i], &self.derivs[i + 1]);
        std::array::from_fn(|k| h00 * y0[k] + h * h10 * d0[k] + h01 * y1[k] + h * h11 * d1[k])
    }
}

impl Trajectory<4> {
    /// Interpolated population state at `t`.
    pub fn sample(&self, t: f64) -> Result<State> {
        State::from_array(self.interpolate(t)?)
    }

    pub fn final_state(&self) -> State {
        State::from_array(*self.last()).expect("recorded states are positive")
    }
}

impl Trajectory<8> {
    /// Splits a paired trajectory sample into its two copies.
    pub fn sample_paired(&self, t: f64) -> Result<PairedState> {
        PairedState::from_array(self.interpolate(t)?)
    }
}

#[inline]
fn admissible<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|&v| v > 0.0 && v.is_finite())
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        y[i] + h * acc
    })
}

fn rk4_step<F: VectorField<N>, const N: usize>(
    f: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> [f64; N] {
    let half = 0.5 * h;
    let k2 = f.eval(t + half, &axpy(y, half, &[(1.0, k1)]));
    let k3 = f.eval(t + half, &axpy(y, half, &[(1.0, &k2)]));
    let k4 = f.eval(t + h, &axpy(y, h, &[(1.0, &k3)]));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Integrates `field` from `(t0, y0)` to `t1` and records the trajectory.
///
/// `t1 == t0` yields the single initial sample. The last step is shortened so
/// that the final record sits exactly at `t1`.
pub fn solve<F: VectorField<N>, const N: usize>(
    field: &F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<Trajectory<N>> {
    opts.validate()?;
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(invalid("integration bounds must be finite"));
    }
    if t1 < t0 {
        return Err(invalid(format!("t1 = {t1} precedes t0 = {t0}")));
    }
    if !admissible(&y0) {
        return Err(invalid(format!("initial state {y0:?} is not strictly positive")));
    }
    let dy0 = field.eval(t0, &y0);
    let mut traj = Trajectory::with_initial(t0, y0, dy0);
    if t1 == t0 {
        return Ok(traj);
    }
    match opts.method {
        Method::Rk4 => run_rk4(field, &mut traj, t1, opts)?,
        Method::Rkf45 => run_rkf45(field, &mut traj, t1, opts)?,
    }
    Ok(traj)
}

fn run_rk4<F: VectorField<N>, const N: usize>(
    field: &F,
    traj: &mut Trajectory<N>,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<()> {
    let t0 = traj.t0();
    let h = opts.h_init;
    let n = (((t1 - t0) / h) - 1e-9).ceil().max(1.0) as u64;
    let mut t = t0;
    let mut y = traj.states[0];
    let mut dy = traj.derivs[0];
    for k in 1..=n {
        // Grid points are t0 + k·h, not accumulated sums.
        let target = if k == n { t1 } else { t0 + k as f64 * h };
        while t < target {
            let mut hs = target - t;
            loop {
                let y_new = rk4_step(field, t, &y, &dy, hs);
                if admissible(&y_new) {
                    t = if hs == target - t { target } else { t + hs };
                    y = y_new;
                    dy = field.eval(t, &y);
                    break;
                }
                hs *= 0.5;
                if hs < opts.h_min {
                    return Err(Error::StepUnderflow { t, h: hs, h_min: opts.h_min });
                }
            }
        }
        if k % opts.record_stride as u64 == 0 || k == n {
            traj.push(t, y, dy);
        }
    }
    Ok(())
}

// Fehlberg 4(5) tableau.
const C: [f64; 6] = [0.0, 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5];
const A2: [f64; 1] = [0.25];
const A3: [f64; 2] = [3.0 / 32.0, 9.0 / 32.0];
const A4: [f64; 3] = [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0];
const A5: [f64; 4] = [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0];
const A6: [f64; 5] = [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0];
const B5: [f64; 6] = [16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0];
const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2, 0.0];

fn rkf45_step<F: VectorField<N>, const N: usize>(
    f: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N]) {
    let k2 = f.eval(t + C[1] * h, &axpy(y, h, &[(A2[0], k1)]));
    let k3 = f.eval(t + C[2] * h, &axpy(y, h, &[(A3[0], k1), (A3[1], &k2)]));
    let k4 = f.eval(t + C[3] * h, &axpy(y, h, &[(A4[0], k1), (A4[1], &k2), (A4[2], &k3)]));
    let k5 = f.eval(
        t + C[4] * h,
        &axpy(y, h, &[(A5[0], k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)]),
    );
    let k6 = f.eval(
        t + C[5] * h,
        &axpy(y, h, &[(A6[0], k1), (A6[1], &k2), (A6[2], &k3), (A6[3], &k4), (A6[4], &k5)]),
    );
    let ks = [k1, &k2, &k3, &k4, &k5, &k6];
    let y5 = std::array::from_fn(|i| {
        y[i] + h * ks.iter().zip(&B5).map(|(k, b)| b * k[i]).sum::<f64>()
    });
    let err = std::array::from_fn(|i| {
        h * ks.iter().zip(B5.iter().zip(&B4)).map(|(k, (b5, b4))| (b5 - b4) * k[i]).sum::<f64>()
    });
    (y5, err)
}

fn run_rkf45<F: VectorField<N>, const N: usize>(
    field: &F,
    traj: &mut Trajectory<N>,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<()> {
    const SAFETY: f64 = 0.9;
    const MAX_GROWTH: f64 = 5.0;
    const MAX_SHRINK: f64 = 0.2;

    let mut t = traj.t0();
    let mut y = traj.states[0];
    let mut dy = traj.derivs[0];
    let mut h = opts.h_init;
    let mut accepted = 0usize;
    while t < t1 {
        let landing = t + h >= t1;
        let hs = if landing { t1 - t } else { h };
        let (y_new, err) = rkf45_step(field, t, &y, &dy, hs);
        let norm = err
            .iter()
            .zip(y.iter().zip(&y_new))
            .map(|(e, (a, b))| e.abs() / (opts.rel_tol * a.abs().max(b.abs())))
            .fold(0.0, f64::max);
        if !admissible(&y_new) || !(norm <= 1.0) {
            h = if admissible(&y_new) && norm.is_finite() {
                hs * (SAFETY * norm.powf(-0.2)).max(MAX_SHRINK)
            } else {
                hs * 0.5
            };
            if h < opts.h_min {
                return Err(Error::StepUnderflow { t, h, h_min: opts.h_min });
            }
            continue;
        }
        t = if landing { t1 } else { t + hs };
        y = y_new;
        dy = field.eval(t, &y);
        accepted += 1;
        if accepted.is_multiple_of(opts.record_stride) || t == t1 {
            traj.push(t, y, dy);
        }
        let growth = if norm == 0.0 { MAX_GROWTH } else { (SAFETY * norm.powf(-0.2)).min(MAX_GROWTH) };
        // A shortened landing step says nothing about the natural step size.
        h = if landing { h } else { (hs * growth).max(opts.h_min) };
    }
    Ok(())
}

/// Integrates the model from a positive state.
pub fn integrate(
    params: &SystemParams,
    z0: &State,
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<Trajectory<4>> {
    solve(params, z0.to_array(), t0, t1, opts)
}

/// Integrates the paired (product) system; components 0..4 are the primary
/// copy and 4..8 the shadow.
pub fn integrate_paired(
    params: &SystemParams,
    pz: &PairedState,
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<Trajectory<8>> {
    solve(&Paired(params), pz.to_array(), t0, t1, opts)
}
