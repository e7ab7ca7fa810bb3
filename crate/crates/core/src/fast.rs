//! Fast-variable integration: single Euler steps of `v' + g(u, v) = f(t)` and
//! the periodic shooting iteration that identifies a cell solution at a frozen
//! slow value.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{integer_ratio, Real};

/// `g(u, v)`, and also its partial derivative in `v` when one is supplied.
pub type SlowFastFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;
/// Forcing `f(t)`.
pub type ForcingFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Relative tolerance for "the period is an integer number of micro steps".
pub const PERIOD_DIVISION_TOL: f64 = 1e-12;
/// Default shooting tolerance.
pub const DEFAULT_SHOOTING_TOL: f64 = 1e-5;
/// Default cap on shooting cycles.
pub const DEFAULT_MAX_CYCLES: usize = 1000;

/// Right-hand side of the fast equation `v' + g(u, v) = f(t)`.
#[derive(Clone)]
pub struct FastField<T> {
    pub g: SlowFastFn<T>,
    /// Analytic `dg/dv`; a central difference is used when absent.
    pub dg_dv: Option<SlowFastFn<T>>,
    pub f: ForcingFn<T>,
    pub period: T,
}

impl<T: Real> FastField<T> {
    pub fn new(
        g: impl Fn(T, T) -> T + Send + Sync + 'static,
        f: impl Fn(T) -> T + Send + Sync + 'static,
        period: T,
    ) -> Result<Self> {
        if !(period > T::zero()) {
            return Err(Error::InvalidParameter(format!("forcing period must be > 0, got {period}")));
        }
        Ok(Self { g: Arc::new(g), dg_dv: None, f: Arc::new(f), period })
    }

    pub fn with_dg_dv(mut self, dg_dv: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        self.dg_dv = Some(Arc::new(dg_dv));
        self
    }

    pub fn dg_dv(&self, u: T, v: T) -> T {
        match &self.dg_dv {
            Some(d) => d(u, v),
            None => {
                let h = T::epsilon().sqrt() * (T::one() + v.abs());
                ((self.g)(u, v + h) - (self.g)(u, v - h)) / (h + h)
            }
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for FastField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FastField")
            .field("period", &self.period)
            .field("analytic_dg_dv", &self.dg_dv.is_some())
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    ExplicitEuler,
    ImplicitEuler,
}

kebab_enum_text!(SchemeKind { ExplicitEuler => "explicit", ImplicitEuler => "implicit" });

/// First-order Euler stepping of the fast equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepScheme<T> {
    pub kind: SchemeKind,
    pub root_tol: T,
    pub root_max_iter: usize,
}

impl<T: Real> StepScheme<T> {
    pub fn new(kind: SchemeKind, root_tol: T, root_max_iter: usize) -> Result<Self> {
        if !(root_tol > T::zero()) || root_max_iter == 0 {
            return Err(Error::InvalidParameter(format!(
                "root finder needs tol > 0 and at least one iteration (tol {root_tol}, iters {root_max_iter})"
            )));
        }
        Ok(Self { kind, root_tol, root_max_iter })
    }

    pub fn explicit() -> Self {
        Self { kind: SchemeKind::ExplicitEuler, ..Self::implicit() }
    }

    pub fn implicit() -> Self {
        Self { kind: SchemeKind::ImplicitEuler, root_tol: T::lit(1e-12), root_max_iter: 50 }
    }
}

/// One identified periodic solution over a single forcing period.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSolution<T> {
    pub t_start: T,
    pub dt: T,
    /// `v_0 ..= v_K` with `K * dt = period`.
    pub samples: Vec<T>,
    pub frozen_u: T,
    pub shooting_iters: usize,
    /// Final `|v_K - v_0|`.
    pub residual: T,
    /// `|v_K - v_0|` for every cycle that was integrated.
    pub residuals: Vec<T>,
}

impl<T: Real> CellSolution<T> {
    pub fn period(&self) -> T {
        self.dt * T::from_count(self.samples.len() - 1)
    }

    pub fn end(&self) -> T {
        *self.samples.last().expect("cell has samples")
    }
}

/// Advances `v_prev` by one step of size `dt` to time `t_next` at slow value `u`.
///
/// The explicit variant evaluates `f` at the target time and `g` at the
/// previous state; the implicit variant solves
/// `v + dt g(u, v) = v_prev + dt f(t_next)` by damped Newton from `v_prev`,
/// with a bracketing bisection fallback.
pub fn euler_step<T: Real>(
    field: &FastField<T>,
    scheme: &StepScheme<T>,
    u: T,
    t_next: T,
    v_prev: T,
    dt: T,
) -> Result<T> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidParameter(format!("step must be > 0, got {dt}")));
    }
    let forcing = (field.f)(t_next);
    match scheme.kind {
        SchemeKind::ExplicitEuler => Ok(v_prev + dt * (forcing - (field.g)(u, v_prev))),
        SchemeKind::ImplicitEuler => {
            let rhs = v_prev + dt * forcing;
            let residual = |v: T| v + dt * (field.g)(u, v) - rhs;
            match newton(field, scheme, u, dt, v_prev, &residual) {
                Ok(v) => Ok(v),
                Err(newton_err) => bisect(scheme, v_prev, &residual).map_err(|_| newton_err),
            }
        }
    }
}

fn newton<T: Real>(
    field: &FastField<T>,
    scheme: &StepScheme<T>,
    u: T,
    dt: T,
    start: T,
    residual: &impl Fn(T) -> T,
) -> Result<T> {
    let tol = scheme.root_tol;
    let mut v = start;
    let mut r = residual(v);
    for _ in 0..scheme.root_max_iter {
        if r == T::zero() {
            return Ok(v);
        }
        let slope = T::one() + dt * field.dg_dv(u, v);
        if !slope.is_finite() || slope == T::zero() {
            break;
        }
        let mut delta = r / slope;
        let mut trial = v - delta;
        let mut r_trial = residual(trial);
        // damping: halve while the residual does not decrease
        let mut halvings = 0;
        while !(r_trial.abs() < r.abs()) && halvings < 30 {
            delta = delta / T::lit(2.0);
            trial = v - delta;
            r_trial = residual(trial);
            halvings += 1;
        }
        if !trial.is_finite() {
            break;
        }
        v = trial;
        r = r_trial;
        if delta.abs() <= tol * (T::one() + v.abs()) {
            return Ok(v);
        }
    }
    Err(Error::RootNotConverged { last_iterate: v.as_f64(), residual: r.as_f64() })
}

fn bisect<T: Real>(scheme: &StepScheme<T>, start: T, residual: &impl Fn(T) -> T) -> Result<T> {
    let two = T::lit(2.0);
    let mut half_width = T::one() + start.abs();
    let mut bracket = None;
    for _ in 0..60 {
        let (lo, hi) = (start - half_width, start + half_width);
        let (rlo, rhi) = (residual(lo), residual(hi));
        if rlo.is_finite() && rhi.is_finite() && rlo * rhi <= T::zero() {
            bracket = Some((lo, hi, rlo));
            break;
        }
        half_width = half_width * two;
    }
    let Some((mut lo, mut hi, mut rlo)) = bracket else {
        return Err(Error::RootNotConverged { last_iterate: start.as_f64(), residual: residual(start).as_f64() });
    };
    let mut mid = (lo + hi) / two;
    for _ in 0..scheme.root_max_iter + 64 {
        mid = (lo + hi) / two;
        let rmid = residual(mid);
        if rmid == T::zero() || (hi - lo) <= scheme.root_tol * (T::one() + mid.abs()) {
            return Ok(mid);
        }
        if rmid * rlo < T::zero() {
            hi = mid;
        } else {
            lo = mid;
            rlo = rmid;
        }
    }
    Err(Error::RootNotConverged { last_iterate: mid.as_f64(), residual: residual(mid).as_f64() })
}

/// Number of micro steps per forcing period.
pub fn steps_per_period<T: Real>(period: T, dt: T) -> Result<usize> {
    match integer_ratio(period, dt, PERIOD_DIVISION_TOL) {
        Some(k) if k >= 1 => Ok(k),
        _ => Err(Error::InvalidParameter(format!(
            "micro step {dt} does not divide the forcing period {period}"
        ))),
    }
}

/// Integrates one forcing period starting at `t_start` from `v_init` and
/// returns the `K + 1` grid values.
pub fn integrate_cycle<T: Real>(
    field: &FastField<T>,
    scheme: &StepScheme<T>,
    u: T,
    v_init: T,
    t_start: T,
    dt: T,
) -> Result<Vec<T>> {
    let k_steps = steps_per_period(field.period, dt)?;
    let mut samples = Vec::with_capacity(k_steps + 1);
    samples.push(v_init);
    let mut v = v_init;
    for k in 1..=k_steps {
        let t = t_start + T::from_count(k) * dt;
        v = euler_step(field, scheme, u, t, v, dt)?;
        samples.push(v);
    }
    Ok(samples)
}

/// Periodic shooting: integrate a cycle, re-seed with its end value, and stop
/// once `|v(end) - v(start)| <= tol`.
#[allow(clippy::too_many_arguments)]
pub fn shoot_periodic<T: Real>(
    field: &FastField<T>,
    scheme: &StepScheme<T>,
    u: T,
    t_start: T,
    dt: T,
    v_guess: T,
    tol: T,
    max_cycles: usize,
) -> Result<CellSolution<T>> {
    if !(tol > T::zero()) || max_cycles == 0 {
        return Err(Error::InvalidParameter(format!(
            "shooting needs tol > 0 and max_cycles >= 1 (tol {tol}, max_cycles {max_cycles})"
        )));
    }
    let mut seed = v_guess;
    let mut residuals = Vec::new();
    for cycle in 1..=max_cycles {
        let samples = integrate_cycle(field, scheme, u, seed, t_start, dt)?;
        let end = *samples.last().expect("cycle has samples");
        let residual = (end - seed).abs();
        residuals.push(residual);
        if !residual.is_finite() {
            break;
        }
        if residual <= tol {
            assert!((samples[0] - end).abs() <= tol, "cell periodicity violated");
            return Ok(CellSolution {
                t_start,
                dt,
                samples,
                frozen_u: u,
                shooting_iters: cycle,
                residual,
                residuals,
            });
        }
        seed = end;
    }
    Err(Error::ShootingNotConverged { residuals: residuals.iter().map(|r| r.as_f64()).collect() })
}
