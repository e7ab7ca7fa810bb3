//! Multiscale scheme: the slow variable takes L1 steps on a coarse macro grid,
//! driven by the slow source averaged over a periodic fast cell solution
//! identified at the frozen slow value.
//!
//! For `m = 1..=M`:
//!
//! 1. shoot for the periodic fast solution `v_{U,k}` at `U = U_{m-1}` on the
//!    period window anchored at `T_{m-1}`;
//! 2. average `R(t_k, U_{m-1}, v_{U,k})` over the `K + 1` cell samples;
//! 3. take the L1 step `U_{m-1} -> U_m` with step `dT` and right-hand side
//!    `eps * average`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{RunReport, Trajectory};
use crate::error::{Error, Result};
use crate::fast::{shoot_periodic, steps_per_period, CellSolution, StepScheme, DEFAULT_MAX_CYCLES};
use crate::fractional::CaputoHistory;
pub use crate::problems::CellTime;
use crate::problems::CoupledProblem;
use crate::scalar::Real;

/// Quadrature used for the cell average.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    /// Arithmetic mean over all `K + 1` samples, both endpoints included.
    #[default]
    Mean,
    /// Composite trapezoid over the period.
    Trapezoid,
}

kebab_enum_text!(Averaging { Mean => "mean", Trapezoid => "trapezoid" });

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroConfig<T> {
    /// Macro step `dT`.
    pub macro_dt: T,
    /// Micro step inside the cells; must divide the forcing period.
    pub micro_dt: T,
    /// Shooting tolerance.
    pub tol: T,
    pub scheme: StepScheme<T>,
    pub horizon: T,
    pub max_cycles: usize,
    /// Overrides the problem's own [`CellTime`] when set.
    pub cell_time: Option<CellTime>,
    pub averaging: Averaging,
    /// Keep every cell solution in the returned state.
    pub retain_cells: bool,
}

impl<T: Real> MacroConfig<T> {
    pub fn new(macro_dt: T, micro_dt: T, horizon: T) -> Self {
        Self {
            macro_dt,
            micro_dt,
            tol: T::lit(crate::fast::DEFAULT_SHOOTING_TOL),
            scheme: StepScheme::implicit(),
            horizon,
            max_cycles: DEFAULT_MAX_CYCLES,
            cell_time: None,
            averaging: Averaging::default(),
            retain_cells: true,
        }
    }

    /// Number of macro steps `M = floor(horizon / dT)`.
    pub fn macro_steps(&self, period: T) -> Result<usize> {
        if !(self.macro_dt >= period) {
            return Err(Error::InvalidParameter(format!(
                "macro step {} shorter than the forcing period {period}",
                self.macro_dt
            )));
        }
        if !(self.tol > T::zero()) || !(self.horizon > T::zero()) {
            return Err(Error::InvalidParameter("tol and horizon must be > 0".into()));
        }
        steps_per_period(period, self.micro_dt)?;
        let ratio = (self.horizon / self.macro_dt).as_f64();
        let m = (ratio + 1e-9 * ratio.max(1.0)).floor() as usize;
        if m == 0 {
            return Err(Error::InvalidParameter(format!(
                "macro step {} exceeds the horizon {}",
                self.macro_dt, self.horizon
            )));
        }
        Ok(m)
    }
}

/// Slow values on the macro grid together with the cells that produced them.
#[derive(Debug, Clone)]
pub struct MacroState<T> {
    /// `T_0 ..= T_M`
    pub times: Vec<T>,
    /// `U_0 ..= U_M`
    pub u: Vec<T>,
    /// `R_0 ..= R_{M-1}`
    pub cell_averages: Vec<T>,
    /// Cell `m - 1` was solved on the window anchored at `T_{m-1}`; empty when
    /// cells were discarded.
    pub cells: Vec<CellSolution<T>>,
    pub shooting_iters: usize,
    pub micro_dt: T,
    pub scheme: StepScheme<T>,
    pub tol: T,
    pub max_cycles: usize,
}

impl<T: Real> MacroState<T> {
    pub fn trajectory(&self) -> Result<Trajectory<T>> {
        Trajectory::new("U", self.times.clone(), self.u.clone())
    }

    pub fn macro_dt(&self) -> T {
        self.times[1] - self.times[0]
    }
}

/// Average of `R(t_k, U, v_k)` over the cell samples.
pub fn cell_average<T: Real>(
    problem: &CoupledProblem<T>,
    cell: &CellSolution<T>,
    u: T,
    t_macro: T,
    cell_time: CellTime,
    averaging: Averaging,
) -> T {
    let time = |k: usize| match cell_time {
        CellTime::Local => t_macro + T::from_count(k) * cell.dt,
        CellTime::Frozen => t_macro,
    };
    let vals = cell.samples.iter().enumerate().map(|(k, &v)| problem.r(time(k), u, v));
    let n = cell.samples.len();
    match averaging {
        Averaging::Mean => vals.fold(T::zero(), |s, r| s + r) / T::from_count(n),
        Averaging::Trapezoid => {
            if n == 1 {
                return problem.r(time(0), u, cell.samples[0]);
            }
            let half = T::lit(0.5);
            let sum = vals
                .enumerate()
                .fold(T::zero(), |s, (k, r)| s + if k == 0 || k == n - 1 { half * r } else { r });
            sum / T::from_count(n - 1)
        }
    }
}

/// Runs the multiscale scheme over `M = floor(horizon / dT)` macro steps.
/// The state is reported up to `T_M`; a trailing partial step is not taken.
pub fn multiscale_solve<T: Real>(
    problem: &CoupledProblem<T>,
    config: &MacroConfig<T>,
) -> Result<(MacroState<T>, RunReport)> {
    let m_steps = config.macro_steps(problem.period())?;
    let started = Instant::now();
    let dt_macro = config.macro_dt;
    let mut history = CaputoHistory::new(problem.alpha, dt_macro, problem.u0, m_steps)?;

    let mut times = Vec::with_capacity(m_steps + 1);
    let mut us = Vec::with_capacity(m_steps + 1);
    let mut averages = Vec::with_capacity(m_steps);
    let mut cells = Vec::new();
    times.push(T::zero());
    us.push(problem.u0);

    let mut guess = problem.v0;
    let mut iters = 0;
    for m in 1..=m_steps {
        let t_prev = T::from_count(m - 1) * dt_macro;
        let u_prev = history.last();
        let cell = shoot_periodic(
            &problem.fast,
            &config.scheme,
            u_prev,
            t_prev,
            config.micro_dt,
            guess,
            config.tol,
            config.max_cycles,
        )
        .map_err(|e| Error::MacroStep { step: m, source: Box::new(e) })?;
        iters += cell.shooting_iters;
        let avg = cell_average(problem, &cell, u_prev, t_prev, config.cell_time.unwrap_or(problem.cell_time), config.averaging);
        let u_next = history.advance(problem.eps * avg)?;
        if !u_next.is_finite() {
            return Err(Error::Diverged {
                step: m,
                t: (t_prev + dt_macro).as_f64(),
                u: u_next.as_f64(),
                v: cell.end().as_f64(),
            });
        }
        history.push(u_next);
        guess = cell.end();
        times.push(T::from_count(m) * dt_macro);
        us.push(u_next);
        averages.push(avg);
        if config.retain_cells {
            cells.push(cell);
        }
    }

    let report = RunReport {
        wall_seconds: started.elapsed().as_secs_f64(),
        steps: m_steps,
        shooting_iters: Some(iters),
        ..Default::default()
    };
    let state = MacroState {
        times,
        u: us,
        cell_averages: averages,
        cells,
        shooting_iters: iters,
        micro_dt: config.micro_dt,
        scheme: config.scheme,
        tol: config.tol,
        max_cycles: config.max_cycles,
    };
    Ok((state, report))
}

/// Fast variable at time `t` read off the periodic cell solutions.
///
/// `t` is mapped to its phase within the period window anchored at the start
/// `T_{m-1}` of its macro interval and the cell is sampled there (linear
/// interpolation between micro samples). When cells were discarded, the cell is
/// re-solved at the slow value interpolated linearly between the macro nodes.
pub fn reconstruct_fast<T: Real>(state: &MacroState<T>, problem: &CoupledProblem<T>, t: T) -> Result<T> {
    if !(t >= T::zero() && t <= problem.horizon) || state.times.len() < 2 {
        return Err(Error::OutOfRange { t: t.as_f64(), horizon: problem.horizon.as_f64() });
    }
    let dt_macro = state.macro_dt();
    let last = state.times.len() - 2;
    let m = ((t / dt_macro).floor().to_usize().unwrap_or(usize::MAX)).min(last);
    let anchor = state.times[m];
    let period = problem.period();
    let offset = t - anchor;
    let phase = offset - (offset / period).floor() * period;

    let sample_at = |cell: &CellSolution<T>| {
        let x = phase / cell.dt;
        let k = x.floor().to_usize().unwrap_or(0).min(cell.samples.len() - 2);
        let w = x - T::from_count(k);
        cell.samples[k] + w * (cell.samples[k + 1] - cell.samples[k])
    };

    if let Some(cell) = state.cells.get(m) {
        return Ok(sample_at(cell));
    }
    let w = (offset / dt_macro).min(T::one());
    let u_at = state.u[m] + w * (state.u[m + 1] - state.u[m]);
    let cell = shoot_periodic(
        &problem.fast,
        &state.scheme,
        u_at,
        anchor,
        state.micro_dt,
        problem.v0,
        state.tol,
        state.max_cycles,
    )?;
    Ok(sample_at(&cell))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{example2, example4, Overrides};
    use std::sync::Arc;

    fn cell_of(samples: Vec<f64>, dt: f64) -> CellSolution<f64> {
        CellSolution {
            t_start: 0.0,
            dt,
            residual: 0.0,
            residuals: vec![0.0],
            shooting_iters: 1,
            frozen_u: 0.0,
            samples,
        }
    }

    #[test]
    fn averages_of_trivial_sources() {
        let mut p = example2::<f64>(&Overrides::default()).unwrap();
        let cell = cell_of(vec![3.0; 11], 0.1);
        p.source = Arc::new(|_, _, _| 2.5);
        for ct in [CellTime::Local, CellTime::Frozen] {
            for av in [Averaging::Mean, Averaging::Trapezoid] {
                assert!((cell_average(&p, &cell, 1.0, 4.0, ct, av) - 2.5).abs() < 1e-15);
            }
        }
        p.source = Arc::new(|_, _, v| v);
        assert!((cell_average(&p, &cell, 1.0, 4.0, CellTime::Local, Averaging::Mean) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn cell_time_conventions_differ_on_secular_sources() {
        let mut p = example2::<f64>(&Overrides::default()).unwrap();
        p.source = Arc::new(|t, _, _| t);
        let cell = cell_of(vec![0.0; 101], 0.01);
        let local = cell_average(&p, &cell, 1.0, 10.0, CellTime::Local, Averaging::Mean);
        let frozen = cell_average(&p, &cell, 1.0, 10.0, CellTime::Frozen, Averaging::Mean);
        assert!((local - 10.5).abs() < 1e-12);
        assert_eq!(frozen, 10.0);
    }

    #[test]
    fn mean_versus_trapezoid_on_converged_cell() {
        let p = example4::<f64>(&Overrides::default()).unwrap();
        let u = 0.5;
        let cell = shoot_periodic(&p.fast, &StepScheme::implicit(), u, 0.0, 0.01, 1.0, 1e-10, 1000).unwrap();
        let mean = cell_average(&p, &cell, u, 0.0, CellTime::Local, Averaging::Mean);
        let trap = cell_average(&p, &cell, u, 0.0, CellTime::Local, Averaging::Trapezoid);
        let vmean = cell.samples.iter().sum::<f64>() / cell.samples.len() as f64;
        assert!((mean - 0.25 * vmean).abs() < 1e-14);
        let (lo, hi) = cell.samples.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        let k1 = cell.samples.len() as f64;
        assert!((mean - trap).abs() <= 0.25 * (hi - lo) / k1, "{mean} {trap}");
    }

    #[test]
    fn zero_source_keeps_slow_value() {
        let mut p = example2::<f64>(&Overrides { horizon: Some(40.0), ..Default::default() }).unwrap();
        p.source = Arc::new(|_, _, _| 0.0);
        let (state, report) = multiscale_solve(&p, &MacroConfig::new(4.0, 0.05, 40.0)).unwrap();
        assert_eq!(state.u.len(), 11);
        assert!(state.u.iter().all(|&u| (u - 1.0).abs() < 1e-14));
        assert_eq!(report.steps, 10);
        assert_eq!(state.cells.len(), 10);
    }

    #[test]
    fn non_dividing_horizon_stops_at_last_full_step() {
        let p = example2::<f64>(&Overrides { horizon: Some(45.0), ..Default::default() }).unwrap();
        let (state, _) = multiscale_solve(&p, &MacroConfig::new(20.0, 0.05, 45.0)).unwrap();
        assert_eq!(state.times, vec![0.0, 20.0, 40.0]);
    }

    #[test]
    fn invalid_macro_configs() {
        let p = example2::<f64>(&Overrides::default()).unwrap();
        assert!(multiscale_solve(&p, &MacroConfig::new(0.5, 0.01, 10.0)).is_err());
        assert!(multiscale_solve(&p, &MacroConfig::new(1.0, 0.3, 10.0)).is_err());
        assert!(multiscale_solve(&p, &MacroConfig::new(20.0, 0.01, 10.0)).is_err());
    }

    #[test]
    fn discarding_cells_keeps_results() {
        let p = example2::<f64>(&Overrides { horizon: Some(30.0), ..Default::default() }).unwrap();
        let cfg = MacroConfig::new(2.0, 0.02, 30.0);
        let (a, _) = multiscale_solve(&p, &cfg).unwrap();
        let (b, _) = multiscale_solve(&p, &MacroConfig { retain_cells: false, ..cfg }).unwrap();
        assert_eq!(a.u, b.u);
        assert!(b.cells.is_empty());
        // re-solved cells sit at a slightly different slow value
        for t in [0.0, 4.3, 10.75] {
            let x = reconstruct_fast(&a, &p, t).unwrap();
            let y = reconstruct_fast(&b, &p, t).unwrap();
            assert!((x - y).abs() < 1e-3 * (1.0 + x.abs()), "t {t}: {x} vs {y}");
        }
    }

    #[test]
    fn reconstruction_at_nodes_and_periods() {
        let p = example2::<f64>(&Overrides { horizon: Some(20.0), ..Default::default() }).unwrap();
        let (state, _) = multiscale_solve(&p, &MacroConfig::new(2.0, 0.01, 20.0)).unwrap();
        for m in 0..10 {
            let t = state.times[m];
            assert_eq!(reconstruct_fast(&state, &p, t).unwrap(), state.cells[m].samples[0]);
            let next = reconstruct_fast(&state, &p, t + 1.0).unwrap();
            assert!((next - state.cells[m].samples[0]).abs() <= state.tol, "{next}");
        }
        assert!(reconstruct_fast(&state, &p, -1.0).is_err());
        assert!(reconstruct_fast(&state, &p, 21.0).is_err());
    }

    #[test]
    fn parse_flags() {
        assert_eq!("frozen".parse::<CellTime>().unwrap(), CellTime::Frozen);
        assert_eq!("trapezoid".parse::<Averaging>().unwrap(), Averaging::Trapezoid);
        assert!("midpoint".parse::<Averaging>().is_err());
        assert_eq!(CellTime::Local.to_string(), "local");
    }
}
