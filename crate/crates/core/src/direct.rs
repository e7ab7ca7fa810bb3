//! Fully resolved reference scheme: both variables advance together on the
//! micro grid over the whole horizon.

use std::time::Instant;

use crate::analysis::{RunReport, Trajectory};
use crate::error::{Error, Result};
use crate::fast::{euler_step, StepScheme};
use crate::fractional::CaputoHistory;
use crate::problems::CoupledProblem;
use crate::scalar::{integer_ratio, Real};

pub const DEFAULT_RECORD_STRIDE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectConfig<T> {
    pub dt: T,
    pub scheme: StepScheme<T>,
    pub horizon: T,
    /// Keep every `record_stride`-th micro sample.
    pub record_stride: usize,
}

impl<T: Real> DirectConfig<T> {
    pub fn new(dt: T, horizon: T) -> Self {
        Self { dt, scheme: StepScheme::implicit(), horizon, record_stride: DEFAULT_RECORD_STRIDE }
    }

    pub fn with_scheme(mut self, scheme: StepScheme<T>) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    /// Number of micro steps `N = horizon / dt`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > T::zero()) || !(self.horizon > T::zero()) || self.record_stride == 0 {
            return Err(Error::InvalidParameter(format!(
                "direct run needs dt > 0, horizon > 0, stride >= 1 (dt {}, horizon {}, stride {})",
                self.dt, self.horizon, self.record_stride
            )));
        }
        integer_ratio(self.horizon, self.dt, 1e-9).filter(|&n| n > 0).ok_or_else(|| {
            Error::InvalidParameter(format!("dt {} does not divide the horizon {}", self.dt, self.horizon))
        })
    }
}

/// Recorded output of [`direct_solve`].
#[derive(Debug, Clone)]
pub struct DirectRun<T> {
    pub u: Trajectory<T>,
    pub v: Trajectory<T>,
    pub report: RunReport,
}

/// Runs the fully resolved scheme. Each step first advances the slow variable
/// with the L1 update driven by `eps R(t_{i-1}, u_{i-1}, v_{i-1})`, then the fast
/// variable by one Euler step at the new slow value `u_i`.
pub fn direct_solve<T: Real>(problem: &CoupledProblem<T>, config: &DirectConfig<T>) -> Result<DirectRun<T>> {
    let n = config.steps()?;
    let started = Instant::now();
    let dt = config.dt;
    let stride = config.record_stride;
    let mut history = CaputoHistory::new(problem.alpha, dt, problem.u0, n)?;

    let cap = n / stride + 2;
    let (mut times, mut us, mut vs) = (Vec::with_capacity(cap), Vec::with_capacity(cap), Vec::with_capacity(cap));
    times.push(T::zero());
    us.push(problem.u0);
    vs.push(problem.v0);

    let (mut u, mut v) = (problem.u0, problem.v0);
    for i in 1..=n {
        let t_prev = T::from_count(i - 1) * dt;
        let t = T::from_count(i) * dt;
        let u_next = history.advance(problem.eps * problem.r(t_prev, u, v))?;
        let v_next = euler_step(&problem.fast, &config.scheme, u_next, t, v, dt)?;
        if !(u_next.is_finite() && v_next.is_finite()) {
            return Err(Error::Diverged { step: i, t: t.as_f64(), u: u_next.as_f64(), v: v_next.as_f64() });
        }
        history.push(u_next);
        u = u_next;
        v = v_next;
        if i % stride == 0 || i == n {
            times.push(t);
            us.push(u);
            vs.push(v);
        }
    }

    let report = RunReport { wall_seconds: started.elapsed().as_secs_f64(), steps: n, ..Default::default() };
    Ok(DirectRun {
        u: Trajectory::new("u", times.clone(), us)?,
        v: Trajectory::new("v", times, vs)?,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fast::FastField;
    use crate::problems::{example1, Overrides};
    use std::sync::Arc;

    #[test]
    fn inert_problem_stays_at_initial_data() {
        let mut p = example1::<f64>(&Overrides::default()).unwrap();
        p.fast = FastField::new(|_, _| 0.0, |_| 0.0, 6.0).unwrap();
        p.source = Arc::new(|_, _, _| 0.0);
        let run = direct_solve(&p, &DirectConfig::new(1.0 / 32.0, 6.0).with_stride(1)).unwrap();
        assert_eq!(run.u.len(), 6 * 32 + 1);
        assert!(run.u.values.iter().all(|&u| (u - 0.5).abs() < 1e-14));
        assert!(run.v.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stride_keeps_endpoint() {
        let p = example1::<f64>(&Overrides::default()).unwrap();
        let run = direct_solve(&p, &DirectConfig::new(0.1, 6.0).with_stride(7)).unwrap();
        assert_eq!(run.u.times.first(), Some(&0.0));
        assert!((run.u.times.last().unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(run.report.steps, 60);
    }

    #[test]
    fn non_dividing_step_is_rejected() {
        let p = example1::<f64>(&Overrides::default()).unwrap();
        assert!(direct_solve(&p, &DirectConfig::new(0.7, 6.0)).is_err());
        assert!(direct_solve(&p, &DirectConfig::new(0.1, 6.0).with_stride(0)).is_err());
    }

    #[test]
    fn blow_up_is_reported_with_step() {
        let mut p = example1::<f64>(&Overrides::default()).unwrap();
        p.fast = FastField::new(|_, v: f64| -v * v, |_| 0.0, 6.0).unwrap();
        p.v0 = 10.0;
        let err = direct_solve(&p, &DirectConfig::new(0.5, 6.0).with_scheme(StepScheme::explicit())).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
    }
}
