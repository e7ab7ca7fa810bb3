//! Catalog of the benchmark two-scale problems and numerical probes of the
//! regularity constants the multiscale theory relies on.
//!
//! Every problem has the form
//!
//! ```text
//! v'(t) + g(u, v) = f(t),          v(0) = v0
//! D^alpha u(t)    = eps R(t, u, v), u(0) = u0
//! ```
//!
//! Examples 1-3 are manufactured: the forcing `f` and source `R` are built so
//! that a known pair `(u, v)` solves the system exactly. Example 4 has no
//! closed-form solution.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fast::{FastField, ForcingFn};
use crate::fractional::{caputo_analytic, FractionalOrder};
use crate::scalar::Real;

/// Slow source `R(t, u, v)`.
pub type SourceFn<T> = Arc<dyn Fn(T, T, T) -> T + Send + Sync>;

/// Time argument handed to the slow source inside a cell average.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellTime {
    /// `t_k = T_{m-1} + k dt`, the absolute time of each cell sample.
    Local,
    /// `t_k = T_{m-1}` for every sample: only the fast variable varies across
    /// the cell.
    #[default]
    Frozen,
}

kebab_enum_text!(CellTime { Local => "local", Frozen => "frozen" });

pub const PROBLEM_NAMES: [&str; 4] = ["example1", "example2", "example3", "example4"];

/// Exact slow solution of the manufactured examples, always a quadratic
/// `c0 + c1 t + c2 t^2` so its Caputo derivative is known in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticSlow<T> {
    pub c0: T,
    pub c1: T,
    pub c2: T,
}

impl<T: Real> QuadraticSlow<T> {
    pub fn eval(&self, t: T) -> T {
        self.c0 + t * (self.c1 + t * self.c2)
    }

    pub fn derivative(&self, t: T) -> T {
        self.c1 + T::lit(2.0) * self.c2 * t
    }

    pub fn caputo(&self, alpha: FractionalOrder<T>, t: T) -> Result<T> {
        Ok(self.c1 * caputo_analytic(1, alpha, t)? + self.c2 * caputo_analytic(2, alpha, t)?)
    }
}

/// Exact pair `(u, v)` with `v'` for residual checks.
#[derive(Clone)]
pub struct ExactSolution<T> {
    pub u: QuadraticSlow<T>,
    pub v: ForcingFn<T>,
    pub v_dot: ForcingFn<T>,
}

/// A complete two-scale problem.
#[derive(Clone)]
pub struct CoupledProblem<T> {
    pub name: String,
    pub fast: FastField<T>,
    pub source: SourceFn<T>,
    pub u0: T,
    pub v0: T,
    pub alpha: FractionalOrder<T>,
    pub eps: T,
    pub horizon: T,
    pub exact: Option<ExactSolution<T>>,
    /// Time argument of `R` inside multiscale cell averages.
    pub cell_time: CellTime,
}

impl<T: fmt::Debug> fmt::Debug for CoupledProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoupledProblem")
            .field("name", &self.name)
            .field("u0", &self.u0)
            .field("v0", &self.v0)
            .field("alpha", &self.alpha)
            .field("eps", &self.eps)
            .field("horizon", &self.horizon)
            .field("period", &self.fast.period)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl<T: Real> CoupledProblem<T> {
    pub fn period(&self) -> T {
        self.fast.period
    }

    pub fn g(&self, u: T, v: T) -> T {
        (self.fast.g)(u, v)
    }

    pub fn f(&self, t: T) -> T {
        (self.fast.f)(t)
    }

    pub fn r(&self, t: T, u: T, v: T) -> T {
        (self.source)(t, u, v)
    }

    pub fn exact_u(&self, t: T) -> Option<T> {
        self.exact.as_ref().map(|e| e.u.eval(t))
    }

    pub fn exact_v(&self, t: T) -> Option<T> {
        self.exact.as_ref().map(|e| (e.v)(t))
    }

    /// Checks the structural invariants of the problem description.
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > T::zero()) {
            return Err(Error::InvalidParameter(format!("eps must be > 0, got {}", self.eps)));
        }
        if !(self.fast.period > T::zero()) || !(self.horizon >= self.fast.period) {
            return Err(Error::InvalidParameter(format!(
                "need period > 0 and horizon >= period (period {}, horizon {})",
                self.fast.period, self.horizon
            )));
        }
        if let Some(ex) = &self.exact {
            let tol = T::lit(1e-12);
            if (ex.u.eval(T::zero()) - self.u0).abs() > tol || ((ex.v)(T::zero()) - self.v0).abs() > tol {
                return Err(Error::InvalidParameter(format!(
                    "exact solution of {} does not match the initial data",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Scale separation is weak enough that the averaging error may dominate.
    pub fn weakly_separated(&self) -> bool {
        self.eps > T::lit(1e-2)
    }

    /// Maximum residuals `(fast, slow)` of the governing equations when the
    /// exact pair is substituted at the given times.
    pub fn residual_check(&self, times: &[T]) -> Result<(T, T)> {
        let ex = self.exact.as_ref().ok_or_else(|| {
            Error::Unsupported(format!("{} has no exact solution", self.name))
        })?;
        let (mut fast, mut slow) = (T::zero(), T::zero());
        for &t in times {
            let (u, v) = (ex.u.eval(t), (ex.v)(t));
            let rf = (ex.v_dot)(t) + self.g(u, v) - self.f(t);
            let rs = ex.u.caputo(self.alpha, t)? - self.eps * self.r(t, u, v);
            fast = fast.max(rf.abs());
            slow = slow.max(rs.abs());
        }
        Ok((fast, slow))
    }
}

/// Overridable parameters of a catalog problem; `None` keeps the default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub eps: Option<f64>,
    pub horizon: Option<f64>,
}

struct Params<T> {
    alpha: FractionalOrder<T>,
    a: T,
    eps: T,
    horizon: T,
}

fn resolve<T: Real>(o: &Overrides, alpha: f64, eps: f64, horizon: f64) -> Result<Params<T>> {
    let alpha = FractionalOrder::new(T::lit(o.alpha.unwrap_or(alpha)))?;
    let eps = T::lit(o.eps.unwrap_or(eps));
    let horizon = T::lit(o.horizon.unwrap_or(horizon));
    if !(eps > T::zero()) {
        return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
    }
    if !(horizon > T::zero()) {
        return Err(Error::InvalidParameter(format!("horizon must be > 0, got {horizon}")));
    }
    Ok(Params { a: alpha.value(), alpha, eps, horizon })
}

fn c<T: Real>(x: f64) -> T {
    T::lit(x)
}

fn finish<T: Real>(p: CoupledProblem<T>) -> Result<CoupledProblem<T>> {
    p.validate()?;
    Ok(p)
}

/// Looks a catalog problem up by name.
pub fn by_name<T: Real>(name: &str, overrides: &Overrides) -> Result<CoupledProblem<T>> {
    match name {
        "example1" => example1(overrides),
        "example2" => example2(overrides),
        "example3" => example3(overrides),
        "example4" => example4(overrides),
        other => Err(Error::InvalidParameter(format!(
            "unknown problem '{other}' (expected one of {})",
            PROBLEM_NAMES.join(", ")
        ))),
    }
}

/// Local single-period test: `g = u sin v + 2 v + 1`, period 6,
/// exact `v = 6t - t^2`, `u = eps Gamma(3-a)/2 t^2 + eps Gamma(2-a) t + 1/2`.
pub fn example1<T: Real>(o: &Overrides) -> Result<CoupledProblem<T>> {
    let Params { alpha, a, eps, horizon } = resolve::<T>(o, 0.6, 5e-5, 6.0)?;
    let exact_u = QuadraticSlow {
        c0: c::<T>(0.5),
        c1: eps * (c::<T>(2.0) - a).gamma(),
        c2: eps * (c::<T>(3.0) - a).gamma() / c::<T>(2.0),
    };
    let v_ex = move |t: T| c::<T>(6.0) * t - t * t;
    let fast = FastField::new(
        |u: T, v: T| u * v.sin() + c::<T>(2.0) * v + T::one(),
        move |t: T| c::<T>(-2.0) * t * t + c::<T>(10.0) * t + c::<T>(7.0) + exact_u.eval(t) * v_ex(t).sin(),
        c::<T>(6.0),
    )?
    .with_dg_dv(|u: T, v: T| u * v.cos() + c::<T>(2.0));
    let source = move |t: T, u: T, v: T| {
        t.powf(c::<T>(2.0) - a) + t.powf(T::one() - a) + u * v - v_ex(t) * exact_u.eval(t)
    };
    finish(CoupledProblem {
        name: "example1".into(),
        fast,
        source: Arc::new(source),
        u0: c::<T>(0.5),
        v0: T::zero(),
        alpha,
        eps,
        horizon,
        cell_time: CellTime::Frozen,
        exact: Some(ExactSolution {
            u: exact_u,
            v: Arc::new(v_ex),
            v_dot: Arc::new(|t: T| c::<T>(6.0) - c::<T>(2.0) * t),
        }),
    })
}

/// Linear long-horizon test: `g = (u + 1) v`, period 1,
/// exact `v = t sin(2 pi t) + 2`, `u = eps Gamma(3-a)/2 t^2 + 1`.
pub fn example2<T: Real>(o: &Overrides) -> Result<CoupledProblem<T>> {
    let Params { alpha, a, eps, horizon } = resolve::<T>(o, 0.4, 5e-5, 10001.0)?;
    let two_pi = c::<T>(2.0 * PI);
    let exact_u = QuadraticSlow { c0: T::one(), c1: T::zero(), c2: eps * (c::<T>(3.0) - a).gamma() / c::<T>(2.0) };
    let v_ex = move |t: T| t * (two_pi * t).sin() + c::<T>(2.0);
    // (u + 1) evaluated on the exact slow solution
    let forcing = move |t: T| {
        (two_pi * t).sin() + two_pi * t * (two_pi * t).cos() + (exact_u.eval(t) + T::one()) * v_ex(t)
    };
    let fast = FastField::new(|u: T, v: T| (u + T::one()) * v, forcing, T::one())?
        .with_dg_dv(|u: T, _v: T| u + T::one());
    let source = move |t: T, u: T, v: T| {
        t.powf(c::<T>(2.0) - a) + exact_u.eval(t) * v_ex(t) / (u * v) - T::one()
    };
    finish(CoupledProblem {
        name: "example2".into(),
        fast,
        source: Arc::new(source),
        u0: T::one(),
        v0: c::<T>(2.0),
        alpha,
        eps,
        horizon,
        cell_time: CellTime::Frozen,
        exact: Some(ExactSolution {
            u: exact_u,
            v: Arc::new(v_ex),
            v_dot: Arc::new(move |t: T| (two_pi * t).sin() + two_pi * t * (two_pi * t).cos()),
        }),
    })
}

/// Coupled Riccati pair: `g = u v^2 + u v`, period 1,
/// exact `v = t sin^2(pi t) + 1`, `u = eps Gamma(2-a) t + 1`.
///
/// Cell averages use [`CellTime::Local`]. Frozen at an integer macro node,
/// `t sin^2(pi t)` vanishes and nothing balances `-v u^2` in the average.
pub fn example3<T: Real>(o: &Overrides) -> Result<CoupledProblem<T>> {
    let Params { alpha, a, eps, horizon } = resolve::<T>(o, 0.8, 5e-5, 8001.0)?;
    let pi = c::<T>(PI);
    let exact_u = QuadraticSlow { c0: T::one(), c1: eps * (c::<T>(2.0) - a).gamma(), c2: T::zero() };
    let v_ex = move |t: T| t * (pi * t).sin().powi(2) + T::one();
    let v_dot = move |t: T| (pi * t).sin().powi(2) + pi * t * (c::<T>(2.0) * pi * t).sin();
    let forcing = move |t: T| {
        let (u, v) = (exact_u.eval(t), v_ex(t));
        v_dot(t) + u * v * v + u * v
    };
    let fast = FastField::new(|u: T, v: T| u * v * v + u * v, forcing, T::one())?
        .with_dg_dv(|u: T, v: T| c::<T>(2.0) * u * v + u);
    let source = move |t: T, u: T, v: T| {
        let ue = exact_u.eval(t);
        -v * u * u + v_ex(t) * ue * ue + t.powf(T::one() - a)
    };
    finish(CoupledProblem {
        name: "example3".into(),
        fast,
        source: Arc::new(source),
        u0: T::one(),
        v0: T::one(),
        alpha,
        eps,
        horizon,
        cell_time: CellTime::Local,
        exact: Some(ExactSolution { u: exact_u, v: Arc::new(v_ex), v_dot: Arc::new(v_dot) }),
    })
}

/// Nonlinear problem without closed form: `g = u^2 v^2`,
/// `f = t^(1/4) sin(2 pi t) + 5`, `R = v u^2`.
pub fn example4<T: Real>(o: &Overrides) -> Result<CoupledProblem<T>> {
    let Params { alpha, eps, horizon, .. } = resolve::<T>(o, 0.6, 5e-5, 10000.0)?;
    let fast = FastField::new(
        |u: T, v: T| u * u * v * v,
        move |t: T| t.powf(c::<T>(0.25)) * (c::<T>(2.0 * PI) * t).sin() + c::<T>(5.0),
        T::one(),
    )?
    .with_dg_dv(|u: T, v: T| c::<T>(2.0) * u * u * v);
    finish(CoupledProblem {
        name: "example4".into(),
        fast,
        source: Arc::new(|_t: T, u: T, v: T| v * u * u),
        u0: c::<T>(0.5),
        v0: T::one(),
        alpha,
        eps,
        horizon,
        cell_time: CellTime::Frozen,
        exact: None,
    })
}

/// Rectangular sampling region for [`assumption_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeBox {
    pub t: (f64, f64),
    pub u: (f64, f64),
    pub v: (f64, f64),
    /// Grid points per axis, each >= 2.
    pub points: (usize, usize, usize),
}

/// Numerical estimates of the bounds on `R` and `g` over a sample box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// `max(|R|, |dR/dt|)`
    pub c_r: f64,
    /// `max |dR/du|`
    pub l1_r: f64,
    /// `max |dR/dv|`
    pub l2_r: f64,
    /// `max |g|`
    pub c_g: f64,
    /// `max |dg/du|`
    pub l3: f64,
    /// `max dg/dv`
    pub l4: f64,
    /// `min dg/dv`
    pub g_min: f64,
    pub sample_box: ProbeBox,
}

impl AssumptionReport {
    /// Shooting theory needs a strictly positive dissipation rate.
    pub fn within_theory(&self) -> bool {
        self.g_min > 0.0
    }
}

fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64).collect()
}

fn central<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let h = 1e-6 * (1.0 + x.abs());
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Estimates the constants bounding `R` and `g` by finite differences and
/// extrema over a tensor grid. Purely diagnostic.
pub fn assumption_probe<T: Real>(problem: &CoupledProblem<T>, sample_box: &ProbeBox) -> Result<AssumptionReport> {
    let (nt, nu, nv) = sample_box.points;
    if nt < 2 || nu < 2 || nv < 2 {
        return Err(Error::InvalidParameter("probe grid needs at least 2 points per axis".into()));
    }
    for (lo, hi) in [sample_box.t, sample_box.u, sample_box.v] {
        if !(lo <= hi) {
            return Err(Error::InvalidParameter(format!("empty probe range [{lo}, {hi}]")));
        }
    }
    let r = |t: f64, u: f64, v: f64| problem.r(T::lit(t), T::lit(u), T::lit(v)).as_f64();
    let g = |u: f64, v: f64| problem.g(T::lit(u), T::lit(v)).as_f64();
    let (ts, us, vs) = (axis(sample_box.t, nt), axis(sample_box.u, nu), axis(sample_box.v, nv));

    let mut rep = AssumptionReport {
        c_r: 0.0,
        l1_r: 0.0,
        l2_r: 0.0,
        c_g: 0.0,
        l3: 0.0,
        l4: f64::NEG_INFINITY,
        g_min: f64::INFINITY,
        sample_box: *sample_box,
    };
    for &u in &us {
        for &v in &vs {
            let gv = problem.fast.dg_dv(T::lit(u), T::lit(v)).as_f64();
            let gu = central(|x| g(x, v), u);
            let gval = g(u, v);
            if !(gv.is_finite() && gu.is_finite() && gval.is_finite()) {
                return Err(Error::ProbeNonFinite { t: f64::NAN, u, v });
            }
            rep.c_g = rep.c_g.max(gval.abs());
            rep.l3 = rep.l3.max(gu.abs());
            rep.l4 = rep.l4.max(gv);
            rep.g_min = rep.g_min.min(gv);
            for &t in &ts {
                let rv = r(t, u, v);
                let rt = central(|x| r(x.max(0.0), u, v), t.max(1e-6));
                let ru = central(|x| r(t, x, v), u);
                let rvv = central(|x| r(t, u, x), v);
                if ![rv, rt, ru, rvv].iter().all(|x| x.is_finite()) {
                    return Err(Error::ProbeNonFinite { t, u, v });
                }
                rep.c_r = rep.c_r.max(rv.abs()).max(rt.abs());
                rep.l1_r = rep.l1_r.max(ru.abs());
                rep.l2_r = rep.l2_r.max(rvv.abs());
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        axis((lo, hi), n)
    }

    #[test]
    fn example1_exact_values() {
        let p = example1::<f64>(&Overrides::default()).unwrap();
        assert_eq!(p.exact_v(3.0), Some(9.0));
        assert_eq!(p.exact_v(0.0), Some(0.0));
        assert_eq!(p.exact_v(6.0), Some(0.0));
        assert_eq!(p.period(), 6.0);
        assert_eq!(p.horizon, 6.0);
    }

    #[test]
    fn example2_exact_values() {
        let p = example2::<f64>(&Overrides::default()).unwrap();
        for t in [0.0, 1.0, 17.0, 9999.0] {
            assert!((p.exact_v(t).unwrap() - 2.0).abs() < 1e-9 * (1.0 + t));
        }
        assert_eq!(p.exact_u(0.0), Some(1.0));
    }

    #[test]
    fn example3_exact_values() {
        let p = example3::<f64>(&Overrides::default()).unwrap();
        for t in [0.0, 1.0, 5.0, 800.0] {
            assert!((p.exact_v(t).unwrap() - 1.0).abs() < 1e-9 * (1.0 + t));
        }
        assert_eq!(p.exact_u(0.0), Some(1.0));
    }

    #[test]
    fn example4_forcing() {
        let p = example4::<f64>(&Overrides::default()).unwrap();
        assert_eq!(p.f(0.0), 5.0);
        for t in [1.0, 2.0, 100.0] {
            assert!((p.f(t) - 5.0).abs() < 1e-10);
        }
        assert!(p.exact.is_none());
    }

    #[test]
    fn manufactured_solutions_satisfy_equations() {
        let o = Overrides::default();
        let (f1, s1) = example1::<f64>(&o).unwrap().residual_check(&grid(0.0, 6.0, 100)).unwrap();
        assert!(f1 <= 1e-10 && s1 <= 1e-10, "{f1} {s1}");
        let (f2, s2) = example2::<f64>(&o).unwrap().residual_check(&grid(0.0, 100.0, 1001)).unwrap();
        assert!(f2 <= 1e-9 && s2 <= 1e-9, "{f2} {s2}");
        let (f3, s3) = example3::<f64>(&o).unwrap().residual_check(&grid(0.0, 100.0, 1001)).unwrap();
        assert!(f3 <= 1e-9 && s3 <= 1e-9, "{f3} {s3}");
    }

    #[test]
    fn overrides_apply_and_validate() {
        let p = example2::<f64>(&Overrides { alpha: Some(0.3), eps: None, horizon: Some(50.0) }).unwrap();
        assert_eq!(p.alpha.value(), 0.3);
        assert_eq!(p.horizon, 50.0);
        assert!(example2::<f64>(&Overrides { alpha: Some(1.2), ..Default::default() }).is_err());
        assert!(example2::<f64>(&Overrides { horizon: Some(0.5), ..Default::default() }).is_err());
        assert!(example2::<f64>(&Overrides { eps: Some(-1.0), ..Default::default() }).is_err());
        assert!(by_name::<f64>("example9", &Overrides::default()).is_err());
        assert!(example2::<f64>(&Overrides { eps: Some(0.1), ..Default::default() }).unwrap().weakly_separated());
    }

    #[test]
    fn probe_linear_damping() {
        let mut p = example2::<f64>(&Overrides::default()).unwrap();
        p.source = Arc::new(|_, u, v| u + v);
        let b = ProbeBox { t: (0.0, 1.0), u: (1.0, 2.0), v: (0.0, 3.0), points: (3, 5, 7) };
        let rep = assumption_probe(&p, &b).unwrap();
        assert!((rep.g_min - 2.0).abs() < 1e-12);
        assert!((rep.l4 - 3.0).abs() < 1e-12);
        assert!((rep.l3 - 3.0).abs() < 1e-6);
        assert!((rep.l1_r - 1.0).abs() < 1e-6 && (rep.l2_r - 1.0).abs() < 1e-6);
        assert!(rep.within_theory());
    }

    #[test]
    fn probe_sine_damping_bounds() {
        let mut p = example4::<f64>(&Overrides::default()).unwrap();
        p.fast = FastField::new(|_u: f64, v: f64| 2.0 * v + v.sin(), |_| 0.0, 1.0).unwrap();
        let b = ProbeBox { t: (0.0, 1.0), u: (0.0, 1.0), v: (-4.0, 4.0), points: (2, 2, 81) };
        let rep = assumption_probe(&p, &b).unwrap();
        assert!(rep.g_min >= 1.0 - 1e-6 && rep.l4 <= 3.0 + 1e-6, "{rep:?}");
    }

    #[test]
    fn probe_example3_derivative_bound() {
        let p = example3::<f64>(&Overrides::default()).unwrap();
        let b = ProbeBox { t: (1.0, 2.0), u: (1.0, 1.01), v: (1.0, 9001.0), points: (2, 3, 11) };
        let rep = assumption_probe(&p, &b).unwrap();
        let closed = 1.01 * (2.0 * 9001.0 + 1.0);
        assert!((rep.l4 - closed).abs() < 1e-9 * closed);
        assert!((rep.g_min - 3.0).abs() < 1e-12);
    }

    #[test]
    fn probe_example4_degenerates_at_zero() {
        let p = example4::<f64>(&Overrides::default()).unwrap();
        let b = ProbeBox { t: (0.0, 1e4), u: (0.4, 1.5), v: (0.0, 3.0), points: (5, 12, 31) };
        let rep = assumption_probe(&p, &b).unwrap();
        // min of 2 u^2 v over the box sits on v = 0
        assert_eq!(rep.g_min, 0.0);
        assert!(!rep.within_theory());
        assert!((rep.l4 - 2.0 * 1.5 * 1.5 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn probe_reports_singular_source() {
        let p = example2::<f64>(&Overrides::default()).unwrap();
        let b = ProbeBox { t: (0.0, 1.0), u: (1.0, 2.0), v: (0.0, 3.0), points: (2, 2, 2) };
        assert!(matches!(assumption_probe(&p, &b), Err(Error::ProbeNonFinite { .. })));
    }
}
