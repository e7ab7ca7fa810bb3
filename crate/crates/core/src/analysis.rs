//! Error norms, convergence orders and run reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sampled solution of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub label: String,
}

impl<T: Real> Trajectory<T> {
    pub fn new(label: impl Into<String>, times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "trajectory has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("trajectory times must be strictly increasing".into()));
        }
        Ok(Self { times, values, label: label.into() })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    pub fn last(&self) -> Option<(T, T)> {
        Some((*self.times.last()?, *self.values.last()?))
    }
}

/// How the "L1 error" of a sampled error profile is reduced to one number.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum L1Convention {
    /// `(1/M) sum |e_m|`
    #[default]
    Mean,
    /// `sum (t_m - t_{m-1}) |e_m|`
    Integral,
}

kebab_enum_text!(L1Convention { Mean => "mean", Integral => "integral" });

/// `(l1, linf)` of `numeric - reference` over the trajectory's grid.
pub fn error_norms<T: Real>(
    numeric: &Trajectory<T>,
    mut reference: impl FnMut(T) -> T,
    convention: L1Convention,
) -> Result<(T, T)> {
    if numeric.is_empty() {
        return Err(Error::InvalidParameter("error norms of an empty trajectory".into()));
    }
    let mut linf = T::zero();
    let mut sum = T::zero();
    let mut prev_t: Option<T> = None;
    for (t, x) in numeric.iter() {
        let e = (x - reference(t)).abs();
        linf = linf.max(e);
        sum = sum
            + match convention {
                L1Convention::Mean => e,
                L1Convention::Integral => prev_t.map_or(T::zero(), |p| (t - p) * e),
            };
        prev_t = Some(t);
    }
    let l1 = match convention {
        L1Convention::Mean => sum / T::from_count(numeric.len()),
        L1Convention::Integral => sum,
    };
    Ok((l1, linf))
}

/// Error norms between two trajectories sampled on (possibly) different grids:
/// `reference` is evaluated at the numeric trajectory's times, which must all
/// appear in the reference grid.
pub fn error_norms_against<T: Real>(
    numeric: &Trajectory<T>,
    reference: &Trajectory<T>,
    convention: L1Convention,
) -> Result<(T, T)> {
    let mut missing = None;
    let lookup = |t: T| {
        let tol = T::lit(1e-9) * (T::one() + t.abs());
        match reference.times.binary_search_by(|probe| {
            if (*probe - t).abs() <= tol {
                std::cmp::Ordering::Equal
            } else if *probe < t {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        }) {
            Ok(i) => reference.values[i],
            Err(_) => T::nan(),
        }
    };
    let (l1, linf) = error_norms(numeric, |t| {
        let r = lookup(t);
        if r.is_nan() && missing.is_none() {
            missing = Some(t.as_f64());
        }
        r
    }, convention)?;
    if let Some(t) = missing {
        return Err(Error::InvalidParameter(format!("reference grid has no sample at t = {t}")));
    }
    Ok((l1, linf))
}

/// Observed convergence orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    /// `log(e_{k-1}/e_k) / log(h_{k-1}/h_k)` for consecutive pairs.
    pub pairwise: Vec<f64>,
    /// Least-squares slope of `log e` against `log h`.
    pub least_squares: f64,
}

/// Fits convergence orders to `(h, e)` pairs with `h` strictly decreasing.
pub fn convergence_order(errors: &[(f64, f64)]) -> Result<OrderFit> {
    if errors.len() < 2 {
        return Err(Error::InvalidParameter("need at least two (h, e) pairs".into()));
    }
    if let Some(&(h, e)) = errors.iter().find(|(h, e)| !(*e > 0.0) || !(*h > 0.0)) {
        return Err(Error::InvalidParameter(format!("non-positive step or error: ({h}, {e})")));
    }
    if errors.windows(2).any(|w| !(w[1].0 < w[0].0)) {
        return Err(Error::InvalidParameter("steps must be strictly decreasing".into()));
    }
    let pairwise = errors
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect();
    let n = errors.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = errors.iter().map(|(h, e)| (h.ln(), e.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(OrderFit { pairwise, least_squares: sxy / sxx })
}

/// Outcome of one solver run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub l1_error: Option<f64>,
    pub linf_error: Option<f64>,
    /// `(l1 order, linf order)` when the run is part of a ladder.
    pub orders: Option<(f64, f64)>,
    pub wall_seconds: f64,
    pub steps: usize,
    pub shooting_iters: Option<usize>,
}

impl RunReport {
    pub fn with_errors(mut self, l1: f64, linf: f64) -> Self {
        debug_assert!(l1 >= 0.0 && linf >= 0.0);
        self.l1_error = Some(l1);
        self.linf_error = Some(linf);
        self
    }
}
