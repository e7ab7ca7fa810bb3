//! L1 discretization of the Caputo derivative of order `0 < alpha < 1`.
//!
//! On a uniform grid `t_i = i * dt` the Caputo derivative is approximated by
//!
//! ```text
//! D^alpha u(t_i) ~ dt^-alpha / Gamma(2 - alpha)
//!                  * [ a_0 u_i - sum_{j=1}^{i-1} (a_{i-j-1} - a_{i-j}) u_j - a_{i-1} u_0 ]
//! ```
//!
//! with `a_0 = 1` and `a_j = (j + 1)^(1 - alpha) - j^(1 - alpha)`. Solving for
//! `u_i` given the right-hand side gives the explicit update implemented by
//! [`CaputoHistory::advance`]. The whole history is kept; the convolution sum is
//! O(i) per step.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Order of the Caputo derivative, restricted to the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalOrder<T>(T);

impl<T: Real> FractionalOrder<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if alpha > T::zero() && alpha < T::one() {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidParameter(format!(
                "fractional order must lie in (0, 1), got {alpha}"
            )))
        }
    }

    pub fn value(self) -> T {
        self.0
    }

    /// `Gamma(2 - alpha)`, the normalisation of the L1 formula.
    pub fn gamma_two_minus(self) -> T {
        (T::lit(2.0) - self.0).gamma()
    }
}

/// The L1 weights `a_0 ..= a_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Weights<T> {
    alpha: FractionalOrder<T>,
    a: Vec<T>,
}

impl<T: Real> L1Weights<T> {
    pub fn alpha(&self) -> FractionalOrder<T> {
        self.alpha
    }

    pub fn as_slice(&self) -> &[T] {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

impl<T> std::ops::Index<usize> for L1Weights<T> {
    type Output = T;
    fn index(&self, j: usize) -> &T {
        &self.a[j]
    }
}

/// Computes `a_0 ..= a_n` from the closed form.
pub fn l1_weights<T: Real>(alpha: FractionalOrder<T>, n: usize) -> L1Weights<T> {
    let p = T::one() - alpha.value();
    let mut a = Vec::with_capacity(n + 1);
    a.push(T::one());
    let mut prev = T::one(); // 1^(1-alpha)
    for j in 1..=n {
        let next = T::from_count(j + 1).powf(p);
        a.push(next - prev);
        prev = next;
    }
    L1Weights { alpha, a }
}

/// Accepted slow-variable values on a uniform grid plus the weights needed to
/// take the next L1 step.
#[derive(Debug, Clone)]
pub struct CaputoHistory<T> {
    dt: T,
    u0: T,
    values: Vec<T>,
    weights: L1Weights<T>,
    /// `Gamma(2 - alpha) * dt^alpha`
    scale: T,
    /// `rev[cap - k] = a_{k-1} - a_k` for `k = 1 .. cap`, so that the history
    /// convolution is a contiguous dot product.
    rev: Vec<T>,
}

impl<T: Real> CaputoHistory<T> {
    /// Empty history; `capacity` is the expected number of steps and only
    /// sizes the initial weight table.
    pub fn new(alpha: FractionalOrder<T>, dt: T, u0: T, capacity: usize) -> Result<Self> {
        let weights = l1_weights(alpha, capacity.max(1));
        Self::from_parts(dt, u0, Vec::with_capacity(capacity), weights)
    }

    /// Assembles a history from explicit parts. The weights are not required
    /// to cover the history; [`advance`](Self::advance) reports the mismatch.
    pub fn from_parts(dt: T, u0: T, values: Vec<T>, weights: L1Weights<T>) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidParameter(format!("history step must be > 0, got {dt}")));
        }
        let alpha = weights.alpha();
        let scale = alpha.gamma_two_minus() * dt.powf(alpha.value());
        let rev = reversed_differences(&weights);
        Ok(Self { dt, u0, values, weights, scale, rev })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn u0(&self) -> T {
        self.u0
    }

    /// `u_1 ..= u_i`, excluding the initial value.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn weights(&self) -> &L1Weights<T> {
        &self.weights
    }

    pub fn last(&self) -> T {
        self.values.last().copied().unwrap_or(self.u0)
    }

    /// Value of the next step `u_i` for an already scaled right-hand side
    /// (`eps * R` for the slow equation). Does not modify the history.
    pub fn advance(&self, rhs: T) -> Result<T> {
        let i = self.values.len() + 1;
        let cap = self.weights.len();
        if cap < i {
            return Err(Error::InconsistentHistory { values: self.values.len(), weights: cap });
        }
        let memory = dot(&self.values, &self.rev[cap - i + 1..]);
        Ok(self.scale * rhs + memory + self.weights[i - 1] * self.u0)
    }

    /// Appends an accepted value, growing the weight table when needed.
    pub fn push(&mut self, u: T) {
        self.values.push(u);
        if self.weights.len() < self.values.len() + 1 {
            let n = (2 * self.weights.len()).max(self.values.len() + 1);
            self.weights = l1_weights(self.weights.alpha(), n);
            self.rev = reversed_differences(&self.weights);
        }
    }
}

fn reversed_differences<T: Real>(weights: &L1Weights<T>) -> Vec<T> {
    let a = weights.as_slice();
    let cap = a.len();
    let mut rev = vec![T::zero(); cap];
    for k in 1..cap {
        rev[cap - k] = a[k - 1] - a[k];
    }
    rev
}

/// Dot product with a fixed, lane-parallel summation order so the result does
/// not depend on how the compiler vectorises it.
fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    const LANES: usize = 8;
    let mut acc = [T::zero(); LANES];
    let xc = x.chunks_exact(LANES);
    let yc = y.chunks_exact(LANES);
    let (xr, yr) = (xc.remainder(), yc.remainder());
    for (xs, ys) in xc.zip(yc) {
        for l in 0..LANES {
            acc[l] = acc[l] + xs[l] * ys[l];
        }
    }
    let mut tail = T::zero();
    for (a, b) in xr.iter().zip(yr) {
        tail = tail + *a * *b;
    }
    let s0 = (acc[0] + acc[4]) + (acc[1] + acc[5]);
    let s1 = (acc[2] + acc[6]) + (acc[3] + acc[7]);
    (s0 + s1) + tail
}

/// Caputo derivative of the monomial `t^p` for `p` in {1, 2}:
/// `Gamma(p + 1) / Gamma(p + 1 - alpha) * t^(p - alpha)`.
pub fn caputo_analytic<T: Real>(p: u32, alpha: FractionalOrder<T>, t: T) -> Result<T> {
    if !matches!(p, 1 | 2) {
        return Err(Error::Unsupported(format!("analytic Caputo derivative of t^{p}")));
    }
    if t < T::zero() {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let p = T::from_u32(p).expect("small integer");
    let a = alpha.value();
    if t == T::zero() {
        return Ok(T::zero());
    }
    Ok((p + T::one()).gamma() / (p + T::one() - a).gamma() * t.powf(p - a))
}
