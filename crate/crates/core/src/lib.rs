//! Solvers for two-scale systems that couple a fast first-order ODE
//!
//! ```text
//! v'(t) + g(u, v) = f(t)
//! ```
//!
//! with a slow Caputo-fractional equation `D^alpha u = eps R(t, u, v)`.
//!
//! Two solvers are provided: [`direct::direct_solve`] resolves the fast scale
//! over the whole horizon, and [`multiscale::multiscale_solve`] replaces it by
//! periodic cell problems solved at a frozen slow value, taking coarse L1 steps
//! for the slow variable. [`problems`] holds the benchmark catalog and
//! [`experiments`] the table sweeps and file formats used by the CLI.
//!
//! All numerical code is generic over [`Real`]; the aliases below fix `f64`.

/// `Display` and `FromStr` for fieldless enums with fixed spellings.
macro_rules! kebab_enum_text {
    ($ty:ty { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl ::std::fmt::Display for $ty {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }
        impl ::std::str::FromStr for $ty {
            type Err = $crate::Error;
            fn from_str(s: &str) -> $crate::Result<Self> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    other => Err($crate::Error::Parse(format!(
                        concat!("unknown ", stringify!($ty), " '{}'"), other))),
                }
            }
        }
    };
}

pub mod analysis;
pub mod direct;
pub mod error;
pub mod experiments;
pub mod fast;
pub mod fractional;
pub mod io;
pub mod multiscale;
pub mod problems;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CoupledProblem = problems::CoupledProblem<f64>;
pub type FastField = fast::FastField<f64>;
pub type StepScheme = fast::StepScheme<f64>;
pub type CellSolution = fast::CellSolution<f64>;
pub type FractionalOrder = fractional::FractionalOrder<f64>;
pub type L1Weights = fractional::L1Weights<f64>;
pub type CaputoHistory = fractional::CaputoHistory<f64>;
pub type Trajectory = analysis::Trajectory<f64>;
pub type DirectConfig = direct::DirectConfig<f64>;
pub type MacroConfig = multiscale::MacroConfig<f64>;
pub type MacroState = multiscale::MacroState<f64>;
