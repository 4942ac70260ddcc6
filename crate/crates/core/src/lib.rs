//! Simulation and inference for nearly-unstable autoregressive triangular arrays.
//!
//! Row `n` of the array is an AR(p) process whose companion matrix `A_n` has
//! spectral radius `rho_n = 1 - c / n^alpha`, so each row is stable while the
//! family drifts towards a unit root at `+1`, `-1` or both. The crate builds
//! those models from an eigenvalue description ([`spectrum`]), houses the
//! Kronecker/Lyapunov objects that describe their second-order structure
//! ([`linalg`]), simulates rows ([`process`]), fits them by least squares
//! ([`estimation`]), normalizes the estimation error ([`asymptotics`]) and
//! runs reproducible Monte Carlo campaigns ([`montecarlo`]).

pub mod asymptotics;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod montecarlo;
pub mod parse;
pub mod process;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Real dense matrix used throughout the crate.
pub type RMat = nalgebra::DMatrix<f64>;
/// Complex dense matrix used throughout the crate.
pub type CMat = nalgebra::DMatrix<Complex64>;
