//! Exact finite-N spectral correlation functions of unitary-invariant
//! random matrix ensembles, with Grassmann-algebra and Monte Carlo oracles.
//!
//! Conventions used throughout:
//! * the canonical Gaussian is `P(H) ∝ exp(-tr H²)`; other widths are given
//!   as a `scale` with `P(H) ∝ exp(-tr H²/scale)`;
//! * `R̂_k` carries the full resolvent `(1/π) tr (x - iLε - H)^{-1}` per point,
//!   `R_k` only its imaginary parts;
//! * the characteristic function is the flat Fourier transform
//!   `Φ(r) = ⟨exp(i Σ_j h_j r_j)⟩` of the reduced density.

pub mod cli;
pub mod correlation;
pub mod ensembles;
pub mod error;
pub mod grassmann;
pub mod jet;
pub mod kernels;
pub mod linalg;
pub mod mc;
pub mod metric;
pub mod poly;
pub mod quad;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use metric::{MetricSignature, Side};

/// Complex double used for every amplitude in the crate.
pub type C64 = num_complex::Complex64;

/// Convention tag embedded in every emitted result.
pub const CONVENTION: &str = "gaussian=exp(-trH^2/scale);Rhat=(1/pi)tr(x-iLeps-H)^-1;phi=flat-fourier";
