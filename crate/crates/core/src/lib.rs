#![cfg_attr(not(feature = "std"), no_std)]
//! Variational divergence minimization.
//!
//! The crate covers the f-divergence family with conjugates and output
//! activations ([`divergence`]), one-dimensional Gaussian mixtures with an
//! exact quadrature oracle ([`density`], [`quadrature`], [`oracle`]), a small
//! reverse-mode network ([`net`]), the saddle-point trainer ([`trainer`]) and
//! a numerical certificate for the single-step method's convergence rate
//! ([`saddle`]).
//!
//! Builds without `std` (with `alloc`); the default `std` feature switches the
//! scalar math to the platform libm and enables runtime SIMD detection in the
//! matrix kernels.

extern crate alloc;

pub mod density;
pub mod divergence;
pub mod error;
pub mod lambert;
pub mod math;
pub mod nelder_mead;
pub mod net;
pub mod optim;
pub mod oracle;
pub mod quadrature;
pub mod saddle;
pub mod trainer;
pub mod verify;

pub use divergence::{all_specs, make_spec, DivergenceSpec, Family, Interval, ShapeParams};
pub use error::{DensityError, DivergenceError, NetError, SaddleError, TrainError};
pub use density::MixtureDensity;
pub use lambert::lambert_w;
pub use oracle::{best_fit, exact_divergence, BestFit};
pub use quadrature::QuadratureConfig;
