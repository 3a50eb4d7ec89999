//! Numerical core for wave maps into the sphere on a periodic box.
//!
//! The crate provides the building blocks for a first-order pseudospectral
//! solver of the wave maps equation and for the frequency-space diagnostics
//! that go with it:
//!
//! * [`grid`] / [`spectral`]: periodic grids, trigonometric interpolation,
//!   Fourier multipliers, Sobolev norms, the smooth low-pass filter and
//!   Littlewood-Paley blocks built from it;
//! * [`propagator`]: the exact free half-wave and wave group, applied per mode;
//! * [`stepper`]: the filtered Lie splitting scheme with its discrete wave
//!   operator, difference quotients and trilinear nonlinearity;
//! * [`bourgain`]: the semidiscrete spacetime Fourier transform on a finite
//!   window, weighted spacetime norms, modulation cutoffs, the vanishing
//!   checks for paraproduct interactions, and a Strichartz ratio monitor;
//! * [`refsol`]: closed-form geodesic reference solutions and the shipped
//!   initial data families (Gaussian profile, prescribed rough spectrum);
//! * [`oracle`] / [`rate`]: an independent Runge-Kutta reference integrator
//!   for the filtered system and least-squares convergence-rate fitting.
//!
//! Everything here is deterministic: random inputs for diagnostics are drawn
//! from counter-seeded ChaCha streams, and no global state is involved. The
//! crate is `no_std` (with `alloc`); file formats, timing and orchestration
//! live in the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bourgain;
mod error;
mod fft;
pub mod grid;
pub mod oracle;
pub mod propagator;
pub mod rate;
pub mod refsol;
pub mod rng;
pub mod spectral;
pub mod stepper;
pub mod strichartz;
pub mod vanishing;

pub use error::{CoreError, Result};

/// Complex scalar used throughout: double-precision Cartesian complex.
pub type C64 = num_complex::Complex<f64>;
