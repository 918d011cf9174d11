//! Quantum-measurement noise of a vacuum-tunneling position transducer.
//!
//! The crate solves one-dimensional stationary scattering through three
//! barrier shapes (symmetric rectangle, asymmetric rectangle, linear field
//! ramp), derives the momentum fluxes the tunneling electrons hand to the
//! monitored electrode, and turns them into the position/momentum
//! uncertainty pair and a force-noise budget.
//!
//! Module map:
//!
//! * [`units`]: constants and unit-tagged scalars (SI inside).
//! * [`airy`]: Airy functions for the linear-field barrier.
//! * [`scattering`]: amplitudes, coefficients and wavefunction evaluation.
//! * [`fluxes`]: probability / momentum / momentum² densities and currents.
//! * [`uncertainty`]: Δl, Δp and their product.
//! * [`noise`]: force and current spectral densities, feasibility figure.
//! * [`oracle`]: independent reference solvers used for verification.
//! * [`cli`]: configuration, sweeps and report formatting for the binary.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy;
pub mod cli;
pub mod error;
pub mod fluxes;
pub mod noise;
pub mod oracle;
pub mod scattering;
pub mod uncertainty;
pub mod units;

pub use error::{Error, Result};
pub use scattering::{BarrierFamily, BarrierSpec, ScatteringSolution, Side, WavefunctionSample};
pub use units::{Energy, Length, Wavenumber};
