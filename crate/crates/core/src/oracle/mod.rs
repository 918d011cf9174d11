//! Independent reference computations.
//!
//! Nothing here shares code with the analytic solvers beyond the barrier
//! description and the physical constants: transmission comes from a
//! many-slice transfer matrix, integrals from tanh-sinh quadrature, Airy
//! values from Bessel-function integral representations, derivatives from
//! Richardson-extrapolated differences and wavefunctions from a Runge-Kutta
//! integration of the Schrödinger equation.

mod airy_quad;
mod diff;
mod flux_integrals;
mod ode;
mod quad;
mod transfer;

pub use airy_quad::{airy_by_quadrature, airy_scaled_by_quadrature};
pub use diff::{finite_diff, DiffEstimate};
pub use flux_integrals::{transferred_fluxes_by_quadrature, FluxIntegrals};
pub use ode::{integrate_schrodinger, OdeState};
pub use quad::{integrate, tanh_sinh, QuadEstimate};
pub use transfer::{
    transfer_matrix_t, transmission_converged, ConvergedTransmission, SlicedPotential,
    TransferResult,
};
