use crate::error::Result;
use crate::fluxes::currents_at;
use crate::scattering::{BarrierFamily, ScatteringSolution, Side};
use crate::units::{Length, HBAR};

use super::quad::{integrate, tanh_sinh};

/// Transferred fluxes assembled from the force-density integrals
/// `∫(∂V₂/∂x)|ψ|²dx` and `2∫(∂V₂/∂x)ρ_p dx`, plus analytic step terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxIntegrals {
    pub j_p_t: f64,
    pub j_p2_t: f64,
    /// `∫_a^b |ψ|² dx`
    pub interior_density: f64,
    /// `∫_a^b ρ_p dx`
    pub interior_momentum_density: f64,
}

pub fn transferred_fluxes_by_quadrature(sol: &ScatteringSolution) -> Result<FluxIntegrals> {
    let spec = &sol.barrier;
    let (a, b, l) = (spec.left_edge(), spec.right_edge(), spec.gap.meters());
    let sample = |x: f64| sol.eval_wavefunction(Length::from_meters(x), Side::Bulk);
    let density = |x: f64| sample(x).map(|w| w.psi.norm_sqr()).unwrap_or(f64::NAN);
    let momentum = |x: f64| {
        sample(x)
            .map(|w| HBAR * (w.psi.conj() * w.d1).im)
            .unwrap_or(f64::NAN)
    };
    let magnitude = |x: f64| {
        sample(x)
            .map(|w| HBAR * w.psi.norm() * w.d1.norm())
            .unwrap_or(f64::NAN)
    };
    let rho = integrate(&density, a, b, 1e-13, 0.0).value;
    // ρ_p is evaluated with rounding noise of order ε·ħ|ψ||ψ'|; stop refining there
    let floor = 1e-14 * tanh_sinh(magnitude, a, b, 1e-6).value;
    let rho_p = integrate(&momentum, a, b, 1e-13, floor).value;

    let outside = currents_at(sol, Length::from_meters(b), Side::RightLimit)?;
    let at_b = sol.eval_wavefunction(Length::from_meters(b), Side::RightLimit)?;
    let rho_b = at_b.psi.norm_sqr();
    let rho_p_b = HBAR * (at_b.psi.conj() * at_b.d1).im;
    let v_in = sol.potential_at(b, Side::LeftLimit);
    let v_out = sol.potential_at(b, Side::RightLimit);

    // V₂: interior slope and the step at b attributed to the electrode.
    let (slope, step_b) = match spec.family {
        BarrierFamily::LinearField => {
            let phi = spec.phi.joules();
            let top = spec.v0.joules() - phi / 2.0;
            (-phi / (2.0 * l), -phi - (top - phi / 2.0))
        }
        _ => (0.0, v_out - v_in),
    };
    Ok(FluxIntegrals {
        j_p_t: outside.j_p + slope * rho + step_b * rho_b,
        j_p2_t: outside.j_p2 + 2.0 * slope * rho_p + 2.0 * step_b * rho_p_b,
        interior_density: rho,
        interior_momentum_density: rho_p,
    })
}
