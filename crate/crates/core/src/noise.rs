//! Force and current noise budget of the transducer.
//!
//! All spectral densities are single-sided. With `N = I₀τ/(eT)` electrons
//! incident during `τ` (so that `I₀τ/e` of them are transmitted), the
//! back-action force PSD is `S_fQ = 2(Δp)²/(Nτ)·N = 2(Δp)²₁·I₀/(eT)`, where
//! `(Δp)²₁` is the per-incident-electron variance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluxes::transferred_fluxes;
use crate::scattering::{solve, BarrierFamily, BarrierSpec};
use crate::uncertainty::momentum_variance_over_t;
use crate::units::{Energy, BOLTZMANN, ELEMENTARY_CHARGE, HBAR};

/// Mechanical resonator carrying the monitored electrode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorSpec {
    /// kg
    pub mass: f64,
    /// Hz
    pub f0: f64,
    pub quality: f64,
    /// K
    pub temperature: f64,
}

impl ResonatorSpec {
    /// `m = 10⁻¹⁰ kg`, `f₀ = 10⁵ Hz`, `Q = 10⁷`, `θ = 10 mK`.
    pub const NOMINAL: ResonatorSpec = ResonatorSpec {
        mass: 1e-10,
        f0: 1e5,
        quality: 1e7,
        temperature: 1e-2,
    };

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("f0", self.f0),
            ("Q", self.quality),
            ("temp", self.temperature),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Nominal tunnel current, A.
pub const NOMINAL_CURRENT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    /// N²/Hz
    pub s_fq: f64,
    /// N²/Hz
    pub s_fl: f64,
    pub feasibility_lhs: f64,
    /// `S_fL/S_fQ`
    pub psd_ratio: f64,
    /// A/√Hz
    pub shot_psd: f64,
    /// A
    pub tunnel_current: f64,
    /// eV
    pub electron_energy: f64,
    pub barrier: BarrierSpec,
    pub resonator: ResonatorSpec,
}

impl NoiseBudget {
    /// Quantum back-action dominates the thermal force noise.
    pub fn feasible(&self) -> bool {
        self.feasibility_lhs < 1.0
    }
}

fn check_current(i0: f64) -> Result<()> {
    if !(i0.is_finite() && i0 > 0.0) {
        return Err(Error::domain(
            "I0",
            format!("tunnel current must be positive, got {i0}"),
        ));
    }
    Ok(())
}

/// `S_fQ = (I₀/e)ħ²k²·½[(1+(k₀/k)²)² − (1−(k₀/k)²)²(1−T)]` for a symmetric
/// rectangle, checked against `2(Δp)²₁·I₀/(eT)` from the flux pipeline. Other
/// barrier families use the flux pipeline alone.
pub fn quantum_force_psd(i0: f64, energy: Energy, spec: &BarrierSpec) -> Result<f64> {
    check_current(i0)?;
    let sol = solve(energy, spec)?;
    let rate = i0 / ELEMENTARY_CHARGE;
    let via_fluxes = 2.0 * momentum_variance_over_t(&transferred_fluxes(&sol), &sol)? * rate;
    if spec.family != BarrierFamily::SymmetricRect {
        return Ok(via_fluxes);
    }
    let (k, k0) = (sol.k.per_meter(), sol.k0.per_meter());
    let x = (k0 / k).powi(2);
    let closed =
        rate * (HBAR * k).powi(2) * 0.5 * ((1.0 + x).powi(2) - (1.0 - x).powi(2) * sol.reflection);
    if ((closed - via_fluxes) / closed).abs() > 1e-10 {
        return Err(Error::Consistency(format!(
            "quantum force PSD paths disagree: closed form {closed:e}, flux pipeline {via_fluxes:e}"
        )));
    }
    Ok(closed)
}

/// `S_fL = 4m(2πf₀)k_Bθ/Q`.
pub fn langevin_force_psd(res: &ResonatorSpec) -> Result<f64> {
    res.validate()?;
    Ok(4.0 * res.mass * std::f64::consts::TAU * res.f0 * BOLTZMANN * res.temperature / res.quality)
}

/// Normalised feasibility figure `(1 μA/I₀)(m/10⁻¹⁰ kg)(θ/10 mK)(f₀/10⁵ Hz)(10⁷/Q)`;
/// quantum noise dominates below 1.
pub fn feasibility_lhs(i0: f64, res: &ResonatorSpec) -> Result<f64> {
    check_current(i0)?;
    res.validate()?;
    let n = ResonatorSpec::NOMINAL;
    Ok((NOMINAL_CURRENT / i0)
        * (res.mass / n.mass)
        * (res.temperature / n.temperature)
        * (res.f0 / n.f0)
        * (n.quality / res.quality))
}

/// `√(2eI₀)`, A/√Hz.
pub fn shot_noise_current_psd(i0: f64) -> Result<f64> {
    check_current(i0)?;
    Ok((2.0 * ELEMENTARY_CHARGE * i0).sqrt())
}

/// `R = R₀e^{−2k₀x}`.
pub fn tunnel_resistance(r0: f64, k0: f64, x: f64) -> Result<f64> {
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(Error::domain(
            "R0",
            format!("resistance must be positive, got {r0}"),
        ));
    }
    if !(k0.is_finite() && k0 > 0.0 && x.is_finite()) {
        return Err(Error::domain(
            "k0",
            "decay constant must be positive and x finite",
        ));
    }
    Ok(r0 * (-2.0 * k0 * x).exp())
}

/// Everything the feasibility report prints.
pub fn noise_budget(
    i0: f64,
    energy: Energy,
    spec: &BarrierSpec,
    res: &ResonatorSpec,
) -> Result<NoiseBudget> {
    let s_fq = quantum_force_psd(i0, energy, spec)?;
    let s_fl = langevin_force_psd(res)?;
    Ok(NoiseBudget {
        s_fq,
        s_fl,
        feasibility_lhs: feasibility_lhs(i0, res)?,
        psd_ratio: s_fl / s_fq,
        shot_psd: shot_noise_current_psd(i0)?,
        tunnel_current: i0,
        electron_energy: energy.ev(),
        barrier: *spec,
        resonator: *res,
    })
}
