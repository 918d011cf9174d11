//! Position uncertainty `Δl`, momentum uncertainty `Δp` and their product.
//!
//! `Δl = √(TR)/|dT/dl|/√N` is the gap change that shifts the mean count of
//! transmitted electrons by one binomial standard deviation, and
//! `(Δp)² = N[−J_p²ᵗ/J_in + (J_pᵗ/J_in)²]` is the variance of the momentum
//! delivered by `N` incident electrons.
//!
//! Both are evaluated per unit `T` internally, so the product stays finite
//! for barriers opaque enough that `T` underflows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluxes::{transferred_fluxes, TransferredFluxes};
use crate::oracle::finite_diff;
use crate::scattering::{solve, BarrierSpec, ScatteringSolution};
use crate::units::{Energy, Length, HBAR};

/// Relative step for numeric gap derivatives.
pub const NUMERIC_REL_STEP: f64 = 1e-3;
/// Tolerance for analytic/numeric agreement.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtDlMethod {
    Analytic,
    Numeric,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyResult {
    pub delta_l: Length,
    /// kg·m/s
    pub delta_p: f64,
    pub product_over_hbar: f64,
    pub n_electrons: f64,
    /// `dT/dl`, m⁻¹
    pub dt_dl: f64,
    pub dt_dl_method: DtDlMethod,
    pub transmission: f64,
    pub reflection: f64,
}

fn check_count(n: f64) -> Result<()> {
    if !(n.is_finite() && n >= 1.0) {
        return Err(Error::domain(
            "N",
            format!("electron count must be at least 1, got {n}"),
        ));
    }
    Ok(())
}

/// `Δl = √(T·R)/|dT/dl|/√N`.
pub fn position_uncertainty(sol: &ScatteringSolution, dt_dl: f64, n: f64) -> Result<Length> {
    check_count(n)?;
    if !(dt_dl.is_finite() && dt_dl != 0.0) {
        return Err(Error::domain(
            "dT/dl",
            format!("first-order position uncertainty needs a finite nonzero dT/dl, got {dt_dl}"),
        ));
    }
    let dl = (sol.transmission * sol.reflection).sqrt() / dt_dl.abs() / n.sqrt();
    Ok(Length::from_meters(dl))
}

/// `d ln T / dl` from Richardson differences of `ln T` in the gap.
fn numeric_dln_t_dl(sol: &ScatteringSolution) -> Result<f64> {
    let spec = sol.barrier;
    let energy = sol.energy;
    let l = spec.gap.meters();
    let failure = std::cell::RefCell::new(None);
    let d = finite_diff(
        |g| match solve(energy, &spec.with_gap(Length::from_meters(g))) {
            Ok(s) => s.ln_transmission,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        l,
        NUMERIC_REL_STEP,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(d.value),
    }
}

fn check_agreement(analytic: f64, numeric: f64) -> Result<()> {
    let diff = (analytic - numeric).abs();
    if !(diff <= DERIVATIVE_TOLERANCE * analytic.abs().max(numeric.abs())) {
        return Err(Error::Consistency(format!(
            "dT/dl disagreement: analytic {analytic:e}, numeric {numeric:e} (per unit T)"
        )));
    }
    Ok(())
}

/// `dT/dl` at fixed `E`, `V₀`, `φ`. `Both` returns the numeric value after
/// checking it against the closed form.
pub fn dt_dl(sol: &ScatteringSolution, method: DtDlMethod) -> Result<f64> {
    let t = sol.transmission;
    match method {
        DtDlMethod::Analytic => Ok(t * sol.dln_t_dl()?),
        DtDlMethod::Numeric => Ok(t * numeric_dln_t_dl(sol)?),
        DtDlMethod::Both => {
            let (a, n) = (sol.dln_t_dl()?, numeric_dln_t_dl(sol)?);
            check_agreement(a, n)?;
            Ok(t * n)
        }
    }
}

/// `[−J_p²ᵗ/J_in + (J_pᵗ/J_in)²]/T`, clamped at zero when a tiny negative
/// value is rounding noise.
fn bracket_over_t(tf: &TransferredFluxes, sol: &ScatteringSolution) -> Result<f64> {
    let j_in = sol.incident_flux;
    let t = sol.transmission;
    let jp = tf.j_p_t_over_t / j_in;
    let bracket = -tf.j_p2_t_over_t / j_in + t * jp * jp;
    if bracket >= 0.0 {
        return Ok(bracket);
    }
    let unit = (HBAR * sol.k.per_meter()).powi(2);
    if bracket * t > -1e-12 * unit {
        Ok(0.0)
    } else if sol.barrier.phi.joules() > 0.0 {
        // −J_p²ᵗ turns negative once the bias pulls part of the barrier below E
        Err(Error::domain(
            "phi",
            format!(
                "transferred fluxes give a negative momentum variance ({:e} (kg·m/s)² per electron); \
                 bias too large for the tunnelling model",
                bracket * t
            ),
        ))
    } else {
        Err(Error::Consistency(format!(
            "negative momentum variance {:e} (kg·m/s)² per electron",
            bracket * t
        )))
    }
}

/// Per-electron momentum variance divided by `T`, in (kg·m/s)².
pub fn momentum_variance_over_t(tf: &TransferredFluxes, sol: &ScatteringSolution) -> Result<f64> {
    bracket_over_t(tf, sol)
}

/// `Δp = √(N[−J_p²ᵗ/J_in + (J_pᵗ/J_in)²])`.
pub fn momentum_uncertainty(
    tf: &TransferredFluxes,
    sol: &ScatteringSolution,
    n: f64,
) -> Result<f64> {
    check_count(n)?;
    Ok((n * sol.transmission * bracket_over_t(tf, sol)?).sqrt())
}

/// Full pipeline: solve, transferred fluxes, `Δl`, `Δp` and `Δl·Δp/ħ`.
///
/// `dT/dl` comes from the closed form and is cross-checked against numeric
/// differences (`dt_dl_method = Both`).
pub fn uncertainty_product(
    energy: Energy,
    spec: &BarrierSpec,
    n: f64,
) -> Result<UncertaintyResult> {
    check_count(n)?;
    let sol = solve(energy, spec)?;
    let dln = sol.dln_t_dl()?;
    check_agreement(dln, numeric_dln_t_dl(&sol)?)?;
    from_solution(&sol, dln, n, DtDlMethod::Both)
}

/// Assemble the result from a solution and a known `d ln T/dl`.
pub fn from_solution(
    sol: &ScatteringSolution,
    dln_t_dl: f64,
    n: f64,
    method: DtDlMethod,
) -> Result<UncertaintyResult> {
    check_count(n)?;
    if !(dln_t_dl.is_finite() && dln_t_dl != 0.0) {
        return Err(Error::domain(
            "dT/dl",
            "first-order position uncertainty needs dT/dl ≠ 0",
        ));
    }
    let tf = transferred_fluxes(sol);
    let bracket = bracket_over_t(&tf, sol)?;
    let r = sol.reflection;
    let product = (r * bracket).sqrt() / dln_t_dl.abs() / HBAR;
    let delta_l = r.sqrt() * (-0.5 * sol.ln_transmission).exp() / dln_t_dl.abs() / n.sqrt();
    let delta_p = (n * sol.transmission * bracket).sqrt();
    if !(delta_l.is_finite() && product.is_finite()) {
        return Err(Error::Range {
            reason: "barrier too opaque: position uncertainty overflows".into(),
            scale: sol.ln_transmission,
        });
    }
    Ok(UncertaintyResult {
        delta_l: Length::from_meters(delta_l),
        delta_p,
        product_over_hbar: product,
        n_electrons: n,
        dt_dl: sol.transmission * dln_t_dl,
        dt_dl_method: method,
        transmission: sol.transmission,
        reflection: r,
    })
}

/// Rescale a per-electron result to `n` electrons (`Δl ∝ N^{−1/2}`, `Δp ∝ N^{1/2}`).
pub fn scale_to(result: &UncertaintyResult, n: f64) -> Result<UncertaintyResult> {
    check_count(n)?;
    let f = (n / result.n_electrons).sqrt();
    Ok(UncertaintyResult {
        delta_l: Length::from_meters(result.delta_l.meters() / f),
        delta_p: result.delta_p * f,
        n_electrons: n,
        ..result.clone()
    })
}
