//! Probability, momentum and momentum² densities and currents, and the
//! fluxes handed to the electrode at `b`.
//!
//! With `ψ` normalised as in [`crate::scattering`]:
//!
//! | quantity | expression |
//! |---|---|
//! | `ρ` | `|ψ|²` |
//! | `J` | `(ħ/m) Im(ψ̄ψ')` |
//! | `ρ_p` | `ħ Im(ψ̄ψ')` |
//! | `J_p` | `(ħ²/2m)(|ψ'|² − Re ψ̄ψ'')` |
//! | `ρ_p²` | `−ħ² Re(ψ̄ψ'')` |
//! | `J_p²` | `(ħ³/2m)[Im(ψ̄'ψ'') − Im(ψ̄ψ''')]` |
//!
//! Across a potential step `ΔV = V(x⁺) − V(x⁻)` the currents jump by
//! `J_p(x⁺) − J_p(x⁻) = −ΔV|ψ|²` and `J_p²(x⁺) − J_p²(x⁻) = −2ΔV ρ_p`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scattering::{BarrierFamily, ScatteringSolution, Side};
use crate::units::{Length, ELECTRON_MASS, HBAR};

/// Densities and currents at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub j: f64,
    pub j_p: f64,
    pub j_p2: f64,
    pub rho: f64,
    pub rho_p: f64,
    pub rho_p2: f64,
    pub x: Length,
    pub side: Side,
}

/// Momentum and momentum² fluxes delivered to the electrode at `b`.
///
/// The `_over_t` fields hold the same fluxes divided by `T`; they stay
/// finite for barriers so opaque that `T` itself underflows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferredFluxes {
    pub j_p_t: f64,
    pub j_p2_t: f64,
    pub j_p_t_over_t: f64,
    pub j_p2_t_over_t: f64,
    pub v2_description: String,
}

/// Relative residuals of the four jump relations linking interior currents
/// at `b⁻`, `a⁺` to the exterior currents at `b⁺`, `a⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpResiduals {
    /// `J_p(b⁻)`
    pub momentum_b: f64,
    /// `J_p²(b⁻)`
    pub momentum2_b: f64,
    /// `J_p(a⁺)`
    pub momentum_a: f64,
    /// `J_p²(a⁺)`
    pub momentum2_a: f64,
}

impl JumpResiduals {
    pub fn max(&self) -> f64 {
        self.momentum_b
            .max(self.momentum2_b)
            .max(self.momentum_a)
            .max(self.momentum2_a)
    }
}

/// All six densities and currents at `x` on the requested side.
pub fn currents_at(sol: &ScatteringSolution, x: Length, side: Side) -> Result<FluxReport> {
    let form = sol.local_form(x.meters(), side)?;
    let m = ELECTRON_MASS;
    let im01 = form.im_form(0, 1);
    Ok(FluxReport {
        j: HBAR / m * im01,
        j_p: HBAR * HBAR / (2.0 * m) * form.momentum_form(),
        j_p2: HBAR.powi(3) / (2.0 * m) * (form.im_form(1, 2) - form.im_form(0, 3)),
        rho: form.re_form(0, 0),
        rho_p: HBAR * im01,
        rho_p2: -HBAR * HBAR * form.re_form(0, 2),
        x,
        side,
    })
}

/// Potential step `V(x⁺) − V(x⁻)` at the two barrier edges.
fn steps(sol: &ScatteringSolution) -> (f64, f64) {
    let (a, b) = (sol.barrier.left_edge(), sol.barrier.right_edge());
    (
        sol.potential_at(a, Side::RightLimit) - sol.potential_at(a, Side::LeftLimit),
        sol.potential_at(b, Side::RightLimit) - sol.potential_at(b, Side::LeftLimit),
    )
}

/// Exterior values at the edges, written per unit `T` where they scale with it.
struct Exterior {
    /// `J_p(b⁺)/T`
    jp_b: f64,
    /// `J_p²(b⁺)/T`
    jp2_b: f64,
    /// `|ψ(b)|²/T`
    rho_b: f64,
    /// `ρ_p(b) / T` (equal on both sides of every point)
    rho_p: f64,
    /// `J_p(a⁻)`
    jp_a: f64,
    /// `J_p²(a⁻)/T`
    jp2_a: f64,
    /// `|ψ(a)|²`
    rho_a: f64,
}

fn exterior(sol: &ScatteringSolution) -> Exterior {
    let (k, kb) = (sol.k.per_meter(), sol.k_bar.per_meter());
    let m = ELECTRON_MASS;
    let a = sol.barrier.left_edge();
    let two_pi = 2.0 * PI;
    // |t|²/T = k/k̄
    let t2_over_t = k / kb;
    let interference = (sol.r * num_complex::Complex64::from_polar(1.0, -2.0 * k * a)).re;
    Exterior {
        jp_b: t2_over_t / two_pi * HBAR * HBAR * kb * kb / m,
        jp2_b: t2_over_t / two_pi * HBAR.powi(3) * kb.powi(3) / m,
        rho_b: t2_over_t / two_pi,
        rho_p: HBAR * k / two_pi,
        jp_a: (1.0 + sol.reflection) / two_pi * HBAR * HBAR * k * k / m,
        // (1 − R) = T by flux conservation
        jp2_a: HBAR.powi(3) * k.powi(3) / (two_pi * m),
        rho_a: (1.0 + sol.reflection + 2.0 * interference) / two_pi,
    }
}

/// Interior one-sided momentum currents from the exterior values, per unit
/// `T` except `J_p(a⁺)` which is returned absolute:
/// `(J_p(b⁻)/T, J_p²(b⁻)/T, J_p(a⁺), J_p²(a⁺)/T)`.
fn interior_from_jumps(sol: &ScatteringSolution) -> (f64, f64, f64, f64) {
    let ext = exterior(sol);
    let (step_a, step_b) = steps(sol);
    (
        ext.jp_b + step_b * ext.rho_b,
        ext.jp2_b + 2.0 * step_b * ext.rho_p,
        ext.jp_a - step_a * ext.rho_a,
        ext.jp2_a - 2.0 * step_a * ext.rho_p,
    )
}

/// Momentum and momentum² fluxes transferred to the electrode at `b`.
///
/// Rectangles attribute the whole step at `b` to the electrode, so the
/// transferred fluxes are the interior values at `b⁻`. The ramp splits the
/// interior slope force evenly between the electrodes, giving the half-sums
/// `½[J(a⁺) + J(b⁻)]`; the interior values come from the jump relations.
pub fn transferred_fluxes(sol: &ScatteringSolution) -> TransferredFluxes {
    let t = sol.transmission;
    if sol.barrier.family != BarrierFamily::LinearField {
        let (k, kb, k0) = (sol.k.per_meter(), sol.k_bar.per_meter(), sol.k0.per_meter());
        let m = ELECTRON_MASS;
        let jp = HBAR * HBAR / (2.0 * m) * (kb * kb - k0 * k0) * (k / kb) / (2.0 * PI);
        let jp2 = -HBAR.powi(3) / m * k0 * k0 * k / (2.0 * PI);
        return TransferredFluxes {
            j_p_t: jp * t,
            j_p2_t: jp2 * t,
            j_p_t_over_t: jp,
            j_p2_t_over_t: jp2,
            v2_description: "V2 = potential step at b only (rectangular barrier)".into(),
        };
    }
    let (jp_b, jp2_b, jp_a, jp2_a) = interior_from_jumps(sol);
    let jp_a_over_t = jp_a * (-sol.ln_transmission).exp();
    let jp_over_t = 0.5 * (jp_a_over_t + jp_b);
    let jp2_over_t = 0.5 * (jp2_a + jp2_b);
    TransferredFluxes {
        j_p_t: 0.5 * (jp_a + jp_b * t),
        j_p2_t: jp2_over_t * t,
        j_p_t_over_t: jp_over_t,
        j_p2_t_over_t: jp2_over_t,
        v2_description: "V2 = V0 - phi/2 left of a, half the ramp slope inside, full step at b"
            .into(),
    }
}

/// Residuals of the jump relations, each relative to the size of the
/// exterior terms entering it. The interior side is evaluated directly from
/// the interior wavefunction.
pub fn jump_residuals(sol: &ScatteringSolution) -> Result<JumpResiduals> {
    let (a, b) = (sol.barrier.left_edge(), sol.barrier.right_edge());
    let (step_a, step_b) = steps(sol);
    let inside_b = currents_at(sol, Length::from_meters(b), Side::LeftLimit)?;
    let inside_a = currents_at(sol, Length::from_meters(a), Side::RightLimit)?;
    let out_b = currents_at(sol, Length::from_meters(b), Side::RightLimit)?;
    let out_a = currents_at(sol, Length::from_meters(a), Side::LeftLimit)?;

    let rel = |lhs: f64, rhs: f64, scale: f64| (lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE);
    Ok(JumpResiduals {
        momentum_b: rel(
            inside_b.j_p,
            out_b.j_p + step_b * out_b.rho,
            out_b.j_p.abs() + (step_b * out_b.rho).abs(),
        ),
        momentum2_b: rel(
            inside_b.j_p2,
            out_b.j_p2 + 2.0 * step_b * out_b.rho_p,
            out_b.j_p2.abs() + (2.0 * step_b * out_b.rho_p).abs(),
        ),
        momentum_a: rel(
            inside_a.j_p,
            out_a.j_p - step_a * out_a.rho,
            out_a.j_p.abs() + (step_a * out_a.rho).abs(),
        ),
        momentum2_a: rel(
            inside_a.j_p2,
            out_a.j_p2 - 2.0 * step_a * out_a.rho_p,
            // left of a the current is a difference of incident and reflected
            // parts; measure against their sum
            (1.0 + sol.reflection) * HBAR.powi(3) * sol.k.per_meter().powi(3)
                / (2.0 * PI * ELECTRON_MASS)
                + (2.0 * step_a * out_a.rho_p).abs(),
        ),
    })
}

/// Transferred fluxes assembled from interior values evaluated directly on
/// the Airy/exponential interior wavefunction instead of the jump relations.
pub fn transferred_fluxes_direct(sol: &ScatteringSolution) -> Result<(f64, f64)> {
    let (a, b) = (sol.barrier.left_edge(), sol.barrier.right_edge());
    let at_b = currents_at(sol, Length::from_meters(b), Side::LeftLimit)?;
    if sol.barrier.family != BarrierFamily::LinearField {
        return Ok((at_b.j_p, at_b.j_p2));
    }
    let at_a = currents_at(sol, Length::from_meters(a), Side::RightLimit)?;
    Ok((0.5 * (at_a.j_p + at_b.j_p), 0.5 * (at_a.j_p2 + at_b.j_p2)))
}

/// Stationary balance residuals at `x`, from Richardson differences:
/// `(dJ_p/dx + V'|ψ|², dJ_p²/dx + 2V'ρ_p)`, each relative to the size of
/// the source term (or of the derivative when the source vanishes).
pub fn balance_residuals(sol: &ScatteringSolution, x: Length) -> Result<(f64, f64)> {
    let xm = x.meters();
    let h = 1e-3 * sol.barrier.gap.meters();
    let slope =
        (sol.potential_at(xm + h, Side::Bulk) - sol.potential_at(xm - h, Side::Bulk)) / (2.0 * h);
    let here = currents_at(sol, x, Side::Bulk)?;
    let jp = |y: f64| {
        currents_at(sol, Length::from_meters(y), Side::Bulk)
            .map(|c| c.j_p)
            .unwrap_or(f64::NAN)
    };
    let jp2 = |y: f64| {
        currents_at(sol, Length::from_meters(y), Side::Bulk)
            .map(|c| c.j_p2)
            .unwrap_or(f64::NAN)
    };
    let d_jp = crate::oracle::finite_diff(jp, xm, h / xm.abs().max(h)).value;
    let d_jp2 = crate::oracle::finite_diff(jp2, xm, h / xm.abs().max(h)).value;
    let src1 = slope * here.rho;
    let src2 = 2.0 * slope * here.rho_p;
    let r1 = (d_jp + src1).abs() / src1.abs().max(d_jp.abs()).max(f64::MIN_POSITIVE);
    let r2 = (d_jp2 + src2).abs() / src2.abs().max(d_jp2.abs()).max(f64::MIN_POSITIVE);
    Ok((r1, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::transferred_fluxes_by_quadrature;
    use crate::scattering::{solve, BarrierSpec};
    use crate::units::Energy;

    fn ev(x: f64) -> Energy {
        Energy::from_ev(x)
    }

    fn nm(x: f64) -> Length {
        Length::from_nm(x)
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn exterior_plane_wave_currents() {
        let sol = solve(ev(1.0), &BarrierSpec::symmetric(ev(5.0), nm(0.5))).unwrap();
        let (k, t) = (sol.k.per_meter(), sol.transmission);
        let m = ELECTRON_MASS;
        let c = currents_at(&sol, nm(3.0), Side::Bulk).unwrap();
        let tp = 2.0 * PI;
        assert!(rel(c.j, HBAR * k / m * t / tp) < 1e-12);
        assert!(rel(c.j_p, HBAR * HBAR * k * k / m * t / tp) < 1e-12);
        assert!(rel(c.j_p2, HBAR.powi(3) * k.powi(3) / m * t / tp) < 1e-12);
        let left = currents_at(&sol, nm(-2.0), Side::Bulk).unwrap();
        let r = sol.reflection;
        assert!(rel(left.j_p, (1.0 + r) * HBAR * HBAR * k * k / m / tp) < 1e-12);
        let expected = (1.0 - r) * HBAR.powi(3) * k.powi(3) / m / tp;
        assert!((left.j_p2 - expected).abs() < 1e-12 * HBAR.powi(3) * k.powi(3) / m);
    }

    #[test]
    fn momentum_squared_current_negative_inside() {
        for spec in [
            BarrierSpec::symmetric(ev(5.0), nm(1.0)),
            BarrierSpec::linear_field(ev(5.0), ev(2.0), nm(1.0)),
        ] {
            let sol = solve(ev(1.0), &spec).unwrap();
            let c = currents_at(&sol, nm(0.5), Side::Bulk).unwrap();
            assert!(c.j_p2 < 0.0);
            assert!(c.j > 0.0);
        }
    }

    #[test]
    fn rectangular_closed_forms() {
        let sol = solve(ev(1.0), &BarrierSpec::symmetric(ev(5.0), nm(0.5))).unwrap();
        let tf = transferred_fluxes(&sol);
        let (k, k0, t) = (sol.k.per_meter(), sol.k0.per_meter(), sol.transmission);
        let m = ELECTRON_MASS;
        let jp = HBAR * HBAR / (2.0 * m) * (k * k - k0 * k0) * t / (2.0 * PI);
        let jp2 = -HBAR.powi(3) / m * k0 * k0 * k * t / (2.0 * PI);
        assert!(rel(tf.j_p_t, jp) < 1e-12 && rel(tf.j_p2_t, jp2) < 1e-12);
        let (djp, djp2) = transferred_fluxes_direct(&sol).unwrap();
        assert!(rel(djp, jp) < 1e-9 && rel(djp2, jp2) < 1e-9);
    }

    #[test]
    fn asymmetric_reduces_to_symmetric() {
        let s =
            transferred_fluxes(&solve(ev(1.0), &BarrierSpec::symmetric(ev(5.0), nm(0.7))).unwrap());
        let a = transferred_fluxes(
            &solve(ev(1.0), &BarrierSpec::asymmetric(ev(5.0), ev(0.0), nm(0.7))).unwrap(),
        );
        assert!(rel(a.j_p_t, s.j_p_t) < 1e-14 && rel(a.j_p2_t, s.j_p2_t) < 1e-14);
    }

    #[test]
    fn ramp_matches_quadrature_and_direct() {
        for (phi, gap) in [(0.5, 1.0), (2.0, 1.0), (4.5, 0.6), (1e-3, 1.5)] {
            let sol = solve(
                ev(1.0),
                &BarrierSpec::linear_field(ev(5.0), ev(phi), nm(gap)),
            )
            .unwrap();
            let tf = transferred_fluxes(&sol);
            let q = transferred_fluxes_by_quadrature(&sol).unwrap();
            assert!(
                rel(q.j_p_t, tf.j_p_t) < 1e-9,
                "phi {phi}: {} vs {}",
                q.j_p_t,
                tf.j_p_t
            );
            assert!(
                rel(q.j_p2_t, tf.j_p2_t) < 1e-9,
                "phi {phi}: {} vs {}",
                q.j_p2_t,
                tf.j_p2_t
            );
            let (djp, djp2) = transferred_fluxes_direct(&sol).unwrap();
            assert!(rel(djp, tf.j_p_t) < 1e-8 && rel(djp2, tf.j_p2_t) < 1e-8);
            // J_p²ᵗ = mJ(2E − 2V₀ + φ)
            let j = currents_at(&sol, nm(gap + 1.0), Side::Bulk).unwrap().j;
            let expected = ELECTRON_MASS * j * Energy::from_ev(2.0 - 10.0 + phi).joules();
            assert!(rel(tf.j_p2_t, expected) < 1e-12);
        }
    }

    #[test]
    fn jump_relations_close_and_detect_errors() {
        for spec in [
            BarrierSpec::linear_field(ev(5.0), ev(1.3), nm(0.9)),
            BarrierSpec::asymmetric(ev(5.0), ev(1.3), nm(0.9)),
            BarrierSpec::linear_field(ev(5.0), ev(1e-12), nm(0.9)),
        ] {
            let sol = solve(ev(1.0), &spec).unwrap();
            let res = jump_residuals(&sol).unwrap();
            assert!(res.max() < 1e-9, "{spec:?}: {res:?}");
            let mut bad = sol.clone();
            bad.t *= 1.01;
            assert!(jump_residuals(&bad).unwrap().max() > 1e-4);
        }
    }

    #[test]
    fn balance_inside_ramp() {
        let sol = solve(
            ev(1.0),
            &BarrierSpec::linear_field(ev(5.0), ev(2.0), nm(1.0)),
        )
        .unwrap();
        for x in [0.2, 0.5, 0.8] {
            let (r1, r2) = balance_residuals(&sol, nm(x)).unwrap();
            assert!(r1 < 1e-6 && r2 < 1e-6, "x = {x}: {r1} {r2}");
        }
    }
}
