//! Stationary scattering through the three barrier families.
//!
//! Normalisation: the incident wave is `e^{ikx}/√(2π)`, so the incident
//! probability flux is `ħk/(2πm)`.
//!
//! Interior amplitudes are stored against basis functions normalised at the
//! barrier edges (`e^{k₀(x−b)}`, `e^{−k₀(x−a)}` for rectangles, and Airy
//! functions scaled by `e^{∓(ζ−ζ_edge)}` for the ramp). None of these
//! overflow, so opaque barriers are handled without special cases; only the
//! transmitted amplitude itself can underflow, and its logarithm is kept in
//! [`ScatteringSolution::ln_transmission`].

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::airy::{airy_scaled_any, zeta_difference_exact, ScaledAiry};
use crate::error::{Error, Result};
use crate::units::{wavenumber_of, Energy, Length, Wavenumber, TWO_M_OVER_HBAR2};

/// Below this bias (in eV) the linear ramp is solved as a rectangle; the Airy
/// variables are singular at zero field.
pub const PHI_MIN_EV: f64 = 1e-9;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierFamily {
    SymmetricRect,
    AsymmetricRect,
    LinearField,
}

impl BarrierFamily {
    pub fn label(self) -> &'static str {
        match self {
            BarrierFamily::SymmetricRect => "sym",
            BarrierFamily::AsymmetricRect => "asym",
            BarrierFamily::LinearField => "field",
        }
    }
}

/// Barrier geometry and energies.
///
/// * `SymmetricRect`: `V = V₀` on `[a, b)`, zero elsewhere.
/// * `AsymmetricRect`: `V = V₀` on `[a, b)`, zero left of `a`, `−φ` right of `b`.
/// * `LinearField`: `V = V₀ − φ(x−a)/(b−a)` on `[a, b)`, zero left, `−φ` right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub family: BarrierFamily,
    pub v0: Energy,
    pub phi: Energy,
    pub gap: Length,
    pub a: Length,
}

impl BarrierSpec {
    pub fn symmetric(v0: Energy, gap: Length) -> Self {
        BarrierSpec {
            family: BarrierFamily::SymmetricRect,
            v0,
            phi: Energy::ZERO,
            gap,
            a: Length::ZERO,
        }
    }

    pub fn asymmetric(v0: Energy, phi: Energy, gap: Length) -> Self {
        BarrierSpec {
            family: BarrierFamily::AsymmetricRect,
            phi,
            ..BarrierSpec::symmetric(v0, gap)
        }
    }

    pub fn linear_field(v0: Energy, phi: Energy, gap: Length) -> Self {
        BarrierSpec {
            family: BarrierFamily::LinearField,
            phi,
            ..BarrierSpec::symmetric(v0, gap)
        }
    }

    /// Same barrier with its left edge moved to `a`.
    pub fn with_left_edge(mut self, a: Length) -> Self {
        self.a = a;
        self
    }

    pub fn with_gap(mut self, gap: Length) -> Self {
        self.gap = gap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (v0, phi, gap, a) = (
            self.v0.joules(),
            self.phi.joules(),
            self.gap.meters(),
            self.a.meters(),
        );
        if !(v0.is_finite() && v0 > 0.0) {
            return Err(Error::domain(
                "V0",
                format!("barrier height must be positive, got {} eV", self.v0.ev()),
            ));
        }
        if !(gap.is_finite() && gap > 0.0) {
            return Err(Error::domain(
                "gap",
                format!("gap must be positive, got {} nm", self.gap.nm()),
            ));
        }
        if !(phi.is_finite() && phi >= 0.0) {
            return Err(Error::domain(
                "phi",
                format!("phi must be non-negative, got {} eV", self.phi.ev()),
            ));
        }
        if !a.is_finite() {
            return Err(Error::domain("a", "left edge must be finite"));
        }
        Ok(())
    }

    pub fn left_edge(&self) -> f64 {
        self.a.meters()
    }

    pub fn right_edge(&self) -> f64 {
        self.a.meters() + self.gap.meters()
    }

    /// Potential level right of the barrier, in joules.
    pub fn right_level(&self) -> f64 {
        match self.family {
            BarrierFamily::SymmetricRect => 0.0,
            _ => -self.phi.joules(),
        }
    }

    /// `V(x)` in joules, with `V(a) = V(a⁺)` and `V(b) = V(b⁺)`.
    pub fn potential(&self, x: f64) -> f64 {
        let (a, b) = (self.left_edge(), self.right_edge());
        if x < a {
            0.0
        } else if x < b {
            match self.family {
                BarrierFamily::LinearField => {
                    self.v0.joules() - self.phi.joules() * (x - a) / self.gap.meters()
                }
                _ => self.v0.joules(),
            }
        } else {
            self.right_level()
        }
    }

    /// One-sided potential at `x` (the two sides differ only at `a` and `b`).
    pub fn potential_sided(&self, x: f64, side: Side) -> f64 {
        match side {
            Side::LeftLimit => {
                let (a, b) = (self.left_edge(), self.right_edge());
                if x <= a {
                    0.0
                } else if x <= b {
                    match self.family {
                        BarrierFamily::LinearField => {
                            self.v0.joules() - self.phi.joules() * (x - a) / self.gap.meters()
                        }
                        _ => self.v0.joules(),
                    }
                } else {
                    self.right_level()
                }
            }
            Side::RightLimit | Side::Bulk => self.potential(x),
        }
    }

    /// Whether the ramp is steep enough to be solved with Airy functions.
    pub fn uses_airy(&self) -> bool {
        self.family == BarrierFamily::LinearField && self.phi.ev() > PHI_MIN_EV
    }
}

/// Which one-sided limit to take when `x` sits on a region boundary.
///
/// `Bulk` places `x = a` inside the barrier and `x = b` in the right region,
/// the same convention as [`BarrierSpec::potential`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    LeftLimit,
    RightLimit,
    Bulk,
}

/// `ψ` and its first three derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavefunctionSample {
    pub x: Length,
    pub psi: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d3: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum Interior {
    /// `ψ√(2π) = p·e^{k₀(x−b)} + m·e^{−k₀(x−a)}`
    Exponential { p: Complex64, m: Complex64 },
    /// `ψ√(2π) = p·Ãi(z)e^{−(ζ(z)−ζ(b̄))} + m·B̃i(z)e^{−(ζ(ā)−ζ(z))}`, `z = s(β−x)`
    Airy {
        p: Complex64,
        m: Complex64,
        s: f64,
        a_bar: f64,
        b_bar: f64,
    },
}

/// Real basis functions with derivatives `[f, f', f'', f''']` and complex
/// coefficients; `ψ = c₀f₀ + c₁f₁` in one region.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalForm {
    pub c: [Complex64; 2],
    pub f: [[f64; 4]; 2],
    /// `f_i' f_j' − f_i f_j''` when known in closed form (cancellation-free).
    pub momentum_kernel: Option<[[f64; 2]; 2]>,
}

impl LocalForm {
    pub fn derivative(&self, order: usize) -> Complex64 {
        self.c[0] * self.f[0][order] + self.c[1] * self.f[1][order]
    }

    /// `Re Σ c̄_i c_j f_i^{(p)} f_j^{(q)}`
    pub fn re_form(&self, p: usize, q: usize) -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                acc += (self.c[i].conj() * self.c[j]).re * self.f[i][p] * self.f[j][q];
            }
        }
        acc
    }

    /// `Im Σ c̄_i c_j f_i^{(p)} f_j^{(q)}`; only the cross terms contribute.
    pub fn im_form(&self, p: usize, q: usize) -> f64 {
        let cross = (self.c[0].conj() * self.c[1]).im;
        cross * (self.f[0][p] * self.f[1][q] - self.f[1][p] * self.f[0][q])
    }

    /// `|ψ'|² − Re(ψ̄ψ'')`
    pub fn momentum_form(&self) -> f64 {
        match self.momentum_kernel {
            Some(g) => {
                let c = &self.c;
                (0..2)
                    .flat_map(|i| (0..2).map(move |j| (c[i].conj() * c[j]).re * g[i][j]))
                    .sum()
            }
            None => self.re_form(1, 1) - self.re_form(0, 2),
        }
    }
}

/// Stationary scattering state for one barrier and one incident energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSolution {
    /// Transmission amplitude `t` (may underflow for opaque barriers).
    pub t: Complex64,
    /// Reflection amplitude `r`.
    pub r: Complex64,
    /// Interior coefficient of the growing branch in the textbook basis
    /// (`e^{k₀x}` or `Ai`); may over/underflow for very thick barriers.
    pub c_plus: Complex64,
    /// Interior coefficient of the decaying branch (`e^{−k₀x}` or `Bi`).
    pub c_minus: Complex64,
    pub transmission: f64,
    pub reflection: f64,
    /// `ln T`, finite even where `T` underflows.
    pub ln_transmission: f64,
    pub k: Wavenumber,
    pub k_bar: Wavenumber,
    /// Evanescent wavenumber at the left edge of the barrier.
    pub k0: Wavenumber,
    /// `J_in = ħk/(2πm)`.
    pub incident_flux: f64,
    pub barrier: BarrierSpec,
    pub energy: Energy,
    interior: Interior,
}

/// Solve for any barrier family.
pub fn solve(energy: Energy, spec: &BarrierSpec) -> Result<ScatteringSolution> {
    match spec.family {
        BarrierFamily::SymmetricRect => solve_symmetric(energy, spec),
        BarrierFamily::AsymmetricRect => solve_asymmetric(energy, spec),
        BarrierFamily::LinearField => solve_linear_field(energy, spec),
    }
}

fn check_energy(energy: Energy, spec: &BarrierSpec) -> Result<()> {
    spec.validate()?;
    let e = energy.joules();
    if !(e.is_finite() && e > 0.0) {
        return Err(Error::domain(
            "E",
            format!("electron energy must be positive, got {} eV", energy.ev()),
        ));
    }
    if e >= spec.v0.joules() {
        return Err(Error::domain(
            "E",
            format!(
                "above-barrier transport is not modelled (E = {} eV, V0 = {} eV)",
                energy.ev(),
                spec.v0.ev()
            ),
        ));
    }
    Ok(())
}

fn wrong_family(expected: BarrierFamily, spec: &BarrierSpec) -> Error {
    Error::domain(
        "barrier",
        format!("expected a {:?} barrier, got {:?}", expected, spec.family),
    )
}

/// Symmetric rectangle: closed-form amplitudes.
pub fn solve_symmetric(energy: Energy, spec: &BarrierSpec) -> Result<ScatteringSolution> {
    if spec.family != BarrierFamily::SymmetricRect {
        return Err(wrong_family(BarrierFamily::SymmetricRect, spec));
    }
    check_energy(energy, spec)?;
    Ok(rectangular(energy, spec, 0.0))
}

/// Asymmetric rectangle (right electrode lowered by `φ`): closed-form amplitudes.
pub fn solve_asymmetric(energy: Energy, spec: &BarrierSpec) -> Result<ScatteringSolution> {
    if spec.family != BarrierFamily::AsymmetricRect {
        return Err(wrong_family(BarrierFamily::AsymmetricRect, spec));
    }
    check_energy(energy, spec)?;
    Ok(rectangular(energy, spec, spec.phi.joules()))
}

/// Linear ramp: Airy-function interior, amplitudes from the 4×4 matching system.
pub fn solve_linear_field(energy: Energy, spec: &BarrierSpec) -> Result<ScatteringSolution> {
    if spec.family != BarrierFamily::LinearField {
        return Err(wrong_family(BarrierFamily::LinearField, spec));
    }
    check_energy(energy, spec)?;
    if !spec.uses_airy() {
        return Ok(rectangular(energy, spec, spec.phi.joules()));
    }
    airy_ramp(energy, spec)
}

/// Common wavenumbers: `(k, k̄, k₀)`.
fn wavenumbers(energy: Energy, spec: &BarrierSpec, drop: f64) -> (f64, f64, f64) {
    let e = energy.joules();
    (
        wavenumber_of(e),
        wavenumber_of(e + drop),
        wavenumber_of(spec.v0.joules() - e),
    )
}

/// Closed-form rectangle with the right level at `−drop`.
fn rectangular(energy: Energy, spec: &BarrierSpec, drop: f64) -> ScatteringSolution {
    let (k, kb, k0) = wavenumbers(energy, spec, drop);
    let (a, b) = (spec.left_edge(), spec.right_edge());
    let kl = k0 * spec.gap.meters();
    let eps = (-kl).exp();
    let eps2 = eps * eps;

    let ck = Complex64::new(k0, k);
    let ckb = Complex64::new(k0, kb);
    // den = ε²(k₀+ik̄)(k₀+ik) + (k₀−ik̄)(ik−k₀)
    let den = eps2 * ckb * ck + ckb.conj() * Complex64::new(-k0, k);
    let phase_a = Complex64::from_polar(1.0, k * a);
    let phase_b = Complex64::from_polar(1.0, kb * b);

    // u = t·e^{ik̄b}
    let u = 4.0 * I * k * k0 * phase_a * eps / den;
    let p = u * ckb / (2.0 * k0);
    let m = 2.0 * I * k * phase_a * ckb.conj() / den;
    let r = phase_a * (p * eps * Complex64::new(-k0, k) + m * ck) / (2.0 * I * k);
    let t = u * phase_b.conj();

    let ln_t = (kb / k).ln() + 2.0 * ((4.0 * k * k0).ln() - kl - den.norm().ln());
    let transmission = ln_t.exp();
    // |r|² may round a few ulps above 1 for opaque barriers
    let reflection = r.norm_sqr().min(1.0);

    let sqrt_2pi = (2.0 * PI).sqrt();
    let (p, m) = (p / sqrt_2pi, m / sqrt_2pi);
    ScatteringSolution {
        t,
        r,
        c_plus: p * (-k0 * b).exp(),
        c_minus: m * (k0 * a).exp(),
        transmission,
        reflection,
        ln_transmission: ln_t,
        k: Wavenumber::from_per_meter(k),
        k_bar: Wavenumber::from_per_meter(kb),
        k0: Wavenumber::from_per_meter(k0),
        incident_flux: incident_flux(k),
        barrier: *spec,
        energy,
        interior: Interior::Exponential { p, m },
    }
}

pub(crate) fn incident_flux(k: f64) -> f64 {
    crate::units::HBAR * k / (2.0 * PI * crate::units::ELECTRON_MASS)
}

/// Airy-variable geometry of a ramp: `(s = α^{1/3}, ā, b̄)`.
fn ramp_geometry(energy: Energy, spec: &BarrierSpec) -> (f64, f64, f64) {
    let l = spec.gap.meters();
    let phi = spec.phi.joules();
    let s = (TWO_M_OVER_HBAR2 * phi / l).cbrt();
    let depth = spec.v0.joules() - energy.joules();
    let a_bar = s * l * depth / phi;
    let b_bar = s * l * (depth - phi) / phi;
    (s, a_bar, b_bar)
}

struct RampAiry {
    s: f64,
    a_bar: f64,
    b_bar: f64,
    at_a: ScaledAiry,
    at_b: ScaledAiry,
    /// ζ(ā) − ζ(b̄) ≥ 0
    delta_zeta: f64,
}

fn ramp_airy(energy: Energy, spec: &BarrierSpec) -> Result<RampAiry> {
    let (s, a_bar, b_bar) = ramp_geometry(energy, spec);
    Ok(RampAiry {
        s,
        a_bar,
        b_bar,
        at_a: airy_scaled_any(a_bar)?,
        at_b: airy_scaled_any(b_bar)?,
        delta_zeta: zeta_difference_exact(a_bar, b_bar, s * spec.gap.meters()),
    })
}

fn airy_ramp(energy: Energy, spec: &BarrierSpec) -> Result<ScatteringSolution> {
    let (k, kb, k0) = wavenumbers(energy, spec, spec.phi.joules());
    let (a, b) = (spec.left_edge(), spec.right_edge());
    let ramp = ramp_airy(energy, spec)?;
    let (s, qa, qb) = (ramp.s, ramp.at_a.scaled, ramp.at_b.scaled);
    let e2 = (-2.0 * ramp.delta_zeta).exp();
    let pa = Complex64::from_polar(1.0, k * a);
    let pb = Complex64::from_polar(1.0, kb * b);
    let z = Complex64::new(0.0, 0.0);
    let re = |x: f64| Complex64::new(x, 0.0);

    // Unknowns (r, p̃, m, t̃) with p = p̃e^{−Δζ}, t = t̃e^{−Δζ}. Derivative rows
    // are divided by k (resp. k̄) so every entry is O(1).
    let matrix = Matrix4::new(
        -pa.conj(),
        re(e2 * qa.ai),
        re(qa.bi),
        z,
        I * pa.conj(),
        re(-s / k * e2 * qa.ai_prime),
        re(-s / k * qa.bi_prime),
        z,
        z,
        re(qb.ai),
        re(qb.bi),
        -pb,
        z,
        re(-s / kb * qb.ai_prime),
        re(-s / kb * qb.bi_prime),
        -I * pb,
    );
    let rhs = Vector4::new(pa, I * pa, z, z);
    let x = matrix.lu().solve(&rhs).ok_or_else(|| {
        Error::Consistency("singular matching system for the linear-field barrier".into())
    })?;
    let (r, p_t, m, t_t) = (x[0], x[1], x[2], x[3]);

    let decay = (-ramp.delta_zeta).exp();
    let ln_t = (kb / k).ln() + 2.0 * t_t.norm().ln() - 2.0 * ramp.delta_zeta;
    let sqrt_2pi = (2.0 * PI).sqrt();
    let p = p_t * decay / sqrt_2pi;
    let m = m / sqrt_2pi;
    let (zeta_a, zeta_b) = (ramp.at_a.zeta, ramp.at_b.zeta);

    Ok(ScatteringSolution {
        t: t_t * decay,
        r,
        c_plus: p * zeta_b.exp(),
        c_minus: m * (-zeta_a).exp(),
        transmission: ln_t.exp(),
        reflection: r.norm_sqr().min(1.0),
        ln_transmission: ln_t,
        k: Wavenumber::from_per_meter(k),
        k_bar: Wavenumber::from_per_meter(kb),
        k0: Wavenumber::from_per_meter(k0),
        incident_flux: incident_flux(k),
        barrier: *spec,
        energy,
        interior: Interior::Airy {
            p,
            m,
            s,
            a_bar: ramp.a_bar,
            b_bar: ramp.b_bar,
        },
    })
}

fn cos_sin_form(c: [Complex64; 2], k: f64, dx: f64) -> LocalForm {
    let (sn, cs) = (k * dx).sin_cos();
    let k2 = k * k;
    LocalForm {
        c,
        f: [
            [cs, -k * sn, -k2 * cs, k2 * k * sn],
            [sn, k * cs, -k2 * sn, -k2 * k * cs],
        ],
        momentum_kernel: Some([[k2, 0.0], [0.0, k2]]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Region {
    Left,
    Interior,
    Right,
}

impl ScatteringSolution {
    pub(crate) fn region_of(&self, x: f64, side: Side) -> Region {
        let (a, b) = (self.barrier.left_edge(), self.barrier.right_edge());
        match side {
            Side::LeftLimit if x <= a => Region::Left,
            Side::LeftLimit if x <= b => Region::Interior,
            Side::LeftLimit => Region::Right,
            _ if x < a => Region::Left,
            _ if x < b => Region::Interior,
            _ => Region::Right,
        }
    }

    /// Potential seen by `ψ` at `x` on the requested side, in joules.
    pub fn potential_at(&self, x: f64, side: Side) -> f64 {
        match self.region_of(x, side) {
            Region::Left => 0.0,
            Region::Right => self.barrier.right_level(),
            Region::Interior => match self.interior {
                Interior::Exponential { .. } => self.barrier.v0.joules(),
                Interior::Airy { .. } => {
                    let a = self.barrier.left_edge();
                    self.barrier.v0.joules()
                        - self.barrier.phi.joules() * (x - a) / self.barrier.gap.meters()
                }
            },
        }
    }

    /// `ψ` at `x` (metres) written in a real two-function basis.
    pub(crate) fn local_form(&self, x: f64, side: Side) -> Result<LocalForm> {
        let (a, b) = (self.barrier.left_edge(), self.barrier.right_edge());
        let norm = (2.0 * PI).sqrt();
        let (k, kb) = (self.k.per_meter(), self.k_bar.per_meter());
        match self.region_of(x, side) {
            Region::Left => {
                let inc = Complex64::from_polar(1.0 / norm, k * a);
                let refl = self.r * Complex64::from_polar(1.0 / norm, -k * a);
                Ok(cos_sin_form([inc + refl, I * (inc - refl)], k, x - a))
            }
            Region::Right => {
                let u = self.t * Complex64::from_polar(1.0 / norm, kb * b);
                Ok(cos_sin_form([u, I * u], kb, x - b))
            }
            Region::Interior => match self.interior {
                Interior::Exponential { p, m } => {
                    let k0 = self.k0.per_meter();
                    let g = (k0 * (x - b)).exp();
                    let h = (-k0 * (x - a)).exp();
                    let k02 = k0 * k0;
                    let cross = -2.0 * k02 * g * h;
                    Ok(LocalForm {
                        c: [p, m],
                        f: [
                            [g, k0 * g, k02 * g, k02 * k0 * g],
                            [h, -k0 * h, k02 * h, -k02 * k0 * h],
                        ],
                        momentum_kernel: Some([[0.0, cross], [cross, 0.0]]),
                    })
                }
                Interior::Airy {
                    p,
                    m,
                    s,
                    a_bar,
                    b_bar,
                } => {
                    let z = if x - a <= b - x {
                        a_bar - s * (x - a)
                    } else {
                        b_bar + s * (b - x)
                    };
                    let q = airy_scaled_any(z)?;
                    let wa = (-zeta_difference_exact(z, b_bar, s * (b - x))).exp();
                    let wb = (-zeta_difference_exact(a_bar, z, s * (x - a))).exp();
                    let column = |v: f64, dv: f64| {
                        let d1 = -s * dv;
                        let d2 = s * s * z * v;
                        let d3 = s * s * (-s * v + z * d1);
                        [v, d1, d2, d3]
                    };
                    Ok(LocalForm {
                        c: [p, m],
                        f: [
                            column(q.scaled.ai * wa, q.scaled.ai_prime * wa),
                            column(q.scaled.bi * wb, q.scaled.bi_prime * wb),
                        ],
                        momentum_kernel: None,
                    })
                }
            },
        }
    }

    /// `ψ, ψ', ψ'', ψ'''` at `x`.
    pub fn eval_wavefunction(&self, x: Length, side: Side) -> Result<WavefunctionSample> {
        let xm = x.meters();
        if !xm.is_finite() {
            return Err(Error::domain("x", "evaluation point must be finite"));
        }
        let form = self.local_form(xm, side)?;
        Ok(WavefunctionSample {
            x,
            psi: form.derivative(0),
            d1: form.derivative(1),
            d2: form.derivative(2),
            d3: form.derivative(3),
        })
    }

    /// Relative mismatch of `ψ` and `ψ'` across `a` and `b`:
    /// `[ψ(a), ψ'(a), ψ(b), ψ'(b)]`.
    pub fn matching_residuals(&self) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        let edges = [
            (self.barrier.left_edge(), self.k.per_meter()),
            (self.barrier.right_edge(), self.k_bar.per_meter()),
        ];
        for (i, (x, k)) in edges.into_iter().enumerate() {
            let lo = self.local_form(x, Side::LeftLimit)?;
            let hi = self.local_form(x, Side::RightLimit)?;
            let outer = if i == 0 { &lo } else { &hi };
            let scale = (outer.derivative(0).norm() + outer.derivative(1).norm() / k)
                .max(f64::MIN_POSITIVE);
            out[2 * i] = (lo.derivative(0) - hi.derivative(0)).norm() / scale;
            out[2 * i + 1] = (lo.derivative(1) - hi.derivative(1)).norm() / (k * scale);
        }
        Ok(out)
    }

    /// `ln T` from a textbook closed form, independent of the amplitude solve.
    ///
    /// Rectangles use `T = 4kk̄k₀² / [k₀²(k+k̄)² + (k₀²+k²)(k₀²+k̄²)sinh²(k₀l)]`;
    /// the ramp uses the Airy-determinant expression for `t`.
    pub fn closed_form_ln_transmission(&self) -> Result<f64> {
        let (k, kb, k0) = (
            self.k.per_meter(),
            self.k_bar.per_meter(),
            self.k0.per_meter(),
        );
        if let Interior::Airy { .. } = self.interior {
            let (t_scaled, delta_zeta) = self.airy_determinant_amplitude()?;
            return Ok((kb / k).ln() + 2.0 * t_scaled.norm().ln() - 2.0 * delta_zeta);
        }
        let y = k0 * self.barrier.gap.meters();
        let em = (-2.0 * y).exp();
        // sinh²(y) = e^{2y}(1 − e^{−2y})²/4
        let bracket = k0 * k0 * (k + kb).powi(2) * em
            + (k0 * k0 + k * k) * (k0 * k0 + kb * kb) * (1.0 - em).powi(2) / 4.0;
        Ok((4.0 * k * kb * k0 * k0).ln() - 2.0 * y - bracket.ln())
    }

    /// `t̃ = t·e^{Δζ}` from the 2×2 Airy determinant, and `Δζ = ζ(ā) − ζ(b̄)`.
    fn airy_determinant_amplitude(&self) -> Result<(Complex64, f64)> {
        let (k, kb) = (self.k.per_meter(), self.k_bar.per_meter());
        let (a, b) = (self.barrier.left_edge(), self.barrier.right_edge());
        let ramp = ramp_airy(self.energy, &self.barrier)?;
        let d = RampDeterminant::new(&ramp, k, kb);
        let phase = Complex64::from_polar(1.0, k * a - kb * b);
        let t = -2.0 * I * k * ramp.s / PI * phase / d.value;
        Ok((t, ramp.delta_zeta))
    }

    /// Closed-form `d ln T / dl` at fixed `a`, `V₀`, `φ` and `E`.
    pub fn dln_t_dl(&self) -> Result<f64> {
        let (k, kb, k0) = (
            self.k.per_meter(),
            self.k_bar.per_meter(),
            self.k0.per_meter(),
        );
        let l = self.barrier.gap.meters();
        match self.interior {
            Interior::Exponential { .. } => {
                let eps2 = (-2.0 * k0 * l).exp();
                let ck = Complex64::new(k0, k);
                let ckb = Complex64::new(k0, kb);
                let grow = eps2 * ckb * ck;
                let den = grow + ckb.conj() * Complex64::new(-k0, k);
                Ok(-2.0 * k0 + 4.0 * k0 * (grow / den).re)
            }
            Interior::Airy { .. } => {
                let ramp = ramp_airy(self.energy, &self.barrier)?;
                let d = RampDeterminant::new(&ramp, k, kb);
                let da = 2.0 * ramp.a_bar / (3.0 * l);
                let db = 2.0 * ramp.b_bar / (3.0 * l);
                let ds = -ramp.s / (3.0 * l);
                let deriv = d.derivative(&ramp, k, kb, da, db, ds);
                Ok(-2.0 / (3.0 * l) - 2.0 * (deriv / d.value).re)
            }
        }
    }

    /// `dT/dl` from [`Self::dln_t_dl`].
    pub fn dt_dl_analytic(&self) -> Result<f64> {
        Ok(self.transmission * self.dln_t_dl()?)
    }

    pub fn uses_airy(&self) -> bool {
        matches!(self.interior, Interior::Airy { .. })
    }
}

/// `D̃ = e^{−2Δζ}F̃(ā)G̃(b̄) − H̃(ā)K̃(b̄)` with
/// `F = sAi'(ā) − ikAi(ā)`, `G = sBi'(b̄) + ik̄Bi(b̄)`,
/// `H = sBi'(ā) − ikBi(ā)`, `K = sAi'(b̄) + ik̄Ai(b̄)`, all in scaled values.
struct RampDeterminant {
    value: Complex64,
    f: Complex64,
    g: Complex64,
    h: Complex64,
    kk: Complex64,
    e2: f64,
}

impl RampDeterminant {
    fn new(ramp: &RampAiry, k: f64, kb: f64) -> Self {
        let (s, qa, qb) = (ramp.s, ramp.at_a.scaled, ramp.at_b.scaled);
        let f = Complex64::new(s * qa.ai_prime, -k * qa.ai);
        let g = Complex64::new(s * qb.bi_prime, kb * qb.bi);
        let h = Complex64::new(s * qa.bi_prime, -k * qa.bi);
        let kk = Complex64::new(s * qb.ai_prime, kb * qb.ai);
        let e2 = (-2.0 * ramp.delta_zeta).exp();
        RampDeterminant {
            value: e2 * f * g - h * kk,
            f,
            g,
            h,
            kk,
            e2,
        }
    }

    /// `dD̃/dl` given `dā/dl`, `db̄/dl`, `ds/dl`; uses `Ai'' = zAi`.
    fn derivative(&self, ramp: &RampAiry, k: f64, kb: f64, da: f64, db: f64, ds: f64) -> Complex64 {
        let (s, qa, qb) = (ramp.s, ramp.at_a.scaled, ramp.at_b.scaled);
        let (za, zb) = (ramp.a_bar, ramp.b_bar);
        let df = Complex64::new(s * za * qa.ai, -k * qa.ai_prime) * da + qa.ai_prime * ds;
        let dg = Complex64::new(s * zb * qb.bi, kb * qb.bi_prime) * db + qb.bi_prime * ds;
        let dh = Complex64::new(s * za * qa.bi, -k * qa.bi_prime) * da + qa.bi_prime * ds;
        let dk = Complex64::new(s * zb * qb.ai, kb * qb.ai_prime) * db + qb.ai_prime * ds;
        self.e2 * (df * self.g + self.f * dg) - (dh * self.kk + self.h * dk)
    }
}
