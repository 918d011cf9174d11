use std::f64::consts::PI;

use super::quad::integrate;
use crate::airy::{zeta, AiryQuad};

const TOL: f64 = 1e-14;
/// Integrands are cut where they fall below `e^{−CUT}` of their peak.
const CUT: f64 = 45.0;

fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    integrate(&f, a, b, TOL, 0.0).value
}

/// Smallest `t` with `g(t) ≥ CUT`, for increasing `g`, by bisection.
fn cutoff<G: Fn(f64) -> f64>(g: G) -> f64 {
    let mut hi = 1.0;
    while g(hi) < CUT {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < CUT {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `K_ν(ζ)e^{ζ} = ∫₀^∞ e^{−ζ(cosh t − 1)} cosh νt dt`
fn k_scaled(nu: f64, z: f64) -> f64 {
    let end = cutoff(|t| z * (t.cosh() - 1.0) - nu.abs() * t);
    quad(
        |t| (-z * (t.cosh() - 1.0)).exp() * (nu * t).cosh(),
        0.0,
        end,
    )
}

/// `I_ν(ζ)e^{−ζ}`
fn i_scaled(nu: f64, z: f64) -> f64 {
    let first = quad(|th| (z * (th.cos() - 1.0)).exp() * (nu * th).cos(), 0.0, PI) / PI;
    let sin = (nu * PI).sin();
    let end = cutoff(|t| z * (t.cosh() + 1.0) + nu * t);
    let second = quad(|t| (-z * (t.cosh() + 1.0) - nu * t).exp(), 0.0, end);
    first - sin / PI * second
}

/// `J_ν(ζ)`
fn j(nu: f64, z: f64) -> f64 {
    let first = quad(|th| (nu * th - z * th.sin()).cos(), 0.0, PI) / PI;
    let sin = (nu * PI).sin();
    let end = cutoff(|t| z * t.sinh() + nu * t);
    let second = quad(|t| (-z * t.sinh() - nu * t).exp(), 0.0, end);
    first - sin / PI * second
}

/// `Ai(0)`, `Ai'(0)`, `Bi(0)`, `Bi'(0)` from `Γ(1/3)`, `Γ(2/3)`.
fn origin() -> AiryQuad {
    let g13 = 2.678_938_534_707_747_6;
    let g23 = 1.354_117_939_426_400_4;
    let ai = 1.0 / (3f64.powf(2.0 / 3.0) * g23);
    let aip = -1.0 / (3f64.powf(1.0 / 3.0) * g13);
    AiryQuad {
        ai,
        ai_prime: aip,
        bi: ai * 3f64.sqrt(),
        bi_prime: -aip * 3f64.sqrt(),
        argument: 0.0,
    }
}

/// Scaled Airy values (`Ai·e^{ζ}`, `Ai'·e^{ζ}`, `Bi·e^{−ζ}`, `Bi'·e^{−ζ}`)
/// for `z > 0` from modified-Bessel integrals; plain values for `z ≤ 0`
/// from ordinary-Bessel integrals.
pub fn airy_scaled_by_quadrature(z: f64) -> AiryQuad {
    if z == 0.0 {
        return origin();
    }
    let x = z.abs();
    let zt = zeta(x);
    let r3 = 3f64.sqrt();
    if z > 0.0 {
        AiryQuad {
            ai: (x / 3.0).sqrt() / PI * k_scaled(1.0 / 3.0, zt),
            ai_prime: -x / (PI * r3) * k_scaled(2.0 / 3.0, zt),
            bi: (x / 3.0).sqrt() * (i_scaled(-1.0 / 3.0, zt) + i_scaled(1.0 / 3.0, zt)),
            bi_prime: x / r3 * (i_scaled(-2.0 / 3.0, zt) + i_scaled(2.0 / 3.0, zt)),
            argument: z,
        }
    } else {
        let (jp13, jm13) = (j(1.0 / 3.0, zt), j(-1.0 / 3.0, zt));
        let (jp23, jm23) = (j(2.0 / 3.0, zt), j(-2.0 / 3.0, zt));
        AiryQuad {
            ai: x.sqrt() / 3.0 * (jp13 + jm13),
            ai_prime: x / 3.0 * (jp23 - jm23),
            bi: (x / 3.0).sqrt() * (jm13 - jp13),
            bi_prime: x / r3 * (jm23 + jp23),
            argument: z,
        }
    }
}

/// Unscaled Airy values by quadrature.
pub fn airy_by_quadrature(z: f64) -> AiryQuad {
    let mut q = airy_scaled_by_quadrature(z);
    if z > 0.0 {
        let zt = zeta(z);
        let (down, up) = ((-zt).exp(), zt.exp());
        q.ai *= down;
        q.ai_prime *= down;
        q.bi *= up;
        q.bi_prime *= up;
    }
    q
}
