use num_complex::Complex64;

use crate::units::TWO_M_OVER_HBAR2;

/// `(ψ, ψ')` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeState {
    pub psi: Complex64,
    pub dpsi: Complex64,
}

fn rk4<V: Fn(f64) -> f64>(
    v: &V,
    energy: f64,
    x0: f64,
    s: OdeState,
    x1: f64,
    steps: usize,
) -> OdeState {
    let h = (x1 - x0) / steps as f64;
    let u = |x: f64| TWO_M_OVER_HBAR2 * (v(x) - energy);
    let (mut y, mut dy) = (s.psi, s.dpsi);
    for n in 0..steps {
        let x = x0 + n as f64 * h;
        let (um, ue) = (u(x + 0.5 * h), u(x + h));
        let k1 = (dy, u(x) * y);
        let k2 = (dy + 0.5 * h * k1.1, um * (y + 0.5 * h * k1.0));
        let k3 = (dy + 0.5 * h * k2.1, um * (y + 0.5 * h * k2.0));
        let k4 = (dy + h * k3.1, ue * (y + h * k3.0));
        y += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        dy += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    OdeState { psi: y, dpsi: dy }
}

/// Integrates `ψ'' = (2m/ħ²)(V(x) − E)ψ` from `x0` to `x1` with classical
/// Runge-Kutta at `steps` and `2·steps`, then Richardson-combines the two.
/// `V` and `energy` are in joules, positions in metres.
pub fn integrate_schrodinger<V: Fn(f64) -> f64>(
    v: V,
    energy: f64,
    x0: f64,
    start: OdeState,
    x1: f64,
    steps: usize,
) -> OdeState {
    let coarse = rk4(&v, energy, x0, start, x1, steps);
    let fine = rk4(&v, energy, x0, start, x1, 2 * steps);
    OdeState {
        psi: (16.0 * fine.psi - coarse.psi) / 15.0,
        dpsi: (16.0 * fine.dpsi - coarse.dpsi) / 15.0,
    }
}
