use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scattering::{BarrierFamily, BarrierSpec};
use crate::units::{Energy, TWO_M_OVER_HBAR2};

/// Piecewise-constant potential: `levels[0]` left of `edges[0]`,
/// `levels[i]` on `[edges[i-1], edges[i])`, `levels[n]` right of the last edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicedPotential {
    edges: Vec<f64>,
    levels: Vec<f64>,
}

impl SlicedPotential {
    /// Edges in metres (strictly increasing), levels in joules.
    pub fn new(edges: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Input(
                "sliced potential needs at least one edge".into(),
            ));
        }
        if levels.len() != edges.len() + 1 {
            return Err(Error::Input(format!(
                "{} edges need {} levels, got {}",
                edges.len(),
                edges.len() + 1,
                levels.len()
            )));
        }
        if edges.iter().chain(&levels).any(|v| !v.is_finite()) {
            return Err(Error::Input(
                "sliced potential contains non-finite values".into(),
            ));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Input(
                "slice edges must be strictly increasing".into(),
            ));
        }
        Ok(SlicedPotential { edges, levels })
    }

    /// Midpoint discretisation of a barrier into `n_slices` equal slices.
    pub fn from_barrier(spec: &BarrierSpec, n_slices: usize) -> Result<Self> {
        spec.validate()?;
        if n_slices == 0 {
            return Err(Error::Input("need at least one slice".into()));
        }
        let (a, l) = (spec.left_edge(), spec.gap.meters());
        let h = l / n_slices as f64;
        let mut edges = Vec::with_capacity(n_slices + 1);
        let mut levels = Vec::with_capacity(n_slices + 2);
        levels.push(0.0);
        for i in 0..=n_slices {
            edges.push(a + i as f64 * h);
        }
        for i in 0..n_slices {
            let mid = (i as f64 + 0.5) / n_slices as f64;
            levels.push(match spec.family {
                BarrierFamily::LinearField => spec.v0.joules() - spec.phi.joules() * mid,
                _ => spec.v0.joules(),
            });
        }
        levels.push(spec.right_level());
        Self::new(edges, levels)
    }

    pub fn n_slices(&self) -> usize {
        self.edges.len() - 1
    }

    /// `(x, V)` pairs: each slice's left edge with its level.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.edges
            .iter()
            .zip(&self.levels[1..])
            .map(|(&x, &v)| (x, v))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferResult {
    pub transmission: f64,
    pub reflection: f64,
    pub ln_transmission: f64,
}

/// Transmission through a sliced potential.
///
/// Starts from the outgoing wave `ψ = 1, ψ' = ik_R` at the last edge and
/// carries `(ψ, ψ')` leftwards with the exact real propagator of each
/// slice. The propagator is an entire function of `q² = 2m(V−E)/ħ²`, so
/// slices with `E ≈ V` need no special treatment.
pub fn transfer_matrix_t(pot: &SlicedPotential, energy: Energy) -> Result<TransferResult> {
    let e = energy.joules();
    let (left, right) = (pot.levels[0], *pot.levels.last().unwrap());
    if !(e > left && e > right) {
        return Err(Error::domain(
            "E",
            "energy must exceed both exterior levels",
        ));
    }
    let k_l = (TWO_M_OVER_HBAR2 * (e - left)).sqrt();
    let k_r = (TWO_M_OVER_HBAR2 * (e - right)).sqrt();
    let i = Complex64::new(0.0, 1.0);
    let mut psi = Complex64::new(1.0, 0.0);
    let mut dpsi = i * k_r;
    let mut log_scale = 0.0;

    for slice in (0..pot.n_slices()).rev() {
        let width = pot.edges[slice + 1] - pot.edges[slice];
        let q2 = TWO_M_OVER_HBAR2 * (pot.levels[slice + 1] - e);
        let q = q2.abs().sqrt();
        let pieces = ((q * width) / 50.0).ceil().max(1.0) as usize;
        let d = width / pieces as f64;
        let (c, s1, s2) = if q2 > 0.0 {
            let (ch, sh) = ((q * d).cosh(), (q * d).sinh());
            (ch, sh / q, q * sh)
        } else if q2 < 0.0 {
            let (sn, cs) = (q * d).sin_cos();
            (cs, sn / q, -q * sn)
        } else {
            (1.0, d, 0.0)
        };
        for _ in 0..pieces {
            let next = c * psi - s1 * dpsi;
            dpsi = -s2 * psi + c * dpsi;
            psi = next;
            let size = psi.norm() + dpsi.norm() / k_l;
            if size > 1e100 {
                psi /= size;
                dpsi /= size;
                log_scale += size.ln();
            }
        }
    }
    let a = 0.5 * (psi + dpsi / (i * k_l));
    let b = 0.5 * (psi - dpsi / (i * k_l));
    let ln_t = (k_r / k_l).ln() - 2.0 * a.norm().ln() - 2.0 * log_scale;
    Ok(TransferResult {
        transmission: ln_t.exp(),
        reflection: (b / a).norm_sqr(),
        ln_transmission: ln_t,
    })
}

/// Richardson-extrapolated transmission from `n`, `2n` and `4n` slices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergedTransmission {
    pub transmission: f64,
    pub ln_transmission: f64,
    /// `|extrapolated − finest single-level|` in `ln T`.
    pub error_estimate: f64,
    /// Observed convergence order; infinite when the discretisation is exact.
    pub observed_order: f64,
}

pub fn transmission_converged(
    spec: &BarrierSpec,
    energy: Energy,
    n: usize,
) -> Result<ConvergedTransmission> {
    let level = |m: usize| -> Result<f64> {
        Ok(transfer_matrix_t(&SlicedPotential::from_barrier(spec, m)?, energy)?.ln_transmission)
    };
    let (l1, l2, l4) = (level(n)?, level(2 * n)?, level(4 * n)?);
    let r1 = (4.0 * l2 - l1) / 3.0;
    let r2 = (4.0 * l4 - l2) / 3.0;
    let extrapolated = (16.0 * r2 - r1) / 15.0;
    let (d1, d2) = ((l1 - l2).abs(), (l2 - l4).abs());
    let observed_order = if d2 > 0.0 && d1 > 0.0 {
        (d1 / d2).log2()
    } else {
        f64::INFINITY
    };
    Ok(ConvergedTransmission {
        transmission: extrapolated.exp(),
        ln_transmission: extrapolated,
        error_estimate: (extrapolated - r2).abs() + (r2 - l4).abs() * 1e-3,
        observed_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::solve;
    use crate::units::Length;

    fn ev(x: f64) -> Energy {
        Energy::from_ev(x)
    }

    #[test]
    fn free_propagation() {
        let pot = SlicedPotential::new(vec![0.0, 1e-9, 2e-9], vec![0.0; 4]).unwrap();
        let r = transfer_matrix_t(&pot, ev(1.0)).unwrap();
        assert!((r.transmission - 1.0).abs() < 1e-14);
        assert!(r.reflection < 1e-28);
    }

    #[test]
    fn single_slice_is_closed_form() {
        let spec = BarrierSpec::symmetric(ev(5.0), Length::from_nm(0.5));
        let r =
            transfer_matrix_t(&SlicedPotential::from_barrier(&spec, 1).unwrap(), ev(1.0)).unwrap();
        let sol = solve(ev(1.0), &spec).unwrap();
        assert!(((r.transmission - sol.transmission) / sol.transmission).abs() < 1e-12);
        assert!((r.transmission + r.reflection - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(SlicedPotential::new(vec![1.0, 0.5], vec![0.0; 3]).is_err());
        assert!(SlicedPotential::new(vec![0.0, 1.0], vec![0.0; 2]).is_err());
        assert!(SlicedPotential::new(vec![], vec![0.0]).is_err());
    }

    #[test]
    fn ramp_converges_at_second_order() {
        let spec = BarrierSpec::linear_field(ev(5.0), ev(2.0), Length::from_nm(1.0));
        let c = transmission_converged(&spec, ev(1.0), 1000).unwrap();
        assert!(
            c.observed_order > 1.9 && c.observed_order < 2.1,
            "{}",
            c.observed_order
        );
        let sol = solve(ev(1.0), &spec).unwrap();
        assert!(((c.transmission - sol.transmission) / sol.transmission).abs() < 1e-9);
    }

    #[test]
    fn unitarity_independent_of_slices() {
        let spec = BarrierSpec::linear_field(ev(5.0), ev(4.5), Length::from_nm(0.8));
        for n in [1, 7, 100, 3000] {
            let r = transfer_matrix_t(&SlicedPotential::from_barrier(&spec, n).unwrap(), ev(1.0))
                .unwrap();
            assert!((r.transmission + r.reflection - 1.0).abs() < 1e-10);
        }
    }
}
