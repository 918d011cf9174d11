//! Airy functions Ai, Bi and their first derivatives for real arguments.
//!
//! Two regimes are used:
//!
//! * `|z| ≤ 8`: the Maclaurin series, summed in double-double arithmetic.
//!   For positive `z` the series for `Ai` is a difference of two terms that
//!   grow like `Bi`, so plain doubles lose `log10(Bi/Ai)` digits (about 13 at
//!   `z = 8`). The extra 16 digits absorb that cancellation.
//! * `|z| > 8`: the Poincaré asymptotic expansions in `ζ = (2/3)|z|^{3/2}`
//!   (exponential forms for `z > 0`, phase forms for `z < 0`). At `|z| = 8`
//!   the smallest term is below `1e-13` relative.
//!
//! Unscaled values overflow once `ζ` approaches the exponent range of `f64`.
//! [`airy_all`] refuses such arguments; [`airy_scaled`] returns the
//! exponentially scaled pair together with `ζ`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Switch point between the Maclaurin and asymptotic regimes.
pub const SERIES_SWITCH: f64 = 8.0;

/// Largest `ζ = (2/3)z^{3/2}` for which `e^{±ζ}` (times the algebraic
/// prefactors) is representable. `ln(f64::MAX) ≈ 709.78`.
pub const MAX_UNSCALED_ZETA: f64 = 690.0;

/// `Ai(0)` as a double-double.
const AI0: Dd = Dd::new(0.355_028_053_887_817_2, 2.052_336_324_362_12e-17);
/// `-Ai'(0)` as a double-double.
const MINUS_AI0_PRIME: Dd = Dd::new(0.258_819_403_792_806_8, -2.522_243_111_610_832e-17);
const SQRT3: Dd = Dd::new(1.732_050_807_568_877_2, 1.003_508_422_180_690_3e-16);

/// Values of `Ai`, `Ai'`, `Bi`, `Bi'` at one argument.
///
/// When produced by [`airy_scaled`] the fields hold the scaled values
/// `Ai·e^{ζ}`, `Ai'·e^{ζ}`, `Bi·e^{-ζ}`, `Bi'·e^{-ζ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryQuad {
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
    pub argument: f64,
}

impl AiryQuad {
    /// `Ai·Bi' − Ai'·Bi`, which equals `1/π` for exact values (scaled or not).
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bi_prime - self.ai_prime * self.bi
    }
}

/// Exponentially scaled Airy values for `z > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledAiry {
    /// `Ai·e^{ζ}`, `Ai'·e^{ζ}`, `Bi·e^{-ζ}`, `Bi'·e^{-ζ}`.
    pub scaled: AiryQuad,
    /// `ζ = (2/3) z^{3/2}`.
    pub zeta: f64,
}

impl ScaledAiry {
    /// Undo the scaling. Fails if the unscaled values are not representable.
    pub fn unscale(&self) -> Result<AiryQuad> {
        check_zeta(self.zeta, self.scaled.argument)?;
        let (down, up) = ((-self.zeta).exp(), self.zeta.exp());
        Ok(AiryQuad {
            ai: self.scaled.ai * down,
            ai_prime: self.scaled.ai_prime * down,
            bi: self.scaled.bi * up,
            bi_prime: self.scaled.bi_prime * up,
            argument: self.scaled.argument,
        })
    }
}

/// `ζ(z) = (2/3) z^{3/2}` for `z > 0`, and 0 otherwise.
#[inline]
pub fn zeta(z: f64) -> f64 {
    if z > 0.0 {
        2.0 / 3.0 * z * z.sqrt()
    } else {
        0.0
    }
}

/// `ζ(z1) − ζ(z2)` without cancellation when both arguments are large and close.
pub fn zeta_difference(z1: f64, z2: f64) -> f64 {
    if z1 > 0.0 && z2 > 0.0 {
        let (r1, r2) = (z1.sqrt(), z2.sqrt());
        // z1^{3/2} − z2^{3/2} = (z1 − z2)(z1 + √(z1 z2) + z2)/(√z1 + √z2)
        2.0 / 3.0 * (z1 - z2) * (z1 + r1 * r2 + z2) / (r1 + r2)
    } else {
        zeta(z1) - zeta(z2)
    }
}

/// `ζ(z1) − ζ(z2)` when `z1 − z2 = diff` is known more accurately than the
/// rounded difference of the two arguments.
pub fn zeta_difference_exact(z1: f64, z2: f64, diff: f64) -> f64 {
    if z1 > 0.0 && z2 > 0.0 {
        let (r1, r2) = (z1.sqrt(), z2.sqrt());
        2.0 / 3.0 * diff * (z1 + r1 * r2 + z2) / (r1 + r2)
    } else {
        zeta(z1) - zeta(z2)
    }
}

fn check_zeta(zeta: f64, z: f64) -> Result<()> {
    if zeta > MAX_UNSCALED_ZETA {
        return Err(Error::Range {
            reason: format!("unscaled Airy evaluation at z = {z} overflows; use airy_scaled"),
            scale: zeta,
        });
    }
    Ok(())
}

/// Unscaled `Ai`, `Ai'`, `Bi`, `Bi'` at `z`.
pub fn airy_all(z: f64) -> Result<AiryQuad> {
    if !z.is_finite() {
        return Err(Error::domain(
            "z",
            format!("Airy argument must be finite, got {z}"),
        ));
    }
    if z.abs() <= SERIES_SWITCH {
        return Ok(maclaurin(z));
    }
    if z > 0.0 {
        let s = asymptotic_positive(z);
        s.unscale()
    } else {
        Ok(asymptotic_negative(z))
    }
}

/// Scaled Airy values for `z > 0`; see [`ScaledAiry`].
pub fn airy_scaled(z: f64) -> Result<ScaledAiry> {
    if !z.is_finite() {
        return Err(Error::domain(
            "z",
            format!("Airy argument must be finite, got {z}"),
        ));
    }
    if !(z > 0.0) {
        return Err(Error::domain(
            "z",
            format!("scaled Airy evaluation needs z > 0, got {z}"),
        ));
    }
    if z <= SERIES_SWITCH {
        let q = maclaurin(z);
        let zeta = zeta(z);
        let (up, down) = (zeta.exp(), (-zeta).exp());
        return Ok(ScaledAiry {
            scaled: AiryQuad {
                ai: q.ai * up,
                ai_prime: q.ai_prime * up,
                bi: q.bi * down,
                bi_prime: q.bi_prime * down,
                argument: z,
            },
            zeta,
        });
    }
    Ok(asymptotic_positive(z))
}

/// Scaled values for any real `z`: identical to [`airy_scaled`] for `z > 0`,
/// and the plain values with `ζ = 0` for `z ≤ 0`.
pub(crate) fn airy_scaled_any(z: f64) -> Result<ScaledAiry> {
    if z > 0.0 {
        airy_scaled(z)
    } else {
        Ok(ScaledAiry {
            scaled: airy_all(z)?,
            zeta: 0.0,
        })
    }
}

fn maclaurin(z: f64) -> AiryQuad {
    let zz = Dd::from_f64(z);
    let z2 = Dd::two_prod(z, z);
    let z3 = z2.mul_f64(z);

    let mut f_term = Dd::ONE;
    let mut fp_term = z2.div_f64(2.0);
    let mut g_term = zz;
    let mut gp_term = Dd::ONE;
    let (mut f, mut fp, mut g, mut gp) = (f_term, fp_term, g_term, gp_term);

    // f  = Σ z^{3k} / [(2·3)(5·6)···((3k−1)(3k))]
    // g  = Σ z^{3k+1} / [(3·4)(6·7)···((3k)(3k+1))]
    // f', g' are the termwise derivatives.
    for k in 0..200 {
        let kf = k as f64;
        f_term = f_term.mul(z3).div_f64((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        g_term = g_term.mul(z3).div_f64((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        gp_term = gp_term.mul(z3).div_f64((3.0 * kf + 1.0) * (3.0 * kf + 3.0));
        if k >= 1 {
            fp_term = fp_term.mul(z3).div_f64((3.0 * kf) * (3.0 * kf + 2.0));
            fp = fp.add(fp_term);
        }
        f = f.add(f_term);
        g = g.add(g_term);
        gp = gp.add(gp_term);

        let small = |t: Dd, s: Dd| t.hi.abs() <= 1e-34 * s.hi.abs().max(1e-300);
        if k >= 2
            && small(f_term, f)
            && small(g_term, g)
            && small(fp_term, fp)
            && small(gp_term, gp)
        {
            break;
        }
    }

    let c1f = AI0.mul(f);
    let c2g = MINUS_AI0_PRIME.mul(g);
    let c1fp = AI0.mul(fp);
    let c2gp = MINUS_AI0_PRIME.mul(gp);
    AiryQuad {
        ai: c1f.sub(c2g).to_f64(),
        ai_prime: c1fp.sub(c2gp).to_f64(),
        bi: SQRT3.mul(c1f.add(c2g)).to_f64(),
        bi_prime: SQRT3.mul(c1fp.add(c2gp)).to_f64(),
        argument: z,
    }
}

/// Coefficients `u_k`, `v_k` of the asymptotic expansions.
struct AsymptoticCoefficients {
    u: [f64; 64],
    v: [f64; 64],
}

impl AsymptoticCoefficients {
    fn new() -> Self {
        let mut u = [0.0; 64];
        let mut v = [0.0; 64];
        u[0] = 1.0;
        v[0] = 1.0;
        for k in 1..64 {
            let kf = k as f64;
            u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
            v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k];
        }
        AsymptoticCoefficients { u, v }
    }
}

fn coefficients() -> &'static AsymptoticCoefficients {
    static COEFFS: std::sync::OnceLock<AsymptoticCoefficients> = std::sync::OnceLock::new();
    COEFFS.get_or_init(AsymptoticCoefficients::new)
}

/// Sums `Σ sign(k)·c_k·x^k` over `k ∈ start, start+step, ...`, stopping at
/// the smallest term (optimal truncation) or when terms become negligible.
fn asymptotic_sum(c: &[f64; 64], x: f64, start: usize, step: usize, alternate: bool) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut sign = 1.0;
    let mut k = start;
    while k < 64 {
        let term = c[k] * x.powi(k as i32);
        if term.abs() > last {
            break;
        }
        sum += sign * term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        last = term.abs();
        if alternate {
            sign = -sign;
        }
        k += step;
    }
    sum
}

fn asymptotic_positive(z: f64) -> ScaledAiry {
    let c = coefficients();
    let zeta = zeta(z);
    let inv = 1.0 / zeta;
    let quarter = z.sqrt().sqrt();
    let sqrt_pi = PI.sqrt();

    let su_minus = asymptotic_sum(&c.u, -inv, 0, 1, false);
    let sv_minus = asymptotic_sum(&c.v, -inv, 0, 1, false);
    let su_plus = asymptotic_sum(&c.u, inv, 0, 1, false);
    let sv_plus = asymptotic_sum(&c.v, inv, 0, 1, false);

    ScaledAiry {
        scaled: AiryQuad {
            ai: su_minus / (2.0 * sqrt_pi * quarter),
            ai_prime: -quarter * sv_minus / (2.0 * sqrt_pi),
            bi: su_plus / (sqrt_pi * quarter),
            bi_prime: quarter * sv_plus / sqrt_pi,
            argument: z,
        },
        zeta,
    }
}

fn asymptotic_negative(z: f64) -> AiryQuad {
    let c = coefficients();
    let x = -z;
    let zeta = zeta(x);
    let inv = 1.0 / zeta;
    let quarter = x.sqrt().sqrt();
    let sqrt_pi = PI.sqrt();

    // Even and odd parts: Σ(−1)^k c_{2k} ζ^{−2k} and Σ(−1)^k c_{2k+1} ζ^{−2k−1}.
    let ue = asymptotic_sum(&c.u, inv, 0, 2, true);
    let uo = asymptotic_sum(&c.u, inv, 1, 2, true);
    let ve = asymptotic_sum(&c.v, inv, 0, 2, true);
    let vo = asymptotic_sum(&c.v, inv, 1, 2, true);

    let (s, co) = zeta.sin_cos();
    let cos_q = (co + s) * FRAC_1_SQRT_2; // cos(ζ − π/4)
    let sin_q = (s - co) * FRAC_1_SQRT_2; // sin(ζ − π/4)

    AiryQuad {
        ai: (cos_q * ue + sin_q * uo) / (sqrt_pi * quarter),
        ai_prime: quarter * (sin_q * ve - cos_q * vo) / sqrt_pi,
        bi: (-sin_q * ue + cos_q * uo) / (sqrt_pi * quarter),
        bi_prime: quarter * (cos_q * ve + sin_q * vo) / sqrt_pi,
        argument: z,
    }
}

/// Minimal double-double arithmetic (about 32 significant digits).
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    fn quick_two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd {
            hi: s,
            lo: b - (s - a),
        }
    }

    #[inline]
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    #[inline]
    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = Dd::two_sum(self.hi, o.hi);
        let (t, f) = Dd::two_sum(self.lo, o.lo);
        let r = Dd::quick_two_sum(s, e + t);
        Dd::quick_two_sum(r.hi, r.lo + f)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    fn mul(self, o: Dd) -> Dd {
        let p = Dd::two_prod(self.hi, o.hi);
        Dd::quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    fn mul_f64(self, b: f64) -> Dd {
        let p = Dd::two_prod(self.hi, b);
        Dd::quick_two_sum(p.hi, p.lo + self.lo * b)
    }

    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let p = Dd::two_prod(q1, b);
        let (s, e) = Dd::two_sum(self.hi, -p.hi);
        let s = s + (e - p.lo) + self.lo;
        Dd::quick_two_sum(q1, s / b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    }

    #[test]
    fn origin_closed_forms() {
        // Γ(1/3), Γ(2/3)
        let g13 = 2.678_938_534_707_747_6;
        let g23 = 1.354_117_939_426_400_4;
        let q = airy_all(0.0).unwrap();
        assert!(rel(q.ai, 3f64.powf(-2.0 / 3.0) / g23) < 1e-14);
        assert!(rel(q.bi, 3f64.powf(-1.0 / 6.0) / g23) < 1e-14);
        assert!(rel(q.ai_prime, -(3f64.powf(-1.0 / 3.0)) / g13) < 1e-14);
        assert!(rel(q.bi_prime, 3f64.powf(1.0 / 6.0) / g13) < 1e-14);
        assert!(rel(q.ai, 0.355_028_053_9) < 1e-9);
        assert!(rel(q.bi_prime, 0.448_288_357_4) < 1e-9);
    }

    #[test]
    fn double_double_basics() {
        let third = Dd::ONE.div_f64(3.0);
        let back = third.mul_f64(3.0).sub(Dd::ONE);
        assert!(back.to_f64().abs() < 1e-31);
        let p = Dd::two_prod(1.0 + 2f64.powi(-30), 1.0 - 2f64.powi(-30));
        assert_eq!(p.hi, 1.0);
        assert_eq!(p.lo, -(2f64.powi(-60)));
    }

    #[test]
    fn asymptotic_coefficients() {
        let c = coefficients();
        assert!(rel(c.u[1], 5.0 / 72.0) < 1e-15);
        assert!(rel(c.v[1], -7.0 / 72.0) < 1e-15);
        assert!(rel(c.u[2], 385.0 / 10368.0) < 1e-15);
    }

    #[test]
    fn regimes_agree_at_switch() {
        for z in [SERIES_SWITCH, -SERIES_SWITCH] {
            let series = maclaurin(z);
            let asym = if z > 0.0 {
                asymptotic_positive(z).unscale().unwrap()
            } else {
                asymptotic_negative(z)
            };
            assert!(rel(asym.ai, series.ai) < 1e-12, "{z}");
            assert!(rel(asym.ai_prime, series.ai_prime) < 1e-12, "{z}");
            assert!(rel(asym.bi, series.bi) < 1e-12, "{z}");
            assert!(rel(asym.bi_prime, series.bi_prime) < 1e-12, "{z}");
        }
    }

    #[test]
    fn unscaled_guard() {
        let z = (1.5 * (MAX_UNSCALED_ZETA + 5.0)).powf(2.0 / 3.0);
        match airy_all(z) {
            Err(Error::Range { scale, .. }) => assert!(scale > MAX_UNSCALED_ZETA),
            other => panic!("expected range error, got {other:?}"),
        }
        assert!(airy_scaled(z).is_ok());
        assert!(airy_all(f64::NAN).is_err());
        assert!(airy_scaled(0.0).is_err());
        assert!(airy_scaled(-1.0).is_err());
    }

    #[test]
    fn scaled_recombines() {
        let s = airy_scaled(1.0).unwrap();
        let q = airy_all(1.0).unwrap();
        let e = (2.0f64 / 3.0).exp();
        assert!(rel(s.scaled.ai / e, q.ai) < 1e-14);
        assert!(rel(s.scaled.bi * e, q.bi) < 1e-14);
        for z in [0.3, 5.0, 9.0, 40.0] {
            let u = airy_scaled(z).unwrap().unscale().unwrap();
            let d = airy_all(z).unwrap();
            assert!(rel(u.ai, d.ai) < 1e-10 && rel(u.bi_prime, d.bi_prime) < 1e-10);
        }
    }

    #[test]
    fn zeta_difference_is_stable() {
        let (a, b): (f64, f64) = (1.0e8, 1.0e8 - 3.0);
        let exact = 3.0 * a.sqrt(); // leading order in 1/a
        let d = zeta_difference(a, b);
        assert!(rel(d, exact) < 1e-6);
        assert!(rel(zeta_difference(4.0, 1.0), 2.0 / 3.0 * 7.0) < 1e-15);
        assert_eq!(zeta_difference(-1.0, -2.0), 0.0);
    }
}
