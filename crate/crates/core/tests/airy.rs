#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use proptest::prelude::*;
use tunnel_noise::airy::{airy_all, airy_scaled, zeta, AiryQuad};
use tunnel_noise::oracle::{airy_by_quadrature, airy_scaled_by_quadrature, finite_diff};

/// (z, Ai, Ai', Bi, Bi') at 20 digits, from an arbitrary-precision library.
const TABLE: [[f64; 5]; 9] = [
    [
        -20.0,
        -0.17640612707798468959,
        0.8928628567364712384,
        -0.20013930932265134928,
        -0.79142903383953647936,
    ],
    [
        -7.5,
        0.32177571638064787527,
        0.31880950669855459621,
        -0.11246348507649080638,
        0.87780228154576092237,
    ],
    [
        -2.5,
        -0.11232506769296608919,
        0.67885273426479436337,
        -0.43242247184070529303,
        -0.22042015487462958768,
    ],
    [
        -1.0,
        0.5355608832923521188,
        -0.010160567116645209395,
        0.10399738949694461189,
        0.59237562642279235082,
    ],
    [
        0.5,
        0.23169360648083348977,
        -0.22491053266468389314,
        0.8542770431031554933,
        0.54457256414059230183,
    ],
    [
        2.0,
        0.034924130423274379135,
        -0.053090384433653631704,
        3.2980949999782147103,
        4.1006820499328898894,
    ],
    [
        5.0,
        0.00010834442813607441735,
        -0.000247413890868462476,
        657.79204417117118244,
        1435.8190802179825187,
    ],
    [
        8.5,
        1.0997009755195506509e-8,
        -3.2377254404476022559e-8,
        4965319.5414713019811,
        14326301.030662058334,
    ],
    [
        12.0,
        1.393184688875360839e-13,
        -4.854736554985308463e-13,
        329807225829.07417618,
        1135507502443.3707424,
    ],
];

/// On the oscillatory side values pass through zero, so errors are measured
/// against the modulus √(Ai² + Bi²) (and its derivative analogue).
fn errors(got: &AiryQuad, want: &[f64; 5]) -> [f64; 4] {
    let z = want[0];
    let (m, n) = ((want[1].hypot(want[3])), (want[2].hypot(want[4])));
    let scale = |v: f64, env: f64| if z < 0.0 { env } else { v.abs() };
    [
        (got.ai - want[1]).abs() / scale(want[1], m),
        (got.ai_prime - want[2]).abs() / scale(want[2], n),
        (got.bi - want[3]).abs() / scale(want[3], m),
        (got.bi_prime - want[4]).abs() / scale(want[4], n),
    ]
}

#[test]
fn matches_reference_table() {
    for row in &TABLE {
        let tol = if row[0].abs() <= 10.0 { 1e-12 } else { 1e-10 };
        let worst = errors(&airy_all(row[0]).unwrap(), row)
            .into_iter()
            .fold(0.0, f64::max);
        assert!(worst < tol, "z = {}: error {worst:e}", row[0]);
    }
}

#[test]
fn origin_closed_forms() {
    let q = airy_all(0.0).unwrap();
    let g23 = 1.354_117_939_426_400_4_f64;
    let g13 = 2.678_938_534_707_747_6_f64;
    let ai = 3f64.powf(-2.0 / 3.0) / g23;
    let aip = -(3f64.powf(-1.0 / 3.0)) / g13;
    for (got, want) in [
        (q.ai, ai),
        (q.ai_prime, aip),
        (q.bi, 3f64.powf(-1.0 / 6.0) / g23),
        (q.bi_prime, 3f64.powf(1.0 / 6.0) / g13),
    ] {
        assert!(((got - want) / want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn scaled_recombination() {
    for z in [1.0, 3.0, 7.9, 8.1, 15.0, 25.0] {
        let direct = airy_all(z).unwrap();
        let s = airy_scaled(z).unwrap();
        assert_eq!(s.zeta, zeta(z));
        let back = s.unscale().unwrap();
        for (a, b) in [
            (direct.ai, back.ai),
            (direct.ai_prime, back.ai_prime),
            (direct.bi, back.bi),
            (direct.bi_prime, back.bi_prime),
        ] {
            assert!(((a - b) / a).abs() < 1e-10, "z = {z}: {a} vs {b}");
        }
    }
    assert!(airy_scaled(0.0).is_err());
    assert!(airy_scaled(-1.0).is_err());
}

#[test]
fn scaled_wronskian_far_out() {
    for z in [50.0, 200.0, 1e4] {
        let w = airy_scaled(z).unwrap().scaled.wronskian();
        assert!((w * PI - 1.0).abs() < 1e-10, "z = {z}");
    }
}

#[test]
fn overflow_guard_is_a_range_error() {
    let e = airy_all(200.0).unwrap_err();
    assert!(matches!(e, tunnel_noise::Error::Range { .. }), "{e}");
}

#[test]
fn agrees_with_quadrature_oracle() {
    for z in [-12.0, -4.0, -0.3, 0.0, 1.7, 5.0] {
        let (a, q) = (airy_all(z).unwrap(), airy_by_quadrature(z));
        let row = [z, q.ai, q.ai_prime, q.bi, q.bi_prime];
        let worst = errors(&a, &row).into_iter().fold(0.0, f64::max);
        assert!(worst < 1e-11, "z = {z}: {worst:e}");
    }
    let (s, q) = (
        airy_scaled(20.0).unwrap().scaled,
        airy_scaled_by_quadrature(20.0),
    );
    assert!(((s.ai - q.ai) / q.ai).abs() < 1e-11);
    assert!(((s.bi_prime - q.bi_prime) / q.bi_prime).abs() < 1e-11);
}

#[test]
fn first_zero_by_bisection() {
    let (mut lo, mut hi) = (-2.5, -2.0);
    let ai = |z: f64| airy_all(z).unwrap().ai;
    assert!(ai(lo) * ai(hi) < 0.0);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if ai(lo) * ai(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!((0.5 * (lo + hi) + 2.3381074104597670385).abs() < 1e-9);
}

#[test]
fn ode_residual() {
    for z in [-6.0, -1.3, 0.7, 2.5, 6.0] {
        let d1 = |x: f64| airy_all(x).unwrap().ai_prime;
        // Ai″ from differencing Ai′, which is evaluated to full precision
        let d2 = finite_diff(d1, z, 1e-3).value;
        let ai = airy_all(z).unwrap().ai;
        assert!(((d2 - z * ai) / (z * ai)).abs() < 1e-6, "z = {z}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn wronskian_identity(z in -30.0f64..30.0) {
        let w = if z > 8.0 { airy_scaled(z).unwrap().scaled.wronskian() } else { airy_all(z).unwrap().wronskian() };
        prop_assert!((w * PI - 1.0).abs() < 1e-10, "z = {}, W·π = {}", z, w * PI);
    }
}
