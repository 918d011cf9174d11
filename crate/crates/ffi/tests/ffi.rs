use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use tunnel_noise_ffi::*;

fn last_error() -> String {
    let p = tn_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn solve(family: u32, v0: f64, phi: f64, gap: f64, e: f64) -> (TnStatus, *mut TnSolution) {
    let mut sol = ptr::null_mut();
    let st = unsafe { tn_solve(family, v0, phi, gap, e, &mut sol) };
    (st, sol)
}

#[test]
fn symmetric_round_trip() {
    let (st, sol) = solve(TN_FAMILY_SYMMETRIC, 5.0, 0.0, 1.0, 1.0);
    assert_eq!(st, TnStatus::Ok);
    assert!(tn_last_error_message().is_null());
    let mut sc = TnScattering::default();
    let mut u = TnUncertainty::default();
    unsafe {
        assert_eq!(tn_solution_scattering(sol, &mut sc), TnStatus::Ok);
        assert_eq!(tn_solution_uncertainty(sol, 1e6, &mut u), TnStatus::Ok);
        tn_solution_free(sol);
    }
    assert!((sc.transmission + sc.reflection - 1.0).abs() < 1e-10);
    assert!((u.product_over_hbar - 0.5).abs() < 1e-10);
    assert_eq!(u.n_electrons, 1e6);
}

#[test]
fn matches_core_library() {
    use tunnel_noise::{scattering, BarrierSpec, Energy, Length};
    let spec = BarrierSpec::linear_field(
        Energy::from_ev(5.0),
        Energy::from_ev(2.0),
        Length::from_nm(0.8),
    );
    let core = scattering::solve(Energy::from_ev(1.5), &spec).unwrap();
    let (st, sol) = solve(TN_FAMILY_LINEAR_FIELD, 5.0, 2.0, 0.8, 1.5);
    assert_eq!(st, TnStatus::Ok);
    let mut sc = TnScattering::default();
    let mut w = TnWavefunction::default();
    let mut f = TnFluxes::default();
    let x = 0.4e-9;
    unsafe {
        tn_solution_scattering(sol, &mut sc);
        assert_eq!(
            tn_solution_wavefunction(sol, x, TN_SIDE_BULK, &mut w),
            TnStatus::Ok
        );
        assert_eq!(
            tn_solution_currents(sol, x, TN_SIDE_BULK, &mut f),
            TnStatus::Ok
        );
        tn_solution_free(sol);
    }
    assert_eq!(sc.ln_transmission, core.ln_transmission);
    assert_eq!((sc.t_re, sc.t_im), (core.t.re, core.t.im));
    let cw = core
        .eval_wavefunction(Length::from_meters(x), tunnel_noise::Side::Bulk)
        .unwrap();
    assert_eq!((w.psi_re, w.d3_im), (cw.psi.re, cw.d3.im));
    assert!((f.j / (core.transmission * core.incident_flux) - 1.0).abs() < 1e-12);
}

#[test]
fn error_codes_and_messages() {
    let (st, sol) = solve(TN_FAMILY_SYMMETRIC, 5.0, 0.0, 1.0, 7.0);
    assert_eq!(st, TnStatus::Domain);
    assert!(sol.is_null());
    assert!(last_error().contains("domain"), "{}", last_error());

    let (st, _) = solve(9, 5.0, 0.0, 1.0, 1.0);
    assert_eq!(st, TnStatus::InvalidArgument);
    assert!(last_error().contains("family"));

    let (st, _) = solve(TN_FAMILY_SYMMETRIC, 5.0, 0.0, -1.0, 1.0);
    assert_eq!(st, TnStatus::Domain);

    let mut a = TnAiry::default();
    assert_eq!(unsafe { tn_airy(500.0, &mut a) }, TnStatus::Range);
    assert_eq!(unsafe { tn_airy(0.0, &mut a) }, TnStatus::Ok);
    assert!((a.ai - 0.355_028_053_887_817_2).abs() < 1e-15);

    let (_, sol) = solve(TN_FAMILY_SYMMETRIC, 5.0, 0.0, 1.0, 1.0);
    let mut w = TnWavefunction::default();
    assert_eq!(
        unsafe { tn_solution_wavefunction(sol, 0.0, 17, &mut w) },
        TnStatus::InvalidArgument
    );
    unsafe { tn_solution_free(sol) };
}

#[test]
fn null_pointers_are_rejected() {
    unsafe {
        assert_eq!(
            tn_solve(TN_FAMILY_SYMMETRIC, 5.0, 0.0, 1.0, 1.0, ptr::null_mut()),
            TnStatus::NullPointer
        );
        assert!(last_error().contains("out"));
        let mut sc = TnScattering::default();
        assert_eq!(
            tn_solution_scattering(ptr::null(), &mut sc),
            TnStatus::NullPointer
        );
        assert_eq!(tn_airy(1.0, ptr::null_mut()), TnStatus::NullPointer);
        let mut b = TnNoiseBudget::default();
        assert_eq!(
            tn_noise_budget(
                1e-6,
                1.0,
                TN_FAMILY_SYMMETRIC,
                5.0,
                0.0,
                1.0,
                ptr::null(),
                &mut b
            ),
            TnStatus::NullPointer
        );
        tn_solution_free(ptr::null_mut());
    }
}

#[test]
fn nominal_noise_budget() {
    let res = tn_resonator_nominal();
    let mut b = TnNoiseBudget::default();
    let st =
        unsafe { tn_noise_budget(1e-6, 1.0, TN_FAMILY_SYMMETRIC, 5.0, 0.0, 1.0, &res, &mut b) };
    assert_eq!(st, TnStatus::Ok);
    assert!((b.feasibility_lhs - 1.0).abs() < 1e-12);
    assert!((b.shot_psd * 1e13 - 5.66).abs() < 0.01);
    let bad = TnResonator {
        quality: -1.0,
        ..res
    };
    let st =
        unsafe { tn_noise_budget(1e-6, 1.0, TN_FAMILY_SYMMETRIC, 5.0, 0.0, 1.0, &bad, &mut b) };
    assert_eq!(st, TnStatus::Domain);
}

#[test]
fn errors_are_thread_local() {
    let (st, _) = solve(TN_FAMILY_SYMMETRIC, 5.0, 0.0, 1.0, 7.0);
    assert_eq!(st, TnStatus::Domain);
    std::thread::spawn(|| assert!(tn_last_error_message().is_null()))
        .join()
        .unwrap();
    assert!(!tn_last_error_message().is_null());
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(manifest_dir().join("include/tunnel_noise.h")).unwrap();
    for name in [
        "tn_solve",
        "tn_solution_free",
        "tn_solution_scattering",
        "tn_solution_wavefunction",
        "tn_solution_currents",
        "tn_solution_uncertainty",
        "tn_noise_budget",
        "tn_resonator_nominal",
        "tn_airy",
        "tn_last_error_message",
        "tn_version",
        "typedef struct TnSolution TnSolution",
        "TN_STATUS_NULL_POINTER = 6",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Compile and run a C program against the header and static library when a
/// C compiler is available.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("skipping: no C compiler");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libtunnel_noise_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let out = tempfile_path("tn_smoke");
    let dir = manifest_dir();
    let status = Command::new(&cc)
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok 0.1.0 0.5"));
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc)
            .arg("--version")
            .output()
            .is_ok_and(|o| o.status.success())
        {
            return Ok(cc.into());
        }
    }
    Err(())
}

fn tempfile_path(stem: &str) -> PathBuf {
    std::env::temp_dir().join(format!("{stem}_{}", std::process::id()))
}
