//! C ABI for `tunnel-noise`.
//!
//! Every fallible call returns a [`TnStatus`]; on failure the message is
//! available from [`tn_last_error_message`] on the same thread. Solutions
//! are opaque handles released with [`tn_solution_free`]. Energies are in
//! eV, gaps in nm, positions in metres, everything else SI.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tunnel_noise::airy::airy_all;
use tunnel_noise::fluxes::currents_at;
use tunnel_noise::noise::{noise_budget, ResonatorSpec};
use tunnel_noise::scattering::solve;
use tunnel_noise::uncertainty::{uncertainty_product, UncertaintyResult};
use tunnel_noise::{BarrierSpec, Energy, Error, Length, ScatteringSolution, Side};

/// Call outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnStatus {
    Ok = 0,
    InvalidArgument = 2,
    Domain = 3,
    Consistency = 4,
    Range = 5,
    NullPointer = 6,
    Panic = 7,
}

pub const TN_FAMILY_SYMMETRIC: u32 = 0;
pub const TN_FAMILY_ASYMMETRIC: u32 = 1;
pub const TN_FAMILY_LINEAR_FIELD: u32 = 2;

pub const TN_SIDE_LEFT: u32 = 0;
pub const TN_SIDE_RIGHT: u32 = 1;
pub const TN_SIDE_BULK: u32 = 2;

/// Opaque solved barrier.
pub struct TnSolution {
    inner: ScatteringSolution,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TnScattering {
    pub transmission: f64,
    pub reflection: f64,
    pub ln_transmission: f64,
    pub t_re: f64,
    pub t_im: f64,
    pub r_re: f64,
    pub r_im: f64,
    /// Wavenumbers in 1/m.
    pub k: f64,
    pub k_bar: f64,
    pub k0: f64,
    /// Incident probability current, m/s.
    pub incident_flux: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TnWavefunction {
    pub psi_re: f64,
    pub psi_im: f64,
    pub d1_re: f64,
    pub d1_im: f64,
    pub d2_re: f64,
    pub d2_im: f64,
    pub d3_re: f64,
    pub d3_im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TnFluxes {
    pub j: f64,
    pub j_p: f64,
    pub j_p2: f64,
    pub rho: f64,
    pub rho_p: f64,
    pub rho_p2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TnUncertainty {
    /// Metres.
    pub delta_l: f64,
    /// kg·m/s.
    pub delta_p: f64,
    pub product_over_hbar: f64,
    pub n_electrons: f64,
    /// 1/m.
    pub dt_dl: f64,
    pub transmission: f64,
    pub reflection: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TnResonator {
    /// kg.
    pub mass: f64,
    /// Hz.
    pub f0: f64,
    pub quality: f64,
    /// K.
    pub temperature: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TnNoiseBudget {
    /// N²/Hz.
    pub s_fq: f64,
    /// N²/Hz.
    pub s_fl: f64,
    pub feasibility_lhs: f64,
    pub psd_ratio: f64,
    /// A/√Hz.
    pub shot_psd: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TnAiry {
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> TnStatus {
    match e {
        Error::Input(_) => TnStatus::InvalidArgument,
        Error::Domain { .. } => TnStatus::Domain,
        Error::Range { .. } => TnStatus::Range,
        Error::Consistency(_) => TnStatus::Consistency,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Run `f`, translating errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TnStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TnStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer passed as `{name}`"));
            TnStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            TnStatus::Panic
        }
    }
}

fn out_ref<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller promises that non-null pointers are valid and aligned.
    unsafe { p.as_mut() }.ok_or(Failure::Null(name))
}

fn sol_ref<'a>(p: *const TnSolution) -> Result<&'a TnSolution, Failure> {
    // SAFETY: non-null handles come from `tn_solve` and are live until freed.
    unsafe { p.as_ref() }.ok_or(Failure::Null("solution"))
}

fn barrier(family: u32, v0_ev: f64, phi_ev: f64, gap_nm: f64) -> Result<BarrierSpec, Failure> {
    let (v0, phi, gap) = (
        Energy::from_ev(v0_ev),
        Energy::from_ev(phi_ev),
        Length::from_nm(gap_nm),
    );
    let spec = match family {
        TN_FAMILY_SYMMETRIC => BarrierSpec::symmetric(v0, gap),
        TN_FAMILY_ASYMMETRIC => BarrierSpec::asymmetric(v0, phi, gap),
        TN_FAMILY_LINEAR_FIELD => BarrierSpec::linear_field(v0, phi, gap),
        other => return Err(Error::Input(format!("unknown barrier family {other}")).into()),
    };
    spec.validate()?;
    Ok(spec)
}

fn side(code: u32) -> Result<Side, Failure> {
    match code {
        TN_SIDE_LEFT => Ok(Side::LeftLimit),
        TN_SIDE_RIGHT => Ok(Side::RightLimit),
        TN_SIDE_BULK => Ok(Side::Bulk),
        other => Err(Error::Input(format!("unknown side {other}")).into()),
    }
}

fn to_c(u: &UncertaintyResult) -> TnUncertainty {
    TnUncertainty {
        delta_l: u.delta_l.meters(),
        delta_p: u.delta_p,
        product_over_hbar: u.product_over_hbar,
        n_electrons: u.n_electrons,
        dt_dl: u.dt_dl,
        transmission: u.transmission,
        reflection: u.reflection,
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next `tn_` call on the same thread.
#[no_mangle]
pub extern "C" fn tn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Solve a barrier. On success `*out` owns a new handle.
///
/// # Safety
/// `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn tn_solve(
    family: u32,
    v0_ev: f64,
    phi_ev: f64,
    gap_nm: f64,
    energy_ev: f64,
    out: *mut *mut TnSolution,
) -> TnStatus {
    guard(|| {
        let slot = out_ref(out, "out")?;
        *slot = ptr::null_mut();
        let spec = barrier(family, v0_ev, phi_ev, gap_nm)?;
        let inner = solve(Energy::from_ev(energy_ev), &spec)?;
        *slot = Box::into_raw(Box::new(TnSolution { inner }));
        Ok(())
    })
}

/// Release a handle from [`tn_solve`]. NULL is ignored.
///
/// # Safety
/// `sol` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tn_solution_free(sol: *mut TnSolution) {
    if !sol.is_null() {
        // SAFETY: the handle was created by Box::into_raw in tn_solve.
        drop(unsafe { Box::from_raw(sol) });
    }
}

/// # Safety
/// `sol` must be a live handle or null; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn tn_solution_scattering(
    sol: *const TnSolution,
    out: *mut TnScattering,
) -> TnStatus {
    guard(|| {
        let s = &sol_ref(sol)?.inner;
        *out_ref(out, "out")? = TnScattering {
            transmission: s.transmission,
            reflection: s.reflection,
            ln_transmission: s.ln_transmission,
            t_re: s.t.re,
            t_im: s.t.im,
            r_re: s.r.re,
            r_im: s.r.im,
            k: s.k.per_meter(),
            k_bar: s.k_bar.per_meter(),
            k0: s.k0.per_meter(),
            incident_flux: s.incident_flux,
        };
        Ok(())
    })
}

/// ψ and its first three derivatives at `x_m` (metres).
///
/// # Safety
/// `sol` must be a live handle or null; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn tn_solution_wavefunction(
    sol: *const TnSolution,
    x_m: f64,
    side_code: u32,
    out: *mut TnWavefunction,
) -> TnStatus {
    guard(|| {
        let s = &sol_ref(sol)?.inner;
        let w = s.eval_wavefunction(Length::from_meters(x_m), side(side_code)?)?;
        *out_ref(out, "out")? = TnWavefunction {
            psi_re: w.psi.re,
            psi_im: w.psi.im,
            d1_re: w.d1.re,
            d1_im: w.d1.im,
            d2_re: w.d2.re,
            d2_im: w.d2.im,
            d3_re: w.d3.re,
            d3_im: w.d3.im,
        };
        Ok(())
    })
}

/// Densities and currents at `x_m` (metres).
///
/// # Safety
/// `sol` must be a live handle or null; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn tn_solution_currents(
    sol: *const TnSolution,
    x_m: f64,
    side_code: u32,
    out: *mut TnFluxes,
) -> TnStatus {
    guard(|| {
        let s = &sol_ref(sol)?.inner;
        let f = currents_at(s, Length::from_meters(x_m), side(side_code)?)?;
        *out_ref(out, "out")? = TnFluxes {
            j: f.j,
            j_p: f.j_p,
            j_p2: f.j_p2,
            rho: f.rho,
            rho_p: f.rho_p,
            rho_p2: f.rho_p2,
        };
        Ok(())
    })
}

/// Position and momentum uncertainty for `n_electrons` tunnelling events.
///
/// # Safety
/// `sol` must be a live handle or null; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn tn_solution_uncertainty(
    sol: *const TnSolution,
    n_electrons: f64,
    out: *mut TnUncertainty,
) -> TnStatus {
    guard(|| {
        let s = &sol_ref(sol)?.inner;
        let u = uncertainty_product(s.energy, &s.barrier, n_electrons)?;
        *out_ref(out, "out")? = to_c(&u);
        Ok(())
    })
}

/// Nominal resonator parameters.
#[no_mangle]
pub extern "C" fn tn_resonator_nominal() -> TnResonator {
    let r = ResonatorSpec::NOMINAL;
    TnResonator {
        mass: r.mass,
        f0: r.f0,
        quality: r.quality,
        temperature: r.temperature,
    }
}

/// Force-noise budget at tunnel current `i0_a` (amperes).
///
/// # Safety
/// `resonator` must be null or readable; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn tn_noise_budget(
    i0_a: f64,
    energy_ev: f64,
    family: u32,
    v0_ev: f64,
    phi_ev: f64,
    gap_nm: f64,
    resonator: *const TnResonator,
    out: *mut TnNoiseBudget,
) -> TnStatus {
    guard(|| {
        // SAFETY: the caller promises a valid pointer when non-null.
        let r = unsafe { resonator.as_ref() }.ok_or(Failure::Null("resonator"))?;
        let res = ResonatorSpec {
            mass: r.mass,
            f0: r.f0,
            quality: r.quality,
            temperature: r.temperature,
        };
        let spec = barrier(family, v0_ev, phi_ev, gap_nm)?;
        let b = noise_budget(i0_a, Energy::from_ev(energy_ev), &spec, &res)?;
        *out_ref(out, "out")? = TnNoiseBudget {
            s_fq: b.s_fq,
            s_fl: b.s_fl,
            feasibility_lhs: b.feasibility_lhs,
            psd_ratio: b.psd_ratio,
            shot_psd: b.shot_psd,
        };
        Ok(())
    })
}

/// Ai, Ai′, Bi, Bi′ at `z`.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn tn_airy(z: f64, out: *mut TnAiry) -> TnStatus {
    guard(|| {
        let q = airy_all(z)?;
        *out_ref(out, "out")? = TnAiry {
            ai: q.ai,
            ai_prime: q.ai_prime,
            bi: q.bi,
            bi_prime: q.bi_prime,
        };
        Ok(())
    })
}
