//! C ABI over the solver pipelines.
//!
//! All objects cross the boundary as opaque handles created and
//! destroyed here; every function returns an `NlsStatus` and writes its
//! results through out-pointers. Field data is copied into caller
//! buffers, and JSON summaries are available as C strings for bindings
//! that prefer structured records. Panics never unwind across the
//! boundary.

use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use nls_core::functional::SystemParams;
use nls_core::grid::{GridKind, RadialGrid};
use nls_core::soliton::ScalarSoliton;
use nls_core::solver::{self, SolveOptions, SolveReport};
use nls_core::{conditions, grid, soliton, Error};

/// Status codes mirroring the library's error classes.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum NlsStatus {
    Ok = 0,
    ConfigError = 2,
    InvalidParameter = 3,
    NoConvergence = 4,
    NoMaximizer = 5,
    DegenerateComponent = 6,
    ShapeMismatch = 7,
    TooLargeK = 8,
    IoError = 9,
    NullPointer = 10,
    Panic = 11,
}

impl From<&Error> for NlsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::ConfigParse(_) => NlsStatus::ConfigError,
            Error::InvalidParameter(_) => NlsStatus::InvalidParameter,
            Error::NoConvergence(_) => NlsStatus::NoConvergence,
            Error::NoMaximizer(_) => NlsStatus::NoMaximizer,
            Error::DegenerateComponent { .. } => NlsStatus::DegenerateComponent,
            Error::ShapeMismatch(_) => NlsStatus::ShapeMismatch,
            Error::TooLargeK { .. } => NlsStatus::TooLargeK,
            Error::Io(_) => NlsStatus::IoError,
        }
    }
}

/// Opaque problem data (exponent, couplings, masses).
pub struct NlsParams {
    inner: SystemParams,
}

/// Opaque radial grid.
pub struct NlsGrid {
    inner: Arc<RadialGrid>,
}

/// Opaque scalar soliton profile.
pub struct NlsSoliton {
    inner: ScalarSoliton,
}

/// Opaque solve report (state plus diagnostics).
pub struct NlsReport {
    inner: SolveReport,
}

/// Scalar summary of a soliton solve.
#[repr(C)]
pub struct NlsSolitonInfo {
    pub w0: f64,
    pub mass_sq: f64,
    pub grad_sq: f64,
    pub lp_norm_p: f64,
    pub boundary_value: f64,
    pub nehari_residual: f64,
    pub pohozaev_residual: f64,
    pub gn_constant: f64,
}

/// Outcome of a closed-form condition check.
#[repr(C)]
pub struct NlsCondition {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// 1 when lhs < rhs.
    pub satisfied: i32,
}

fn guarded(f: impl FnOnce() -> NlsStatus + std::panic::UnwindSafe) -> NlsStatus {
    catch_unwind(f).unwrap_or(NlsStatus::Panic)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> NlsStatus {
    if out.is_null() {
        return NlsStatus::NullPointer;
    }
    out.write(value);
    NlsStatus::Ok
}

/// Create problem data from a row-major k×k coupling matrix and k masses.
///
/// # Safety
/// `beta` must point to k·k doubles, `rho` to k doubles, and `out` must
/// be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn nls_params_new(
    p: f64,
    beta: *const f64,
    rho: *const f64,
    k: usize,
    out: *mut *mut NlsParams,
) -> NlsStatus {
    if beta.is_null() || rho.is_null() || out.is_null() {
        return NlsStatus::NullPointer;
    }
    let beta_slice = std::slice::from_raw_parts(beta, k * k);
    let rho_slice = std::slice::from_raw_parts(rho, k);
    guarded(AssertUnwindSafe(|| {
        let matrix: Vec<Vec<f64>> = (0..k)
            .map(|i| beta_slice[i * k..(i + 1) * k].to_vec())
            .collect();
        match SystemParams::new(p, matrix, rho_slice.to_vec()) {
            Ok(inner) => {
                write_out(out, Box::into_raw(Box::new(NlsParams { inner })))
            }
            Err(e) => (&e).into(),
        }
    }))
}

/// # Safety
/// `handle` must come from `nls_params_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nls_params_free(handle: *mut NlsParams) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Create a radial grid; `kind` is 0 for uniform, 1 for graded.
///
/// # Safety
/// `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn nls_grid_new(
    n: usize,
    r_max: f64,
    kind: i32,
    out: *mut *mut NlsGrid,
) -> NlsStatus {
    guarded(AssertUnwindSafe(|| {
        let kind = if kind == 0 { GridKind::Uniform } else { GridKind::Graded };
        match grid::make_grid(n, r_max, kind) {
            Ok(inner) => write_out(out, Box::into_raw(Box::new(NlsGrid { inner }))),
            Err(e) => (&e).into(),
        }
    }))
}

/// # Safety
/// `handle` must come from `nls_grid_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nls_grid_free(handle: *mut NlsGrid) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Shooting solve of the scalar ground-state profile.
///
/// # Safety
/// `grid` must be a live grid handle; `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn nls_solve_kwong(
    p: f64,
    grid: *const NlsGrid,
    tol: f64,
    out: *mut *mut NlsSoliton,
) -> NlsStatus {
    if grid.is_null() {
        return NlsStatus::NullPointer;
    }
    let g = &(*grid).inner;
    guarded(AssertUnwindSafe(|| match soliton::solve_kwong(p, g, tol) {
        Ok(inner) => write_out(out, Box::into_raw(Box::new(NlsSoliton { inner }))),
        Err(e) => (&e).into(),
    }))
}

/// # Safety
/// `handle` must be live; `info` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn nls_soliton_info(
    handle: *const NlsSoliton,
    info: *mut NlsSolitonInfo,
) -> NlsStatus {
    if handle.is_null() || info.is_null() {
        return NlsStatus::NullPointer;
    }
    let s = &(*handle).inner;
    info.write(NlsSolitonInfo {
        w0: s.w0(),
        mass_sq: s.mass_sq(),
        grad_sq: s.grad_sq(),
        lp_norm_p: s.lp_norm_p(),
        boundary_value: s.boundary_value(),
        nehari_residual: s.nehari_residual(),
        pohozaev_residual: s.pohozaev_residual(),
        gn_constant: soliton::gn_constant(s.p(), s),
    });
    NlsStatus::Ok
}

/// # Safety
/// `handle` must come from `nls_solve_kwong` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nls_soliton_free(handle: *mut NlsSoliton) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Ground-state solve on a problem-adapted grid with default options.
///
/// # Safety
/// `params` must be live; `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn nls_ground_state(
    params: *const NlsParams,
    seed: u64,
    out: *mut *mut NlsReport,
) -> NlsStatus {
    if params.is_null() {
        return NlsStatus::NullPointer;
    }
    let p = &(*params).inner;
    guarded(AssertUnwindSafe(|| {
        let run = || -> nls_core::Result<SolveReport> {
            let kwong = soliton::reference_kwong(p.p())?;
            let grid = solver::default_grid(p, &kwong)?;
            let scales = solver::component_scales(p, &kwong)?;
            let init = solver::seeded_state(p, &grid, &scales, &[1.0], &[0.0])?;
            let opts = SolveOptions { seed, ..Default::default() };
            solver::minimize_on_sm(p, &init, &opts)
        };
        match run() {
            Ok(inner) => write_out(out, Box::into_raw(Box::new(NlsReport { inner }))),
            Err(e) => (&e).into(),
        }
    }))
}

/// # Safety
/// `handle` must be live.
#[no_mangle]
pub unsafe extern "C" fn nls_report_energy(handle: *const NlsReport) -> f64 {
    if handle.is_null() {
        return f64::NAN;
    }
    (*handle).inner.energy
}

/// # Safety
/// `handle` must be live.
#[no_mangle]
pub unsafe extern "C" fn nls_report_converged(handle: *const NlsReport) -> i32 {
    if handle.is_null() {
        return 0;
    }
    (*handle).inner.converged as i32
}

/// # Safety
/// `handle` must be live.
#[no_mangle]
pub unsafe extern "C" fn nls_report_el_residual(handle: *const NlsReport) -> f64 {
    if handle.is_null() {
        return f64::NAN;
    }
    (*handle).inner.el_residual
}

/// Number of components in the report's state.
///
/// # Safety
/// `handle` must be live.
#[no_mangle]
pub unsafe extern "C" fn nls_report_components(handle: *const NlsReport) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).inner.state.k()
}

/// Multiplier λ_i of component i (NaN when out of range).
///
/// # Safety
/// `handle` must be live.
#[no_mangle]
pub unsafe extern "C" fn nls_report_lambda(handle: *const NlsReport, i: usize) -> f64 {
    if handle.is_null() {
        return f64::NAN;
    }
    let lambda: &[f64] = &(*handle).inner.lambda;
    lambda.get(i).copied().unwrap_or(f64::NAN)
}

/// Number of grid nodes carried by the report's state.
///
/// # Safety
/// `handle` must be live.
#[no_mangle]
pub unsafe extern "C" fn nls_report_len(handle: *const NlsReport) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).inner.state.grid().len()
}

/// Copy node radii and component-i samples into caller buffers of
/// length `len` (`nls_report_len`).
///
/// # Safety
/// `radii` and `values` must point to at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nls_report_component(
    handle: *const NlsReport,
    i: usize,
    radii: *mut f64,
    values: *mut f64,
    len: usize,
) -> NlsStatus {
    if handle.is_null() || radii.is_null() || values.is_null() {
        return NlsStatus::NullPointer;
    }
    let report = &(*handle).inner;
    if i >= report.state.k() || len != report.state.grid().len() {
        return NlsStatus::ShapeMismatch;
    }
    let nodes = report.state.grid().nodes();
    let vals = report.state.component(i).values();
    std::ptr::copy_nonoverlapping(nodes.as_ptr(), radii, len);
    std::ptr::copy_nonoverlapping(vals.as_ptr(), values, len);
    NlsStatus::Ok
}

/// JSON summary of the report (energy, residuals, multipliers, masses);
/// free with `nls_string_free`.
///
/// # Safety
/// `handle` must be live; `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn nls_report_summary_json(
    handle: *const NlsReport,
    out: *mut *mut c_char,
) -> NlsStatus {
    if handle.is_null() || out.is_null() {
        return NlsStatus::NullPointer;
    }
    let summary = (*handle).inner.summary();
    match serde_json::to_string(&summary) {
        Ok(text) => match CString::new(text) {
            Ok(cstr) => write_out(out, cstr.into_raw()),
            Err(_) => NlsStatus::Panic,
        },
        Err(_) => NlsStatus::Panic,
    }
}

/// # Safety
/// `handle` must come from `nls_ground_state` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nls_report_free(handle: *mut NlsReport) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `s` must come from `nls_report_summary_json`.
#[no_mangle]
pub unsafe extern "C" fn nls_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Evaluate the subset existence condition for the given problem.
///
/// # Safety
/// `params` must be live; `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn nls_check_betacond(
    params: *const NlsParams,
    out: *mut NlsCondition,
) -> NlsStatus {
    if params.is_null() || out.is_null() {
        return NlsStatus::NullPointer;
    }
    let p = &(*params).inner;
    guarded(AssertUnwindSafe(|| match conditions::check_betacond(p) {
        Ok(rep) => {
            out.write(NlsCondition {
                lhs: rep.lhs,
                rhs: rep.rhs,
                margin: rep.margin,
                satisfied: rep.satisfied as i32,
            });
            NlsStatus::Ok
        }
        Err(e) => (&e).into(),
    }))
}

/// Decoupled ground-state levels c_i written into a caller buffer of
/// length k.
///
/// # Safety
/// `params` must be live; `levels` must point to k doubles.
#[no_mangle]
pub unsafe extern "C" fn nls_decoupled_levels(
    params: *const NlsParams,
    levels: *mut f64,
    k: usize,
) -> NlsStatus {
    if params.is_null() || levels.is_null() {
        return NlsStatus::NullPointer;
    }
    let p = &(*params).inner;
    if k != p.k() {
        return NlsStatus::ShapeMismatch;
    }
    guarded(AssertUnwindSafe(|| {
        let run = || -> nls_core::Result<Vec<f64>> {
            let kwong = soliton::reference_kwong(p.p())?;
            let grid = solver::decoupled_grid(p, &kwong)?;
            soliton::decoupled_levels(p, &grid)
        };
        match run() {
            Ok(vals) => {
                std::ptr::copy_nonoverlapping(vals.as_ptr(), levels, k);
                NlsStatus::Ok
            }
            Err(e) => (&e).into(),
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_round_trip_and_validation() {
        let beta = [1.0, 0.5, 0.5, 1.0];
        let rho = [1.0, 1.0];
        let mut handle: *mut NlsParams = std::ptr::null_mut();
        let status = unsafe { nls_params_new(4.0, beta.as_ptr(), rho.as_ptr(), 2, &mut handle) };
        assert!(status == NlsStatus::Ok);
        assert!(!handle.is_null());
        unsafe { nls_params_free(handle) };

        // asymmetric matrix rejected
        let bad = [1.0, 0.5, 0.6, 1.0];
        let mut handle: *mut NlsParams = std::ptr::null_mut();
        let status = unsafe { nls_params_new(4.0, bad.as_ptr(), rho.as_ptr(), 2, &mut handle) };
        assert!(status == NlsStatus::InvalidParameter);

        // null pointers rejected
        let status =
            unsafe { nls_params_new(4.0, std::ptr::null(), rho.as_ptr(), 2, &mut handle) };
        assert!(status == NlsStatus::NullPointer);
    }

    #[test]
    fn soliton_solve_through_the_c_surface() {
        let mut grid: *mut NlsGrid = std::ptr::null_mut();
        assert!(unsafe { nls_grid_new(4096, 20.0, 0, &mut grid) } == NlsStatus::Ok);
        let mut sol: *mut NlsSoliton = std::ptr::null_mut();
        assert!(unsafe { nls_solve_kwong(4.0, grid, 1e-8, &mut sol) } == NlsStatus::Ok);
        let mut info = NlsSolitonInfo {
            w0: 0.0,
            mass_sq: 0.0,
            grad_sq: 0.0,
            lp_norm_p: 0.0,
            boundary_value: 0.0,
            nehari_residual: 0.0,
            pohozaev_residual: 0.0,
            gn_constant: 0.0,
        };
        assert!(unsafe { nls_soliton_info(sol, &mut info) } == NlsStatus::Ok);
        assert!((info.w0 - 4.33738768).abs() < 1e-6);
        assert!(info.nehari_residual < 1e-6);
        assert!(info.gn_constant > 0.4 && info.gn_constant < 0.5);
        unsafe {
            nls_soliton_free(sol);
            nls_grid_free(grid);
        }

        // bad exponent surfaces as a status code
        let mut grid: *mut NlsGrid = std::ptr::null_mut();
        assert!(unsafe { nls_grid_new(1024, 20.0, 0, &mut grid) } == NlsStatus::Ok);
        let mut sol: *mut NlsSoliton = std::ptr::null_mut();
        assert!(
            unsafe { nls_solve_kwong(3.0, grid, 1e-8, &mut sol) }
                == NlsStatus::InvalidParameter
        );
        unsafe { nls_grid_free(grid) };
    }

    #[test]
    fn ground_state_and_condition_through_the_c_surface() {
        let beta = [1.0, 5.0, 5.0, 1.0];
        let rho = [1.0, 1.0];
        let mut params: *mut NlsParams = std::ptr::null_mut();
        assert!(
            unsafe { nls_params_new(4.0, beta.as_ptr(), rho.as_ptr(), 2, &mut params) }
                == NlsStatus::Ok
        );

        let mut cond = NlsCondition { lhs: 0.0, rhs: 0.0, margin: 0.0, satisfied: 0 };
        assert!(unsafe { nls_check_betacond(params, &mut cond) } == NlsStatus::Ok);
        assert_eq!(cond.satisfied, 1); // β = 5 is far above √2 − 1

        let mut report: *mut NlsReport = std::ptr::null_mut();
        assert!(unsafe { nls_ground_state(params, 0, &mut report) } == NlsStatus::Ok);
        assert_eq!(unsafe { nls_report_converged(report) }, 1);
        let energy = unsafe { nls_report_energy(report) };

        let mut levels = [0.0f64; 2];
        assert!(
            unsafe { nls_decoupled_levels(params, levels.as_mut_ptr(), 2) } == NlsStatus::Ok
        );
        assert!(
            energy < levels[0].min(levels[1]),
            "coupled ground {energy} below decoupled {levels:?}"
        );

        // field extraction
        let len = unsafe { nls_report_len(report) };
        assert!(len > 0);
        let mut radii = vec![0.0; len];
        let mut values = vec![0.0; len];
        assert!(
            unsafe {
                nls_report_component(report, 0, radii.as_mut_ptr(), values.as_mut_ptr(), len)
            } == NlsStatus::Ok
        );
        assert!(values.iter().any(|&v| v > 0.0));
        assert!(radii.windows(2).all(|w| w[1] > w[0]));

        // JSON summary
        let mut text: *mut c_char = std::ptr::null_mut();
        assert!(unsafe { nls_report_summary_json(report, &mut text) } == NlsStatus::Ok);
        let json = unsafe { std::ffi::CStr::from_ptr(text) }.to_str().unwrap();
        assert!(json.contains("\"energy\""));
        unsafe {
            nls_string_free(text);
            nls_report_free(report);
            nls_params_free(params);
        }
    }

    #[test]
    fn generated_header_exists_and_declares_the_surface() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("include")
            .join("nls.h");
        let text = std::fs::read_to_string(header).expect("cbindgen header present");
        for symbol in [
            "nls_params_new",
            "nls_ground_state",
            "nls_report_energy",
            "nls_check_betacond",
            "NlsStatus",
            "NlsSolitonInfo",
        ] {
            assert!(text.contains(symbol), "header missing {symbol}");
        }
    }
}
