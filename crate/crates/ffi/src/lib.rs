//! C ABI for `choquard-core`.
//!
//! Conventions:
//! - every fallible function returns a [`ChqStatus`]; on failure the message is
//!   available from [`chq_last_error_message`] on the same thread;
//! - objects are opaque handles created by `chq_*_new` and released by the
//!   matching `chq_*_free` (which accepts `NULL`);
//! - arrays are caller-allocated and passed as `(pointer, length)`; the length
//!   must match the grid size exactly;
//! - strings are copied into caller buffers; the required size including the
//!   terminating NUL is always reported, so a first call with `cap = 0` sizes
//!   the buffer.
//!
//! Panics never cross the boundary: they are reported as [`ChqStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use choquard_core::constants::{ConstantBundle, ProblemParams};
use choquard_core::linearization::{nondegeneracy_report, umu_bubble, SpectrumOptions, SpectrumReport, Verdict};
use choquard_core::radial::{bubble_grid, make_grid, Mapping, RadialFunction, RadialGrid};
use choquard_core::riesz::riesz_convolve;
use choquard_core::system::{pde_residual, rayleigh_quotient, umu_profile};
use choquard_core::Error;

/// Result code of every fallible call.
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChqStatus {
    Ok = 0,
    NullPointer = 1,
    LengthMismatch = 2,
    BufferTooSmall = 3,
    ParameterDomain = 4,
    InvalidGrid = 5,
    GridMismatch = 6,
    Domain = 7,
    SingularPoint = 8,
    QuadratureNonconvergence = 9,
    FitSingular = 10,
    EigenBreakdown = 11,
    ExponentRelation = 12,
    NonConvergence = 13,
    Divergence = 14,
    Cache = 15,
    Config = 16,
    Io = 17,
    Panic = 18,
}

impl From<&Error> for ChqStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::ParameterDomain(_) => Self::ParameterDomain,
            Error::InvalidGrid(_) => Self::InvalidGrid,
            Error::GridMismatch => Self::GridMismatch,
            Error::Domain(_) => Self::Domain,
            Error::SingularPoint(_) => Self::SingularPoint,
            Error::QuadratureNonconvergence(_) => Self::QuadratureNonconvergence,
            Error::FitSingular(_) => Self::FitSingular,
            Error::EigenBreakdown(_) => Self::EigenBreakdown,
            Error::ExponentRelation(_) => Self::ExponentRelation,
            Error::NonConvergence { .. } => Self::NonConvergence,
            Error::Divergence(_) => Self::Divergence,
            Error::Cache(_) => Self::Cache,
            Error::Config(_) => Self::Config,
            Error::Io(_) | Error::Json(_) => Self::Io,
        }
    }
}

/// Radial mapping of a grid.
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChqMapping {
    Log = 0,
    Algebraic = 1,
}

/// Outcome of a nondegeneracy run.
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChqVerdict {
    Nondegenerate = 0,
    Degenerate = 1,
    Inconclusive = 2,
}

/// Closed-form constants of a `(N, mu)` pair.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct ChqConstants {
    pub two_star_mu: f64,
    pub riesz_norm: f64,
    pub hls_sharp: f64,
    pub c_star: f64,
    pub sobolev: f64,
    pub s_star_hl: f64,
    pub bubble_amplitude: f64,
}

/// Options of [`chq_spectrum_report_new`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ChqSpectrumOptions {
    /// Highest spherical-harmonic degree, at least 2.
    pub ell_max: usize,
    /// Zero tolerance; a non-positive or NaN value selects automatic calibration.
    pub tau: f64,
    /// Eigenvalues kept per sector.
    pub keep: usize,
}

/// Opaque radial grid.
pub struct ChqGrid {
    inner: Arc<RadialGrid>,
}

/// Opaque spectrum report.
pub struct ChqSpectrumReport {
    inner: SpectrumReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(ChqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(ChqStatus::from(&e), e.to_string())
    }
}

type FfiResult<T> = std::result::Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> ChqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ChqStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ChqStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(ChqStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn input_slice<'a>(p: *const f64, len: usize, want: usize, what: &str) -> FfiResult<&'a [f64]> {
    if p.is_null() {
        return Err(null(what));
    }
    if len != want {
        return Err(Failure(ChqStatus::LengthMismatch, format!("{what} has length {len}, grid has {want} nodes")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn output_slice<'a>(p: *mut f64, len: usize, want: usize, what: &str) -> FfiResult<&'a mut [f64]> {
    if p.is_null() {
        return Err(null(what));
    }
    if len != want {
        return Err(Failure(ChqStatus::LengthMismatch, format!("{what} has length {len}, expected {want}")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write_string(s: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> FfiResult<()> {
    let bytes = s.as_bytes();
    if let Some(n) = needed.as_mut() {
        *n = bytes.len() + 1;
    }
    if cap < bytes.len() + 1 {
        return Err(Failure(ChqStatus::BufferTooSmall, format!("buffer holds {cap} bytes, {} needed", bytes.len() + 1)));
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, bytes.len());
    *buf.add(bytes.len()) = 0;
    Ok(())
}

fn params(n: usize, mu: f64) -> FfiResult<ProblemParams> {
    Ok(ProblemParams::new(n, mu)?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn chq_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string contains NUL"),
    };
    VERSION.as_ptr()
}

/// Message of the last failed call on this thread, or `NULL` if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn chq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Forget the last error message of this thread.
#[no_mangle]
pub extern "C" fn chq_clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Fill `out` with the constants of dimension `n` and exponent `mu`.
///
/// # Safety
/// `out` must be NULL or point to writable memory for one `ChqConstants`.
#[no_mangle]
pub unsafe extern "C" fn chq_constants(n: usize, mu: f64, out: *mut ChqConstants) -> ChqStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let b = ConstantBundle::compute(&params(n, mu)?)?;
        *out = ChqConstants {
            two_star_mu: b.two_star_mu,
            riesz_norm: b.riesz_norm,
            hls_sharp: b.hls_sharp,
            c_star: b.c_star,
            sobolev: b.sobolev,
            s_star_hl: b.s_star_hl,
            bubble_amplitude: b.bubble_amp,
        };
        Ok(())
    })
}

/// Grid of `size` nodes on `[0, cutoff]` in dimension `dim`.
///
/// # Safety
/// `out` must be NULL or point to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn chq_grid_new(
    dim: usize,
    cutoff: f64,
    size: usize,
    mapping: ChqMapping,
    out: *mut *mut ChqGrid,
) -> ChqStatus {
    guard(|| {
        let slot = out.as_mut().ok_or_else(|| null("out"))?;
        let mapping = match mapping {
            ChqMapping::Log => Mapping::Log,
            ChqMapping::Algebraic => Mapping::Algebraic,
        };
        let grid = make_grid(dim, cutoff, size, mapping)?;
        *slot = Box::into_raw(Box::new(ChqGrid { inner: Arc::new(grid) }));
        Ok(())
    })
}

/// Logarithmic grid sized for a bubble of width `width`.
///
/// # Safety
/// `out` must be NULL or point to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn chq_grid_new_bubble(dim: usize, width: f64, size: usize, out: *mut *mut ChqGrid) -> ChqStatus {
    guard(|| {
        let slot = out.as_mut().ok_or_else(|| null("out"))?;
        let grid = bubble_grid(dim, width, size)?;
        *slot = Box::into_raw(Box::new(ChqGrid { inner: grid }));
        Ok(())
    })
}

/// Release a grid.
///
/// # Safety
/// `grid` must be NULL or a handle from `chq_grid_new*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn chq_grid_free(grid: *mut ChqGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of nodes, or 0 for a NULL handle.
///
/// # Safety
/// `grid` must be NULL or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn chq_grid_len(grid: *const ChqGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.inner.len())
}

/// Copy the node radii into `out[0..len]`.
///
/// # Safety
/// `grid` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn chq_grid_nodes(grid: *const ChqGrid, out: *mut f64, len: usize) -> ChqStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        output_slice(out, len, g.inner.len(), "out")?.copy_from_slice(g.inner.nodes());
        Ok(())
    })
}

/// Nodal values of the explicit solution of width `t` for `(dim(grid), mu)`.
///
/// # Safety
/// `grid` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn chq_umu_profile(grid: *const ChqGrid, mu: f64, t: f64, out: *mut f64, len: usize) -> ChqStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let p = params(g.inner.dim(), mu)?;
        let u = umu_profile(&p, &g.inner, t)?;
        output_slice(out, len, g.inner.len(), "out")?.copy_from_slice(u.values());
        Ok(())
    })
}

unsafe fn profile(g: &ChqGrid, values: *const f64, len: usize) -> FfiResult<RadialFunction> {
    let v = input_slice(values, len, g.inner.len(), "values")?;
    Ok(RadialFunction::new(g.inner.clone(), v.to_vec())?)
}

/// Weak residual of the scalar equation at the profile `values`.
///
/// # Safety
/// `grid` must be a live handle, `values` must hold `len` doubles and
/// `residual` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chq_pde_residual(
    grid: *const ChqGrid,
    mu: f64,
    values: *const f64,
    len: usize,
    residual: *mut f64,
) -> ChqStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let out = residual.as_mut().ok_or_else(|| null("residual"))?;
        let p = params(g.inner.dim(), mu)?;
        *out = pde_residual(&p, &profile(g, values, len)?)?;
        Ok(())
    })
}

/// Rayleigh quotient of the profile `values`.
///
/// # Safety
/// As for [`chq_pde_residual`].
#[no_mangle]
pub unsafe extern "C" fn chq_rayleigh_quotient(
    grid: *const ChqGrid,
    mu: f64,
    values: *const f64,
    len: usize,
    quotient: *mut f64,
) -> ChqStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let out = quotient.as_mut().ok_or_else(|| null("quotient"))?;
        let p = params(g.inner.dim(), mu)?;
        *out = rayleigh_quotient(&p, &profile(g, values, len)?)?;
        Ok(())
    })
}

/// Riesz potential of the radial profile `values`, written to `out`.
/// With `normalized` nonzero the kernel carries the normalizing constant.
///
/// # Safety
/// `grid` must be a live handle; `values` and `out` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn chq_riesz_convolve(
    grid: *const ChqGrid,
    mu: f64,
    values: *const f64,
    out: *mut f64,
    len: usize,
    normalized: i32,
) -> ChqStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let p = params(g.inner.dim(), mu)?;
        let conv = riesz_convolve(&p, &profile(g, values, len)?, normalized != 0)?;
        output_slice(out, len, g.inner.len(), "out")?.copy_from_slice(conv.values());
        Ok(())
    })
}

/// Default options: `ell_max = 6`, automatic `tau`, six eigenvalues per sector.
#[no_mangle]
pub extern "C" fn chq_spectrum_options_default() -> ChqSpectrumOptions {
    let d = SpectrumOptions::default();
    ChqSpectrumOptions {
        ell_max: d.ell_max,
        tau: f64::NAN,
        keep: d.keep,
    }
}

/// Linearize at the solution of width `t` on `grid` and classify its kernel.
///
/// # Safety
/// `grid` must be a live handle, `opts` NULL (defaults) or valid, and `out`
/// writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn chq_spectrum_report_new(
    grid: *const ChqGrid,
    mu: f64,
    t: f64,
    opts: *const ChqSpectrumOptions,
    out: *mut *mut ChqSpectrumReport,
) -> ChqStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let slot = out.as_mut().ok_or_else(|| null("out"))?;
        let o = opts.as_ref().copied().unwrap_or_else(|| chq_spectrum_options_default());
        let p = params(g.inner.dim(), mu)?;
        let b = umu_bubble(&p, t)?;
        let options = SpectrumOptions {
            ell_max: o.ell_max,
            tau: (o.tau > 0.0).then_some(o.tau),
            keep: o.keep,
        };
        let report = nondegeneracy_report(&p, &b, &g.inner, &options)?;
        *slot = Box::into_raw(Box::new(ChqSpectrumReport { inner: report }));
        Ok(())
    })
}

/// Release a report.
///
/// # Safety
/// `report` must be NULL or a handle from [`chq_spectrum_report_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn chq_spectrum_report_free(report: *mut ChqSpectrumReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Summed multiplicity of the zero modes, or 0 for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chq_spectrum_kernel_dimension(report: *const ChqSpectrumReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.kernel_dimension)
}

/// Verdict of the report; NULL reads as inconclusive.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chq_spectrum_verdict(report: *const ChqSpectrumReport) -> ChqVerdict {
    match report.as_ref().map(|r| r.inner.verdict) {
        Some(Verdict::Nondegenerate) => ChqVerdict::Nondegenerate,
        Some(Verdict::Degenerate) => ChqVerdict::Degenerate,
        _ => ChqVerdict::Inconclusive,
    }
}

/// Zero tolerance used by the report, NaN for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chq_spectrum_tau(report: *const ChqSpectrumReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.inner.tau)
}

/// Number of sectors in the report (`ell_max + 1`), 0 for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chq_spectrum_sector_count(report: *const ChqSpectrumReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.sectors.len())
}

/// Copy the smallest eigenvalues of sector `ell` into `out`, at most `cap`
/// of them; the number available is stored in `count`.
///
/// # Safety
/// `report` must be a live handle, `out` must hold `cap` doubles (may be NULL
/// when `cap == 0`) and `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chq_spectrum_eigenvalues(
    report: *const ChqSpectrumReport,
    ell: usize,
    out: *mut f64,
    cap: usize,
    count: *mut usize,
) -> ChqStatus {
    guard(|| {
        let r = deref(report, "report")?;
        let count = count.as_mut().ok_or_else(|| null("count"))?;
        let sector = r.inner.sectors.get(ell).ok_or_else(|| {
            Failure(ChqStatus::ParameterDomain, format!("sector {ell} not in report (ell_max {})", r.inner.sectors.len() - 1))
        })?;
        *count = sector.eigenvalues.len();
        let k = cap.min(sector.eigenvalues.len());
        if k > 0 {
            if out.is_null() {
                return Err(null("out"));
            }
            std::slice::from_raw_parts_mut(out, k).copy_from_slice(&sector.eigenvalues[..k]);
        }
        Ok(())
    })
}

/// Serialize the full report as JSON into `buf`.
///
/// # Safety
/// `report` must be a live handle, `buf` must hold `cap` bytes (may be NULL
/// when `cap == 0`) and `needed` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn chq_spectrum_report_json(
    report: *const ChqSpectrumReport,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> ChqStatus {
    guard(|| {
        let r = deref(report, "report")?;
        let text = serde_json::to_string(&r.inner).map_err(|e| Failure(ChqStatus::Io, e.to_string()))?;
        write_string(&text, buf, cap, needed)
    })
}
