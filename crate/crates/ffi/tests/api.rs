use std::ffi::CStr;
use std::ptr;

use choquard_ffi::*;

fn last_error() -> String {
    let p = chq_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn bubble(size: usize) -> *mut ChqGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { chq_grid_new_bubble(3, 1.0, size, &mut g) }, ChqStatus::Ok);
    g
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(chq_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn constants_round_trip() {
    let mut c = ChqConstants::default();
    assert_eq!(unsafe { chq_constants(3, 2.0, &mut c) }, ChqStatus::Ok);
    assert_eq!(c.two_star_mu, 4.0);
    assert!((c.c_star - 0.370018).abs() < 1e-6);

    chq_clear_last_error();
    assert!(chq_last_error_message().is_null());
    assert_eq!(unsafe { chq_constants(3, 3.5, &mut c) }, ChqStatus::ParameterDomain);
    assert!(last_error().contains("mu"));
    assert_eq!(unsafe { chq_constants(3, 2.0, ptr::null_mut()) }, ChqStatus::NullPointer);
}

#[test]
fn grid_and_profile_functions() {
    let g = bubble(512);
    let n = unsafe { chq_grid_len(g) };
    assert_eq!(n, 512);
    let mut nodes = vec![0.0; n];
    assert_eq!(unsafe { chq_grid_nodes(g, nodes.as_mut_ptr(), n) }, ChqStatus::Ok);
    assert!(nodes.windows(2).all(|w| w[0] < w[1]));

    let mut u = vec![0.0; n];
    assert_eq!(unsafe { chq_umu_profile(g, 2.0, 1.0, u.as_mut_ptr(), n) }, ChqStatus::Ok);
    let mut res = f64::NAN;
    assert_eq!(unsafe { chq_pde_residual(g, 2.0, u.as_ptr(), n, &mut res) }, ChqStatus::Ok);
    assert!(res < 1e-4, "{res}");
    let mut q = f64::NAN;
    assert_eq!(unsafe { chq_rayleigh_quotient(g, 2.0, u.as_ptr(), n, &mut q) }, ChqStatus::Ok);
    let mut c = ChqConstants::default();
    unsafe { chq_constants(3, 2.0, &mut c) };
    assert!((q - c.s_star_hl).abs() / c.s_star_hl < 1e-4);

    let mut conv = vec![0.0; n];
    assert_eq!(unsafe { chq_riesz_convolve(g, 2.0, u.as_ptr(), conv.as_mut_ptr(), n, 1) }, ChqStatus::Ok);
    assert!(conv.iter().all(|v| *v > 0.0));

    assert_eq!(unsafe { chq_umu_profile(g, 2.0, 1.0, u.as_mut_ptr(), n - 1) }, ChqStatus::LengthMismatch);
    assert_eq!(unsafe { chq_pde_residual(ptr::null(), 2.0, u.as_ptr(), n, &mut res) }, ChqStatus::NullPointer);
    unsafe { chq_grid_free(g) };
    unsafe { chq_grid_free(ptr::null_mut()) };
    assert_eq!(unsafe { chq_grid_len(ptr::null()) }, 0);
}

#[test]
fn invalid_grids_are_reported() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { chq_grid_new(3, -1.0, 64, ChqMapping::Algebraic, &mut g) }, ChqStatus::InvalidGrid);
    assert!(g.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { chq_grid_new(3, 10.0, 64, ChqMapping::Log, &mut g) }, ChqStatus::Ok);
    unsafe { chq_grid_free(g) };
}

#[test]
fn spectrum_report_handle() {
    let g = bubble(256);
    let opts = ChqSpectrumOptions { ell_max: 3, ..chq_spectrum_options_default() };
    let mut rep = ptr::null_mut();
    assert_eq!(unsafe { chq_spectrum_report_new(g, 2.9, 1.0, &opts, &mut rep) }, ChqStatus::Ok);
    assert_eq!(unsafe { chq_spectrum_kernel_dimension(rep) }, 4);
    assert_eq!(unsafe { chq_spectrum_verdict(rep) }, ChqVerdict::Nondegenerate);
    assert_eq!(unsafe { chq_spectrum_sector_count(rep) }, 4);
    assert!(unsafe { chq_spectrum_tau(rep) } > 0.0);

    let mut count = 0;
    assert_eq!(unsafe { chq_spectrum_eigenvalues(rep, 0, ptr::null_mut(), 0, &mut count) }, ChqStatus::Ok);
    let mut vals = vec![0.0; count];
    assert_eq!(unsafe { chq_spectrum_eigenvalues(rep, 0, vals.as_mut_ptr(), count, &mut count) }, ChqStatus::Ok);
    assert!(vals[0] < 0.0);
    assert_eq!(unsafe { chq_spectrum_eigenvalues(rep, 9, vals.as_mut_ptr(), count, &mut count) }, ChqStatus::ParameterDomain);

    let mut needed = 0;
    assert_eq!(unsafe { chq_spectrum_report_json(rep, ptr::null_mut(), 0, &mut needed) }, ChqStatus::BufferTooSmall);
    let mut buf = vec![0 as std::ffi::c_char; needed];
    assert_eq!(unsafe { chq_spectrum_report_json(rep, buf.as_mut_ptr(), needed, &mut needed) }, ChqStatus::Ok);
    let text = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    assert_eq!(v["kernel_dimension"], 4);

    let bad = ChqSpectrumOptions { ell_max: 1, ..opts };
    let mut none = ptr::null_mut();
    assert_eq!(unsafe { chq_spectrum_report_new(g, 2.9, 1.0, &bad, &mut none) }, ChqStatus::ParameterDomain);
    assert!(none.is_null());
    unsafe {
        chq_spectrum_report_free(rep);
        chq_grid_free(g);
    }
}
