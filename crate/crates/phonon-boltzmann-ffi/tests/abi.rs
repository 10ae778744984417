use std::ffi::{CStr, CString};
use std::ptr;

use phonon_boltzmann_ffi::*;

fn assemble(n: usize) -> *mut PhononKernel {
    let mut handle: *mut PhononKernel = ptr::null_mut();
    let status = unsafe { phonon_kernel_assemble(n, 1e-8, &mut handle) };
    assert_eq!(status, PhononStatus::Ok);
    assert!(!handle.is_null());
    handle
}

#[test]
fn assemble_query_free() {
    let handle = assemble(24);
    unsafe {
        let mut n = 0usize;
        assert_eq!(phonon_kernel_size(handle, &mut n), PhononStatus::Ok);
        assert_eq!(n, 24);

        let (mut v0, mut c1, mut c2) = (0.0, 0.0, 0.0);
        assert_eq!(
            phonon_kernel_stats(handle, &mut v0, &mut c1, &mut c2),
            PhononStatus::Ok
        );
        assert!(v0 > 1.0 && v0 < 2.0, "v0 = {v0}");
        assert!(0.0 < c1 && c1 < c2);

        let (mut kij, mut kji) = (0.0, 0.0);
        assert_eq!(phonon_kernel_entry(handle, 3, 17, &mut kij), PhononStatus::Ok);
        assert_eq!(phonon_kernel_entry(handle, 17, 3, &mut kji), PhononStatus::Ok);
        assert_eq!(kij, kji);

        let mut node = 0.0;
        assert_eq!(phonon_kernel_node(handle, 0, &mut node), PhononStatus::Ok);
        assert_eq!(node, -0.5 + 0.5 / 24.0);

        let mut v = 0.0;
        assert_eq!(phonon_kernel_frequency(handle, 11, &mut v), PhononStatus::Ok);
        assert!(v > 0.0);

        phonon_kernel_free(handle);
    }
}

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(
        dir.path().join("table.phnk").to_str().unwrap(),
    )
    .unwrap();

    let handle = assemble(16);
    unsafe {
        assert_eq!(phonon_kernel_save(handle, path.as_ptr()), PhononStatus::Ok);

        let mut reloaded: *mut PhononKernel = ptr::null_mut();
        assert_eq!(
            phonon_kernel_load(path.as_ptr(), &mut reloaded),
            PhononStatus::Ok
        );

        let (mut a, mut b) = (0.0, 0.0);
        phonon_kernel_stats(handle, &mut a, ptr::null_mut(), ptr::null_mut());
        phonon_kernel_stats(reloaded, &mut b, ptr::null_mut(), ptr::null_mut());
        assert_eq!(a.to_bits(), b.to_bits());

        let (mut e0, mut e1) = (0.0, 0.0);
        phonon_kernel_entry(handle, 2, 9, &mut e0);
        phonon_kernel_entry(reloaded, 2, 9, &mut e1);
        assert_eq!(e0.to_bits(), e1.to_bits());

        phonon_kernel_free(handle);
        phonon_kernel_free(reloaded);
    }
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        assert_eq!(
            phonon_kernel_assemble(32, 1e-8, ptr::null_mut()),
            PhononStatus::NullPointer
        );
        assert_eq!(
            phonon_kernel_size(ptr::null(), &mut 0usize),
            PhononStatus::NullPointer
        );
        assert_eq!(phonon_kernel_point(0.3, 0.4, ptr::null_mut()), PhononStatus::NullPointer);
        let msg = phonon_last_error_message();
        assert!(!msg.is_null());
        assert!(!CStr::from_ptr(msg).to_str().unwrap().is_empty());
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut out: *mut PhononKernel = ptr::null_mut();
        let missing = CString::new("/nonexistent/path/table.phnk").unwrap();
        assert_eq!(
            phonon_kernel_load(missing.as_ptr(), &mut out),
            PhononStatus::Io
        );
        assert!(out.is_null());

        let mut rejected: *mut PhononKernel = ptr::null_mut();
        assert_eq!(
            phonon_kernel_assemble(8, 1e-8, &mut rejected),
            PhononStatus::InvalidArgument,
            "grid sizes below 16 are out of domain"
        );

        let handle = assemble(16);
        let mut value = 0.0;
        assert_eq!(
            phonon_kernel_entry(handle, 16, 0, &mut value),
            PhononStatus::InvalidArgument
        );
        phonon_kernel_free(handle);

        let mut vp = 0.0;
        assert_eq!(
            phonon_dispersion_group_velocity(0.0, &mut vp),
            PhononStatus::InvalidArgument,
            "the group velocity is undefined at k = 0"
        );
    }
}

#[test]
fn corrupt_cache_reports_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.phnk");
    std::fs::write(&path, b"PHNK junk that is not a table").unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut out: *mut PhononKernel = ptr::null_mut();
        assert_eq!(
            phonon_kernel_load(cpath.as_ptr(), &mut out),
            PhononStatus::CacheFormat
        );
    }
}

#[test]
fn scalar_helpers() {
    unsafe {
        assert_eq!(phonon_dispersion_omega(0.5), 1.0);

        let mut vp = 0.0;
        assert_eq!(
            phonon_dispersion_group_velocity(0.25, &mut vp),
            PhononStatus::Ok
        );
        assert!((vp - std::f64::consts::PI * (0.25f64 * std::f64::consts::PI).cos()).abs() < 1e-15);

        let mut kmax = 0.0;
        assert_eq!(phonon_kernel_point(0.5, 0.5, &mut kmax), PhononStatus::Ok);
        assert!((kmax - 2.0).abs() < 1e-12);

        let mut v = 0.0;
        assert_eq!(phonon_collision_frequency(0.25, 1e-10, &mut v), PhononStatus::Ok);
        assert!((v - 0.696273107061).abs() < 1e-9);
    }
}

#[test]
fn kappa_set_matches_closed_forms() {
    let mut set = PhononKappaSet {
        v0: 0.0,
        kappa1: 0.0,
        kappa2: 0.0,
        kappa3: 0.0,
        kappa_eff: 0.0,
    };
    unsafe {
        assert_eq!(phonon_kappa_set(1.4170045376, &mut set), PhononStatus::Ok);
    }
    assert!((set.kappa2 - 3.0 * std::f64::consts::PI / 5.0).abs() < 1e-10);
    let expected_eff = set.kappa1 - set.kappa2 * set.kappa2 / set.kappa3;
    assert!((set.kappa_eff - expected_eff).abs() < 1e-12);

    unsafe {
        assert_eq!(
            phonon_kappa_set(-1.0, &mut set),
            PhononStatus::InvalidArgument
        );
    }
}

#[test]
fn version_is_exposed() {
    let version = unsafe { CStr::from_ptr(phonon_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_lists_every_symbol() {
    let header = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/phonon_boltzmann.h"
    ))
    .expect("generated header is committed next to the crate");

    for symbol in [
        "phonon_last_error_message",
        "phonon_version",
        "phonon_kernel_assemble",
        "phonon_kernel_load",
        "phonon_kernel_save",
        "phonon_kernel_free",
        "phonon_kernel_size",
        "phonon_kernel_stats",
        "phonon_kernel_node",
        "phonon_kernel_entry",
        "phonon_kernel_frequency",
        "phonon_kernel_point",
        "phonon_collision_frequency",
        "phonon_dispersion_omega",
        "phonon_dispersion_group_velocity",
        "phonon_kappa_set",
        "PhononStatus_Ok",
        "PhononStatus_CacheFormat",
        "PhononKappaSet",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}
