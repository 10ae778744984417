//! C ABI over the phonon-boltzmann core.
//!
//! Every fallible call returns a [`PhononStatus`]; on failure a message is
//! stored in thread-local storage and can be read back with
//! [`phonon_last_error_message`]. Kernel tables travel across the boundary
//! as opaque [`PhononKernel`] handles that must be released with
//! [`phonon_kernel_free`]. The header `include/phonon_boltzmann.h` is
//! generated from this file by cbindgen at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use phonon_boltzmann::kernel::{self, KernelTable};
use phonon_boltzmann::{cache, dispersion, symbols, Error};

/// Result codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhononStatus {
    /// Call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was outside its documented domain.
    InvalidArgument = 2,
    /// Quadrature, eigensolve, or another numerical stage failed.
    Numerical = 3,
    /// The operating system reported an I/O error.
    Io = 4,
    /// A cache file exists but is not a valid kernel table.
    CacheFormat = 5,
    /// The library panicked; the handle state is unspecified.
    Panic = 6,
}

/// Opaque handle to an assembled kernel table.
pub struct PhononKernel {
    inner: KernelTable,
}

/// Transport coefficients derived from the collision frequency prefactor.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PhononKappaSet {
    /// Collision frequency prefactor the set was computed from.
    pub v0: f64,
    /// Coefficient of the fractional Laplacian of order 4/5.
    pub kappa1: f64,
    /// Cross coupling between the temperature and singular modes.
    pub kappa2: f64,
    /// Relaxation coefficient of the singular mode.
    pub kappa3: f64,
    /// Effective diffusivity kappa1 - kappa2^2 / kappa3.
    pub kappa_eff: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let owned = CString::new(msg.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(owned));
}

fn fail(err: &Error) -> PhononStatus {
    set_error(&err.to_string());
    match err {
        Error::Domain(_) | Error::Config(_) | Error::InvalidTable(_) => {
            PhononStatus::InvalidArgument
        }
        Error::Io(_) => PhononStatus::Io,
        Error::CacheFormat(_) => PhononStatus::CacheFormat,
        _ => PhononStatus::Numerical,
    }
}

fn guard(body: impl FnOnce() -> PhononStatus) -> PhononStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            PhononStatus::Panic
        }
    }
}

macro_rules! require {
    ($ptr:expr) => {
        if $ptr.is_null() {
            set_error(concat!(stringify!($ptr), " is null"));
            return PhononStatus::NullPointer;
        }
    };
}

unsafe fn path_arg<'a>(ptr: *const c_char) -> Result<&'a Path, PhononStatus> {
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(PhononStatus::InvalidArgument)
        }
    }
}

/// Message describing the most recent failure on the calling thread, or null
/// if no call has failed yet. The pointer stays valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn phonon_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |msg| msg.as_ptr())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn phonon_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Assemble an n-point kernel table with the given quadrature tolerance and
/// store the handle in `out`. Assembly costs O(n^2) quadratures; n = 400
/// takes a fraction of a second.
///
/// # Safety
/// `out` must point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn phonon_kernel_assemble(
    n: usize,
    quad_tol: f64,
    out: *mut *mut PhononKernel,
) -> PhononStatus {
    guard(|| {
        require!(out);
        match kernel::assemble_kernel(n, quad_tol) {
            Ok(table) => {
                *out = Box::into_raw(Box::new(PhononKernel { inner: table }));
                PhononStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Load a kernel table previously written by [`phonon_kernel_save`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable for one pointer.
#[no_mangle]
pub unsafe extern "C" fn phonon_kernel_load(
    path: *const c_char,
    out: *mut *mut PhononKernel,
) -> PhononStatus {
    guard(|| {
        require!(path);
        require!(out);
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match cache::load(path) {
            Ok(table) => {
                *out = Box::into_raw(Box::new(PhononKernel { inner: table }));
                PhononStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Write the table to a checksummed binary cache file.
///
/// # Safety
/// `kernel` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn phonon_kernel_save(
    kernel: *const PhononKernel,
    path: *const c_char,
) -> PhononStatus {
    guard(|| {
        require!(kernel);
        require!(path);
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match cache::save(&(*kernel).inner, path) {
            Ok(()) => PhononStatus::Ok,
            Err(err) => fail(&err),
        }
    })
}

/// Release a handle returned by assemble or load. Null is a no-op; passing
/// the same handle twice is undefined behaviour.
///
/// # Safety
/// `kernel` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn phonon_kernel_free(kernel: *mut PhononKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Number of grid points of the table behind the handle.
///
/// # Safety
/// `kernel` must be a live handle and `out` writable for one size_t.
#[no_mangle]
pub unsafe extern "C" fn phonon_kernel_size(
    kernel: *const PhononKernel,
    out: *mut usize,
) -> PhononStatus {
    guard(|| {
        require!(kernel);
        require!(out);
        *out = (*kernel).inner.grid.n;
        PhononStatus::Ok
    })
}

/// Scalar summary of the table: the extrapolated prefactor v0 and the
/// measured envelope bounds c1 <= V(k)/|sin(pi k)|^{5/3} <= c2. Any output
/// pointer may be null to skip that value.
///
/// # Safety
/// `kernel` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn phonon_kernel_stats(
    kernel: *const PhononKernel,
    v0: *mut f64,
    c1: *mut f64,
    c2: *mut f64,
) -> PhononStatus {
    guard(|| {
        require!(kernel);
        let table = &(*kernel).inner;
        if !v0.is_null() {
            *v0 = table.v0;
        }
        if !c1.is_null() {
            *c1 = table.c1;
        }
        if !c2.is_null() {
            *c2 = table.c2;
        }
        PhononStatus::Ok
    })
}

/// Grid node k_i in the symmetric cell (-1/2, 1/2].
///
/// # Safety
/// `kernel` must be a live handle and `out` writable for one double.
#[no_mangle]
pub unsafe extern "C" fn phonon_kernel_node(
    kernel: *const PhononKernel,
    i: usize,
    out: *mut f64,
) -> PhononStatus {
    guard(|| {
        require!(kernel);
        require!(out);
        let table = &(*kernel).inner;
        if i >= table.grid.n {
            set_error("node index out of range");
            return PhononStatus::InvalidArgument;
        }
        *out = table.grid.nodes[i];
        PhononStatus::Ok
    })
}

/// Tabulated kernel entry K(k_i, k_j), cell-averaged near the singular
/// curve.
///
/// # Safety
/// `kernel` must be a live handle and `out` writable for one double.
#[no_mangle]
pub unsafe extern "C" fn phonon_kernel_entry(
    kernel: *const PhononKernel,
    i: usize,
    j: usize,
    out: *mut f64,
) -> PhononStatus {
    guard(|| {
        require!(kernel);
        require!(out);
        let table = &(*kernel).inner;
        if i >= table.grid.n || j >= table.grid.n {
            set_error("kernel index out of range");
            return PhononStatus::InvalidArgument;
        }
        *out = table.entry(i, j);
        PhononStatus::Ok
    })
}

/// Analytic collision frequency V(k_i) at node i.
///
/// # Safety
/// `kernel` must be a live handle and `out` writable for one double.
#[no_mangle]
pub unsafe extern "C" fn phonon_kernel_frequency(
    kernel: *const PhononKernel,
    i: usize,
    out: *mut f64,
) -> PhononStatus {
    guard(|| {
        require!(kernel);
        require!(out);
        let table = &(*kernel).inner;
        if i >= table.grid.n {
            set_error("node index out of range");
            return PhononStatus::InvalidArgument;
        }
        *out = table.v[i];
        PhononStatus::Ok
    })
}

/// Pointwise collision kernel K(k, k') on the stable branch forms. Fails on
/// the singular curve itself, where only cell averages are defined.
///
/// # Safety
/// `out` must be writable for one double.
#[no_mangle]
pub unsafe extern "C" fn phonon_kernel_point(
    k: f64,
    kp: f64,
    out: *mut f64,
) -> PhononStatus {
    guard(|| {
        require!(out);
        match kernel::kernel_k(k, kp) {
            Ok(value) => {
                *out = value;
                PhononStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Collision frequency V(k) by direct panel quadrature, independent of any
/// table.
///
/// # Safety
/// `out` must be writable for one double.
#[no_mangle]
pub unsafe extern "C" fn phonon_collision_frequency(
    k: f64,
    quad_tol: f64,
    out: *mut f64,
) -> PhononStatus {
    guard(|| {
        require!(out);
        match kernel::v_of_k(k, quad_tol) {
            Ok(value) => {
                *out = value;
                PhononStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Dispersion relation omega(k) = |sin(pi k)|.
#[no_mangle]
pub extern "C" fn phonon_dispersion_omega(k: f64) -> f64 {
    dispersion::omega(k)
}

/// Group velocity omega'(k). Fails at k = 0 mod 1 where the derivative is
/// undefined.
///
/// # Safety
/// `out` must be writable for one double.
#[no_mangle]
pub unsafe extern "C" fn phonon_dispersion_group_velocity(
    k: f64,
    out: *mut f64,
) -> PhononStatus {
    guard(|| {
        require!(out);
        match dispersion::omega_prime(k) {
            Ok(value) => {
                *out = value;
                PhononStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Transport coefficients for a given collision frequency prefactor v0.
/// The integrals are evaluated to near machine precision; v0 must be
/// positive.
///
/// # Safety
/// `out` must be writable for one PhononKappaSet.
#[no_mangle]
pub unsafe extern "C" fn phonon_kappa_set(
    v0: f64,
    out: *mut PhononKappaSet,
) -> PhononStatus {
    guard(|| {
        require!(out);
        match symbols::compute_kappas(v0) {
            Ok(set) => {
                *out = PhononKappaSet {
                    v0: set.v0,
                    kappa1: set.kappa1,
                    kappa2: set.kappa2,
                    kappa3: set.kappa3,
                    kappa_eff: set.kappa_eff,
                };
                PhononStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}
