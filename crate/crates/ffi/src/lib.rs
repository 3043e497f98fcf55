//! C ABI over `kroncoef`.
//!
//! Objects are opaque handles created by `*_new` and released by the matching
//! `*_free`. Every fallible call returns a [`KronStatus`]; on failure
//! [`kron_last_error`] describes the most recent error on the calling thread.
//! Outputs are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kroncoef::bloading::{b_loadings, b_star, b_star_scan, count_below, BLoadingTable, ScanOutcome};
use kroncoef::characters::{character_table, CharacterTable};
use kroncoef::classify::{f1_kan, f2_logistic, f3_symbolic, fixed_snn, sigma};
use kroncoef::kronecker::{kronecker_tensor, KroneckerTensor};
use kroncoef::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KronStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnsupportedSize = 3,
    Degenerate = 4,
    Convergence = 5,
    Domain = 6,
    NoZeroCoefficient = 7,
    Integrity = 8,
    VersionMismatch = 9,
    Io = 10,
    NotFound = 11,
    Inconsistent = 12,
    Panic = 13,
}

impl From<&Error> for KronStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => KronStatus::InvalidArgument,
            Error::NotFound(_) => KronStatus::NotFound,
            Error::UnsupportedSize { .. } => KronStatus::UnsupportedSize,
            Error::Degenerate(_) => KronStatus::Degenerate,
            Error::Convergence { .. } => KronStatus::Convergence,
            Error::Domain(_) => KronStatus::Domain,
            Error::Inconsistent(_) => KronStatus::Inconsistent,
            Error::NoZeroCoefficient(_) => KronStatus::NoZeroCoefficient,
            Error::Integrity { .. } => KronStatus::Integrity,
            Error::VersionMismatch { .. } => KronStatus::VersionMismatch,
            Error::Io(_) => KronStatus::Io,
        }
    }
}

/// Opaque character table of S_n.
pub struct KronCharTable(CharacterTable);
/// Opaque Kronecker tensor over canonical triples.
pub struct KronTensor(KroneckerTensor);
/// Opaque b-loading table.
pub struct KronBTable(BLoadingTable);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> KronStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => KronStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            KronStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            KronStatus::from(&e)
        }
        Err(_) => {
            set_error("internal panic");
            KronStatus::Panic
        }
    }
}

unsafe fn href<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn put<T>(p: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    p.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kron_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kron_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_char_table_new(n: usize, out: *mut *mut KronCharTable) -> KronStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let t = character_table(n)?;
        put(out, Box::into_raw(Box::new(KronCharTable(t))), "out")
    })
}

/// # Safety
/// `t` must be null or a handle from [`kron_char_table_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kron_char_table_free(t: *mut KronCharTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of partitions `p(n)`.
///
/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_char_table_size(t: *const KronCharTable, out: *mut usize) -> KronStatus {
    guard(|| put(out, href(t, "table")?.0.size(), "out"))
}

/// `χ_λ(ρ)` by partition indices in descending lexicographic order.
///
/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_char_table_get(
    t: *const KronCharTable,
    lambda: usize,
    rho: usize,
    out: *mut i64,
) -> KronStatus {
    guard(|| {
        let t = &href(t, "table")?.0;
        if lambda >= t.size() || rho >= t.size() {
            return Err(Error::InvalidArgument(format!(
                "index ({lambda}, {rho}) out of range for p = {}",
                t.size()
            ))
            .into());
        }
        put(out, t.chi(lambda, rho), "out")
    })
}

/// # Safety
/// `chars` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_tensor_new(chars: *const KronCharTable, out: *mut *mut KronTensor) -> KronStatus {
    guard(|| {
        let c = &href(chars, "chars")?.0;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let t = kronecker_tensor(c.n(), c)?;
        put(out, Box::into_raw(Box::new(KronTensor(t))), "out")
    })
}

/// # Safety
/// `t` must be null or a handle from [`kron_tensor_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kron_tensor_free(t: *mut KronTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// `g(λ, μ, ν)` for any index order.
///
/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_tensor_get(
    t: *const KronTensor,
    i: usize,
    j: usize,
    k: usize,
    out: *mut u32,
) -> KronStatus {
    guard(|| put(out, href(t, "tensor")?.0.get(i, j, k)?, "out"))
}

/// Share of ordered triples with a non-zero coefficient.
///
/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_tensor_nonzero_ratio(t: *const KronTensor, out: *mut f64) -> KronStatus {
    guard(|| put(out, href(t, "tensor")?.0.nonzero_ratio(), "out"))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_btable_new(n: usize, out: *mut *mut KronBTable) -> KronStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let t = b_loadings(n)?;
        put(out, Box::into_raw(Box::new(KronBTable(t))), "out")
    })
}

/// # Safety
/// `t` must be null or a handle from [`kron_btable_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kron_btable_free(t: *mut KronBTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_btable_size(t: *const KronBTable, out: *mut usize) -> KronStatus {
    guard(|| put(out, href(t, "btable")?.0.size(), "out"))
}

/// b-loading of one partition.
///
/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_btable_get(t: *const KronBTable, index: usize, out: *mut f64) -> KronStatus {
    guard(|| {
        let t = &href(t, "btable")?.0;
        let b = *t.b.get(index).ok_or_else(|| {
            Error::InvalidArgument(format!("index {index} out of range for p = {}", t.size()))
        })?;
        put(out, b, "out")
    })
}

/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_btable_b_of_triple(
    t: *const KronBTable,
    i: usize,
    j: usize,
    k: usize,
    out: *mut f64,
) -> KronStatus {
    guard(|| put(out, href(t, "btable")?.0.b_of_triple(i, j, k)?, "out"))
}

/// Mean and standard deviation of `b(t)` over ordered triples.
///
/// # Safety
/// `t` must be a live handle; `mean` and `std` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_btable_moments(t: *const KronBTable, mean: *mut f64, std: *mut f64) -> KronStatus {
    guard(|| {
        let t = &href(t, "btable")?.0;
        if mean.is_null() || std.is_null() {
            return Err(Fail::Null("mean/std"));
        }
        put(mean, t.mean_b3, "mean")?;
        put(std, t.std_b3, "std")
    })
}

/// Ordered triples with `b(t) < threshold`, and the total `p³`.
///
/// # Safety
/// `t` must be a live handle; `count` and `total` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_count_below(
    t: *const KronBTable,
    threshold: f64,
    count: *mut u64,
    total: *mut u64,
) -> KronStatus {
    guard(|| {
        let t = &href(t, "btable")?.0;
        if count.is_null() || total.is_null() {
            return Err(Fail::Null("count/total"));
        }
        let (c, all) = count_below(t, threshold);
        put(count, c, "count")?;
        put(total, all, "total")
    })
}

/// Smallest `b(t)` over vanishing coefficients and its canonical triple.
///
/// # Safety
/// Handles must be live; `value` and `triple` (3 slots) valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_b_star(
    tensor: *const KronTensor,
    btable: *const KronBTable,
    value: *mut f64,
    triple: *mut usize,
) -> KronStatus {
    guard(|| {
        let (t, b) = (&href(tensor, "tensor")?.0, &href(btable, "btable")?.0);
        if value.is_null() || triple.is_null() {
            return Err(Fail::Null("value/triple"));
        }
        let bs = b_star(t, b)?;
        put(value, bs.value, "value")?;
        let (i, j, k) = bs.triple;
        ptr::copy_nonoverlapping([i, j, k].as_ptr(), triple, 3);
        Ok(())
    })
}

/// Ascending scan for `b★` with at most `budget` coefficient evaluations.
/// `*exact` is 1 when `*value` is `b★`, 0 when it is only a lower bound.
///
/// # Safety
/// Handles must be live; all outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_b_star_scan(
    btable: *const KronBTable,
    chars: *const KronCharTable,
    budget: u64,
    value: *mut f64,
    exact: *mut i32,
    evaluations: *mut u64,
) -> KronStatus {
    guard(|| {
        let (b, c) = (&href(btable, "btable")?.0, &href(chars, "chars")?.0);
        if value.is_null() || exact.is_null() || evaluations.is_null() {
            return Err(Fail::Null("value/exact/evaluations"));
        }
        let scan = b_star_scan(b.n, b, c, budget)?;
        let (v, e) = match scan.outcome {
            ScanOutcome::Exact(bs) => (bs.value, 1),
            ScanOutcome::LowerBound { value } => (value, 0),
        };
        put(value, v, "value")?;
        put(exact, e, "exact")?;
        put(evaluations, scan.evaluations, "evaluations")
    })
}

#[no_mangle]
pub extern "C" fn kron_sigma(x: f64) -> f64 {
    sigma(x)
}

/// `σ(m − b)`; predicts non-zero when at least 1/2.
#[no_mangle]
pub extern "C" fn kron_f1_kan(b: f64, m: f64) -> f64 {
    f1_kan(b, m)
}

#[no_mangle]
pub extern "C" fn kron_f2_logistic(b: f64) -> f64 {
    f2_logistic(b)
}

/// Fails with `Domain` for `b <= 0`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kron_f3_symbolic(b: f64, out: *mut f64) -> KronStatus {
    guard(|| {
        let v = f3_symbolic(b)
            .ok_or_else(|| Error::Domain(format!("symbolic rule needs b > 0, got {b}")))?;
        put(out, v, "out")
    })
}

#[no_mangle]
pub extern "C" fn kron_fixed_snn(b: f64) -> f64 {
    fixed_snn(b)
}
