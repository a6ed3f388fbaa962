//! C ABI over the datadump solvers.
//!
//! Parameters live behind opaque handles created by `dd_model_new` /
//! `dd_beta_new` and released with the matching `_free`. Every fallible call
//! returns a [`DdStatus`] and writes results through out-pointers; on
//! failure `dd_last_error_message` returns a description of the most recent
//! error on the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use datadump::beta::{
    solve_beta_first_best, solve_beta_second_best, BetaParams, BetaRegime, BetaSolution,
};
use datadump::first_best::{solve_first_best, FirstBestRegime, FirstBestSolution};
use datadump::model::{lambda_star, value_l, value_s, Menu};
use datadump::second_best::{
    compare_fb_sb, menu_for_database, solve_second_best, SecondBestRegime, SecondBestSolution,
};
use datadump::{Database, Error, ModelParams};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdStatus {
    Ok = 0,
    InvalidParameter = 1,
    NonConvergence = 2,
    DegenerateMatrix = 3,
    InvariantViolation = 4,
    NullPointer = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdFirstBestRegime {
    Interior = 0,
    CornerN0Zero = 1,
    Shutdown = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdSecondBestRegime {
    Pooling = 0,
    Discrimination = 1,
    DiscriminationCornerN0Zero = 2,
    Shutdown = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdBetaRegime {
    FullAccess = 0,
    Exclusion = 1,
}

/// Model parameters. Opaque to C.
pub struct DdModel {
    params: ModelParams,
}

/// Four-type model parameters. Opaque to C.
pub struct DdBetaModel {
    params: BetaParams,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DdPlan {
    pub q0: f64,
    pub q1: f64,
    pub fee: f64,
}

/// Screening menu: `plan_s` for nowcasters, `plan_l` for forecasters.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DdMenu {
    pub plan_s: DdPlan,
    pub plan_l: DdPlan,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdFirstBest {
    pub n0: f64,
    pub n1: f64,
    pub profit: f64,
    pub fee_nowcaster: f64,
    pub fee_forecaster: f64,
    pub regime: DdFirstBestRegime,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdSecondBest {
    pub n0: f64,
    pub n1: f64,
    pub profit: f64,
    pub lambda_star: f64,
    pub menu: DdMenu,
    pub regime: DdSecondBestRegime,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdComparison {
    pub first_best: DdFirstBest,
    pub second_best: DdSecondBest,
    pub delta_n0: f64,
    pub delta_n1: f64,
    pub delta_total: f64,
    pub composition_reversed: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdBetaFirstBest {
    pub n_star: f64,
    pub profit: f64,
}

/// Fees are in type order `r, s, 1 - s, 1 - r`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdBetaSolution {
    pub n_store: f64,
    pub q_broad: f64,
    pub fees: [f64; 4],
    pub profit: f64,
    pub first_best_n: f64,
    pub regime: DdBetaRegime,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(err: Error) -> DdStatus {
    let status = match &err {
        Error::InvalidParameter { .. } => DdStatus::InvalidParameter,
        Error::NonConvergence { .. } => DdStatus::NonConvergence,
        Error::DegenerateMatrix => DdStatus::DegenerateMatrix,
        Error::InvariantViolation(_) => DdStatus::InvariantViolation,
    };
    set_last_error(err.to_string());
    status
}

fn null_pointer(name: &str) -> DdStatus {
    set_last_error(format!("null pointer passed as `{name}`"));
    DdStatus::NullPointer
}

/// Runs `body`, turning panics into [`DdStatus::Panic`].
fn guarded<F>(body: F) -> DdStatus
where
    F: FnOnce() -> Result<(), DdStatus>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DdStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            DdStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or valid for reads.
unsafe fn borrow<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, DdStatus> {
    ptr.as_ref().ok_or_else(|| null_pointer(name))
}

/// # Safety
/// `ptr` must be null or valid for writes.
unsafe fn write_out<T>(ptr: *mut T, name: &str, value: T) -> Result<(), DdStatus> {
    if ptr.is_null() {
        return Err(null_pointer(name));
    }
    ptr.write(value);
    Ok(())
}

fn plan(p: &datadump::model::AccessPlan) -> DdPlan {
    DdPlan {
        q0: p.q0,
        q1: p.q1,
        fee: p.fee,
    }
}

fn menu(m: &Menu) -> DdMenu {
    DdMenu {
        plan_s: plan(&m.plan_s),
        plan_l: plan(&m.plan_l),
    }
}

fn first_best(sol: &FirstBestSolution) -> DdFirstBest {
    DdFirstBest {
        n0: sol.db.n0,
        n1: sol.db.n1,
        profit: sol.profit,
        fee_nowcaster: sol.fees.nowcaster,
        fee_forecaster: sol.fees.forecaster,
        regime: match sol.regime {
            FirstBestRegime::Interior => DdFirstBestRegime::Interior,
            FirstBestRegime::CornerN0Zero => DdFirstBestRegime::CornerN0Zero,
            FirstBestRegime::Shutdown => DdFirstBestRegime::Shutdown,
        },
    }
}

fn second_best(sol: &SecondBestSolution) -> DdSecondBest {
    DdSecondBest {
        n0: sol.db.n0,
        n1: sol.db.n1,
        profit: sol.profit,
        lambda_star: sol.lambda_star_at_solution,
        menu: menu(&sol.menu),
        regime: match sol.regime {
            SecondBestRegime::Pooling => DdSecondBestRegime::Pooling,
            SecondBestRegime::Discrimination => DdSecondBestRegime::Discrimination,
            SecondBestRegime::DiscriminationCornerN0Zero => {
                DdSecondBestRegime::DiscriminationCornerN0Zero
            }
            SecondBestRegime::Shutdown => DdSecondBestRegime::Shutdown,
        },
    }
}

fn beta_solution(sol: &BetaSolution) -> DdBetaSolution {
    DdBetaSolution {
        n_store: sol.n_store,
        q_broad: sol.q_broad,
        fees: sol.fees,
        profit: sol.profit,
        first_best_n: sol.first_best_n,
        regime: match sol.regime {
            BetaRegime::FullAccess => DdBetaRegime::FullAccess,
            BetaRegime::Exclusion => DdBetaRegime::Exclusion,
        },
    }
}

/// Creates a model handle. On success `*out` owns a handle that must be
/// released with `dd_model_free`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dd_model_new(
    sigma_mu_sq: f64,
    cost: f64,
    lambda: f64,
    out: *mut *mut DdModel,
) -> DdStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        let params = ModelParams::new(sigma_mu_sq, cost, lambda).map_err(fail)?;
        out.write(Box::into_raw(Box::new(DdModel { params })));
        Ok(())
    })
}

/// Releases a handle from `dd_model_new`. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dd_model_free(model: *mut DdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Forecaster willingness to pay for access `(n0, n1)`.
///
/// # Safety
/// `model` must be a live handle or null; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dd_value_l(model: *const DdModel, n0: f64, n1: f64, out: *mut f64) -> DdStatus {
    guarded(|| {
        let m = borrow(model, "model")?;
        let db = Database::new(n0, n1).map_err(fail)?;
        write_out(out, "out", value_l(db, &m.params))
    })
}

/// Nowcaster willingness to pay for access `(n0, n1)`.
///
/// # Safety
/// `model` must be a live handle or null; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dd_value_s(model: *const DdModel, n0: f64, n1: f64, out: *mut f64) -> DdStatus {
    guarded(|| {
        let m = borrow(model, "model")?;
        let db = Database::new(n0, n1).map_err(fail)?;
        write_out(out, "out", value_s(db, &m.params))
    })
}

/// Nowcaster share above which forecasters lose current-data access.
///
/// # Safety
/// `model` must be a live handle or null; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dd_lambda_star(model: *const DdModel, n0: f64, out: *mut f64) -> DdStatus {
    guarded(|| {
        let m = borrow(model, "model")?;
        if n0.is_nan() || n0 < 0.0 {
            return Err(fail(Error::InvalidParameter {
                name: "n0",
                reason: format!("must be >= 0, got {n0}"),
            }));
        }
        write_out(out, "out", lambda_star(n0, &m.params))
    })
}

/// # Safety
/// `model` must be a live handle or null; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dd_first_best(model: *const DdModel, tol: f64, out: *mut DdFirstBest) -> DdStatus {
    guarded(|| {
        let m = borrow(model, "model")?;
        let sol = solve_first_best(&m.params, tol).map_err(fail)?;
        write_out(out, "out", first_best(&sol))
    })
}

/// # Safety
/// `model` must be a live handle or null; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dd_second_best(
    model: *const DdModel,
    markov_constraint: bool,
    tol: f64,
    out: *mut DdSecondBest,
) -> DdStatus {
    guarded(|| {
        let m = borrow(model, "model")?;
        let sol = solve_second_best(&m.params, markov_constraint, tol).map_err(fail)?;
        write_out(out, "out", second_best(&sol))
    })
}

/// Revenue-maximizing menu for a fixed database.
///
/// # Safety
/// `model` must be a live handle or null; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dd_menu_for_database(
    model: *const DdModel,
    n0: f64,
    n1: f64,
    out: *mut DdMenu,
) -> DdStatus {
    guarded(|| {
        let m = borrow(model, "model")?;
        let db = Database::new(n0, n1).map_err(fail)?;
        write_out(out, "out", menu(&menu_for_database(db, &m.params)))
    })
}

/// # Safety
/// `model` must be a live handle or null; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dd_compare(model: *const DdModel, out: *mut DdComparison) -> DdStatus {
    guarded(|| {
        let m = borrow(model, "model")?;
        let r = compare_fb_sb(&m.params).map_err(fail)?;
        write_out(
            out,
            "out",
            DdComparison {
                first_best: first_best(&r.fb),
                second_best: second_best(&r.sb),
                delta_n0: r.delta_n0,
                delta_n1: r.delta_n1,
                delta_total: r.delta_total,
                composition_reversed: r.composition_reversed,
            },
        )
    })
}

/// Creates a four-type model handle, released with `dd_beta_free`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dd_beta_new(
    r: f64,
    s: f64,
    p_r: f64,
    sigma_sq: f64,
    cost: f64,
    out: *mut *mut DdBetaModel,
) -> DdStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        let params = BetaParams::new(r, s, p_r, sigma_sq, cost).map_err(fail)?;
        out.write(Box::into_raw(Box::new(DdBetaModel { params })));
        Ok(())
    })
}

/// Releases a handle from `dd_beta_new`. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dd_beta_free(model: *mut DdBetaModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle or null; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dd_beta_first_best(
    model: *const DdBetaModel,
    tol: f64,
    out: *mut DdBetaFirstBest,
) -> DdStatus {
    guarded(|| {
        let m = borrow(model, "model")?;
        let fb = solve_beta_first_best(&m.params, tol).map_err(fail)?;
        write_out(
            out,
            "out",
            DdBetaFirstBest {
                n_star: fb.n_star,
                profit: fb.profit,
            },
        )
    })
}

/// # Safety
/// `model` must be a live handle or null; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dd_beta_second_best(
    model: *const DdBetaModel,
    tol: f64,
    out: *mut DdBetaSolution,
) -> DdStatus {
    guarded(|| {
        let m = borrow(model, "model")?;
        let sol = solve_beta_second_best(&m.params, tol).map_err(fail)?;
        write_out(out, "out", beta_solution(&sol))
    })
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to fit, into `buf`. Returns the buffer size needed for the
/// full message including the terminator, or 0 when there is none.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn dd_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = (bytes.len() - 1).min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            buf.add(n).write(0);
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
