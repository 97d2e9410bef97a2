//! C interface to `cncdir`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` functions
//! and released by the matching `*_free`. Every fallible function returns a
//! [`CncdirStatus`]; on failure the message is kept per thread and can be read
//! with [`cncdir_last_error_message`]. Output pointers are written only on
//! success. Panics are caught and reported as `CNCDIR_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cncdir::inference::{
    fit_ml, log_density, read_simplex_csv, Dataset2D, Family, FitOptions, FitReport, ModelSpec,
};
use cncdir::models::{DirParams, NcDirParams, ParamSet, SimplexPoint};
use cncdir::moments::{cncdir_mixed_moment, MomentOrder};
use cncdir::sampling::{sample_dirichlet, sample_ncdir, CNcDirSampler, RandomStream};
use cncdir::specfun::SeriesControl;
use cncdir::Error;

/// Outcome of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CncdirStatus {
    Ok = 0,
    /// Invalid parameters or arguments.
    Domain = 1,
    /// A series or the optimizer did not converge.
    Convergence = 2,
    /// Malformed input data.
    Parse = 3,
    Io = 4,
    NullArgument = 5,
    /// The caller's buffer is too small; the required length is reported.
    BufferTooSmall = 6,
    Panic = 7,
}

/// Model families.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CncdirFamily {
    Dirichlet = 0,
    KummerBeta = 1,
    Ncdir = 2,
    Cncdir = 3,
}

impl From<CncdirFamily> for Family {
    fn from(f: CncdirFamily) -> Self {
        match f {
            CncdirFamily::Dirichlet => Family::Dir,
            CncdirFamily::KummerBeta => Family::Kb2,
            CncdirFamily::Ncdir => Family::NcDir,
            CncdirFamily::Cncdir => Family::CNcDir,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> CncdirStatus {
    match e {
        Error::Parse { .. } | Error::Json(_) => CncdirStatus::Parse,
        Error::Io(_) => CncdirStatus::Io,
        e if e.is_convergence() => CncdirStatus::Convergence,
        _ => CncdirStatus::Domain,
    }
}

/// Failure raised inside a wrapper before reaching the library.
enum Fault {
    Lib(Error),
    Null(&'static str),
    Buffer(usize),
}

impl From<Error> for Fault {
    fn from(e: Error) -> Self {
        Fault::Lib(e)
    }
}

/// Run `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Fault>) -> CncdirStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CncdirStatus::Ok
        }
        Ok(Err(Fault::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fault::Null(what))) => {
            set_last_error(format!("null pointer passed for {what}"));
            CncdirStatus::NullArgument
        }
        Ok(Err(Fault::Buffer(need))) => {
            set_last_error(format!("buffer too small: {need} elements required"));
            CncdirStatus::BufferTooSmall
        }
        Err(_) => {
            set_last_error("internal panic");
            CncdirStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fault> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fault::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn reference<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fault> {
    p.as_ref().ok_or(Fault::Null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fault> {
    if out.is_null() {
        return Err(Fault::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn free_handle<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn cncdir_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cncdir_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// A distribution: family, parameters and series control.
pub struct CncdirModel {
    family: Family,
    params: ParamSet,
    ctl: SeriesControl,
}

/// Create a model. `lambda` may be null for the Dirichlet and Kummer-Beta
/// families; `delta` is read only by the Kummer-Beta family. Non-central
/// families take `n_lambda = n_alpha` non-centralities.
#[no_mangle]
pub unsafe extern "C" fn cncdir_model_new(
    family: CncdirFamily,
    alpha: *const f64,
    n_alpha: usize,
    lambda: *const f64,
    n_lambda: usize,
    delta: f64,
    out: *mut *mut CncdirModel,
) -> CncdirStatus {
    guard(|| {
        let family = Family::from(family);
        let alpha = slice(alpha, n_alpha, "alpha")?.to_vec();
        let lambda = slice(lambda, n_lambda, "lambda")?.to_vec();
        let params = ParamSet {
            alpha,
            lambda: (!lambda.is_empty()).then_some(lambda),
            delta: (family == Family::Kb2).then_some(delta),
        };
        match family {
            Family::Dir => drop(params.to_dir()?),
            Family::Kb2 => drop(params.to_kb2()?),
            Family::NcDir => drop(params.to_ncdir()?),
            Family::CNcDir => drop(params.to_cncdir()?),
        }
        let model = CncdirModel {
            family,
            params,
            ctl: SeriesControl::default(),
        };
        write(out, Box::into_raw(Box::new(model)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cncdir_model_free(model: *mut CncdirModel) {
    free_handle(model)
}

/// Replace the series tolerance and term budget of a model.
#[no_mangle]
pub unsafe extern "C" fn cncdir_model_set_series_control(
    model: *mut CncdirModel,
    tol: f64,
    maxiter: usize,
) -> CncdirStatus {
    guard(|| {
        let m = model.as_mut().ok_or(Fault::Null("model"))?;
        m.ctl = SeriesControl::new(tol, maxiter)?;
        Ok(())
    })
}

/// Log density at the point with coordinates `x[0..dim]`.
#[no_mangle]
pub unsafe extern "C" fn cncdir_model_logpdf(
    model: *const CncdirModel,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> CncdirStatus {
    guard(|| {
        let m = reference(model, "model")?;
        let point = SimplexPoint::new(slice(x, dim, "x")?.to_vec())?;
        let v = log_density(m.family, &m.params, &point, m.ctl)?;
        write(out, v, "out")
    })
}

/// Mixed moment `E[X1^r1 X2^r2]` of a bivariate CNcDir or Dirichlet model.
#[no_mangle]
pub unsafe extern "C" fn cncdir_model_mixed_moment(
    model: *const CncdirModel,
    r1: u64,
    r2: u64,
    out: *mut f64,
) -> CncdirStatus {
    guard(|| {
        let m = reference(model, "model")?;
        if !matches!(m.family, Family::CNcDir | Family::Dir) {
            return Err(Error::Domain(
                "moments are available for the CNcDir and Dirichlet families".into(),
            )
            .into());
        }
        let v = cncdir_mixed_moment(&m.params.to_cncdir()?, MomentOrder::new(r1, r2), m.ctl)?;
        write(out, v, "out")
    })
}

enum Law {
    Dir(DirParams),
    NcDir(NcDirParams),
    CNcDir(Box<CNcDirSampler>),
}

/// A seeded random source bound to one model.
pub struct CncdirSampler {
    law: Law,
    dim: usize,
    rng: RandomStream,
}

/// Sampler for a Dirichlet, NcDir or CNcDir model. The sampler does not
/// borrow the model, which may be freed afterwards.
#[no_mangle]
pub unsafe extern "C" fn cncdir_sampler_new(
    model: *const CncdirModel,
    seed: u64,
    out: *mut *mut CncdirSampler,
) -> CncdirStatus {
    guard(|| {
        let m = reference(model, "model")?;
        let law = match m.family {
            Family::Dir => Law::Dir(m.params.to_dir()?),
            Family::NcDir => Law::NcDir(m.params.to_ncdir()?),
            Family::CNcDir => {
                Law::CNcDir(Box::new(CNcDirSampler::new(&m.params.to_cncdir()?, m.ctl)?))
            }
            Family::Kb2 => {
                return Err(Error::Domain(
                    "no sampler is available for the Kummer-Beta family".into(),
                )
                .into())
            }
        };
        let sampler = CncdirSampler {
            law,
            dim: m.params.alpha.len() - 1,
            rng: RandomStream::new(seed),
        };
        write(out, Box::into_raw(Box::new(sampler)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cncdir_sampler_free(sampler: *mut CncdirSampler) {
    free_handle(sampler)
}

/// Draw `n` points into `out[0..n*dim]`, row by row.
#[no_mangle]
pub unsafe extern "C" fn cncdir_sampler_draw(
    sampler: *mut CncdirSampler,
    n: usize,
    out: *mut f64,
    out_len: usize,
) -> CncdirStatus {
    guard(|| {
        let s = sampler.as_mut().ok_or(Fault::Null("sampler"))?;
        let need = n * s.dim;
        if out_len < need {
            return Err(Fault::Buffer(need));
        }
        if need > 0 && out.is_null() {
            return Err(Fault::Null("out"));
        }
        let mut rows = Vec::with_capacity(need);
        for _ in 0..n {
            let p = match &s.law {
                Law::Dir(p) => sample_dirichlet(p, &mut s.rng)?,
                Law::NcDir(p) => sample_ncdir(p, &mut s.rng)?,
                Law::CNcDir(c) => c.sample_mixture(&mut s.rng)?,
            };
            rows.extend_from_slice(p.coords());
        }
        if need > 0 {
            std::slice::from_raw_parts_mut(out, need).copy_from_slice(&rows);
        }
        Ok(())
    })
}

/// A bivariate sample on the simplex.
pub struct CncdirDataset(Dataset2D);

/// Dataset from the coordinate arrays `x1[0..n]`, `x2[0..n]`.
#[no_mangle]
pub unsafe extern "C" fn cncdir_dataset_new(
    x1: *const f64,
    x2: *const f64,
    n: usize,
    out: *mut *mut CncdirDataset,
) -> CncdirStatus {
    guard(|| {
        let a = slice(x1, n, "x1")?;
        let b = slice(x2, n, "x2")?;
        let pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
        let data = Dataset2D::from_pairs(&pairs)?;
        write(out, Box::into_raw(Box::new(CncdirDataset(data))), "out")
    })
}

/// Dataset from a two-column CSV file.
#[no_mangle]
pub unsafe extern "C" fn cncdir_dataset_read_csv(
    path: *const c_char,
    out: *mut *mut CncdirDataset,
) -> CncdirStatus {
    guard(|| {
        if path.is_null() {
            return Err(Fault::Null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Error::Io("path is not valid UTF-8".into()))?;
        let data = read_simplex_csv(path)?;
        write(out, Box::into_raw(Box::new(CncdirDataset(data))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cncdir_dataset_len(data: *const CncdirDataset) -> usize {
    data.as_ref().map_or(0, |d| d.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn cncdir_dataset_free(data: *mut CncdirDataset) {
    free_handle(data)
}

/// A finished maximum-likelihood fit.
pub struct CncdirFit(FitReport);

/// Fit a bivariate family. Bit `i` of `pinned_shapes` pins shape `i + 1`
/// to one. `starts` is the number of optimizer starts (0 uses the default).
#[no_mangle]
pub unsafe extern "C" fn cncdir_fit(
    family: CncdirFamily,
    pinned_shapes: u32,
    data: *const CncdirDataset,
    starts: usize,
    seed: u64,
    out: *mut *mut CncdirFit,
) -> CncdirStatus {
    guard(|| {
        let data = reference(data, "data")?;
        if pinned_shapes >> 3 != 0 {
            return Err(
                Error::Domain("only bits 0 to 2 of the shape mask may be set".into()).into(),
            );
        }
        let pinned: Vec<usize> = (0..3).filter(|i| pinned_shapes >> i & 1 == 1).collect();
        let spec = ModelSpec::constrained(family.into(), &pinned)?;
        let mut opts = FitOptions {
            seed,
            ..FitOptions::default()
        };
        if starts > 0 {
            opts.starts = starts;
        }
        let report = fit_ml(&spec, &data.0, &opts)?;
        write(out, Box::into_raw(Box::new(CncdirFit(report))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cncdir_fit_free(fit: *mut CncdirFit) {
    free_handle(fit)
}

#[no_mangle]
pub unsafe extern "C" fn cncdir_fit_loglik(fit: *const CncdirFit, out: *mut f64) -> CncdirStatus {
    guard(|| write(out, reference(fit, "fit")?.0.loglik, "out"))
}

/// Full parameter vector: three shapes, then `delta` or three
/// non-centralities. `out_written` receives the length even when the buffer
/// is too small.
#[no_mangle]
pub unsafe extern "C" fn cncdir_fit_parameters(
    fit: *const CncdirFit,
    out: *mut f64,
    out_len: usize,
    out_written: *mut usize,
) -> CncdirStatus {
    guard(|| {
        let f = reference(fit, "fit")?;
        let theta = &f.0.theta;
        write(out_written, theta.len(), "out_written")?;
        if out_len < theta.len() {
            return Err(Fault::Buffer(theta.len()));
        }
        if out.is_null() {
            return Err(Fault::Null("out"));
        }
        std::slice::from_raw_parts_mut(out, theta.len()).copy_from_slice(theta);
        Ok(())
    })
}

/// The fit report as JSON. Release the string with [`cncdir_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cncdir_fit_to_json(
    fit: *const CncdirFit,
    out: *mut *mut c_char,
) -> CncdirStatus {
    guard(|| {
        let f = reference(fit, "fit")?;
        let text = serde_json::to_string(&f.0).map_err(Error::from)?;
        let s = CString::new(text).map_err(|_| Error::Json("report contains a NUL byte".into()))?;
        write(out, s.into_raw(), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cncdir_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
