//! C ABI over `tablegene`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`TgStatus`]; on failure, `tg_last_error_message` describes the error
//! for the calling thread. Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use tablegene::ga::{evolve, FitResult, GaParams};
use tablegene::model::sample_genotype;
use tablegene::objectives::{candidate_phenotype, ObjectiveKind, ObjectiveSpec};
use tablegene::raster::render_scan;
use tablegene::skeleton::{
    degraded_skeleton, oracle_skeleton, stub_discriminator, DegradationParams, Provenance, SkeletonTarget,
};
use tablegene::xyinit::{initial_genotype, Thresholds};
use tablegene::{Error, PageSpec, RasterImage, RenderStyle, TableConfig, TableGenotype};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    Infeasible = 5,
    InsufficientStructure = 6,
    DimensionMismatch = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TgObjective {
    Nonoverlap = 0,
    L1 = 1,
    /// Uses the built-in patch-similarity discriminator.
    DiscriminatorLogprob = 2,
    /// Uses the built-in patch-similarity discriminator, λ = 100.
    Weighted = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TgAxis {
    X = 0,
    Y = 1,
}

/// Opaque table genotype.
pub struct TgGenotype(TableGenotype);
/// Opaque grayscale image, intensities in [0, 1] with 0 = black.
pub struct TgImage(RasterImage);
/// Opaque GA result.
pub struct TgFitResult(FitResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> TgStatus {
    match e {
        Error::Io { .. } => TgStatus::Io,
        Error::Image { .. } | Error::Json { .. } | Error::Format { .. } => TgStatus::Format,
        Error::Infeasible { .. } => TgStatus::Infeasible,
        Error::InsufficientStructure { .. } => TgStatus::InsufficientStructure,
        Error::DimensionMismatch { .. } => TgStatus::DimensionMismatch,
        _ => TgStatus::InvalidArgument,
    }
}

struct Fail(TgStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TgStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(TgStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TgStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TgStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut *mut T) -> Result<&'a mut *mut T, Fail> {
    p.as_mut().ok_or_else(|| null("output pointer"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn u32_slice<'a>(p: *const u32, len: usize, what: &str) -> Result<&'a [u32], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

fn preset(name: &str) -> Result<TableConfig, Fail> {
    TableConfig::preset(name).ok_or_else(|| invalid(format!("unknown table config `{name}`")))
}

fn objective_spec(kind: TgObjective) -> ObjectiveSpec {
    let spec = ObjectiveSpec::new(match kind {
        TgObjective::Nonoverlap => ObjectiveKind::Nonoverlap,
        TgObjective::L1 => ObjectiveKind::L1,
        TgObjective::DiscriminatorLogprob => ObjectiveKind::DiscriminatorLogprob,
        TgObjective::Weighted => ObjectiveKind::Weighted,
    });
    if spec.kind.needs_discriminator() {
        spec.with_discriminator(std::sync::Arc::new(stub_discriminator()))
    } else {
        spec
    }
}

fn model_target(img: &RasterImage) -> Result<SkeletonTarget, Fail> {
    Ok(SkeletonTarget::new(img.clone(), Provenance::External, &PageSpec::default())?)
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Canonical genotype from an origin and row/column sizes (zeros dropped).
///
/// # Safety
/// `rows`/`cols` must point to `n_rows`/`n_cols` readable values.
#[no_mangle]
pub unsafe extern "C" fn tg_genotype_new(
    x0: u32,
    y0: u32,
    rows: *const u32,
    n_rows: usize,
    cols: *const u32,
    n_cols: usize,
    out: *mut *mut TgGenotype,
) -> TgStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let rows = u32_slice(rows, n_rows, "rows")?.to_vec();
        let cols = u32_slice(cols, n_cols, "cols")?.to_vec();
        let g = TableGenotype::new(x0, y0, rows, cols).canonicalize();
        if !g.fits(&PageSpec::default()) {
            return Err(invalid("table does not fit the page"));
        }
        *out = boxed(TgGenotype(g));
        Ok(())
    })
}

/// Random genotype from a named preset (e.g. "base", "short-cells").
///
/// # Safety
/// `config` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tg_genotype_sample(config: *const c_char, seed: u64, out: *mut *mut TgGenotype) -> TgStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let cfg = preset(c_str(config, "config")?)?;
        *out = boxed(TgGenotype(sample_genotype(&cfg, &PageSpec::default(), seed)?));
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tg_genotype_from_json(json: *const c_char, out: *mut *mut TgGenotype) -> TgStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = boxed(TgGenotype(TableGenotype::from_json(c_str(json, "json")?)?));
        Ok(())
    })
}

/// Flat JSON form; free the result with `tg_string_free`.
///
/// # Safety
/// `g` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tg_genotype_to_json(g: *const TgGenotype, out: *mut *mut c_char) -> TgStatus {
    guard(|| {
        let g = deref(g, "genotype")?;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        *out = CString::new(g.0.to_json())
            .map_err(|_| invalid("interior NUL"))?
            .into_raw();
        Ok(())
    })
}

/// Effective row count; 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tg_genotype_rows(g: *const TgGenotype) -> usize {
    g.as_ref().map_or(0, |g| g.0.effective_rows())
}

/// Effective column count; 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tg_genotype_cols(g: *const TgGenotype) -> usize {
    g.as_ref().map_or(0, |g| g.0.effective_cols())
}

/// Divider positions along `axis`. `len` receives the full count; at most
/// `cap` values are copied into `buf` (which may be null when `cap` is 0).
///
/// # Safety
/// `g` live; `buf` writable for `cap` values; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn tg_genotype_dividers(
    g: *const TgGenotype,
    axis: TgAxis,
    buf: *mut u32,
    cap: usize,
    len: *mut usize,
) -> TgStatus {
    guard(|| {
        let g = deref(g, "genotype")?;
        let len = len.as_mut().ok_or_else(|| null("len"))?;
        let d = g.0.divider_positions();
        let v = match axis {
            TgAxis::X => d.x,
            TgAxis::Y => d.y,
        };
        *len = v.len();
        let n = v.len().min(cap);
        if n > 0 {
            if buf.is_null() {
                return Err(null("buf"));
            }
            std::slice::from_raw_parts_mut(buf, n).copy_from_slice(&v[..n]);
        }
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tg_genotype_free(g: *mut TgGenotype) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Ideal 256×256 skeleton of `g`.
///
/// # Safety
/// `g` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tg_skeleton_oracle(g: *const TgGenotype, out: *mut *mut TgImage) -> TgStatus {
    guard(|| {
        let g = deref(g, "genotype")?;
        let out = out_ptr(out)?;
        *out = boxed(TgImage(oracle_skeleton(&g.0, &PageSpec::default()).image));
        Ok(())
    })
}

/// Degraded 256×256 skeleton (jitter/blur in page pixels).
///
/// # Safety
/// `g` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tg_skeleton_degraded(
    g: *const TgGenotype,
    jitter_px: u32,
    dropout_prob: f64,
    blur_radius: u32,
    speckle_prob: f64,
    seed: u64,
    out: *mut *mut TgImage,
) -> TgStatus {
    guard(|| {
        let g = deref(g, "genotype")?;
        let out = out_ptr(out)?;
        let params = DegradationParams {
            divider_jitter_px: jitter_px,
            segment_dropout_prob: dropout_prob,
            blur_radius,
            speckle_prob,
        };
        *out = boxed(TgImage(
            degraded_skeleton(&g.0, &PageSpec::default(), &params, seed)?.image,
        ));
        Ok(())
    })
}

/// Page-sized scan of `g` with words drawn per the named preset.
///
/// # Safety
/// `g` live; `config` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tg_render_scan(
    g: *const TgGenotype,
    config: *const c_char,
    seed: u64,
    out: *mut *mut TgImage,
) -> TgStatus {
    guard(|| {
        let g = deref(g, "genotype")?;
        let out = out_ptr(out)?;
        let cfg = preset(c_str(config, "config")?)?;
        let img = render_scan(&g.0, &cfg, &PageSpec::default(), &RenderStyle::default(), seed);
        *out = boxed(TgImage(img));
        Ok(())
    })
}

/// Loads an 8-bit grayscale PNG.
///
/// # Safety
/// `path` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tg_image_load_png(path: *const c_char, out: *mut *mut TgImage) -> TgStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let path = PathBuf::from(c_str(path, "path")?);
        *out = boxed(TgImage(RasterImage::load_png(&path)?));
        Ok(())
    })
}

/// # Safety
/// `img` live; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tg_image_save_png(img: *const TgImage, path: *const c_char) -> TgStatus {
    guard(|| {
        let img = deref(img, "image")?;
        let path = PathBuf::from(c_str(path, "path")?);
        img.0.save_png(&path)?;
        Ok(())
    })
}

/// # Safety
/// `img` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn tg_image_width(img: *const TgImage) -> usize {
    img.as_ref().map_or(0, |i| i.0.width())
}

/// # Safety
/// `img` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn tg_image_height(img: *const TgImage) -> usize {
    img.as_ref().map_or(0, |i| i.0.height())
}

/// Row-major pixels, `width * height` floats, valid while `img` lives.
///
/// # Safety
/// `img` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn tg_image_pixels(img: *const TgImage) -> *const f32 {
    img.as_ref().map_or(ptr::null(), |i| i.0.pixels().as_ptr())
}

/// # Safety
/// `img` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tg_image_free(img: *mut TgImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Projection estimate from a 256×256 skeleton, default thresholds.
///
/// # Safety
/// `target` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tg_initial_genotype(target: *const TgImage, out: *mut *mut TgGenotype) -> TgStatus {
    guard(|| {
        let target = model_target(&deref(target, "target")?.0)?;
        let out = out_ptr(out)?;
        let g = initial_genotype(&target, &PageSpec::default(), &Thresholds::default())?;
        *out = boxed(TgGenotype(g));
        Ok(())
    })
}

/// Objective value of `candidate` against `target` (both 256×256).
///
/// # Safety
/// `target`, `candidate` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tg_objective(
    kind: TgObjective,
    target: *const TgImage,
    candidate: *const TgImage,
    out: *mut f64,
) -> TgStatus {
    guard(|| {
        let t = &deref(target, "target")?.0;
        let u = &deref(candidate, "candidate")?.0;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        *out = objective_spec(kind).evaluate(t, t, u)?;
        Ok(())
    })
}

/// Runs the GA with default parameters (except `max_epochs` when non-zero
/// and `seed`). A null `init` starts from the projection estimate.
///
/// # Safety
/// `target` live; `init` null or live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tg_fit(
    target: *const TgImage,
    init: *const TgGenotype,
    kind: TgObjective,
    max_epochs: u32,
    seed: u64,
    out: *mut *mut TgFitResult,
) -> TgStatus {
    guard(|| {
        let target = model_target(&deref(target, "target")?.0)?;
        let out = out_ptr(out)?;
        let page = PageSpec::default();
        let start = match init.as_ref() {
            Some(g) => g.0.clone(),
            None => initial_genotype(&target, &page, &Thresholds::default())?,
        };
        let mut params = GaParams {
            seed,
            ..GaParams::default()
        };
        if max_epochs > 0 {
            params.max_epochs = max_epochs as usize;
        }
        let r = evolve(&target, None, &objective_spec(kind), &[start], &page, &params)?;
        *out = boxed(TgFitResult(r));
        Ok(())
    })
}

/// New handle holding the best genotype of a fit.
///
/// # Safety
/// `r` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tg_fit_result_best(r: *const TgFitResult, out: *mut *mut TgGenotype) -> TgStatus {
    guard(|| {
        let r = deref(r, "fit result")?;
        let out = out_ptr(out)?;
        *out = boxed(TgGenotype(r.0.best_genotype.clone()));
        Ok(())
    })
}

/// Best objective value; NaN for a null handle.
///
/// # Safety
/// `r` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn tg_fit_result_objective(r: *const TgFitResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.best_objective)
}

/// # Safety
/// `r` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn tg_fit_result_epochs(r: *const TgFitResult) -> usize {
    r.as_ref().map_or(0, |r| r.0.epochs_run)
}

/// # Safety
/// `r` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn tg_fit_result_converged(r: *const TgFitResult) -> bool {
    r.as_ref().is_some_and(|r| r.0.converged)
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tg_fit_result_free(r: *mut TgFitResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Candidate phenotype (all dividers, model resolution) of `g`.
///
/// # Safety
/// `g` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tg_candidate_phenotype(g: *const TgGenotype, out: *mut *mut TgImage) -> TgStatus {
    guard(|| {
        let g = deref(g, "genotype")?;
        let out = out_ptr(out)?;
        *out = boxed(TgImage(candidate_phenotype(&g.0, &PageSpec::default())));
        Ok(())
    })
}
