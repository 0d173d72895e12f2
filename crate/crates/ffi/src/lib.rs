//! C ABI over foalkit.
//!
//! Every function returns an `FkStatus`; outputs go through pointer
//! arguments. Handles are opaque and owned by the caller, who releases them
//! with the matching `*_free` function. After a non-OK status,
//! `fk_last_error_message` describes the failure on the calling thread.
//!
//! Images are row-major, channel-interleaved `double` buffers in [0, 1].
//! Masks are `uint8_t` buffers where any nonzero byte is set.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use foalkit::categories::CategoryConfig;
use foalkit::imagecore::{BinaryMask, Image, LabelMap};
use foalkit::losses::LossWeights;
use foalkit::metrics::ApceConfig;
use foalkit::oamix::{build_mixing_masks, compose_mix_a, compose_mix_b, object_and_road_masks};
use foalkit::scheduler::{Domain, Pool, SchedulerState};
use foalkit::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    EmptyMask = 4,
    EmptyDataset = 5,
    NegativeLoss = 6,
    NoValidPixels = 7,
    Io = 8,
    Parse = 9,
    Internal = 10,
}

/// Image domain selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FkDomain {
    /// Daytime color.
    A = 0,
    /// Thermal infrared.
    B = 1,
}

/// Pool a scheduler draw came from.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FkPool {
    All = 0,
    Soc = 1,
}

/// Opaque image handle.
pub struct FkImage(Image);

/// Opaque binary mask handle.
pub struct FkMask(BinaryMask);

/// Opaque label map handle.
pub struct FkLabels(LabelMap);

/// Opaque scheduler handle over `uint32_t` sample ids.
pub struct FkScheduler(SchedulerState<u32>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FkStatus {
    match e {
        Error::ShapeMismatch { .. } | Error::ChannelMismatch { .. } => FkStatus::ShapeMismatch,
        Error::EmptyMask(_) => FkStatus::EmptyMask,
        Error::EmptyDataset => FkStatus::EmptyDataset,
        Error::NegativeLoss(_) => FkStatus::NegativeLoss,
        Error::NoValidPixels => FkStatus::NoValidPixels,
        Error::Io { .. } | Error::MissingInput(_) => FkStatus::Io,
        Error::Parse { .. } => FkStatus::Parse,
        _ => FkStatus::InvalidArgument,
    }
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

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FkStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            FkStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            FkStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

fn domain(d: FkDomain) -> Domain {
    match d {
        FkDomain::A => Domain::A,
        FkDomain::B => Domain::B,
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL, or
/// 0 if there is none.
#[no_mangle]
pub unsafe extern "C" fn fk_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---------------------------------------------------------------------------
// Handles

/// Creates an image from `height * width * channels` values.
#[no_mangle]
pub unsafe extern "C" fn fk_image_new(
    height: usize,
    width: usize,
    channels: usize,
    data: *const f64,
    image_out: *mut *mut FkImage,
) -> FkStatus {
    guard(|| {
        let slot = out(image_out, "image_out")?;
        let n = height.checked_mul(width).and_then(|v| v.checked_mul(channels));
        let n = n.ok_or_else(|| Error::InvalidParameter("image size overflows".into()))?;
        let values = input(data, n, "data")?.to_vec();
        *slot = Box::into_raw(Box::new(FkImage(Image::new(height, width, channels, values)?)));
        Ok(())
    })
}

/// Shape of an image; any output pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn fk_image_shape(
    image: *const FkImage,
    height: *mut usize,
    width: *mut usize,
    channels: *mut usize,
) -> FkStatus {
    guard(|| {
        let img = &deref(image, "image")?.0;
        if let Some(h) = height.as_mut() {
            *h = img.height();
        }
        if let Some(w) = width.as_mut() {
            *w = img.width();
        }
        if let Some(c) = channels.as_mut() {
            *c = img.channels();
        }
        Ok(())
    })
}

/// Copies image values into `buf`, which must hold `len` >= h*w*c doubles.
#[no_mangle]
pub unsafe extern "C" fn fk_image_copy(image: *const FkImage, buf: *mut f64, len: usize) -> FkStatus {
    guard(|| {
        let img = &deref(image, "image")?.0;
        let data = img.data();
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        if len < data.len() {
            return Err(Error::InvalidParameter(format!("buffer holds {len} values, image has {}", data.len())).into());
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fk_image_free(image: *mut FkImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// Creates a mask from `height * width` bytes (nonzero = set).
#[no_mangle]
pub unsafe extern "C" fn fk_mask_new(
    height: usize,
    width: usize,
    bits: *const u8,
    mask_out: *mut *mut FkMask,
) -> FkStatus {
    guard(|| {
        let slot = out(mask_out, "mask_out")?;
        let n = height.checked_mul(width).ok_or_else(|| Error::InvalidParameter("mask size overflows".into()))?;
        let bits = input(bits, n, "bits")?.iter().map(|&b| b != 0).collect();
        *slot = Box::into_raw(Box::new(FkMask(BinaryMask::new(height, width, bits)?)));
        Ok(())
    })
}

/// Copies mask bits (0 or 1) into `buf`, which must hold `len` >= h*w bytes.
#[no_mangle]
pub unsafe extern "C" fn fk_mask_copy(mask: *const FkMask, buf: *mut u8, len: usize) -> FkStatus {
    guard(|| {
        let bits = deref(mask, "mask")?.0.bits();
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        if len < bits.len() {
            return Err(Error::InvalidParameter(format!("buffer holds {len} bytes, mask has {}", bits.len())).into());
        }
        for (i, &b) in bits.iter().enumerate() {
            *buf.add(i) = u8::from(b);
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fk_mask_free(mask: *mut FkMask) {
    if !mask.is_null() {
        drop(Box::from_raw(mask));
    }
}

/// Creates a label map from `height * width` category ids.
#[no_mangle]
pub unsafe extern "C" fn fk_labels_new(
    height: usize,
    width: usize,
    ids: *const u8,
    labels_out: *mut *mut FkLabels,
) -> FkStatus {
    guard(|| {
        let slot = out(labels_out, "labels_out")?;
        let n = height.checked_mul(width).ok_or_else(|| Error::InvalidParameter("label size overflows".into()))?;
        let ids = input(ids, n, "ids")?.to_vec();
        *slot = Box::into_raw(Box::new(FkLabels(LabelMap::new(height, width, ids)?)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fk_labels_free(labels: *mut FkLabels) {
    if !labels.is_null() {
        drop(Box::from_raw(labels));
    }
}

// ---------------------------------------------------------------------------
// Losses and metrics

/// Mean SSIM of two images of equal shape.
#[no_mangle]
pub unsafe extern "C" fn fk_ssim(a: *const FkImage, b: *const FkImage, value_out: *mut f64) -> FkStatus {
    guard(|| {
        let v = foalkit::imagecore::ssim(&deref(a, "a")?.0, &deref(b, "b")?.0)?;
        *out(value_out, "value_out")? = v;
        Ok(())
    })
}

/// Masked image distance with smooth-L1 weight `lambda_sl1`.
#[no_mangle]
pub unsafe extern "C" fn fk_midf(
    mask: *const FkMask,
    rec: *const FkImage,
    ori: *const FkImage,
    lambda_sl1: f64,
    value_out: *mut f64,
) -> FkStatus {
    guard(|| {
        let w = LossWeights { lambda_sl1, ..Default::default() };
        w.validate()?;
        let v = foalkit::losses::midf(&deref(mask, "mask")?.0, &deref(rec, "rec")?.0, &deref(ori, "ori")?.0, &w)?;
        *out(value_out, "value_out")? = v;
        Ok(())
    })
}

/// Edge precision of a translation against a single-channel source, with
/// the default thresholds and tolerance.
#[no_mangle]
pub unsafe extern "C" fn fk_apce(
    translated: *const FkImage,
    source: *const FkImage,
    strict: bool,
    value_out: *mut f64,
) -> FkStatus {
    guard(|| {
        let cfg = ApceConfig { strict, ..Default::default() };
        let v = foalkit::metrics::apce(&deref(translated, "translated")?.0, &deref(source, "source")?.0, &cfg)?;
        *out(value_out, "value_out")? = v;
        Ok(())
    })
}

/// Mean IoU over `classes`; pixels labelled 255 in `gt` are ignored.
#[no_mangle]
pub unsafe extern "C" fn fk_class_miou(
    pred: *const FkLabels,
    gt: *const FkLabels,
    classes: *const u8,
    n_classes: usize,
    value_out: *mut f64,
) -> FkStatus {
    guard(|| {
        let classes = input(classes, n_classes, "classes")?;
        let r = foalkit::metrics::class_iou(&deref(pred, "pred")?.0, &deref(gt, "gt")?.0, classes)?;
        *out(value_out, "value_out")? = r.miou;
        Ok(())
    })
}

/// Occlusion-aware mix with the default category configuration. Outputs
/// the mixed image, the pasted-region mask and the luminance factor; any
/// output pointer except `mixed_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn fk_oamix(
    real_image: *const FkImage,
    fake_image: *const FkImage,
    real_labels: *const FkLabels,
    fake_labels: *const FkLabels,
    domain_sel: FkDomain,
    mixed_out: *mut *mut FkImage,
    pasted_out: *mut *mut FkMask,
    ala_factor_out: *mut f64,
) -> FkStatus {
    guard(|| {
        let slot = out(mixed_out, "mixed_out")?;
        let cfg = CategoryConfig::default();
        let (x_r, x_f) = (&deref(real_image, "real_image")?.0, &deref(fake_image, "fake_image")?.0);
        let (l_r, l_f) = (&deref(real_labels, "real_labels")?.0, &deref(fake_labels, "fake_labels")?.0);
        if x_r.dims() != l_r.dims() {
            return Err(Error::ShapeMismatch { expected: x_r.dims().to_string(), found: l_r.dims().to_string() }.into());
        }
        let (obj, road) = object_and_road_masks(l_r, &cfg);
        let (q_o, q_f) = build_mixing_masks(l_f, &obj, &road, &cfg)?;
        let mix = match domain(domain_sel) {
            Domain::A => compose_mix_a(x_f, x_r, &q_o, &q_f)?,
            Domain::B => compose_mix_b(x_f, x_r, &q_o, &q_f, &road)?,
        };
        if let Some(p) = pasted_out.as_mut() {
            *p = Box::into_raw(Box::new(FkMask(mix.context.complement())));
        }
        if let Some(a) = ala_factor_out.as_mut() {
            *a = mix.ala_factor;
        }
        *slot = Box::into_raw(Box::new(FkImage(mix.mixed)));
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Scheduler

/// Creates a scheduler. `soc_*` ids must be contained in `all_*`.
#[no_mangle]
pub unsafe extern "C" fn fk_scheduler_new(
    soc_a: *const u32,
    n_soc_a: usize,
    all_a: *const u32,
    n_all_a: usize,
    soc_b: *const u32,
    n_soc_b: usize,
    all_b: *const u32,
    n_all_b: usize,
    seed: u64,
    scheduler_out: *mut *mut FkScheduler,
) -> FkStatus {
    guard(|| {
        let slot = out(scheduler_out, "scheduler_out")?;
        let pools = [
            (input(soc_a, n_soc_a, "soc_a")?.to_vec(), input(all_a, n_all_a, "all_a")?.to_vec()),
            (input(soc_b, n_soc_b, "soc_b")?.to_vec(), input(all_b, n_all_b, "all_b")?.to_vec()),
        ];
        *slot = Box::into_raw(Box::new(FkScheduler(SchedulerState::new(pools, seed)?)));
        Ok(())
    })
}

/// Records one iteration's losses for a domain.
#[no_mangle]
pub unsafe extern "C" fn fk_scheduler_update(
    scheduler: *mut FkScheduler,
    domain_sel: FkDomain,
    z_soc: f64,
    z_global: f64,
) -> FkStatus {
    guard(|| {
        out(scheduler, "scheduler")?.0.update_state(domain(domain_sel), z_soc, z_global)?;
        Ok(())
    })
}

/// Draws the next sample id for a domain. `pool_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn fk_scheduler_next(
    scheduler: *mut FkScheduler,
    domain_sel: FkDomain,
    id_out: *mut u32,
    pool_out: *mut FkPool,
) -> FkStatus {
    guard(|| {
        let s = out(scheduler, "scheduler")?;
        let id_slot = out(id_out, "id_out")?;
        let (id, pool) = s.0.next_sample(domain(domain_sel))?;
        *id_slot = id;
        if let Some(p) = pool_out.as_mut() {
            *p = match pool {
                Pool::All => FkPool::All,
                Pool::Soc => FkPool::Soc,
            };
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fk_scheduler_free(scheduler: *mut FkScheduler) {
    if !scheduler.is_null() {
        drop(Box::from_raw(scheduler));
    }
}
