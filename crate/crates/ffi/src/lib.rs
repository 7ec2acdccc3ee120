//! C ABI over the `lstsc` library.
//!
//! Every entry point returns an [`LstscStatus`]. On failure a description
//! is available from [`lstsc_last_error_message`] on the same thread.
//! Feature tensors are returned behind an opaque [`LstscFeatures`] handle
//! that the caller releases with [`lstsc_features_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use lstsc::coherence::{compute_lstsc, model_features, Plane, Variant};
use lstsc::enhance::{enhance_stream, HeuristicMask};
use lstsc::metrics::si_sdr;
use lstsc::room::{simulate_rir, AbsorptionModel, ShoeboxRoom};
use lstsc::signal::{MultichannelAudio, Stft, StftConfig};
use lstsc::Error;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LstscStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    TooFewMicrophones = 3,
    UnsupportedSampleRate = 4,
    SignalTooShort = 5,
    BufferTooSmall = 6,
    Geometry = 7,
    DecayRangeNotReached = 8,
    MaskOutOfRange = 9,
    Internal = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> LstscStatus {
    match e {
        Error::TooFewMicrophones(_) => LstscStatus::TooFewMicrophones,
        Error::SampleRate { .. } => LstscStatus::UnsupportedSampleRate,
        Error::SignalTooShort { .. } => LstscStatus::SignalTooShort,
        Error::Geometry(_) | Error::SamplingBudgetExhausted(_) => LstscStatus::Geometry,
        Error::DecayRangeNotReached => LstscStatus::DecayRangeNotReached,
        Error::MaskOutOfRange { .. } => LstscStatus::MaskOutOfRange,
        _ => LstscStatus::InvalidArgument,
    }
}

fn fail(status: LstscStatus, msg: &str) -> LstscStatus {
    set_error(msg);
    status
}

fn guard<F: FnOnce() -> LstscStatus>(f: F) -> LstscStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(LstscStatus::Internal, "internal panic"),
    }
}

fn check(r: Result<(), Error>) -> LstscStatus {
    match r {
        Ok(()) => LstscStatus::Ok,
        Err(e) => fail(status_of(&e), &e.to_string()),
    }
}

fn variant(v: u32) -> Result<Variant, Error> {
    match v {
        1 => Ok(Variant::Lstsc1),
        2 => Ok(Variant::Lstsc2),
        3 => Ok(Variant::Lstsc3),
        4 => Ok(Variant::Lstsc4),
        _ => Err(Error::InvalidArgument(format!("variant {v} is not in 1..=4"))),
    }
}

/// # Safety
/// `data` must be valid for `frames * channels` reads.
unsafe fn audio_from_raw(
    data: *const f32,
    frames: usize,
    channels: usize,
    sample_rate: u32,
) -> Result<MultichannelAudio, Error> {
    let n = frames.checked_mul(channels).ok_or_else(|| Error::InvalidArgument("frames * channels overflows".into()))?;
    let raw = unsafe { slice::from_raw_parts(data, n) };
    let samples: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
    MultichannelAudio::from_interleaved(sample_rate, channels, &samples)
}

/// Opaque feature tensor: `planes` planes of `frames x bins` values.
pub struct LstscFeatures {
    frames: usize,
    bins: usize,
    planes: Vec<Vec<f32>>,
}

/// Message of the last failed call on this thread. The pointer stays valid
/// until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn lstsc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lstsc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Computes coherence features of an interleaved 16 kHz recording.
///
/// `variant_id` is 1 to 4. The handle holds four planes in the order local
/// coherence, global coherence, warped global coherence, forgetting factor;
/// variant 4 returns 48 ERB bands instead of 257 bins.
///
/// # Safety
/// `interleaved` must be valid for `frames * channels` reads and `out` for
/// one write.
#[no_mangle]
pub unsafe extern "C" fn lstsc_extract(
    interleaved: *const f32,
    frames: usize,
    channels: usize,
    sample_rate: u32,
    variant_id: u32,
    out: *mut *mut LstscFeatures,
) -> LstscStatus {
    guard(|| {
        if interleaved.is_null() || out.is_null() {
            return fail(LstscStatus::NullPointer, "null pointer argument");
        }
        unsafe { *out = ptr::null_mut() };
        let res = (|| {
            let cfg = variant(variant_id)?.config();
            let audio = unsafe { audio_from_raw(interleaved, frames, channels, sample_rate)? };
            audio.require_pipeline_rate()?;
            if audio.num_channels() < 2 {
                return Err(Error::TooFewMicrophones(audio.num_channels()));
            }
            let engine = Stft::new(StftConfig::default())?;
            let specs = audio.channels().iter().map(|c| engine.forward(c)).collect::<Result<Vec<_>, _>>()?;
            let f = model_features(&compute_lstsc(&specs, &cfg, None)?, &cfg)?;
            let planes = Plane::EXPORTED.iter().map(|&p| f.plane(p).iter().map(|&v| v as f32).collect()).collect();
            Ok(LstscFeatures { frames: f.frames(), bins: f.bins(), planes })
        })();
        match res {
            Ok(h) => {
                unsafe { *out = Box::into_raw(Box::new(h)) };
                LstscStatus::Ok
            }
            Err(e) => check(Err(e)),
        }
    })
}

/// # Safety
/// `features` must come from [`lstsc_extract`]; the out pointers may be
/// null.
#[no_mangle]
pub unsafe extern "C" fn lstsc_features_dims(
    features: *const LstscFeatures,
    frames: *mut usize,
    bins: *mut usize,
    planes: *mut usize,
) -> LstscStatus {
    guard(|| {
        let Some(f) = (unsafe { features.as_ref() }) else {
            return fail(LstscStatus::NullPointer, "null features handle");
        };
        for (p, v) in [(frames, f.frames), (bins, f.bins), (planes, f.planes.len())] {
            if !p.is_null() {
                unsafe { *p = v };
            }
        }
        LstscStatus::Ok
    })
}

/// Copies plane `plane` (row-major, `frames * bins` values) into `dst`.
///
/// # Safety
/// `features` must come from [`lstsc_extract`] and `dst` be valid for
/// `dst_len` writes.
#[no_mangle]
pub unsafe extern "C" fn lstsc_features_copy_plane(
    features: *const LstscFeatures,
    plane: usize,
    dst: *mut f32,
    dst_len: usize,
) -> LstscStatus {
    guard(|| {
        let Some(f) = (unsafe { features.as_ref() }) else {
            return fail(LstscStatus::NullPointer, "null features handle");
        };
        if dst.is_null() {
            return fail(LstscStatus::NullPointer, "null destination");
        }
        let Some(src) = f.planes.get(plane) else {
            return fail(LstscStatus::InvalidArgument, &format!("plane {plane} out of range"));
        };
        if dst_len < src.len() {
            return fail(LstscStatus::BufferTooSmall, &format!("plane needs {} values", src.len()));
        }
        unsafe { ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len()) };
        LstscStatus::Ok
    })
}

/// Releases a features handle. Null is ignored.
///
/// # Safety
/// `features` must come from [`lstsc_extract`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lstsc_features_free(features: *mut LstscFeatures) {
    if !features.is_null() {
        drop(unsafe { Box::from_raw(features) });
    }
}

/// Enhances the first channel with the built-in coherence mask and writes
/// `frames` mono samples to `out`.
///
/// # Safety
/// `interleaved` must be valid for `frames * channels` reads and `out` for
/// `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn lstsc_enhance(
    interleaved: *const f32,
    frames: usize,
    channels: usize,
    sample_rate: u32,
    variant_id: u32,
    out: *mut f32,
    out_len: usize,
) -> LstscStatus {
    guard(|| {
        if interleaved.is_null() || out.is_null() {
            return fail(LstscStatus::NullPointer, "null pointer argument");
        }
        if out_len < frames {
            return fail(LstscStatus::BufferTooSmall, &format!("output needs {frames} samples"));
        }
        check((|| {
            let cfg = variant(variant_id)?.config();
            let audio = unsafe { audio_from_raw(interleaved, frames, channels, sample_rate)? };
            let res = enhance_stream(&audio, &cfg, &StftConfig::default(), &mut HeuristicMask)?;
            let dst = unsafe { slice::from_raw_parts_mut(out, frames) };
            for (d, s) in dst.iter_mut().zip(res.enhanced.channel(0)) {
                *d = *s as f32;
            }
            Ok(())
        })())
    })
}

/// Scale-invariant SDR of `estimate` against `reference`, in dB.
///
/// # Safety
/// Both signals must be valid for `len` reads and `out_db` for one write.
#[no_mangle]
pub unsafe extern "C" fn lstsc_si_sdr(
    reference: *const f64,
    estimate: *const f64,
    len: usize,
    out_db: *mut f64,
) -> LstscStatus {
    guard(|| {
        if reference.is_null() || estimate.is_null() || out_db.is_null() {
            return fail(LstscStatus::NullPointer, "null pointer argument");
        }
        let (r, e) = unsafe { (slice::from_raw_parts(reference, len), slice::from_raw_parts(estimate, len)) };
        match si_sdr(r, e) {
            Ok(rep) => {
                unsafe { *out_db = rep.value_db };
                LstscStatus::Ok
            }
            Err(err) => check(Err(err)),
        }
    })
}

/// Image-source impulse response in a shoebox room with the given
/// reverberation time (`t60 <= 0` requests an anechoic room).
///
/// The required length is always stored in `out_len`. When `capacity` is
/// smaller, nothing is copied and `BufferTooSmall` is returned; `taps` may
/// be null in that case to query the size.
///
/// # Safety
/// `room`, `source` and `mic` must point to three doubles each, `taps` be
/// valid for `capacity` writes (or null) and `out_len` for one write.
#[no_mangle]
pub unsafe extern "C" fn lstsc_simulate_rir(
    room: *const f64,
    t60: f64,
    source: *const f64,
    mic: *const f64,
    sample_rate: u32,
    taps: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> LstscStatus {
    guard(|| {
        if room.is_null() || source.is_null() || mic.is_null() || out_len.is_null() {
            return fail(LstscStatus::NullPointer, "null pointer argument");
        }
        let p3 = |p: *const f64| unsafe { [*p, *p.add(1), *p.add(2)] };
        let (dims, src, m) = (p3(room), p3(source), p3(mic));
        let rir = (|| {
            let shoebox = if t60 > 0.0 {
                ShoeboxRoom::from_t60(dims, t60, AbsorptionModel::default())?
            } else {
                ShoeboxRoom::anechoic(dims)?
            };
            simulate_rir(&shoebox, &src, &m, sample_rate)
        })();
        let rir = match rir {
            Ok(r) => r,
            Err(e) => return check(Err(e)),
        };
        unsafe { *out_len = rir.taps.len() };
        if taps.is_null() || capacity < rir.taps.len() {
            return fail(LstscStatus::BufferTooSmall, &format!("response needs {} taps", rir.taps.len()));
        }
        unsafe { ptr::copy_nonoverlapping(rir.taps.as_ptr(), taps, rir.taps.len()) };
        LstscStatus::Ok
    })
}
