//! C interface to the `verdict` library.
//!
//! Every fallible function returns a [`VerdictStatus`] and writes its result
//! through an out-pointer. On failure a message describing the error is kept
//! per thread and can be read with [`verdict_last_error_message`].
//!
//! Objects are opaque handles created by this library and released with
//! their matching `_free` function. Strings returned through out-pointers are
//! owned by the caller and must be released with [`verdict_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use verdict::corpus::{generate_synthetic, parse_corpus, CorpusFormat, Document, SynthSpec};
use verdict::eval::{expected_dummy_accuracy, run_experiment, train_pipeline, ExperimentConfig, TrainedPipeline};
use verdict::textnorm::normalize;
use verdict::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Config = 5,
    Domain = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictFormat {
    Jsonl = 0,
    Xml = 1,
}

/// A parsed corpus.
pub struct VerdictCorpus {
    docs: Vec<Document>,
}

/// A trained classification pipeline.
pub struct VerdictPipeline {
    inner: TrainedPipeline,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(VerdictStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) => VerdictStatus::Io,
            Error::MalformedRecord { .. } | Error::Json(_) => VerdictStatus::Parse,
            Error::Config(_) | Error::InvalidLabel(_) => VerdictStatus::Config,
            _ => VerdictStatus::Domain,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> VerdictStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VerdictStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            VerdictStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(VerdictStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(VerdictStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(VerdictStatus::Domain, "result contains a NUL byte".into()))
}

fn experiment_config(json: Option<&str>) -> Result<ExperimentConfig, Failure> {
    match json {
        None => Ok(ExperimentConfig::default()),
        Some(s) => {
            serde_json::from_str(s).map_err(|e| Failure(VerdictStatus::Config, format!("experiment config: {e}")))
        }
    }
}

fn corpus_format(f: VerdictFormat) -> CorpusFormat {
    match f {
        VerdictFormat::Jsonl => CorpusFormat::Jsonl,
        VerdictFormat::Xml => CorpusFormat::Xml,
    }
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn verdict_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn verdict_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn verdict_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a corpus held in memory.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verdict_corpus_from_buffer(
    data: *const u8,
    len: usize,
    format: VerdictFormat,
    out: *mut *mut VerdictCorpus,
) -> VerdictStatus {
    guard(|| {
        if data.is_null() && len > 0 {
            return Err(null("data"));
        }
        let bytes = if len == 0 { &[][..] } else { std::slice::from_raw_parts(data, len) };
        let docs = parse_corpus(bytes, corpus_format(format))?;
        write_out(out, Box::into_raw(Box::new(VerdictCorpus { docs })))
    })
}

/// Parses a corpus file; the format follows the extension (`.xml` or JSONL).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verdict_corpus_from_path(path: *const c_char, out: *mut *mut VerdictCorpus) -> VerdictStatus {
    guard(|| {
        let path = Path::new(str_arg(path, "path")?);
        let file = std::fs::File::open(path).map_err(Error::from)?;
        let docs = parse_corpus(std::io::BufReader::new(file), CorpusFormat::from_path(path))?;
        write_out(out, Box::into_raw(Box::new(VerdictCorpus { docs })))
    })
}

/// Generates a synthetic corpus. `spec_json` may be NULL for the defaults.
///
/// # Safety
/// `spec_json` must be NULL or a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verdict_corpus_synthetic(
    spec_json: *const c_char,
    seed: u64,
    out: *mut *mut VerdictCorpus,
) -> VerdictStatus {
    guard(|| {
        let spec: SynthSpec = match opt_str_arg(spec_json, "spec_json")? {
            None => SynthSpec::default(),
            Some(s) => {
                serde_json::from_str(s).map_err(|e| Failure(VerdictStatus::Config, format!("synthetic spec: {e}")))?
            }
        };
        let docs = generate_synthetic(&spec, seed)?;
        write_out(out, Box::into_raw(Box::new(VerdictCorpus { docs })))
    })
}

/// Number of documents in `corpus`, or 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn verdict_corpus_len(corpus: *const VerdictCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.docs.len())
}

/// # Safety
/// `corpus` must be NULL or a live handle, which is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn verdict_corpus_free(corpus: *mut VerdictCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Cross-validates the SVM and the baseline and returns the report as JSON.
/// `config_json` may be NULL for the defaults.
///
/// # Safety
/// `corpus` must be a live handle, `config_json` NULL or NUL-terminated, and
/// `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn verdict_cv_run(
    corpus: *const VerdictCorpus,
    config_json: *const c_char,
    out_json: *mut *mut c_char,
) -> VerdictStatus {
    guard(|| {
        let corpus = corpus.as_ref().ok_or_else(|| null("corpus"))?;
        let config = experiment_config(opt_str_arg(config_json, "config_json")?)?;
        let report = run_experiment(&corpus.docs, &config)?;
        write_out(out_json, c_string(report.to_json()?)?)
    })
}

/// Trains a pipeline on the whole corpus.
///
/// # Safety
/// As for [`verdict_cv_run`], with `out` writable.
#[no_mangle]
pub unsafe extern "C" fn verdict_train(
    corpus: *const VerdictCorpus,
    config_json: *const c_char,
    out: *mut *mut VerdictPipeline,
) -> VerdictStatus {
    guard(|| {
        let corpus = corpus.as_ref().ok_or_else(|| null("corpus"))?;
        let config = experiment_config(opt_str_arg(config_json, "config_json")?)?;
        let inner = train_pipeline(&corpus.docs, &config)?;
        write_out(out, Box::into_raw(Box::new(VerdictPipeline { inner })))
    })
}

/// # Safety
/// `json` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn verdict_pipeline_from_json(
    json: *const c_char,
    out: *mut *mut VerdictPipeline,
) -> VerdictStatus {
    guard(|| {
        let inner = TrainedPipeline::from_json(str_arg(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(VerdictPipeline { inner })))
    })
}

/// # Safety
/// `pipeline` must be a live handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn verdict_pipeline_to_json(
    pipeline: *const VerdictPipeline,
    out_json: *mut *mut c_char,
) -> VerdictStatus {
    guard(|| {
        let p = pipeline.as_ref().ok_or_else(|| null("pipeline"))?;
        write_out(out_json, c_string(p.inner.to_json()?)?)
    })
}

/// Predicts the label of one raw description.
///
/// # Safety
/// `pipeline` must be a live handle, `text` NUL-terminated and `out_label`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn verdict_pipeline_predict(
    pipeline: *const VerdictPipeline,
    text: *const c_char,
    out_label: *mut *mut c_char,
) -> VerdictStatus {
    guard(|| {
        let p = pipeline.as_ref().ok_or_else(|| null("pipeline"))?;
        let text = str_arg(text, "text")?;
        let label = p.inner.predict_texts(&[text])?.pop().expect("one prediction per text");
        write_out(out_label, c_string(label)?)
    })
}

/// # Safety
/// `pipeline` must be NULL or a live handle, which is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn verdict_pipeline_free(pipeline: *mut VerdictPipeline) {
    if !pipeline.is_null() {
        drop(Box::from_raw(pipeline));
    }
}

/// Lowercases, strips accents and replaces punctuation with spaces.
///
/// # Safety
/// `text` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn verdict_normalize(text: *const c_char, out: *mut *mut c_char) -> VerdictStatus {
    guard(|| write_out(out, c_string(normalize(str_arg(text, "text")?))?))
}

/// Expected accuracy of a prior-sampling baseline for the given class counts.
///
/// # Safety
/// `counts` must point to `len` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verdict_expected_dummy_accuracy(
    counts: *const u64,
    len: usize,
    out: *mut f64,
) -> VerdictStatus {
    guard(|| {
        if counts.is_null() && len > 0 {
            return Err(null("counts"));
        }
        let counts = if len == 0 { &[][..] } else { std::slice::from_raw_parts(counts, len) };
        write_out(out, expected_dummy_accuracy(counts.iter().copied()))
    })
}
