//! C ABI for the embkit toolkit.
//!
//! Conventions:
//!
//! * Fallible functions return an [`EmbkitStatus`]; on failure a message is
//!   kept per thread and read with [`embkit_last_error`].
//! * Objects are opaque handles created by `*_new`/`*_load` and released by
//!   the matching `*_free`. Passing NULL to a `*_free` function is a no-op.
//! * Strings are NUL-terminated UTF-8. Strings returned by the library are
//!   released with [`embkit_string_free`].
//! * Panics never cross the boundary; they are reported as
//!   `EMBKIT_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use libc::{c_char, c_double, c_float, size_t};

use embkit::corpus::Tokenizer;
use embkit::dedup::{DedupConfig, DedupUnit, Deduplicator};
use embkit::embstore::{cosine, load_static, StaticEmbeddings};
use embkit::ner::{macro_f1, parse_ner, relative_difference, LabelMap, LabelStats};
use embkit::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbkitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Format = 5,
    NotFound = 6,
    ZeroVector = 7,
    DimensionMismatch = 8,
    Alignment = 9,
    Panic = 10,
    Internal = 11,
}

/// Counters of a deduplicator.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EmbkitDedupStats {
    pub units_in: u64,
    pub units_kept: u64,
    pub tokens_in: u64,
    pub tokens_kept: u64,
    pub distinct_shingles: u64,
}

/// Token-level F1 of the three entity classes and their mean.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EmbkitScores {
    pub per: c_double,
    pub loc: c_double,
    pub org: c_double,
    pub macro_f1: c_double,
}

/// Opaque tokenizer handle.
pub struct EmbkitTokenizer(Tokenizer);

/// Opaque deduplicator handle.
pub struct EmbkitDedup(Deduplicator);

/// Opaque static-embedding table handle.
pub struct EmbkitEmbeddings(StaticEmbeddings);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(EmbkitStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } | Error::Stream(_) => EmbkitStatus::Io,
            Error::Format { .. } | Error::Json(_) => EmbkitStatus::Format,
            Error::ZeroVector => EmbkitStatus::ZeroVector,
            Error::DimensionMismatch { .. } => EmbkitStatus::DimensionMismatch,
            Error::Alignment(_) => EmbkitStatus::Alignment,
            Error::InvalidArgument(_) | Error::Config(_) | Error::EmptyResult(_) => EmbkitStatus::InvalidArgument,
            _ => EmbkitStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T> = std::result::Result<T, Failure>;

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard<F: FnOnce() -> FfiResult<()>>(f: F) -> EmbkitStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EmbkitStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            EmbkitStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(EmbkitStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(EmbkitStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

fn into_c_string(s: String) -> FfiResult<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(EmbkitStatus::Internal, "output contains a NUL byte".into()))
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn embkit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library.
///
/// # Safety
/// `s` must be NULL or a pointer returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn embkit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a tokenizer with the built-in rules for `lang`.
///
/// # Safety
/// `lang` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn embkit_tokenizer_new(lang: *const c_char, out: *mut *mut EmbkitTokenizer) -> EmbkitStatus {
    guard(|| {
        let lang = str_arg(lang, "lang")?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(EmbkitTokenizer(Tokenizer::for_language(lang))));
        Ok(())
    })
}

/// # Safety
/// `t` must be NULL or a handle from [`embkit_tokenizer_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn embkit_tokenizer_free(t: *mut EmbkitTokenizer) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Segments and tokenizes a paragraph. The result holds one sentence per
/// line with tokens separated by single spaces; free it with
/// [`embkit_string_free`].
///
/// # Safety
/// `t` must be a live tokenizer, `text` a valid C string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn embkit_tokenize(t: *const EmbkitTokenizer, text: *const c_char, out: *mut *mut c_char) -> EmbkitStatus {
    guard(|| {
        let t = ref_arg(t, "tokenizer")?;
        let text = str_arg(text, "text")?;
        let out = out_arg(out, "out")?;
        let lines: Vec<String> = t.0.tokenize_paragraph(text).iter().map(ToString::to_string).collect();
        *out = into_c_string(lines.join("\n"))?;
        Ok(())
    })
}

/// Creates a deduplicator over `n`-token shingles that drops units whose
/// duplicate-shingle ratio exceeds `threshold`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn embkit_dedup_new(n: size_t, threshold: c_double, out: *mut *mut EmbkitDedup) -> EmbkitStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let d = Deduplicator::new(DedupConfig { n, threshold, unit: DedupUnit::Paragraph })?;
        *out = Box::into_raw(Box::new(EmbkitDedup(d)));
        Ok(())
    })
}

/// # Safety
/// `d` must be NULL or a handle from [`embkit_dedup_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn embkit_dedup_free(d: *mut EmbkitDedup) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Offers the next unit (whitespace-separated tokens); `keep` is set to 1
/// when it is kept and 0 when it is a near duplicate of earlier units.
///
/// # Safety
/// `d` must be a live deduplicator, `unit` a valid C string, `keep` writable.
#[no_mangle]
pub unsafe extern "C" fn embkit_dedup_offer(d: *mut EmbkitDedup, unit: *const c_char, keep: *mut u8) -> EmbkitStatus {
    guard(|| {
        let d = out_arg(d, "deduplicator")?;
        let unit = str_arg(unit, "unit")?;
        let keep = out_arg(keep, "keep")?;
        let tokens: Vec<&str> = unit.split_whitespace().collect();
        *keep = u8::from(d.0.offer(&tokens));
        Ok(())
    })
}

/// # Safety
/// `d` must be a live deduplicator and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn embkit_dedup_stats(d: *const EmbkitDedup, out: *mut EmbkitDedupStats) -> EmbkitStatus {
    guard(|| {
        let d = ref_arg(d, "deduplicator")?;
        let out = out_arg(out, "out")?;
        let s = d.0.stats();
        *out = EmbkitDedupStats {
            units_in: s.units_in,
            units_kept: s.units_kept,
            tokens_in: s.tokens_in,
            tokens_kept: s.tokens_kept,
            distinct_shingles: s.distinct_shingles,
        };
        Ok(())
    })
}

/// Loads a static vector file (`word v1 v2 ...` per line, optional
/// `count dim` header).
///
/// # Safety
/// `path` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn embkit_embeddings_load(path: *const c_char, out: *mut *mut EmbkitEmbeddings) -> EmbkitStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let emb = load_static(Path::new(path), None)?;
        *out = Box::into_raw(Box::new(EmbkitEmbeddings(emb)));
        Ok(())
    })
}

/// # Safety
/// `e` must be NULL or a handle from [`embkit_embeddings_load`], not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn embkit_embeddings_free(e: *mut EmbkitEmbeddings) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Number of words; 0 for NULL.
///
/// # Safety
/// `e` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn embkit_embeddings_len(e: *const EmbkitEmbeddings) -> size_t {
    e.as_ref().map_or(0, |e| e.0.len())
}

/// Vector dimension; 0 for NULL.
///
/// # Safety
/// `e` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn embkit_embeddings_dim(e: *const EmbkitEmbeddings) -> size_t {
    e.as_ref().map_or(0, |e| e.0.dim())
}

/// Copies the vector of `word` into `out`, which holds `out_len` floats.
///
/// # Safety
/// `e` must be a live handle, `word` a valid C string and `out` writable for
/// `out_len` floats.
#[no_mangle]
pub unsafe extern "C" fn embkit_embeddings_get(
    e: *const EmbkitEmbeddings,
    word: *const c_char,
    out: *mut c_float,
    out_len: size_t,
) -> EmbkitStatus {
    guard(|| {
        let e = ref_arg(e, "embeddings")?;
        let word = str_arg(word, "word")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = e
            .0
            .get(word)
            .ok_or_else(|| Failure(EmbkitStatus::NotFound, format!("'{word}' is not in the vocabulary")))?;
        if out_len != v.len() {
            return Err(Error::DimensionMismatch { expected: v.len(), actual: out_len }.into());
        }
        std::slice::from_raw_parts_mut(out, out_len).copy_from_slice(v);
        Ok(())
    })
}

/// Cosine similarity of two words' vectors.
///
/// # Safety
/// `e` must be a live handle, `a` and `b` valid C strings, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn embkit_embeddings_similarity(
    e: *const EmbkitEmbeddings,
    a: *const c_char,
    b: *const c_char,
    out: *mut c_double,
) -> EmbkitStatus {
    guard(|| {
        let e = ref_arg(e, "embeddings")?;
        let (a, b) = (str_arg(a, "a")?, str_arg(b, "b")?);
        let out = out_arg(out, "out")?;
        let lookup = |w: &str| {
            e.0.get(w)
                .ok_or_else(|| Failure(EmbkitStatus::NotFound, format!("'{w}' is not in the vocabulary")))
        };
        *out = cosine(lookup(a)?, lookup(b)?)?;
        Ok(())
    })
}

/// Cosine similarity of two vectors of length `dim`.
///
/// # Safety
/// `u` and `v` must be readable for `dim` floats and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn embkit_cosine(u: *const c_float, v: *const c_float, dim: size_t, out: *mut c_double) -> EmbkitStatus {
    guard(|| {
        if u.is_null() || v.is_null() {
            return Err(null("vector"));
        }
        let out = out_arg(out, "out")?;
        let (u, v) = (std::slice::from_raw_parts(u, dim), std::slice::from_raw_parts(v, dim));
        *out = cosine(u, v)?;
        Ok(())
    })
}

/// Share of entity tokens, `(per + loc + org) / n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn embkit_label_density(per: u64, loc: u64, org: u64, n: u64, out: *mut c_double) -> EmbkitStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = LabelStats::from_counts(per, loc, org, n)?.density;
        Ok(())
    })
}

/// `(a - b) / b`; fails unless `b > 0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn embkit_relative_difference(a: c_double, b: c_double, out: *mut c_double) -> EmbkitStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = relative_difference(a, b)?;
        Ok(())
    })
}

/// Token-level macro-F1 of a prediction file against a gold file, both in
/// the two-column format with the default label reduction.
///
/// # Safety
/// `gold` and `pred` must be valid C strings and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn embkit_macro_f1(gold: *const c_char, pred: *const c_char, out: *mut EmbkitScores) -> EmbkitStatus {
    guard(|| {
        let (gold, pred) = (str_arg(gold, "gold")?, str_arg(pred, "pred")?);
        let out = out_arg(out, "out")?;
        let map = LabelMap::default();
        let g = parse_ner(gold, &map)?;
        let p = parse_ner(pred, &map)?;
        let s = macro_f1(&g.sentences, &p.sentences)?.scores;
        *out = EmbkitScores { per: s.per, loc: s.loc, org: s.org, macro_f1: s.macro_f1 };
        Ok(())
    })
}
