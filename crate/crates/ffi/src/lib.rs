//! C ABI for pgschema.
//!
//! Graphs and schemas cross the boundary as opaque handles. Every fallible
//! call returns a `PgsStatus`; on failure `pgs_last_error` describes what went
//! wrong on the calling thread. Strings returned through `char **` outputs
//! are owned by the caller and must be released with `pgs_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pgschema::compat::check_compat;
use pgschema::diff::{compute_diff, render_semantic};
use pgschema::extract::{extract_schema, ExtractionOptions};
use pgschema::graph::{load_graph_str, validate_conformance, ConformanceOptions, PropertyGraph};
use pgschema::refine::{apply_edit, Edit};
use pgschema::schema::{schema_equal, SchemaGraph};
use pgschema::text::{parse_schema, schema_text};
use pgschema::workspace::schema_to_json;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    GraphError = 4,
    EditError = 5,
    Incompatible = 6,
    Panic = 7,
}

/// A loaded instance graph.
pub struct PgsGraph(PropertyGraph);

/// A schema graph.
pub struct PgsSchema(SchemaGraph);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let mut bytes = message.into().into_bytes();
    bytes.retain(|b| *b != 0);
    let message = CString::new(bytes).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

struct Fail(PgsStatus, String);

type FfiResult = Result<(), Fail>;

fn guard(f: impl FnOnce() -> FfiResult) -> PgsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PgsStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PgsStatus::Panic
        }
    }
}

unsafe fn text_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(PgsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(PgsStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn handle_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(PgsStatus::NullPointer, format!("{what} is null")))
}

fn check_out<T>(out: *mut T, what: &str) -> FfiResult {
    if out.is_null() {
        Err(Fail(PgsStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn put_string(out: *mut *mut c_char, s: String) {
    let mut bytes = s.into_bytes();
    bytes.retain(|b| *b != 0);
    *out = CString::new(bytes).expect("nul bytes removed").into_raw();
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn pgs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed only once.
#[no_mangle]
pub unsafe extern "C" fn pgs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a graph from JSON-lines text.
///
/// # Safety
/// `jsonl` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pgs_graph_load(jsonl: *const c_char, out: *mut *mut PgsGraph) -> PgsStatus {
    guard(|| {
        check_out(out, "out")?;
        let text = text_arg(jsonl, "jsonl")?;
        let g = load_graph_str(text).map_err(|e| Fail(PgsStatus::GraphError, e.to_string()))?;
        *out = Box::into_raw(Box::new(PgsGraph(g)));
        Ok(())
    })
}

/// # Safety
/// `g` must be NULL or a handle from `pgs_graph_load`, freed only once.
#[no_mangle]
pub unsafe extern "C" fn pgs_graph_free(g: *mut PgsGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Parses `.pgs` text.
///
/// # Safety
/// `text` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pgs_schema_parse(text: *const c_char, out: *mut *mut PgsSchema) -> PgsStatus {
    guard(|| {
        check_out(out, "out")?;
        let text = text_arg(text, "text")?;
        let s = parse_schema(text).map_err(|errors| {
            let lines: Vec<String> = errors.iter().map(ToString::to_string).collect();
            Fail(PgsStatus::ParseError, lines.join("\n"))
        })?;
        *out = Box::into_raw(Box::new(PgsSchema(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a schema handle from this library, freed only once.
#[no_mangle]
pub unsafe extern "C" fn pgs_schema_free(s: *mut PgsSchema) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Canonical `.pgs` text of a schema.
///
/// # Safety
/// `s` must be a live schema handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pgs_schema_serialize(s: *const PgsSchema, out: *mut *mut c_char) -> PgsStatus {
    guard(|| {
        check_out(out, "out")?;
        let s = handle_arg(s, "schema")?;
        put_string(out, schema_text(&s.0));
        Ok(())
    })
}

/// JSON rendering of a schema, as produced by `export --format json`.
///
/// # Safety
/// `s` must be a live schema handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pgs_schema_to_json(s: *const PgsSchema, out: *mut *mut c_char) -> PgsStatus {
    guard(|| {
        check_out(out, "out")?;
        let s = handle_arg(s, "schema")?;
        put_string(out, schema_to_json(&s.0).to_string());
        Ok(())
    })
}

/// 1 if the two schemas are equal by public names, 0 if not, -1 on a NULL
/// argument.
///
/// # Safety
/// Both handles must be NULL or live.
#[no_mangle]
pub unsafe extern "C" fn pgs_schema_equal(a: *const PgsSchema, b: *const PgsSchema) -> c_int {
    match (a.as_ref(), b.as_ref()) {
        (Some(a), Some(b)) => c_int::from(schema_equal(&a.0, &b.0)),
        _ => -1,
    }
}

/// Extracts a schema from a graph. Nonzero flags enable the option.
///
/// # Safety
/// `g` must be a live graph handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pgs_extract(
    g: *const PgsGraph,
    infer_cardinality: c_int,
    infer_subtypes: c_int,
    out: *mut *mut PgsSchema,
) -> PgsStatus {
    guard(|| {
        check_out(out, "out")?;
        let g = handle_arg(g, "graph")?;
        let opts = ExtractionOptions {
            infer_cardinality: infer_cardinality != 0,
            infer_subtypes: infer_subtypes != 0,
            ..ExtractionOptions::default()
        };
        *out = Box::into_raw(Box::new(PgsSchema(extract_schema(&g.0, opts))));
        Ok(())
    })
}

/// Conformance report as JSON (`{"ok": bool, "violations": [...]}`).
///
/// # Safety
/// Handles must be live and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pgs_validate(
    g: *const PgsGraph,
    s: *const PgsSchema,
    open_world: c_int,
    out: *mut *mut c_char,
) -> PgsStatus {
    guard(|| {
        check_out(out, "out")?;
        let (g, s) = (handle_arg(g, "graph")?, handle_arg(s, "schema")?);
        let report = validate_conformance(&g.0, &s.0, ConformanceOptions { open_world: open_world != 0 });
        put_string(out, serde_json::to_string(&report).expect("report serializes"));
        Ok(())
    })
}

/// Applies one JSON edit command and returns the edited schema as a new
/// handle; the input is left untouched.
///
/// # Safety
/// `s` must be live, `edit_json` a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pgs_apply_edit(
    s: *const PgsSchema,
    edit_json: *const c_char,
    out: *mut *mut PgsSchema,
) -> PgsStatus {
    guard(|| {
        check_out(out, "out")?;
        let s = handle_arg(s, "schema")?;
        let edit = Edit::from_json(text_arg(edit_json, "edit_json")?)
            .map_err(|e| Fail(PgsStatus::EditError, e.to_string()))?;
        let next = apply_edit(&s.0, &edit).map_err(|e| Fail(PgsStatus::EditError, e.to_string()))?;
        *out = Box::into_raw(Box::new(PgsSchema(next)));
        Ok(())
    })
}

/// Semantic diff, one sentence per line.
///
/// # Safety
/// Handles must be live and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pgs_diff_semantic(
    old: *const PgsSchema,
    new: *const PgsSchema,
    out: *mut *mut c_char,
) -> PgsStatus {
    guard(|| {
        check_out(out, "out")?;
        let (old, new) = (handle_arg(old, "old")?, handle_arg(new, "new")?);
        let mut text = render_semantic(&compute_diff(&old.0, &new.0)).join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        put_string(out, text);
        Ok(())
    })
}

/// Diff records as a JSON array of `{kind, subject, before, after}`.
///
/// # Safety
/// Handles must be live and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pgs_diff_json(old: *const PgsSchema, new: *const PgsSchema, out: *mut *mut c_char) -> PgsStatus {
    guard(|| {
        check_out(out, "out")?;
        let (old, new) = (handle_arg(old, "old")?, handle_arg(new, "new")?);
        let d = compute_diff(&old.0, &new.0);
        put_string(out, serde_json::to_string(&d).expect("diff serializes"));
        Ok(())
    })
}

/// Compatibility report as JSON. Returns `Incompatible` when the change
/// from `old` to `new` breaks existing data; the report is written either
/// way. `out` may be NULL if only the status is wanted.
///
/// # Safety
/// Handles must be live; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn pgs_check_compat(
    old: *const PgsSchema,
    new: *const PgsSchema,
    out: *mut *mut c_char,
) -> PgsStatus {
    guard(|| {
        let (old, new) = (handle_arg(old, "old")?, handle_arg(new, "new")?);
        let report = check_compat(&compute_diff(&old.0, &new.0));
        if !out.is_null() {
            put_string(out, serde_json::to_string(&report).expect("report serializes"));
        }
        if report.compatible {
            Ok(())
        } else {
            let n = report.violations.len();
            Err(Fail(PgsStatus::Incompatible, format!("{n} compatibility violation(s)")))
        }
    })
}
