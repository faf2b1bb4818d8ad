#ifndef PGSCHEMA_H
#define PGSCHEMA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PgsStatus {
  PGS_STATUS_OK = 0,
  PGS_STATUS_NULL_POINTER = 1,
  PGS_STATUS_INVALID_UTF8 = 2,
  PGS_STATUS_PARSE_ERROR = 3,
  PGS_STATUS_GRAPH_ERROR = 4,
  PGS_STATUS_EDIT_ERROR = 5,
  PGS_STATUS_INCOMPATIBLE = 6,
  PGS_STATUS_PANIC = 7,
} PgsStatus;

// A loaded instance graph.
typedef struct PgsGraph PgsGraph;

// A schema graph.
typedef struct PgsSchema PgsSchema;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer is
// valid until the next call on the same thread.
const char *pgs_last_error(void);

// # Safety
// `s` must be NULL or a string returned by this library, freed only once.
void pgs_string_free(char *s);

// Loads a graph from JSON-lines text.
//
// # Safety
// `jsonl` must be a valid C string and `out` a writable pointer.
enum PgsStatus pgs_graph_load(const char *jsonl, struct PgsGraph **out);

// # Safety
// `g` must be NULL or a handle from `pgs_graph_load`, freed only once.
void pgs_graph_free(struct PgsGraph *g);

// Parses `.pgs` text.
//
// # Safety
// `text` must be a valid C string and `out` a writable pointer.
enum PgsStatus pgs_schema_parse(const char *text, struct PgsSchema **out);

// # Safety
// `s` must be NULL or a schema handle from this library, freed only once.
void pgs_schema_free(struct PgsSchema *s);

// Canonical `.pgs` text of a schema.
//
// # Safety
// `s` must be a live schema handle and `out` a writable pointer.
enum PgsStatus pgs_schema_serialize(const struct PgsSchema *s, char **out);

// JSON rendering of a schema, as produced by `export --format json`.
//
// # Safety
// `s` must be a live schema handle and `out` a writable pointer.
enum PgsStatus pgs_schema_to_json(const struct PgsSchema *s, char **out);

// 1 if the two schemas are equal by public names, 0 if not, -1 on a NULL
// argument.
//
// # Safety
// Both handles must be NULL or live.
int pgs_schema_equal(const struct PgsSchema *a, const struct PgsSchema *b);

// Extracts a schema from a graph. Nonzero flags enable the option.
//
// # Safety
// `g` must be a live graph handle and `out` a writable pointer.
enum PgsStatus pgs_extract(const struct PgsGraph *g,
                           int infer_cardinality,
                           int infer_subtypes,
                           struct PgsSchema **out);

// Conformance report as JSON (`{"ok": bool, "violations": [...]}`).
//
// # Safety
// Handles must be live and `out` a writable pointer.
enum PgsStatus pgs_validate(const struct PgsGraph *g,
                            const struct PgsSchema *s,
                            int open_world,
                            char **out);

// Applies one JSON edit command and returns the edited schema as a new
// handle; the input is left untouched.
//
// # Safety
// `s` must be live, `edit_json` a valid C string and `out` writable.
enum PgsStatus pgs_apply_edit(const struct PgsSchema *s,
                              const char *edit_json,
                              struct PgsSchema **out);

// Semantic diff, one sentence per line.
//
// # Safety
// Handles must be live and `out` a writable pointer.
enum PgsStatus pgs_diff_semantic(const struct PgsSchema *old,
                                 const struct PgsSchema *new_,
                                 char **out);

// Diff records as a JSON array of `{kind, subject, before, after}`.
//
// # Safety
// Handles must be live and `out` a writable pointer.
enum PgsStatus pgs_diff_json(const struct PgsSchema *old, const struct PgsSchema *new_, char **out);

// Compatibility report as JSON. Returns `Incompatible` when the change
// from `old` to `new` breaks existing data; the report is written either
// way. `out` may be NULL if only the status is wanted.
//
// # Safety
// Handles must be live; `out` must be NULL or writable.
enum PgsStatus pgs_check_compat(const struct PgsSchema *old,
                                const struct PgsSchema *new_,
                                char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PGSCHEMA_H */
