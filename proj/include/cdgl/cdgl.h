/* C interface to the CdGL proof kernel, refinement checker, strategy
 * compiler and simulator. All functions returning cdgl_status set *error to
 * a malloc'd message on failure (free with cdgl_string_free); out-pointers
 * are only written on CDGL_OK or CDGL_REJECTED. Objects are opaque and
 * immutable after creation; handles may be used from multiple threads. */

#ifndef CDGL_H
#define CDGL_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cdgl_status {
    CDGL_OK = 0,          /* accepted / postcondition holds */
    CDGL_REJECTED = 1,    /* checked but refused */
    CDGL_USAGE = 2,       /* bad arguments */
    CDGL_PARSE_ERROR = 3, /* input did not parse */
    CDGL_ERROR = 4,       /* anything else */
} cdgl_status;

typedef struct cdgl_source cdgl_source; /* a parsed .cdgl file */
typedef struct cdgl_report cdgl_report; /* a checking report */

const char* cdgl_version(void);
void cdgl_string_free(char* s);

cdgl_status cdgl_parse_string(const char* text, cdgl_source** out, char** error);
cdgl_status cdgl_parse_file(const char* path, cdgl_source** out, char** error);
void cdgl_source_free(cdgl_source* src);

/* Kernel and refinement checking. CDGL_OK with a nonzero assumed count means
 * accepted relative to unproven first-order obligations. */
cdgl_status cdgl_check_proof(const cdgl_source* src, const char* proof_name, cdgl_report** out,
                             char** error);
cdgl_status cdgl_check_derivation(const cdgl_source* src, const char* derivation_name,
                                  cdgl_report** out, char** error);
int cdgl_report_accepted(const cdgl_report* r);
int cdgl_report_assumed(const cdgl_report* r);
/* The line-oriented report: one OBLIGATION line per oracle fact, final line
 * VERDICT ACCEPTED|REJECTED <assumed-count>. */
char* cdgl_report_text(const cdgl_report* r);
void cdgl_report_free(cdgl_report* r);

/* Compile the named box-modality proof into a dual-free system. The output
 * is .cdgl text declaring `NAME_inlined`, plus the transfer proof
 * `NAME_transfer` and the refinement derivation `NAME_refinement` when
 * requested; it parses and re-checks on its own. */
cdgl_status cdgl_inline_proof(const cdgl_source* src, const char* proof_name, int emit_transfer,
                              int emit_refinement, char** out_text, char** error);

/* Canonical pretty-printing of a whole file; idempotent. */
cdgl_status cdgl_format(const cdgl_source* src, char** out_text, char** error);

/* Run the named system against a demon script. init_text: `var = rational`
 * lines; script_text: one decision per line (L/R/V q/D q/C/S); post: a
 * formula over the surface syntax. Returns CDGL_OK when the postcondition
 * holds, CDGL_REJECTED for any other verdict; *out_trace carries the
 * tab-separated trace with the final VERDICT line either way. */
cdgl_status cdgl_simulate(const cdgl_source* src, const char* system_name, const char* init_text,
                          const char* script_text, const char* post_formula, int force_rk4,
                          char** out_trace, char** error);

#ifdef __cplusplus
}
#endif

#endif /* CDGL_H */
