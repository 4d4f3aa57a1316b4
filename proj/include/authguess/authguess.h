#ifndef AUTHGUESS_H
#define AUTHGUESS_H

/* C API for the authentication guessing toolkit. Problems are described by
 * JSON spec documents; commands run against a parsed problem handle and
 * return output documents (JSON or CSV) as heap strings.
 *
 * Thread safety: distinct handles may be used concurrently; a single handle
 * must not be shared across threads without external synchronization. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes in the bundled CLI. */
typedef enum ag_status {
    AG_OK = 0,
    AG_EINVAL = 2,   /* invalid input (spec, overrides, or command) */
    AG_ENOCONV = 3,  /* a numerical solver failed to converge */
    AG_ELIMIT = 4,   /* a configured size limit was exceeded */
    AG_EINTERNAL = 5 /* unexpected internal failure */
} ag_status;

typedef struct ag_problem ag_problem;

/* Parse and validate a JSON problem spec. On success *out owns the problem.
 * On failure *out is NULL and, if errmsg is non-NULL, *errmsg holds a
 * diagnostic to be released with ag_string_free. */
ag_status ag_problem_parse(const char* spec_json, ag_problem** out, char** errmsg);

void ag_problem_free(ag_problem* p);

/* Run a command ("exponent", "sweep", "attack", "covering", "rd-curve")
 * against the problem. overrides_json is a JSON object of spec fields to
 * replace for this run, or NULL/"" for none. On success *out holds the
 * output document; on failure *errmsg (if non-NULL) holds the diagnostic.
 * Both are released with ag_string_free. */
ag_status ag_run(const ag_problem* p, const char* command, const char* overrides_json,
                 char** out, char** errmsg);

void ag_string_free(char* s);

/* Semantic version of the library, static storage. */
const char* ag_version(void);

#ifdef __cplusplus
}
#endif

#endif /* AUTHGUESS_H */
