#ifndef CHORPRISM_H
#define CHORPRISM_H

/* C interface to the choreography compiler. Every function returns a
 * cp_status; on failure cp_last_error() describes the problem for the
 * calling thread. Strings handed out through char** parameters are owned by
 * the caller and released with cp_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CP_API __declspec(dllexport)
#else
#define CP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cp_status {
  CP_OK = 0,
  CP_ERR_SYNTAX = 1,           /* the source does not parse */
  CP_ERR_IO = 2,               /* unreadable input */
  CP_ERR_SEMANTIC = 3,         /* static checks, desugaring or evaluation failed */
  CP_ERR_BUDGET = 4,           /* state budget exceeded */
  CP_ERR_INVALID_ARGUMENT = 5, /* bad option value or null handle */
  CP_ERR_INTERNAL = 6
} cp_status;

typedef struct cp_options cp_options;
typedef struct cp_program cp_program;

CP_API const char* cp_version(void);

/* Message and error kind (e.g. "NotStronglyConnected") of the last failure
 * on this thread; empty strings after a success. */
CP_API const char* cp_last_error(void);
CP_API const char* cp_last_error_kind(void);

CP_API void cp_string_free(char* s);

CP_API cp_options* cp_options_new(void);
CP_API void cp_options_free(cp_options* opts);
CP_API cp_status cp_options_set_model(cp_options* opts, const char* kind); /* "ctmc" | "dtmc" */
CP_API cp_status cp_options_set_seed(cp_options* opts, uint64_t seed);     /* random labels */
CP_API cp_status cp_options_set_const(cp_options* opts, const char* name, double value);
CP_API cp_status cp_options_set_init(cp_options* opts, const char* var, const char* value);
CP_API cp_status cp_options_set_style(cp_options* opts, const char* style); /* "folded" | "formal" */
CP_API cp_status cp_options_set_override_sconn(cp_options* opts, int enabled);
CP_API cp_status cp_options_set_max_states(cp_options* opts, size_t max_states);
CP_API cp_status cp_options_set_fault(cp_options* opts, size_t index);

/* Parse, desugar and annotate. opts may be NULL. */
CP_API cp_status cp_program_parse(const char* text, const cp_options* opts, cp_program** out);
CP_API cp_status cp_program_load_file(const char* path, const cp_options* opts, cp_program** out);
CP_API void cp_program_free(cp_program* prog);

/* The program after desugaring and annotation, in surface syntax. */
CP_API cp_status cp_program_source(const cp_program* prog, char** out);

/* Well-formedness, annotation and strong-connectedness checks. Returns
 * CP_ERR_SEMANTIC and fills *report when anything is reported. */
CP_API cp_status cp_check(const cp_program* prog, const cp_options* opts, char** report);

/* PRISM source for the projection, plus a short summary
 * ("modules=.. commands=.. labels=..", then warnings). */
CP_API cp_status cp_compile(const cp_program* prog, const cp_options* opts, char** prism, char** summary);

/* side: "chor" | "prism"; format: "text" | "dot". */
CP_API cp_status cp_chain(const cp_program* prog, const cp_options* opts, const char* side, const char* format,
                          char** out);

/* Checks the projection against the choreography. *equivalent is 1 or 0;
 * report is human readable, summary holds key=value lines. */
CP_API cp_status cp_verify(const cp_program* prog, const cp_options* opts, int* equivalent, char** report,
                           char** summary);

#ifdef __cplusplus
}
#endif

#endif
