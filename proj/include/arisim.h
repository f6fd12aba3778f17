/* C interface to the autonomous-RIS simulation library. All entry points are
 * exception-safe: failures return a status code and leave a message readable
 * through aris_last_error() (thread local). */
#ifndef ARISIM_H
#define ARISIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aris_status {
    ARIS_OK = 0,
    ARIS_ERR_USAGE = 1,  /* bad arguments to a call */
    ARIS_ERR_CONFIG = 2, /* unreadable/invalid configuration */
    ARIS_ERR_RUNTIME = 3 /* numeric or I/O failure while running */
} aris_status;

/* Opaque experiment configuration handle. */
typedef struct aris_config aris_config;

const char* aris_version(void);

/* Message for the most recent failing call on this thread ("" if none). */
const char* aris_last_error(void);

/* Fresh configuration with built-in defaults. */
aris_status aris_config_create(aris_config** out);

/* Configuration parsed from a flat key = value file. */
aris_status aris_config_load(const char* path, aris_config** out);

void aris_config_destroy(aris_config* cfg);

/* Set/read one key; keys match the config-file key list. aris_config_get
 * writes a NUL-terminated string and fails if the buffer is too small. */
aris_status aris_config_set(aris_config* cfg, const char* key, const char* value);
aris_status aris_config_get(const aris_config* cfg, const char* key, char* buf, size_t buf_len);

/* Validates, runs one episode and writes the metrics CSV. With append != 0
 * rows are appended without a header (multi-run sweeps share one file). */
aris_status aris_run(const aris_config* cfg, const char* csv_path, int append);

/* Central-difference verification of the network gradients at the default
 * architecture; writes the worst relative error over all parameters. */
aris_status aris_grad_check(double* max_rel_error);

/* Fast invariant suite. The report (one line per check) is written into buf,
 * truncated if needed; *failures receives the number of failed checks.
 * Returns ARIS_OK only when every check holds. */
aris_status aris_selftest(char* buf, size_t buf_len, int* failures);

#ifdef __cplusplus
}
#endif

#endif /* ARISIM_H */
