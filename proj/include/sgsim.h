/* C interface to the Byzantine-resilient SGD simulation library.
 *
 * All functions returning sgsim_status report failure details through
 * sgsim_last_error(), which is thread-local and valid until the next failing
 * call on the same thread. Handles are opaque and must be released with their
 * matching *_free function.
 */
#ifndef SGSIM_H
#define SGSIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sgsim_status {
    SGSIM_OK = 0,
    SGSIM_ERR_INVALID_ARGUMENT = 1,
    SGSIM_ERR_PARSE = 2,
    SGSIM_ERR_IO = 3,
    SGSIM_ERR_INTERNAL = 4
} sgsim_status;

typedef struct sgsim_config sgsim_config;
typedef struct sgsim_result sgsim_result;

const char* sgsim_version(void);
const char* sgsim_last_error(void);

/* ---- configuration ---- */
sgsim_status sgsim_config_parse_string(const char* text, sgsim_config** out);
sgsim_status sgsim_config_parse_file(const char* path, sgsim_config** out);
sgsim_status sgsim_config_set_seed(sgsim_config* config, uint64_t seed);
/* Renders the resolved configuration; free with sgsim_string_free. */
sgsim_status sgsim_config_render(const sgsim_config* config, char** out_text);
void sgsim_config_free(sgsim_config* config);
void sgsim_string_free(char* text);

/* ---- single experiment ---- */
/* jobs > 1 evaluates worker reports on that many threads; results are
 * bit-identical for every jobs value. */
sgsim_status sgsim_run(const sgsim_config* config, int jobs, sgsim_result** out);
/* Writes trace.csv and summary.txt into out_dir (created if needed). */
sgsim_status sgsim_result_write(const sgsim_result* result, const char* out_dir);
double sgsim_result_final_grad_norm(const sgsim_result* result);
double sgsim_result_final_objective(const sgsim_result* result);
double sgsim_result_sosp_fraction(const sgsim_result* result);
int sgsim_result_caught_count(const sgsim_result* result);
int sgsim_result_diverged(const sgsim_result* result);
long sgsim_result_iterations(const sgsim_result* result);
long sgsim_result_ejection_count(const sgsim_result* result);
/* Fills up to cap (iteration, worker) pairs; returns the number written. */
long sgsim_result_ejections(const sgsim_result* result, long* iterations, int* workers, long cap);
void sgsim_result_free(sgsim_result* result);

/* ---- attack x defense sweep ---- */
/* Runs the grid described by sweep_path and writes sweep_table.csv plus
 * per-cell summaries under out_dir. jobs bounds concurrent cells. */
sgsim_status sgsim_sweep_file(const char* sweep_path, const char* out_dir, int jobs);

/* ---- verification suite ---- */
/* Runs every built-in verification criterion; line_cb (may be NULL) receives
 * one printable line per criterion. Returns the number of failed criteria,
 * or -1 on internal error. */
int sgsim_verify_run(void (*line_cb)(const char* line, void* user), void* user);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SGSIM_H */
