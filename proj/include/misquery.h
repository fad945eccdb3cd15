/* C API for the misquery toolchain: misleading-query dataset construction,
 * stage-wise training-data preparation, the detect/correct/answer pipeline,
 * and the evaluation harness.
 *
 * All functions return mq_status; on failure mq_last_error() holds a
 * thread-local message. Strings returned through char** out-parameters are
 * heap-allocated and must be released with mq_free().
 */
#ifndef MISQUERY_H
#define MISQUERY_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mq_status {
    MQ_OK = 0,
    MQ_E_VALIDATION = 1, /* bad input data, config, or arguments */
    MQ_E_BACKEND = 2,    /* transport / backend failure */
    MQ_E_IO = 3          /* filesystem failure */
} mq_status;

const char *mq_last_error(void);
void mq_free(char *s);
const char *mq_version(void);

/* ---- pure text metrics ---- */

mq_status mq_edit_distance(const char *a, const char *b, long long *out);
mq_status mq_sentence_similarity(const char *q_ori, const char *q_mis, double *out);
mq_status mq_normalize_answer(const char *s, char **out);
/* returns 1 / 0 for match, negative on error */
int mq_answer_matches(const char *response, const char *gold);
mq_status mq_bleu(const char *candidate, const char *reference, double *out);
mq_status mq_rouge_l(const char *candidate, const char *reference, double *out);

/* ---- dataset validation ----
 * kind: halueval_qa | halueval_sum | halueval_dia | cqa | truthfulqa | mis.
 * On success *report_json gets {"count": N}. */
mq_status mq_validate_dataset(const char *path, const char *kind, char **report_json);

/* ---- workflows; config_path names the JSON run configuration ---- */

mq_status mq_gen_mis(const char *config_path, const char *input_path, const char *kind,
                     const char *output_path, const char *checkpoint_path,
                     const char *rejects_path);

mq_status mq_prepare_stages(const char *config_path, const char *clean_path,
                            const char *mis_path, const char *out_dir,
                            char **manifest_json);

/* mode: "full" or "answer_only" */
mq_status mq_run_pipeline(const char *config_path, const char *input_path, const char *kind,
                          const char *mode, const char *trace_path);

/* traces_paths: one path per run, separated by ','. Writes one JSON report
 * line per metric to report_path. */
mq_status mq_eval_traces(const char *config_path, const char *traces_paths,
                         const char *dataset_path, const char *kind,
                         const char *report_path);

mq_status mq_audit_dataset(const char *config_path, const char *input_path, const char *kind,
                           const char *clean_out_path, char **audit_json);

/* Reference losses over a JSON batch file; see docs for the schema. */
mq_status mq_compute_losses(const char *batch_json_path, char **result_json);

#ifdef __cplusplus
}
#endif

#endif /* MISQUERY_H */
