/* C API for the verienv harness. All composite inputs and outputs are UTF-8
 * JSON strings. Strings returned through out-parameters are heap-allocated;
 * release them with verienv_free(). Every function returns VERIENV_OK or an
 * error code; verienv_last_error_message() describes the most recent failure
 * on the calling thread. */

#ifndef VERIENV_H
#define VERIENV_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct verienv_harness verienv_harness;

typedef enum {
  VERIENV_OK = 0,
  VERIENV_ERR_SCHEMA = 1,
  VERIENV_ERR_NOT_REGISTERED = 2,
  VERIENV_ERR_DUPLICATE_ID = 3,
  VERIENV_ERR_PORT_CONFLICT = 4,
  VERIENV_ERR_MISSING_SCRIPT = 5,
  VERIENV_ERR_LIFECYCLE = 6,
  VERIENV_ERR_START_TIMEOUT = 7,
  VERIENV_ERR_SCRIPT_EXIT = 8,
  VERIENV_ERR_PORT_BIND = 9,
  VERIENV_ERR_RESET_DRIFT = 10,
  VERIENV_ERR_ENV_UNAVAILABLE = 11,
  VERIENV_ERR_CORPUS_FORMAT = 12,
  VERIENV_ERR_UNKNOWN_POLICY = 13,
  VERIENV_ERR_BAD_ARGUMENT = 14,
  VERIENV_ERR_IO = 15,
  VERIENV_ERR_INTERNAL = 16
} verienv_status;

const char* verienv_status_name(verienv_status status);
const char* verienv_last_error_message(void);
void verienv_free(char* ptr);

/* Harness lifecycle. config_json: {"registry_path": "...", optional
 * "start_timeout_ms", "probe_timeout_ms"}. Destroying the harness stops all
 * running environments (child process groups included). */
verienv_status verienv_harness_create(const char* config_json, verienv_harness** out);
void verienv_harness_destroy(verienv_harness* harness);

/* Judge engine (stateless). */
verienv_status verienv_judge_parse(const char* spec_json, char** normalized_out);
verienv_status verienv_judge_eval_answer(const char* spec_json, const char* answer,
                                         char** verdict_json_out);
/* probe_json: {"terminal_url": "...", "state_fields": {name: value}} */
verienv_status verienv_judge_eval_probe(const char* spec_json, const char* probe_json,
                                        char** verdict_json_out);

/* Environment lifecycle. Status payloads:
 * {"env_id", "state", "state_hash", "last_transition"} */
verienv_status verienv_env_register(verienv_harness* harness, const char* manifest_json,
                                    char** env_id_out);
verienv_status verienv_env_start(verienv_harness* harness, const char* env_id,
                                 char** status_json_out);
verienv_status verienv_env_reset(verienv_harness* harness, const char* env_id,
                                 char** status_json_out);
verienv_status verienv_env_health(verienv_harness* harness, const char* env_id,
                                  char** status_json_out);
verienv_status verienv_env_stop(verienv_harness* harness, const char* env_id,
                                char** status_json_out);
verienv_status verienv_env_status(verienv_harness* harness, const char* env_id,
                                  char** status_json_out);
verienv_status verienv_env_list(verienv_harness* harness, char** statuses_json_out);

/* Task pipeline. tasks_json is a JSON array of task objects. */
verienv_status verienv_task_validate(verienv_harness* harness, const char* tasks_json,
                                     const char* env_id, char** tasks_json_out);
verienv_status verienv_task_revalidate(verienv_harness* harness, const char* tasks_json,
                                       const char* env_id, char** report_json_out);
verienv_status verienv_task_stats(const char* tasks_json, char** stats_json_out);
verienv_status verienv_fixture_load(const char* path, char** tasks_json_out);

/* Rollouts and dataset construction. */
verienv_status verienv_collect(verienv_harness* harness, const char* tasks_json,
                               const char* policy, const char* env_id, int rollouts_per_task,
                               uint64_t seed, int max_steps, char** records_jsonl_out);
verienv_status verienv_dataset_build(const char* records_jsonl, int dedup,
                                     char** dataset_jsonl_out);
verienv_status verienv_phase_loop(verienv_harness* harness, const char* tasks_json,
                                  const char* policy, const char* env_id, int phases,
                                  int rollouts_per_task, uint64_t seed, int max_steps,
                                  char** reports_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* VERIENV_H */
