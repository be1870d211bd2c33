#include "verienv.h"

#include <cstring>
#include <string>

#include "json.hpp"
#include "verienv/errors.hpp"
#include "verienv/judge.hpp"
#include "verienv/registry.hpp"
#include "verienv/rollout.hpp"
#include "verienv/task.hpp"

using nlohmann::json;

struct verienv_harness {
  verienv::Registry registry;
  explicit verienv_harness(std::string path, verienv::RegistryOptions options)
      : registry(std::move(path), options) {}
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

verienv_status map_code(verienv::ErrorCode code) {
  using verienv::ErrorCode;
  switch (code) {
    case ErrorCode::schema_error: return VERIENV_ERR_SCHEMA;
    case ErrorCode::not_registered: return VERIENV_ERR_NOT_REGISTERED;
    case ErrorCode::duplicate_id: return VERIENV_ERR_DUPLICATE_ID;
    case ErrorCode::port_conflict: return VERIENV_ERR_PORT_CONFLICT;
    case ErrorCode::missing_script: return VERIENV_ERR_MISSING_SCRIPT;
    case ErrorCode::lifecycle_error: return VERIENV_ERR_LIFECYCLE;
    case ErrorCode::start_timeout: return VERIENV_ERR_START_TIMEOUT;
    case ErrorCode::script_exit: return VERIENV_ERR_SCRIPT_EXIT;
    case ErrorCode::port_bind_failure: return VERIENV_ERR_PORT_BIND;
    case ErrorCode::reset_drift: return VERIENV_ERR_RESET_DRIFT;
    case ErrorCode::env_unavailable: return VERIENV_ERR_ENV_UNAVAILABLE;
    case ErrorCode::corpus_format_error: return VERIENV_ERR_CORPUS_FORMAT;
    case ErrorCode::unknown_policy: return VERIENV_ERR_UNKNOWN_POLICY;
    case ErrorCode::bad_argument: return VERIENV_ERR_BAD_ARGUMENT;
    case ErrorCode::io_error: return VERIENV_ERR_IO;
  }
  return VERIENV_ERR_INTERNAL;
}

template <typename Fn>
verienv_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return VERIENV_OK;
  } catch (const verienv::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return VERIENV_ERR_INTERNAL;
  }
}

std::vector<verienv::Task> tasks_from_json(const char* tasks_json) {
  json doc = json::parse(tasks_json, nullptr, false);
  if (!doc.is_array()) {
    throw verienv::Error(verienv::ErrorCode::bad_argument,
                         "tasks payload must be a JSON array");
  }
  std::vector<verienv::Task> tasks;
  for (const auto& jt : doc) tasks.push_back(verienv::Task::from_json(jt.dump()));
  return tasks;
}

std::string tasks_to_json(const std::vector<verienv::Task>& tasks) {
  json arr = json::array();
  for (const auto& t : tasks) arr.push_back(json::parse(t.to_json()));
  return arr.dump();
}

}  // namespace

extern "C" {

const char* verienv_status_name(verienv_status status) {
  switch (status) {
    case VERIENV_OK: return "ok";
    case VERIENV_ERR_SCHEMA: return "SchemaError";
    case VERIENV_ERR_NOT_REGISTERED: return "NotRegistered";
    case VERIENV_ERR_DUPLICATE_ID: return "DuplicateId";
    case VERIENV_ERR_PORT_CONFLICT: return "PortConflict";
    case VERIENV_ERR_MISSING_SCRIPT: return "MissingScript";
    case VERIENV_ERR_LIFECYCLE: return "LifecycleError";
    case VERIENV_ERR_START_TIMEOUT: return "StartTimeout";
    case VERIENV_ERR_SCRIPT_EXIT: return "ScriptExit";
    case VERIENV_ERR_PORT_BIND: return "PortBindFailure";
    case VERIENV_ERR_RESET_DRIFT: return "ResetDrift";
    case VERIENV_ERR_ENV_UNAVAILABLE: return "EnvUnavailable";
    case VERIENV_ERR_CORPUS_FORMAT: return "CorpusFormatError";
    case VERIENV_ERR_UNKNOWN_POLICY: return "UnknownPolicy";
    case VERIENV_ERR_BAD_ARGUMENT: return "BadArgument";
    case VERIENV_ERR_IO: return "IoError";
    case VERIENV_ERR_INTERNAL: return "InternalError";
  }
  return "unknown";
}

const char* verienv_last_error_message(void) { return g_last_error.c_str(); }

void verienv_free(char* ptr) { std::free(ptr); }

verienv_status verienv_harness_create(const char* config_json, verienv_harness** out) {
  return guarded([&] {
    json cfg = json::object();
    if (config_json && *config_json) {
      cfg = json::parse(config_json, nullptr, false);
      if (!cfg.is_object()) {
        throw verienv::Error(verienv::ErrorCode::bad_argument, "config must be a JSON object");
      }
    }
    verienv::RegistryOptions options;
    options.start_timeout_ms = cfg.value("start_timeout_ms", options.start_timeout_ms);
    options.probe_timeout_ms = cfg.value("probe_timeout_ms", options.probe_timeout_ms);
    options.serve_builtin_http = cfg.value("serve_builtin_http", options.serve_builtin_http);
    std::string path = cfg.value("registry_path", "registry.json");
    *out = new verienv_harness(path, options);
  });
}

void verienv_harness_destroy(verienv_harness* harness) { delete harness; }

verienv_status verienv_judge_parse(const char* spec_json, char** normalized_out) {
  return guarded([&] {
    auto spec = verienv::parse_judge(spec_json ? spec_json : "");
    *normalized_out = dup_string(verienv::serialize_judge(spec));
  });
}

verienv_status verienv_judge_eval_answer(const char* spec_json, const char* answer,
                                         char** verdict_json_out) {
  return guarded([&] {
    auto spec = verienv::parse_judge(spec_json ? spec_json : "");
    if (spec.eval_type != verienv::EvalType::rinfo) {
      throw verienv::Error(verienv::ErrorCode::bad_argument,
                           "answer evaluation requires eval_type=rinfo");
    }
    auto verdict = verienv::evaluate_rinfo(spec, answer ? answer : "");
    *verdict_json_out = dup_string(verienv::serialize_verdict(verdict));
  });
}

verienv_status verienv_judge_eval_probe(const char* spec_json, const char* probe_json,
                                        char** verdict_json_out) {
  return guarded([&] {
    auto spec = verienv::parse_judge(spec_json ? spec_json : "");
    if (spec.eval_type != verienv::EvalType::rprog) {
      throw verienv::Error(verienv::ErrorCode::bad_argument,
                           "probe evaluation requires eval_type=rprog");
    }
    json doc = json::parse(probe_json ? probe_json : "", nullptr, false);
    if (!doc.is_object()) {
      throw verienv::Error(verienv::ErrorCode::bad_argument, "probe must be a JSON object");
    }
    verienv::ProbeDocument probe;
    probe.terminal_url = doc.value("terminal_url", "");
    if (doc.contains("state_fields") && doc["state_fields"].is_object()) {
      for (auto& [k, v] : doc["state_fields"].items()) {
        probe.state_fields[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    auto verdict = verienv::evaluate_rprog(spec, probe);
    *verdict_json_out = dup_string(verienv::serialize_verdict(verdict));
  });
}

verienv_status verienv_env_register(verienv_harness* harness, const char* manifest_json,
                                    char** env_id_out) {
  return guarded([&] {
    auto manifest = verienv::EnvironmentManifest::from_json(manifest_json ? manifest_json : "");
    *env_id_out = dup_string(harness->registry.register_env(manifest));
  });
}

#define VERIENV_ENV_OP(fn, method)                                                   \
  verienv_status fn(verienv_harness* harness, const char* env_id,                    \
                    char** status_json_out) {                                        \
    return guarded([&] {                                                             \
      auto status = harness->registry.method(env_id ? env_id : "");                  \
      *status_json_out = dup_string(status.to_json());                               \
    });                                                                              \
  }

VERIENV_ENV_OP(verienv_env_start, start)
VERIENV_ENV_OP(verienv_env_reset, reset)
VERIENV_ENV_OP(verienv_env_health, health)
VERIENV_ENV_OP(verienv_env_stop, stop)
VERIENV_ENV_OP(verienv_env_status, status)

#undef VERIENV_ENV_OP

verienv_status verienv_env_list(verienv_harness* harness, char** statuses_json_out) {
  return guarded([&] {
    json arr = json::array();
    for (const auto& s : harness->registry.list()) arr.push_back(json::parse(s.to_json()));
    *statuses_json_out = dup_string(arr.dump());
  });
}

verienv_status verienv_task_validate(verienv_harness* harness, const char* tasks_json,
                                     const char* env_id, char** tasks_json_out) {
  return guarded([&] {
    auto tasks = tasks_from_json(tasks_json);
    std::vector<verienv::Task> out;
    for (const auto& t : tasks) {
      out.push_back(verienv::validate_task(t, harness->registry, env_id ? env_id : ""));
    }
    *tasks_json_out = dup_string(tasks_to_json(out));
  });
}

verienv_status verienv_task_revalidate(verienv_harness* harness, const char* tasks_json,
                                       const char* env_id, char** report_json_out) {
  return guarded([&] {
    auto tasks = tasks_from_json(tasks_json);
    json report = json::array();
    for (auto& t : tasks) {
      auto outcome = verienv::revalidate(t, harness->registry, env_id ? env_id : "");
      report.push_back({{"task_id", t.task_id},
                        {"outcome", verienv::to_string(outcome)},
                        {"task", json::parse(t.to_json())}});
    }
    *report_json_out = dup_string(report.dump());
  });
}

verienv_status verienv_task_stats(const char* tasks_json, char** stats_json_out) {
  return guarded([&] {
    *stats_json_out = dup_string(verienv::task_stats(tasks_from_json(tasks_json)));
  });
}

verienv_status verienv_fixture_load(const char* path, char** tasks_json_out) {
  return guarded([&] {
    *tasks_json_out =
        dup_string(tasks_to_json(verienv::load_fixture_corpus(path ? path : "")));
  });
}

verienv_status verienv_collect(verienv_harness* harness, const char* tasks_json,
                               const char* policy, const char* env_id, int rollouts_per_task,
                               uint64_t seed, int max_steps, char** records_jsonl_out) {
  return guarded([&] {
    auto tasks = tasks_from_json(tasks_json);
    auto pol = verienv::builtin_policy(policy ? policy : "");
    auto records = verienv::collect(tasks, pol, harness->registry, env_id ? env_id : "",
                                    rollouts_per_task, seed, 0,
                                    max_steps > 0 ? max_steps : 30);
    std::string out;
    for (const auto& r : records) out += r.to_json() + "\n";
    *records_jsonl_out = dup_string(out);
  });
}

verienv_status verienv_dataset_build(const char* records_jsonl, int dedup,
                                     char** dataset_jsonl_out) {
  return guarded([&] {
    std::vector<verienv::RewardRecord> records;
    std::string text = records_jsonl ? records_jsonl : "";
    size_t pos = 0;
    while (pos < text.size()) {
      size_t nl = text.find('\n', pos);
      std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos
                                                                  : nl - pos);
      if (!line.empty()) records.push_back(verienv::RewardRecord::from_json(line));
      if (nl == std::string::npos) break;
      pos = nl + 1;
    }
    auto dataset = verienv::build_dataset(records, dedup != 0);
    json header;
    header["dataset"] = "verienv-sft";
    header["records"] = dataset.size();
    std::string out = header.dump() + "\n";
    for (const auto& r : dataset) out += r.to_json() + "\n";
    *dataset_jsonl_out = dup_string(out);
  });
}

verienv_status verienv_phase_loop(verienv_harness* harness, const char* tasks_json,
                                  const char* policy, const char* env_id, int phases,
                                  int rollouts_per_task, uint64_t seed, int max_steps,
                                  char** reports_json_out) {
  return guarded([&] {
    auto tasks = tasks_from_json(tasks_json);
    auto pol = verienv::builtin_policy(policy ? policy : "");
    auto result = verienv::run_phase_loop(std::move(tasks), pol, harness->registry,
                                          env_id ? env_id : "", phases, rollouts_per_task,
                                          seed, {}, max_steps > 0 ? max_steps : 30);
    json arr = json::array();
    for (const auto& r : result.reports) arr.push_back(json::parse(r.to_json()));
    *reports_json_out = dup_string(arr.dump());
  });
}

}  // extern "C"
