#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "service.hpp"
#include "verienv.h"

using nlohmann::json;

namespace {

struct Config {
  std::string registry_path = "registry.json";
  std::string fixtures_path = "fixtures";
  std::string output_dir = ".";
  int default_max_steps = 30;
  int default_rollouts = 8;
  int start_timeout_ms = 60000;
  int probe_timeout_ms = 2000;
};

Config load_config(const std::string& explicit_path) {
  Config cfg;
  std::string path = explicit_path;
  if (path.empty()) {
    if (const char* env = std::getenv("VERIENV_CONFIG")) path = env;
  }
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) {
    throw CLI::ValidationError("--config", "cannot open config file " + path);
  }
  json doc = json::parse(in, nullptr, false);
  if (!doc.is_object()) {
    throw CLI::ValidationError("--config", path + " is not a JSON object");
  }
  cfg.registry_path = doc.value("registry_path", cfg.registry_path);
  cfg.fixtures_path = doc.value("fixtures_path", cfg.fixtures_path);
  cfg.output_dir = doc.value("output_dir", cfg.output_dir);
  cfg.default_max_steps = doc.value("default_max_steps", cfg.default_max_steps);
  cfg.default_rollouts = doc.value("default_rollouts", cfg.default_rollouts);
  cfg.start_timeout_ms = doc.value("start_timeout_ms", cfg.start_timeout_ms);
  cfg.probe_timeout_ms = doc.value("probe_timeout_ms", cfg.probe_timeout_ms);
  if (cfg.default_max_steps <= 0 || cfg.default_rollouts <= 0 ||
      cfg.start_timeout_ms <= 0 || cfg.probe_timeout_ms <= 0) {
    throw CLI::ValidationError("--config", "numeric config fields must be positive");
  }
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    std::exit(1);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    std::exit(1);
  }
  out << content;
}

// Prints the JSON result on stdout (or writes it to a file) and a one-line
// summary on stderr; exits 1 on domain errors.
int finish(verienv_status status, char* payload, const std::string& summary,
           const std::string& out_file = "") {
  if (status != VERIENV_OK) {
    json err;
    err["error"] = verienv_status_name(status);
    err["message"] = verienv_last_error_message();
    std::cout << err.dump() << "\n";
    std::cerr << verienv_status_name(status) << ": " << verienv_last_error_message()
              << "\n";
    return 1;
  }
  std::string body = payload ? payload : "{}";
  verienv_free(payload);
  if (!out_file.empty()) {
    write_file(out_file, body.back() == '\n' ? body : body + "\n");
    std::cerr << summary << " -> " << out_file << "\n";
  } else {
    std::cout << body;
    if (body.empty() || body.back() != '\n') std::cout << "\n";
    std::cerr << summary << "\n";
  }
  return 0;
}

struct Harness {
  verienv_harness* handle = nullptr;

  explicit Harness(const Config& cfg) {
    json c;
    c["registry_path"] = cfg.registry_path;
    c["start_timeout_ms"] = cfg.start_timeout_ms;
    c["probe_timeout_ms"] = cfg.probe_timeout_ms;
    auto status = verienv_harness_create(c.dump().c_str(), &handle);
    if (status != VERIENV_OK) {
      std::cerr << "error: " << verienv_last_error_message() << "\n";
      std::exit(1);
    }
  }
  ~Harness() { verienv_harness_destroy(handle); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verienv - verifiable web-agent environment harness"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "config file (or VERIENV_CONFIG)");

  // env
  auto* env = app.add_subcommand("env", "environment lifecycle");
  env->require_subcommand(1);
  std::string manifest_file, env_id;
  auto* env_register = env->add_subcommand("register", "register an environment manifest");
  env_register->add_option("manifest", manifest_file, "manifest JSON file")->required();
  auto* env_start = env->add_subcommand("start", "start an environment");
  env_start->add_option("id", env_id)->required();
  auto* env_reset = env->add_subcommand("reset", "reset an environment to its seeded state");
  env_reset->add_option("id", env_id)->required();
  auto* env_status = env->add_subcommand("status", "show environment status");
  env_status->add_option("id", env_id)->required();
  auto* env_health = env->add_subcommand("health", "probe environment liveness");
  env_health->add_option("id", env_id)->required();
  auto* env_stop = env->add_subcommand("stop", "stop an environment");
  env_stop->add_option("id", env_id)->required();
  auto* env_list = env->add_subcommand("list", "list registered environments");

  // task
  auto* task = app.add_subcommand("task", "task validation and statistics");
  task->require_subcommand(1);
  std::string task_file, task_env, task_out;
  auto* task_validate = task->add_subcommand("validate", "execute validation plans");
  task_validate->add_option("file", task_file)->required();
  task_validate->add_option("--env", task_env)->required();
  task_validate->add_option("-o,--output", task_out);
  auto* task_revalidate = task->add_subcommand("revalidate", "re-run validation plans");
  task_revalidate->add_option("file", task_file)->required();
  task_revalidate->add_option("--env", task_env)->required();
  auto* task_stats = task->add_subcommand("stats", "difficulty breakdown");
  task_stats->add_option("file", task_file)->required();

  // judge
  auto* judge = app.add_subcommand("judge", "judge evaluation");
  judge->require_subcommand(1);
  std::string spec_file, answer_text, probe_file;
  auto* judge_eval = judge->add_subcommand("eval", "evaluate a judge spec");
  judge_eval->add_option("--spec", spec_file, "judge spec JSON file")->required();
  auto* opt_answer = judge_eval->add_option("--answer", answer_text, "terminal answer text");
  auto* opt_probe = judge_eval->add_option("--probe", probe_file, "probe document JSON file");
  opt_answer->excludes(opt_probe);

  // collect
  auto* collect = app.add_subcommand("collect", "run rollouts and score them");
  std::string collect_tasks, collect_policy = "oracle", collect_env, collect_out;
  int collect_k = 0, collect_max_steps = 0;
  uint64_t collect_seed = 0;
  collect->add_option("--tasks", collect_tasks)->required();
  collect->add_option("--policy", collect_policy);
  collect->add_option("--env", collect_env)->required();
  collect->add_option("-k,--rollouts", collect_k);
  collect->add_option("--seed", collect_seed);
  collect->add_option("--max-steps", collect_max_steps);
  collect->add_option("-o,--output", collect_out);

  // dataset
  auto* dataset = app.add_subcommand("dataset", "training dataset construction");
  dataset->require_subcommand(1);
  std::string records_file, dataset_out;
  bool no_dedup = false;
  auto* dataset_build = dataset->add_subcommand("build", "filter reward-1 records into SFT data");
  dataset_build->add_option("--records", records_file)->required();
  dataset_build->add_option("-o,--output", dataset_out);
  dataset_build->add_flag("--no-dedup", no_dedup);

  // loop
  auto* loop = app.add_subcommand("loop", "multi-phase collect/build cycle");
  std::string loop_tasks, loop_policy = "oracle", loop_env;
  int loop_phases = 1, loop_k = 0, loop_max_steps = 0;
  uint64_t loop_seed = 0;
  loop->add_option("--phases", loop_phases)->required();
  loop->add_option("--tasks", loop_tasks)->required();
  loop->add_option("--policy", loop_policy);
  loop->add_option("--env", loop_env)->required();
  loop->add_option("-k,--rollouts", loop_k);
  loop->add_option("--seed", loop_seed);
  loop->add_option("--max-steps", loop_max_steps);

  // serve
  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  int serve_port = 8900;
  std::string serve_host = "127.0.0.1";
  serve->add_option("--port", serve_port);
  serve->add_option("--host", serve_host);

  CLI11_PARSE(app, argc, argv);

  Config cfg;
  try {
    cfg = load_config(config_path);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  if (collect_k == 0) collect_k = cfg.default_rollouts;
  if (loop_k == 0) loop_k = cfg.default_rollouts;
  if (collect_max_steps == 0) collect_max_steps = cfg.default_max_steps;
  if (loop_max_steps == 0) loop_max_steps = cfg.default_max_steps;

  char* out = nullptr;

  if (env_register->parsed()) {
    Harness h(cfg);
    auto status = verienv_env_register(h.handle, read_file(manifest_file).c_str(), &out);
    if (status == VERIENV_OK) {
      json ok;
      ok["env_id"] = out;
      verienv_free(out);
      std::cout << ok.dump() << "\n";
      std::cerr << "registered " << ok["env_id"].get<std::string>() << "\n";
      return 0;
    }
    return finish(status, nullptr, "");
  }
  if (env_start->parsed()) {
    Harness h(cfg);
    auto status = verienv_env_start(h.handle, env_id.c_str(), &out);
    return finish(status, out, "started " + env_id);
  }
  if (env_reset->parsed()) {
    Harness h(cfg);
    auto status = verienv_env_reset(h.handle, env_id.c_str(), &out);
    return finish(status, out, "reset " + env_id);
  }
  if (env_status->parsed()) {
    Harness h(cfg);
    auto status = verienv_env_status(h.handle, env_id.c_str(), &out);
    return finish(status, out, "status " + env_id);
  }
  if (env_health->parsed()) {
    Harness h(cfg);
    auto status = verienv_env_health(h.handle, env_id.c_str(), &out);
    return finish(status, out, "health " + env_id);
  }
  if (env_stop->parsed()) {
    Harness h(cfg);
    auto status = verienv_env_stop(h.handle, env_id.c_str(), &out);
    return finish(status, out, "stopped " + env_id);
  }
  if (env_list->parsed()) {
    Harness h(cfg);
    auto status = verienv_env_list(h.handle, &out);
    return finish(status, out, "environment list");
  }

  if (task_validate->parsed() || task_revalidate->parsed()) {
    Harness h(cfg);
    std::string tasks = read_file(task_file);
    if (task_validate->parsed()) {
      auto status = verienv_task_validate(h.handle, tasks.c_str(), task_env.c_str(), &out);
      return finish(status, out, "validated tasks from " + task_file, task_out);
    }
    auto status = verienv_task_revalidate(h.handle, tasks.c_str(), task_env.c_str(), &out);
    return finish(status, out, "revalidated tasks from " + task_file);
  }
  if (task_stats->parsed()) {
    auto status = verienv_task_stats(read_file(task_file).c_str(), &out);
    if (status != VERIENV_OK) {
      // Fixture corpus rows carry conformance answers; retry via the loader.
      char* tasks = nullptr;
      if (verienv_fixture_load(task_file.c_str(), &tasks) == VERIENV_OK) {
        status = verienv_task_stats(tasks, &out);
        verienv_free(tasks);
      }
    }
    return finish(status, out, "stats for " + task_file);
  }

  if (judge_eval->parsed()) {
    if (opt_answer->count() == 0 && opt_probe->count() == 0) {
      std::cerr << "judge eval: one of --answer or --probe is required\n";
      return 2;
    }
    std::string spec = read_file(spec_file);
    verienv_status status;
    if (opt_probe->count() > 0) {
      status = verienv_judge_eval_probe(spec.c_str(), read_file(probe_file).c_str(), &out);
    } else {
      status = verienv_judge_eval_answer(spec.c_str(), answer_text.c_str(), &out);
    }
    return finish(status, out, "judge verdict");
  }

  if (collect->parsed()) {
    Harness h(cfg);
    auto status = verienv_collect(h.handle, read_file(collect_tasks).c_str(),
                                  collect_policy.c_str(), collect_env.c_str(), collect_k,
                                  collect_seed, collect_max_steps, &out);
    return finish(status, out,
                  "collected " + std::to_string(collect_k) + " rollouts per task",
                  collect_out);
  }

  if (dataset_build->parsed()) {
    auto status = verienv_dataset_build(read_file(records_file).c_str(), no_dedup ? 0 : 1, &out);
    return finish(status, out, "dataset built from " + records_file, dataset_out);
  }

  if (loop->parsed()) {
    Harness h(cfg);
    auto status = verienv_phase_loop(h.handle, read_file(loop_tasks).c_str(),
                                     loop_policy.c_str(), loop_env.c_str(), loop_phases,
                                     loop_k, loop_seed, loop_max_steps, &out);
    return finish(status, out, "ran " + std::to_string(loop_phases) + " phases");
  }

  if (serve->parsed()) {
    Harness h(cfg);
    std::cerr << "serving on " << serve_host << ":" << serve_port << "\n";
    return verienv_tool::run_service(h.handle, serve_host, serve_port);
  }

  return 2;
}
