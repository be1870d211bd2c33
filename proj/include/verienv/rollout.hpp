#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "verienv/judge.hpp"
#include "verienv/registry.hpp"
#include "verienv/task.hpp"

namespace verienv {

struct TrajectoryStep {
  std::string observation_digest;  // sha256 of the snapshot JSON
  std::string thought;
  BrowserAction action;
};

struct Trajectory {
  std::string task_id;
  std::string instruction;
  std::vector<TrajectoryStep> steps;
  std::optional<std::string> final_answer;
  std::string terminal_url;
  bool truncated = false;
  uint64_t seed = 0;

  std::string to_json() const;
  static Trajectory from_json(const std::string& raw);
};

struct RewardRecord {
  std::string task_id;
  Trajectory trajectory;
  int reward = 0;
  JudgeVerdict verdict;
  int phase = 0;
  std::string error;  // per-episode failure note; never aborts a batch

  std::string to_json() const;
  static RewardRecord from_json(const std::string& raw);
};

struct TrainingTurn {
  std::string observation_digest;
  std::string thought;
  std::string action_json;
};

struct TrainingRecord {
  std::string instruction;
  std::vector<TrainingTurn> turns;

  std::string to_json() const;
};

// Everything a policy may look at. task/env are the privileged test-only
// channel used by the oracle policies; honest policies ignore them.
struct PolicyContext {
  const std::string& instruction;
  const PageSnapshot& snapshot;
  int step_index;
  uint64_t episode_seed;
  const Task* task = nullptr;
  const ReferenceEnv* env = nullptr;
};

struct StepDecision {
  std::string thought;
  BrowserAction action;
};

struct Policy {
  std::string name;
  // Must be deterministic in (instruction, snapshot, step, seed).
  std::function<StepDecision(const PolicyContext&)> decide;
};

// random | oracle | noisy_oracle(p)
Policy builtin_policy(const std::string& name);

Trajectory run_episode(const Policy& policy, const Task& task, Registry& registry,
                       const std::string& env_id, int max_steps, uint64_t seed);

// rprog judges are scored by replaying the trajectory against a freshly reset
// environment and probing terminal state, so re-scoring is reproducible.
RewardRecord score(const Trajectory& trajectory, const Task& task, Registry& registry,
                   const std::string& env_id, int phase = 0);

std::vector<RewardRecord> collect(const std::vector<Task>& tasks, const Policy& policy,
                                  Registry& registry, const std::string& env_id,
                                  int rollouts_per_task, uint64_t base_seed,
                                  int phase = 0, int max_steps = 30);

std::vector<TrainingRecord> build_dataset(const std::vector<RewardRecord>& records,
                                          bool dedup = true);

void write_records_jsonl(const std::vector<RewardRecord>& records, const std::string& path);
std::vector<RewardRecord> read_records_jsonl(const std::string& path);
void write_dataset_jsonl(const std::vector<TrainingRecord>& dataset, const std::string& path);

struct PhaseReport {
  int phase = 0;
  size_t tasks = 0;
  double success_rate = 0.0;
  size_t dataset_size = 0;

  std::string to_json() const;
};

struct PhaseLoopResult {
  std::vector<PhaseReport> reports;
  std::vector<RewardRecord> records;
  std::vector<TrainingRecord> dataset;
};

// extra_task_files[i] lists task files ingested before phase i runs.
PhaseLoopResult run_phase_loop(std::vector<Task> tasks, const Policy& policy,
                               Registry& registry, const std::string& env_id,
                               int phases, int rollouts_per_task, uint64_t base_seed,
                               const std::vector<std::vector<std::string>>& extra_task_files = {},
                               int max_steps = 30);

}  // namespace verienv
