#pragma once

#include <optional>
#include <string>
#include <vector>

#include "verienv/judge.hpp"
#include "verienv/registry.hpp"

namespace verienv {

enum class Difficulty { easy, medium, hard };
const char* to_string(Difficulty d);
std::optional<Difficulty> difficulty_from_string(const std::string& name);

// Named state probe collected at scoring time for rprog judges.
struct StateProbe {
  std::string name;
  SdkCall call;
};

struct Task {
  std::string task_id;
  std::string site;  // source website label, informational
  std::string instruction;
  std::vector<SdkCall> validation_plan;
  std::optional<JudgeSpec> judge_template;  // expected values may hold {binding} placeholders
  std::optional<JudgeSpec> judge;           // present iff is_valid
  std::vector<StateProbe> probes;
  bool is_valid = false;
  Difficulty difficulty = Difficulty::easy;
  bool requires_auth = false;
  bool mutates_state = false;
  int plan_step_count = 1;
  std::string failure_reason;

  static Task from_json(const std::string& raw);
  std::string to_json() const;
};

std::vector<Task> load_tasks(const std::string& path);
void save_tasks(const std::vector<Task>& tasks, const std::string& path);

// Executes the validation plan against the environment, certifies
// executability, and instantiates the judge from the bound results.
Task validate_task(const Task& task, Registry& registry, const std::string& env_id);

enum class RevalidateOutcome { unchanged, judge_updated, now_invalid };
const char* to_string(RevalidateOutcome outcome);
RevalidateOutcome revalidate(Task& task, Registry& registry, const std::string& env_id);

Difficulty classify_difficulty(bool requires_auth, bool mutates_state,
                               int plan_step_count);
Difficulty classify_difficulty(const Task& task);

// One transcribed corpus row plus its hand-authored conformance answers.
struct FixtureEntry {
  Task task;
  std::string ground_truth_answer;
  std::string perturbed_answer;
};

std::vector<FixtureEntry> load_fixture_entries(const std::string& path);
std::vector<Task> load_fixture_corpus(const std::string& path);

// Counts and percentages per difficulty tier, totals, per-site averages.
std::string task_stats(const std::vector<Task>& tasks);

}  // namespace verienv
