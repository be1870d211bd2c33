#include "verienv/task.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace verienv {

const char* to_string(Difficulty d) {
  switch (d) {
    case Difficulty::easy: return "easy";
    case Difficulty::medium: return "medium";
    case Difficulty::hard: return "hard";
  }
  return "?";
}

std::optional<Difficulty> difficulty_from_string(const std::string& name) {
  if (name == "easy") return Difficulty::easy;
  if (name == "medium") return Difficulty::medium;
  if (name == "hard") return Difficulty::hard;
  return std::nullopt;
}

const char* to_string(RevalidateOutcome outcome) {
  switch (outcome) {
    case RevalidateOutcome::unchanged: return "unchanged";
    case RevalidateOutcome::judge_updated: return "judge_updated";
    case RevalidateOutcome::now_invalid: return "now_invalid";
  }
  return "?";
}

namespace {

SdkCall sdk_call_from_json(const json& doc) {
  SdkCall call;
  call.name = doc.value("name", "");
  if (doc.contains("args") && doc["args"].is_object()) {
    for (auto& [k, v] : doc["args"].items()) {
      call.args[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  call.bind_as = doc.value("bind_as", "");
  return call;
}

json sdk_call_to_json(const SdkCall& call) {
  json doc;
  doc["name"] = call.name;
  doc["args"] = json::object();
  for (const auto& [k, v] : call.args) doc["args"][k] = v;
  if (!call.bind_as.empty()) doc["bind_as"] = call.bind_as;
  return doc;
}

}  // namespace

Task Task::from_json(const std::string& raw) {
  json doc = json::parse(raw, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw SchemaError("", "task is not a JSON object");
  }
  Task t;
  t.task_id = doc.value("task_id", "");
  t.site = doc.value("site", "");
  t.instruction = doc.value("instruction", "");
  if (t.task_id.empty()) throw SchemaError("task_id", "missing or empty");
  if (t.instruction.empty()) throw SchemaError("instruction", "missing or empty");
  if (doc.contains("validation_plan")) {
    for (const auto& c : doc["validation_plan"]) {
      t.validation_plan.push_back(sdk_call_from_json(c));
    }
  }
  if (doc.contains("judge_template") && !doc["judge_template"].is_null()) {
    t.judge_template = parse_judge(doc["judge_template"].dump());
  }
  if (doc.contains("judge") && !doc["judge"].is_null()) {
    t.judge = parse_judge(doc["judge"].dump());
  }
  if (doc.contains("probes")) {
    for (const auto& p : doc["probes"]) {
      StateProbe probe;
      probe.name = p.value("name", "");
      probe.call = sdk_call_from_json(p["call"]);
      t.probes.push_back(std::move(probe));
    }
  }
  t.is_valid = doc.value("is_valid", false);
  auto diff = difficulty_from_string(doc.value("difficulty", "easy"));
  if (!diff) throw SchemaError("difficulty", "unknown tier");
  t.difficulty = *diff;
  t.requires_auth = doc.value("requires_auth", false);
  t.mutates_state = doc.value("mutates_state", false);
  t.plan_step_count = doc.value("plan_step_count",
                                std::max<int>(1, static_cast<int>(t.validation_plan.size())));
  t.failure_reason = doc.value("failure_reason", "");
  if (t.is_valid != t.judge.has_value()) {
    throw SchemaError("judge", "judge must be present exactly when is_valid is true");
  }
  return t;
}

std::string Task::to_json() const {
  json doc;
  doc["task_id"] = task_id;
  if (!site.empty()) doc["site"] = site;
  doc["instruction"] = instruction;
  doc["validation_plan"] = json::array();
  for (const auto& c : validation_plan) doc["validation_plan"].push_back(sdk_call_to_json(c));
  if (judge_template) doc["judge_template"] = json::parse(serialize_judge(*judge_template));
  if (judge) doc["judge"] = json::parse(serialize_judge(*judge));
  if (!probes.empty()) {
    doc["probes"] = json::array();
    for (const auto& p : probes) {
      doc["probes"].push_back({{"name", p.name}, {"call", sdk_call_to_json(p.call)}});
    }
  }
  doc["is_valid"] = is_valid;
  doc["difficulty"] = to_string(difficulty);
  doc["requires_auth"] = requires_auth;
  doc["mutates_state"] = mutates_state;
  doc["plan_step_count"] = plan_step_count;
  if (!failure_reason.empty()) doc["failure_reason"] = failure_reason;
  return doc.dump();
}

std::vector<Task> load_tasks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  json doc = json::parse(in, nullptr, false);
  if (!doc.is_array()) {
    throw Error(ErrorCode::corpus_format_error, path + ": expected a JSON array of tasks");
  }
  std::vector<Task> tasks;
  for (const auto& jt : doc) tasks.push_back(Task::from_json(jt.dump()));
  return tasks;
}

void save_tasks(const std::vector<Task>& tasks, const std::string& path) {
  json arr = json::array();
  for (const auto& t : tasks) arr.push_back(json::parse(t.to_json()));
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  out << arr.dump(2) << "\n";
}

namespace {

// Resolves a dot path inside a bound SDK result. Single-element arrays are
// unwrapped transparently so list_listings(..., limit=1) binds like a row.
std::optional<std::string> resolve_binding_path(const std::string& bound_value,
                                                const std::string& path) {
  json doc = json::parse(bound_value, nullptr, false);
  if (doc.is_discarded()) {
    return path.empty() ? std::optional<std::string>(bound_value) : std::nullopt;
  }
  const json* cur = &doc;
  std::istringstream segs(path);
  std::string seg;
  while (std::getline(segs, seg, '.')) {
    while (cur->is_array() && cur->size() == 1 &&
           !(cur->is_object() && cur->contains(seg))) {
      cur = &(*cur)[0];
    }
    if (cur->is_object() && cur->contains(seg)) {
      cur = &(*cur)[seg];
    } else if (cur->is_array()) {
      char* end = nullptr;
      long idx = std::strtol(seg.c_str(), &end, 10);
      if (end != seg.c_str() + seg.size() || idx < 0 ||
          static_cast<size_t>(idx) >= cur->size()) {
        return std::nullopt;
      }
      cur = &(*cur)[static_cast<size_t>(idx)];
    } else {
      return std::nullopt;
    }
  }
  while (cur->is_array() && cur->size() == 1) cur = &(*cur)[0];
  if (cur->is_string()) return cur->get<std::string>();
  return cur->dump();
}

// Substitutes every {binding} / {binding.path} occurrence; returns nullopt on
// an unresolvable placeholder so instantiated judges are always closed.
std::optional<std::string> substitute(const std::string& text,
                                      const std::map<std::string, std::string>& bindings,
                                      std::string* missing) {
  std::string out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t open = text.find('{', pos);
    if (open == std::string::npos) {
      out += text.substr(pos);
      break;
    }
    size_t close = text.find('}', open);
    if (close == std::string::npos) {
      out += text.substr(pos);
      break;
    }
    out += text.substr(pos, open - pos);
    std::string expr = text.substr(open + 1, close - open - 1);
    std::string binding = expr, path;
    if (auto dot = expr.find('.'); dot != std::string::npos) {
      binding = expr.substr(0, dot);
      path = expr.substr(dot + 1);
    }
    auto it = bindings.find(binding);
    if (it == bindings.end()) {
      *missing = expr;
      return std::nullopt;
    }
    auto value = resolve_binding_path(it->second, path);
    if (!value) {
      *missing = expr;
      return std::nullopt;
    }
    out += *value;
    pos = close + 1;
  }
  return out;
}

struct PlanRun {
  bool ok = false;
  std::string reason;
  std::map<std::string, std::string> bindings;
};

PlanRun run_plan(const Task& task, Registry& registry, const std::string& env_id) {
  PlanRun run;
  for (const auto& call : task.validation_plan) {
    try {
      std::string result = registry.sdk_query(env_id, call);
      if (!call.bind_as.empty()) {
        // Empty or empty-list results mean the task is not executable.
        if (result.empty() || result == "[]" || result == "null" || result == "{}") {
          run.reason = "binding '" + call.bind_as + "' is empty";
          return run;
        }
        run.bindings[call.bind_as] = result;
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::env_unavailable) throw;
      run.reason = std::string("call '") + call.name + "' failed: " + e.what();
      return run;
    }
  }
  run.ok = true;
  return run;
}

std::optional<JudgeSpec> instantiate_judge(const JudgeSpec& tmpl,
                                           const std::map<std::string, std::string>& bindings,
                                           std::string* reason) {
  JudgeSpec spec = tmpl;
  std::string missing;
  for (auto& check : spec.checks) {
    if (!check.expected.empty()) {
      auto v = substitute(check.expected, bindings, &missing);
      if (!v) {
        *reason = "unresolved placeholder {" + missing + "}";
        return std::nullopt;
      }
      check.expected = *v;
    }
    for (auto& e : check.expected_list) {
      auto v = substitute(e, bindings, &missing);
      if (!v) {
        *reason = "unresolved placeholder {" + missing + "}";
        return std::nullopt;
      }
      e = *v;
    }
  }
  return spec;
}

}  // namespace

Task validate_task(const Task& task, Registry& registry, const std::string& env_id) {
  Task out = task;
  out.plan_step_count = std::max<int>(1, static_cast<int>(task.validation_plan.size()));
  if (!task.judge_template) {
    out.is_valid = false;
    out.judge.reset();
    out.failure_reason = "no judge template";
    return out;
  }
  PlanRun run = run_plan(task, registry, env_id);
  if (!run.ok) {
    out.is_valid = false;
    out.judge.reset();
    out.failure_reason = run.reason;
    return out;
  }
  std::string reason;
  auto judge = instantiate_judge(*task.judge_template, run.bindings, &reason);
  if (!judge) {
    out.is_valid = false;
    out.judge.reset();
    out.failure_reason = reason;
    return out;
  }
  out.judge = std::move(judge);
  out.is_valid = true;
  out.failure_reason.clear();
  out.difficulty = classify_difficulty(out);
  return out;
}

RevalidateOutcome revalidate(Task& task, Registry& registry, const std::string& env_id) {
  Task fresh = validate_task(task, registry, env_id);
  if (!fresh.is_valid) {
    task = fresh;
    return RevalidateOutcome::now_invalid;
  }
  bool same = task.judge && serialize_judge(*task.judge) == serialize_judge(*fresh.judge);
  task = fresh;
  return same ? RevalidateOutcome::unchanged : RevalidateOutcome::judge_updated;
}

Difficulty classify_difficulty(bool requires_auth, bool mutates_state,
                               int plan_step_count) {
  if (requires_auth && mutates_state) return Difficulty::hard;
  if (plan_step_count >= 2 || mutates_state) return Difficulty::medium;
  return Difficulty::easy;
}

Difficulty classify_difficulty(const Task& task) {
  return classify_difficulty(task.requires_auth, task.mutates_state,
                             task.plan_step_count);
}

std::vector<FixtureEntry> load_fixture_entries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::corpus_format_error, "cannot open " + path);
  json doc = json::parse(in, nullptr, false);
  if (!doc.is_array()) {
    throw Error(ErrorCode::corpus_format_error, path + ": expected a JSON array");
  }
  std::vector<FixtureEntry> entries;
  int index = 0;
  for (const auto& row : doc) {
    try {
      if (!row.is_object()) throw SchemaError("", "row is not an object");
      FixtureEntry e;
      e.task.task_id = row.value("task_id", "");
      e.task.site = row.value("site", "");
      e.task.instruction = row.value("instruction", "");
      if (e.task.task_id.empty() || e.task.instruction.empty()) {
        throw SchemaError("", "task_id and instruction are required");
      }
      if (!row.contains("judge")) throw SchemaError("judge", "missing");
      e.task.judge = parse_judge(row["judge"].dump());
      e.task.is_valid = true;
      auto diff = difficulty_from_string(row.value("difficulty", ""));
      if (!diff) throw SchemaError("difficulty", "unknown tier");
      e.task.difficulty = *diff;
      e.task.requires_auth = row.value("requires_auth", false);
      e.task.mutates_state = row.value("mutates_state", false);
      e.task.plan_step_count = row.value("plan_step_count", 1);
      e.ground_truth_answer = row.value("ground_truth_answer", "");
      e.perturbed_answer = row.value("perturbed_answer", "");
      entries.push_back(std::move(e));
    } catch (const Error& err) {
      throw Error(ErrorCode::corpus_format_error,
                  path + ": entry " + std::to_string(index) + ": " + err.what());
    }
    ++index;
  }
  return entries;
}

std::vector<Task> load_fixture_corpus(const std::string& path) {
  std::vector<Task> tasks;
  for (auto& e : load_fixture_entries(path)) tasks.push_back(std::move(e.task));
  return tasks;
}

std::string task_stats(const std::vector<Task>& tasks) {
  if (tasks.empty()) {
    throw Error(ErrorCode::bad_argument, "task_stats requires a non-empty task list");
  }
  int counts[3] = {0, 0, 0};
  std::set<std::string> sites;
  for (const auto& t : tasks) {
    counts[static_cast<int>(t.difficulty)]++;
    if (!t.site.empty()) sites.insert(t.site);
  }
  auto total = static_cast<double>(tasks.size());
  json doc;
  doc["total"] = tasks.size();
  const char* names[3] = {"easy", "medium", "hard"};
  for (int i = 0; i < 3; ++i) {
    doc[names[i]] = {{"count", counts[i]},
                     {"percent", 100.0 * static_cast<double>(counts[i]) / total}};
  }
  doc["sites"] = sites.size();
  doc["tasks_per_site"] =
      sites.empty() ? 0.0 : total / static_cast<double>(sites.size());
  return doc.dump();
}

}  // namespace verienv
