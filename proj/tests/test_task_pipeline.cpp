#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "verienv/task.hpp"

using namespace verienv;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kFixtureDir = VERIENV_FIXTURE_DIR;

struct BuiltinHarness {
  fs::path dir;
  Registry registry;

  BuiltinHarness()
      : dir(fs::temp_directory_path() / ("verienv-task-" + std::to_string(::getpid()))),
        registry((fs::create_directories(dir), (dir / "registry.json").string()),
                 [] {
                   RegistryOptions o;
                   o.serve_builtin_http = false;
                   return o;
                 }()) {
    EnvironmentManifest m;
    m.env_id = "shop";
    m.kind = EnvKind::builtin_reference;
    m.ports = {19301};
    m.seed = 42;
    registry.register_env(m);
    registry.start("shop");
  }
  ~BuiltinHarness() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

std::string fixture(const std::string& name) {
  return (fs::path(kFixtureDir) / name).string();
}

}  // namespace

TEST_CASE("task json round trip and invariants") {
  auto tasks = load_tasks(fixture("builtin_tasks.json"));
  REQUIRE(tasks.size() == 10);
  for (const auto& t : tasks) {
    CHECK_FALSE(t.is_valid);
    CHECK_FALSE(t.judge.has_value());  // is_valid iff judge present
    CHECK(t.judge_template.has_value());
    auto back = Task::from_json(t.to_json());
    CHECK(back.to_json() == t.to_json());
  }

  SUBCASE("is_valid without judge is rejected") {
    json doc = json::parse(tasks[0].to_json());
    doc["is_valid"] = true;
    CHECK_THROWS_AS(Task::from_json(doc.dump()), Error);
  }
  SUBCASE("judge without is_valid is rejected") {
    json doc = json::parse(tasks[0].to_json());
    doc["judge"] = doc["judge_template"];
    CHECK_THROWS_AS(Task::from_json(doc.dump()), Error);
  }
}

TEST_CASE("validation instantiates judges from plan bindings") {
  BuiltinHarness h;
  auto tasks = load_tasks(fixture("builtin_tasks.json"));

  for (const auto& t : tasks) {
    auto v = validate_task(t, h.registry, "shop");
    CHECK(v.is_valid);
    REQUIRE(v.judge.has_value());
    // No placeholder survives instantiation.
    for (const auto& c : v.judge->checks) {
      CHECK(c.expected.find('{') == std::string::npos);
      for (const auto& e : c.expected_list) CHECK(e.find('{') == std::string::npos);
    }
  }

  SUBCASE("instantiated values match direct sdk queries") {
    const Task* count_task = nullptr;
    for (const auto& t : tasks) {
      if (t.task_id == "bt-total-count") count_task = &t;
    }
    REQUIRE(count_task);
    auto v = validate_task(*count_task, h.registry, "shop");
    CHECK(v.judge->checks[0].expected == "60");
  }

  SUBCASE("validation is deterministic") {
    auto a = validate_task(tasks[0], h.registry, "shop");
    auto b = validate_task(tasks[0], h.registry, "shop");
    CHECK(a.to_json() == b.to_json());
  }
}

TEST_CASE("validation fails tasks whose plan binds nothing") {
  BuiltinHarness h;
  Task t;
  t.task_id = "empty-binding";
  t.site = "builtin";
  t.instruction = "impossible";
  t.validation_plan = {{"list_listings", {{"category", "condo"}, {"sort", ""}, {"limit", "0"}}, "rows"}};
  JudgeSpec js;
  js.eval_type = EvalType::rinfo;
  Check c;
  c.op = CheckOp::must_include;
  c.expected = "{rows.0.name}";
  js.checks = {c};
  t.judge_template = js;

  SUBCASE("unknown sdk call") {
    t.validation_plan[0].name = "no_such_call";
    auto v = validate_task(t, h.registry, "shop");
    CHECK_FALSE(v.is_valid);
    CHECK_FALSE(v.judge.has_value());
    CHECK_FALSE(v.failure_reason.empty());
  }
  SUBCASE("plan that binds an empty result") {
    // No category named "mansion": list_listings returns [] and the binding
    // is empty, so the task is not executable.
    t.validation_plan[0].args["category"] = "mansion";
    auto v = validate_task(t, h.registry, "shop");
    CHECK_FALSE(v.is_valid);
    CHECK_FALSE(v.failure_reason.empty());
  }
  SUBCASE("placeholder referencing a missing binding") {
    Check bad;
    bad.op = CheckOp::must_include;
    bad.expected = "{nonexistent.field}";
    t.judge_template->checks = {bad};
    t.validation_plan[0].args["category"] = "all";
    t.validation_plan[0].args["limit"] = "1";
    auto v = validate_task(t, h.registry, "shop");
    CHECK_FALSE(v.is_valid);
  }
}

TEST_CASE("revalidation distinguishes unchanged, updated, and now-invalid") {
  BuiltinHarness h;
  auto tasks = load_tasks(fixture("builtin_tasks.json"));
  Task listing_task;
  for (const auto& t : tasks) {
    if (t.task_id == "bt-listing-detail") listing_task = t;
  }
  auto valid = validate_task(listing_task, h.registry, "shop");

  SUBCASE("unchanged when the environment did not move") {
    Task copy = valid;
    CHECK(revalidate(copy, h.registry, "shop") == RevalidateOutcome::unchanged);
    CHECK(copy.is_valid);
    CHECK(copy.to_json() == valid.to_json());
  }
  SUBCASE("judge updated after the underlying row changes") {
    h.registry.builtin_env("shop").corrupt_listing_name(7, "Renamed Hideout");
    Task copy = valid;
    CHECK(revalidate(copy, h.registry, "shop") == RevalidateOutcome::judge_updated);
    CHECK(copy.is_valid);
    bool mentions = false;
    for (const auto& c : copy.judge->checks) {
      mentions = mentions || c.expected == "{l.name}" ||
                 c.expected.find("renamed hideout") != std::string::npos ||
                 c.expected.find("Renamed Hideout") != std::string::npos;
    }
    CHECK(mentions);
    h.registry.reset("shop");
  }
  SUBCASE("now invalid when the plan stops executing") {
    Task copy = valid;
    copy.validation_plan[0].args["id"] = "999";
    CHECK(revalidate(copy, h.registry, "shop") == RevalidateOutcome::now_invalid);
    CHECK_FALSE(copy.is_valid);
    CHECK_FALSE(copy.judge.has_value());
  }
}

TEST_CASE("difficulty classification is exhaustive over the rule grid") {
  // hard iff auth and mutation; medium iff multi-step or mutation; easy else.
  struct Row {
    bool auth;
    bool mutates;
    int steps;
    Difficulty want;
  };
  const Row rows[] = {
      {false, false, 1, Difficulty::easy},
      {false, false, 2, Difficulty::medium},
      {false, true, 1, Difficulty::medium},
      {false, true, 2, Difficulty::medium},
      {true, false, 1, Difficulty::easy},
      {true, false, 2, Difficulty::medium},
      {true, true, 1, Difficulty::hard},
      {true, true, 2, Difficulty::hard},
  };
  for (const auto& r : rows) {
    CAPTURE(r.auth);
    CAPTURE(r.mutates);
    CAPTURE(r.steps);
    CHECK(classify_difficulty(r.auth, r.mutates, r.steps) == r.want);
  }
  for (int steps = 1; steps <= 6; ++steps) {
    CHECK(classify_difficulty(true, true, steps) == Difficulty::hard);
  }
}

TEST_CASE("corpus rows carry consistent difficulty labels") {
  auto entries = load_fixture_entries(fixture("table5.json"));
  REQUIRE(entries.size() >= 20);
  for (const auto& e : entries) {
    CHECK(e.task.difficulty == classify_difficulty(e.task));
    CHECK_FALSE(e.ground_truth_answer.empty());
    CHECK_FALSE(e.perturbed_answer.empty());
    CHECK(e.task.judge.has_value());
  }
}

TEST_CASE("fixture corpus judges separate truth from perturbation") {
  auto entries = load_fixture_entries(fixture("table5.json"));
  for (const auto& e : entries) {
    CAPTURE(e.task.task_id);
    if (e.task.judge->eval_type != EvalType::rinfo) continue;
    CHECK(evaluate_rinfo(*e.task.judge, e.ground_truth_answer).reward == 1);
    CHECK(evaluate_rinfo(*e.task.judge, e.perturbed_answer).reward == 0);
  }
}

TEST_CASE("corpus loader reports the offending entry") {
  fs::path tmp = fs::temp_directory_path() / "verienv-bad-corpus.json";
  {
    std::ofstream out(tmp);
    out << R"([{"task_id":"ok","site":"s","instruction":"i",
                "judge":{"eval_type":"rinfo","parse":null,
                         "checks":[{"op":"must_include","expected":"x"}]},
                "is_valid":true,"difficulty":"easy",
                "ground_truth_answer":"x","perturbed_answer":"y"},
               {"task_id":"broken"}])";
  }
  try {
    load_fixture_entries(tmp.string());
    FAIL("expected corpus format error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::corpus_format_error);
    CHECK(std::string(e.what()).find("1") != std::string::npos);  // entry index
  }
  fs::remove(tmp);
}

TEST_CASE("task stats aggregates counts, percentages, and site averages") {
  auto tasks = load_fixture_corpus(fixture("table5.json"));
  auto doc = json::parse(task_stats(tasks));
  CHECK(doc["total"] == 30);
  int total = doc["easy"]["count"].get<int>() + doc["medium"]["count"].get<int>() +
              doc["hard"]["count"].get<int>();
  CHECK(total == 30);
  double pct = doc["easy"]["percent"].get<double>() +
               doc["medium"]["percent"].get<double>() +
               doc["hard"]["percent"].get<double>();
  CHECK(pct == doctest::Approx(100.0));
  CHECK(doc["sites"] == 30);
  CHECK(doc["tasks_per_site"] == doctest::Approx(1.0));
}

TEST_CASE("save and load round trips through disk") {
  BuiltinHarness h;
  auto tasks = load_tasks(fixture("builtin_tasks.json"));
  std::vector<Task> validated;
  for (const auto& t : tasks) validated.push_back(validate_task(t, h.registry, "shop"));

  fs::path tmp = h.dir / "validated.json";
  save_tasks(validated, tmp.string());
  auto back = load_tasks(tmp.string());
  REQUIRE(back.size() == validated.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].to_json() == validated[i].to_json());
  }
}
