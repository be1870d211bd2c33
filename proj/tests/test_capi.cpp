#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "verienv.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kFixtureDir = VERIENV_FIXTURE_DIR;

struct Freed {
  char* ptr = nullptr;
  ~Freed() { verienv_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
};

struct Harness {
  fs::path dir;
  verienv_harness* handle = nullptr;

  Harness() {
    dir = fs::temp_directory_path() / ("verienv-capi-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    json cfg;
    cfg["registry_path"] = (dir / "registry.json").string();
    cfg["serve_builtin_http"] = false;
    REQUIRE(verienv_harness_create(cfg.dump().c_str(), &handle) == VERIENV_OK);
  }
  ~Harness() {
    verienv_harness_destroy(handle);
    std::error_code ec;
    fs::remove_all(dir, ec);
  }

  void register_and_start(const std::string& id, int port) {
    json m;
    m["env_id"] = id;
    m["kind"] = "builtin_reference";
    m["ports"] = {port};
    m["seed"] = 42;
    Freed out;
    REQUIRE(verienv_env_register(handle, m.dump().c_str(), &out.ptr) == VERIENV_OK);
    Freed st;
    REQUIRE(verienv_env_start(handle, id.c_str(), &st.ptr) == VERIENV_OK);
  }
};

std::string fixture_text(const std::string& name) {
  std::ifstream in(fs::path(kFixtureDir) / name);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("status names cover the enum") {
  CHECK(std::string(verienv_status_name(VERIENV_OK)) == "ok");
  CHECK(std::string(verienv_status_name(VERIENV_ERR_SCHEMA)) == "SchemaError");
  CHECK(std::string(verienv_status_name(VERIENV_ERR_NOT_REGISTERED)) == "NotRegistered");
  CHECK(std::string(verienv_status_name(VERIENV_ERR_RESET_DRIFT)) == "ResetDrift");
  CHECK(verienv_status_name(static_cast<verienv_status>(999)) != nullptr);
}

TEST_CASE("harness create validates its config") {
  verienv_harness* h = nullptr;
  CHECK(verienv_harness_create("[1,2]", &h) == VERIENV_ERR_BAD_ARGUMENT);
  CHECK(h == nullptr);
  CHECK(std::string(verienv_last_error_message()).size() > 0);
  verienv_harness_destroy(nullptr);  // tolerated
}

TEST_CASE("judge parse and eval through the C surface") {
  const char* spec = R"({"eval_type":"rinfo","parse":null,
                         "checks":[{"op":"must_include","expected":"$2,938"}]})";
  Freed normalized;
  REQUIRE(verienv_judge_parse(spec, &normalized.ptr) == VERIENV_OK);
  auto doc = json::parse(normalized.str());
  CHECK(doc["eval_type"] == "rinfo");

  Freed verdict;
  REQUIRE(verienv_judge_eval_answer(spec, "it costs 2938 dollars", &verdict.ptr) ==
          VERIENV_OK);
  CHECK(json::parse(verdict.str())["reward"] == 1);

  Freed bad;
  CHECK(verienv_judge_parse(R"({"eval_type":"rinfo","checks":[]})", &bad.ptr) ==
        VERIENV_ERR_SCHEMA);
  CHECK(std::string(verienv_last_error_message()).find("checks") != std::string::npos);

  const char* rprog = R"({"eval_type":"rprog","parse":null,
                          "checks":[{"op":"exact_match","expected":"/done","path":"url"}]})";
  Freed pv;
  REQUIRE(verienv_judge_eval_probe(rprog, R"({"terminal_url":"/done","state_fields":{}})",
                                   &pv.ptr) == VERIENV_OK);
  CHECK(json::parse(pv.str())["reward"] == 1);
}

TEST_CASE("env lifecycle through the C surface") {
  Harness h;
  h.register_and_start("shop", 19351);

  Freed status;
  REQUIRE(verienv_env_status(h.handle, "shop", &status.ptr) == VERIENV_OK);
  auto doc = json::parse(status.str());
  CHECK(doc["state"] == "healthy");
  CHECK(doc["state_hash"].get<std::string>().size() == 64);

  Freed reset;
  CHECK(verienv_env_reset(h.handle, "shop", &reset.ptr) == VERIENV_OK);
  CHECK(json::parse(reset.str())["state_hash"] == doc["state_hash"]);

  Freed list;
  REQUIRE(verienv_env_list(h.handle, &list.ptr) == VERIENV_OK);
  CHECK(json::parse(list.str()).size() == 1);

  Freed ghost;
  CHECK(verienv_env_start(h.handle, "ghost", &ghost.ptr) == VERIENV_ERR_NOT_REGISTERED);

  Freed dup;
  json m;
  m["env_id"] = "shop";
  m["kind"] = "builtin_reference";
  m["ports"] = {19352};
  CHECK(verienv_env_register(h.handle, m.dump().c_str(), &dup.ptr) ==
        VERIENV_ERR_DUPLICATE_ID);

  Freed clash;
  m["env_id"] = "other";
  m["ports"] = {19351};
  CHECK(verienv_env_register(h.handle, m.dump().c_str(), &clash.ptr) ==
        VERIENV_ERR_PORT_CONFLICT);

  Freed stop;
  CHECK(verienv_env_stop(h.handle, "shop", &stop.ptr) == VERIENV_OK);
  CHECK(json::parse(stop.str())["state"] == "stopped");
}

TEST_CASE("task validation, stats, and fixtures through the C surface") {
  Harness h;
  h.register_and_start("shop", 19353);
  std::string tasks = fixture_text("builtin_tasks.json");

  Freed validated;
  REQUIRE(verienv_task_validate(h.handle, tasks.c_str(), "shop", &validated.ptr) ==
          VERIENV_OK);
  auto arr = json::parse(validated.str());
  REQUIRE(arr.size() == 10);
  for (const auto& t : arr) CHECK(t["is_valid"] == true);

  Freed reval;
  REQUIRE(verienv_task_revalidate(h.handle, validated.str().c_str(), "shop",
                                  &reval.ptr) == VERIENV_OK);
  auto rdoc = json::parse(reval.str());
  REQUIRE(rdoc.is_array());
  for (const auto& o : rdoc) CHECK(o["outcome"] == "unchanged");

  Freed stats;
  REQUIRE(verienv_task_stats(validated.str().c_str(), &stats.ptr) == VERIENV_OK);
  CHECK(json::parse(stats.str())["total"] == 10);

  Freed corpus;
  std::string path = (fs::path(kFixtureDir) / "table5.json").string();
  REQUIRE(verienv_fixture_load(path.c_str(), &corpus.ptr) == VERIENV_OK);
  CHECK(json::parse(corpus.str()).size() >= 20);

  Freed missing;
  CHECK(verienv_fixture_load("/nonexistent/corpus.json", &missing.ptr) ==
        VERIENV_ERR_CORPUS_FORMAT);
}

TEST_CASE("collect and dataset build through the C surface") {
  Harness h;
  h.register_and_start("shop", 19354);
  std::string tasks = fixture_text("builtin_tasks.json");
  Freed validated;
  REQUIRE(verienv_task_validate(h.handle, tasks.c_str(), "shop", &validated.ptr) ==
          VERIENV_OK);

  Freed records;
  REQUIRE(verienv_collect(h.handle, validated.str().c_str(), "oracle", "shop", 2, 11,
                          30, &records.ptr) == VERIENV_OK);
  std::istringstream lines(records.str());
  size_t count = 0, wins = 0;
  for (std::string line; std::getline(lines, line);) {
    if (line.empty()) continue;
    auto rec = json::parse(line);
    ++count;
    wins += rec["reward"].get<int>();
  }
  CHECK(count == 20);
  CHECK(wins == 20);

  Freed dataset;
  REQUIRE(verienv_dataset_build(records.str().c_str(), 1, &dataset.ptr) == VERIENV_OK);
  std::istringstream dlines(dataset.str());
  std::string header;
  std::getline(dlines, header);
  CHECK(json::parse(header)["dataset"] == "verienv-sft");

  Freed unknown;
  CHECK(verienv_collect(h.handle, validated.str().c_str(), "psychic", "shop", 1, 0, 30,
                        &unknown.ptr) == VERIENV_ERR_UNKNOWN_POLICY);
}

TEST_CASE("phase loop through the C surface") {
  Harness h;
  h.register_and_start("shop", 19355);
  std::string tasks = fixture_text("builtin_tasks.json");
  Freed validated;
  REQUIRE(verienv_task_validate(h.handle, tasks.c_str(), "shop", &validated.ptr) ==
          VERIENV_OK);

  Freed loop;
  REQUIRE(verienv_phase_loop(h.handle, validated.str().c_str(), "oracle", "shop", 2, 1,
                             19, 30, &loop.ptr) == VERIENV_OK);
  auto doc = json::parse(loop.str());
  REQUIRE(doc.is_array());
  REQUIRE(doc.size() == 2);
  CHECK(doc[0]["success_rate"] == doctest::Approx(1.0));
  CHECK(doc[1]["dataset_size"].get<size_t>() >= 10);
}

TEST_CASE("null arguments surface as bad argument, not crashes") {
  Harness h;
  Freed out;
  CHECK(verienv_judge_eval_answer(nullptr, "x", &out.ptr) == VERIENV_ERR_SCHEMA);
  CHECK(verienv_env_start(h.handle, nullptr, &out.ptr) == VERIENV_ERR_NOT_REGISTERED);
  verienv_free(nullptr);  // tolerated
}
