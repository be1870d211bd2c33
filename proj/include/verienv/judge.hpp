#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "verienv/errors.hpp"

namespace verienv {

enum class CheckOp {
  exact_match,
  must_include,
  fuzzy_match,
  must_include_all,
};

const char* to_string(CheckOp op);
std::optional<CheckOp> check_op_from_string(const std::string& name);

struct Check {
  CheckOp op = CheckOp::must_include;
  // Singular for every op except must_include_all, which uses the list.
  std::string expected;
  std::vector<std::string> expected_list;
  std::optional<std::string> path;
};

enum class EvalType { rinfo, rprog };
enum class ParseMode { none, json };

struct JudgeSpec {
  EvalType eval_type = EvalType::rinfo;
  ParseMode parse = ParseMode::none;
  std::vector<Check> checks;
};

// Carrier for rprog evaluation targets: the terminal URL plus named state
// probe values collected from the environment's state-access interface.
struct ProbeDocument {
  std::string terminal_url;
  std::map<std::string, std::string> state_fields;
};

struct CheckResult {
  int index = 0;
  bool pass = false;
  std::string evidence;  // matched substring, empty on fail
};

struct JudgeVerdict {
  int reward = 0;  // 1 iff every check passed
  std::vector<CheckResult> per_check;
};

// Lowercase, trim, collapse whitespace runs, drop thousands-separator commas
// between digits and currency '$'. Applied to both expected and target before
// every op. Idempotent.
std::string normalize(const std::string& raw);

// Best-window similarity: 1 - lev(e, w) / max(|e|, |w|) maximized over all
// contiguous windows w of target whose length is within +/-30% of |e|.
double fuzzy_similarity(const std::string& expected, const std::string& target);

inline constexpr double kFuzzyThreshold = 0.80;

// Parses and validates a judge document (JSON, keys eval_type/parse/checks).
// Throws SchemaError naming the offending field path.
JudgeSpec parse_judge(const std::string& raw);

std::string serialize_judge(const JudgeSpec& spec);

// target must already be normalized; expected is normalized internally.
CheckResult eval_check(const Check& check, const std::string& target, int index = 0);

JudgeVerdict evaluate_rinfo(const JudgeSpec& spec, const std::string& final_answer);
JudgeVerdict evaluate_rprog(const JudgeSpec& spec, const ProbeDocument& probe);

std::string serialize_verdict(const JudgeVerdict& verdict);

}  // namespace verienv
