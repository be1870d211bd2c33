#include "verienv/judge.hpp"

#include <algorithm>
#include <cctype>

#include "json.hpp"

using nlohmann::json;

namespace verienv {

const char* to_string(CheckOp op) {
  switch (op) {
    case CheckOp::exact_match: return "exact_match";
    case CheckOp::must_include: return "must_include";
    case CheckOp::fuzzy_match: return "fuzzy_match";
    case CheckOp::must_include_all: return "must_include_all";
  }
  return "?";
}

std::optional<CheckOp> check_op_from_string(const std::string& name) {
  if (name == "exact_match") return CheckOp::exact_match;
  if (name == "must_include") return CheckOp::must_include;
  if (name == "fuzzy_match") return CheckOp::fuzzy_match;
  if (name == "must_include_all") return CheckOp::must_include_all;
  return std::nullopt;
}

std::string normalize(const std::string& raw) {
  // Lowercase and drop '$' first, then collapse whitespace, and only then
  // strip digit-separator commas. Removing commas before the other passes
  // breaks idempotence: deleting a '$' or whitespace can join digits around
  // a comma that the first pass had no reason to strip.
  std::string s;
  s.reserve(raw.size());
  for (unsigned char c : raw) {
    if (c == '$') continue;
    s.push_back(static_cast<char>(std::tolower(c)));
  }
  std::string collapsed;
  collapsed.reserve(s.size());
  bool in_ws = true;  // swallows leading whitespace
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      in_ws = true;
    } else {
      if (in_ws && !collapsed.empty()) collapsed.push_back(' ');
      in_ws = false;
      collapsed.push_back(static_cast<char>(c));
    }
  }
  std::string out;
  out.reserve(collapsed.size());
  for (size_t i = 0; i < collapsed.size(); ++i) {
    if (collapsed[i] == ',' && i > 0 && i + 1 < collapsed.size() &&
        std::isdigit(static_cast<unsigned char>(collapsed[i - 1])) &&
        std::isdigit(static_cast<unsigned char>(collapsed[i + 1]))) {
      continue;
    }
    out.push_back(collapsed[i]);
  }
  return out;
}

namespace {

size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

struct FuzzyBest {
  double score = 0.0;
  std::string window;
};

FuzzyBest fuzzy_best_window(const std::string& expected, const std::string& target) {
  FuzzyBest best;
  if (expected.empty()) return best;
  if (target.empty()) return best;
  size_t n = expected.size();
  size_t lmin = static_cast<size_t>((7 * n + 9) / 10);  // ceil(0.7 n)
  size_t lmax = static_cast<size_t>(13 * n / 10);       // floor(1.3 n)
  lmin = std::max<size_t>(lmin, 1);
  if (lmin > target.size()) {
    // Target shorter than any admissible window: compare against the whole
    // target so near-misses on short answers still score.
    lmin = lmax = target.size();
  }
  lmax = std::min(lmax, target.size());
  for (size_t len = lmin; len <= lmax; ++len) {
    for (size_t start = 0; start + len <= target.size(); ++start) {
      std::string_view w(target.data() + start, len);
      size_t d = levenshtein(expected, w);
      double sim = 1.0 - static_cast<double>(d) /
                             static_cast<double>(std::max(n, len));
      if (sim > best.score) {
        best.score = sim;
        best.window = std::string(w);
      }
    }
  }
  return best;
}

std::string check_path(int index, const char* field) {
  return "checks[" + std::to_string(index) + "]." + field;
}

bool valid_dot_path(const std::string& path) {
  if (path.empty()) return false;
  bool seg_has_char = false;
  for (char c : path) {
    if (c == '.') {
      if (!seg_has_char) return false;
      seg_has_char = false;
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      seg_has_char = true;
    } else {
      return false;
    }
  }
  return seg_has_char;
}

}  // namespace

double fuzzy_similarity(const std::string& expected, const std::string& target) {
  return fuzzy_best_window(expected, target).score;
}

JudgeSpec parse_judge(const std::string& raw) {
  json doc = json::parse(raw, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw SchemaError("", "judge document is not a JSON object");
  }

  JudgeSpec spec;

  if (!doc.contains("eval_type") || !doc["eval_type"].is_string()) {
    throw SchemaError("eval_type", "missing or non-string");
  }
  std::string et = doc["eval_type"].get<std::string>();
  if (et == "rinfo") {
    spec.eval_type = EvalType::rinfo;
  } else if (et == "rprog") {
    spec.eval_type = EvalType::rprog;
  } else {
    throw SchemaError("eval_type", "unknown eval_type '" + et + "'");
  }

  spec.parse = ParseMode::none;
  if (doc.contains("parse") && !doc["parse"].is_null()) {
    if (!doc["parse"].is_string()) {
      throw SchemaError("parse", "must be \"json\" or null");
    }
    std::string p = doc["parse"].get<std::string>();
    if (p == "json") {
      spec.parse = ParseMode::json;
    } else if (p != "none") {
      throw SchemaError("parse", "unknown parse mode '" + p + "'");
    }
  }
  if (spec.parse == ParseMode::json && spec.eval_type == EvalType::rprog) {
    throw SchemaError("parse", "parse=json is only valid for eval_type=rinfo");
  }

  if (!doc.contains("checks") || !doc["checks"].is_array()) {
    throw SchemaError("checks", "missing or not an array");
  }
  if (doc["checks"].empty()) {
    throw SchemaError("checks", "checks list must be non-empty");
  }

  int i = 0;
  for (const auto& c : doc["checks"]) {
    if (!c.is_object()) throw SchemaError(check_path(i, "op"), "check is not an object");
    if (!c.contains("op") || !c["op"].is_string()) {
      throw SchemaError(check_path(i, "op"), "missing or non-string");
    }
    Check check;
    auto op = check_op_from_string(c["op"].get<std::string>());
    if (!op) {
      throw SchemaError(check_path(i, "op"),
                        "unknown op '" + c["op"].get<std::string>() + "'");
    }
    check.op = *op;

    if (!c.contains("expected")) {
      throw SchemaError(check_path(i, "expected"), "missing");
    }
    const auto& exp = c["expected"];
    if (check.op == CheckOp::must_include_all) {
      if (!exp.is_array() || exp.empty()) {
        throw SchemaError(check_path(i, "expected"),
                          "must_include_all requires a non-empty list");
      }
      for (const auto& e : exp) {
        if (!e.is_string() || normalize(e.get<std::string>()).empty()) {
          throw SchemaError(check_path(i, "expected"),
                            "list elements must be non-empty text");
        }
        check.expected_list.push_back(e.get<std::string>());
      }
    } else {
      if (exp.is_array()) {
        throw SchemaError(check_path(i, "expected"),
                          "list expected is only valid for must_include_all");
      }
      std::string value = exp.is_string() ? exp.get<std::string>() : exp.dump();
      if (normalize(value).empty()) {
        throw SchemaError(check_path(i, "expected"),
                          "expected text is empty after normalization");
      }
      check.expected = value;
    }

    if (c.contains("path") && !c["path"].is_null()) {
      if (!c["path"].is_string()) {
        throw SchemaError(check_path(i, "path"), "must be a string");
      }
      std::string path = c["path"].get<std::string>();
      if (!valid_dot_path(path)) {
        throw SchemaError(check_path(i, "path"),
                          "path must be non-empty dot-separated [A-Za-z0-9_]+ segments");
      }
      if (spec.eval_type == EvalType::rinfo && spec.parse != ParseMode::json) {
        throw SchemaError(check_path(i, "path"),
                          "path on an rinfo check requires parse=json");
      }
      check.path = path;
    }

    spec.checks.push_back(std::move(check));
    ++i;
  }
  return spec;
}

std::string serialize_judge(const JudgeSpec& spec) {
  json doc;
  doc["eval_type"] = spec.eval_type == EvalType::rinfo ? "rinfo" : "rprog";
  if (spec.parse == ParseMode::json) {
    doc["parse"] = "json";
  } else {
    doc["parse"] = nullptr;
  }
  doc["checks"] = json::array();
  for (const auto& c : spec.checks) {
    json jc;
    jc["op"] = to_string(c.op);
    if (c.op == CheckOp::must_include_all) {
      jc["expected"] = c.expected_list;
    } else {
      jc["expected"] = c.expected;
    }
    if (c.path) jc["path"] = *c.path;
    doc["checks"].push_back(std::move(jc));
  }
  return doc.dump();
}

CheckResult eval_check(const Check& check, const std::string& target, int index) {
  CheckResult r;
  r.index = index;
  switch (check.op) {
    case CheckOp::exact_match: {
      std::string e = normalize(check.expected);
      if (e == target) {
        r.pass = true;
        r.evidence = target;
      }
      break;
    }
    case CheckOp::must_include: {
      std::string e = normalize(check.expected);
      if (!e.empty() && target.find(e) != std::string::npos) {
        r.pass = true;
        r.evidence = e;
      }
      break;
    }
    case CheckOp::must_include_all: {
      std::string joined;
      bool all = true;
      for (const auto& raw : check.expected_list) {
        std::string e = normalize(raw);
        if (e.empty() || target.find(e) == std::string::npos) {
          all = false;
          break;
        }
        if (!joined.empty()) joined += "; ";
        joined += e;
      }
      if (all) {
        r.pass = true;
        r.evidence = joined;
      }
      break;
    }
    case CheckOp::fuzzy_match: {
      auto best = fuzzy_best_window(normalize(check.expected), target);
      if (best.score >= kFuzzyThreshold) {
        r.pass = true;
        r.evidence = best.window;
      }
      break;
    }
  }
  return r;
}

namespace {

JudgeVerdict all_failed(const JudgeSpec& spec) {
  JudgeVerdict v;
  v.reward = 0;
  for (size_t i = 0; i < spec.checks.size(); ++i) {
    v.per_check.push_back({static_cast<int>(i), false, ""});
  }
  return v;
}

JudgeVerdict aggregate(std::vector<CheckResult> results) {
  JudgeVerdict v;
  v.reward = 1;
  for (const auto& r : results) {
    if (!r.pass) v.reward = 0;
  }
  v.per_check = std::move(results);
  return v;
}

// Walks a dot path through a JSON document; returns the stringified leaf.
std::optional<std::string> extract_json_path(const json& doc, const std::string& path) {
  const json* cur = &doc;
  size_t pos = 0;
  while (pos <= path.size()) {
    size_t dot = path.find('.', pos);
    std::string seg = path.substr(pos, dot == std::string::npos ? std::string::npos
                                                                : dot - pos);
    if (cur->is_object() && cur->contains(seg)) {
      cur = &(*cur)[seg];
    } else if (cur->is_array()) {
      // numeric segment indexes into arrays
      char* end = nullptr;
      long idx = std::strtol(seg.c_str(), &end, 10);
      if (end == seg.c_str() + seg.size() && idx >= 0 &&
          static_cast<size_t>(idx) < cur->size()) {
        cur = &(*cur)[static_cast<size_t>(idx)];
      } else {
        return std::nullopt;
      }
    } else {
      return std::nullopt;
    }
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  if (cur->is_string()) return cur->get<std::string>();
  return cur->dump();
}

}  // namespace

JudgeVerdict evaluate_rinfo(const JudgeSpec& spec, const std::string& final_answer) {
  json parsed;
  bool have_parsed = false;
  if (spec.parse == ParseMode::json) {
    parsed = json::parse(final_answer, nullptr, false);
    if (parsed.is_discarded()) {
      // Malformed answers are agent failures, not harness failures.
      return all_failed(spec);
    }
    have_parsed = true;
  }
  std::string whole = normalize(final_answer);
  std::vector<CheckResult> results;
  int i = 0;
  for (const auto& check : spec.checks) {
    if (check.path && have_parsed) {
      auto value = extract_json_path(parsed, *check.path);
      if (!value) {
        results.push_back({i, false, ""});
      } else {
        results.push_back(eval_check(check, normalize(*value), i));
      }
    } else {
      results.push_back(eval_check(check, whole, i));
    }
    ++i;
  }
  return aggregate(std::move(results));
}

JudgeVerdict evaluate_rprog(const JudgeSpec& spec, const ProbeDocument& probe) {
  std::vector<CheckResult> results;
  int i = 0;
  for (const auto& check : spec.checks) {
    std::optional<std::string> target;
    if (!check.path || *check.path == "url") {
      target = probe.terminal_url;
    } else if (check.path->rfind("state.", 0) == 0) {
      auto it = probe.state_fields.find(check.path->substr(6));
      if (it != probe.state_fields.end()) target = it->second;
    }
    if (!target) {
      // Unknown probe: the check fails, the rest still evaluate.
      results.push_back({i, false, ""});
    } else {
      results.push_back(eval_check(check, normalize(*target), i));
    }
    ++i;
  }
  return aggregate(std::move(results));
}

std::string serialize_verdict(const JudgeVerdict& verdict) {
  json doc;
  doc["reward"] = verdict.reward;
  doc["per_check"] = json::array();
  for (const auto& r : verdict.per_check) {
    doc["per_check"].push_back({{"index", r.index}, {"pass", r.pass}, {"evidence", r.evidence}});
  }
  return doc.dump();
}

}  // namespace verienv
