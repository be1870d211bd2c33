#include "verienv/registry.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "verienv/digest.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace verienv {

const char* to_string(EnvState state) {
  switch (state) {
    case EnvState::registered: return "registered";
    case EnvState::starting: return "starting";
    case EnvState::healthy: return "healthy";
    case EnvState::unhealthy: return "unhealthy";
    case EnvState::resetting: return "resetting";
    case EnvState::stopped: return "stopped";
  }
  return "?";
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::schema_error: return "SchemaError";
    case ErrorCode::not_registered: return "NotRegistered";
    case ErrorCode::duplicate_id: return "DuplicateId";
    case ErrorCode::port_conflict: return "PortConflict";
    case ErrorCode::missing_script: return "MissingScript";
    case ErrorCode::lifecycle_error: return "LifecycleError";
    case ErrorCode::start_timeout: return "StartTimeout";
    case ErrorCode::script_exit: return "ScriptExit";
    case ErrorCode::port_bind_failure: return "PortBindFailure";
    case ErrorCode::reset_drift: return "ResetDrift";
    case ErrorCode::env_unavailable: return "EnvUnavailable";
    case ErrorCode::corpus_format_error: return "CorpusFormatError";
    case ErrorCode::unknown_policy: return "UnknownPolicy";
    case ErrorCode::bad_argument: return "BadArgument";
    case ErrorCode::io_error: return "IoError";
  }
  return "Error";
}

namespace {

int64_t now_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

bool edge_allowed(EnvState from, EnvState to) {
  switch (from) {
    case EnvState::registered:
      return to == EnvState::starting;
    case EnvState::starting:
      return to == EnvState::healthy || to == EnvState::unhealthy;
    case EnvState::healthy:
      // healthy->unhealthy covers a failed liveness probe.
      return to == EnvState::resetting || to == EnvState::stopped ||
             to == EnvState::unhealthy;
    case EnvState::resetting:
      return to == EnvState::healthy || to == EnvState::unhealthy;
    case EnvState::unhealthy:
      return to == EnvState::healthy;  // probe recovered
    case EnvState::stopped:
      return to == EnvState::starting;
  }
  return false;
}

std::string tail_of_file(const std::string& path, size_t max_bytes = 2048) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  in.seekg(0, std::ios::end);
  auto size = static_cast<size_t>(in.tellg());
  auto start = size > max_bytes ? size - max_bytes : 0;
  in.seekg(static_cast<std::streamoff>(start));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string url_encode(const std::string& s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xf]);
    }
  }
  return out;
}

}  // namespace

EnvironmentManifest EnvironmentManifest::from_json(const std::string& raw) {
  json doc = json::parse(raw, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw SchemaError("", "manifest is not a JSON object");
  }
  EnvironmentManifest m;
  if (!doc.contains("env_id") || !doc["env_id"].is_string() ||
      doc["env_id"].get<std::string>().empty()) {
    throw SchemaError("env_id", "missing or empty");
  }
  m.env_id = doc["env_id"].get<std::string>();
  std::string kind = doc.value("kind", "builtin_reference");
  if (kind == "external") {
    m.kind = EnvKind::external;
  } else if (kind == "builtin_reference") {
    m.kind = EnvKind::builtin_reference;
  } else {
    throw SchemaError("kind", "unknown kind '" + kind + "'");
  }
  m.code_dir = doc.value("code_dir", "");
  m.start_script = doc.value("start_script", "start_servers.sh");
  m.reset_script = doc.value("reset_script", "reset_servers.sh");
  m.seed = doc.value("seed", uint64_t{0});
  if (doc.contains("ports") && doc["ports"].is_array()) {
    for (const auto& p : doc["ports"]) m.ports.push_back(p.get<int>());
  } else {
    // Fall back to the environment's port manifest file.
    std::string ports_file = doc.value("ports_file", m.code_dir + "/ports.json");
    std::ifstream in(ports_file);
    if (in) {
      json arr = json::parse(in, nullptr, false);
      if (arr.is_array()) {
        for (const auto& p : arr) m.ports.push_back(p.get<int>());
      }
    }
  }
  return m;
}

std::string EnvironmentManifest::to_json() const {
  json doc;
  doc["env_id"] = env_id;
  doc["kind"] = kind == EnvKind::external ? "external" : "builtin_reference";
  doc["code_dir"] = code_dir;
  doc["start_script"] = start_script;
  doc["reset_script"] = reset_script;
  doc["ports"] = ports;
  doc["seed"] = seed;
  return doc.dump();
}

std::string EnvStatus::to_json() const {
  json doc;
  doc["env_id"] = env_id;
  doc["state"] = to_string(state);
  doc["state_hash"] = state_hash;
  doc["last_transition"] = last_transition;
  return doc.dump();
}

// In-process HTTP face of a builtin environment.
struct BuiltinServer {
  httplib::Server server;
  std::thread thread;
  ReferenceEnv* env = nullptr;
  Session session;
  std::mutex mutex;

  bool start(ReferenceEnv* e, int port) {
    env = e;
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"status\":\"ok\"}", "application/json");
    });
    server.Get("/sdk", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard<std::mutex> lock(mutex);
      SdkCall call;
      call.name = req.get_param_value("call");
      if (req.has_param("args")) {
        json args = json::parse(req.get_param_value("args"), nullptr, false);
        if (args.is_object()) {
          for (auto& [k, v] : args.items()) {
            call.args[k] = v.is_string() ? v.get<std::string>() : v.dump();
          }
        }
      }
      try {
        json out;
        out["result"] = env->sdk_query(call);
        res.set_content(out.dump(), "application/json");
      } catch (const Error& e) {
        res.status = 400;
        res.set_content(std::string("{\"error\":\"") + e.what() + "\"}",
                        "application/json");
      }
    });
    server.Post("/action", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard<std::mutex> lock(mutex);
      try {
        auto action = BrowserAction::from_json(req.body);
        auto outcome = env->apply_action(action, session);
        json out;
        out["snapshot"] = json::parse(outcome.snapshot.to_json());
        out["invalid_element"] = outcome.invalid_element;
        if (outcome.terminal_answer) out["terminal_answer"] = *outcome.terminal_answer;
        res.set_content(out.dump(), "application/json");
      } catch (const Error& e) {
        res.status = 400;
        res.set_content(std::string("{\"error\":\"") + e.what() + "\"}",
                        "application/json");
      }
    });
    server.Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard<std::mutex> lock(mutex);
      std::string url = req.path;
      bool first = true;
      for (const auto& [k, v] : req.params) {
        url += (first ? "?" : "&") + k + "=" + v;
        first = false;
      }
      res.set_content(env->render(url, session).to_json(), "application/json");
    });

    if (!server.bind_to_port("127.0.0.1", port)) return false;
    thread = std::thread([this]() { server.listen_after_bind(); });
    server.wait_until_ready();
    return true;
  }

  ~BuiltinServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
};

struct Registry::Entry {
  EnvironmentManifest manifest;
  EnvState state = EnvState::registered;
  std::string hash;
  std::string initial;
  int64_t last_transition = 0;
  std::vector<std::pair<EnvState, EnvState>> log;

  std::unique_ptr<ReferenceEnv> builtin;
  std::unique_ptr<BuiltinServer> http;
  pid_t child = -1;
  std::string log_path;

  EnvStatus status() const {
    return {manifest.env_id, state, hash, last_transition};
  }
};

Registry::Registry(std::string registry_path, RegistryOptions options)
    : registry_path_(std::move(registry_path)), options_(options) {
  load();
}

Registry::~Registry() {
  // Detach: shut down in-process servers but leave external process groups
  // running and the persisted state untouched, so another process can pick
  // the registry back up. stop_all() remains the explicit teardown.
  for (auto& e : entries_) e->http.reset();
}

Registry::Entry& Registry::entry(const std::string& env_id) {
  for (auto& e : entries_) {
    if (e->manifest.env_id == env_id) return *e;
  }
  throw Error(ErrorCode::not_registered, "no environment '" + env_id + "'");
}

const Registry::Entry& Registry::entry(const std::string& env_id) const {
  return const_cast<Registry*>(this)->entry(env_id);
}

void Registry::transition(Entry& e, EnvState next) {
  if (!edge_allowed(e.state, next)) {
    throw Error(ErrorCode::lifecycle_error,
                e.manifest.env_id + ": illegal transition " +
                    std::string(to_string(e.state)) + " -> " + to_string(next));
  }
  e.log.emplace_back(e.state, next);
  e.state = next;
  e.last_transition = now_seconds();
}

void Registry::load() {
  std::ifstream in(registry_path_);
  if (!in) return;
  json doc = json::parse(in, nullptr, false);
  if (!doc.is_object() || !doc.contains("envs")) return;
  for (const auto& je : doc["envs"]) {
    auto e = std::make_unique<Entry>();
    e->manifest = EnvironmentManifest::from_json(je["manifest"].dump());
    e->initial = je.value("initial_hash", "");
    e->hash = je.value("hash", "");
    std::string persisted = je.value("state", "registered");
    if (persisted == "stopped") {
      e->state = EnvState::stopped;
    } else if (persisted == "healthy" || persisted == "unhealthy" ||
               persisted == "resetting" || persisted == "starting") {
      // Revive running environments across processes. External scripts run in
      // their own process group and outlive us; the builtin env is a pure
      // function of its seed, so rebuild it in this process.
      if (e->manifest.kind == EnvKind::builtin_reference) {
        e->builtin = std::make_unique<ReferenceEnv>(e->manifest.seed);
        if (options_.serve_builtin_http) {
          auto http = std::make_unique<BuiltinServer>();
          if (http->start(e->builtin.get(), e->manifest.ports.front())) {
            e->http = std::move(http);
          }
        }
        e->state = EnvState::healthy;
      } else {
        e->child = je.value("pgid", -1);
        e->state = persisted == "unhealthy" ? EnvState::unhealthy : EnvState::healthy;
      }
    }
    entries_.push_back(std::move(e));
  }
}

void Registry::persist_locked() const {
  json doc;
  doc["envs"] = json::array();
  for (const auto& e : entries_) {
    json je;
    je["manifest"] = json::parse(e->manifest.to_json());
    je["initial_hash"] = e->initial;
    je["hash"] = e->hash;
    je["state"] = to_string(e->state);
    je["pgid"] = static_cast<int>(e->child);
    doc["envs"].push_back(std::move(je));
  }
  std::string tmp = registry_path_ + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp);
    out << doc.dump(2) << "\n";
  }
  fs::rename(tmp, registry_path_);
}

std::string Registry::register_env(const EnvironmentManifest& manifest) {
  std::lock_guard<std::mutex> lock(mutex_);
  for (const auto& e : entries_) {
    if (e->manifest.env_id == manifest.env_id) {
      throw Error(ErrorCode::duplicate_id,
                  "environment '" + manifest.env_id + "' already registered");
    }
  }
  if (manifest.ports.empty()) {
    throw Error(ErrorCode::bad_argument, manifest.env_id + ": ports list is empty");
  }
  std::set<int> seen;
  for (int p : manifest.ports) {
    if (p < 1024 || p > 65535) {
      throw Error(ErrorCode::bad_argument,
                  manifest.env_id + ": port " + std::to_string(p) +
                      " outside [1024, 65535]");
    }
    if (!seen.insert(p).second) {
      throw Error(ErrorCode::port_conflict,
                  manifest.env_id + ": duplicate port " + std::to_string(p));
    }
    for (const auto& e : entries_) {
      for (int q : e->manifest.ports) {
        if (p == q) {
          throw Error(ErrorCode::port_conflict,
                      "port " + std::to_string(p) + " already held by '" +
                          e->manifest.env_id + "' (requested by '" +
                          manifest.env_id + "')");
        }
      }
    }
  }
  if (manifest.kind == EnvKind::external) {
    for (const std::string& script : {manifest.start_script, manifest.reset_script}) {
      fs::path p = fs::path(script).is_absolute() ? fs::path(script)
                                                  : fs::path(manifest.code_dir) / script;
      if (!fs::exists(p)) {
        throw Error(ErrorCode::missing_script, manifest.env_id + ": " + p.string() +
                                                   " does not exist");
      }
      if (access(p.c_str(), X_OK) != 0) {
        throw Error(ErrorCode::missing_script,
                    manifest.env_id + ": " + p.string() + " is not executable");
      }
    }
  }
  auto e = std::make_unique<Entry>();
  e->manifest = manifest;
  e->last_transition = now_seconds();
  entries_.push_back(std::move(e));
  persist_locked();
  return manifest.env_id;
}

bool Registry::probe_port(int port) const {
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(0, options_.probe_timeout_ms * 1000);
  client.set_read_timeout(0, options_.probe_timeout_ms * 1000);
  auto res = client.Get("/healthz");
  return res && res->status == 200;
}

std::string Registry::compute_hash(Entry& e) {
  if (e.manifest.kind == EnvKind::builtin_reference) {
    return e.builtin ? e.builtin->state_hash() : "";
  }
  httplib::Client client("127.0.0.1", e.manifest.ports.front());
  client.set_read_timeout(0, options_.probe_timeout_ms * 1000);
  auto res = client.Get("/state");
  if (!res || res->status != 200) return sha256_hex("");
  json doc = json::parse(res->body, nullptr, false);
  // Re-serialize with sorted keys so formatting differences don't drift.
  return sha256_hex(doc.is_discarded() ? res->body : doc.dump());
}

namespace {

pid_t spawn_script(const std::string& code_dir, const std::string& script,
                   const std::string& log_path) {
  fs::path abs = fs::path(script).is_absolute() ? fs::path(script)
                                                : fs::path(code_dir) / script;
  pid_t pid = fork();
  if (pid < 0) throw Error(ErrorCode::io_error, "fork failed");
  if (pid == 0) {
    setpgid(0, 0);  // own process group; stop() kills the whole group
    if (!code_dir.empty()) {
      if (chdir(code_dir.c_str()) != 0) _exit(127);
    }
    int fd = open(log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd >= 0) {
      dup2(fd, 1);
      dup2(fd, 2);
      close(fd);
    }
    execl(abs.c_str(), abs.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  return pid;
}

void kill_group(pid_t pid) {
  if (pid <= 0) return;
  kill(-pid, SIGTERM);
  for (int i = 0; i < 20; ++i) {
    int status = 0;
    if (waitpid(pid, &status, WNOHANG) == pid) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  kill(-pid, SIGKILL);
  waitpid(pid, nullptr, 0);
}

}  // namespace

EnvStatus Registry::start(const std::string& env_id) {
  std::lock_guard<std::mutex> lock(mutex_);
  Entry& e = entry(env_id);
  if (e.state != EnvState::registered && e.state != EnvState::stopped) {
    throw Error(ErrorCode::lifecycle_error,
                env_id + ": start requires state registered or stopped, got " +
                    to_string(e.state));
  }
  transition(e, EnvState::starting);

  if (e.manifest.kind == EnvKind::builtin_reference) {
    e.builtin = std::make_unique<ReferenceEnv>(e.manifest.seed);
    if (options_.serve_builtin_http) {
      e.http = std::make_unique<BuiltinServer>();
      if (!e.http->start(e.builtin.get(), e.manifest.ports.front())) {
        e.http.reset();
        e.builtin.reset();
        transition(e, EnvState::unhealthy);
        persist_locked();
        throw Error(ErrorCode::port_bind_failure,
                    env_id + ": cannot bind port " +
                        std::to_string(e.manifest.ports.front()));
      }
    }
    transition(e, EnvState::healthy);
    e.hash = compute_hash(e);
    if (e.initial.empty()) e.initial = e.hash;
    persist_locked();
    return e.status();
  }

  e.log_path = (fs::path(e.manifest.code_dir) / ".verienv_start.log").string();
  std::error_code ec;
  fs::remove(e.log_path, ec);
  e.child = spawn_script(e.manifest.code_dir, e.manifest.start_script, e.log_path);

  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(options_.start_timeout_ms);
  bool script_running = true;
  while (std::chrono::steady_clock::now() < deadline) {
    if (script_running) {
      int status = 0;
      pid_t r = waitpid(e.child, &status, WNOHANG);
      if (r == e.child) {
        script_running = false;
        if (WIFEXITED(status) && WEXITSTATUS(status) != 0) {
          transition(e, EnvState::unhealthy);
          persist_locked();
          throw Error(ErrorCode::script_exit,
                      env_id + ": start script exited with code " +
                          std::to_string(WEXITSTATUS(status)) + "; log tail: " +
                          tail_of_file(e.log_path));
        }
      }
    }
    bool all_up = true;
    for (int port : e.manifest.ports) all_up = all_up && probe_port(port);
    if (all_up) {
      transition(e, EnvState::healthy);
      e.hash = compute_hash(e);
      if (e.initial.empty()) e.initial = e.hash;
      persist_locked();
      return e.status();
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  kill_group(e.child);
  e.child = -1;
  transition(e, EnvState::unhealthy);
  persist_locked();
  throw Error(ErrorCode::start_timeout,
              env_id + ": not healthy within " +
                  std::to_string(options_.start_timeout_ms) + " ms");
}

EnvStatus Registry::reset(const std::string& env_id,
                          std::optional<uint64_t> override_seed) {
  std::lock_guard<std::mutex> lock(mutex_);
  Entry& e = entry(env_id);
  if (e.state != EnvState::healthy) {
    throw Error(ErrorCode::lifecycle_error,
                env_id + ": reset requires state healthy, got " + to_string(e.state));
  }
  transition(e, EnvState::resetting);

  if (e.manifest.kind == EnvKind::builtin_reference) {
    if (override_seed) {
      e.builtin->reset_with_seed(*override_seed);
    } else {
      e.builtin->reset_with_seed(e.manifest.seed);
    }
  } else {
    std::string log_path = (fs::path(e.manifest.code_dir) / ".verienv_reset.log").string();
    pid_t pid = spawn_script(e.manifest.code_dir, e.manifest.reset_script, log_path);
    int status = 0;
    waitpid(pid, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      transition(e, EnvState::unhealthy);
      persist_locked();
      throw Error(ErrorCode::script_exit,
                  env_id + ": reset script failed; log tail: " + tail_of_file(log_path));
    }
  }

  e.hash = compute_hash(e);
  if (!e.initial.empty() && e.hash != e.initial) {
    transition(e, EnvState::unhealthy);
    persist_locked();
    throw Error(ErrorCode::reset_drift,
                env_id + ": post-reset state hash " + e.hash +
                    " differs from initial " + e.initial);
  }
  transition(e, EnvState::healthy);
  persist_locked();
  return e.status();
}

EnvStatus Registry::health(const std::string& env_id) {
  std::lock_guard<std::mutex> lock(mutex_);
  Entry& e = entry(env_id);
  if (e.state != EnvState::healthy && e.state != EnvState::unhealthy) {
    return e.status();
  }
  bool up = true;
  if (e.manifest.kind == EnvKind::builtin_reference) {
    up = e.builtin != nullptr;
    if (up && e.http) up = probe_port(e.manifest.ports.front());
  } else {
    for (int port : e.manifest.ports) up = up && probe_port(port);
  }
  EnvState next = up ? EnvState::healthy : EnvState::unhealthy;
  if (next != e.state) transition(e, next);
  return e.status();
}

EnvStatus Registry::stop(const std::string& env_id) {
  std::lock_guard<std::mutex> lock(mutex_);
  Entry& e = entry(env_id);
  if (e.state != EnvState::healthy) {
    throw Error(ErrorCode::lifecycle_error,
                env_id + ": stop requires state healthy, got " + to_string(e.state));
  }
  if (e.manifest.kind == EnvKind::builtin_reference) {
    e.http.reset();
    e.builtin.reset();
  } else {
    kill_group(e.child);
    e.child = -1;
  }
  transition(e, EnvState::stopped);
  persist_locked();
  return e.status();
}

EnvStatus Registry::status(const std::string& env_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entry(env_id).status();
}

std::string Registry::state_hash(const std::string& env_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const Entry& e = entry(env_id);
  if (e.state != EnvState::healthy) {
    throw Error(ErrorCode::lifecycle_error,
                env_id + ": state_hash requires state healthy");
  }
  return const_cast<Registry*>(this)->compute_hash(const_cast<Entry&>(e));
}

std::string Registry::initial_hash(const std::string& env_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entry(env_id).initial;
}

std::vector<EnvStatus> Registry::list() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<EnvStatus> out;
  for (const auto& e : entries_) out.push_back(e->status());
  return out;
}

void Registry::stop_all() {
  std::lock_guard<std::mutex> lock(mutex_);
  for (auto& e : entries_) {
    if (e->manifest.kind == EnvKind::builtin_reference) {
      e->http.reset();
      e->builtin.reset();
    } else {
      kill_group(e->child);
      e->child = -1;
    }
    if (e->state == EnvState::healthy) transition(*e, EnvState::stopped);
  }
  persist_locked();
}

std::string Registry::sdk_query(const std::string& env_id, const SdkCall& call) {
  std::lock_guard<std::mutex> lock(mutex_);
  Entry& e = entry(env_id);
  if (e.state != EnvState::healthy) {
    throw Error(ErrorCode::env_unavailable, env_id + " is not healthy");
  }
  if (e.manifest.kind == EnvKind::builtin_reference) {
    return e.builtin->sdk_query(call);
  }
  json args = json::object();
  for (const auto& [k, v] : call.args) args[k] = v;
  httplib::Client client("127.0.0.1", e.manifest.ports.front());
  client.set_read_timeout(0, options_.probe_timeout_ms * 1000);
  auto res = client.Get("/sdk?call=" + url_encode(call.name) +
                        "&args=" + url_encode(args.dump()));
  if (!res) throw Error(ErrorCode::env_unavailable, env_id + ": /sdk unreachable");
  if (res->status != 200) {
    throw Error(ErrorCode::bad_argument, env_id + ": sdk call failed: " + res->body);
  }
  json doc = json::parse(res->body, nullptr, false);
  if (doc.is_object() && doc.contains("result")) {
    return doc["result"].is_string() ? doc["result"].get<std::string>()
                                     : doc["result"].dump();
  }
  return res->body;
}

ReferenceEnv& Registry::builtin_env(const std::string& env_id) {
  std::lock_guard<std::mutex> lock(mutex_);
  Entry& e = entry(env_id);
  if (e.manifest.kind != EnvKind::builtin_reference || !e.builtin) {
    throw Error(ErrorCode::env_unavailable, env_id + " is not a running builtin environment");
  }
  return *e.builtin;
}

const std::vector<std::pair<EnvState, EnvState>>& Registry::transition_log(
    const std::string& env_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entry(env_id).log;
}

}  // namespace verienv
