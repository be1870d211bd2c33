#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "verienv/errors.hpp"
#include "verienv/reference_env.hpp"

namespace verienv {

enum class EnvKind { external, builtin_reference };

struct EnvironmentManifest {
  std::string env_id;
  EnvKind kind = EnvKind::builtin_reference;
  std::string code_dir;
  std::string start_script;  // resolved relative to code_dir
  std::string reset_script;
  std::vector<int> ports;
  uint64_t seed = 0;

  static EnvironmentManifest from_json(const std::string& raw);
  std::string to_json() const;
};

enum class EnvState { registered, starting, healthy, unhealthy, resetting, stopped };
const char* to_string(EnvState state);

struct EnvStatus {
  std::string env_id;
  EnvState state = EnvState::registered;
  std::string state_hash;  // 64 hex chars, recomputed on entry to healthy
  int64_t last_transition = 0;

  std::string to_json() const;
};

struct RegistryOptions {
  int start_timeout_ms = 60000;
  int probe_timeout_ms = 2000;
  bool serve_builtin_http = true;  // bind builtin envs to their first port
};

// Single-writer registry of synthetic environments. Lifecycle transitions are
// serialized; the transition graph is enforced on every edge.
class Registry {
 public:
  explicit Registry(std::string registry_path, RegistryOptions options = {});
  ~Registry();

  Registry(const Registry&) = delete;
  Registry& operator=(const Registry&) = delete;

  std::string register_env(const EnvironmentManifest& manifest);
  EnvStatus start(const std::string& env_id);
  // override_seed models a reset that loses the original seed; the resulting
  // hash mismatch surfaces as ResetDrift.
  EnvStatus reset(const std::string& env_id,
                  std::optional<uint64_t> override_seed = std::nullopt);
  EnvStatus health(const std::string& env_id);
  EnvStatus stop(const std::string& env_id);
  EnvStatus status(const std::string& env_id) const;
  std::string state_hash(const std::string& env_id) const;
  std::string initial_hash(const std::string& env_id) const;
  std::vector<EnvStatus> list() const;
  void stop_all();

  // State-access interface for validators: direct for builtin environments,
  // HTTP /sdk for external ones.
  std::string sdk_query(const std::string& env_id, const SdkCall& call);

  // Builtin environments only; requires state healthy.
  ReferenceEnv& builtin_env(const std::string& env_id);

  const std::vector<std::pair<EnvState, EnvState>>& transition_log(
      const std::string& env_id) const;

 private:
  struct Entry;

  Entry& entry(const std::string& env_id);
  const Entry& entry(const std::string& env_id) const;
  void transition(Entry& e, EnvState next);
  void persist_locked() const;
  void load();
  std::string compute_hash(Entry& e);
  bool probe_port(int port) const;

  std::string registry_path_;
  RegistryOptions options_;
  mutable std::mutex mutex_;
  std::vector<std::unique_ptr<Entry>> entries_;
};

}  // namespace verienv
