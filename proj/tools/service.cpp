#include "service.hpp"

#include <csignal>
#include <string>

#include "json.hpp"

using nlohmann::json;

namespace verienv_tool {

namespace {

int http_status_for(verienv_status status) {
  switch (status) {
    case VERIENV_OK: return 200;
    case VERIENV_ERR_SCHEMA: return 422;
    case VERIENV_ERR_NOT_REGISTERED: return 404;
    case VERIENV_ERR_PORT_CONFLICT:
    case VERIENV_ERR_DUPLICATE_ID:
    case VERIENV_ERR_LIFECYCLE:
    case VERIENV_ERR_PORT_BIND: return 409;
    case VERIENV_ERR_BAD_ARGUMENT:
    case VERIENV_ERR_UNKNOWN_POLICY:
    case VERIENV_ERR_MISSING_SCRIPT: return 400;
    default: return 500;
  }
}

void reply(httplib::Response& res, verienv_status status, char* payload) {
  if (status == VERIENV_OK) {
    res.set_content(payload ? payload : "{}", "application/json");
    verienv_free(payload);
    return;
  }
  json err;
  err["error"] = verienv_status_name(status);
  err["message"] = verienv_last_error_message();
  res.status = http_status_for(status);
  res.set_content(err.dump(), "application/json");
}

}  // namespace

void attach_service_routes(httplib::Server& server, verienv_harness* harness) {
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"status\":\"ok\"}", "application/json");
  });

  server.Get("/envs", [harness](const httplib::Request&, httplib::Response& res) {
    char* out = nullptr;
    auto status = verienv_env_list(harness, &out);
    reply(res, status, out);
  });

  server.Post("/envs/register", [harness](const httplib::Request& req, httplib::Response& res) {
    char* out = nullptr;
    auto status = verienv_env_register(harness, req.body.c_str(), &out);
    if (status == VERIENV_OK) {
      json ok;
      ok["env_id"] = out;
      verienv_free(out);
      res.set_content(ok.dump(), "application/json");
    } else {
      reply(res, status, nullptr);
    }
  });

  auto env_op = [harness](decltype(&verienv_env_start) fn) {
    return [harness, fn](const httplib::Request& req, httplib::Response& res) {
      char* out = nullptr;
      auto status = fn(harness, req.path_params.at("id").c_str(), &out);
      reply(res, status, out);
    };
  };
  server.Post("/envs/:id/start", env_op(&verienv_env_start));
  server.Post("/envs/:id/reset", env_op(&verienv_env_reset));
  server.Post("/envs/:id/stop", env_op(&verienv_env_stop));
  server.Get("/envs/:id/status", env_op(&verienv_env_status));
  server.Get("/envs/:id/health", env_op(&verienv_env_health));

  server.Post("/judge/eval", [](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (!body.is_object() || !body.contains("spec")) {
      reply(res, VERIENV_ERR_BAD_ARGUMENT, nullptr);
      return;
    }
    std::string spec = body["spec"].dump();
    char* out = nullptr;
    verienv_status status;
    if (body.contains("probe")) {
      status = verienv_judge_eval_probe(spec.c_str(), body["probe"].dump().c_str(), &out);
    } else {
      std::string answer = body.value("answer", "");
      status = verienv_judge_eval_answer(spec.c_str(), answer.c_str(), &out);
    }
    reply(res, status, out);
  });

  server.Post("/tasks/validate", [harness](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (!body.is_object() || !body.contains("tasks") || !body.contains("env_id")) {
      reply(res, VERIENV_ERR_BAD_ARGUMENT, nullptr);
      return;
    }
    char* out = nullptr;
    auto status = verienv_task_validate(harness, body["tasks"].dump().c_str(),
                                        body["env_id"].get<std::string>().c_str(), &out);
    reply(res, status, out);
  });

  server.Post("/tasks/revalidate", [harness](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (!body.is_object() || !body.contains("tasks") || !body.contains("env_id")) {
      reply(res, VERIENV_ERR_BAD_ARGUMENT, nullptr);
      return;
    }
    char* out = nullptr;
    auto status = verienv_task_revalidate(harness, body["tasks"].dump().c_str(),
                                          body["env_id"].get<std::string>().c_str(), &out);
    reply(res, status, out);
  });

  server.Post("/tasks/stats", [](const httplib::Request& req, httplib::Response& res) {
    char* out = nullptr;
    auto status = verienv_task_stats(req.body.c_str(), &out);
    reply(res, status, out);
  });

  server.Post("/collect", [harness](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (!body.is_object() || !body.contains("tasks")) {
      reply(res, VERIENV_ERR_BAD_ARGUMENT, nullptr);
      return;
    }
    char* out = nullptr;
    auto status = verienv_collect(
        harness, body["tasks"].dump().c_str(), body.value("policy", "oracle").c_str(),
        body.value("env_id", "").c_str(), body.value("rollouts_per_task", 1),
        body.value("seed", uint64_t{0}), body.value("max_steps", 30), &out);
    if (status == VERIENV_OK) {
      res.set_content(out, "application/x-ndjson");
      verienv_free(out);
    } else {
      reply(res, status, nullptr);
    }
  });

  server.Post("/dataset/build", [](const httplib::Request& req, httplib::Response& res) {
    char* out = nullptr;
    auto status = verienv_dataset_build(req.body.c_str(), 1, &out);
    if (status == VERIENV_OK) {
      res.set_content(out, "application/x-ndjson");
      verienv_free(out);
    } else {
      reply(res, status, nullptr);
    }
  });
}

namespace {

httplib::Server* g_serving = nullptr;

}  // namespace

int run_service(verienv_harness* harness, const std::string& host, int port) {
  httplib::Server server;
  attach_service_routes(server, harness);
  if (!server.bind_to_port(host, port)) return 1;
  g_serving = &server;
  std::signal(SIGINT, [](int) { if (g_serving) g_serving->stop(); });
  std::signal(SIGTERM, [](int) { if (g_serving) g_serving->stop(); });
  bool ok = server.listen_after_bind();
  g_serving = nullptr;

  // Graceful shutdown: take every running environment down with us.
  char* listing = nullptr;
  if (verienv_env_list(harness, &listing) == VERIENV_OK) {
    json envs = json::parse(listing ? listing : "[]", nullptr, false);
    verienv_free(listing);
    if (envs.is_array()) {
      for (const auto& e : envs) {
        if (e.value("state", "") != "healthy") continue;
        char* out = nullptr;
        verienv_env_stop(harness, e.value("env_id", "").c_str(), &out);
        verienv_free(out);
      }
    }
  }
  return ok ? 0 : 1;
}

}  // namespace verienv_tool
