#pragma once

#include "httplib.h"
#include "verienv.h"

namespace verienv_tool {

// Wires the HTTP endpoints onto the server. All handlers go through the C API
// so CLI and service behavior stay identical.
void attach_service_routes(httplib::Server& server, verienv_harness* harness);

// Blocking; returns once the server is stopped.
int run_service(verienv_harness* harness, const std::string& host, int port);

}  // namespace verienv_tool
