#pragma once

#include <memory>
#include <string>

#include "tellerflow/errors.h"
#include "tellerflow/session_gateway.h"

namespace httplib {
class Server;
}

namespace tellerflow {

// HTTP status for an error code (404 unknown session, 409 busy, ...).
int http_status_for(ErrorCode code);

// JSON-over-HTTP front for Gateway:
//   POST   /sessions
//   GET    /sessions/{id}
//   POST   /sessions/{id}/messages
//   POST   /sessions/{id}/transactions/{txId}/decision
//   DELETE /sessions/{id}
//   POST   /admin/guardrails/reload
//   POST   /admin/knowledge
//   GET    /admin/transactions
//   GET    /dev/sessions/{id}/code   (dev mode only)
//   GET    /healthz
class HttpGateway {
 public:
  explicit HttpGateway(std::shared_ptr<Gateway> gateway);
  ~HttpGateway();

  HttpGateway(const HttpGateway&) = delete;
  HttpGateway& operator=(const HttpGateway&) = delete;

  // Blocking.
  bool listen(const std::string& host, int port);
  // Binds without serving; returns the chosen port, or -1.
  int bind_any_port(const std::string& host);
  // Serves on a port obtained from bind_any_port. Blocking.
  bool serve_bound();
  void stop();
  bool running() const;

 private:
  void install_routes();

  std::shared_ptr<Gateway> gateway_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace tellerflow
