#include "tellerflow/http_server.h"

#include <openssl/evp.h>

#include "httplib.h"
#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"

namespace tellerflow {

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInputRejected:
    case ErrorCode::kParseError:
    case ErrorCode::kEmptyText:
      return 400;
    case ErrorCode::kAuthFailure: return 401;
    case ErrorCode::kTwoFaRequired: return 403;
    case ErrorCode::kUnknownSession:
    case ErrorCode::kUnknownTransaction:
    case ErrorCode::kUnknownAccount:
      return 404;
    case ErrorCode::kPipelineBusy:
    case ErrorCode::kInvalidState:
      return 409;
    case ErrorCode::kStaleEdit:
    case ErrorCode::kInsufficientFunds:
    case ErrorCode::kLimitExceeded:
    case ErrorCode::kAmlFlagged:
    case ErrorCode::kSchemaViolation:
      return 422;
    case ErrorCode::kBackendUnavailable:
    case ErrorCode::kAgentFailure:
    case ErrorCode::kOcrUnavailable:
      return 503;
    default: return 500;
  }
}

namespace {

using httplib::Request;
using httplib::Response;

void send_json(Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(write_canonical_json(body), "application/json");
}

void send_error(Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, Json{{"error", std::string(code)}, {"message", message}});
}

Json body_json(const Request& req) {
  if (req.body.empty()) return Json::object();
  Json j = Json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kInputRejected, "request body must be a JSON object");
  }
  return j;
}

std::string base64_decode(const std::string& in) {
  if (in.empty()) return {};
  std::string out(3 * ((in.size() + 3) / 4), '\0');
  int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(in.data()), static_cast<int>(in.size()));
  if (n < 0) return {};
  std::size_t pad = 0;
  if (in.size() >= 1 && in.back() == '=') ++pad;
  if (in.size() >= 2 && in[in.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

Json preview_json(const std::optional<TransactionPreview>& preview) {
  if (!preview) return nullptr;
  Json j = to_json(AgentOutput{preview->request});
  j["actions"] = preview->actions;
  return j;
}

std::string admin_token(const Request& req) {
  std::string auth = req.get_header_value("Authorization");
  const std::string bearer = "Bearer ";
  if (auth.rfind(bearer, 0) == 0) return auth.substr(bearer.size());
  return req.get_header_value("X-Admin-Token");
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const Request& req, Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, http_status_for(e.code()), error_code_name(e.code()), e.what());
    } catch (const Json::exception& e) {
      send_error(res, 400, "InputRejected", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  };
}

}  // namespace

HttpGateway::HttpGateway(std::shared_ptr<Gateway> gateway)
    : gateway_(std::move(gateway)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpGateway::~HttpGateway() { stop(); }

void HttpGateway::install_routes() {
  auto& s = *server_;
  auto gw = gateway_;

  s.Get("/healthz", [](const Request&, Response& res) { send_json(res, 200, Json{{"status", "ok"}}); });

  s.Post("/sessions", guarded([gw](const Request& req, Response& res) {
    Json body = body_json(req);
    std::string account = body.value("accountId", "");
    if (account.empty()) throw Error(ErrorCode::kInputRejected, "accountId is required");
    send_json(res, 201, Json{{"sessionId", gw->open_session(account)}});
  }));

  s.Get(R"(/sessions/([^/]+))", guarded([gw](const Request& req, Response& res) {
    auto view = gw->view(req.matches[1]);
    if (!view) throw Error(ErrorCode::kUnknownSession, "unknown session");
    Json history = Json::array();
    for (const auto& t : view->history) {
      history.push_back({{"role", t.role == Role::kUser ? "user" : "assistant"}, {"text", t.text}});
    }
    send_json(res, 200, Json{{"sessionId", view->session_id},
                             {"accountId", view->account_id},
                             {"history", std::move(history)},
                             {"transaction", preview_json(view->preview)}});
  }));

  s.Delete(R"(/sessions/([^/]+))", guarded([gw](const Request& req, Response& res) {
    gw->close_session(req.matches[1]);
    res.status = 204;
  }));

  s.Post(R"(/sessions/([^/]+)/messages)", guarded([gw](const Request& req, Response& res) {
    Json body = body_json(req);
    std::string text = body.value("text", "");
    std::vector<AttachmentRef> attachments;
    const Json uploads = body.value("attachments", Json::array());
    if (!uploads.is_array()) throw Error(ErrorCode::kInputRejected, "attachments must be an array");
    for (const auto& a : uploads) {
      attachments.push_back({a.at("id").get<std::string>(), base64_decode(a.value("contentBase64", ""))});
    }
    MessageReply reply = gw->post_message(req.matches[1], text, attachments);
    Json trace = Json::array();
    for (Stage st : reply.stage_trace) trace.push_back(std::string(stage_name(st)));
    send_json(res, 200, Json{{"sessionId", reply.session_id},
                             {"reply", reply.reply},
                             {"stageTrace", std::move(trace)},
                             {"clarification", reply.clarification},
                             {"failed", reply.failed},
                             {"transaction", preview_json(reply.preview)}});
  }));

  s.Post(R"(/sessions/([^/]+)/transactions/([^/]+)/decision)",
         guarded([gw](const Request& req, Response& res) {
           Json body = body_json(req);
           auto kind = parse_decision_kind(body.value("decision", ""));
           if (!kind) throw Error(ErrorCode::kInputRejected, "decision must be approve, decline or edit");
           std::map<std::string, std::string> fields;
           const Json edits = body.value("fields", Json::object());
           if (!edits.is_object()) throw Error(ErrorCode::kInputRejected, "fields must be an object");
           for (const auto& [k, v] : edits.items()) {
             fields[k] = v.is_string() ? v.get<std::string>() : v.dump();
           }
           std::optional<std::string> code;
           if (body.contains("secondFactor") && body["secondFactor"].is_string()) {
             code = body["secondFactor"].get<std::string>();
           }
           DecisionResult r = gw->post_decision(req.matches[1], req.matches[2], *kind, fields, code);
           Json out{{"txId", r.tx_id},
                    {"state", std::string(tx_state_name(r.state))},
                    {"reason", r.reason.empty() ? Json(nullptr) : Json(r.reason)},
                    {"requires2FA", r.requires_2fa},
                    {"message", r.message},
                    {"transaction", preview_json(r.preview)},
                    {"balance", r.balance ? Json(r.balance->to_decimal_string()) : Json(nullptr)}};
           send_json(res, 200, out);
         }));

  s.Post("/admin/guardrails/reload", guarded([gw](const Request& req, Response& res) {
    std::int64_t version = req.body.empty() ? gw->admin_reload_blocklist(admin_token(req))
                                            : gw->admin_reload_blocklist(admin_token(req), req.body);
    send_json(res, 200, Json{{"version", version}});
  }));

  s.Post("/admin/knowledge", guarded([gw](const Request& req, Response& res) {
    send_json(res, 200, Json{{"version", gw->admin_ingest_knowledge(admin_token(req), req.body)}});
  }));

  s.Get("/admin/transactions", guarded([gw](const Request& req, Response& res) {
    res.status = 200;
    res.set_content(gw->admin_export_transactions(admin_token(req)), "application/x-ndjson");
  }));

  s.Get(R"(/dev/sessions/([^/]+)/code)", guarded([gw](const Request& req, Response& res) {
    if (!gw->dev_mode()) {
      send_error(res, 404, "NotFound", "not found");
      return;
    }
    auto code = gw->dev_peek_code(req.matches[1]);
    if (!code) throw Error(ErrorCode::kUnknownSession, "no code issued for this session");
    send_json(res, 200, Json{{"code", *code}});
  }));
}

bool HttpGateway::listen(const std::string& host, int port) { return server_->listen(host, port); }

int HttpGateway::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool HttpGateway::serve_bound() { return server_->listen_after_bind(); }

void HttpGateway::stop() {
  if (server_) server_->stop();
}

bool HttpGateway::running() const { return server_->is_running(); }

}  // namespace tellerflow
