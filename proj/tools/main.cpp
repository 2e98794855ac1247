// tellerflow: offline evaluation, knowledge ingest and the HTTP gateway.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>

#include "tellerflow/config.h"
#include "tellerflow/errors.h"
#include "tellerflow/eval_harness.h"
#include "tellerflow/faq_agent.h"
#include "tellerflow/http_server.h"
#include "tellerflow/runtime.h"
#include "tellerflow/session_gateway.h"

namespace tf = tellerflow;

namespace {

constexpr int kExitGateFailed = 1;
constexpr int kExitError = 2;

std::string default_config() {
  return (std::filesystem::path(tf::default_data_dir()) / "config.json").string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tf::Error(tf::ErrorCode::kFileUnreadable, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct EvalArgs {
  std::string suite;
  std::string config = default_config();
  std::string format = "table";
  std::string rubric;
  std::string out;
  std::size_t workers = 0;
};

int run_eval(const EvalArgs& args) {
  auto format = tf::eval::parse_report_format(args.format);
  if (!format) {
    std::cerr << "unknown format " << args.format << "\n";
    return kExitError;
  }
  tf::AppConfig config = tf::load_config(args.config);
  if (args.workers) config.eval_workers = args.workers;
  tf::eval::Rubric rubric;
  if (!args.rubric.empty()) rubric = tf::eval::load_rubric(args.rubric);

  tf::eval::Suite suite = tf::eval::load_suite(args.suite);
  for (const auto& issue : suite.issues) {
    std::cerr << args.suite << ":" << issue.line << ": skipped: " << issue.reason << "\n";
  }
  if (suite.cases.empty()) {
    std::cerr << "no valid cases in " << args.suite << "\n";
    return kExitError;
  }

  tf::eval::EvalReport report = tf::eval::run_suite(suite.cases, config, rubric);
  std::string text = tf::eval::emit_report(report, *format);
  if (args.out.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << "\n";
  } else {
    std::ofstream(args.out) << text << "\n";
  }
  if (!report.gate.passed) {
    std::cerr << "hallucination gate failed: transactional error rate "
              << report.gate.transactional_error_rate << ", FAQ error rate "
              << report.gate.faq_error_rate << "\n";
    return kExitGateFailed;
  }
  return 0;
}

struct IngestArgs {
  std::string file;
  std::string server;
  std::string token;
};

int run_ingest(const IngestArgs& args) {
  std::string body = slurp(args.file);
  auto docs = tf::parse_knowledge_jsonl(body);
  if (args.server.empty()) {
    std::cout << args.file << ": " << docs.size() << " documents OK\n";
    return 0;
  }
  httplib::Client client(args.server);
  std::string token = args.token;
  if (token.empty()) {
    if (const char* env = std::getenv("TELLERFLOW_ADMIN_TOKEN")) token = env;
  }
  httplib::Headers headers{{"Authorization", "Bearer " + token}};
  auto res = client.Post("/admin/knowledge", headers, body, "application/x-ndjson");
  if (!res) {
    std::cerr << "cannot reach " << args.server << "\n";
    return kExitError;
  }
  std::cout << res->body << "\n";
  return res->status == 200 ? 0 : kExitError;
}

struct ServeArgs {
  std::string config = default_config();
  std::string host = "127.0.0.1";
  int port = 8080;
  bool dev = false;
};

tf::HttpGateway* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int run_serve(const ServeArgs& args) {
  tf::AppConfig config = tf::load_config(args.config);
  if (args.dev) config.dev_mode = true;
  auto gateway = std::make_shared<tf::Gateway>(tf::build_runtime(config));
  tf::HttpGateway server(gateway);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  std::atomic<bool> done{false};
  std::thread reaper([&] {
    while (!done) {
      std::this_thread::sleep_for(std::chrono::seconds(5));
      gateway->expire_idle();
    }
  });
  std::cerr << "listening on http://" << args.host << ":" << args.port << "\n";
  bool ok = server.listen(args.host, args.port);
  done = true;
  reaper.join();
  g_server = nullptr;
  if (!ok) {
    std::cerr << "cannot listen on " << args.host << ":" << args.port << "\n";
    return kExitError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tellerflow: conversational banking pipeline"};
  app.require_subcommand(1);

  auto* eval = app.add_subcommand("eval", "Offline evaluation");
  eval->require_subcommand(1);
  EvalArgs eval_args;
  auto* eval_run = eval->add_subcommand("run", "Run a test suite and print the report");
  eval_run->add_option("--suite", eval_args.suite, "Suite file (JSON Lines or JSON array)")
      ->required()
      ->check(CLI::ExistingFile);
  eval_run->add_option("--config", eval_args.config, "Pipeline config")->check(CLI::ExistingFile);
  eval_run->add_option("--format", eval_args.format, "json | table | radarData")
      ->check(CLI::IsMember({"json", "table", "radarData"}));
  eval_run->add_option("--rubric", eval_args.rubric, "Human rubric scores")->check(CLI::ExistingFile);
  eval_run->add_option("--out", eval_args.out, "Write the report here instead of stdout");
  eval_run->add_option("--workers", eval_args.workers, "Concurrent cases (overrides config)");

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "Validate a knowledge file, optionally pushing it to a gateway");
  ingest->add_option("file", ingest_args.file, "Knowledge JSON Lines")->required()->check(CLI::ExistingFile);
  ingest->add_option("--server", ingest_args.server, "Gateway base URL, e.g. http://127.0.0.1:8080");
  ingest->add_option("--token", ingest_args.token, "Admin token (default $TELLERFLOW_ADMIN_TOKEN)");

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Run the HTTP gateway");
  serve->add_option("--config", serve_args.config, "Pipeline config")->check(CLI::ExistingFile);
  serve->add_option("--host", serve_args.host);
  serve->add_option("--port", serve_args.port);
  serve->add_flag("--dev", serve_args.dev, "Expose the simulated second-factor code endpoint");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eval_run) return run_eval(eval_args);
    if (*ingest) return run_ingest(ingest_args);
    if (*serve) return run_serve(serve_args);
  } catch (const tf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
