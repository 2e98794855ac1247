#include "tellerflow/runtime.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"
#include "tellerflow/fixture_backend.h"
#include "tellerflow/http_backend.h"
#include "tellerflow/inquiry.h"

namespace tellerflow {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::map<std::string, ViolationCategory> load_image_flags(const std::string& path) {
  Json doc = Json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kConfigError, "image flags must be a JSON object");
  }
  std::map<std::string, ViolationCategory> out;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    auto category = parse_violation(it.value().get<std::string>());
    if (!category) throw Error(ErrorCode::kConfigError, "unknown category for image " + it.key());
    out[it.key()] = *category;
  }
  return out;
}

}  // namespace

std::shared_ptr<Runtime> build_runtime(const AppConfig& config,
                                       std::shared_ptr<ModelBackend> backend_override,
                                       Bank::ClockFn clock) {
  auto rt = std::make_shared<Runtime>();
  rt->config = config;

  if (backend_override) {
    rt->backend = std::move(backend_override);
  } else if (config.backend == BackendKind::kHttpChatCompletion) {
    rt->backend = std::make_shared<HttpChatBackend>(config.http);
  } else {
    auto fixture = std::make_shared<FixtureBackend>();
    if (!config.fixture_table_path.empty()) fixture->load_table_file(config.resolve(config.fixture_table_path));
    rt->backend = fixture;
  }

  rt->adapters = AdapterRegistry::load_file(config.resolve(config.adapters_path));
  rt->audit = config.audit_path.empty() ? std::make_shared<AuditLog>()
                                        : std::make_shared<AuditLog>(config.resolve(config.audit_path));

  rt->blocklist = std::make_shared<BlocklistStore>();
  if (!config.blocklist_path.empty()) {
    rt->blocklist = std::make_shared<BlocklistStore>(
        parse_blocklist(read_file(config.resolve(config.blocklist_path))));
  }
  rt->moderator = config.image_flags_path.empty()
                      ? std::make_shared<FixtureImageModerator>()
                      : std::make_shared<FixtureImageModerator>(
                            load_image_flags(config.resolve(config.image_flags_path)));

  rt->directory = std::make_shared<BankDirectory>(BankDirectory::load_file(config.resolve(config.banks_path)));
  rt->identifier_rules = std::make_shared<IdentifierRules>(
      config.identifier_rules_path.empty()
          ? IdentifierRules::defaults()
          : IdentifierRules::parse(read_file(config.resolve(config.identifier_rules_path))));
  rt->ocr = config.ocr_fixtures_path.empty()
                ? std::make_shared<FixtureOcr>()
                : std::make_shared<FixtureOcr>(FixtureOcr::load_file(config.resolve(config.ocr_fixtures_path)));

  BankConfig bank_config = config.bank;
  if (!config.aml_path.empty()) bank_config.aml = AmlList::load_file(config.resolve(config.aml_path));
  std::vector<Account> accounts;
  if (!config.accounts_path.empty()) accounts = Bank::load_seed_file(config.resolve(config.accounts_path));
  rt->bank = std::make_shared<Bank>(std::move(accounts), bank_config, rt->audit, std::move(clock));
  rt->bank->set_edit_validator(
      [directory = rt->directory, rules = rt->identifier_rules](const TransferDraft& d)
          -> std::optional<std::string> {
        CompletionState state = validate_draft(d, *directory, *rules);
        if (std::holds_alternative<ReadyForConfirmation>(state)) return std::nullopt;
        if (auto* invalid = std::get_if<Invalid>(&state)) {
          const auto& [field, error] = *invalid->field_errors.begin();
          return field + ": " + error;
        }
        return "edited draft is " + completion_state_label(state);
      });

  rt->knowledge = std::make_shared<VectorStore>(std::make_shared<HashedNgramEmbedder>(config.embedding_dim));
  if (!config.knowledge_path.empty() && std::filesystem::exists(config.resolve(config.knowledge_path))) {
    rt->knowledge->ingest_file(config.resolve(config.knowledge_path));
  }

  rt->guardrails = std::make_shared<Guardrails>(rt->backend, rt->adapters.get(AgentName::kGuardrails),
                                                rt->blocklist, rt->moderator);
  rt->intent = std::make_shared<IntentClassifier>(rt->backend, rt->adapters.get(AgentName::kIntent));
  rt->payment = std::make_shared<PaymentAgent>(rt->backend, rt->adapters.get(AgentName::kPayment),
                                               rt->directory, rt->identifier_rules, rt->ocr, rt->bank);
  rt->faq = std::make_shared<FaqAgent>(rt->backend, rt->adapters.get(AgentName::kFaq), rt->knowledge,
                                       config.faq);

  auto router = std::make_shared<ActionRouter>();
  router->register_handler(IntentCategory::kPayment, rt->payment);
  router->register_handler(IntentCategory::kFaq, rt->faq);
  router->register_handler(IntentCategory::kAccountInquiry, std::make_shared<AccountInquiryHandler>(rt->bank));
  router->register_handler(IntentCategory::kHistoryInquiry, std::make_shared<HistoryInquiryHandler>(rt->bank));
  router->register_handler(IntentCategory::kInsight, std::make_shared<InsightHandler>(rt->bank));
  router->register_handler(IntentCategory::kChat, std::make_shared<ChatResponder>());
  router->assert_total();

  rt->registry = AgentRegistry{rt->guardrails, rt->intent, router};
  return rt;
}

}  // namespace tellerflow
