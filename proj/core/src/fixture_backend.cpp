#include "tellerflow/fixture_backend.h"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "tellerflow/canonical.h"
#include "tellerflow/errors.h"
#include "tellerflow/text.h"

namespace tellerflow {

namespace {

const ChatTurn* latest_user_turn(const CompletionRequest& request) {
  for (auto it = request.conversation.rbegin(); it != request.conversation.rend(); ++it) {
    if (it->role == Role::kUser) return &*it;
  }
  return nullptr;
}

std::string latest_user_text(const CompletionRequest& request) {
  const ChatTurn* turn = latest_user_turn(request);
  return turn ? turn->text : std::string();
}

// Prior turns, i.e. the conversation without its final user turn.
std::vector<const ChatTurn*> prior_turns(const CompletionRequest& request) {
  std::vector<const ChatTurn*> out;
  for (const auto& t : request.conversation) out.push_back(&t);
  if (!out.empty() && out.back()->role == Role::kUser) out.pop_back();
  return out;
}

bool any_phrase(const std::string& normalized, std::initializer_list<std::string_view> phrases) {
  for (auto p : phrases) {
    if (text::contains_phrase(normalized, p)) return true;
  }
  return false;
}

bool any_word(const std::vector<std::string>& words, const std::set<std::string, std::less<>>& set) {
  return std::any_of(words.begin(), words.end(), [&](const std::string& w) { return set.count(w) > 0; });
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Prompt fragments

std::string render_bank_list_line(std::string_view bank_name,
                                  const std::vector<std::string>& aliases) {
  std::string line = "* bank: ";
  line += bank_name;
  if (!aliases.empty()) {
    line += "; aliases: ";
    line += text::join(aliases, ", ");
  }
  return line;
}

std::string render_knowledge_block(std::string_view doc_id, std::string_view title,
                                   std::string_view body) {
  std::string flat;
  for (char c : body) flat.push_back(c == '\n' || c == '\r' ? ' ' : c);
  std::string line = "[doc:";
  line += doc_id;
  line += "] ";
  line += title;
  line += " :: ";
  line += text::trim(flat);
  return line;
}

namespace fixture_rules {

// ---------------------------------------------------------------------------
// Guardrails

namespace {

struct CategoryRule {
  ViolationCategory category;
  std::vector<std::string_view> phrases;
};

const std::vector<CategoryRule>& guardrail_rules() {
  static const std::vector<CategoryRule> kRules = {
      {ViolationCategory::kCodeInterpreterAbuse,
       {"instructions given to you", "your instructions", "system prompt", "your prompt",
        "ignore previous instructions", "ignore all previous", "ignore your instructions",
        "reveal your", "developer mode", "jailbreak", "pretend you are", "bypass your",
        "your rules", "repeat the text above", "output format", "your guidelines",
        "abaikan arahan"}},
      {ViolationCategory::kViolentCrimes,
       {"bomb", "explosive", "explosives", "kill", "murder", "shoot", "weapon", "weapons", "gun",
        "terrorist", "terrorism", "assault", "stab", "poison someone", "hurt someone"}},
      {ViolationCategory::kNonViolentCrimes,
       {"launder", "laundering", "steal", "commit fraud", "forge", "counterfeit", "buy drugs",
        "sell drugs", "hack into", "evade tax", "money mule", "scam people", "scam someone"}},
      {ViolationCategory::kSexRelatedCrimes,
       {"porn", "pornography", "nude photos", "sexual services", "explicit sexual",
        "child sexual"}},
      {ViolationCategory::kDefamationMisinformationUnethical,
       {"fake news", "spread rumours", "spread rumors", "spread false", "defame",
        "fake review", "fake reviews", "cheat on"}},
      {ViolationCategory::kPrivacy,
       {"someone else's", "someone elses", "another customer", "other customers",
        "personal data of", "home address of", "ic number of", "nric of", "password of"}},
      {ViolationCategory::kControversialTopicsPolitics,
       {"election", "political party", "vote for", "prime minister", "opposition party",
        "politics"}},
      {ViolationCategory::kHate,
       {"racist", "racial slur", "fuck", "bastard", "stupid bot", "idiot", "inferior race",
        "hate all"}},
  };
  return kRules;
}

}  // namespace

std::string classify_guardrails(const CompletionRequest& request) {
  std::string normalized = text::normalize(latest_user_text(request));
  for (const auto& rule : guardrail_rules()) {
    for (auto phrase : rule.phrases) {
      if (text::contains_phrase(normalized, phrase)) {
        return write_canonical_json(
            Json{{"isSafe", false},
                 {"guardrailViolation", std::string(violation_label(rule.category))},
                 {"message", "I'm sorry, but I can't help with that request."}});
      }
    }
  }
  return R"({"guardrailViolation":null,"isSafe":true,"message":null})";
}

// ---------------------------------------------------------------------------
// Intent

namespace {

const std::set<std::string, std::less<>> kPaymentVerbs = {
    "transfer", "transfers", "tsfr", "trf", "xfer", "tf", "transfr", "send", "pay", "bayar",
    "hantar", "remit", "duitnow", "pindah"};

const std::set<std::string, std::less<>> kInterrogatives = {
    "what", "whats", "how", "can", "is", "are", "does", "do", "why", "when", "where", "which",
    "will", "should", "could", "may", "apa", "bagaimana", "boleh"};

const std::set<std::string, std::less<>> kFaqTopics = {
    "limit", "limits", "fee", "fees", "charge", "charges", "rate", "rates", "interest",
    "favorite", "favourite", "favorites", "favourites", "transferee", "transferees", "maximum",
    "minimum", "card", "cards", "eligible", "eligibility", "documents", "hours", "support",
    "secure", "security", "apply", "savings", "deposit", "insurance", "loan", "loans", "promo",
    "promotion", "cashback", "dividend", "processing", "otp", "pin"};

const std::set<std::string, std::less<>> kSelectionWords = {
    "first", "second", "third", "last", "one", "1", "2", "3", "pertama", "kedua"};

bool is_question(const std::string& normalized, const std::vector<std::string>& words) {
  if (!normalized.empty() && normalized.back() == '?') return true;
  return !words.empty() && kInterrogatives.count(words.front()) > 0;
}

bool mentions_amount(std::string_view raw) {
  static const std::regex kAmount(R"((?:\bRM\s*\d)|(?:\b\d+(?:\.\d{1,2})?\b))", std::regex::icase);
  return std::regex_search(raw.begin(), raw.end(), kAmount);
}

bool assistant_in_payment_flow(const std::string& normalized) {
  return any_phrase(normalized, {"transfer", "bank account", "how much", "which transfer",
                                 "account number", "amount", "confirm", "recipient",
                                 "bank name", "who would you like"});
}

IntentResult decide_intent(const std::string& raw, const std::vector<const ChatTurn*>& prior) {
  std::string n = text::normalize(raw);
  auto w = text::words(raw);
  IntentResult result;
  result.clarification_needed = false;

  auto set = [&](IntentCategory c) {
    result.intent = c;
    return result;
  };

  if (any_phrase(n, {"hi", "hello", "hey", "thanks", "thank you", "good morning",
                     "good afternoon", "good evening", "bye", "how are you", "weather", "joke",
                     "who are you", "terima kasih"}) &&
      !any_word(w, kPaymentVerbs)) {
    bool only_chat = w.size() <= 6 || any_phrase(n, {"weather", "joke"});
    if (only_chat) return set(IntentCategory::kChat);
  }
  if (any_phrase(n, {"transaction history", "past transactions", "recent transactions",
                     "my transactions", "last transactions", "statement", "transfer history",
                     "payment history", "sejarah transaksi", "what did i pay",
                     "my recent transfers", "my past transfers", "last transfer"})) {
    return set(IntentCategory::kHistoryInquiry);
  }
  bool self = any_word(w, {"my", "i", "me", "saya"});
  if (self && any_phrase(n, {"spending", "spend", "spent", "insight", "insights", "analytics",
                             "savings pattern", "where did my money go", "budget",
                             "perbelanjaan"})) {
    return set(IntentCategory::kInsight);
  }
  if ((any_phrase(n, {"my balance", "account balance", "check balance", "baki", "my account number",
                      "account details", "account status", "how much money do i have",
                      "how much do i have", "balance"}) &&
       (self || any_phrase(n, {"check", "show", "view"}))) &&
      !any_phrase(n, {"minimum", "maintain"})) {
    return set(IntentCategory::kAccountInquiry);
  }

  bool question = is_question(n, w);
  bool amount = mentions_amount(raw);
  if (any_word(w, kPaymentVerbs)) {
    if (question && !amount) return set(IntentCategory::kFaq);
    return set(IntentCategory::kPayment);
  }
  if (question && w.size() >= 2) return set(IntentCategory::kFaq);
  if (any_word(w, kFaqTopics) && w.size() >= 2 && !amount) return set(IntentCategory::kFaq);

  // Short follow-ups lean on the last assistant turn.
  const ChatTurn* last_assistant = nullptr;
  for (auto it = prior.rbegin(); it != prior.rend(); ++it) {
    if ((*it)->role == Role::kAssistant) {
      last_assistant = *it;
      break;
    }
  }
  if (last_assistant && assistant_in_payment_flow(text::normalize(last_assistant->text))) {
    static const std::regex kDigits(R"(\d{4,})");
    bool detail = amount || std::regex_search(raw, kDigits) || any_word(w, kSelectionWords) ||
                  any_phrase(n, {"bank", "account", "acc", "yes", "ok", "okay", "correct"});
    if (detail || w.size() <= 6) return set(IntentCategory::kPayment);
  }

  result.intent = IntentCategory::kChat;
  result.clarification_needed = true;
  result.message =
      "Could you clarify what you would like to do? For example, make a transfer, check your "
      "balance or ask about our services.";
  return result;
}

}  // namespace

std::string classify_intent(const CompletionRequest& request) {
  IntentResult r = decide_intent(latest_user_text(request), prior_turns(request));
  return write_canonical_json(to_json(AgentOutput{r}));
}

// ---------------------------------------------------------------------------
// Payment extraction

namespace {

struct BankMention {
  std::string name;
  std::vector<std::string> aliases;
};

std::vector<BankMention> parse_bank_list(const std::string& prompt) {
  static const std::regex kLine(R"(^\* bank: ([^;\n]+?)(?:; aliases: ([^\n]*))?$)",
                                std::regex::multiline);
  std::vector<BankMention> banks;
  for (std::sregex_iterator it(prompt.begin(), prompt.end(), kLine), end; it != end; ++it) {
    BankMention b;
    b.name = text::trim((*it)[1].str());
    std::string aliases = (*it)[2].str();
    std::stringstream ss(aliases);
    std::string alias;
    while (std::getline(ss, alias, ',')) {
      alias = text::trim(alias);
      if (!alias.empty()) b.aliases.push_back(alias);
    }
    banks.push_back(std::move(b));
  }
  return banks;
}

struct Span {
  std::size_t begin;
  std::size_t end;
  bool overlaps(const Span& o) const { return begin < o.end && o.begin < end; }
};

struct Partial {
  std::optional<std::string> recipient;
  std::optional<std::string> bank;
  std::optional<std::string> account;
  std::vector<Money> amounts;
  std::optional<std::string> reference;
  bool payment_verb = false;
};

// Case-insensitive, word-bounded search for `needle` in `hay`.
std::optional<std::size_t> find_word_ci(const std::string& hay, const std::string& needle) {
  std::string h = text::to_lower(hay);
  std::string n = text::to_lower(needle);
  std::size_t pos = 0;
  auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  while ((pos = h.find(n, pos)) != std::string::npos) {
    bool left = pos == 0 || !word(h[pos - 1]);
    std::size_t e = pos + n.size();
    bool right = e >= h.size() || !word(h[e]);
    if (left && right) return pos;
    ++pos;
  }
  return std::nullopt;
}

const std::set<std::string, std::less<>> kNameStop = {
    "Bank", "RM", "My", "Me", "Him", "Her", "The", "Account", "I", "Acc", "You", "Them", "Us",
    "A", "An", "This", "That", "It", "Transfer", "Pay", "Send", "DuitNow", "Ringgit"};

const std::set<std::string, std::less<>> kReferenceStop = {
    "a", "an", "me", "you", "him", "her", "them", "us", "it", "this", "that", "the", "my",
    "our", "your", "his", "their", "transfer", "transfers", "payment", "now", "today", "bank",
    "account", "acc", "which", "what", "how"};

const std::set<std::string, std::less<>> kReferenceBreak = {
    "to", "at", "and", "via", "from", "with", "in", "on", "using", "by", "account", "acc"};

Partial extract_partial(const std::string& msg, const std::vector<BankMention>& banks) {
  Partial p;
  std::vector<Span> taken;
  auto w = text::words(msg);
  p.payment_verb = any_word(w, kPaymentVerbs);

  // Labelled lines, as found in receipts and OCR transcriptions.
  static const std::regex kLabelled(
      R"((?:^|\n)\s*(recipient|beneficiary|payee|to|bank|account(?: no\.?| number)?|acc(?:ount)? no\.?|amount|total|reference|ref|description|remark)\s*[:\-]\s*([^\n]+))",
      std::regex::icase);
  std::string body = msg;
  for (std::sregex_iterator it(msg.begin(), msg.end(), kLabelled), end; it != end; ++it) {
    std::string key = text::to_lower((*it)[1].str());
    std::string value = text::trim((*it)[2].str());
    if (key == "recipient" || key == "beneficiary" || key == "payee" || key == "to") {
      p.recipient = value;
    } else if (key == "amount" || key == "total") {
      if (auto m = Money::parse(value)) p.amounts.push_back(*m);
    } else if (key == "reference" || key == "ref" || key == "description" || key == "remark") {
      p.reference = value;
    } else if (key == "bank") {
      p.bank = value;
    } else {
      static const std::regex kBusinessValue(R"(^\s*(\d{5,8}-[A-Z])\b)");
      std::smatch bm;
      std::string digits;
      if (std::regex_search(value, bm, kBusinessValue)) {
        digits = bm[1].str();
      } else {
        for (char c : value) {
          if (std::isalnum(static_cast<unsigned char>(c))) digits.push_back(c);
        }
      }
      if (!digits.empty()) p.account = digits;
    }
    auto pos = static_cast<std::size_t>(it->position(0));
    taken.push_back({pos, pos + static_cast<std::size_t>(it->length(0))});
  }

  // Known banks by name or alias; earliest mention wins.
  std::optional<std::size_t> best_pos;
  for (const auto& b : banks) {
    std::vector<std::string> names = b.aliases;
    names.insert(names.begin(), b.name);
    for (const auto& n : names) {
      auto pos = find_word_ci(msg, n);
      if (pos && (!best_pos || *pos < *best_pos)) {
        best_pos = pos;
        if (!p.bank || taken.empty()) p.bank = b.name;
        taken.push_back({*pos, *pos + n.size()});
      }
    }
  }
  if (!best_pos && !p.bank) {
    static const std::regex kUnknownBank(R"(\b(Bank\s+[A-Z][A-Za-z]*|[A-Z][A-Za-z]+\s+Bank)\b)");
    std::smatch m;
    if (std::regex_search(msg, m, kUnknownBank)) {
      p.bank = m[1].str();
      auto pos = static_cast<std::size_t>(m.position(1));
      taken.push_back({pos, pos + static_cast<std::size_t>(m.length(1))});
    }
  }

  // Identifiers: long digit runs (dashes allowed), business registration ids.
  if (!p.account) {
    static const std::regex kBusiness(R"(\b(\d{5,8}-[A-Z])\b)");
    static const std::regex kDigits(R"((\+?\d[\d\-]{4,22}\d))");
    std::smatch m;
    if (std::regex_search(msg, m, kBusiness)) {
      p.account = m[1].str();
      auto pos = static_cast<std::size_t>(m.position(1));
      taken.push_back({pos, pos + static_cast<std::size_t>(m.length(1))});
    } else {
      for (std::sregex_iterator it(msg.begin(), msg.end(), kDigits), end; it != end; ++it) {
        std::string raw = (*it)[1].str();
        std::string digits;
        for (char c : raw) {
          if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
        }
        auto pos = static_cast<std::size_t>(it->position(1));
        bool after_rm = pos >= 2 && text::to_lower(msg.substr(pos >= 3 ? pos - 3 : 0, 3)).find("rm") != std::string::npos;
        if (digits.size() >= 6 && digits.size() <= 20 && !after_rm && raw.find('.') == std::string::npos) {
          p.account = digits;
          taken.push_back({pos, pos + raw.size()});
          break;
        }
      }
    }
  }

  // Amounts: RM-prefixed first; bare numbers only when nothing is prefixed.
  if (p.amounts.empty()) {
    static const std::regex kRm(R"(\bRM\s*(\d{1,3}(?:,\d{3})+(?:\.\d{1,2})?|\d+(?:\.\d{1,2})?)\b)",
                                std::regex::icase);
    static const std::regex kBare(R"((?:^|[^\w.,])(\d{1,3}(?:,\d{3})+(?:\.\d{1,2})?|\d{1,5}(?:\.\d{1,2})?)(?![\w\-]|[.,]\d))");
    std::vector<Span> rm_spans;
    for (std::sregex_iterator it(msg.begin(), msg.end(), kRm), end; it != end; ++it) {
      Span s{static_cast<std::size_t>(it->position(0)),
             static_cast<std::size_t>(it->position(0) + it->length(0))};
      if (std::any_of(taken.begin(), taken.end(), [&](const Span& t) { return t.overlaps(s); })) continue;
      if (auto m = Money::parse((*it)[1].str())) p.amounts.push_back(*m);
      rm_spans.push_back(s);
    }
    if (p.amounts.empty()) {
      for (std::sregex_iterator it(msg.begin(), msg.end(), kBare), end; it != end; ++it) {
        Span s{static_cast<std::size_t>(it->position(1)),
               static_cast<std::size_t>(it->position(1) + it->length(1))};
        if (std::any_of(taken.begin(), taken.end(), [&](const Span& t) { return t.overlaps(s); })) continue;
        if (auto m = Money::parse((*it)[1].str())) p.amounts.push_back(*m);
      }
    }
  }

  // Recipient after "to" / "pay" / "kepada".
  if (!p.recipient) {
    static const std::regex kTo(
        R"(\b(?:to|To|pay|Pay|kepada|Kepada|kat|send|Send)\s+([A-Z][a-zA-Z]+(?:\s+[A-Z][a-zA-Z]+)?))");
    for (std::sregex_iterator it(msg.begin(), msg.end(), kTo), end; it != end; ++it) {
      std::string cand = (*it)[1].str();
      std::string first = cand.substr(0, cand.find(' '));
      if (kNameStop.count(first)) continue;
      auto pos = static_cast<std::size_t>(it->position(1));
      Span s{pos, pos + cand.size()};
      if (std::any_of(taken.begin(), taken.end(), [&](const Span& t) { return t.overlaps(s); })) {
        // "to Bank ABC": a second capitalized word may be the bank.
        continue;
      }
      // Drop a trailing capitalized word that is actually a bank alias.
      auto space = cand.find(' ');
      if (space != std::string::npos) {
        std::string second = cand.substr(space + 1);
        if (kNameStop.count(second)) cand = first;
        for (const auto& b : banks) {
          for (const auto& a : b.aliases) {
            if (text::to_lower(a) == text::to_lower(second)) cand = first;
          }
        }
      }
      p.recipient = cand;
      break;
    }
  }

  // Chat screenshots: the other speaker is the likely payee.
  if (!p.recipient) {
    static const std::regex kSpeaker(R"((?:^|\n)\s*([A-Z][a-z]+):\s)");
    std::smatch m;
    if (std::regex_search(msg, m, kSpeaker) && !kNameStop.count(m[1].str()) && m[1].str() != "Me") {
      p.recipient = m[1].str();
    }
  }

  // Reference: explicit "ref"/"reference", else "for <purpose>".
  if (!p.reference) {
    static const std::regex kRef(R"(\b(?:ref|reference|remark|note)\s*[:\-]?\s*\"?([A-Za-z0-9][^\"\n.,;]*))",
                                 std::regex::icase);
    std::smatch m;
    if (std::regex_search(msg, m, kRef)) {
      p.reference = text::trim(m[1].str());
    } else {
      static const std::regex kFor(R"(\bfor\s+([A-Za-z]+(?:\s+[A-Za-z]+){0,3}))", std::regex::icase);
      for (std::sregex_iterator it(msg.begin(), msg.end(), kFor), end; it != end; ++it) {
        auto words = text::words((*it)[1].str());
        std::vector<std::string> kept;
        std::size_t i = 0;
        while (i < words.size() && (words[i] == "the" || words[i] == "my" || words[i] == "our")) ++i;
        for (; i < words.size() && kept.size() < 2; ++i) {
          if (kReferenceBreak.count(words[i])) break;
          kept.push_back(words[i]);
        }
        if (kept.empty() || kReferenceStop.count(kept.front())) continue;
        p.reference = capitalize(text::join(kept, " "));
        break;
      }
    }
  }
  return p;
}

// Splits "send 50 to Ali and 60 to Siti" into per-transfer segments.
std::vector<std::string> split_transfers(const std::string& msg) {
  static const std::regex kSep(R"(\s+and\s+|\s*;\s*|\s+then\s+|\s*,\s+(?=(?:RM|\d)))",
                               std::regex::icase);
  std::vector<std::string> parts;
  std::sregex_token_iterator it(msg.begin(), msg.end(), kSep, -1), end;
  for (; it != end; ++it) {
    std::string part = text::trim(it->str());
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

TransferDraft to_draft(const Partial& p) {
  TransferDraft d;
  d.recipient_name = p.recipient;
  d.bank_name = p.bank;
  d.account_number = p.account;
  if (p.amounts.size() == 1) d.amount = p.amounts.front();
  if (p.reference) d.reference = *p.reference;
  return d;
}

void merge_into(TransferDraft& d, const Partial& p) {
  if (p.recipient) d.recipient_name = p.recipient;
  if (p.bank) d.bank_name = p.bank;
  if (p.account) d.account_number = p.account;
  if (p.amounts.size() == 1) {
    d.amount = p.amounts.front();
  } else if (p.amounts.size() > 1) {
    d.amount.reset();
  }
  if (p.reference) d.reference = *p.reference;
}

// Multi-transfer request: each segment names its own amount and recipient.
std::vector<TransferDraft> multi_drafts(const std::string& msg, const std::vector<BankMention>& banks) {
  auto segments = split_transfers(msg);
  if (segments.size() < 2) return {};
  std::vector<TransferDraft> drafts;
  for (const auto& seg : segments) {
    Partial p = extract_partial(seg, banks);
    if (p.amounts.size() != 1 || !p.recipient) return {};
    drafts.push_back(to_draft(p));
  }
  return drafts;
}

std::optional<std::size_t> pick(const std::string& reply, const std::vector<TransferDraft>& choices) {
  std::string n = text::normalize(reply);
  auto w = text::words(reply);
  auto has = [&](std::string_view x) { return std::find(w.begin(), w.end(), x) != w.end(); };
  if (has("first") || has("1") || has("pertama")) return 0;
  if ((has("second") || has("2") || has("kedua")) && choices.size() >= 2) return 1;
  if ((has("third") || has("3")) && choices.size() >= 3) return 2;
  if (has("last")) return choices.size() - 1;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (choices[i].recipient_name &&
        text::contains_phrase(n, text::normalize(*choices[i].recipient_name))) {
      return i;
    }
  }
  return std::nullopt;
}

std::string payment_message(const std::vector<TransferDraft>& drafts) {
  if (drafts.size() > 1) {
    std::string msg = "I can only process one transfer at a time. Which transfer would you like to process first?";
    return msg;
  }
  if (drafts.empty()) return "Who would you like to transfer money to, and how much?";
  const TransferDraft& d = drafts.front();
  if (d.complete()) {
    return "Please confirm the transfer of " + d.amount->to_display_string() + " to " +
           *d.recipient_name + " (" + *d.bank_name + ", " + *d.account_number + ").";
  }
  if (!d.recipient_name) {
    return "Who would you like to transfer the money to?";
  }
  if (!d.bank_name || !d.account_number) {
    return "Could you provide the bank account details of " + *d.recipient_name + "?";
  }
  return "Got it. How much would you like to transfer?";
}

}  // namespace

std::string extract_payment(const CompletionRequest& request) {
  auto banks = parse_bank_list(request.system_prompt);
  std::vector<std::string> user_msgs;
  for (const auto& t : request.conversation) {
    if (t.role == Role::kUser) user_msgs.push_back(t.text);
  }
  // The current payment flow starts at the latest user turn with a payment
  // verb; earlier turns belong to finished conversations.
  std::size_t start = 0;
  for (std::size_t i = user_msgs.size(); i-- > 0;) {
    if (extract_partial(user_msgs[i], banks).payment_verb) {
      start = i;
      break;
    }
  }

  std::vector<TransferDraft> drafts;
  bool have_draft = false;
  TransferDraft draft;
  for (std::size_t i = start; i < user_msgs.size(); ++i) {
    const std::string& msg = user_msgs[i];
    if (auto multi = multi_drafts(msg, banks); !multi.empty()) {
      drafts = std::move(multi);
      have_draft = false;
      continue;
    }
    if (drafts.size() > 1) {
      if (auto choice = pick(msg, drafts)) {
        draft = drafts[*choice];
        have_draft = true;
        drafts.clear();
        continue;
      }
    }
    Partial p = extract_partial(msg, banks);
    bool any = p.recipient || p.bank || p.account || !p.amounts.empty() || p.reference;
    if (any || p.payment_verb) {
      drafts.clear();
      merge_into(draft, p);
      have_draft = have_draft || any;
    }
  }

  Json transfers = Json::array();
  std::vector<TransferDraft> out;
  if (drafts.size() > 1) {
    out = drafts;
  } else if (have_draft) {
    out.push_back(draft);
  }
  for (const auto& d : out) {
    Json j = to_json(d);
    j["amount"] = d.amount ? Json(static_cast<double>(d.amount->minor()) / 100.0) : Json(nullptr);
    transfers.push_back(std::move(j));
  }
  Json reply{{"transfers", std::move(transfers)}, {"message", payment_message(out)}};
  return reply.dump();
}

// ---------------------------------------------------------------------------
// FAQ

namespace {

std::optional<std::string> topic_of(const std::string& question) {
  static const std::regex kTopic(
      R"(\b(?:add|adding|set up|setup|change|use|using|open|opening|apply for|get|remove|delete|save|saving|activate|about|manage|edit)\s+(?:a\s+|an\s+|the\s+|my\s+|more\s+)?([A-Za-z][A-Za-z\- ]*[A-Za-z]))",
      std::regex::icase);
  std::smatch m;
  if (!std::regex_search(question, m, kTopic)) return std::nullopt;
  // Cut the phrase at the first function word.
  static const std::set<std::string, std::less<>> kCut = {
      "to", "in", "on", "for", "with", "from", "at", "and", "or", "if", "via", "using", "can", "is", "do"};
  std::vector<std::string> kept;
  std::stringstream ss(m[1].str());
  std::string word;
  while (ss >> word) {
    if (kCut.count(text::to_lower(word))) break;
    kept.push_back(word);
  }
  if (kept.empty()) return std::nullopt;
  return text::join(kept, " ");
}

}  // namespace

std::string reformulate_faq(const CompletionRequest& request) {
  std::string query = text::trim(latest_user_text(request));
  auto prior = prior_turns(request);
  std::optional<std::string> topic;
  for (auto it = prior.rbegin(); it != prior.rend() && !topic; ++it) {
    if ((*it)->role == Role::kUser) topic = topic_of((*it)->text);
  }
  if (topic) {
    static const std::regex kHowMany(R"(^(\s*how\s+(?:many|much))\s+(?=(?:can|do|does|should|is|are|will|could)\b))",
                                     std::regex::icase);
    static const std::regex kPronoun(R"(\b(it|them|that|this|those|they)\b)", std::regex::icase);
    std::smatch m;
    if (std::regex_search(query, m, kHowMany)) {
      query = m[1].str() + " " + *topic + " " + m.suffix().str();
    } else if (std::regex_search(query, m, kPronoun) && text::words(query).size() <= 8) {
      query = m.prefix().str() + *topic + m.suffix().str();
    }
  }
  return Json{{"message", query}}.dump();
}

namespace {

const std::set<std::string, std::less<>> kBankingLexicon = {
    "bank", "banking", "account", "accounts", "acc", "transfer", "transfers", "transferee",
    "transferees", "favorite", "favourite", "favorites", "favourites", "limit", "limits", "fee",
    "fees", "card", "cards", "debit", "credit", "loan", "loans", "interest", "rate", "rates",
    "savings", "saving", "save", "deposit", "deposits", "withdraw", "withdrawal", "balance",
    "payment", "payments", "pay", "duitnow", "app", "pin", "password", "otp", "security",
    "secure", "fraud", "scam", "statement", "statements", "transaction", "transactions",
    "money", "ringgit", "rm", "currency", "branch", "atm", "cash", "investment", "insurance",
    "bill", "bills", "biller", "qr", "support", "help", "login", "profile", "rewards",
    "cashback", "fund", "funds", "daily", "tac", "recipient", "recipients", "jompay",
    "overseas", "remittance", "dividend", "wallet", "verification", "2fa", "biometric",
    "ekyc", "register", "registration", "activate", "blocked", "lock", "locked", "reset",
    "eligible", "documents", "profit"};

std::string stem(std::string w) {
  if (w.size() > 4 && w.back() == 's') w.pop_back();
  return w;
}

std::set<std::string> content_stems(std::string_view s) {
  std::set<std::string> out;
  for (auto& w : text::words(s)) {
    if (!text::is_stopword(w)) out.insert(stem(w));
  }
  return out;
}

struct KnowledgeEntry {
  std::string id;
  std::string title;
  std::string body;
};

std::vector<KnowledgeEntry> parse_knowledge(const std::string& prompt) {
  static const std::regex kBlock(R"(^\[doc:([^\]]+)\] (.*?) :: (.*)$)", std::regex::multiline);
  std::vector<KnowledgeEntry> out;
  for (std::sregex_iterator it(prompt.begin(), prompt.end(), kBlock), end; it != end; ++it) {
    out.push_back({(*it)[1].str(), (*it)[2].str(), (*it)[3].str()});
  }
  return out;
}

std::vector<std::string> sentences(const std::string& body) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < body.size(); ++i) {
    cur.push_back(body[i]);
    bool end = (body[i] == '.' || body[i] == '!' || body[i] == '?') &&
               (i + 1 == body.size() || body[i + 1] == ' ');
    if (end) {
      std::string s = text::trim(cur);
      if (!s.empty()) out.push_back(s);
      cur.clear();
    }
  }
  std::string s = text::trim(cur);
  if (!s.empty()) out.push_back(s);
  return out;
}

std::size_t overlap(const std::set<std::string>& q, const std::set<std::string>& d) {
  std::size_t n = 0;
  for (const auto& w : q) n += d.count(w);
  return n;
}

}  // namespace

std::string answer_faq(const CompletionRequest& request) {
  std::string query = latest_user_text(request);
  auto words = text::words(query);
  if (!any_word(words, kBankingLexicon)) {
    return Json{{"message",
                 "I'm sorry, that is outside my expertise. I can help with banking questions, "
                 "such as transfers, accounts and our products."}}
        .dump();
  }
  const std::string fallback =
      "I'm sorry, I don't have enough information to answer that. Please check the app or "
      "contact our Help & Support Center for assistance.";
  auto docs = parse_knowledge(request.system_prompt);
  auto q = content_stems(query);
  const KnowledgeEntry* best = nullptr;
  std::size_t best_score = 0;
  for (const auto& d : docs) {
    auto t = content_stems(d.title);
    auto b = content_stems(d.body);
    std::size_t score = 2 * overlap(q, t) + overlap(q, b);
    if (score > best_score) {
      best_score = score;
      best = &d;
    }
  }
  if (!best) return Json{{"message", fallback}}.dump();

  auto sents = sentences(best->body);
  std::vector<std::size_t> scores;
  std::size_t top = 0;
  for (const auto& s : sents) {
    scores.push_back(overlap(q, content_stems(s)));
    top = std::max(top, scores.back());
  }
  std::vector<std::string> chosen;
  if (top == 0) {
    if (!sents.empty()) chosen.push_back(sents.front());
  } else {
    for (std::size_t i = 0; i < sents.size() && chosen.size() < 2; ++i) {
      if (scores[i] == top) chosen.push_back(sents[i]);
    }
  }
  if (chosen.empty()) return Json{{"message", fallback}}.dump();
  return Json{{"message", text::join(chosen, " ")}}.dump();
}

}  // namespace fixture_rules

// ---------------------------------------------------------------------------

std::string FixtureBackend::table_key(AgentName agent, std::string_view task,
                                      std::string_view input) {
  std::string material(agent_name(agent));
  material.push_back('\x1f');
  material.append(task);
  material.push_back('\x1f');
  material.append(text::normalize(input));
  return text::sha256_hex(material);
}

void FixtureBackend::add_table_entry(AgentName agent, std::string_view task,
                                     std::string_view input, std::string output_json) {
  table_[table_key(agent, task, input)] = std::move(output_json);
}

void FixtureBackend::load_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot read " + path);
  Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.contains("entries") || !doc["entries"].is_array()) {
    throw Error(ErrorCode::kConfigError, "fixture table must be {\"entries\": [...]}");
  }
  for (const auto& e : doc["entries"]) {
    auto agent = parse_agent_name(e.value("agent", ""));
    if (!agent) throw Error(ErrorCode::kConfigError, "fixture entry with unknown agent");
    const Json& output = e.at("output");
    add_table_entry(*agent, e.value("task", "default"), e.value("input", ""),
                    output.is_string() ? output.get<std::string>() : output.dump());
  }
}

std::size_t FixtureBackend::total_calls() const {
  std::size_t n = 0;
  for (const auto& c : call_counts_) n += c.load();
  return n;
}

std::string FixtureBackend::complete(const CompletionRequest& request) {
  ++call_counts_[static_cast<std::size_t>(request.agent)];
  if (!table_.empty()) {
    auto it = table_.find(table_key(request.agent, request.task, latest_user_text(request)));
    if (it != table_.end()) return it->second;
  }
  switch (request.agent) {
    case AgentName::kGuardrails: return fixture_rules::classify_guardrails(request);
    case AgentName::kIntent: return fixture_rules::classify_intent(request);
    case AgentName::kPayment: return fixture_rules::extract_payment(request);
    case AgentName::kFaq:
      return request.task == "reformulate" ? fixture_rules::reformulate_faq(request)
                                           : fixture_rules::answer_faq(request);
  }
  throw Error(ErrorCode::kBackendUnavailable, "fixture backend has no rules for this agent");
}

}  // namespace tellerflow
