#pragma once

#include <memory>
#include <set>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tellerflow/envelope.h"
#include "tellerflow/model_backend.h"
#include "tellerflow/snapshot.h"
#include "tellerflow/types.h"

namespace tellerflow {

struct BlocklistEntry {
  std::string phrase;  // normalized
  ViolationCategory category = ViolationCategory::kCodeInterpreterAbuse;
};

struct BlocklistPolicy {
  std::int64_t version = 0;
  std::vector<BlocklistEntry> entries;

  // First entry whose phrase occurs in the normalized text.
  const BlocklistEntry* match(std::string_view text) const;
};

// {"version": n, "entries": [{"phrase": "...", "category": "Violent Crimes"}]}.
// Phrases are normalized on the way in. Throws Error(kParseError).
BlocklistPolicy parse_blocklist(std::string_view json_text);

// Hot-reloadable blocklist. Versions strictly increase: a reload takes
// max(file version, current + 1).
class BlocklistStore {
 public:
  BlocklistStore() = default;
  explicit BlocklistStore(BlocklistPolicy initial);

  std::shared_ptr<const BlocklistPolicy> current() const { return policy_.load(); }

  // On ParseError the previous policy stays active and the error propagates.
  std::shared_ptr<const BlocklistPolicy> reload(std::string_view json_text);
  std::shared_ptr<const BlocklistPolicy> reload_file(const std::string& path);

 private:
  Snapshot<BlocklistPolicy> policy_;
};

struct ImageAllow {};
struct ImageBlock {
  std::string reason;
  std::optional<ViolationCategory> category;
};
using ImageVerdict = std::variant<ImageAllow, ImageBlock>;

class ImageModerator {
 public:
  virtual ~ImageModerator() = default;
  virtual ImageVerdict screen(const AttachmentRef& attachment) const = 0;
};

// Allows everything except attachment ids on the flagged list.
class FixtureImageModerator : public ImageModerator {
 public:
  FixtureImageModerator() = default;
  explicit FixtureImageModerator(std::map<std::string, ViolationCategory> flagged)
      : flagged_(std::move(flagged)) {}

  ImageVerdict screen(const AttachmentRef& attachment) const override;

 private:
  std::map<std::string, ViolationCategory> flagged_;
};

// Fixed refusal text per category; never names the policy that fired.
std::string refusal_message(ViolationCategory category);

// First pipeline stage. Blocklist hits and flagged images are decided
// locally; everything else goes to the model with multi-turn context.
class Guardrails : public GuardrailStage {
 public:
  Guardrails(std::shared_ptr<ModelBackend> backend, AdapterSpec spec,
             std::shared_ptr<BlocklistStore> blocklist,
             std::shared_ptr<const ImageModerator> moderator);

  // Throws Error(kAgentFailure) when the classifier cannot produce a valid
  // verdict; callers must treat that as a block.
  GuardrailVerdict screen_text(const ChatTurn& turn, const std::vector<ChatTurn>& history,
                               std::optional<ModelCallRecord>* call = nullptr);
  ImageVerdict screen_image(const AttachmentRef& attachment) const;

  StageOutput screen(const PipelineEnvelope& envelope) override;

  BlocklistStore& blocklist() { return *blocklist_; }

 private:
  std::shared_ptr<ModelBackend> backend_;
  AdapterSpec spec_;
  std::shared_ptr<BlocklistStore> blocklist_;
  std::shared_ptr<const ImageModerator> moderator_;
};

}  // namespace tellerflow
