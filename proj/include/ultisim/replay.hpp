#pragma once

// Replay backend: answers completions verbatim from a recorded run log,
// keyed by (prompt sha256, agent index). Recorded transport failures are
// replayed as TransportError; recorded malformed text is returned as-is so
// the parser fails the same way it originally did.

#include <map>
#include <string>
#include <utility>

#include "ultisim/backend.hpp"
#include "ultisim/errors.hpp"
#include "ultisim/hash.hpp"
#include "ultisim/run_log.hpp"

namespace ultisim {

class ReplayBackend final : public AgentBackend {
  public:
    explicit ReplayBackend(const RunLog& log)
        : model_(log.header.model), entries_(log.entries) {
        for (const auto& entry : entries_) {
            index_[{entry.prompt_hash, entry.agent_index}] = &entry;
        }
    }

    CompletionResult complete(const CompletionRequest& request) override {
        const auto agent = agent_index_from_tag(request.request_tag);
        if (!agent) {
            throw ReplayMissError("replay request has no agent index tag: \"" +
                                  request.request_tag + "\"");
        }
        const auto it = index_.find({sha256_hex(request.prompt), *agent});
        if (it == index_.end()) {
            throw ReplayMissError("no recorded response for agent " + std::to_string(*agent) +
                                  " with this prompt");
        }
        const RunLogEntry& entry = *it->second;
        if (entry.parsed.type == ParsedOutcome::Type::failure &&
            entry.parsed.failure == FailureKind::transport_failure) {
            throw TransportError("replayed transport failure for agent " +
                                 std::to_string(*agent));
        }
        CompletionResult result;
        result.raw_text = entry.raw_response;
        result.latency_ms = 0.0;
        result.attempt_count = 1;
        result.provider_metadata = {{"replayed", "true"}};
        return result;
    }

    std::string kind() const override { return "replay"; }

    const std::string& model() const { return model_; }

  private:
    std::string model_;
    std::vector<RunLogEntry> entries_;
    std::map<std::pair<std::string, int>, const RunLogEntry*> index_;
};

}  // namespace ultisim
