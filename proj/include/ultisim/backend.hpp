#pragma once

// Decision-engine contract shared by the HTTP, synthetic, and replay
// backends. Backends must tolerate concurrent complete() calls; bounded
// concurrency itself is the runner's job.

#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace ultisim {

struct CompletionRequest {
    std::string prompt;                        // user-role message body
    std::optional<std::string> system_prompt;  // set only by the persona-as-system ablation
    std::string model_name;
    double temperature = 0.0;  // protocol runs keep this at zero
    int max_output_tokens = 1024;
    std::string request_tag;  // "<run_id>/<agent_index>", for tracing and lookup backends
};

struct CompletionResult {
    std::string raw_text;
    long latency_ms = 0;
    int attempt_count = 1;  // transport attempts inside one complete() call
    std::map<std::string, std::string> provider_metadata;
};

struct RetryPolicy {
    int max_attempts = 5;
    int base_backoff_ms = 200;
    double backoff_multiplier = 2.0;
    std::set<int> retryable_statuses = {408, 429, 500, 502, 503, 504};
    int parse_retry_limit = 3;  // re-asks on malformed output, applied by the runner
};

class AgentBackend {
  public:
    virtual ~AgentBackend() = default;

    // Returns raw assistant text. Throws TransportError when the policy is
    // exhausted or the response is non-retryable, AuthError on rejected
    // credentials, ReplayMissError when a recording is absent.
    virtual CompletionResult complete(const CompletionRequest& request) = 0;

    virtual std::string kind() const = 0;
};

inline std::optional<int> agent_index_from_tag(std::string_view tag) {
    const auto slash = tag.rfind('/');
    if (slash == std::string_view::npos) return std::nullopt;
    const std::string_view digits = tag.substr(slash + 1);
    int value = 0;
    auto res = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size() || value < 0)
        return std::nullopt;
    return value;
}

}  // namespace ultisim
