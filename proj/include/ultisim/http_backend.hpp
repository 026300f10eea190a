#pragma once

// Chat-completion transport over HTTP with bounded exponential-backoff
// retry. The wire format follows the de-facto OpenAI chat schema: POST
// {base_url}{completions_path} with model, messages, temperature and
// max_tokens; the reply text is choices[0].message.content.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "ultisim/backend.hpp"
#include "ultisim/errors.hpp"

namespace ultisim {

struct HttpBackendConfig {
    std::string base_url;  // scheme://host[:port]
    std::string completions_path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env;  // env var holding the bearer token; empty = unauthenticated
    int connect_timeout_sec = 10;
    int read_timeout_sec = 120;
};

namespace detail {

inline constexpr std::chrono::milliseconds kMaxBackoff{60'000};

inline std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int failures) {
    double ms = static_cast<double>(policy.base_backoff_ms);
    for (int i = 1; i < failures; ++i) ms *= policy.backoff_multiplier;
    auto delay = std::chrono::milliseconds(static_cast<long long>(ms));
    return std::min(delay, kMaxBackoff);
}

}  // namespace detail

class HttpChatBackend final : public AgentBackend {
  public:
    HttpChatBackend(HttpBackendConfig config, RetryPolicy policy)
        : config_(std::move(config)), policy_(policy) {
        if (config_.base_url.empty()) throw ConfigError("http backend needs a base_url");
        if (!config_.api_key_env.empty()) {
            const char* key = std::getenv(config_.api_key_env.c_str());
            if (key == nullptr || *key == '\0') {
                throw ConfigError("credential environment variable " + config_.api_key_env +
                                  " is not set");
            }
            api_key_ = key;
        }
        sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }

    std::string kind() const override { return "http"; }

    // Test seam: replaces the inter-attempt sleep.
    void set_sleep_hook(std::function<void(std::chrono::milliseconds)> hook) {
        sleep_ = std::move(hook);
    }

    CompletionResult complete(const CompletionRequest& request) override {
        const auto started = std::chrono::steady_clock::now();
        std::string last_error;
        for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
            if (attempt > 1) sleep_(detail::backoff_delay(policy_, attempt - 1));

            httplib::Client client(config_.base_url);
            client.set_connection_timeout(config_.connect_timeout_sec, 0);
            client.set_read_timeout(config_.read_timeout_sec, 0);
            httplib::Headers headers;
            if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

            auto res = client.Post(config_.completions_path, headers, request_body(request),
                                   "application/json");
            if (!res) {
                last_error = "transport: " + httplib::to_string(res.error());
                continue;  // connection-level failures are always transient
            }
            if (res->status == 200) {
                CompletionResult result;
                result.raw_text = extract_message_text(res->body);
                result.attempt_count = attempt;
                result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::steady_clock::now() - started)
                                        .count();
                result.provider_metadata.emplace("status", "200");
                return result;
            }
            if (res->status == 401 || res->status == 403) {
                throw AuthError("authentication rejected (HTTP " + std::to_string(res->status) +
                                ") by " + config_.base_url);
            }
            if (policy_.retryable_statuses.count(res->status) > 0) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            throw TransportError("non-retryable HTTP " + std::to_string(res->status) + " from " +
                                 config_.base_url);
        }
        throw TransportError("exhausted " + std::to_string(policy_.max_attempts) +
                             " attempts against " + config_.base_url + " (" + last_error + ")");
    }

  private:
    std::string request_body(const CompletionRequest& request) const {
        nlohmann::json messages = nlohmann::json::array();
        if (request.system_prompt) {
            messages.push_back({{"role", "system"}, {"content", *request.system_prompt}});
        }
        messages.push_back({{"role", "user"}, {"content", request.prompt}});
        nlohmann::json body = {
            {"model", config_.model.empty() ? request.model_name : config_.model},
            {"messages", messages},
            {"temperature", request.temperature},
            {"max_tokens", request.max_output_tokens},
        };
        return body.dump();
    }

    static std::string extract_message_text(const std::string& body) {
        nlohmann::json parsed = nlohmann::json::parse(body, nullptr, false);
        if (parsed.is_discarded()) throw TransportError("malformed completion response body");
        try {
            return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw TransportError("completion response missing choices[0].message.content");
        }
    }

    HttpBackendConfig config_;
    RetryPolicy policy_;
    std::string api_key_;
    std::function<void(std::chrono::milliseconds)> sleep_;
};

}  // namespace ultisim
