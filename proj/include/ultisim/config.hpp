#pragma once

// Run configuration: a strict JSON file (unknown keys are errors) plus the
// config hash that ties run logs to the protocol-relevant settings that
// produced them. Credentials never appear in the file; the file names an
// environment variable instead.

#include <fstream>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ultisim/backend.hpp"
#include "ultisim/errors.hpp"
#include "ultisim/game.hpp"
#include "ultisim/hash.hpp"
#include "ultisim/persona.hpp"
#include "ultisim/synthetic.hpp"
#include "ultisim/version.hpp"

namespace ultisim {

struct BackendSettings {
    std::string kind = "synthetic";  // "http" | "synthetic" | "replay"
    std::string model = "synthetic-oracle";
    std::string base_url;
    std::string completions_path = "/v1/chat/completions";
    std::string api_key_env;  // name of the env var holding the key
    double temperature = 0.0;
    int max_output_tokens = 1024;
    std::string replay_log;  // source log for kind == "replay"
};

struct DataSettings {
    std::string personas;
    std::string offers;  // offer stream for responder runs
    char delimiter = ',';
    std::map<std::string, std::string> columns;  // logical name -> actual header
};

struct RunSettings {
    int n_agents = 1000;
    std::string out_dir = "runs";
    int concurrency = 1;
    long seed = 0;  // reserved for stochastic extensions; protocol runs are deterministic
};

struct Config {
    BackendSettings backend;
    RetryPolicy retry;
    GameConfig game;
    DataSettings data;
    RunSettings run;
    SyntheticParams synthetic;
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, std::string_view scope,
                       std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const auto& name : allowed) {
            if (key == name) {
                known = true;
                break;
            }
        }
        if (!known) {
            std::string path = scope.empty() ? key : std::string(scope) + "." + key;
            throw ConfigError("config: unknown key \"" + path + "\"");
        }
    }
}

template <typename T>
T get_or(const nlohmann::json& obj, const char* key, T fallback, std::string_view scope) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config: bad value for \"" + std::string(scope) + "." + key + "\"");
    }
}

}  // namespace detail

inline Config config_from_json(const nlohmann::json& root) {
    if (!root.is_object()) throw ConfigError("config: top level must be a JSON object");
    detail::check_keys(root, "", {"backend", "retry", "game", "data", "run", "synthetic"});

    Config cfg;
    using detail::get_or;

    if (root.contains("backend")) {
        const auto& b = root.at("backend");
        detail::check_keys(b, "backend",
                           {"kind", "model", "base_url", "completions_path", "api_key_env",
                            "temperature", "max_output_tokens", "replay_log"});
        cfg.backend.kind = get_or(b, "kind", cfg.backend.kind, "backend");
        cfg.backend.model = get_or(b, "model", cfg.backend.model, "backend");
        cfg.backend.base_url = get_or(b, "base_url", cfg.backend.base_url, "backend");
        cfg.backend.completions_path =
            get_or(b, "completions_path", cfg.backend.completions_path, "backend");
        cfg.backend.api_key_env = get_or(b, "api_key_env", cfg.backend.api_key_env, "backend");
        cfg.backend.temperature = get_or(b, "temperature", cfg.backend.temperature, "backend");
        cfg.backend.max_output_tokens =
            get_or(b, "max_output_tokens", cfg.backend.max_output_tokens, "backend");
        cfg.backend.replay_log = get_or(b, "replay_log", cfg.backend.replay_log, "backend");
    }
    if (root.contains("retry")) {
        const auto& r = root.at("retry");
        detail::check_keys(
            r, "retry",
            {"max_attempts", "base_backoff_ms", "backoff_multiplier", "parse_retry_limit"});
        cfg.retry.max_attempts = get_or(r, "max_attempts", cfg.retry.max_attempts, "retry");
        cfg.retry.base_backoff_ms =
            get_or(r, "base_backoff_ms", cfg.retry.base_backoff_ms, "retry");
        cfg.retry.backoff_multiplier =
            get_or(r, "backoff_multiplier", cfg.retry.backoff_multiplier, "retry");
        cfg.retry.parse_retry_limit =
            get_or(r, "parse_retry_limit", cfg.retry.parse_retry_limit, "retry");
    }
    if (root.contains("game")) {
        const auto& g = root.at("game");
        detail::check_keys(g, "game", {"total_coins", "coin_value_usd"});
        cfg.game.total_coins = get_or(g, "total_coins", cfg.game.total_coins, "game");
        cfg.game.coin_value_usd = get_or(g, "coin_value_usd", cfg.game.coin_value_usd, "game");
    }
    if (root.contains("data")) {
        const auto& d = root.at("data");
        detail::check_keys(d, "data", {"personas", "offers", "delimiter", "columns"});
        cfg.data.personas = get_or(d, "personas", cfg.data.personas, "data");
        cfg.data.offers = get_or(d, "offers", cfg.data.offers, "data");
        const auto delim = get_or(d, "delimiter", std::string(1, cfg.data.delimiter), "data");
        if (delim.size() != 1) {
            throw ConfigError("config: \"data.delimiter\" must be a single character");
        }
        cfg.data.delimiter = delim[0];
        cfg.data.columns = get_or(d, "columns", cfg.data.columns, "data");
    }
    if (root.contains("run")) {
        const auto& r = root.at("run");
        detail::check_keys(r, "run", {"n_agents", "out_dir", "concurrency", "seed"});
        cfg.run.n_agents = get_or(r, "n_agents", cfg.run.n_agents, "run");
        cfg.run.out_dir = get_or(r, "out_dir", cfg.run.out_dir, "run");
        cfg.run.concurrency = get_or(r, "concurrency", cfg.run.concurrency, "run");
        cfg.run.seed = get_or(r, "seed", cfg.run.seed, "run");
    }
    if (root.contains("synthetic")) {
        const auto& s = root.at("synthetic");
        detail::check_keys(s, "synthetic",
                           {"base_offer", "offer_trait_gain", "base_threshold",
                            "threshold_trait_gain"});
        cfg.synthetic.base_offer =
            get_or(s, "base_offer", cfg.synthetic.base_offer, "synthetic");
        cfg.synthetic.offer_trait_gain =
            get_or(s, "offer_trait_gain", cfg.synthetic.offer_trait_gain, "synthetic");
        cfg.synthetic.base_threshold =
            get_or(s, "base_threshold", cfg.synthetic.base_threshold, "synthetic");
        cfg.synthetic.threshold_trait_gain =
            get_or(s, "threshold_trait_gain", cfg.synthetic.threshold_trait_gain, "synthetic");
    }

    // Cross-field validation.
    if (cfg.backend.kind != "http" && cfg.backend.kind != "synthetic" &&
        cfg.backend.kind != "replay") {
        throw ConfigError("config: backend.kind must be \"http\", \"synthetic\", or \"replay\"");
    }
    if (cfg.backend.kind == "http") {
        if (cfg.backend.base_url.empty()) {
            throw ConfigError("config: backend.base_url is required for the http backend");
        }
        if (cfg.backend.api_key_env.empty()) {
            throw ConfigError("config: backend.api_key_env is required for the http backend");
        }
    }
    if (cfg.backend.kind == "replay" && cfg.backend.replay_log.empty()) {
        throw ConfigError("config: backend.replay_log is required for the replay backend");
    }
    if (cfg.backend.temperature < 0) throw ConfigError("config: backend.temperature must be >= 0");
    if (cfg.backend.max_output_tokens <= 0) {
        throw ConfigError("config: backend.max_output_tokens must be positive");
    }
    if (cfg.retry.max_attempts < 1) throw ConfigError("config: retry.max_attempts must be >= 1");
    if (cfg.retry.base_backoff_ms < 0) {
        throw ConfigError("config: retry.base_backoff_ms must be >= 0");
    }
    if (cfg.retry.backoff_multiplier < 1.0) {
        throw ConfigError("config: retry.backoff_multiplier must be >= 1");
    }
    if (cfg.retry.parse_retry_limit < 0) {
        throw ConfigError("config: retry.parse_retry_limit must be >= 0");
    }
    if (cfg.game.total_coins <= 0) throw ConfigError("config: game.total_coins must be positive");
    if (cfg.game.coin_value_usd <= 0) {
        throw ConfigError("config: game.coin_value_usd must be positive");
    }
    if (cfg.run.n_agents < 1) throw ConfigError("config: run.n_agents must be >= 1");
    if (cfg.run.concurrency < 1) throw ConfigError("config: run.concurrency must be >= 1");
    return cfg;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json root = nlohmann::json::parse(in, nullptr, false);
    if (root.is_discarded()) throw ConfigError("config: invalid JSON in " + path);
    return config_from_json(root);
}

// Hash of everything that shapes the run's content: the protocol version,
// model and sampling settings, game parameters, the per-run condition/role/
// size, and the exact bytes of the persona and offer inputs. Transport and
// layout knobs (retries, concurrency, out_dir, base_url) deliberately stay
// out so that a replay or a resumed run hashes identically.
inline std::string config_hash(const Config& cfg, PersonaCondition condition, Role role,
                               int n_agents, std::string_view personas_sha256,
                               std::string_view offers_sha256) {
    const nlohmann::json j = {
        {"protocol_version", kProtocolVersion},
        {"model", cfg.backend.model},
        {"temperature", cfg.backend.temperature},
        {"max_output_tokens", cfg.backend.max_output_tokens},
        {"total_coins", cfg.game.total_coins},
        {"coin_value_usd", cfg.game.coin_value_usd},
        {"condition", std::string(condition_token(condition))},
        {"role", std::string(to_string(role))},
        {"n_agents", n_agents},
        {"personas_sha256", std::string(personas_sha256)},
        {"offers_sha256", std::string(offers_sha256)},
    };
    return sha256_hex(j.dump());
}

}  // namespace ultisim
