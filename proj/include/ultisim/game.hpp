#pragma once

// One-shot ultimatum game: strategy spaces, payoff rule, monetary framing.
// The proposer offers s1 coins to the responder; acceptance implements the
// split, rejection zeroes both payoffs.

#include <optional>
#include <string_view>
#include <variant>

namespace ultisim {

enum class Role { proposer, responder };
enum class Decision { accept, reject };

struct GameConfig {
    int total_coins = 100;
    double coin_value_usd = 0.10;  // display-only; payoffs stay in coins
};

// Coins offered to the responder. Construct untrusted values through
// validate_offer; direct construction is for values already in range.
struct Offer {
    int coins = 0;
    bool operator==(const Offer&) const = default;
};

struct PayoffPair {
    int proposer_coins = 0;
    int responder_coins = 0;
    bool operator==(const PayoffPair&) const = default;
};

struct OfferRangeError {
    int raw = 0;
    int total_coins = 100;
};

inline std::variant<Offer, OfferRangeError> validate_offer(int raw, const GameConfig& config) {
    if (raw < 0 || raw > config.total_coins) return OfferRangeError{raw, config.total_coins};
    return Offer{raw};
}

inline PayoffPair payoff(Offer offer, Decision decision, const GameConfig& config) {
    if (decision == Decision::reject) return {0, 0};
    return {config.total_coins - offer.coins, offer.coins};
}

inline constexpr std::string_view to_string(Decision d) {
    return d == Decision::accept ? "accept" : "reject";
}

inline constexpr std::string_view to_string(Role r) {
    return r == Role::proposer ? "proposer" : "responder";
}

inline std::optional<Role> parse_role(std::string_view token) {
    if (token == "proposer") return Role::proposer;
    if (token == "responder") return Role::responder;
    return std::nullopt;
}

inline std::optional<Decision> parse_decision(std::string_view token) {
    if (token == "accept") return Decision::accept;
    if (token == "reject") return Decision::reject;
    return std::nullopt;
}

}  // namespace ultisim
