#pragma once

// Deterministic trait-driven oracle: maps persona z-scores straight to an
// offer or an accept threshold. It exists to exercise the pipeline and the
// metric code without network access; its coefficients are configuration,
// and its outputs model no particular LLM.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ultisim/backend.hpp"
#include "ultisim/errors.hpp"
#include "ultisim/game.hpp"
#include "ultisim/persona.hpp"

namespace ultisim {

struct SyntheticParams {
    int base_offer = 40;
    double offer_trait_gain = 10.0;  // coins per z-unit of mean generosity
    int base_threshold = 20;
    double threshold_trait_gain = 10.0;  // coins per z-unit of punishment + inequality aversion
};

namespace detail {

inline int clamp_coins(double raw, const GameConfig& game) {
    const long rounded = std::lround(raw);
    return static_cast<int>(std::clamp<long>(rounded, 0, game.total_coins));
}

}  // namespace detail

inline Offer synthetic_propose(const PersonaRecord& persona, const SyntheticParams& params = {},
                               const GameConfig& game = {}) {
    const double g = component_mean(persona, TraitComponent::generosity);
    return Offer{detail::clamp_coins(params.base_offer + params.offer_trait_gain * g, game)};
}

inline int synthetic_accept_threshold(const PersonaRecord& persona,
                                      const SyntheticParams& params = {},
                                      const GameConfig& game = {}) {
    const double q = component_mean(persona, TraitComponent::punishment) +
                     component_mean(persona, TraitComponent::inequality_aversion_wtp);
    return detail::clamp_coins(params.base_threshold + params.threshold_trait_gain * q, game);
}

// Accept iff the offer reaches the persona's threshold (boundary inclusive).
inline Decision synthetic_respond(const PersonaRecord& persona, Offer offer,
                                  const SyntheticParams& params = {}, const GameConfig& game = {}) {
    return offer.coins >= synthetic_accept_threshold(persona, params, game) ? Decision::accept
                                                                            : Decision::reject;
}

// Backend wrapper: holds the run's population (and, for responder runs, the
// per-index offers) and answers each request by agent index from its tag,
// emitting text in the instructed JSON shape.
class SyntheticBackend final : public AgentBackend {
  public:
    SyntheticBackend(std::vector<PersonaRecord> personas, Role role, std::vector<Offer> offers,
                     SyntheticParams params = {}, GameConfig game = {})
        : personas_(std::move(personas)),
          role_(role),
          offers_(std::move(offers)),
          params_(params),
          game_(game) {
        if (role_ == Role::responder && offers_.size() != personas_.size()) {
            throw ConfigError("synthetic responder backend needs one offer per persona");
        }
    }

    std::string kind() const override { return "synthetic"; }

    CompletionResult complete(const CompletionRequest& request) override {
        const auto index = agent_index_from_tag(request.request_tag);
        if (!index || static_cast<std::size_t>(*index) >= personas_.size()) {
            throw ConfigError("synthetic backend cannot resolve agent index from tag \"" +
                              request.request_tag + "\"");
        }
        const PersonaRecord& persona = personas_[static_cast<std::size_t>(*index)];
        CompletionResult result;
        if (role_ == Role::proposer) {
            const Offer offer = synthetic_propose(persona, params_, game_);
            result.raw_text = "{\"Reason\": \"Deterministic trait-driven proposal.\", \"Responder\": \"" +
                              std::to_string(offer.coins) + "\", \"Proposer\": \"" +
                              std::to_string(game_.total_coins - offer.coins) + "\"}";
        } else {
            const Offer offer = offers_[static_cast<std::size_t>(*index)];
            const Decision decision = synthetic_respond(persona, offer, params_, game_);
            result.raw_text = "{\"Reason\": \"Deterministic trait-driven threshold.\", \"Decision\": \"" +
                              std::string(to_string(decision)) + "\"}";
        }
        return result;
    }

  private:
    std::vector<PersonaRecord> personas_;
    Role role_;
    std::vector<Offer> offers_;
    SyntheticParams params_;
    GameConfig game_;
};

}  // namespace ultisim
