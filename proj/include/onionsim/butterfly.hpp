#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "onionsim/pitree.hpp"

namespace onionsim {

// Iterated butterfly network over N = 2^(n-1) parties: n stages per
// iteration, D iterations, L = n*D mixing epochs.
struct ButterflyConfig {
  std::uint32_t n_parties = 16;
  std::uint32_t stages = 5;
  std::uint32_t iterations = 1;
  std::uint32_t mixing_epochs = 5;

  // Throws ConfigError unless N is a power of two >= 2 and D >= 1.
  static ButterflyConfig make(std::uint32_t n_parties, std::uint32_t iterations);
  // Label bit (1 = most significant of n-1) flipped at `stage`:
  // ((stage - 1) mod (n - 1)) + 1.
  std::uint32_t stage_bit(std::uint32_t stage) const;
};

// Tree-protocol parameters plus the mixing prefix.
struct PibflyParams {
  PitreeParams tree;
  ButterflyConfig butterfly;

  std::uint32_t total_epochs() const { return butterfly.mixing_epochs + tree.epochs() - 1; }
  // chi / (N (L + h)): keeps the expected checkpoints per diagnostic equal to
  // (1 - kappa) chi / (n D + h) even though L + h - 1 epochs execute.
  double default_ckpt_freq() const;
  static PibflyParams with_defaults(std::uint32_t n, std::uint32_t lambda, double kappa, std::uint32_t chi,
                                    std::uint32_t d, std::uint32_t iterations);
};

// The stage-`stage` subnet containing i: {i, partner}, partner's label being
// i's label with stage_bit(stage) flipped. Symmetric in i and partner.
std::pair<PartyId, PartyId> subnet_of(PartyId i, std::uint32_t stage, const ButterflyConfig& config);

struct WalkPin {
  std::uint32_t epoch = 1;
  PartyId party;
};

// Walk w_1..w_L through the iterated butterfly: w_(t+1) is uniform over
// subnet_of(w_t, t+1). A pin fixes w_epoch and the walk is extended from it
// backwards and forwards by the same two-choice rule.
std::vector<PartyId> random_walk(const ButterflyConfig& config, std::optional<WalkPin> pin, Rng& rng);

// Prepends the mixing phase to a tree-protocol plan of length h*d + 1: the
// first d entries of the base plan are replaced by L segments of d parties,
// segment t being d-1 uniform picks from subnet_of(w_t, t) followed by w_t.
// Mixing nonces are empty, except at position epoch*d when a mixing-phase
// checkpoint is supplied (which also pins the walk).
RoutingPlan convert_plan(const RoutingPlan& base, std::optional<CheckpointDatum> checkpoint,
                         const ButterflyConfig& config, std::uint32_t d, Rng& rng);

// Checkpoint onion for the butterfly protocol. Epochs 1..L embed in the
// mixing prefix; later epochs embed in the tree part of the base plan.
RoutingPlan make_pibfly_checkpoint_plan(PartyId owner, const CheckpointDatum& datum, const PibflyParams& params,
                                        Rng& rng);
// A merging set converted onion by onion, each with an independent walk.
std::vector<RoutingPlan> make_pibfly_merging_plans(PartyId sender, Payload message, PartyId recipient,
                                                   const PibflyParams& params, Rng& rng);

}  // namespace onionsim
