#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "onionsim/keys.hpp"
#include "onionsim/registry.hpp"
#include "onionsim/rng.hpp"
#include "onionsim/types.hpp"

namespace onionsim {

// (epoch, verifier, checkpoint nonce) produced by checkpoint-data generation.
struct CheckpointDatum {
  std::uint32_t epoch = 0;
  PartyId verifier;
  Nonce checkpoint;
  constexpr auto operator<=>(const CheckpointDatum&) const = default;
};

struct PitreeParams {
  std::uint32_t n_parties = 16;
  std::uint32_t lambda = 16;
  double kappa = 0.25;
  std::uint32_t chi = 4;  // merging onions per message, 2^(h-1)
  std::uint32_t d = 2;    // rounds per epoch
  double threshold = 1.0; // missing-checkpoint count that triggers an abort
  double ckpt_freq = 0.0; // probability that a given (epoch, party) is a checkpoint

  // Throws ConfigError unless chi is a power of two, d >= 1, T > 0,
  // 0 <= ckpt_freq <= 1 and N >= 2.
  void validate() const;
  std::uint32_t epochs() const;  // h = log2(chi) + 1
  double default_ckpt_freq() const { return static_cast<double>(chi) / (static_cast<double>(n_parties) * epochs()); }

  static PitreeParams with_defaults(std::uint32_t n, std::uint32_t lambda, double kappa, std::uint32_t chi,
                                    std::uint32_t d);
};

// 2(1 - delta)(1 - kappa)^3 kappa log2(lambda)^(1 + epsilon): the first
// diagnostic threshold for the tree protocol.
double pitree_threshold(double delta, double kappa, double epsilon, std::uint32_t lambda);

// true iff value < freq * 2^64.
bool bernoulli_from_prf(std::uint64_t value, double freq);

// Checkpoint data of `owner` for epochs 1..epochs, in (epoch, verifier) order.
// The data are symmetric: (l, k, c) is in owner i's set iff (l, i, c) is in k's.
std::vector<CheckpointDatum> gen_ckpt_data(PartyId owner, std::uint32_t epochs, double freq,
                                           const KeyMaterial& keys, Prf& prf);
std::vector<CheckpointDatum> gen_ckpt_data(PartyId owner, const PitreeParams& params, const KeyMaterial& keys,
                                           Prf& prf);

PartyId random_party(std::uint32_t n, Rng& rng);

// Checkpoint onion plan: h*d uniform intermediaries plus a uniform final
// recipient, carrying the empty message. Path position epoch*d holds the
// verifier and reveals the checkpoint nonce; every other nonce is uniform.
RoutingPlan make_checkpoint_plan(PartyId owner, const CheckpointDatum& datum, const PitreeParams& params,
                                 Rng& rng);
// Same shape without an embedded checkpoint.
RoutingPlan make_dummy_plan(PartyId owner, const PitreeParams& params, Rng& rng);
HandleId form_checkpoint_onion(OnionRegistry& registry, PartyId owner, const CheckpointDatum& datum,
                               const PitreeParams& params, Rng& rng);

// Binary merge tree with suffix-addressed labels: the root is "", and the
// children of node B are "0"+B and "1"+B. Every node carries d parties and
// d nonces.
struct MergeTreeNode {
  std::string label;
  std::vector<PartyId> parties;
  std::vector<Nonce> nonces;
};

struct MergeTree {
  std::uint32_t levels = 1;  // h
  std::map<std::string, MergeTreeNode> nodes;

  // Leaf labels in index order: leaf index b has bits b_1..b_(h-1), with
  // b_1 the most significant, written left to right.
  std::vector<std::string> leaf_labels() const;
  // Node labels visited from `leaf` to the root, leaf first.
  static std::vector<std::string> chain(const std::string& leaf);
};

MergeTree build_merge_tree(const PitreeParams& params, Rng& rng);

// The chi plans of one merging set, in leaf order. Each plan's path is the
// concatenation of the node party lists from its leaf up to the root,
// followed by the recipient; nonces likewise.
std::vector<RoutingPlan> make_merging_plans(const MergeTree& tree, PartyId sender, Payload message,
                                            PartyId recipient);
std::vector<HandleId> form_merging_onions(OnionRegistry& registry, PartyId sender, Payload message,
                                          PartyId recipient, const PitreeParams& params, Rng& rng);

}  // namespace onionsim
