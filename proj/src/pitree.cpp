#include "onionsim/pitree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace onionsim {

void PitreeParams::validate() const {
  if (n_parties < 2) throw ConfigError("need at least 2 parties");
  if (chi == 0 || !std::has_single_bit(chi)) throw ConfigError("chi must be a power of two, got " + std::to_string(chi));
  if (d < 1) throw ConfigError("d must be at least 1");
  if (!(threshold > 0.0)) throw ConfigError("abort threshold T must be positive");
  if (!(ckpt_freq >= 0.0 && ckpt_freq <= 1.0)) throw ConfigError("checkpoint frequency must lie in [0, 1]");
  if (!(kappa >= 0.0 && kappa < 0.5)) throw ConfigError("kappa must lie in [0, 0.5)");
}

std::uint32_t PitreeParams::epochs() const { return static_cast<std::uint32_t>(std::countr_zero(chi)) + 1; }

PitreeParams PitreeParams::with_defaults(std::uint32_t n, std::uint32_t lambda, double kappa, std::uint32_t chi,
                                         std::uint32_t d) {
  PitreeParams p;
  p.n_parties = n;
  p.lambda = lambda;
  p.kappa = kappa;
  p.chi = chi;
  p.d = d;
  p.ckpt_freq = p.default_ckpt_freq();
  p.threshold = pitree_threshold(0.1, kappa, 0.1, lambda);
  return p;
}

double pitree_threshold(double delta, double kappa, double epsilon, std::uint32_t lambda) {
  const double log_lambda = std::log2(static_cast<double>(lambda));
  return 2.0 * (1.0 - delta) * std::pow(1.0 - kappa, 3) * kappa * std::pow(log_lambda, 1.0 + epsilon);
}

bool bernoulli_from_prf(std::uint64_t value, double freq) {
  if (freq >= 1.0) return true;
  if (freq <= 0.0) return false;
  const auto threshold = static_cast<std::uint64_t>(std::ldexp(freq, 64));
  return value < threshold;
}

std::vector<CheckpointDatum> gen_ckpt_data(PartyId owner, std::uint32_t epochs, double freq,
                                           const KeyMaterial& keys, Prf& prf) {
  std::vector<CheckpointDatum> out;
  for (std::uint32_t epoch = 1; epoch <= epochs; ++epoch) {
    for (std::uint32_t k = 1; k <= keys.party_count(); ++k) {
      const PartyId verifier{k};
      const SharedKey key = keys.shared_key(owner, verifier);
      if (!bernoulli_from_prf(prf(key, epoch_tag_input(epoch, 0)), freq)) continue;
      // Tag 1 is the checkpoint itself; later tags only on the (2^-64)
      // chance that it collides with the empty nonce.
      std::uint64_t c = 0;
      for (std::uint8_t tag = 1; c == 0; ++tag) c = prf(key, epoch_tag_input(epoch, tag));
      out.push_back({epoch, verifier, Nonce{c}});
    }
  }
  return out;
}

std::vector<CheckpointDatum> gen_ckpt_data(PartyId owner, const PitreeParams& params, const KeyMaterial& keys,
                                           Prf& prf) {
  return gen_ckpt_data(owner, params.epochs(), params.ckpt_freq, keys, prf);
}

PartyId random_party(std::uint32_t n, Rng& rng) { return PartyId{static_cast<std::uint32_t>(rng.uniform(n)) + 1}; }

RoutingPlan make_dummy_plan(PartyId owner, const PitreeParams& params, Rng& rng) {
  const std::size_t hops = static_cast<std::size_t>(params.epochs()) * params.d;
  RoutingPlan plan;
  plan.message = Payload::empty();
  plan.origin = owner;
  plan.path.reserve(hops + 1);
  plan.nonces.reserve(hops);
  for (std::size_t i = 0; i < hops; ++i) {
    plan.path.push_back(random_party(params.n_parties, rng));
    plan.nonces.push_back(Nonce{rng.nonzero_u64()});
  }
  plan.path.push_back(random_party(params.n_parties, rng));
  return plan;
}

RoutingPlan make_checkpoint_plan(PartyId owner, const CheckpointDatum& datum, const PitreeParams& params,
                                 Rng& rng) {
  if (datum.epoch < 1 || datum.epoch > params.epochs()) {
    throw ConfigError("checkpoint epoch " + std::to_string(datum.epoch) + " outside [1, " +
                      std::to_string(params.epochs()) + "]");
  }
  RoutingPlan plan = make_dummy_plan(owner, params, rng);
  const std::size_t at = static_cast<std::size_t>(datum.epoch) * params.d - 1;
  plan.path[at] = datum.verifier;
  plan.nonces[at] = datum.checkpoint;
  return plan;
}

HandleId form_checkpoint_onion(OnionRegistry& registry, PartyId owner, const CheckpointDatum& datum,
                               const PitreeParams& params, Rng& rng) {
  return registry.form_onion(make_checkpoint_plan(owner, datum, params, rng));
}

std::vector<std::string> MergeTree::leaf_labels() const {
  const std::uint32_t bits = levels - 1;
  std::vector<std::string> out;
  out.reserve(std::size_t{1} << bits);
  for (std::uint32_t leaf = 0; leaf < (1u << bits); ++leaf) {
    std::string label(bits, '0');
    for (std::uint32_t b = 0; b < bits; ++b) {
      if ((leaf >> (bits - 1 - b)) & 1u) label[b] = '1';
    }
    out.push_back(std::move(label));
  }
  return out;
}

std::vector<std::string> MergeTree::chain(const std::string& leaf) {
  std::vector<std::string> out;
  for (std::size_t drop = 0; drop <= leaf.size(); ++drop) out.push_back(leaf.substr(drop));
  return out;
}

MergeTree build_merge_tree(const PitreeParams& params, Rng& rng) {
  params.validate();
  MergeTree tree;
  tree.levels = params.epochs();
  // Level by level from the root, labels in lexicographic order per level.
  std::vector<std::string> level{""};
  for (std::uint32_t depth = 0; depth < tree.levels; ++depth) {
    std::vector<std::string> next;
    for (const auto& label : level) {
      MergeTreeNode node{label, {}, {}};
      for (std::uint32_t i = 0; i < params.d; ++i) {
        node.parties.push_back(random_party(params.n_parties, rng));
        node.nonces.push_back(Nonce{rng.nonzero_u64()});
      }
      tree.nodes.emplace(label, std::move(node));
      next.push_back("0" + label);
      next.push_back("1" + label);
    }
    std::sort(next.begin(), next.end());
    level = std::move(next);
  }
  return tree;
}

std::vector<RoutingPlan> make_merging_plans(const MergeTree& tree, PartyId sender, Payload message,
                                            PartyId recipient) {
  std::vector<RoutingPlan> plans;
  for (const auto& leaf : tree.leaf_labels()) {
    RoutingPlan plan;
    plan.message = message;
    plan.origin = sender;
    for (const auto& label : MergeTree::chain(leaf)) {
      const auto& node = tree.nodes.at(label);
      plan.path.insert(plan.path.end(), node.parties.begin(), node.parties.end());
      plan.nonces.insert(plan.nonces.end(), node.nonces.begin(), node.nonces.end());
    }
    plan.path.push_back(recipient);
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::vector<HandleId> form_merging_onions(OnionRegistry& registry, PartyId sender, Payload message,
                                          PartyId recipient, const PitreeParams& params, Rng& rng) {
  const MergeTree tree = build_merge_tree(params, rng);
  std::vector<HandleId> handles;
  for (auto& plan : make_merging_plans(tree, sender, message, recipient)) {
    handles.push_back(registry.form_onion(std::move(plan)));
  }
  return handles;
}

}  // namespace onionsim
