#include "onionsim/butterfly.hpp"

#include <bit>

namespace onionsim {

ButterflyConfig ButterflyConfig::make(std::uint32_t n_parties, std::uint32_t iterations) {
  if (n_parties < 2 || !std::has_single_bit(n_parties)) {
    throw ConfigError("butterfly topology needs N a power of two >= 2, got " + std::to_string(n_parties));
  }
  if (iterations < 1) throw ConfigError("butterfly iterations D must be at least 1");
  ButterflyConfig c;
  c.n_parties = n_parties;
  c.stages = static_cast<std::uint32_t>(std::countr_zero(n_parties)) + 1;
  c.iterations = iterations;
  c.mixing_epochs = c.stages * iterations;
  return c;
}

std::uint32_t ButterflyConfig::stage_bit(std::uint32_t stage) const {
  if (stage < 1) throw ConfigError("butterfly stage must be >= 1");
  return ((stage - 1) % (stages - 1)) + 1;
}

double PibflyParams::default_ckpt_freq() const {
  return static_cast<double>(tree.chi) /
         (static_cast<double>(tree.n_parties) * (butterfly.mixing_epochs + tree.epochs()));
}

PibflyParams PibflyParams::with_defaults(std::uint32_t n, std::uint32_t lambda, double kappa, std::uint32_t chi,
                                         std::uint32_t d, std::uint32_t iterations) {
  PibflyParams p;
  p.tree = PitreeParams::with_defaults(n, lambda, kappa, chi, d);
  p.butterfly = ButterflyConfig::make(n, iterations);
  p.tree.ckpt_freq = p.default_ckpt_freq();
  return p;
}

std::pair<PartyId, PartyId> subnet_of(PartyId i, std::uint32_t stage, const ButterflyConfig& config) {
  if (i.value() < 1 || i.value() > config.n_parties) throw ConfigError("subnet_of: party out of range");
  const std::uint32_t bits = config.stages - 1;
  const std::uint32_t mask = 1u << (bits - config.stage_bit(stage));
  return {i, PartyId{((i.value() - 1) ^ mask) + 1}};
}

namespace {
PartyId pick(std::pair<PartyId, PartyId> subnet, Rng& rng) { return rng.uniform(2) == 0 ? subnet.first : subnet.second; }
}  // namespace

std::vector<PartyId> random_walk(const ButterflyConfig& config, std::optional<WalkPin> pin, Rng& rng) {
  const std::uint32_t L = config.mixing_epochs;
  std::vector<PartyId> walk(L);
  std::uint32_t start = 1;
  if (pin) {
    if (pin->epoch < 1 || pin->epoch > L) {
      throw ConfigError("walk pin epoch " + std::to_string(pin->epoch) + " outside [1, " + std::to_string(L) + "]");
    }
    start = pin->epoch;
    walk[start - 1] = pin->party;
    // w_t is uniform over subnet_of(w_(t+1), t+1), the same pair that
    // contains w_(t+1) in the forward direction.
    for (std::uint32_t t = start - 1; t >= 1; --t) walk[t - 1] = pick(subnet_of(walk[t], t + 1, config), rng);
  } else {
    walk[0] = random_party(config.n_parties, rng);
  }
  for (std::uint32_t t = start; t < L; ++t) walk[t] = pick(subnet_of(walk[t - 1], t + 1, config), rng);
  return walk;
}

RoutingPlan convert_plan(const RoutingPlan& base, std::optional<CheckpointDatum> checkpoint,
                         const ButterflyConfig& config, std::uint32_t d, Rng& rng) {
  if (d < 1 || base.path.size() < d + 1 || (base.path.size() - 1) % d != 0 ||
      base.nonces.size() + 1 != base.path.size()) {
    throw ConfigError("convert_plan: base plan is not of length h*d + 1");
  }
  const std::uint32_t L = config.mixing_epochs;
  if (checkpoint && (checkpoint->epoch < 1 || checkpoint->epoch > L)) {
    throw ConfigError("convert_plan: mixing checkpoint epoch outside [1, L]");
  }
  std::optional<WalkPin> pin;
  if (checkpoint) pin = WalkPin{checkpoint->epoch, checkpoint->verifier};
  const auto walk = random_walk(config, pin, rng);

  RoutingPlan out;
  out.message = base.message;
  out.origin = base.origin;
  out.path.reserve(static_cast<std::size_t>(L) * d + base.path.size() - d);
  for (std::uint32_t t = 1; t <= L; ++t) {
    const auto subnet = subnet_of(walk[t - 1], t, config);
    for (std::uint32_t i = 1; i < d; ++i) out.path.push_back(pick(subnet, rng));
    out.path.push_back(walk[t - 1]);
  }
  out.nonces.assign(static_cast<std::size_t>(L) * d, Nonce::empty());
  if (checkpoint) out.nonces[static_cast<std::size_t>(checkpoint->epoch) * d - 1] = checkpoint->checkpoint;
  out.path.insert(out.path.end(), base.path.begin() + d, base.path.end());
  out.nonces.insert(out.nonces.end(), base.nonces.begin() + d, base.nonces.end());
  return out;
}

RoutingPlan make_pibfly_checkpoint_plan(PartyId owner, const CheckpointDatum& datum, const PibflyParams& params,
                                        Rng& rng) {
  const std::uint32_t L = params.butterfly.mixing_epochs;
  if (datum.epoch < 1 || datum.epoch > params.total_epochs()) {
    throw ConfigError("checkpoint epoch " + std::to_string(datum.epoch) + " outside [1, " +
                      std::to_string(params.total_epochs()) + "]");
  }
  if (datum.epoch <= L) {
    const RoutingPlan base = make_dummy_plan(owner, params.tree, rng);
    return convert_plan(base, datum, params.butterfly, params.tree.d, rng);
  }
  // Butterfly epoch l > L lands on tree epoch l - L + 1 after conversion.
  CheckpointDatum shifted = datum;
  shifted.epoch = datum.epoch - L + 1;
  const RoutingPlan base = make_checkpoint_plan(owner, shifted, params.tree, rng);
  return convert_plan(base, std::nullopt, params.butterfly, params.tree.d, rng);
}

std::vector<RoutingPlan> make_pibfly_merging_plans(PartyId sender, Payload message, PartyId recipient,
                                                   const PibflyParams& params, Rng& rng) {
  const MergeTree tree = build_merge_tree(params.tree, rng);
  std::vector<RoutingPlan> out;
  for (const auto& plan : make_merging_plans(tree, sender, message, recipient)) {
    out.push_back(convert_plan(plan, std::nullopt, params.butterfly, params.tree.d, rng));
  }
  return out;
}

}  // namespace onionsim
