#include "onionsim/params.hpp"

#include <bit>
#include <cmath>

namespace onionsim {

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::Pitree: return "pitree";
    case Protocol::Pibfly: return "pibfly";
    case Protocol::Strawman: return "strawman";
  }
  return "unknown";
}

Protocol protocol_from_string(std::string_view name) {
  if (name == "pitree") return Protocol::Pitree;
  if (name == "pibfly") return Protocol::Pibfly;
  if (name == "strawman") return Protocol::Strawman;
  throw ConfigError("unknown protocol '" + std::string(name) + "'");
}

Rational Rational::from_decimal(double value) {
  return Rational{static_cast<std::int64_t>(std::llround(value * 1e6)), 1'000'000};
}

void ProtocolParams::validate() const {
  if (n_parties < 2) throw ConfigError("need at least 2 parties, got " + std::to_string(n_parties));
  if (!(kappa >= 0.0 && kappa < 0.5)) throw ConfigError("kappa must lie in [0, 0.5)");
  if (lambda < 2) throw ConfigError("lambda must be at least 2");
  if (protocol == Protocol::Strawman) return;
  if (chi == 0 || !std::has_single_bit(chi)) throw ConfigError("chi must be a power of two, got " + std::to_string(chi));
  if (d < 1) throw ConfigError("d must be at least 1");
  if (ckpt_freq && !(*ckpt_freq >= 0.0 && *ckpt_freq <= 1.0)) throw ConfigError("ckpt_freq must lie in [0, 1]");
  if (threshold && !(*threshold > 0.0)) throw ConfigError("threshold T must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (protocol == Protocol::Pibfly) {
    ButterflyConfig::make(n_parties, iterations);
  }
  pitree().validate();
}

PitreeParams ProtocolParams::pitree() const {
  PitreeParams p = PitreeParams::with_defaults(n_parties, lambda, kappa, chi, d);
  if (threshold) p.threshold = *threshold;
  p.ckpt_freq = effective_ckpt_freq();
  return p;
}

PibflyParams ProtocolParams::pibfly() const {
  PibflyParams p;
  p.tree = pitree();
  p.butterfly = ButterflyConfig::make(n_parties, iterations);
  return p;
}

std::uint32_t ProtocolParams::tree_epochs() const {
  return static_cast<std::uint32_t>(std::countr_zero(std::max(chi, 1u))) + 1;
}

std::uint32_t ProtocolParams::mixing_epochs() const {
  if (protocol != Protocol::Pibfly) return 0;
  return (static_cast<std::uint32_t>(std::countr_zero(n_parties)) + 1) * iterations;
}

std::uint32_t ProtocolParams::total_epochs() const {
  switch (protocol) {
    case Protocol::Pitree: return tree_epochs();
    case Protocol::Pibfly: return mixing_epochs() + tree_epochs() - 1;
    case Protocol::Strawman: return 0;
  }
  return 0;
}

std::uint32_t ProtocolParams::total_rounds() const {
  if (protocol == Protocol::Strawman) return strawman_hops + 1;
  return total_epochs() * d + 1;
}

std::uint32_t ProtocolParams::corrupted_count() const {
  return static_cast<std::uint32_t>(std::floor(kappa * n_parties + 1e-9));
}

double ProtocolParams::effective_ckpt_freq() const {
  if (ckpt_freq) return *ckpt_freq;
  const double base = static_cast<double>(chi) / static_cast<double>(n_parties);
  if (protocol == Protocol::Pibfly) return base / (mixing_epochs() + tree_epochs());
  return base / tree_epochs();
}

std::uint32_t ProtocolParams::partway_epoch() const {
  const auto extra = static_cast<std::uint32_t>(std::ceil(tree_epochs() / epsilon));
  return std::min(mixing_epochs() + extra, total_epochs());
}

std::vector<std::uint32_t> ProtocolParams::merge_rounds() const {
  std::vector<std::uint32_t> out;
  const std::uint32_t h = tree_epochs();
  if (protocol == Protocol::Pitree) {
    for (std::uint32_t k = 1; k < h; ++k) out.push_back(k * d + 1);
  } else if (protocol == Protocol::Pibfly) {
    const std::uint32_t L = mixing_epochs();
    for (std::uint32_t k = 0; k + 1 < h; ++k) out.push_back((L + k) * d + 1);
  }
  return out;
}

Rational ProtocolParams::pibfly_abort_threshold() const {
  const Rational k = Rational::from_decimal(kappa);
  const std::int64_t stages = static_cast<std::int64_t>(std::countr_zero(n_parties)) + 1;
  const std::int64_t denom = 3 * (stages * iterations + tree_epochs());
  return Rational{(k.den - k.num) * chi, k.den * denom};
}

bool ProtocolParams::diagnostic_aborts(std::uint32_t missing) const {
  if (protocol == Protocol::Pibfly) {
    const Rational t = pibfly_abort_threshold();
    return static_cast<std::int64_t>(missing) * t.den > t.num;
  }
  return static_cast<double>(missing) >= pitree().threshold;
}

ProtocolParams make_strawman_protocol(std::uint32_t n_parties, std::uint32_t alpha_hops, double kappa) {
  ProtocolParams p;
  p.protocol = Protocol::Strawman;
  p.n_parties = n_parties;
  p.kappa = kappa;
  p.strawman_hops = alpha_hops;
  p.chi = 1;
  p.d = 1;
  return p;
}

}  // namespace onionsim
