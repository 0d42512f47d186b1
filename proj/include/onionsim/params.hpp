#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "onionsim/butterfly.hpp"
#include "onionsim/keys.hpp"
#include "onionsim/pitree.hpp"

namespace onionsim {

enum class Protocol { Pitree, Pibfly, Strawman };

std::string to_string(Protocol p);
Protocol protocol_from_string(std::string_view name);

// Exact fraction num/den with den > 0.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  // Decimal value rounded to a multiple of 1e-6.
  static Rational from_decimal(double value);
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Everything a run needs besides the input, the adversary and the seed.
struct ProtocolParams {
  Protocol protocol = Protocol::Pibfly;
  std::uint32_t n_parties = 16;
  std::uint32_t lambda = 16;
  double kappa = 0.25;
  std::uint32_t chi = 4;
  std::uint32_t d = 4;
  std::uint32_t iterations = 4;  // D
  std::optional<double> ckpt_freq;
  std::optional<double> threshold;  // tree protocol T; defaults to pitree_threshold(0.1, kappa, 0.1, lambda)
  std::optional<std::uint32_t> abort_fanout;  // defaults to chi
  std::uint32_t strawman_hops = 0;
  PrfMode prf_mode = PrfMode::Keyed;
  double epsilon = 1.0;  // partway point R = L + ceil(h / epsilon)

  void validate() const;

  PitreeParams pitree() const;
  PibflyParams pibfly() const;

  std::uint32_t tree_epochs() const;     // h
  std::uint32_t mixing_epochs() const;   // L, zero outside the butterfly protocol
  std::uint32_t total_epochs() const;    // executed epochs; zero for the strawman
  std::uint32_t total_rounds() const;    // total_epochs * d + 1, or hops + 1
  std::uint32_t corrupted_count() const; // floor(kappa N)
  std::uint32_t fanout() const { return abort_fanout.value_or(chi); }
  double effective_ckpt_freq() const;
  // min(L + ceil(h / epsilon), total_epochs).
  std::uint32_t partway_epoch() const;

  // Rounds at which sibling merging onions rendezvous, one per internal tree
  // level, in increasing order.
  std::vector<std::uint32_t> merge_rounds() const;

  // Butterfly: W / 3 with W = (1 - kappa) chi / (n D + h), exact.
  Rational pibfly_abort_threshold() const;
  // Butterfly aborts iff missing > W/3; tree protocol iff missing >= T.
  bool diagnostic_aborts(std::uint32_t missing) const;
};

// Strawman baseline: one onion per message through `alpha_hops` uniform
// intermediaries; no checkpoints, merging or aborts.
ProtocolParams make_strawman_protocol(std::uint32_t n_parties, std::uint32_t alpha_hops, double kappa);

}  // namespace onionsim
