#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "onionsim/transcript.hpp"

namespace onionsim {

// One onion on the wire in the current round.
struct Link {
  PartyId sender;
  PartyId receiver;
  HandleId handle;
};

// What a corrupted party learned by peeling.
struct PeelObservation {
  std::uint32_t round = 0;
  PartyId holder;
  HandleId handle;
  std::optional<PartyId> next;  // absent on final delivery
  Nonce nonce;
  std::optional<Payload> message;
};

// Realistic adversarial view: corruption set, every link's metadata, what
// corrupted parties saw when peeling, and (at the end) received counts.
// Holds no origins, plans or honest-party state.
struct AdversaryView {
  std::uint32_t n_parties = 0;
  std::vector<PartyId> corrupted;      // sorted
  std::vector<bool> corrupted_mask;    // by slot
  std::vector<std::vector<Link>> links;  // links[r - 1] = round r
  std::vector<PeelObservation> peels;
  std::vector<std::uint32_t> received_counts;  // filled after the last round

  bool is_corrupted(PartyId p) const { return corrupted_mask.at(p.slot()); }
  std::span<const Link> round_links(std::uint32_t round) const { return links.at(round - 1); }
};

// Ground truth about an in-flight onion, offered to oracle-mode strategies.
struct OracleOnion {
  std::size_t link_index = 0;
  std::uint64_t onion_id = 0;
  OnionKind kind = OnionKind::Merging;
  PartyId origin;
  bool indistinguishable = false;
  std::optional<std::size_t> partner_link;  // mergeable-pair partner on this round's wire
  std::span<const PartyId> upcoming;         // receiver of this round first
};

struct OracleView {
  std::uint32_t epoch = 0;
  bool epoch_start = false;
  std::uint32_t mixing_epochs = 0;
  std::uint32_t total_epochs = 0;
  std::uint32_t d = 1;
  std::vector<OracleOnion> onions;  // one per link, same order

  bool is_singleton(const OracleOnion& o) const { return o.indistinguishable && !o.partner_link; }
};

// Drop policy. decide() returns indices into view.round_links(round) to
// drop; only links whose receiver is corrupted may be named.
class AdversaryStrategy {
 public:
  virtual ~AdversaryStrategy() = default;
  virtual std::string name() const = 0;
  virtual StrategyMode mode() const { return StrategyMode::Realistic; }
  // Called once with the party count and adversary seed, before corruption.
  virtual void prepare(std::uint32_t /*n_parties*/, std::uint64_t /*adversary_seed*/) {}
  // Parties the corruption sampler must leave honest.
  virtual std::vector<PartyId> must_stay_honest() const { return {}; }
  virtual void begin_run(const AdversaryView& /*view*/, const ProtocolParams& /*params*/) {}
  virtual std::vector<std::size_t> decide(const AdversaryView& view, std::uint32_t round,
                                          const OracleView* oracle) = 0;
  virtual void end_run(const AdversaryView& /*view*/) {}
  virtual AdversaryReport report() const { return {}; }
};

class PassiveStrategy final : public AdversaryStrategy {
 public:
  std::string name() const override { return "passive"; }
  std::vector<std::size_t> decide(const AdversaryView&, std::uint32_t, const OracleView*) override { return {}; }
};

// Drops every onion the target sends straight to a corrupted party.
class IsolatingStrategy : public AdversaryStrategy {
 public:
  explicit IsolatingStrategy(PartyId target) : target_(target) {}
  std::string name() const override { return "isolating"; }
  std::vector<PartyId> must_stay_honest() const override { return {target_}; }
  void begin_run(const AdversaryView& view, const ProtocolParams& params) override;
  std::vector<std::size_t> decide(const AdversaryView& view, std::uint32_t round, const OracleView*) override;
  AdversaryReport report() const override;
  PartyId target() const { return target_; }
  bool isolated() const { return sent_ == dropped_; }

 protected:
  PartyId target_;
  std::uint64_t sent_ = 0;
  std::uint64_t dropped_ = 0;
};

// Picks the target uniformly from the adversary seed, then isolates it.
class UniformIsolatingStrategy final : public IsolatingStrategy {
 public:
  UniformIsolatingStrategy() : IsolatingStrategy(PartyId{1}) {}
  std::string name() const override { return "uniform_isolating"; }
  void prepare(std::uint32_t n_parties, std::uint64_t adversary_seed) override;
};

PartyId sample_isolation_target(std::uint32_t n_parties, std::uint64_t adversary_seed);

// Round 1: drop the target's onions arriving at corrupted parties.
// Round 2: drop every onion arriving at a corrupted party from any party
// that received one of the target's round-1 onions. This over-approximates
// "could have been formed by the target".
class SenderTargetingStrategy final : public AdversaryStrategy {
 public:
  explicit SenderTargetingStrategy(PartyId target) : target_(target) {}
  std::string name() const override { return "sender_targeting"; }
  std::vector<PartyId> must_stay_honest() const override { return {target_}; }
  void begin_run(const AdversaryView& view, const ProtocolParams& params) override;
  std::vector<std::size_t> decide(const AdversaryView& view, std::uint32_t round, const OracleView*) override;
  AdversaryReport report() const override;

 private:
  PartyId target_;
  std::unordered_set<std::uint32_t> first_hops_;
  std::uint64_t drops_ = 0;
};

// Oracle mode. At the start of epoch l, chooses round(alpha_l * |I|)
// singletons uniformly among those whose next d hops pass through a
// corrupted party (I being all in-flight singletons), then drops each one
// the first time it reaches a corrupted party.
class SingletonDroppingStrategy final : public AdversaryStrategy {
 public:
  explicit SingletonDroppingStrategy(std::vector<double> alpha_schedule);
  std::string name() const override { return "singleton_dropping"; }
  StrategyMode mode() const override { return StrategyMode::Oracle; }
  void prepare(std::uint32_t n_parties, std::uint64_t adversary_seed) override;
  void begin_run(const AdversaryView& view, const ProtocolParams& params) override;
  std::vector<std::size_t> decide(const AdversaryView& view, std::uint32_t round, const OracleView* oracle) override;
  AdversaryReport report() const override;
  const std::vector<double>& schedule() const { return alpha_; }

 private:
  std::vector<double> alpha_;
  Rng rng_{0};
  std::unordered_set<std::uint64_t> marked_;
  AdversaryReport report_;
};

// Oracle mode. In the first round of each merging-phase epoch, drops both
// members of every mergeable pair whose members both arrive at corrupted
// parties.
class PairDroppingStrategy final : public AdversaryStrategy {
 public:
  std::string name() const override { return "pair_dropping"; }
  StrategyMode mode() const override { return StrategyMode::Oracle; }
  std::vector<std::size_t> decide(const AdversaryView& view, std::uint32_t round, const OracleView* oracle) override;
  AdversaryReport report() const override;

 private:
  std::uint64_t drops_ = 0;
};

// Builds a strategy by name: passive, isolating, uniform_isolating,
// sender_targeting, singleton_dropping, pair_dropping. `target` is needed by
// the targeted strategies, `schedule` by singleton_dropping.
std::unique_ptr<AdversaryStrategy> make_strategy(const std::string& name, std::optional<PartyId> target,
                                                 std::vector<double> schedule = {});

}  // namespace onionsim
