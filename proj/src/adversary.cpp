#include "onionsim/adversary.hpp"

#include <algorithm>
#include <cmath>

namespace onionsim {

void IsolatingStrategy::begin_run(const AdversaryView&, const ProtocolParams&) {
  sent_ = 0;
  dropped_ = 0;
}

std::vector<std::size_t> IsolatingStrategy::decide(const AdversaryView& view, std::uint32_t round,
                                                   const OracleView*) {
  std::vector<std::size_t> out;
  const auto links = view.round_links(round);
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (links[i].sender != target_) continue;
    ++sent_;
    if (view.is_corrupted(links[i].receiver)) {
      out.push_back(i);
      ++dropped_;
    }
  }
  return out;
}

AdversaryReport IsolatingStrategy::report() const {
  AdversaryReport r;
  r.target = target_;
  r.isolated = isolated();
  r.drops = dropped_;
  return r;
}

PartyId sample_isolation_target(std::uint32_t n_parties, std::uint64_t adversary_seed) {
  Rng rng(split_seed(adversary_seed, 1));
  return PartyId{static_cast<std::uint32_t>(rng.uniform(n_parties)) + 1};
}

void UniformIsolatingStrategy::prepare(std::uint32_t n_parties, std::uint64_t adversary_seed) {
  target_ = sample_isolation_target(n_parties, adversary_seed);
}

void SenderTargetingStrategy::begin_run(const AdversaryView&, const ProtocolParams&) {
  first_hops_.clear();
  drops_ = 0;
}

std::vector<std::size_t> SenderTargetingStrategy::decide(const AdversaryView& view, std::uint32_t round,
                                                         const OracleView*) {
  std::vector<std::size_t> out;
  const auto links = view.round_links(round);
  if (round == 1) {
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (links[i].sender != target_) continue;
      first_hops_.insert(links[i].receiver.value());
      if (view.is_corrupted(links[i].receiver)) out.push_back(i);
    }
  } else if (round == 2) {
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (first_hops_.contains(links[i].sender.value()) && view.is_corrupted(links[i].receiver)) out.push_back(i);
    }
  }
  drops_ += out.size();
  return out;
}

AdversaryReport SenderTargetingStrategy::report() const {
  AdversaryReport r;
  r.target = target_;
  r.drops = drops_;
  return r;
}

SingletonDroppingStrategy::SingletonDroppingStrategy(std::vector<double> alpha_schedule)
    : alpha_(std::move(alpha_schedule)) {
  for (double a : alpha_) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("singleton-dropping fractions must lie in [0, 1]");
  }
}

void SingletonDroppingStrategy::prepare(std::uint32_t, std::uint64_t adversary_seed) {
  rng_ = Rng(split_seed(adversary_seed, 2));
}

void SingletonDroppingStrategy::begin_run(const AdversaryView&, const ProtocolParams& params) {
  if (alpha_.size() != params.total_epochs()) {
    throw ConfigError("singleton-dropping schedule has " + std::to_string(alpha_.size()) + " entries but the run has " +
                      std::to_string(params.total_epochs()) + " epochs");
  }
  marked_.clear();
  report_ = AdversaryReport{};
  report_.realized_alpha.assign(alpha_.size(), 0.0);
  report_.singletons_at_start.assign(alpha_.size(), 0);
}

std::vector<std::size_t> SingletonDroppingStrategy::decide(const AdversaryView& view, std::uint32_t round,
                                                           const OracleView* oracle) {
  if (oracle == nullptr) throw SimulationError("singleton_dropping needs the oracle view");
  if (oracle->epoch_start && oracle->epoch >= 1 && oracle->epoch <= alpha_.size()) {
    std::vector<std::uint64_t> droppable;
    std::uint32_t singletons = 0;
    for (const auto& o : oracle->onions) {
      if (!oracle->is_singleton(o)) continue;
      ++singletons;
      const auto window = o.upcoming.first(std::min<std::size_t>(oracle->d, o.upcoming.size()));
      if (std::any_of(window.begin(), window.end(), [&](PartyId p) { return view.is_corrupted(p); })) {
        droppable.push_back(o.onion_id);
      }
    }
    const double alpha = alpha_[oracle->epoch - 1];
    const auto want = static_cast<std::size_t>(std::llround(alpha * singletons));
    const std::size_t take = std::min(want, droppable.size());
    for (auto idx : rng_.sample_without_replacement(static_cast<std::uint32_t>(droppable.size()),
                                                    static_cast<std::uint32_t>(take))) {
      marked_.insert(droppable[idx]);
    }
    report_.singletons_at_start[oracle->epoch - 1] = singletons;
    report_.realized_alpha[oracle->epoch - 1] = singletons ? static_cast<double>(take) / singletons : 0.0;
  }
  std::vector<std::size_t> out;
  const auto links = view.round_links(round);
  for (const auto& o : oracle->onions) {
    if (!view.is_corrupted(links[o.link_index].receiver)) continue;
    if (marked_.erase(o.onion_id) > 0) out.push_back(o.link_index);
  }
  report_.drops += out.size();
  return out;
}

AdversaryReport SingletonDroppingStrategy::report() const { return report_; }

std::vector<std::size_t> PairDroppingStrategy::decide(const AdversaryView& view, std::uint32_t round,
                                                      const OracleView* oracle) {
  if (oracle == nullptr) throw SimulationError("pair_dropping needs the oracle view");
  std::vector<std::size_t> out;
  if (!oracle->epoch_start || oracle->epoch <= oracle->mixing_epochs) return out;
  const auto links = view.round_links(round);
  for (const auto& o : oracle->onions) {
    if (!o.partner_link) continue;
    if (view.is_corrupted(links[o.link_index].receiver) && view.is_corrupted(links[*o.partner_link].receiver)) {
      out.push_back(o.link_index);
    }
  }
  drops_ += out.size();
  return out;
}

AdversaryReport PairDroppingStrategy::report() const {
  AdversaryReport r;
  r.drops = drops_;
  return r;
}

std::unique_ptr<AdversaryStrategy> make_strategy(const std::string& name, std::optional<PartyId> target,
                                                 std::vector<double> schedule) {
  auto need_target = [&]() {
    if (!target) throw ConfigError("adversary '" + name + "' needs a target party");
    return *target;
  };
  if (name == "passive") return std::make_unique<PassiveStrategy>();
  if (name == "isolating") return std::make_unique<IsolatingStrategy>(need_target());
  if (name == "uniform_isolating") return std::make_unique<UniformIsolatingStrategy>();
  if (name == "sender_targeting") return std::make_unique<SenderTargetingStrategy>(need_target());
  if (name == "singleton_dropping") return std::make_unique<SingletonDroppingStrategy>(std::move(schedule));
  if (name == "pair_dropping") return std::make_unique<PairDroppingStrategy>();
  throw ConfigError("unknown adversary '" + name + "'");
}

}  // namespace onionsim
