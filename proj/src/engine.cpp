#include "onionsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

namespace onionsim {

SimpleInput SimpleInput::random(std::uint32_t n_parties, std::uint64_t seed) {
  SimpleInput in;
  for (std::uint32_t i = 1; i <= n_parties; ++i) {
    in.recipients.push_back(PartyId{i});
    in.messages.push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(std::span<PartyId>(in.recipients));
  return in;
}

SimpleInput SimpleInput::from_permutation(std::vector<PartyId> recipients) {
  SimpleInput in;
  in.recipients = std::move(recipients);
  for (std::uint32_t i = 1; i <= in.recipients.size(); ++i) in.messages.push_back(i);
  in.validate(in.size());
  return in;
}

void SimpleInput::validate(std::uint32_t n_parties) const {
  if (recipients.size() != n_parties) {
    throw ConfigError("input has " + std::to_string(recipients.size()) + " senders, expected " +
                      std::to_string(n_parties));
  }
  std::vector<bool> seen(n_parties, false);
  for (PartyId r : recipients) {
    if (r.value() < 1 || r.value() > n_parties) throw ConfigError("input recipient out of range");
    if (seen[r.slot()]) throw ConfigError("input recipients are not a permutation");
    seen[r.slot()] = true;
  }
  if (messages.size() != n_parties) throw ConfigError("input needs one message per sender");
  std::set<std::uint64_t> distinct(messages.begin(), messages.end());
  if (distinct.size() != messages.size()) throw ConfigError("input messages are not distinct");
}

std::vector<MergeEvent> merge_step(PartyId party, std::uint32_t round, std::vector<HeldOnion>& held,
                                   TieBreak tie_break) {
  std::sort(held.begin(), held.end(), [](const HeldOnion& a, const HeldOnion& b) { return a.handle < b.handle; });
  std::map<Nonce, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < held.size(); ++i) {
    if (!held[i].nonce.is_empty()) groups[held[i].nonce].push_back(i);
  }
  std::vector<MergeEvent> events;
  std::vector<bool> gone(held.size(), false);
  for (const auto& [nonce, members] : groups) {
    if (members.size() < 2) continue;
    const std::size_t keep = tie_break == TieBreak::LowestHandle ? members.front() : members.back();
    for (std::size_t idx : members) {
      if (idx == keep) continue;
      gone[idx] = true;
      events.push_back(MergeEvent{round, party, nonce, held[keep].handle, held[idx].handle, held[keep].onion_id,
                                  held[idx].onion_id});
    }
  }
  std::vector<HeldOnion> kept;
  kept.reserve(held.size());
  for (std::size_t i = 0; i < held.size(); ++i) {
    if (!gone[i]) kept.push_back(held[i]);
  }
  held = std::move(kept);
  return events;
}

DiagnosticEvent diagnostic_check(PartyId party, std::uint32_t round, std::uint32_t epoch,
                                 const std::unordered_set<std::uint64_t>& expected,
                                 const std::unordered_set<std::uint64_t>& observed, const ProtocolParams& params) {
  std::uint32_t missing = 0;
  for (auto c : expected) {
    if (!observed.contains(c)) ++missing;
  }
  return DiagnosticEvent{round, party, epoch, static_cast<std::uint32_t>(expected.size()), missing,
                         params.diagnostic_aborts(missing)};
}

std::vector<std::pair<PartyId, HandleId>> abort_broadcast(OnionRegistry& registry, PartyId sender,
                                                          std::uint32_t fanout, std::uint32_t n_parties, Rng& rng) {
  std::vector<std::pair<PartyId, HandleId>> out;
  for (std::uint32_t i = 0; i < fanout; ++i) {
    const PartyId to = random_party(n_parties, rng);
    out.emplace_back(to, registry.form_onion(RoutingPlan{Payload::abort(), {to}, {}, sender}));
  }
  return out;
}

std::optional<std::uint32_t> simulate_abort_flood(std::uint32_t n_parties, double kappa, std::uint32_t fanout,
                                                  std::uint32_t max_rounds, std::uint64_t seed) {
  Rng rng(seed);
  const auto corrupt_n = static_cast<std::uint32_t>(std::floor(kappa * n_parties + 1e-9));
  std::vector<bool> corrupted(n_parties, false);
  for (auto s : rng.sample_without_replacement(n_parties, corrupt_n)) corrupted[s] = true;
  std::vector<std::uint32_t> honest;
  for (std::uint32_t s = 0; s < n_parties; ++s) {
    if (!corrupted[s]) honest.push_back(s);
  }
  if (honest.empty()) return 0;
  std::vector<bool> aborted(n_parties, false);
  aborted[honest[rng.uniform(honest.size())]] = true;
  std::uint32_t count = 1;
  for (std::uint32_t r = 1; r <= max_rounds; ++r) {
    std::vector<std::uint32_t> hit;
    for (auto s : honest) {
      if (!aborted[s]) continue;
      for (std::uint32_t k = 0; k < fanout; ++k) hit.push_back(static_cast<std::uint32_t>(rng.uniform(n_parties)));
    }
    for (auto s : hit) {
      if (!corrupted[s] && !aborted[s]) {
        aborted[s] = true;
        ++count;
      }
    }
    if (count == honest.size()) return r;
  }
  return std::nullopt;
}

namespace {

struct WireOnion {
  PartyId sender;
  PartyId receiver;
  HandleId handle;
  std::uint64_t onion_id = 0;
};

void sort_wire(std::vector<WireOnion>& wire) {
  std::sort(wire.begin(), wire.end(), [](const WireOnion& a, const WireOnion& b) {
    return std::tie(a.sender, a.handle) < std::tie(b.sender, b.handle);
  });
}

class Run {
 public:
  Run(const ProtocolParams& params, const SimpleInput& input, AdversaryStrategy& adversary, std::uint64_t seed,
      EngineOptions options)
      : p_(params),
        input_(input),
        adv_(adversary),
        options_(options),
        registry_(split_seed(seed, 2)),
        form_rng_(split_seed(seed, 1)),
        abort_rng_(split_seed(seed, 4)),
        n_(params.n_parties) {
    t_.params = params;
    t_.adversary = adversary.name();
    t_.mode = adversary.mode();
    t_.seed = seed;
    t_.rounds = params.total_rounds();
    aborted_.assign(n_, false);
    expected_.resize(n_);
    observed_.resize(n_);
    for (auto r : params.merge_rounds()) merge_positions_.push_back(r - 1);
    corrupt(split_seed(seed, 3));
    form(split_seed(seed, 0), split_seed(seed, 5));
  }

  Transcript execute() {
    for (std::uint32_t r = 1; r <= t_.rounds; ++r) round(r);
    view_.received_counts = t_.received_counts();
    adv_.end_run(view_);
    t_.report = adv_.report();
    t_.plans.reserve(registry_.formed_total());
    for (std::uint64_t id = 0; id < registry_.formed_total(); ++id) t_.plans.push_back(registry_.record(id).plan);
    return std::move(t_);
  }

 private:
  bool corrupted(PartyId p) const { return view_.corrupted_mask[p.slot()]; }
  bool honest_aborted(PartyId p) const { return !corrupted(p) && aborted_[p.slot()]; }

  void corrupt(std::uint64_t adversary_seed) {
    adv_.prepare(n_, adversary_seed);
    const auto keep = adv_.must_stay_honest();
    std::vector<PartyId> pool;
    for (std::uint32_t i = 1; i <= n_; ++i) {
      if (std::find(keep.begin(), keep.end(), PartyId{i}) == keep.end()) pool.push_back(PartyId{i});
    }
    const auto count = std::min<std::uint32_t>(p_.corrupted_count(), static_cast<std::uint32_t>(pool.size()));
    Rng rng(split_seed(adversary_seed, 0));
    view_.n_parties = n_;
    view_.corrupted_mask.assign(n_, false);
    for (auto idx : rng.sample_without_replacement(static_cast<std::uint32_t>(pool.size()), count)) {
      view_.corrupted.push_back(pool[idx]);
      view_.corrupted_mask[pool[idx].slot()] = true;
    }
    std::sort(view_.corrupted.begin(), view_.corrupted.end());
    t_.corrupted = view_.corrupted;
  }

  void add_onion(RoutingPlan plan, OnionAnnotation ann) {
    const PartyId first = plan.path.front();
    ann.origin = plan.origin;
    ann.destination = plan.path.back();
    const HandleId h = registry_.form_onion(std::move(plan));
    ann.onion_id = registry_.onion_id(h);
    t_.onions.push_back(ann);
    wire_.push_back(WireOnion{ann.origin, first, h, ann.onion_id});
  }

  void form(std::uint64_t key_seed, std::uint64_t prf_seed) {
    // The strawman forms no checkpoints and needs no keys.
    std::optional<KeyMaterial> keys;
    if (p_.protocol != Protocol::Strawman) keys = KeyMaterial::generate(n_, key_seed);
    Prf prf(p_.prf_mode, prf_seed);
    const std::uint32_t epochs = p_.total_epochs();
    const double freq = p_.effective_ckpt_freq();
    const PitreeParams tree = p_.protocol == Protocol::Strawman ? PitreeParams{} : p_.pitree();
    std::optional<PibflyParams> bfly;
    if (p_.protocol == Protocol::Pibfly) bfly = p_.pibfly();

    for (std::uint32_t i = 1; i <= n_; ++i) {
      const PartyId sender{i};
      const PartyId to = input_.recipient(sender);
      const Payload msg = input_.message(sender);
      if (p_.protocol == Protocol::Strawman) {
        RoutingPlan plan{msg, {}, std::vector<Nonce>(p_.strawman_hops, Nonce::empty()), sender};
        for (std::uint32_t k = 0; k < p_.strawman_hops; ++k) plan.path.push_back(random_party(n_, form_rng_));
        plan.path.push_back(to);
        add_onion(std::move(plan), OnionAnnotation{.kind = OnionKind::Strawman});
        continue;
      }
      std::vector<RoutingPlan> merging;
      if (bfly) {
        merging = make_pibfly_merging_plans(sender, msg, to, *bfly, form_rng_);
      } else {
        merging = make_merging_plans(build_merge_tree(tree, form_rng_), sender, msg, to);
      }
      for (std::uint32_t leaf = 0; leaf < merging.size(); ++leaf) {
        add_onion(std::move(merging[leaf]), OnionAnnotation{.kind = OnionKind::Merging, .leaf = leaf});
      }
      for (const auto& datum : gen_ckpt_data(sender, epochs, freq, *keys, prf)) {
        // The verifier expects the same nonce from this sender by symmetry.
        expected_[i - 1][datum.epoch].insert(datum.checkpoint.value());
        RoutingPlan plan = bfly ? make_pibfly_checkpoint_plan(sender, datum, *bfly, form_rng_)
                                : make_checkpoint_plan(sender, datum, tree, form_rng_);
        add_onion(std::move(plan), OnionAnnotation{.kind = OnionKind::Checkpoint,
                                                   .checkpoint_epoch = datum.epoch,
                                                   .verifier = datum.verifier});
      }
    }
    t_.formed_per_party.resize(n_);
    for (std::uint32_t i = 1; i <= n_; ++i) {
      t_.formed_per_party[i - 1] = static_cast<std::uint32_t>(registry_.formed_by(PartyId{i}));
    }
    sort_wire(wire_);
    adv_.begin_run(view_, p_);
  }

  bool indistinguishable(const OnionAnnotation& a) const {
    switch (a.kind) {
      case OnionKind::Merging:
      case OnionKind::Strawman: return !corrupted(a.origin);
      case OnionKind::Checkpoint: return !corrupted(a.origin) && !corrupted(a.verifier);
      case OnionKind::Abort: return false;
    }
    return false;
  }

  OracleView oracle_view(std::uint32_t r) const {
    OracleView ov;
    ov.d = p_.protocol == Protocol::Strawman ? 1 : p_.d;
    ov.epoch = (r - 1) / ov.d + 1;
    ov.epoch_start = (r - 1) % ov.d == 0;
    ov.mixing_epochs = p_.mixing_epochs();
    ov.total_epochs = p_.total_epochs();
    std::map<std::tuple<std::uint32_t, std::size_t, std::uint32_t, std::uint64_t>, std::vector<std::size_t>> pairs;
    for (std::size_t i = 0; i < wire_.size(); ++i) {
      const auto& w = wire_[i];
      const OnionRecord* rec = registry_.find(w.handle);
      const auto& ann = t_.onions[w.onion_id];
      OracleOnion o{i, w.onion_id, ann.kind, ann.origin, indistinguishable(ann), std::nullopt,
                    rec->remaining_path()};
      if (ann.kind == OnionKind::Merging && o.indistinguishable) {
        auto pos = std::lower_bound(merge_positions_.begin(), merge_positions_.end(), rec->hop_index);
        if (pos != merge_positions_.end()) {
          pairs[{ann.origin.value(), *pos, rec->plan.path[*pos].value(), rec->plan.nonces[*pos].value()}].push_back(i);
        }
      }
      ov.onions.push_back(o);
    }
    for (const auto& [key, members] : pairs) {
      if (members.size() != 2) continue;
      ov.onions[members[0]].partner_link = members[1];
      ov.onions[members[1]].partner_link = members[0];
    }
    return ov;
  }

  std::vector<bool> adversary_drops(std::uint32_t r) {
    std::vector<Link> links;
    links.reserve(wire_.size());
    for (const auto& w : wire_) links.push_back(Link{w.sender, w.receiver, w.handle});
    view_.links.push_back(std::move(links));
    std::optional<OracleView> ov;
    if (adv_.mode() == StrategyMode::Oracle) ov = oracle_view(r);
    const auto picks = adv_.decide(view_, r, ov ? &*ov : nullptr);
    std::vector<bool> dropped(wire_.size(), false);
    for (auto idx : picks) {
      if (idx >= wire_.size()) throw SimulationError("adversary named a link that does not exist");
      if (!corrupted(wire_[idx].receiver)) {
        throw SimulationError("adversary tried to drop an onion between honest parties");
      }
      if (dropped[idx]) throw SimulationError("adversary dropped the same onion twice");
      dropped[idx] = true;
    }
    return dropped;
  }

  void round(std::uint32_t r) {
    for (const auto& w : wire_) t_.transmissions.push_back(Transmission{r, w.sender, w.receiver, w.handle, w.onion_id});
    const auto dropped = adversary_drops(r);

    std::vector<std::vector<HeldOnion>> held(n_);
    std::vector<PartyId> hit_by_abort;
    for (std::size_t i = 0; i < wire_.size(); ++i) {
      const auto& w = wire_[i];
      if (dropped[i]) {
        t_.drops.push_back(DropEvent{r, w.sender, w.receiver, w.handle, w.onion_id});
        registry_.retire(w.handle);
        continue;
      }
      const PeelResult res = registry_.proc_onion(w.receiver, w.handle);
      if (const auto* relay = std::get_if<Relay>(&res)) {
        held[w.receiver.slot()].push_back(HeldOnion{relay->handle, relay->next, relay->nonce, w.onion_id});
        if (corrupted(w.receiver)) {
          view_.peels.push_back(PeelObservation{r, w.receiver, w.handle, relay->next, relay->nonce, std::nullopt});
        }
      } else if (const auto* done = std::get_if<Deliver>(&res)) {
        t_.deliveries.push_back(DeliveryEvent{r, w.receiver, done->message, w.onion_id});
        if (corrupted(w.receiver)) {
          view_.peels.push_back(PeelObservation{r, w.receiver, w.handle, std::nullopt, Nonce::empty(), done->message});
        } else if (done->message.kind == PayloadKind::Abort && !aborted_[w.receiver.slot()]) {
          hit_by_abort.push_back(w.receiver);
        }
      } else {
        throw SimulationError("onion " + std::to_string(w.onion_id) + " reached a party off its path");
      }
    }
    std::sort(hit_by_abort.begin(), hit_by_abort.end());
    hit_by_abort.erase(std::unique(hit_by_abort.begin(), hit_by_abort.end()), hit_by_abort.end());
    for (PartyId p : hit_by_abort) {
      aborted_[p.slot()] = true;
      t_.aborts.push_back(AbortEvent{r, p, AbortCause::AbortMessage});
    }

    const bool diagnostic = p_.protocol != Protocol::Strawman && r % p_.d == 0 && r / p_.d <= p_.total_epochs();
    const std::uint32_t epoch = diagnostic ? r / p_.d : 0;
    for (std::uint32_t s = 0; s < n_; ++s) {
      const PartyId party{s + 1};
      if (honest_aborted(party)) continue;
      if (diagnostic && !corrupted(party)) {
        const auto& want = expected_[s][epoch];
        for (const auto& h : held[s]) {
          if (want.contains(h.nonce.value())) observed_[s][epoch].insert(h.nonce.value());
        }
      }
      for (auto& ev : merge_step(party, r, held[s], options_.tie_break)) {
        registry_.retire(ev.dropped);
        t_.merges.push_back(ev);
      }
    }
    if (diagnostic) {
      for (std::uint32_t s = 0; s < n_; ++s) {
        const PartyId party{s + 1};
        if (corrupted(party) || aborted_[s]) continue;
        auto ev = diagnostic_check(party, r, epoch, expected_[s][epoch], observed_[s][epoch], p_);
        t_.diagnostics.push_back(ev);
        if (ev.abort) {
          aborted_[s] = true;
          t_.aborts.push_back(AbortEvent{r, party, AbortCause::Diagnostic});
        }
      }
    }

    wire_.clear();
    for (std::uint32_t s = 0; s < n_; ++s) {
      const PartyId party{s + 1};
      for (const auto& h : held[s]) {
        if (honest_aborted(party)) {
          t_.strands.push_back(StrandEvent{r, party, h.onion_id});
          registry_.retire(h.handle);
        } else if (r == t_.rounds) {
          throw SimulationError("onion " + std::to_string(h.onion_id) + " still in flight after the last round");
        } else {
          wire_.push_back(WireOnion{party, h.next, h.handle, h.onion_id});
        }
      }
    }
    if (r < t_.rounds) {
      for (std::uint32_t s = 0; s < n_; ++s) {
        const PartyId party{s + 1};
        if (!honest_aborted(party)) continue;
        for (const auto& [to, handle] : abort_broadcast(registry_, party, p_.fanout(), n_, abort_rng_)) {
          const std::uint64_t id = registry_.onion_id(handle);
          t_.onions.push_back(OnionAnnotation{.onion_id = id,
                                              .kind = OnionKind::Abort,
                                              .origin = party,
                                              .destination = to,
                                              .formed_round = r + 1});
          wire_.push_back(WireOnion{party, to, handle, id});
        }
      }
    }
    sort_wire(wire_);
  }

  const ProtocolParams& p_;
  const SimpleInput& input_;
  AdversaryStrategy& adv_;
  EngineOptions options_;
  OnionRegistry registry_;
  Rng form_rng_;
  Rng abort_rng_;
  std::uint32_t n_;
  Transcript t_;
  AdversaryView view_;
  std::vector<WireOnion> wire_;
  std::vector<bool> aborted_;
  std::vector<std::size_t> merge_positions_;
  std::vector<std::map<std::uint32_t, std::unordered_set<std::uint64_t>>> expected_;
  std::vector<std::map<std::uint32_t, std::unordered_set<std::uint64_t>>> observed_;
};

}  // namespace

Transcript run(const ProtocolParams& params, const SimpleInput& input, AdversaryStrategy& adversary,
               std::uint64_t seed, EngineOptions options) {
  params.validate();
  input.validate(params.n_parties);
  Run r(params, input, adversary, seed, options);
  return r.execute();
}

}  // namespace onionsim
