#pragma once

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "onionsim/adversary.hpp"
#include "onionsim/params.hpp"
#include "onionsim/registry.hpp"
#include "onionsim/transcript.hpp"

namespace onionsim {

// Each party sends one message to one recipient; recipients form a
// permutation and message tokens are distinct (initially the sender index).
struct SimpleInput {
  std::vector<PartyId> recipients;     // by sender slot
  std::vector<std::uint64_t> messages;  // by sender slot

  static SimpleInput random(std::uint32_t n_parties, std::uint64_t seed);
  static SimpleInput from_permutation(std::vector<PartyId> recipients);
  std::uint32_t size() const { return static_cast<std::uint32_t>(recipients.size()); }
  PartyId recipient(PartyId sender) const { return recipients.at(sender.slot()); }
  Payload message(PartyId sender) const { return Payload::message(messages.at(sender.slot())); }
  // Throws ConfigError unless recipients are a permutation of [n_parties]
  // and messages are distinct.
  void validate(std::uint32_t n_parties) const;
  bool operator==(const SimpleInput&) const = default;
};

enum class TieBreak { LowestHandle, HighestHandle };

struct EngineOptions {
  TieBreak tie_break = TieBreak::LowestHandle;
};

// An onion a party holds after peeling, waiting to be forwarded.
struct HeldOnion {
  HandleId handle;
  PartyId next;
  Nonce nonce;
  std::uint64_t onion_id = 0;
};

// Groups `held` by non-empty nonce and keeps one onion per group (lowest
// handle, or highest under the alternate tie-break). Survivors come back
// sorted by handle.
std::vector<MergeEvent> merge_step(PartyId party, std::uint32_t round, std::vector<HeldOnion>& held,
                                   TieBreak tie_break = TieBreak::LowestHandle);

DiagnosticEvent diagnostic_check(PartyId party, std::uint32_t round, std::uint32_t epoch,
                                 const std::unordered_set<std::uint64_t>& expected,
                                 const std::unordered_set<std::uint64_t>& observed, const ProtocolParams& params);

// Forms `fanout` direct abort onions to recipients drawn uniformly with
// replacement. Returns (recipient, handle) pairs.
std::vector<std::pair<PartyId, HandleId>> abort_broadcast(OnionRegistry& registry, PartyId sender,
                                                          std::uint32_t fanout, std::uint32_t n_parties, Rng& rng);

// Abort flooding in isolation: `seeded` honest parties start aborted; every
// round each aborted honest party sends `fanout` abort messages and honest
// recipients abort. Returns the number of rounds until every honest party
// has aborted, or nothing if that does not happen within `max_rounds`.
std::optional<std::uint32_t> simulate_abort_flood(std::uint32_t n_parties, double kappa, std::uint32_t fanout,
                                                  std::uint32_t max_rounds, std::uint64_t seed);

// Executes one protocol run. Seed streams: split_seed(seed, k) for k = 0 keys,
// 1 onion forming, 2 handles, 3 adversary, 4 abort sampling, 5 PRF table.
Transcript run(const ProtocolParams& params, const SimpleInput& input, AdversaryStrategy& adversary,
               std::uint64_t seed, EngineOptions options = {});

}  // namespace onionsim
