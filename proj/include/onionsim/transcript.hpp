#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "onionsim/params.hpp"
#include "onionsim/registry.hpp"

namespace onionsim {

enum class OnionKind : std::uint8_t { Merging, Checkpoint, Abort, Strawman };
enum class StrategyMode : std::uint8_t { Realistic, Oracle };
enum class AbortCause : std::uint8_t { Diagnostic, AbortMessage };

std::string to_string(OnionKind k);
std::string to_string(StrategyMode m);

struct Transmission {
  std::uint32_t round = 0;
  PartyId sender;
  PartyId receiver;
  HandleId handle;
  std::uint64_t onion_id = 0;
};

// The corrupted receiver refused the onion.
struct DropEvent {
  std::uint32_t round = 0;
  PartyId sender;
  PartyId holder;
  HandleId handle;
  std::uint64_t onion_id = 0;
};

struct MergeEvent {
  std::uint32_t round = 0;
  PartyId party;
  Nonce nonce;
  HandleId survivor;
  HandleId dropped;
  std::uint64_t survivor_onion = 0;
  std::uint64_t dropped_onion = 0;
};

struct DiagnosticEvent {
  std::uint32_t round = 0;
  PartyId party;
  std::uint32_t epoch = 0;
  std::uint32_t expected = 0;
  std::uint32_t missing = 0;
  bool abort = false;
};

struct AbortEvent {
  std::uint32_t round = 0;
  PartyId party;
  AbortCause cause = AbortCause::Diagnostic;
};

struct DeliveryEvent {
  std::uint32_t round = 0;
  PartyId recipient;
  Payload payload;
  std::uint64_t onion_id = 0;
};

// An onion held by an aborted honest party; it goes no further.
struct StrandEvent {
  std::uint32_t round = 0;
  PartyId party;
  std::uint64_t onion_id = 0;
};

// Ground truth about one formed onion. Never shown to realistic adversaries.
struct OnionAnnotation {
  std::uint64_t onion_id = 0;
  OnionKind kind = OnionKind::Merging;
  PartyId origin;
  PartyId destination;
  std::uint32_t formed_round = 1;
  std::uint32_t leaf = 0;              // merging onions: leaf index in the tree
  std::uint32_t checkpoint_epoch = 0;  // checkpoint onions
  PartyId verifier;                    // checkpoint onions
};

struct AdversaryReport {
  std::optional<PartyId> target;
  std::optional<bool> isolated;
  std::vector<double> realized_alpha;              // per epoch
  std::vector<std::uint32_t> singletons_at_start;  // per epoch
  std::uint64_t drops = 0;
};

// Complete record of one execution: append-only event lists plus sealed
// ground truth. Deterministic given (params, input, adversary, seed).
struct Transcript {
  ProtocolParams params;
  std::string adversary;
  StrategyMode mode = StrategyMode::Realistic;
  std::uint64_t seed = 0;
  std::uint32_t rounds = 0;
  std::vector<PartyId> corrupted;

  std::vector<Transmission> transmissions;
  std::vector<DropEvent> drops;
  std::vector<MergeEvent> merges;
  std::vector<DiagnosticEvent> diagnostics;
  std::vector<AbortEvent> aborts;
  std::vector<DeliveryEvent> deliveries;
  std::vector<StrandEvent> strands;

  std::vector<OnionAnnotation> onions;        // by onion id
  std::vector<RoutingPlan> plans;             // by onion id
  std::vector<std::uint32_t> formed_per_party;  // forming phase only, by slot
  AdversaryReport report;

  bool is_corrupted(PartyId p) const;
  // Message deliveries (not the empty message, not abort markers).
  std::uint32_t message_delivery_count() const;
  // v_r: messages received by each party, by slot.
  std::vector<std::uint32_t> received_counts() const;
  std::uint32_t honest_abort_count() const;
};

// Line-oriented event log. Line 1 is a '#' header carrying the format
// version and resolved configuration; then one line per onion annotation
// (round 0), then events grouped by round in the fixed order transmit,
// drop, deliver, strand, merge, diagnostic, abort. Fields are key=value.
void write_event_log(std::ostream& out, const Transcript& t, const std::string& config_echo = "");

}  // namespace onionsim
