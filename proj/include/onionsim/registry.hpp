#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <variant>
#include <vector>

#include "onionsim/rng.hpp"
#include "onionsim/types.hpp"

namespace onionsim {

// Arguments of one FormOnion call: the payload, the routing path
// (intermediaries followed by the final recipient) and one nonce per
// intermediary. `origin` is ground truth for analytics only.
struct RoutingPlan {
  Payload message;
  std::vector<PartyId> path;
  std::vector<Nonce> nonces;
  PartyId origin;
};

// Ground-truth state of one onion. `hop_index` is the path position of the
// party expected to process the current layer.
struct OnionRecord {
  std::uint64_t onion_id = 0;
  RoutingPlan plan;
  std::size_t hop_index = 0;
  bool consumed = false;

  std::span<const PartyId> remaining_path() const {
    return std::span<const PartyId>(plan.path).subspan(hop_index);
  }
  std::span<const Nonce> remaining_nonces() const {
    const auto& n = plan.nonces;
    return hop_index < n.size() ? std::span<const Nonce>(n).subspan(hop_index) : std::span<const Nonce>{};
  }
};

struct Relay {
  PartyId next;
  Nonce nonce;
  HandleId handle;
};
struct Deliver {
  Payload message;
};
struct NotIntended {};

using PeelResult = std::variant<Relay, Deliver, NotIntended>;

// Ideal onion-encryption functionality. Onions are opaque handles; the
// registry holds the plaintext routing state behind them. Every peel
// retires the old handle and issues a fresh, independently drawn one, so
// successive layers are unlinkable from the handle alone.
class OnionRegistry {
 public:
  explicit OnionRegistry(std::uint64_t handle_seed) : handle_rng_(handle_seed) {}

  // FormOnion. Throws ConfigError for an empty path or a nonce/path length
  // mismatch.
  HandleId form_onion(RoutingPlan plan);

  // ProcOnion. Unknown or already-consumed handles throw SimulationError;
  // a holder other than the intended processor gets NotIntended and the
  // record is left untouched.
  PeelResult proc_onion(PartyId holder, HandleId handle);

  // Takes a live onion out of circulation without processing it (dropped,
  // merged away or stranded).
  void retire(HandleId handle);

  // Ground truth lookups (engine and oracle analytics only).
  const OnionRecord* find(HandleId handle) const;
  const OnionRecord& record(std::uint64_t onion_id) const { return records_.at(onion_id); }
  std::uint64_t onion_id(HandleId handle) const;

  std::size_t formed_total() const { return records_.size(); }
  std::uint64_t formed_by(PartyId origin) const;
  std::size_t live_count() const { return live_.size(); }

 private:
  HandleId fresh_handle();

  Rng handle_rng_;
  std::vector<OnionRecord> records_;
  std::unordered_map<HandleId, std::uint64_t> live_;
  std::unordered_map<HandleId, bool> retired_;
  std::unordered_map<PartyId, std::uint64_t> formed_by_origin_;
};

}  // namespace onionsim
