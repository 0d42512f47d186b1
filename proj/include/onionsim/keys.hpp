#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "onionsim/rng.hpp"
#include "onionsim/types.hpp"

namespace onionsim {

struct KeyId {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  constexpr auto operator<=>(const KeyId&) const = default;
};

// Key known only to the two parties of an unordered pair.
struct SharedKey {
  KeyId id;
  constexpr auto operator<=>(const SharedKey&) const = default;
};

// Vestigial public/secret key pair of one party. The ideal onion registry
// does not need them; they exist so key generation has the usual shape.
struct PartyKeyRecord {
  PartyId party;
  KeyId public_key;
  KeyId secret_key;
};

class KeyMaterial {
 public:
  // Deterministic in (n, seed). Throws ConfigError when n < 2.
  static KeyMaterial generate(std::uint32_t n, std::uint64_t seed);

  std::uint32_t party_count() const { return static_cast<std::uint32_t>(parties_.size()); }
  const PartyKeyRecord& party(PartyId p) const { return parties_.at(p.slot()); }
  std::span<const PartyKeyRecord> parties() const { return parties_; }

  // shared_key(i, j) == shared_key(j, i). The i == j key is the party's own
  // verification key, needed because checkpoint data ranges over every k.
  SharedKey shared_key(PartyId a, PartyId b) const;

  // One key per unordered pair i < j, in lexicographic order.
  std::span<const SharedKey> pair_keys() const { return pair_keys_; }

 private:
  KeyId derive(std::string_view label, std::uint32_t a, std::uint32_t b) const;

  std::uint64_t seed_ = 0;
  std::vector<PartyKeyRecord> parties_;
  std::vector<SharedKey> pair_keys_;
};

enum class PrfMode { Keyed, IdealRandom };

std::string to_string(PrfMode mode);
PrfMode prf_mode_from_string(std::string_view name);

// Pseudorandom function F(key, input) -> 64 bits.
//
// Keyed mode is SipHash-2-4 under the shared key. IdealRandom mode answers
// from a lazily sampled table, one independent uniform value per distinct
// (key, input), drawn from a generator seeded by the global seed.
class Prf {
 public:
  Prf(PrfMode mode, std::uint64_t seed);

  std::uint64_t operator()(const SharedKey& key, std::span<const std::uint8_t> input);
  std::uint64_t operator()(const SharedKey& key, std::string_view input);

  PrfMode mode() const { return mode_; }

 private:
  PrfMode mode_;
  Rng table_rng_;
  std::map<std::pair<KeyId, std::vector<std::uint8_t>>, std::uint64_t> table_;
};

// Encoding of "epoch || bit" used for checkpoint derivation: 4-byte
// little-endian epoch followed by one tag byte.
std::vector<std::uint8_t> epoch_tag_input(std::uint32_t epoch, std::uint8_t tag);

}  // namespace onionsim
