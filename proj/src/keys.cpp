#include "onionsim/keys.hpp"

#include <sodium.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <mutex>

namespace onionsim {
namespace {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw SimulationError("libsodium initialisation failed");
  });
}

void put_u64(std::uint8_t* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t siphash(const KeyId& key, std::span<const std::uint8_t> input) {
  static_assert(crypto_shorthash_KEYBYTES == 16 && crypto_shorthash_BYTES == 8);
  std::array<std::uint8_t, 16> k{};
  put_u64(k.data(), key.hi);
  put_u64(k.data() + 8, key.lo);
  std::array<std::uint8_t, 8> out{};
  crypto_shorthash(out.data(), input.data(), input.size(), k.data());
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | out[static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

KeyMaterial KeyMaterial::generate(std::uint32_t n, std::uint64_t seed) {
  if (n < 2) throw ConfigError("key generation needs at least 2 parties, got " + std::to_string(n));
  ensure_sodium();
  KeyMaterial km;
  km.seed_ = seed;
  km.parties_.reserve(n);
  for (std::uint32_t i = 1; i <= n; ++i) {
    km.parties_.push_back({PartyId{i}, km.derive("pk", i, 0), km.derive("sk", i, 0)});
  }
  km.pair_keys_.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (std::uint32_t i = 1; i <= n; ++i) {
    for (std::uint32_t j = i + 1; j <= n; ++j) km.pair_keys_.push_back(SharedKey{km.derive("pair", i, j)});
  }
  return km;
}

SharedKey KeyMaterial::shared_key(PartyId a, PartyId b) const {
  const auto lo = std::min(a, b).value();
  const auto hi = std::max(a, b).value();
  if (lo == 0 || hi > party_count()) throw ConfigError("shared_key: party out of range");
  return SharedKey{derive("pair", lo, hi)};
}

KeyId KeyMaterial::derive(std::string_view label, std::uint32_t a, std::uint32_t b) const {
  const KeyId master{mix64(seed_), mix64(seed_ ^ 0xA5A5A5A5A5A5A5A5ULL)};
  std::vector<std::uint8_t> buf(label.begin(), label.end());
  put_u32(buf, a);
  put_u32(buf, b);
  buf.push_back(0);
  const std::uint64_t hi = siphash(master, buf);
  buf.back() = 1;
  const std::uint64_t lo = siphash(master, buf);
  return KeyId{hi, lo};
}

std::string to_string(PrfMode mode) { return mode == PrfMode::Keyed ? "keyed" : "ideal"; }

PrfMode prf_mode_from_string(std::string_view name) {
  if (name == "keyed") return PrfMode::Keyed;
  if (name == "ideal") return PrfMode::IdealRandom;
  throw ConfigError("unknown PRF mode '" + std::string(name) + "'");
}

Prf::Prf(PrfMode mode, std::uint64_t seed) : mode_(mode), table_rng_(split_seed(seed, 0x1DEA1)) {
  ensure_sodium();
}

std::uint64_t Prf::operator()(const SharedKey& key, std::span<const std::uint8_t> input) {
  if (mode_ == PrfMode::Keyed) return siphash(key.id, input);
  auto [it, inserted] = table_.try_emplace({key.id, std::vector<std::uint8_t>(input.begin(), input.end())}, 0);
  if (inserted) it->second = table_rng_.next_u64();
  return it->second;
}

std::uint64_t Prf::operator()(const SharedKey& key, std::string_view input) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(input.data());
  return (*this)(key, std::span<const std::uint8_t>(p, input.size()));
}

std::vector<std::uint8_t> epoch_tag_input(std::uint32_t epoch, std::uint8_t tag) {
  std::vector<std::uint8_t> out;
  put_u32(out, epoch);
  out.push_back(tag);
  return out;
}

}  // namespace onionsim
