#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace onionsim {

// Raised for invalid parameters or inputs, before any simulation work starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a simulation invariant is violated at run time.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 1-based party index in [1, N].
class PartyId {
 public:
  constexpr PartyId() = default;
  constexpr explicit PartyId(std::uint32_t index) : index_(index) {}
  constexpr std::uint32_t value() const { return index_; }
  // 0-based slot, for indexing per-party arrays.
  constexpr std::size_t slot() const { return index_ - 1; }
  constexpr auto operator<=>(const PartyId&) const = default;

 private:
  std::uint32_t index_ = 0;
};

// 64-bit nonce token. Zero is reserved for the empty nonce.
class Nonce {
 public:
  constexpr Nonce() = default;
  constexpr explicit Nonce(std::uint64_t v) : value_(v) {}
  static constexpr Nonce empty() { return Nonce{}; }
  constexpr bool is_empty() const { return value_ == 0; }
  constexpr std::uint64_t value() const { return value_; }
  constexpr auto operator<=>(const Nonce&) const = default;

 private:
  std::uint64_t value_ = 0;
};

// Opaque 128-bit identifier of one onion layer.
struct HandleId {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  constexpr auto operator<=>(const HandleId&) const = default;
  std::string hex() const;
};

enum class PayloadKind : std::uint8_t { Message, Empty, Abort };

// Onion payload: a message token, the empty message, or the abort marker.
struct Payload {
  PayloadKind kind = PayloadKind::Empty;
  std::uint64_t token = 0;

  static constexpr Payload message(std::uint64_t t) { return {PayloadKind::Message, t}; }
  static constexpr Payload empty() { return {PayloadKind::Empty, 0}; }
  static constexpr Payload abort() { return {PayloadKind::Abort, 0}; }
  constexpr bool is_message() const { return kind == PayloadKind::Message; }
  constexpr auto operator<=>(const Payload&) const = default;
};

}  // namespace onionsim

template <>
struct std::hash<onionsim::HandleId> {
  std::size_t operator()(const onionsim::HandleId& h) const noexcept {
    return static_cast<std::size_t>(h.hi ^ (h.lo * 0x9E3779B97F4A7C15ULL));
  }
};

template <>
struct std::hash<onionsim::PartyId> {
  std::size_t operator()(const onionsim::PartyId& p) const noexcept { return p.value(); }
};

template <>
struct std::hash<onionsim::Nonce> {
  std::size_t operator()(const onionsim::Nonce& n) const noexcept {
    return static_cast<std::size_t>(n.value() * 0x9E3779B97F4A7C15ULL);
  }
};
