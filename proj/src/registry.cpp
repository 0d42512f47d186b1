#include "onionsim/registry.hpp"

#include <cstdio>

namespace onionsim {

std::string HandleId::hex() const {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return buf;
}

HandleId OnionRegistry::fresh_handle() {
  for (;;) {
    HandleId h{handle_rng_.next_u64(), handle_rng_.next_u64()};
    if (!live_.contains(h) && !retired_.contains(h)) return h;
  }
}

HandleId OnionRegistry::form_onion(RoutingPlan plan) {
  if (plan.path.empty()) throw ConfigError("form_onion: empty routing path");
  if (plan.nonces.size() + 1 != plan.path.size()) {
    throw ConfigError("form_onion: expected " + std::to_string(plan.path.size() - 1) + " nonces, got " +
                      std::to_string(plan.nonces.size()));
  }
  const std::uint64_t id = records_.size();
  ++formed_by_origin_[plan.origin];
  records_.push_back(OnionRecord{id, std::move(plan), 0, false});
  const HandleId h = fresh_handle();
  live_.emplace(h, id);
  return h;
}

PeelResult OnionRegistry::proc_onion(PartyId holder, HandleId handle) {
  auto it = live_.find(handle);
  if (it == live_.end()) {
    throw SimulationError(retired_.contains(handle) ? "proc_onion: handle already processed " + handle.hex()
                                                    : "proc_onion: unknown handle " + handle.hex());
  }
  OnionRecord& rec = records_[it->second];
  if (rec.plan.path[rec.hop_index] != holder) return NotIntended{};

  live_.erase(it);
  retired_.emplace(handle, true);
  if (rec.hop_index + 1 == rec.plan.path.size()) {
    rec.consumed = true;
    return Deliver{rec.plan.message};
  }
  const Nonce revealed = rec.plan.nonces[rec.hop_index];
  ++rec.hop_index;
  const HandleId next = fresh_handle();
  live_.emplace(next, rec.onion_id);
  return Relay{rec.plan.path[rec.hop_index], revealed, next};
}

void OnionRegistry::retire(HandleId handle) {
  auto it = live_.find(handle);
  if (it == live_.end()) throw SimulationError("retire: handle not live " + handle.hex());
  records_[it->second].consumed = true;
  live_.erase(it);
  retired_.emplace(handle, true);
}

const OnionRecord* OnionRegistry::find(HandleId handle) const {
  auto it = live_.find(handle);
  return it == live_.end() ? nullptr : &records_[it->second];
}

std::uint64_t OnionRegistry::onion_id(HandleId handle) const {
  auto it = live_.find(handle);
  if (it == live_.end()) throw SimulationError("onion_id: handle not live " + handle.hex());
  return it->second;
}

std::uint64_t OnionRegistry::formed_by(PartyId origin) const {
  auto it = formed_by_origin_.find(origin);
  return it == formed_by_origin_.end() ? 0 : it->second;
}

}  // namespace onionsim
