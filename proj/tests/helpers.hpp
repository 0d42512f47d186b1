#pragma once

#include <sstream>
#include <string>

#include "onionsim/analytics.hpp"
#include "onionsim/engine.hpp"

namespace testing {

inline onionsim::ProtocolParams pibfly16() {
  onionsim::ProtocolParams p;
  p.protocol = onionsim::Protocol::Pibfly;
  p.n_parties = 16;
  p.lambda = 16;
  p.kappa = 0.25;
  p.chi = 4;
  p.d = 4;
  p.iterations = 4;
  return p;
}

inline onionsim::ProtocolParams pitree16(std::uint32_t chi = 4, std::uint32_t d = 2) {
  onionsim::ProtocolParams p = pibfly16();
  p.protocol = onionsim::Protocol::Pitree;
  p.chi = chi;
  p.d = d;
  return p;
}

inline onionsim::Transcript passive_run(const onionsim::ProtocolParams& p, std::uint64_t seed) {
  onionsim::PassiveStrategy s;
  return onionsim::run(p, onionsim::SimpleInput::random(p.n_parties, onionsim::split_seed(seed, 99)), s, seed);
}

inline std::string event_log(const onionsim::Transcript& t) {
  std::ostringstream out;
  onionsim::write_event_log(out, t);
  return out.str();
}

}  // namespace testing
