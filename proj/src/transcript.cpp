#include "onionsim/transcript.hpp"

#include <algorithm>
#include <ostream>

namespace onionsim {

std::string to_string(OnionKind k) {
  switch (k) {
    case OnionKind::Merging: return "merging";
    case OnionKind::Checkpoint: return "checkpoint";
    case OnionKind::Abort: return "abort";
    case OnionKind::Strawman: return "strawman";
  }
  return "unknown";
}

std::string to_string(StrategyMode m) { return m == StrategyMode::Oracle ? "oracle" : "realistic"; }

bool Transcript::is_corrupted(PartyId p) const { return std::binary_search(corrupted.begin(), corrupted.end(), p); }

std::uint32_t Transcript::message_delivery_count() const {
  return static_cast<std::uint32_t>(
      std::count_if(deliveries.begin(), deliveries.end(), [](const DeliveryEvent& e) { return e.payload.is_message(); }));
}

std::vector<std::uint32_t> Transcript::received_counts() const {
  std::vector<std::uint32_t> v(params.n_parties, 0);
  for (const auto& e : deliveries) {
    if (e.payload.is_message()) ++v[e.recipient.slot()];
  }
  return v;
}

std::uint32_t Transcript::honest_abort_count() const { return static_cast<std::uint32_t>(aborts.size()); }

namespace {

std::string payload_text(const Payload& p) {
  switch (p.kind) {
    case PayloadKind::Message: return "msg:" + std::to_string(p.token);
    case PayloadKind::Empty: return "empty";
    case PayloadKind::Abort: return "abort";
  }
  return "?";
}

template <typename Event>
std::size_t emit_round(std::ostream& out, const std::vector<Event>& events, std::size_t pos, std::uint32_t round,
                       auto&& write) {
  while (pos < events.size() && events[pos].round == round) write(out, events[pos++]);
  return pos;
}

}  // namespace

void write_event_log(std::ostream& out, const Transcript& t, const std::string& config_echo) {
  out << "# onionsim-transcript v1 protocol=" << to_string(t.params.protocol) << " adversary=" << t.adversary
      << " mode=" << to_string(t.mode) << " seed=" << t.seed << " rounds=" << t.rounds << " corrupted=";
  for (std::size_t i = 0; i < t.corrupted.size(); ++i) out << (i ? "," : "") << t.corrupted[i].value();
  if (!config_echo.empty()) out << " config=" << config_echo;
  out << '\n';

  for (const auto& a : t.onions) {
    out << "0 onion id=" << a.onion_id << " kind=" << to_string(a.kind) << " origin=" << a.origin.value()
        << " dest=" << a.destination.value() << " formed=" << a.formed_round;
    if (a.kind == OnionKind::Merging) out << " leaf=" << a.leaf;
    if (a.kind == OnionKind::Checkpoint) out << " ckpt_epoch=" << a.checkpoint_epoch << " verifier=" << a.verifier.value();
    out << '\n';
  }

  std::size_t it = 0, id = 0, idl = 0, is = 0, im = 0, idg = 0, ia = 0;
  for (std::uint32_t r = 1; r <= t.rounds; ++r) {
    it = emit_round(out, t.transmissions, it, r, [](std::ostream& o, const Transmission& e) {
      o << e.round << " transmit from=" << e.sender.value() << " to=" << e.receiver.value() << " handle=" << e.handle.hex()
        << '\n';
    });
    id = emit_round(out, t.drops, id, r, [](std::ostream& o, const DropEvent& e) {
      o << e.round << " drop from=" << e.sender.value() << " at=" << e.holder.value() << " handle=" << e.handle.hex()
        << '\n';
    });
    idl = emit_round(out, t.deliveries, idl, r, [](std::ostream& o, const DeliveryEvent& e) {
      o << e.round << " deliver to=" << e.recipient.value() << " payload=" << payload_text(e.payload) << '\n';
    });
    is = emit_round(out, t.strands, is, r, [](std::ostream& o, const StrandEvent& e) {
      o << e.round << " strand at=" << e.party.value() << " onion=" << e.onion_id << '\n';
    });
    im = emit_round(out, t.merges, im, r, [](std::ostream& o, const MergeEvent& e) {
      o << e.round << " merge at=" << e.party.value() << " nonce=" << e.nonce.value() << " survivor=" << e.survivor.hex()
        << " dropped=" << e.dropped.hex() << '\n';
    });
    idg = emit_round(out, t.diagnostics, idg, r, [](std::ostream& o, const DiagnosticEvent& e) {
      o << e.round << " diagnostic party=" << e.party.value() << " epoch=" << e.epoch << " expected=" << e.expected
        << " missing=" << e.missing << " verdict=" << (e.abort ? "abort" : "continue") << '\n';
    });
    ia = emit_round(out, t.aborts, ia, r, [](std::ostream& o, const AbortEvent& e) {
      o << e.round << " abort party=" << e.party.value()
        << " cause=" << (e.cause == AbortCause::Diagnostic ? "diagnostic" : "message") << '\n';
    });
  }
}

}  // namespace onionsim
