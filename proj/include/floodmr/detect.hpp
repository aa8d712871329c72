#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "floodmr/ip.hpp"
#include "floodmr/logformat.hpp"

namespace floodmr {

// The four flood classes the mappers filter for. Predicates are pure and
// depend only on (protocol, detail), never on addresses or timing.

enum class AttackClass : std::uint8_t { Syn, HttpGet, Udp, Icmp };

inline constexpr std::array<AttackClass, 4> kAllAttackClasses = {
    AttackClass::Syn, AttackClass::HttpGet, AttackClass::Udp,
    AttackClass::Icmp};

// CLI / results-file spelling: "syn", "http-get", "udp", "icmp".
std::string_view attack_class_name(AttackClass c);
std::optional<AttackClass> attack_class_from_name(std::string_view name);

// UDP floods: UDP itself plus QUIC (UDP-based transport).
inline bool predicate_udp(const PacketRecord& r) {
  return r.protocol == Protocol::Udp || r.protocol == Protocol::Quic;
}

// SYN floods: TCP with a [SYN] marker. [SYN, ACK] is the handshake reply and
// is excluded; retransmitted SYNs count.
inline bool predicate_syn(const PacketRecord& r) {
  return r.protocol == Protocol::Tcp &&
         r.detail.find("[SYN]") != std::string::npos &&
         r.detail.find("[SYN, ACK]") == std::string::npos;
}

// HTTP GET floods: request lines only, matched on the method prefix.
inline bool predicate_http_get(const PacketRecord& r) {
  return r.protocol == Protocol::Http && r.detail.starts_with("GET ");
}

// ICMP floods: echo requests only; replies originate at the victim.
inline bool predicate_icmp(const PacketRecord& r) {
  return r.protocol == Protocol::Icmp &&
         r.detail.find("Echo (ping) request") != std::string::npos;
}

bool matches(AttackClass c, const PacketRecord& r);

// Reducer output: a source that sent more than the threshold number of
// matching packets within one detection window (one job batch).
struct AttackerReport {
  Ipv4Addr src_ip;
  std::uint64_t count = 0;
  AttackClass attack_class = AttackClass::Udp;

  bool operator==(const AttackerReport&) const = default;
};

}  // namespace floodmr
