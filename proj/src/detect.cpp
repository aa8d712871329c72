#include "floodmr/detect.hpp"

namespace floodmr {

std::string_view attack_class_name(AttackClass c) {
  switch (c) {
    case AttackClass::Syn: return "syn";
    case AttackClass::HttpGet: return "http-get";
    case AttackClass::Udp: return "udp";
    case AttackClass::Icmp: return "icmp";
  }
  return "udp";
}

std::optional<AttackClass> attack_class_from_name(std::string_view name) {
  if (name == "syn") return AttackClass::Syn;
  if (name == "http-get") return AttackClass::HttpGet;
  if (name == "udp") return AttackClass::Udp;
  if (name == "icmp") return AttackClass::Icmp;
  return std::nullopt;
}

bool matches(AttackClass c, const PacketRecord& r) {
  switch (c) {
    case AttackClass::Syn: return predicate_syn(r);
    case AttackClass::HttpGet: return predicate_http_get(r);
    case AttackClass::Udp: return predicate_udp(r);
    case AttackClass::Icmp: return predicate_icmp(r);
  }
  return false;
}

}  // namespace floodmr
