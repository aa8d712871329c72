#include "floodmr/ip.hpp"

#include <charconv>
#include <cstdio>

namespace floodmr {

std::optional<Ipv4Addr> Ipv4Addr::parse(std::string_view text) {
  std::uint32_t value = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int oct = 0; oct < 4; ++oct) {
    if (oct > 0) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
    unsigned v = 0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{} || next == p || next - p > 3 || v > 255) {
      return std::nullopt;
    }
    value = (value << 8) | v;
    p = next;
  }
  if (p != end) return std::nullopt;
  return Ipv4Addr::from_value(value);
}

void Ipv4Addr::append_to(std::string& out) const {
  char buf[16];
  auto o = octets();
  int n = std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", unsigned(o[0]),
                        unsigned(o[1]), unsigned(o[2]), unsigned(o[3]));
  out.append(buf, std::size_t(n));
}

std::string Ipv4Addr::to_string() const {
  std::string s;
  s.reserve(15);
  append_to(s);
  return s;
}

}  // namespace floodmr
