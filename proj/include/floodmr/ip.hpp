#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace floodmr {

// IPv4 address value type, stored in host order (a.b.c.d -> a<<24 | ... | d).
class Ipv4Addr {
 public:
  constexpr Ipv4Addr() = default;

  static constexpr Ipv4Addr from_octets(std::uint8_t a, std::uint8_t b,
                                        std::uint8_t c, std::uint8_t d) {
    return Ipv4Addr((std::uint32_t(a) << 24) | (std::uint32_t(b) << 16) |
                    (std::uint32_t(c) << 8) | std::uint32_t(d));
  }

  static constexpr Ipv4Addr from_value(std::uint32_t v) { return Ipv4Addr(v); }

  // Strict dotted quad: exactly four decimal octets in 0..255, digits only.
  static std::optional<Ipv4Addr> parse(std::string_view text);

  std::string to_string() const;
  void append_to(std::string& out) const;

  constexpr std::uint32_t value() const { return addr_; }

  constexpr std::array<std::uint8_t, 4> octets() const {
    return {std::uint8_t(addr_ >> 24), std::uint8_t(addr_ >> 16),
            std::uint8_t(addr_ >> 8), std::uint8_t(addr_)};
  }

  friend constexpr auto operator<=>(Ipv4Addr, Ipv4Addr) = default;

 private:
  explicit constexpr Ipv4Addr(std::uint32_t v) : addr_(v) {}

  std::uint32_t addr_ = 0;
};

}  // namespace floodmr
