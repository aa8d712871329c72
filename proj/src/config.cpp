#include "floodmr/config.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace floodmr {

std::uint64_t parse_size(std::string_view text) {
  auto bad = [&] {
    throw std::invalid_argument("bad size: '" + std::string(text) + "'");
  };
  if (text.empty()) bad();

  std::uint64_t value = 0;
  auto [next, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || next == text.data()) bad();

  std::string_view suffix(next, std::size_t(text.data() + text.size() - next));
  std::uint64_t mult = 1;
  if (suffix.empty() || suffix == "B" || suffix == "b") {
    mult = 1;
  } else if (suffix == "KB" || suffix == "kb" || suffix == "K" || suffix == "k") {
    mult = 1ull << 10;
  } else if (suffix == "MB" || suffix == "mb" || suffix == "M" || suffix == "m") {
    mult = 1ull << 20;
  } else if (suffix == "GB" || suffix == "gb" || suffix == "G" || suffix == "g") {
    mult = 1ull << 30;
  } else {
    bad();
  }
  if (value != 0 && mult > UINT64_MAX / value) bad();
  return value * mult;
}

std::string format_size(std::uint64_t bytes) {
  char buf[32];
  if (bytes >= (1ull << 30) && bytes % (1ull << 20) == 0) {
    std::snprintf(buf, sizeof(buf), "%.1fGB", double(bytes) / double(1ull << 30));
  } else if (bytes >= (1ull << 20)) {
    std::snprintf(buf, sizeof(buf), "%.1fMB", double(bytes) / double(1ull << 20));
  } else if (bytes >= (1ull << 10)) {
    std::snprintf(buf, sizeof(buf), "%.1fKB", double(bytes) / double(1ull << 10));
  } else {
    std::snprintf(buf, sizeof(buf), "%lluB", (unsigned long long)bytes);
  }
  return buf;
}

std::pair<std::string, std::uint16_t> parse_host_port(std::string_view text) {
  auto bad = [&] {
    throw std::invalid_argument("bad host:port: '" + std::string(text) + "'");
  };
  std::size_t colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) bad();
  std::string_view port_text = text.substr(colon + 1);
  unsigned port = 0;
  auto [next, ec] =
      std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || next != port_text.data() + port_text.size() ||
      port > 65535) {
    bad();
  }
  return {std::string(text.substr(0, colon)), std::uint16_t(port)};
}

}  // namespace floodmr
