#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

namespace floodmr {

// "64", "32KB", "1MB", "2GB" (case-insensitive suffixes, 1024 multiples).
// Throws std::invalid_argument on anything else.
std::uint64_t parse_size(std::string_view text);

// Human-oriented rendering used in summaries ("100MB", "1.5GB").
std::string format_size(std::uint64_t bytes);

// "host:port" with a non-empty host and a 16-bit port.
std::pair<std::string, std::uint16_t> parse_host_port(std::string_view text);

}  // namespace floodmr
