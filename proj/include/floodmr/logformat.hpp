#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "floodmr/ip.hpp"

namespace floodmr {

// The packet-summary line format every component exchanges. One record per
// line, UTF-8, newline-delimited:
//
//   frame_no  timestamp  src_ip -> dst_ip  PROTO  length  detail...
//
// The writer emits single tabs between fields (and " -> " between the
// endpoints); the parser accepts any run of spaces/tabs between tokens. The
// literal token "->" separates the endpoints. Everything after the length
// token is the detail text, kept verbatim.

enum class Protocol : std::uint8_t { Tcp, Udp, Quic, Http, Icmp, Other };

// Canonical token for a protocol ("TCP", "UDP", ..., "OTHER").
std::string_view protocol_token(Protocol p);

// Case-sensitive mapping; unknown tokens (e.g. "ARP", "tcp") become Other.
Protocol protocol_from_token(std::string_view token);

// One parsed log line. For a record to survive a format/parse round trip the
// detail must not contain newlines or carriage returns and must not start
// with a space or tab; timestamps are canonicalized to microsecond precision
// on write.
struct PacketRecord {
  std::uint64_t frame_no = 1;  // capture sequence number, >= 1
  double timestamp = 0.0;      // seconds since capture start, >= 0
  Ipv4Addr src_ip;
  Ipv4Addr dst_ip;
  Protocol protocol = Protocol::Other;
  std::uint64_t length = 0;  // wire bytes
  std::string detail;        // brief header info, may be empty

  bool operator==(const PacketRecord&) const = default;
};

enum class ParseError : std::uint8_t {
  EmptyLine,
  MissingField,
  BadFrameNo,
  BadTimestamp,
  MissingArrow,
  BadIp,
  BadLength,
};

std::string_view parse_error_name(ParseError e);

struct Malformed {
  std::string line;  // the offending input, verbatim
  ParseError reason;
};

// Exactly one of the two variants is present. Malformed lines are counted
// and skipped by callers; they never abort a job.
struct ParseOutcome {
  std::variant<PacketRecord, Malformed> value;

  bool ok() const { return value.index() == 0; }
  const PacketRecord& record() const { return std::get<PacketRecord>(value); }
  const Malformed& malformed() const { return std::get<Malformed>(value); }
};

// Total over all inputs: never throws, always yields exactly one outcome.
// `line` must not include the trailing newline (an optional trailing '\r'
// is tolerated and stripped).
ParseOutcome parse_line(std::string_view line);

// Canonical single-tab form, no trailing newline; parse_line inverts it
// exactly on records satisfying the PacketRecord documentation above.
std::string format_line(const PacketRecord& record);

// format_line plus '\n', appended to `out` without intermediate allocation.
void append_line(std::string& out, const PacketRecord& record);

}  // namespace floodmr
