#include "floodmr/logformat.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace floodmr {

namespace {

bool is_sep(char c) { return c == ' ' || c == '\t'; }

// Advances past leading separators and extracts the next token. Returns
// false when the rest of the line is blank.
bool take_token(std::string_view& rest, std::string_view& token) {
  std::size_t i = 0;
  while (i < rest.size() && is_sep(rest[i])) ++i;
  if (i == rest.size()) {
    rest = {};
    return false;
  }
  std::size_t j = i;
  while (j < rest.size() && !is_sep(rest[j])) ++j;
  token = rest.substr(i, j - i);
  rest = rest.substr(j);
  return true;
}

bool parse_u64(std::string_view token, std::uint64_t& out) {
  auto [next, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && next == token.data() + token.size();
}

bool parse_timestamp(std::string_view token, double& out) {
  auto [next, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && next == token.data() + token.size() &&
         std::isfinite(out) && out >= 0.0;
}

}  // namespace

std::string_view protocol_token(Protocol p) {
  switch (p) {
    case Protocol::Tcp: return "TCP";
    case Protocol::Udp: return "UDP";
    case Protocol::Quic: return "QUIC";
    case Protocol::Http: return "HTTP";
    case Protocol::Icmp: return "ICMP";
    case Protocol::Other: break;
  }
  return "OTHER";
}

Protocol protocol_from_token(std::string_view token) {
  if (token == "TCP") return Protocol::Tcp;
  if (token == "UDP") return Protocol::Udp;
  if (token == "QUIC") return Protocol::Quic;
  if (token == "HTTP") return Protocol::Http;
  if (token == "ICMP") return Protocol::Icmp;
  return Protocol::Other;
}

std::string_view parse_error_name(ParseError e) {
  switch (e) {
    case ParseError::EmptyLine: return "empty";
    case ParseError::MissingField: return "missing_field";
    case ParseError::BadFrameNo: return "bad_frame_no";
    case ParseError::BadTimestamp: return "bad_timestamp";
    case ParseError::MissingArrow: return "missing_arrow";
    case ParseError::BadIp: return "bad_ip";
    case ParseError::BadLength: return "bad_length";
  }
  return "unknown";
}

ParseOutcome parse_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

  auto fail = [&](ParseError reason) {
    return ParseOutcome{Malformed{std::string(line), reason}};
  };

  std::string_view rest = line;
  std::string_view tok;

  if (!take_token(rest, tok)) return fail(ParseError::EmptyLine);
  PacketRecord rec;
  if (!parse_u64(tok, rec.frame_no) || rec.frame_no == 0) {
    return fail(ParseError::BadFrameNo);
  }

  if (!take_token(rest, tok)) return fail(ParseError::MissingField);
  if (!parse_timestamp(tok, rec.timestamp)) return fail(ParseError::BadTimestamp);

  if (!take_token(rest, tok)) return fail(ParseError::MissingField);
  auto src = Ipv4Addr::parse(tok);
  if (!src) return fail(ParseError::BadIp);
  rec.src_ip = *src;

  if (!take_token(rest, tok)) return fail(ParseError::MissingField);
  if (tok != "->") return fail(ParseError::MissingArrow);

  if (!take_token(rest, tok)) return fail(ParseError::MissingField);
  auto dst = Ipv4Addr::parse(tok);
  if (!dst) return fail(ParseError::BadIp);
  rec.dst_ip = *dst;

  if (!take_token(rest, tok)) return fail(ParseError::MissingField);
  rec.protocol = protocol_from_token(tok);

  if (!take_token(rest, tok)) return fail(ParseError::MissingField);
  if (!parse_u64(tok, rec.length)) return fail(ParseError::BadLength);

  std::size_t i = 0;
  while (i < rest.size() && is_sep(rest[i])) ++i;
  rec.detail.assign(rest.substr(i));

  return ParseOutcome{std::move(rec)};
}

namespace {

void append_record(std::string& out, const PacketRecord& r) {
  char buf[32];
  auto append_u64 = [&](std::uint64_t v) {
    auto [next, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.append(buf, next - buf);
  };

  append_u64(r.frame_no);
  out += '\t';
  int n = std::snprintf(buf, sizeof(buf), "%.6f", r.timestamp);
  out.append(buf, n);
  out += '\t';
  r.src_ip.append_to(out);
  out += " -> ";
  r.dst_ip.append_to(out);
  out += '\t';
  out += protocol_token(r.protocol);
  out += '\t';
  append_u64(r.length);
  if (!r.detail.empty()) {
    out += '\t';
    out += r.detail;
  }
}

}  // namespace

std::string format_line(const PacketRecord& record) {
  std::string s;
  s.reserve(64 + record.detail.size());
  append_record(s, record);
  return s;
}

void append_line(std::string& out, const PacketRecord& record) {
  append_record(out, record);
  out += '\n';
}

}  // namespace floodmr
