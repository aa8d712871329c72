#include <doctest.h>

#include <random>

#include "floodmr/logformat.hpp"
#include "test_support.hpp"

using namespace floodmr;

TEST_SUITE_BEGIN("logformat");

TEST_CASE("parses a tab-separated udp summary line") {
  auto outcome = parse_line(
      "139875\t138.04015 10.12.32.1 -> 10.12.32.101 UDP\t50\tSrc port: 55348  "
      "Dst port: http");
  REQUIRE(outcome.ok());
  const PacketRecord& r = outcome.record();
  CHECK(r.frame_no == 139875);
  CHECK(r.timestamp == 138.04015);
  CHECK(r.src_ip == Ipv4Addr::from_octets(10, 12, 32, 1));
  CHECK(r.dst_ip == Ipv4Addr::from_octets(10, 12, 32, 101));
  CHECK(r.protocol == Protocol::Udp);
  CHECK(r.length == 50);
  CHECK(r.detail == "Src port: 55348  Dst port: http");
}

TEST_CASE("parses a retransmitted syn line with spaces") {
  auto outcome = parse_line(
      "17956  45.406170  10.12.32.1 -> 10.12.32.101 TCP 119 "
      "[TCP Retransmission] 0 > 480 [SYN] Seq=0 Win=10000 Len=43 MSS=1452 "
      "SACK_PERM=1 TSval=422940867 TSecr=0 WS=32");
  REQUIRE(outcome.ok());
  const PacketRecord& r = outcome.record();
  CHECK(r.frame_no == 17956);
  CHECK(r.timestamp == 45.406170);
  CHECK(r.protocol == Protocol::Tcp);
  CHECK(r.length == 119);
  CHECK(r.detail ==
        "[TCP Retransmission] 0 > 480 [SYN] Seq=0 Win=10000 Len=43 MSS=1452 "
        "SACK_PERM=1 TSval=422940867 TSecr=0 WS=32");
}

TEST_CASE("parses an http get line") {
  auto outcome = parse_line(
      "46737 2641.808087 10.12.32.1 -> 10.12.32.101 HTTP 653 "
      "GET /posts/17076163/ivc/dddc?_=1432840178190 HTTP/1.1");
  REQUIRE(outcome.ok());
  CHECK(outcome.record().protocol == Protocol::Http);
  CHECK(outcome.record().detail ==
        "GET /posts/17076163/ivc/dddc?_=1432840178190 HTTP/1.1");
}

TEST_CASE("rejects a letter in an ip octet instead of coercing") {
  // The dst has a letter O for a zero; must be malformed, not 10.12.32.101.
  auto outcome = parse_line(
      "229883\t2658.8827  10.12.32.1 ->  10.12.32.1O1 ICMP\t42\tEcho (ping) "
      "request  id=0x0001, seq=11157/38187, ttl=63 (reply in 229884)");
  REQUIRE(!outcome.ok());
  CHECK(outcome.malformed().reason == ParseError::BadIp);
}

TEST_CASE("accepts the corrected icmp line") {
  auto outcome = parse_line(
      "229883\t2658.8827  10.12.32.1 ->  10.12.32.101 ICMP\t42\tEcho (ping) "
      "request  id=0x0001, seq=11157/38187, ttl=63 (reply in 229884)");
  REQUIRE(outcome.ok());
  const PacketRecord& r = outcome.record();
  CHECK(r.frame_no == 229883);
  CHECK(r.timestamp == 2658.8827);
  CHECK(r.protocol == Protocol::Icmp);
  CHECK(r.length == 42);
  CHECK(r.detail ==
        "Echo (ping) request  id=0x0001, seq=11157/38187, ttl=63 "
        "(reply in 229884)");
}

TEST_CASE("malformed reasons") {
  CHECK(parse_line("").malformed().reason == ParseError::EmptyLine);
  CHECK(parse_line("   \t ").malformed().reason == ParseError::EmptyLine);
  CHECK(parse_line("x 1.0 1.2.3.4 -> 5.6.7.8 TCP 10").malformed().reason ==
        ParseError::BadFrameNo);
  CHECK(parse_line("0 1.0 1.2.3.4 -> 5.6.7.8 TCP 10").malformed().reason ==
        ParseError::BadFrameNo);
  CHECK(parse_line("1 -2.0 1.2.3.4 -> 5.6.7.8 TCP 10").malformed().reason ==
        ParseError::BadTimestamp);
  CHECK(parse_line("1 abc 1.2.3.4 -> 5.6.7.8 TCP 10").malformed().reason ==
        ParseError::BadTimestamp);
  CHECK(parse_line("1 1.0 1.2.3.4 5.6.7.8 TCP 10").malformed().reason ==
        ParseError::MissingArrow);
  CHECK(parse_line("1 1.0 1.2.3.4 -> 5.6.7.256 TCP 10").malformed().reason ==
        ParseError::BadIp);
  CHECK(parse_line("1 1.0 1.2.3 -> 5.6.7.8 TCP 10").malformed().reason ==
        ParseError::BadIp);
  CHECK(parse_line("1 1.0 ::1 -> 5.6.7.8 TCP 10").malformed().reason ==
        ParseError::BadIp);
  CHECK(parse_line("1 1.0 1.2.3.4 -> 5.6.7.8 TCP x7").malformed().reason ==
        ParseError::BadLength);
  CHECK(parse_line("1 1.0 1.2.3.4 -> 5.6.7.8 TCP").malformed().reason ==
        ParseError::MissingField);
  CHECK(parse_line("1 1.0").malformed().reason == ParseError::MissingField);
}

TEST_CASE("malformed keeps the offending line verbatim") {
  auto outcome = parse_line("not a record at all");
  REQUIRE(!outcome.ok());
  CHECK(outcome.malformed().line == "not a record at all");
}

TEST_CASE("unknown protocol tokens become OTHER") {
  CHECK(parse_line("1 1.0 1.2.3.4 -> 5.6.7.8 ARP 42").record().protocol ==
        Protocol::Other);
  // Case-sensitive mapping.
  CHECK(parse_line("1 1.0 1.2.3.4 -> 5.6.7.8 tcp 42").record().protocol ==
        Protocol::Other);
  CHECK(parse_line("1 1.0 1.2.3.4 -> 5.6.7.8 QUIC 42").record().protocol ==
        Protocol::Quic);
}

TEST_CASE("missing detail parses to an empty string") {
  auto outcome = parse_line("7 0.25 1.2.3.4 -> 5.6.7.8 ICMP 42");
  REQUIRE(outcome.ok());
  CHECK(outcome.record().detail.empty());
}

TEST_CASE("canonical format") {
  PacketRecord r{1, 0.0, Ipv4Addr::from_octets(10, 0, 0, 1),
                 Ipv4Addr::from_octets(10, 0, 0, 2), Protocol::Icmp, 42,
                 "Echo (ping) request id=0x0001"};
  CHECK(format_line(r) ==
        "1\t0.000000\t10.0.0.1 -> 10.0.0.2\tICMP\t42\t"
        "Echo (ping) request id=0x0001");
}

TEST_CASE("round trip preserves detail bytes exactly") {
  PacketRecord r{99, 12.5, Ipv4Addr::from_octets(1, 2, 3, 4),
                 Ipv4Addr::from_octets(5, 6, 7, 8), Protocol::Tcp, 66,
                 "double  space [SYN]  kept"};
  auto outcome = parse_line(format_line(r));
  REQUIRE(outcome.ok());
  CHECK(outcome.record() == r);
}

TEST_CASE("round trip identity on 10000 random records") {
  std::mt19937_64 rng(20240811);
  for (int i = 0; i < 10000; ++i) {
    PacketRecord r = floodmr::testing::random_record(rng);
    auto outcome = parse_line(format_line(r));
    REQUIRE(outcome.ok());
    REQUIRE(outcome.record() == r);
  }
}

TEST_CASE("parser is total over random byte soup") {
  std::mt19937_64 rng(7);
  static const char kBytes[] = "abcXYZ0189 .:->\t[]totally/??";
  for (int i = 0; i < 2000; ++i) {
    std::string line;
    std::size_t len = rng() % 50;
    for (std::size_t j = 0; j < len; ++j) {
      line += kBytes[rng() % (sizeof(kBytes) - 1)];
    }
    ParseOutcome outcome = parse_line(line);  // must not throw
    if (!outcome.ok()) {
      CHECK(outcome.malformed().line == line);
    }
  }
}

TEST_CASE("whitespace runs are interchangeable between tokens") {
  auto a = parse_line("5 1.5 9.8.7.6 -> 1.2.3.4 UDP 50 tail text");
  auto b = parse_line("5\t\t1.5   9.8.7.6\t->  1.2.3.4\tUDP   50\ttail text");
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(a.record() == b.record());
}

TEST_SUITE_END();
