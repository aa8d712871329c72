#include <doctest.h>

#include <random>

#include "floodmr/detect.hpp"
#include "floodmr/traffgen.hpp"

using namespace floodmr;

namespace {

PacketRecord make(Protocol proto, std::string detail) {
  PacketRecord r;
  r.frame_no = 1;
  r.src_ip = Ipv4Addr::from_octets(10, 0, 0, 1);
  r.dst_ip = Ipv4Addr::from_octets(10, 0, 0, 2);
  r.protocol = proto;
  r.length = 100;
  r.detail = std::move(detail);
  return r;
}

}  // namespace

TEST_SUITE_BEGIN("detect");

TEST_CASE("udp predicate covers udp and quic") {
  CHECK(predicate_udp(make(Protocol::Udp, "Src port: 55348  Dst port: http")));
  CHECK(predicate_udp(make(Protocol::Quic, "Src port: 1  Dst port: 443")));
  CHECK(!predicate_udp(make(Protocol::Icmp, "Echo (ping) request")));
  CHECK(!predicate_udp(make(Protocol::Tcp, "[SYN]")));
}

TEST_CASE("syn predicate requires a syn marker and excludes the reply") {
  CHECK(predicate_syn(
      make(Protocol::Tcp, "[TCP Retransmission] 0 > 480 [SYN] Seq=0")));
  CHECK(predicate_syn(make(Protocol::Tcp, "51234 > 80 [SYN] Seq=0 Win=10000")));
  CHECK(!predicate_syn(make(Protocol::Tcp, "[SYN, ACK] Seq=0")));
  CHECK(!predicate_syn(make(Protocol::Tcp, "443 > 5 [ACK] Seq=1")));
  CHECK(!predicate_syn(make(Protocol::Udp, "[SYN] lookalike on udp")));
  // A line carrying both markers is the reply path, not a new probe.
  CHECK(!predicate_syn(make(Protocol::Tcp, "[SYN] then [SYN, ACK]")));
}

TEST_CASE("http get predicate matches the method prefix only") {
  CHECK(predicate_http_get(make(Protocol::Http, "GET /posts/1 HTTP/1.1")));
  CHECK(!predicate_http_get(make(Protocol::Http, "HTTP/1.1 200 OK")));
  CHECK(!predicate_http_get(make(Protocol::Http, "POST /submit HTTP/1.1")));
  CHECK(!predicate_http_get(make(Protocol::Http, "GETX /x")));
  CHECK(!predicate_http_get(make(Protocol::Tcp, "GET /not-http")));
}

TEST_CASE("icmp predicate counts echo requests only") {
  CHECK(predicate_icmp(
      make(Protocol::Icmp, "Echo (ping) request  id=0x0001, seq=1/256")));
  CHECK(!predicate_icmp(
      make(Protocol::Icmp, "Echo (ping) reply    id=0x0001, seq=1/256")));
  CHECK(!predicate_icmp(make(Protocol::Icmp, "Destination unreachable")));
  CHECK(!predicate_icmp(make(Protocol::Udp, "Echo (ping) request forged")));
}

TEST_CASE("predicates ignore addresses, frame numbers, and timing") {
  std::mt19937_64 rng(3);
  PacketRecord base = make(Protocol::Tcp, "1 > 2 [SYN] Seq=0");
  for (int i = 0; i < 200; ++i) {
    PacketRecord r = base;
    r.frame_no = rng() % 100000 + 1;
    r.timestamp = double(rng() % 1000000) / 1e6;
    r.src_ip = Ipv4Addr::from_value(std::uint32_t(rng()));
    r.dst_ip = Ipv4Addr::from_value(std::uint32_t(rng()));
    r.length = rng() % 2000;
    for (AttackClass cls : kAllAttackClasses) {
      CHECK(matches(cls, r) == matches(cls, base));
    }
  }
}

TEST_CASE("class names round trip and unknown names are rejected") {
  for (AttackClass cls : kAllAttackClasses) {
    auto back = attack_class_from_name(attack_class_name(cls));
    REQUIRE(back.has_value());
    CHECK(*back == cls);
  }
  CHECK(!attack_class_from_name("tcp-syn").has_value());
  CHECK(!attack_class_from_name("").has_value());
}

TEST_CASE("generated streams match their labels for every class") {
  for (AttackClass cls : kAllAttackClasses) {
    TraceSpec spec;
    spec.seed = 11;
    spec.attack_class = cls;
    spec.attacker_count = 20;
    spec.packets_per_attacker = 30;
    spec.attack_fraction = 0.6;
    spec.legitimate_host_count = 15;
    spec.legitimate_max_packets = 10;

    TraceGenerator gen(spec);
    std::uint64_t matched = 0, total = 0;
    while (auto rec = gen.next()) {
      ++total;
      if (matches(cls, *rec)) ++matched;
    }
    const TraceStats& stats = gen.stats();
    CHECK(total == stats.total_records);
    CHECK(matched == stats.attack_records + stats.legit_match_records);
  }
}

TEST_SUITE_END();
