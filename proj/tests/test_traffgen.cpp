#include <doctest.h>

#include <cmath>
#include <set>

#include "floodmr/traffgen.hpp"
#include "test_support.hpp"

using namespace floodmr;
using floodmr::testing::TempDir;

TEST_SUITE_BEGIN("traffgen");

TEST_CASE("invalid specs are rejected before emitting") {
  TraceSpec spec;
  spec.attacker_count = 5;
  spec.packets_per_attacker = 100;
  spec.legitimate_host_count = 10;
  spec.legitimate_max_packets = 50;
  CHECK_NOTHROW(validate_spec(spec));

  TraceSpec bad = spec;
  bad.attacker_count = 0;
  CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);

  bad = spec;
  bad.packets_per_attacker = 0;
  CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);

  bad = spec;
  bad.legitimate_max_packets = 100;  // not strictly below
  CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);

  bad = spec;
  bad.attack_fraction = 0.0;
  CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);
  bad.attack_fraction = 1.5;
  CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);

  bad = spec;
  bad.legitimate_host_count = 0;  // cannot realize a 20% legitimate share
  CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);

  bad = spec;
  bad.attack_fraction = 1.0;
  bad.legitimate_host_count = 0;
  bad.legitimate_max_packets = 0;
  CHECK_NOTHROW(validate_spec(bad));
}

TEST_CASE("identical specs produce byte-identical files") {
  TempDir dir("traffgen-det");
  TraceSpec spec;
  spec.seed = 99;
  spec.attacker_count = 12;
  spec.packets_per_attacker = 40;
  spec.legitimate_host_count = 8;
  spec.legitimate_max_packets = 20;

  write_trace(spec, dir.file("a.log"));
  write_trace(spec, dir.file("b.log"));
  std::string a = floodmr::testing::slurp(dir.file("a.log"));
  CHECK(!a.empty());
  CHECK(a == floodmr::testing::slurp(dir.file("b.log")));

  TraceSpec other = spec;
  other.seed = 100;
  write_trace(other, dir.file("c.log"));
  CHECK(a != floodmr::testing::slurp(dir.file("c.log")));
}

TEST_CASE("every attacker emits exactly packets_per_attacker matches") {
  TempDir dir("traffgen-counts");
  TraceSpec spec;
  spec.seed = 7;
  spec.attack_class = AttackClass::Udp;
  spec.attacker_count = 100;
  spec.packets_per_attacker = 600;
  spec.attack_fraction = 0.8;
  spec.legitimate_host_count = 40;
  spec.legitimate_max_packets = 80;

  write_trace(spec, dir.file("t.log"));
  auto counts = floodmr::testing::oracle_count(dir.file("t.log"), spec.attack_class);

  std::size_t attackers = 0;
  for (const auto& [ip, count] : counts) {
    auto o = ip.octets();
    if (o[0] == 10) {
      ++attackers;
      CHECK(count == 600);
    } else {
      // Legitimate sources live in 192.168.0.0/16 and stay under the cap.
      CHECK(o[0] == 192);
      CHECK(o[1] == 168);
      CHECK(count <= 80);
    }
  }
  CHECK(attackers == 100);
}

TEST_CASE("stream is ordered and sequentially numbered") {
  TraceSpec spec;
  spec.seed = 5;
  spec.attacker_count = 10;
  spec.packets_per_attacker = 50;
  spec.legitimate_host_count = 5;
  spec.legitimate_max_packets = 10;

  TraceGenerator gen(spec);
  std::uint64_t expected_frame = 1;
  double last_ts = 0.0;
  std::set<std::uint32_t> attacker_srcs, legit_srcs;
  while (auto rec = gen.next()) {
    CHECK(rec->frame_no == expected_frame++);
    CHECK(rec->timestamp >= last_ts);
    last_ts = rec->timestamp;
    auto o = rec->src_ip.octets();
    if (o[0] == 10) {
      attacker_srcs.insert(rec->src_ip.value());
    } else {
      legit_srcs.insert(rec->src_ip.value());
    }
    CHECK(rec->dst_ip == spec.victim_ip);
  }
  CHECK(attacker_srcs.size() == 10);
  CHECK(legit_srcs.size() <= 5);
  for (std::uint32_t ip : attacker_srcs) CHECK(!legit_srcs.contains(ip));
}

TEST_CASE("attack share lands within one percent for large traces") {
  TraceSpec spec;
  spec.seed = 21;
  spec.attacker_count = 50;
  spec.packets_per_attacker = 200;  // 10000 attack records
  spec.attack_fraction = 0.8;
  spec.legitimate_host_count = 60;
  spec.legitimate_max_packets = 40;

  TraceGenerator gen(spec);
  const TraceStats& stats = gen.stats();
  CHECK(stats.total_records >= 10000);
  double share = double(stats.attack_records) / double(stats.total_records);
  CHECK(std::abs(share - spec.attack_fraction) < 0.01);
}

TEST_CASE("ground truth boundary behavior is strict") {
  TraceSpec spec;
  spec.seed = 3;
  spec.attacker_count = 5;
  spec.packets_per_attacker = 501;
  spec.legitimate_host_count = 10;
  spec.legitimate_max_packets = 100;

  auto gt = ground_truth(spec, 500);
  CHECK(gt.size() == 5);
  for (const auto& [ip, count] : gt) CHECK(count == 501);

  TraceSpec at_threshold = spec;
  at_threshold.packets_per_attacker = 500;
  CHECK(ground_truth(at_threshold, 500).empty());
}

TEST_CASE("ground truth equals a brute-force count over the stream") {
  TempDir dir("traffgen-gt");
  TraceSpec spec;
  spec.seed = 42;
  spec.attack_class = AttackClass::Icmp;
  spec.attacker_count = 3;
  spec.packets_per_attacker = 501;
  spec.attack_fraction = 0.7;
  spec.legitimate_host_count = 50;
  spec.legitimate_max_packets = 100;

  write_trace(spec, dir.file("t.log"));
  auto counts = floodmr::testing::oracle_count(dir.file("t.log"), spec.attack_class);

  for (std::uint64_t threshold : {0ull, 1ull, 50ull, 500ull, 501ull}) {
    auto expected = floodmr::testing::oracle_over_threshold(counts, threshold);
    auto got = ground_truth(spec, threshold);
    CHECK(got == expected);
  }
}

TEST_CASE("wire byte total accumulates to the sum of record lengths") {
  TraceSpec spec;
  spec.seed = 2;
  spec.attacker_count = 4;
  spec.packets_per_attacker = 25;
  spec.legitimate_host_count = 2;
  spec.legitimate_max_packets = 5;

  TraceGenerator gen(spec);
  std::uint64_t sum = 0;
  while (auto rec = gen.next()) sum += rec->length;
  CHECK(gen.stats().wire_bytes == sum);
  CHECK(sum > 0);
}

TEST_SUITE_END();
