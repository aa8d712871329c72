#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "floodmr/detect.hpp"
#include "floodmr/logformat.hpp"

namespace floodmr {

// Seeded synthetic traffic generator. Produces a deterministic interleaved
// stream of attack records (from attacker_count distinct sources, each
// emitting exactly packets_per_attacker predicate-matching records) and
// legitimate records (matching records below the per-host cap, plus
// non-matching noise), targeting victim_ip.
//
// Attacker sources are drawn from 10.0.0.0/8, legitimate sources from
// 192.168.0.0/16, so the two populations can never collide.
struct TraceSpec {
  std::uint64_t seed = 1;
  AttackClass attack_class = AttackClass::Udp;
  std::uint32_t attacker_count = 1;
  std::uint32_t packets_per_attacker = 1;
  // Share of attack records in the whole trace, in (0, 1].
  double attack_fraction = 0.8;
  Ipv4Addr victim_ip = Ipv4Addr::from_octets(172, 16, 0, 100);
  std::uint32_t legitimate_host_count = 0;
  // Per-host cap on predicate-matching records; must stay strictly below
  // packets_per_attacker so ground truth is separable.
  std::uint32_t legitimate_max_packets = 0;
  // Mean record rate driving the exponential inter-arrival gaps.
  double packets_per_second = 10000.0;
};

// Throws std::invalid_argument when the spec cannot be realized.
void validate_spec(const TraceSpec& spec);

struct TraceStats {
  std::uint64_t total_records = 0;
  std::uint64_t attack_records = 0;
  std::uint64_t legit_match_records = 0;
  std::uint64_t noise_records = 0;
  // Sum of per-record length fields; grows as records are drawn and is
  // complete once the stream is exhausted.
  std::uint64_t wire_bytes = 0;
};

// Single-producer record stream. Record counts in stats() are fixed at
// construction; wire_bytes accumulates while the stream is consumed.
class TraceGenerator {
 public:
  explicit TraceGenerator(const TraceSpec& spec);  // validates
  ~TraceGenerator();
  TraceGenerator(TraceGenerator&&) noexcept;
  TraceGenerator& operator=(TraceGenerator&&) noexcept;

  std::optional<PacketRecord> next();
  const TraceStats& stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Writes the whole trace in the log line format; returns the final stats.
TraceStats write_trace(const TraceSpec& spec,
                       const std::filesystem::path& out_file);

// Exactly the set the counter-based reducer must report for this trace:
// every source IP whose matching-record count strictly exceeds `threshold`,
// with exact counts. Computed from the generation plan, not by re-scanning
// emitted records, so tests can compare it against an independent
// stream-counting oracle.
std::map<Ipv4Addr, std::uint64_t> ground_truth(const TraceSpec& spec,
                                               std::uint64_t threshold);

}  // namespace floodmr
