#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "floodmr/detect.hpp"
#include "floodmr/ip.hpp"
#include "floodmr/logformat.hpp"

namespace floodmr {

class EngineError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A line-aligned contiguous byte range of one log file; the unit of mapper
// work. Blocks of a file are contiguous, non-overlapping, cover the file
// exactly, and every boundary falls on a line boundary, so no record ever
// straddles two blocks. A block may run past the nominal block size by at
// most one line.
struct LogBlock {
  std::uint64_t block_id = 0;  // unique within one job
  std::uint32_t file_id = 0;
  std::uint64_t byte_start = 0;
  std::uint64_t byte_end = 0;     // exclusive
  std::uint64_t record_count = 0;  // lines in the range (counted at split)
};

// Mapper output pair. `index_in_block` is the 0-based line index of the
// matching record within its block (the mapper's per-line input counter).
struct KeyedEmit {
  Ipv4Addr key;  // source IP
  PacketRecord value;
  std::uint64_t block_id = 0;
  std::uint64_t index_in_block = 0;
};

struct JobConfig {
  AttackClass attack_class = AttackClass::Udp;
  std::uint64_t threshold = 500;                  // strict '>' comparison
  std::uint64_t block_size = 128ull << 20;        // bytes
  std::uint32_t worker_count = 1;
  std::uint32_t reducer_count = 1;
};

struct JobStats {
  std::uint64_t records_seen = 0;     // all lines, malformed included
  std::uint64_t records_matched = 0;  // mapper emits
  std::uint64_t reduced_records = 0;  // sum of reducer group sizes
  std::uint64_t malformed_count = 0;
  std::uint64_t blocks = 0;
  // map_ms: wall clock of the parallel map phase (parse + filter + local
  // counting). shuffle_ms: aggregate time spent merging worker-local counts
  // into the reducer partitions (a subset of the map wall). reduce_ms: wall
  // clock of the threshold scan.
  double map_ms = 0.0;
  double shuffle_ms = 0.0;
  double reduce_ms = 0.0;
};

struct DetectionResult {
  // Sorted descending by count, then ascending by IP; one entry per source.
  std::vector<AttackerReport> attackers;
  JobStats stats;
};

// Splits `file` into line-aligned blocks of roughly `block_size` bytes.
// Throws EngineError when the file is unreadable or a single line exceeds
// block_size (the message names the offending line number).
std::vector<LogBlock> split_blocks(const std::filesystem::path& file,
                                   std::uint64_t block_size,
                                   std::uint32_t file_id = 0);

struct MapOutput {
  std::vector<KeyedEmit> emits;
  std::uint64_t records_seen = 0;
  std::uint64_t malformed = 0;
};

// Runs the mapper over one block: one emit per well-formed, predicate-
// matching line, keyed by source IP. Malformed lines are counted and
// skipped; non-matching lines produce nothing.
MapOutput run_map(const std::filesystem::path& file, const LogBlock& block,
                  AttackClass attack_class);

// Stable shuffle assignment: FNV-1a 64 over the key's four octets
// (a.b.c.d order), mod reducer_count. Identical across runs and processes.
std::uint32_t partition(Ipv4Addr key, std::uint32_t reducer_count);

// Counter-based reduction of one key group. Returns a report iff the group
// size strictly exceeds the threshold. Every emit in `group` must share one
// key.
std::optional<AttackerReport> run_reduce(std::span<const KeyedEmit> group,
                                         std::uint64_t threshold,
                                         AttackClass attack_class);

// Full job: split every file, map blocks on a worker pool, route counts to
// reducer partitions, reduce, and sort the reports. The attacker set and
// per-IP counts are identical for every (worker_count, reducer_count,
// block_size) combination and any file ordering. A failure in any worker
// fails the whole job; no partial results.
DetectionResult run_job(const std::vector<std::filesystem::path>& files,
                        const JobConfig& config);

// Results file body: a '#'-prefixed stats block (deterministic fields only,
// so outputs are byte-comparable across configurations) followed by one
// line per attacker: src_ip<TAB>count<TAB>attack_class.
std::string results_to_string(const DetectionResult& result);
void write_results_file(const std::filesystem::path& path,
                        const DetectionResult& result);

}  // namespace floodmr
