#include "floodmr/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <charconv>
#include <chrono>
#include <cstring>
#include <deque>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "floodmr/hash.hpp"

namespace floodmr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::ifstream open_binary(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw EngineError("cannot open " + file.string());
  return in;
}

std::optional<AttackerReport> threshold_report(Ipv4Addr ip, std::uint64_t count,
                                               std::uint64_t threshold,
                                               AttackClass cls) {
  if (count > threshold) return AttackerReport{ip, count, cls};
  return std::nullopt;
}

void sort_reports(std::vector<AttackerReport>& reports) {
  std::sort(reports.begin(), reports.end(),
            [](const AttackerReport& a, const AttackerReport& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.src_ip < b.src_ip;
            });
}

}  // namespace

std::vector<LogBlock> split_blocks(const std::filesystem::path& file,
                                   std::uint64_t block_size,
                                   std::uint32_t file_id) {
  if (block_size == 0) throw EngineError("block_size must be positive");
  std::ifstream in = open_binary(file);

  std::vector<LogBlock> blocks;
  std::vector<char> buf(1 << 20);
  std::uint64_t offset = 0;       // absolute position of buf[0]'s predecessor end
  std::uint64_t block_start = 0;
  std::uint64_t line_start = 0;
  std::uint64_t records = 0;
  std::uint64_t line_no = 0;
  std::uint64_t block_id = 0;

  auto check_line = [&](std::uint64_t line_end) {
    std::uint64_t len = line_end - line_start;
    if (len > block_size) {
      throw EngineError("line " + std::to_string(line_no + 1) + " of " +
                        file.string() + " is " + std::to_string(len) +
                        " bytes, longer than the block size " +
                        std::to_string(block_size));
    }
  };

  for (;;) {
    in.read(buf.data(), std::streamsize(buf.size()));
    std::size_t got = std::size_t(in.gcount());
    if (got == 0) {
      if (!in.eof()) throw EngineError("read failed on " + file.string());
      break;
    }
    const char* base = buf.data();
    std::size_t scanned = 0;
    while (scanned < got) {
      const char* nl = static_cast<const char*>(
          std::memchr(base + scanned, '\n', got - scanned));
      if (nl == nullptr) break;
      std::uint64_t abs = offset + std::uint64_t(nl - base) + 1;  // past '\n'
      check_line(abs);
      ++line_no;
      ++records;
      if (abs - block_start >= block_size) {
        blocks.push_back({block_id++, file_id, block_start, abs, records});
        block_start = abs;
        records = 0;
      }
      line_start = abs;
      scanned = std::size_t(nl - base) + 1;
    }
    offset += got;
    if (in.eof()) break;
  }

  // Unterminated trailing line, then the final partial block.
  if (offset > line_start) {
    check_line(offset);
    ++records;
  }
  if (offset > block_start) {
    blocks.push_back({block_id++, file_id, block_start, offset, records});
  }
  return blocks;
}

namespace {

// Shared line walk for run_map and the job workers.
template <typename Fn>
void for_each_line(const std::filesystem::path& file, const LogBlock& block,
                   Fn&& fn) {
  std::ifstream in = open_binary(file);
  in.seekg(std::streamoff(block.byte_start));
  std::uint64_t span = block.byte_end - block.byte_start;
  std::string data(span, '\0');
  in.read(data.data(), std::streamsize(span));
  if (std::uint64_t(in.gcount()) != span) {
    throw EngineError("short read of block " + std::to_string(block.block_id) +
                      " from " + file.string());
  }

  std::size_t pos = 0;
  while (pos < data.size()) {
    const char* nl = static_cast<const char*>(
        std::memchr(data.data() + pos, '\n', data.size() - pos));
    std::size_t end = nl ? std::size_t(nl - data.data()) : data.size();
    fn(std::string_view(data.data() + pos, end - pos));
    pos = end + 1;
  }
}

}  // namespace

MapOutput run_map(const std::filesystem::path& file, const LogBlock& block,
                  AttackClass attack_class) {
  MapOutput out;
  std::uint64_t index = 0;
  for_each_line(file, block, [&](std::string_view line) {
    std::uint64_t i = index++;
    ++out.records_seen;
    ParseOutcome parsed = parse_line(line);
    if (!parsed.ok()) {
      ++out.malformed;
      return;
    }
    const PacketRecord& rec = parsed.record();
    if (matches(attack_class, rec)) {
      out.emits.push_back({rec.src_ip, rec, block.block_id, i});
    }
  });
  return out;
}

std::uint32_t partition(Ipv4Addr key, std::uint32_t reducer_count) {
  if (reducer_count == 0) throw EngineError("reducer_count must be >= 1");
  auto octets = key.octets();
  return std::uint32_t(fnv1a64(octets.data(), octets.size()) % reducer_count);
}

std::optional<AttackerReport> run_reduce(std::span<const KeyedEmit> group,
                                         std::uint64_t threshold,
                                         AttackClass attack_class) {
  if (group.empty()) return std::nullopt;
#ifndef NDEBUG
  for (const auto& e : group) assert(e.key == group.front().key);
#endif
  return threshold_report(group.front().key, group.size(), threshold,
                          attack_class);
}

namespace {

struct PartitionAccumulator {
  std::mutex mu;
  std::unordered_map<std::uint32_t, std::uint64_t> counts;
};

struct WorkerTally {
  std::uint64_t seen = 0;
  std::uint64_t matched = 0;
  std::uint64_t malformed = 0;
  double shuffle_ms = 0.0;
};

}  // namespace

DetectionResult run_job(const std::vector<std::filesystem::path>& files,
                        const JobConfig& config) {
  if (config.threshold == 0) throw EngineError("threshold must be >= 1");
  if (config.block_size == 0) throw EngineError("block_size must be >= 1");
  if (config.worker_count == 0) throw EngineError("worker_count must be >= 1");
  if (config.reducer_count == 0) throw EngineError("reducer_count must be >= 1");

  DetectionResult result;

  std::vector<LogBlock> blocks;
  std::uint64_t split_records = 0;
  for (std::uint32_t file_id = 0; file_id < files.size(); ++file_id) {
    auto file_blocks = split_blocks(files[file_id], config.block_size, file_id);
    for (auto& b : file_blocks) {
      b.block_id = blocks.size();
      split_records += b.record_count;
      blocks.push_back(b);
    }
  }
  result.stats.blocks = blocks.size();
  if (blocks.empty()) return result;

  std::deque<PartitionAccumulator> partitions(config.reducer_count);
  std::vector<WorkerTally> tallies(config.worker_count);
  std::atomic<std::size_t> next_block{0};
  std::atomic<bool> failed{false};
  std::mutex error_mu;
  std::exception_ptr first_error;

  auto worker = [&](std::uint32_t w) {
    try {
      std::vector<std::unordered_map<std::uint32_t, std::uint64_t>> local(
          config.reducer_count);
      WorkerTally& tally = tallies[w];
      for (;;) {
        std::size_t i = next_block.fetch_add(1, std::memory_order_relaxed);
        if (i >= blocks.size() || failed.load(std::memory_order_relaxed)) break;
        const LogBlock& block = blocks[i];
        for_each_line(files[block.file_id], block, [&](std::string_view line) {
          ++tally.seen;
          ParseOutcome parsed = parse_line(line);
          if (!parsed.ok()) {
            ++tally.malformed;
            return;
          }
          const PacketRecord& rec = parsed.record();
          if (matches(config.attack_class, rec)) {
            ++tally.matched;
            ++local[partition(rec.src_ip, config.reducer_count)]
                   [rec.src_ip.value()];
          }
        });
      }
      // Route this worker's combined counts to the reducer partitions.
      auto t0 = Clock::now();
      for (std::uint32_t p = 0; p < config.reducer_count; ++p) {
        if (local[p].empty()) continue;
        std::lock_guard<std::mutex> lock(partitions[p].mu);
        for (const auto& [ip, count] : local[p]) {
          partitions[p].counts[ip] += count;
        }
      }
      tally.shuffle_ms = ms_since(t0);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mu);
      if (!first_error) first_error = std::current_exception();
      failed.store(true, std::memory_order_relaxed);
    }
  };

  auto map_start = Clock::now();
  std::vector<std::thread> pool;
  pool.reserve(config.worker_count);
  for (std::uint32_t w = 0; w < config.worker_count; ++w) {
    pool.emplace_back(worker, w);
  }
  for (auto& t : pool) t.join();
  result.stats.map_ms = ms_since(map_start);

  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const std::exception& e) {
      throw EngineError(std::string("map worker failed: ") + e.what());
    }
  }

  for (const auto& tally : tallies) {
    result.stats.records_seen += tally.seen;
    result.stats.records_matched += tally.matched;
    result.stats.malformed_count += tally.malformed;
    result.stats.shuffle_ms += tally.shuffle_ms;
  }

  auto reduce_start = Clock::now();
  for (auto& part : partitions) {
    for (const auto& [ip, count] : part.counts) {
      result.stats.reduced_records += count;
      if (auto report = threshold_report(Ipv4Addr::from_value(ip), count,
                                         config.threshold,
                                         config.attack_class)) {
        result.attackers.push_back(*report);
      }
    }
  }
  sort_reports(result.attackers);
  result.stats.reduce_ms = ms_since(reduce_start);

  if (result.stats.records_seen != split_records) {
    throw EngineError("record conservation violated: split saw " +
                      std::to_string(split_records) + " lines, map saw " +
                      std::to_string(result.stats.records_seen));
  }
  if (result.stats.records_matched != result.stats.reduced_records) {
    throw EngineError("emit conservation violated: mapped " +
                      std::to_string(result.stats.records_matched) +
                      " records, reduced " +
                      std::to_string(result.stats.reduced_records));
  }
  return result;
}

std::string results_to_string(const DetectionResult& result) {
  std::string out;
  out.reserve(128 + result.attackers.size() * 32);
  auto stat = [&](std::string_view key, std::uint64_t v) {
    out += "# ";
    out += key;
    out += '\t';
    out += std::to_string(v);
    out += '\n';
  };
  stat("records_seen", result.stats.records_seen);
  stat("records_matched", result.stats.records_matched);
  stat("malformed", result.stats.malformed_count);
  for (const auto& a : result.attackers) {
    a.src_ip.append_to(out);
    out += '\t';
    out += std::to_string(a.count);
    out += '\t';
    out += attack_class_name(a.attack_class);
    out += '\n';
  }
  return out;
}

void write_results_file(const std::filesystem::path& path,
                        const DetectionResult& result) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw EngineError("cannot open " + path.string() + " for writing");
  std::string body = results_to_string(result);
  out.write(body.data(), std::streamsize(body.size()));
  out.flush();
  if (!out) throw EngineError("short write to " + path.string());
}

}  // namespace floodmr
