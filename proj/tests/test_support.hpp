#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>

#include "floodmr/detect.hpp"
#include "floodmr/logformat.hpp"

namespace floodmr::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("floodmr-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

inline std::uint64_t count_lines(const std::filesystem::path& path) {
  std::string data = slurp(path);
  std::uint64_t lines = 0;
  bool pending = false;
  for (char c : data) {
    if (c == '\n') {
      ++lines;
      pending = false;
    } else {
      pending = true;
    }
  }
  return lines + (pending ? 1 : 0);
}

// Independent single-pass per-IP counter: reads the file line by line,
// parses, applies the class predicate, and counts per source. This is the
// reference the split/map/shuffle/reduce path is checked against.
inline std::map<Ipv4Addr, std::uint64_t> oracle_count(
    const std::filesystem::path& path, AttackClass cls) {
  std::map<Ipv4Addr, std::uint64_t> counts;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    ParseOutcome outcome = parse_line(line);
    if (outcome.ok() && matches(cls, outcome.record())) {
      ++counts[outcome.record().src_ip];
    }
  }
  return counts;
}

inline std::map<Ipv4Addr, std::uint64_t> oracle_over_threshold(
    const std::map<Ipv4Addr, std::uint64_t>& counts, std::uint64_t threshold) {
  std::map<Ipv4Addr, std::uint64_t> out;
  for (const auto& [ip, count] : counts) {
    if (count > threshold) out.emplace(ip, count);
  }
  return out;
}

// Random valid record; details avoid leading whitespace and control bytes so
// the format/parse round trip is exact.
inline PacketRecord random_record(std::mt19937_64& rng) {
  static const char* kDetailChars =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
      "[]()<>=:/?.,_- ";
  PacketRecord rec;
  rec.frame_no = rng() % 1000000 + 1;
  rec.timestamp = double(rng() % 4000000000ull) / 1e6;
  rec.src_ip = Ipv4Addr::from_value(std::uint32_t(rng()));
  rec.dst_ip = Ipv4Addr::from_value(std::uint32_t(rng()));
  rec.protocol = Protocol(rng() % 6);
  rec.length = rng() % 65536;
  std::size_t len = rng() % 60;
  rec.detail.reserve(len);
  std::size_t alphabet = std::char_traits<char>::length(kDetailChars);
  for (std::size_t i = 0; i < len; ++i) {
    char c = kDetailChars[rng() % alphabet];
    if (i == 0 && c == ' ') c = 'x';
    rec.detail += c;
  }
  return rec;
}

}  // namespace floodmr::testing
