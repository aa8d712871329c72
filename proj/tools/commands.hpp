#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace floodmr::cli {

struct GenArgs {
  std::string out;
  std::string attack_class = "udp";
  std::uint64_t attackers = 100;
  std::uint64_t packets_per_attacker = 600;
  double mix = 0.8;
  std::uint64_t seed = 1;
  std::uint64_t legit_hosts = 50;
  std::uint64_t legit_max = 100;
  std::string victim = "172.16.0.100";
  double pps = 10000.0;
};

struct DetectArgs {
  std::vector<std::string> inputs;
  std::string attack_class = "udp";
  std::uint64_t threshold = 500;
  std::string block_size = "128MB";
  std::uint32_t workers = 0;  // 0 = available cores
  std::uint32_t reducers = 1;
  std::string out = "results.tsv";
  bool quiet = false;
};

struct ServerArgs {
  std::string listen = "0.0.0.0:9400";
  std::string dir = "detect-data";
  std::string attack_class = "udp";
  std::uint64_t threshold = 500;
  std::string block_size = "128MB";
  std::uint32_t workers = 0;
  std::uint32_t reducers = 1;
  std::uint64_t batches = 0;  // 0 = serve until interrupted
  bool verbose = false;
};

struct CaptureArgs {
  std::string peer;
  std::string dir = "capture-spool";
  std::string file_size = "1MB";
  std::uint32_t file_count = 1;
  std::string input;  // empty = stdin
  bool verbose = false;
};

struct BenchArgs {
  std::string out = "bench.csv";
  std::string file_sizes = "1MB,4MB";
  std::string thresholds = "500,1000";
  std::string block_sizes = "64KB,1MB";
  std::string workers = "1,2";
  std::string attack_class = "udp";
  std::uint64_t packets_per_attacker = 1100;
  double mix = 0.8;
  std::uint64_t seed = 7;
};

int run_gen(const GenArgs& args);
int run_detect(const DetectArgs& args);
int run_server(const ServerArgs& args);
int run_capture(const CaptureArgs& args);
int run_bench(const BenchArgs& args);

}  // namespace floodmr::cli
