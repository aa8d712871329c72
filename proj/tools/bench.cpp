#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include "commands.hpp"
#include "floodmr/config.hpp"
#include "floodmr/pipeline.hpp"

namespace floodmr::cli {

namespace {

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string item = text.substr(
        start, comma == std::string::npos ? comma : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty list: '" + text + "'");
  return out;
}

double ms_between(std::chrono::steady_clock::time_point a,
                  std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

// Mean formatted line length for this class/mix, from a small probe stream.
double probe_line_bytes(AttackClass cls, double mix, std::uint64_t seed) {
  TraceSpec probe;
  probe.seed = seed;
  probe.attack_class = cls;
  probe.attacker_count = 50;
  probe.packets_per_attacker = 40;
  probe.attack_fraction = mix;
  probe.legitimate_host_count = 20;
  probe.legitimate_max_packets = 20;
  TraceGenerator gen(probe);
  std::uint64_t bytes = 0, records = 0;
  std::string line;
  while (auto rec = gen.next()) {
    line.clear();
    append_line(line, *rec);
    bytes += line.size();
    ++records;
  }
  return double(bytes) / double(records);
}

struct ScenarioTiming {
  double capture_ms = 0.0;
  double transfer_ms = 0.0;
  double detect_ms = 0.0;
  double total_ms = 0.0;
  std::uint64_t attackers = 0;
};

ScenarioTiming time_events(const std::vector<Event>& capture_events,
                           const std::vector<Event>& server_events,
                           std::chrono::steady_clock::time_point start) {
  ScenarioTiming t;
  std::map<std::string, std::chrono::steady_clock::time_point> announced;
  for (const auto& ev : capture_events) {
    switch (ev.kind) {
      case EventKind::FileClosed:
        t.capture_ms = std::max(t.capture_ms, ms_between(start, ev.at));
        break;
      case EventKind::AnnounceSent:
        announced[ev.name] = ev.at;
        break;
      case EventKind::AckReceived: {
        auto it = announced.find(ev.name);
        if (it != announced.end()) {
          t.transfer_ms += ms_between(it->second, ev.at);
        }
        break;
      }
      case EventKind::ResultReceived:
        t.total_ms = std::max(t.total_ms, ms_between(start, ev.at));
        break;
      default:
        break;
    }
  }
  std::chrono::steady_clock::time_point job_start{};
  for (const auto& ev : server_events) {
    if (ev.kind == EventKind::JobStarted) job_start = ev.at;
    if (ev.kind == EventKind::JobFinished) {
      t.detect_ms += ms_between(job_start, ev.at);
    }
  }
  return t;
}

}  // namespace

int run_bench(const BenchArgs& args) {
  AttackClass cls = *attack_class_from_name(args.attack_class);
  auto file_sizes = split_csv(args.file_sizes);
  auto thresholds = split_csv(args.thresholds);
  auto block_sizes = split_csv(args.block_sizes);
  auto workers_list = split_csv(args.workers);

  std::ofstream csv(args.out, std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot open " + args.out);
  const char* header =
      "scenario,file_size,threshold,block_size,workers,capture_ms,"
      "transfer_ms,detect_ms,total_ms,attackers_found";
  csv << header << '\n';
  std::printf("%s\n", header);

  double line_bytes = probe_line_bytes(cls, args.mix, args.seed);
  auto tmp_root = std::filesystem::temp_directory_path() /
                  ("floodmr-bench-" + std::to_string(::getpid()));

  for (const auto& fs_label : file_sizes) {
    std::uint64_t file_size = parse_size(fs_label);
    std::uint64_t total_records =
        std::max<std::uint64_t>(1, std::uint64_t(double(file_size) / line_bytes));
    std::uint64_t attackers = std::max<std::uint64_t>(
        1, std::uint64_t(double(total_records) * args.mix /
                         double(args.packets_per_attacker)));

    TraceSpec spec;
    spec.seed = args.seed;
    spec.attack_class = cls;
    spec.attacker_count = std::uint32_t(attackers);
    spec.packets_per_attacker = std::uint32_t(args.packets_per_attacker);
    spec.attack_fraction = args.mix;
    spec.legitimate_host_count = std::uint32_t(std::max<std::uint64_t>(
        1, std::min<std::uint64_t>(2000, attackers / 4 + 1)));
    spec.legitimate_max_packets =
        std::uint32_t(std::min<std::uint64_t>(100, args.packets_per_attacker - 1));

    for (const auto& thr_label : thresholds) {
      std::uint64_t threshold = std::stoull(thr_label);
      for (const auto& bs_label : block_sizes) {
        std::uint64_t block_size = parse_size(bs_label);
        for (const auto& w_label : workers_list) {
          std::uint32_t workers = std::uint32_t(std::stoul(w_label));

          std::string scenario = "fs" + fs_label + "-t" + thr_label + "-b" +
                                 bs_label + "-w" + w_label;
          auto dir = tmp_root / scenario;
          std::filesystem::create_directories(dir);

          PipelineConfig server_cfg;
          server_cfg.peer_host = "127.0.0.1";
          server_cfg.peer_port = 0;
          server_cfg.out_dir = dir / "detect";
          server_cfg.job = {cls, threshold, block_size, workers, 1};
          server_cfg.max_batches = 1;
          server_cfg.io_timeout = std::chrono::milliseconds(300000);

          EventLog server_log;
          DetectionServer server(server_cfg, &server_log);

          std::exception_ptr server_error;
          std::thread server_thread([&] {
            try {
              server.run();
            } catch (...) {
              server_error = std::current_exception();
            }
          });

          PipelineConfig capture_cfg;
          capture_cfg.peer_host = "127.0.0.1";
          capture_cfg.peer_port = server.port();
          capture_cfg.out_dir = dir / "spool";
          capture_cfg.file_size = file_size;
          // One batch per scenario: the end-of-stream flush carries the
          // actual file count.
          capture_cfg.file_count = UINT32_MAX;
          capture_cfg.io_timeout = std::chrono::milliseconds(300000);

          EventLog capture_log;
          GeneratorLineSource source(spec);
          auto start = std::chrono::steady_clock::now();
          CaptureReport report =
              run_capture_role(capture_cfg, source, &capture_log);
          server_thread.join();
          if (server_error) std::rethrow_exception(server_error);

          ScenarioTiming t = time_events(capture_log.snapshot(),
                                         server_log.snapshot(), start);
          t.attackers = report.results.empty()
                            ? 0
                            : report.results.front().attacker_count;

          char row[256];
          std::snprintf(row, sizeof(row), "%s,%llu,%llu,%llu,%u,%.1f,%.1f,%.1f,%.1f,%llu",
                        scenario.c_str(), (unsigned long long)file_size,
                        (unsigned long long)threshold,
                        (unsigned long long)block_size, workers, t.capture_ms,
                        t.transfer_ms, t.detect_ms, t.total_ms,
                        (unsigned long long)t.attackers);
          csv << row << '\n';
          csv.flush();
          std::printf("%s\n", row);
          std::fflush(stdout);

          std::filesystem::remove_all(dir);
        }
      }
    }
  }
  std::error_code ec;
  std::filesystem::remove_all(tmp_root, ec);
  std::printf("bench matrix written to %s\n", args.out.c_str());
  return 0;
}

}  // namespace floodmr::cli
