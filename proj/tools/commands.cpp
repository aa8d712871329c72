#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "floodmr/config.hpp"
#include "floodmr/engine.hpp"
#include "floodmr/pipeline.hpp"
#include "floodmr/traffgen.hpp"

namespace floodmr::cli {

namespace {

AttackClass to_attack_class(const std::string& name) {
  auto cls = attack_class_from_name(name);
  if (!cls) {
    throw std::invalid_argument("unknown attack class '" + name +
                                "' (expected syn, http-get, udp, or icmp)");
  }
  return *cls;
}

Ipv4Addr to_ip(const std::string& text) {
  auto ip = Ipv4Addr::parse(text);
  if (!ip) throw std::invalid_argument("bad IPv4 address '" + text + "'");
  return *ip;
}

std::uint32_t effective_workers(std::uint32_t requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void print_event(const Event& ev) {
  std::fprintf(stderr, "[%s] %s a=%llu b=%llu\n",
               std::string(event_kind_name(ev.kind)).c_str(), ev.name.c_str(),
               (unsigned long long)ev.a, (unsigned long long)ev.b);
}

void print_result_lines(const std::string& body, std::size_t limit) {
  std::istringstream in(body);
  std::string line;
  std::size_t shown = 0, suppressed = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (shown < limit) {
      std::printf("  %s\n", line.c_str());
      ++shown;
    } else {
      ++suppressed;
    }
  }
  if (suppressed > 0) {
    std::printf("  ... and %zu more\n", suppressed);
  }
}

}  // namespace

int run_gen(const GenArgs& args) {
  TraceSpec spec;
  spec.seed = args.seed;
  spec.attack_class = to_attack_class(args.attack_class);
  spec.attacker_count = std::uint32_t(args.attackers);
  spec.packets_per_attacker = std::uint32_t(args.packets_per_attacker);
  spec.attack_fraction = args.mix;
  spec.victim_ip = to_ip(args.victim);
  spec.legitimate_host_count = std::uint32_t(args.legit_hosts);
  spec.legitimate_max_packets = std::uint32_t(args.legit_max);
  spec.packets_per_second = args.pps;

  TraceStats stats = write_trace(spec, args.out);
  std::uint64_t file_bytes = std::filesystem::file_size(args.out);
  std::printf("wrote %s: %llu records (%llu attack, %llu legit-match, %llu noise)\n",
              args.out.c_str(), (unsigned long long)stats.total_records,
              (unsigned long long)stats.attack_records,
              (unsigned long long)stats.legit_match_records,
              (unsigned long long)stats.noise_records);
  std::printf("file size %s, represented wire volume %s\n",
              format_size(file_bytes).c_str(),
              format_size(stats.wire_bytes).c_str());
  return 0;
}

int run_detect(const DetectArgs& args) {
  JobConfig job;
  job.attack_class = to_attack_class(args.attack_class);
  job.threshold = args.threshold;
  job.block_size = parse_size(args.block_size);
  job.worker_count = effective_workers(args.workers);
  job.reducer_count = args.reducers;

  std::vector<std::filesystem::path> files(args.inputs.begin(),
                                           args.inputs.end());
  DetectionResult result = run_job(files, job);
  write_results_file(args.out, result);

  if (!args.quiet) {
    std::printf("attackers found: %zu (class %s, threshold %llu)\n",
                result.attackers.size(), args.attack_class.c_str(),
                (unsigned long long)args.threshold);
    const JobStats& s = result.stats;
    std::printf(
        "records seen %llu, matched %llu, malformed %llu, blocks %llu\n",
        (unsigned long long)s.records_seen,
        (unsigned long long)s.records_matched,
        (unsigned long long)s.malformed_count, (unsigned long long)s.blocks);
    std::printf("map %.1f ms (shuffle %.1f ms), reduce %.1f ms, workers %u\n",
                s.map_ms, s.shuffle_ms, s.reduce_ms, job.worker_count);
    std::printf("results written to %s\n", args.out.c_str());
  }
  return 0;
}

int run_server(const ServerArgs& args) {
  auto [host, port] = parse_host_port(args.listen);
  PipelineConfig config;
  config.peer_host = host;
  config.peer_port = port;
  config.out_dir = args.dir;
  config.job.attack_class = to_attack_class(args.attack_class);
  config.job.threshold = args.threshold;
  config.job.block_size = parse_size(args.block_size);
  config.job.worker_count = effective_workers(args.workers);
  config.job.reducer_count = args.reducers;
  config.max_batches = std::uint32_t(args.batches);

  EventLog log;
  if (args.verbose) log.set_echo(print_event);

  DetectionServer server(config, &log);
  std::printf("detection server listening on %s:%u (staging under %s)\n",
              host.c_str(), unsigned(server.port()), args.dir.c_str());
  std::fflush(stdout);
  DetectionReport report = server.run();
  std::printf("batches processed: %llu, files staged: %llu\n",
              (unsigned long long)report.batches_processed,
              (unsigned long long)report.files_staged);
  for (const auto& path : report.results_files) {
    std::printf("results file: %s\n", path.string().c_str());
  }
  return 0;
}

int run_capture(const CaptureArgs& args) {
  auto [host, port] = parse_host_port(args.peer);
  PipelineConfig config;
  config.peer_host = host;
  config.peer_port = port;
  config.out_dir = args.dir;
  config.file_size = parse_size(args.file_size);
  config.file_count = args.file_count;

  EventLog log;
  if (args.verbose) log.set_echo(print_event);

  std::ifstream file_in;
  std::istream* in = &std::cin;
  if (!args.input.empty() && args.input != "-") {
    file_in.open(args.input, std::ios::binary);
    if (!file_in) {
      throw std::runtime_error("cannot open input " + args.input);
    }
    in = &file_in;
  }
  IstreamLineSource source(*in);

  CaptureReport report = run_capture_role(config, source, &log);
  std::printf(
      "records in %llu, files shipped %llu (%s), batches %llu, dropped %llu\n",
      (unsigned long long)report.records_in,
      (unsigned long long)report.files_shipped,
      format_size(report.bytes_shipped).c_str(),
      (unsigned long long)report.batches_announced,
      (unsigned long long)report.dropped_records);
  for (std::size_t i = 0; i < report.results.size(); ++i) {
    std::printf("batch %zu: %llu attackers\n", i + 1,
                (unsigned long long)report.results[i].attacker_count);
    print_result_lines(report.results[i].result_text, 10);
  }
  return 0;
}

}  // namespace floodmr::cli
