#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

constexpr const char* kConfigHelp =
    "key = value configuration file (flags override it)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flood traffic generation, log shipping, and counter-based "
               "map/reduce detection"};
  app.require_subcommand(1);

  floodmr::cli::GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "write a synthetic trace log file");
  gen->set_config("--config", "", kConfigHelp);
  gen->add_option("--out", gen_args.out, "output log file")->required();
  gen->add_option("--attack-class", gen_args.attack_class,
                  "syn|http-get|udp|icmp");
  gen->add_option("--attackers", gen_args.attackers, "distinct attacker IPs");
  gen->add_option("--packets-per-attacker", gen_args.packets_per_attacker,
                  "matching records per attacker");
  gen->add_option("--mix", gen_args.mix, "attack share of all records (0,1]");
  gen->add_option("--seed", gen_args.seed, "RNG seed");
  gen->add_option("--legit-hosts", gen_args.legit_hosts,
                  "distinct legitimate hosts");
  gen->add_option("--legit-max", gen_args.legit_max,
                  "per-host cap on matching records");
  gen->add_option("--victim", gen_args.victim, "victim IPv4 address");
  gen->add_option("--pps", gen_args.pps, "mean packets per second");

  floodmr::cli::DetectArgs detect_args;
  auto* detect =
      app.add_subcommand("detect", "run one detection job on local log files");
  detect->set_config("--config", "", kConfigHelp);
  detect->add_option("--input", detect_args.inputs, "input log file(s)")
      ->required()
      ->expected(-1);
  detect->add_option("--attack-class", detect_args.attack_class,
                     "syn|http-get|udp|icmp");
  detect->add_option("--threshold", detect_args.threshold,
                     "report sources with count strictly above this");
  detect->add_option("--block-size", detect_args.block_size,
                     "mapper block size (e.g. 32KB, 128MB)");
  detect->add_option("--workers", detect_args.workers,
                     "map workers (0 = available cores)");
  detect->add_option("--reducers", detect_args.reducers, "reducer partitions");
  detect->add_option("--out", detect_args.out, "results file");
  detect->add_flag("--quiet", detect_args.quiet, "suppress the summary");

  floodmr::cli::ServerArgs server_args;
  auto* server = app.add_subcommand(
      "detect-server", "receive shipped logs and run detection per batch");
  server->set_config("--config", "", kConfigHelp);
  server->add_option("--listen", server_args.listen, "host:port to listen on");
  server->add_option("--dir", server_args.dir,
                     "staging and results directory");
  server->add_option("--attack-class", server_args.attack_class,
                     "syn|http-get|udp|icmp");
  server->add_option("--threshold", server_args.threshold, "report threshold");
  server->add_option("--block-size", server_args.block_size,
                     "mapper block size");
  server->add_option("--workers", server_args.workers,
                     "map workers (0 = available cores)");
  server->add_option("--reducers", server_args.reducers, "reducer partitions");
  server->add_option("--batches", server_args.batches,
                     "stop after this many batches (0 = keep serving)");
  server->add_flag("-v,--verbose", server_args.verbose, "echo protocol events");

  floodmr::cli::CaptureArgs capture_args;
  auto* capture = app.add_subcommand(
      "capture", "roll fixed-size log files from a record stream and ship them");
  capture->set_config("--config", "", kConfigHelp);
  capture->add_option("--peer", capture_args.peer,
                      "detection server host:port")
      ->required();
  capture->add_option("--dir", capture_args.dir, "local spool directory");
  capture->add_option("--file-size", capture_args.file_size,
                      "roll files at this size");
  capture->add_option("--file-count", capture_args.file_count,
                      "files per detection batch");
  capture->add_option("--input", capture_args.input,
                      "log line source file (default: stdin)");
  capture->add_flag("-v,--verbose", capture_args.verbose,
                    "echo protocol events");

  floodmr::cli::BenchArgs bench_args;
  auto* bench = app.add_subcommand(
      "bench", "run a loopback pipeline matrix and emit per-phase timings");
  bench->set_config("--config", "", kConfigHelp);
  bench->add_option("--out", bench_args.out, "CSV output path");
  bench->add_option("--file-sizes", bench_args.file_sizes,
                    "comma list, e.g. 1MB,4MB");
  bench->add_option("--thresholds", bench_args.thresholds, "comma list");
  bench->add_option("--block-sizes", bench_args.block_sizes, "comma list");
  bench->add_option("--workers", bench_args.workers, "comma list");
  bench->add_option("--attack-class", bench_args.attack_class,
                    "syn|http-get|udp|icmp");
  bench->add_option("--packets-per-attacker", bench_args.packets_per_attacker,
                    "matching records per attacker");
  bench->add_option("--mix", bench_args.mix, "attack share of all records");
  bench->add_option("--seed", bench_args.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*gen) return floodmr::cli::run_gen(gen_args);
    if (*detect) return floodmr::cli::run_detect(detect_args);
    if (*server) return floodmr::cli::run_server(server_args);
    if (*capture) return floodmr::cli::run_capture(capture_args);
    if (*bench) return floodmr::cli::run_bench(bench_args);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
