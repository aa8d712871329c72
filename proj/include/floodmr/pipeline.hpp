#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "floodmr/engine.hpp"
#include "floodmr/traffgen.hpp"
#include "floodmr/wire.hpp"

namespace floodmr {

class PipelineError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tunables shared by both roles. The capture role rolls log files of
// file_size bytes (closed at the next line boundary) under out_dir and ships
// them to peer_host:peer_port; the detection role listens on the same
// address, stages files under out_dir/staging/<batch>/, and keeps one
// retained results file per batch in out_dir.
struct PipelineConfig {
  std::uint64_t file_size = 1ull << 20;
  std::uint32_t file_count = 1;  // files per batch before detection starts
  std::filesystem::path out_dir;
  std::string peer_host = "127.0.0.1";
  std::uint16_t peer_port = 9400;
  JobConfig job;

  std::uint32_t max_batches = 0;  // detection role: stop after N batches (0 = no limit)
  int connect_attempts = 5;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::milliseconds io_timeout{30000};
};

enum class EventKind : std::uint8_t {
  // capture role
  FileClosed,        // name, a=bytes, b=checksum
  AnnounceSent,      // name, a=bytes, b=seq
  PullReceived,      // name
  DataSent,          // name, a=bytes
  AckReceived,       // name
  LocalFileDeleted,  // name
  BatchDoneSent,     // a=count
  ResultReceived,    // a=attacker count
  // detection role
  AnnounceReceived,  // name, a=bytes, b=seq
  PullSent,          // name
  FileStaged,        // name, a=bytes, b=checksum
  AckSent,           // name
  BatchDoneReceived, // a=count
  JobStarted,        // a=batch
  JobFinished,       // a=batch, b=attacker count
  ResultSent,        // a=batch, b=attacker count
  StagingDeleted,    // a=batch
  // either
  ErrorSent,      // name=code
  ErrorReceived,  // name=code
  ConnectionLost,
};

std::string_view event_kind_name(EventKind k);

struct Event {
  EventKind kind;
  std::string name;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::chrono::steady_clock::time_point at;
};

// Append-only, thread-safe. The append order is the observation order, which
// tests use to check protocol choreography (e.g. all ACKs before JobStarted).
class EventLog {
 public:
  void append(EventKind kind, std::string name = {}, std::uint64_t a = 0,
              std::uint64_t b = 0);
  std::vector<Event> snapshot() const;
  // Optional mirror of every event, e.g. for verbose CLI output.
  void set_echo(std::function<void(const Event&)> echo);

 private:
  mutable std::mutex mu_;
  std::vector<Event> events_;
  std::function<void(const Event&)> echo_;
};

// Stream of log lines feeding the capture role (generator output, a file, or
// standard input). next() returns false at end of stream.
class LineSource {
 public:
  virtual ~LineSource() = default;
  virtual bool next(std::string& line) = 0;  // line without trailing newline
};

class IstreamLineSource : public LineSource {
 public:
  explicit IstreamLineSource(std::istream& in) : in_(in) {}
  bool next(std::string& line) override;

 private:
  std::istream& in_;
};

class GeneratorLineSource : public LineSource {
 public:
  explicit GeneratorLineSource(const TraceSpec& spec) : gen_(spec) {}
  bool next(std::string& line) override;
  const TraceStats& stats() const { return gen_.stats(); }

 private:
  TraceGenerator gen_;
};

struct BatchResult {
  std::uint64_t attacker_count = 0;
  std::string result_text;  // results-file body as received
};

struct CaptureReport {
  std::uint64_t records_in = 0;
  std::uint64_t files_shipped = 0;
  std::uint64_t batches_announced = 0;
  std::uint64_t bytes_shipped = 0;
  // Records lost during intake pauses. Intake applies backpressure instead
  // of dropping, so with file/generator sources this stays 0.
  std::uint64_t dropped_records = 0;
  std::vector<BatchResult> results;
};

// Sender side of one announced file: waits for PULL, streams DATA, waits for
// ACK; resends when the receiver re-PULLs (bounded). RESULT frames that
// interleave while an earlier batch's job completes are handed to
// `on_result` (verb fields + raw payload). Throws WireError on connection
// failure, PipelineError on retry exhaustion.
void transfer_file(wire::FrameConnection& conn, const std::string& name,
                   std::string_view bytes,
                   const std::function<void(const wire::Frame&, std::string)>&
                       on_result,
                   EventLog* log);

// Runs the capture role until the source is exhausted: rolls fixed-size log
// files, ships each one (announce/pull/data/ack), deletes the local copy on
// ACK, gates batches on file_count, and surfaces every RESULT. A trailing
// partial batch is flushed with its actual count at end of stream.
CaptureReport run_capture_role(const PipelineConfig& config, LineSource& source,
                               EventLog* log = nullptr);

struct DetectionReport {
  std::uint64_t files_staged = 0;
  std::uint64_t batches_processed = 0;
  std::vector<std::filesystem::path> results_files;
};

// The detection role: binds at construction (so tests can bind port 0 and
// read the real port back), then run() accepts the capture connection and
// serves it. Files are staged under out_dir/staging/<batch>/; when a
// BATCH_DONE arrives with every announced file staged, the engine job runs
// (one at a time, on its own thread, so the next batch can stage meanwhile),
// the results file is written to out_dir and retained, RESULT is sent, and
// the batch's staged inputs are deleted.
class DetectionServer {
 public:
  explicit DetectionServer(PipelineConfig config, EventLog* log = nullptr);
  std::uint16_t port() const;
  DetectionReport run();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;

 public:
  ~DetectionServer();
};

// Convenience wrapper: bind and serve.
DetectionReport run_detection_role(const PipelineConfig& config,
                                   EventLog* log = nullptr);

}  // namespace floodmr
