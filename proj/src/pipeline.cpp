#include "floodmr/pipeline.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <fstream>
#include <set>
#include <thread>
#include <utility>

#include "floodmr/hash.hpp"

namespace floodmr {

namespace {

std::string sequence_name(std::uint64_t seq) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "log-%06llu.txt", (unsigned long long)seq);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) throw PipelineError("read failed on " + path.string());
  return data;
}

struct CompletedFile {
  std::filesystem::path path;
  std::string name;
  std::uint64_t size = 0;
  std::uint64_t checksum = 0;
  std::uint64_t seq = 0;
};

// Hand-off between the intake thread and the transfer loop. Bounded, so a
// slow transfer backpressures intake instead of dropping records.
class CompletedFileQueue {
 public:
  explicit CompletedFileQueue(std::size_t capacity) : capacity_(capacity) {}

  bool push(CompletedFile file) {
    std::unique_lock<std::mutex> lock(mu_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_ || aborted_; });
    if (aborted_) return false;
    items_.push_back(std::move(file));
    not_empty_.notify_one();
    return true;
  }

  std::optional<CompletedFile> pop() {
    std::unique_lock<std::mutex> lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_ || aborted_; });
    if (items_.empty()) return std::nullopt;
    CompletedFile f = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return f;
  }

  void close() {
    std::lock_guard<std::mutex> lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
  }

  void abort() {
    std::lock_guard<std::mutex> lock(mu_);
    aborted_ = true;
    closed_ = true;
    not_full_.notify_all();
    not_empty_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable not_full_, not_empty_;
  std::deque<CompletedFile> items_;
  std::size_t capacity_;
  bool closed_ = false;
  bool aborted_ = false;
};

}  // namespace

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::FileClosed: return "file_closed";
    case EventKind::AnnounceSent: return "announce_sent";
    case EventKind::PullReceived: return "pull_received";
    case EventKind::DataSent: return "data_sent";
    case EventKind::AckReceived: return "ack_received";
    case EventKind::LocalFileDeleted: return "local_file_deleted";
    case EventKind::BatchDoneSent: return "batch_done_sent";
    case EventKind::ResultReceived: return "result_received";
    case EventKind::AnnounceReceived: return "announce_received";
    case EventKind::PullSent: return "pull_sent";
    case EventKind::FileStaged: return "file_staged";
    case EventKind::AckSent: return "ack_sent";
    case EventKind::BatchDoneReceived: return "batch_done_received";
    case EventKind::JobStarted: return "job_started";
    case EventKind::JobFinished: return "job_finished";
    case EventKind::ResultSent: return "result_sent";
    case EventKind::StagingDeleted: return "staging_deleted";
    case EventKind::ErrorSent: return "error_sent";
    case EventKind::ErrorReceived: return "error_received";
    case EventKind::ConnectionLost: return "connection_lost";
  }
  return "unknown";
}

void EventLog::append(EventKind kind, std::string name, std::uint64_t a,
                      std::uint64_t b) {
  Event ev{kind, std::move(name), a, b, std::chrono::steady_clock::now()};
  std::function<void(const Event&)> echo;
  {
    std::lock_guard<std::mutex> lock(mu_);
    events_.push_back(ev);
    echo = echo_;
  }
  if (echo) echo(ev);
}

std::vector<Event> EventLog::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return events_;
}

void EventLog::set_echo(std::function<void(const Event&)> echo) {
  std::lock_guard<std::mutex> lock(mu_);
  echo_ = std::move(echo);
}

namespace {

void log_event(EventLog* log, EventKind kind, std::string name = {},
               std::uint64_t a = 0, std::uint64_t b = 0) {
  if (log) log->append(kind, std::move(name), a, b);
}

}  // namespace

bool IstreamLineSource::next(std::string& line) {
  return static_cast<bool>(std::getline(in_, line));
}

bool GeneratorLineSource::next(std::string& line) {
  auto rec = gen_.next();
  if (!rec) return false;
  line = format_line(*rec);
  return true;
}

void transfer_file(wire::FrameConnection& conn, const std::string& name,
                   std::string_view bytes,
                   const std::function<void(const wire::Frame&, std::string)>&
                       on_result,
                   EventLog* log) {
  int sends = 0;
  for (;;) {
    auto frame = conn.recv();
    if (!frame) throw wire::WireError("peer closed during transfer of " + name);
    switch (frame->verb) {
      case wire::Verb::Pull: {
        if (frame->field(0) != name) {
          log_event(log, EventKind::ErrorReceived, "unexpected_pull");
          break;
        }
        log_event(log, EventKind::PullReceived, name);
        if (++sends > 3) {
          throw PipelineError("transfer of " + name +
                              " failed after repeated pulls");
        }
        conn.send_with_payload(wire::Verb::Data,
                               {std::to_string(bytes.size())}, bytes);
        log_event(log, EventKind::DataSent, name, bytes.size());
        break;
      }
      case wire::Verb::Ack:
        if (frame->field(0) == name) {
          log_event(log, EventKind::AckReceived, name);
          return;
        }
        log_event(log, EventKind::ErrorReceived, "unexpected_ack");
        break;
      case wire::Verb::Result:
        if (on_result) on_result(*frame, conn.recv_raw(frame->field_u64(1)));
        break;
      case wire::Verb::Error:
        log_event(log, EventKind::ErrorReceived, frame->field(0));
        break;
      default:
        throw wire::WireError(std::string("unexpected ") +
                              std::string(wire::verb_name(frame->verb)) +
                              " while transferring " + name);
    }
  }
}

CaptureReport run_capture_role(const PipelineConfig& config, LineSource& source,
                               EventLog* log) {
  if (config.file_size == 0) throw PipelineError("file_size must be positive");
  if (config.file_count == 0) throw PipelineError("file_count must be >= 1");
  std::filesystem::create_directories(config.out_dir);

  CaptureReport report;
  CompletedFileQueue queue(4);
  std::atomic<std::uint64_t> records_in{0};
  std::string intake_error;
  std::mutex intake_error_mu;

  std::thread intake([&] {
    try {
      std::uint64_t seq = 0;
      std::ofstream out;
      std::filesystem::path path;
      std::string name;
      std::uint64_t size = 0;
      Fnv1a64 hasher;

      auto open_next = [&] {
        ++seq;
        name = sequence_name(seq);
        path = config.out_dir / name;
        out.open(path, std::ios::binary | std::ios::trunc);
        if (!out) throw PipelineError("cannot open " + path.string());
        size = 0;
        hasher = Fnv1a64{};
      };
      auto roll = [&] {
        out.flush();
        if (!out) throw PipelineError("write failed on " + path.string());
        out.close();
        log_event(log, EventKind::FileClosed, name, size, hasher.digest());
        if (!queue.push({path, name, size, hasher.digest(), seq})) {
          throw PipelineError("transfer side stopped");
        }
      };

      open_next();
      std::string line;
      while (source.next(line)) {
        records_in.fetch_add(1, std::memory_order_relaxed);
        line += '\n';
        out.write(line.data(), std::streamsize(line.size()));
        if (!out) throw PipelineError("write failed on " + path.string());
        hasher.update(line.data(), line.size());
        size += line.size();
        if (size >= config.file_size) {
          roll();
          open_next();
        }
      }
      if (size > 0) {
        roll();
      } else {
        out.close();
        std::filesystem::remove(path);
      }
      queue.close();
    } catch (const std::exception& e) {
      {
        std::lock_guard<std::mutex> lock(intake_error_mu);
        intake_error = e.what();
      }
      queue.close();
    }
  });

  auto finish_intake = [&] {
    if (intake.joinable()) intake.join();
    report.records_in = records_in.load();
  };

  try {
    wire::FrameConnection conn(
        wire::tcp_connect_retry(config.peer_host, config.peer_port,
                                config.connect_attempts, config.initial_backoff));
    conn.set_timeout(config.io_timeout);

    std::uint64_t pending_results = 0;
    std::uint32_t batch_files = 0;
    auto on_result = [&](const wire::Frame& frame, std::string raw) {
      log_event(log, EventKind::ResultReceived, "", frame.field_u64(0));
      report.results.push_back({frame.field_u64(0), std::move(raw)});
      if (pending_results > 0) --pending_results;
    };

    while (auto item = queue.pop()) {
      const CompletedFile& file = *item;
      std::string bytes = read_file(file.path);

      for (int attempt = 1;; ++attempt) {
        try {
          conn.send(wire::Verb::Announce,
                    {file.name, std::to_string(file.size),
                     std::to_string(file.seq)});
          log_event(log, EventKind::AnnounceSent, file.name, file.size, file.seq);
          transfer_file(conn, file.name, bytes, on_result, log);
          break;
        } catch (const wire::WireError& e) {
          log_event(log, EventKind::ConnectionLost, e.what());
          if (attempt >= 3) {
            throw PipelineError("transfer of " + file.name + " failed: " +
                                e.what());
          }
          conn.reset(wire::tcp_connect_retry(
              config.peer_host, config.peer_port, config.connect_attempts,
              config.initial_backoff));
          conn.set_timeout(config.io_timeout);
        }
      }

      std::filesystem::remove(file.path);
      log_event(log, EventKind::LocalFileDeleted, file.name);
      ++report.files_shipped;
      report.bytes_shipped += file.size;

      if (++batch_files == config.file_count) {
        conn.send(wire::Verb::BatchDone, {std::to_string(batch_files)});
        log_event(log, EventKind::BatchDoneSent, "", batch_files);
        ++report.batches_announced;
        ++pending_results;
        batch_files = 0;
      }
    }

    finish_intake();
    {
      std::lock_guard<std::mutex> lock(intake_error_mu);
      if (!intake_error.empty()) throw PipelineError(intake_error);
    }

    // Trailing partial batch at end of stream ships with its actual count.
    if (batch_files > 0) {
      conn.send(wire::Verb::BatchDone, {std::to_string(batch_files)});
      log_event(log, EventKind::BatchDoneSent, "", batch_files);
      ++report.batches_announced;
      ++pending_results;
    }

    while (pending_results > 0) {
      auto frame = conn.recv();
      if (!frame) {
        throw PipelineError("peer closed with results still pending");
      }
      if (frame->verb == wire::Verb::Result) {
        on_result(*frame, conn.recv_raw(frame->field_u64(1)));
      } else if (frame->verb == wire::Verb::Error) {
        log_event(log, EventKind::ErrorReceived, frame->field(0));
        --pending_results;
      }
    }
    return report;
  } catch (...) {
    queue.abort();
    finish_intake();
    throw;
  }
}

struct DetectionServer::Impl {
  PipelineConfig config;
  EventLog* log;
  wire::Listener listener;
  DetectionReport report;

  struct BatchTask {
    std::uint64_t seq = 0;
    std::vector<std::filesystem::path> files;
    std::filesystem::path staging_dir;
  };

  std::mutex job_mu;
  std::condition_variable job_cv;
  std::deque<BatchTask> job_queue;
  bool job_shutdown = false;

  std::mutex conn_mu;
  std::shared_ptr<wire::FrameConnection> current_conn;

  // Batch state survives reconnects.
  std::uint64_t batch_seq = 1;
  std::uint64_t batches_enqueued = 0;
  std::vector<std::filesystem::path> staged_files;
  std::set<std::string> staged_names;

  Impl(PipelineConfig cfg, EventLog* lg)
      : config(std::move(cfg)),
        log(lg),
        listener(config.peer_host, config.peer_port) {}

  std::filesystem::path staging_dir(std::uint64_t seq) const {
    return config.out_dir / "staging" / std::to_string(seq);
  }

  void send_error(wire::FrameConnection& conn, const std::string& code,
                  const std::string& text) {
    conn.send(wire::Verb::Error, {code, text});
    log_event(log, EventKind::ErrorSent, code);
  }

  // Returns true when max_batches has been reached.
  bool serve(const std::shared_ptr<wire::FrameConnection>& conn) {
    for (;;) {
      auto frame = conn->recv();
      if (!frame) return false;
      switch (frame->verb) {
        case wire::Verb::Announce: {
          const std::string& name = frame->field(0);
          std::uint64_t size = frame->field_u64(1);
          std::uint64_t seq = frame->field_u64(2);
          if (staged_names.contains(name)) {
            // Duplicate announce after a lost ACK: already staged, just
            // re-acknowledge.
            conn->send(wire::Verb::Ack, {name});
            log_event(log, EventKind::AckSent, name);
            break;
          }
          log_event(log, EventKind::AnnounceReceived, name, size, seq);
          bool staged = false;
          std::string raw;
          for (int attempt = 0; attempt < 2 && !staged; ++attempt) {
            conn->send(wire::Verb::Pull, {name});
            log_event(log, EventKind::PullSent, name);
            auto data = conn->recv();
            if (!data) return false;
            if (data->verb != wire::Verb::Data) {
              send_error(*conn, "protocol_error",
                         "expected DATA, got " +
                             std::string(wire::verb_name(data->verb)));
              return false;
            }
            std::uint64_t got = data->field_u64(0);
            raw = conn->recv_raw(got);
            if (got == size) {
              staged = true;
            } else {
              send_error(*conn, "size_mismatch",
                         name + ": announced " + std::to_string(size) +
                             ", received " + std::to_string(got));
            }
          }
          if (!staged) {
            send_error(*conn, "transfer_failed", name);
            break;
          }
          auto dir = staging_dir(batch_seq);
          std::filesystem::create_directories(dir);
          auto path = dir / name;
          {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out) throw PipelineError("cannot stage " + path.string());
            out.write(raw.data(), std::streamsize(raw.size()));
            out.flush();
            if (!out) throw PipelineError("short write staging " + path.string());
          }
          log_event(log, EventKind::FileStaged, name, raw.size(),
                    fnv1a64(raw.data(), raw.size()));
          staged_files.push_back(path);
          staged_names.insert(name);
          ++report.files_staged;
          conn->send(wire::Verb::Ack, {name});
          log_event(log, EventKind::AckSent, name);
          break;
        }
        case wire::Verb::BatchDone: {
          std::uint64_t count = frame->field_u64(0);
          log_event(log, EventKind::BatchDoneReceived, "", count);
          if (staged_files.size() != count) {
            send_error(*conn, "incomplete_batch",
                       "staged " + std::to_string(staged_files.size()) +
                           " of " + std::to_string(count));
            break;
          }
          {
            std::lock_guard<std::mutex> lock(job_mu);
            job_queue.push_back(
                {batch_seq, std::move(staged_files), staging_dir(batch_seq)});
          }
          job_cv.notify_one();
          staged_files.clear();
          staged_names.clear();
          ++batch_seq;
          ++batches_enqueued;
          if (config.max_batches != 0 &&
              batches_enqueued >= config.max_batches) {
            return true;
          }
          break;
        }
        case wire::Verb::Error:
          log_event(log, EventKind::ErrorReceived, frame->field(0));
          break;
        default:
          send_error(*conn, "protocol_error",
                     std::string(wire::verb_name(frame->verb)) +
                         " is not valid here");
          return false;
      }
    }
  }

  void job_loop() {
    for (;;) {
      BatchTask task;
      {
        std::unique_lock<std::mutex> lock(job_mu);
        job_cv.wait(lock, [&] { return !job_queue.empty() || job_shutdown; });
        if (job_queue.empty()) return;
        task = std::move(job_queue.front());
        job_queue.pop_front();
      }

      std::shared_ptr<wire::FrameConnection> conn;
      {
        std::lock_guard<std::mutex> lock(conn_mu);
        conn = current_conn;
      }

      log_event(log, EventKind::JobStarted, "", task.seq);
      DetectionResult result;
      try {
        result = run_job(task.files, config.job);
      } catch (const std::exception& e) {
        // Keep the staged inputs for inspection.
        log_event(log, EventKind::ErrorSent, "job_failed");
        if (conn) {
          try {
            conn->send(wire::Verb::Error, {"job_failed", e.what()});
          } catch (const wire::WireError&) {
            log_event(log, EventKind::ConnectionLost, "result delivery");
          }
        }
        continue;
      }
      log_event(log, EventKind::JobFinished, "", task.seq,
                result.attackers.size());

      std::string body = results_to_string(result);
      auto results_path =
          config.out_dir / ("results-" + std::to_string(task.seq) + ".tsv");
      write_results_file(results_path, result);
      report.results_files.push_back(results_path);
      ++report.batches_processed;

      if (conn) {
        try {
          conn->send_with_payload(
              wire::Verb::Result,
              {std::to_string(result.attackers.size()),
               std::to_string(body.size())},
              body);
          log_event(log, EventKind::ResultSent, "", task.seq,
                    result.attackers.size());
        } catch (const wire::WireError&) {
          log_event(log, EventKind::ConnectionLost, "result delivery");
        }
      }

      std::error_code ec;
      std::filesystem::remove_all(task.staging_dir, ec);
      log_event(log, EventKind::StagingDeleted, "", task.seq);
    }
  }

  DetectionReport run() {
    std::filesystem::create_directories(config.out_dir);
    std::thread job_thread([this] { job_loop(); });
    bool done = false;
    try {
      while (!done) {
        auto conn =
            std::make_shared<wire::FrameConnection>(listener.accept());
        conn->set_timeout(config.io_timeout);
        {
          std::lock_guard<std::mutex> lock(conn_mu);
          current_conn = conn;
        }
        try {
          done = serve(conn);
        } catch (const wire::WireError& e) {
          log_event(log, EventKind::ConnectionLost, e.what());
        }
        // current_conn stays set: the job thread may still need it to send
        // RESULT for batches enqueued on this connection.
        if (!done && config.max_batches != 0 &&
            batches_enqueued >= config.max_batches) {
          done = true;
        }
      }
    } catch (...) {
      {
        std::lock_guard<std::mutex> lock(job_mu);
        job_shutdown = true;
      }
      job_cv.notify_all();
      job_thread.join();
      throw;
    }
    {
      std::lock_guard<std::mutex> lock(job_mu);
      job_shutdown = true;
    }
    job_cv.notify_all();
    job_thread.join();
    return report;
  }
};

DetectionServer::DetectionServer(PipelineConfig config, EventLog* log)
    : impl_(std::make_unique<Impl>(std::move(config), log)) {}

DetectionServer::~DetectionServer() = default;

std::uint16_t DetectionServer::port() const { return impl_->listener.port(); }

DetectionReport DetectionServer::run() { return impl_->run(); }

DetectionReport run_detection_role(const PipelineConfig& config,
                                   EventLog* log) {
  DetectionServer server(config, log);
  return server.run();
}

}  // namespace floodmr
