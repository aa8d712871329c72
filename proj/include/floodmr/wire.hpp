#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace floodmr::wire {

// Framed TCP protocol between the capture and detection roles.
//
//   frame   := 4-byte big-endian payload length, then that many payload bytes
//   payload := UTF-8 control line  VERB<TAB>field<TAB>field...
//
// Two verbs carry raw bytes immediately after their frame, outside framing:
//   DATA<TAB><size>              then exactly <size> raw bytes
//   RESULT<TAB><attackers><TAB><size>   then exactly <size> raw bytes
//
// Control verbs:
//   ANNOUNCE<TAB><file_name><TAB><size_bytes><TAB><seq_no>
//   PULL<TAB><file_name>
//   ACK<TAB><file_name>
//   BATCH_DONE<TAB><count>
//   ERROR<TAB><code><TAB><text>

class WireError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Verb : std::uint8_t {
  Announce,
  Pull,
  Data,
  Ack,
  BatchDone,
  Result,
  Error,
};

std::string_view verb_name(Verb v);
std::optional<Verb> verb_from_name(std::string_view name);

struct Frame {
  Verb verb = Verb::Error;
  std::vector<std::string> fields;

  const std::string& field(std::size_t i) const;  // throws WireError if absent
  std::uint64_t field_u64(std::size_t i) const;
};

std::string encode_payload(Verb verb, const std::vector<std::string>& fields);
Frame decode_payload(std::string_view payload);  // throws WireError

void put_u32_be(std::uint32_t v, unsigned char out[4]);
std::uint32_t get_u32_be(const unsigned char in[4]);

// Thin RAII wrapper over a connected TCP socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }

  void write_all(const void* data, std::size_t len);  // throws WireError
  // Reads exactly len bytes; throws on error, timeout, or mid-read EOF.
  void read_exact(void* out, std::size_t len);
  // Like read_exact but returns false on a clean EOF before the first byte.
  bool read_exact_or_eof(void* out, std::size_t len);

  void set_timeout(std::chrono::milliseconds timeout);
  void close();

 private:
  int fd_ = -1;
};

Socket tcp_connect(const std::string& host, std::uint16_t port);
Socket tcp_connect_retry(const std::string& host, std::uint16_t port,
                         int attempts,
                         std::chrono::milliseconds initial_backoff);

class Listener {
 public:
  // port 0 binds an ephemeral port; read it back with port().
  Listener(const std::string& bind_host, std::uint16_t port);
  std::uint16_t port() const { return port_; }
  Socket accept();  // throws WireError
  void close();

 private:
  Socket sock_;
  std::uint16_t port_ = 0;
};

// Frame-level connection. Sends are serialized by an internal mutex so a
// frame (plus any trailing raw bytes) is never interleaved with another
// writer's frame; there must be only one reader thread.
class FrameConnection {
 public:
  explicit FrameConnection(Socket sock) : sock_(std::move(sock)) {}

  // Replaces the underlying socket, e.g. after a reconnect.
  void reset(Socket sock);

  void send(Verb verb, const std::vector<std::string>& fields);
  void send_with_payload(Verb verb, const std::vector<std::string>& fields,
                         std::string_view raw);

  // One control frame; nullopt on clean EOF between frames.
  std::optional<Frame> recv();
  // The raw byte run following a DATA or RESULT frame.
  std::string recv_raw(std::uint64_t size);

  void set_timeout(std::chrono::milliseconds timeout);
  void close();

 private:
  Socket sock_;
  std::mutex write_mu_;
};

}  // namespace floodmr::wire
