#include "floodmr/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <charconv>
#include <cstring>
#include <thread>

namespace floodmr::wire {

namespace {

// Control frames are short lines; anything bigger is a framing bug or a
// corrupt stream.
constexpr std::uint32_t kMaxControlFrame = 1u << 16;

[[noreturn]] void throw_errno(const std::string& what) {
  throw WireError(what + ": " + std::strerror(errno));
}

struct AddrInfo {
  addrinfo* res = nullptr;
  ~AddrInfo() {
    if (res) freeaddrinfo(res);
  }
};

AddrInfo resolve(const std::string& host, std::uint16_t port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  AddrInfo out;
  std::string service = std::to_string(port);
  int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(),
                       &hints, &out.res);
  if (rc != 0) {
    throw WireError("cannot resolve " + host + ": " + gai_strerror(rc));
  }
  return out;
}

}  // namespace

std::string_view verb_name(Verb v) {
  switch (v) {
    case Verb::Announce: return "ANNOUNCE";
    case Verb::Pull: return "PULL";
    case Verb::Data: return "DATA";
    case Verb::Ack: return "ACK";
    case Verb::BatchDone: return "BATCH_DONE";
    case Verb::Result: return "RESULT";
    case Verb::Error: return "ERROR";
  }
  return "ERROR";
}

std::optional<Verb> verb_from_name(std::string_view name) {
  if (name == "ANNOUNCE") return Verb::Announce;
  if (name == "PULL") return Verb::Pull;
  if (name == "DATA") return Verb::Data;
  if (name == "ACK") return Verb::Ack;
  if (name == "BATCH_DONE") return Verb::BatchDone;
  if (name == "RESULT") return Verb::Result;
  if (name == "ERROR") return Verb::Error;
  return std::nullopt;
}

const std::string& Frame::field(std::size_t i) const {
  if (i >= fields.size()) {
    throw WireError(std::string(verb_name(verb)) + " frame is missing field " +
                    std::to_string(i));
  }
  return fields[i];
}

std::uint64_t Frame::field_u64(std::size_t i) const {
  const std::string& f = field(i);
  std::uint64_t v = 0;
  auto [next, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc{} || next != f.data() + f.size()) {
    throw WireError(std::string(verb_name(verb)) + " field " +
                    std::to_string(i) + " is not a number: " + f);
  }
  return v;
}

std::string encode_payload(Verb verb, const std::vector<std::string>& fields) {
  std::string payload{verb_name(verb)};
  for (const auto& f : fields) {
    payload += '\t';
    payload += f;
  }
  return payload;
}

Frame decode_payload(std::string_view payload) {
  Frame frame;
  std::size_t pos = payload.find('\t');
  std::string_view name = payload.substr(0, pos);
  auto verb = verb_from_name(name);
  if (!verb) throw WireError("unknown verb: " + std::string(name));
  frame.verb = *verb;
  while (pos != std::string_view::npos) {
    std::size_t start = pos + 1;
    pos = payload.find('\t', start);
    frame.fields.emplace_back(payload.substr(
        start, pos == std::string_view::npos ? pos : pos - start));
  }
  return frame;
}

void put_u32_be(std::uint32_t v, unsigned char out[4]) {
  out[0] = (unsigned char)(v >> 24);
  out[1] = (unsigned char)(v >> 16);
  out[2] = (unsigned char)(v >> 8);
  out[3] = (unsigned char)v;
}

std::uint32_t get_u32_be(const unsigned char in[4]) {
  return (std::uint32_t(in[0]) << 24) | (std::uint32_t(in[1]) << 16) |
         (std::uint32_t(in[2]) << 8) | std::uint32_t(in[3]);
}

Socket::~Socket() { close(); }

Socket::Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::write_all(const void* data, std::size_t len) {
  const char* p = static_cast<const char*>(data);
  while (len > 0) {
    ssize_t n = ::send(fd_, p, len, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("send failed");
    }
    p += n;
    len -= std::size_t(n);
  }
}

bool Socket::read_exact_or_eof(void* out, std::size_t len) {
  char* p = static_cast<char*>(out);
  std::size_t got = 0;
  while (got < len) {
    ssize_t n = ::recv(fd_, p + got, len - got, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) {
        throw WireError("receive timed out");
      }
      throw_errno("recv failed");
    }
    if (n == 0) {
      if (got == 0) return false;
      throw WireError("connection closed mid-read");
    }
    got += std::size_t(n);
  }
  return true;
}

void Socket::read_exact(void* out, std::size_t len) {
  if (!read_exact_or_eof(out, len)) {
    throw WireError("connection closed");
  }
}

void Socket::set_timeout(std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = time_t(timeout.count() / 1000);
  tv.tv_usec = suseconds_t((timeout.count() % 1000) * 1000);
  setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

Socket tcp_connect(const std::string& host, std::uint16_t port) {
  AddrInfo ai = resolve(host, port, false);
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("socket failed");
  Socket sock(fd);
  if (::connect(fd, ai.res->ai_addr, ai.res->ai_addrlen) != 0) {
    throw_errno("connect to " + host + ":" + std::to_string(port) + " failed");
  }
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return sock;
}

Socket tcp_connect_retry(const std::string& host, std::uint16_t port,
                         int attempts,
                         std::chrono::milliseconds initial_backoff) {
  std::chrono::milliseconds backoff = initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      return tcp_connect(host, port);
    } catch (const WireError&) {
      if (attempt >= attempts) throw;
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
}

Listener::Listener(const std::string& bind_host, std::uint16_t port) {
  AddrInfo ai = resolve(bind_host, port, true);
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("socket failed");
  sock_ = Socket(fd);
  int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd, ai.res->ai_addr, ai.res->ai_addrlen) != 0) {
    throw_errno("bind to " + bind_host + ":" + std::to_string(port) + " failed");
  }
  if (::listen(fd, 4) != 0) throw_errno("listen failed");

  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  if (getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len) != 0) {
    throw_errno("getsockname failed");
  }
  port_ = ntohs(bound.sin_port);
}

Socket Listener::accept() {
  int fd = ::accept(sock_.fd(), nullptr, nullptr);
  if (fd < 0) throw_errno("accept failed");
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return Socket(fd);
}

void Listener::close() { sock_.close(); }

void FrameConnection::reset(Socket sock) {
  std::lock_guard<std::mutex> lock(write_mu_);
  sock_ = std::move(sock);
}

void FrameConnection::send(Verb verb, const std::vector<std::string>& fields) {
  std::string payload = encode_payload(verb, fields);
  unsigned char header[4];
  put_u32_be(std::uint32_t(payload.size()), header);
  std::lock_guard<std::mutex> lock(write_mu_);
  sock_.write_all(header, sizeof(header));
  sock_.write_all(payload.data(), payload.size());
}

void FrameConnection::send_with_payload(Verb verb,
                                        const std::vector<std::string>& fields,
                                        std::string_view raw) {
  std::string payload = encode_payload(verb, fields);
  unsigned char header[4];
  put_u32_be(std::uint32_t(payload.size()), header);
  std::lock_guard<std::mutex> lock(write_mu_);
  sock_.write_all(header, sizeof(header));
  sock_.write_all(payload.data(), payload.size());
  sock_.write_all(raw.data(), raw.size());
}

std::optional<Frame> FrameConnection::recv() {
  unsigned char header[4];
  if (!sock_.read_exact_or_eof(header, sizeof(header))) {
    return std::nullopt;
  }
  std::uint32_t size = get_u32_be(header);
  if (size == 0 || size > kMaxControlFrame) {
    throw WireError("bad frame length " + std::to_string(size));
  }
  std::string payload(size, '\0');
  sock_.read_exact(payload.data(), size);
  return decode_payload(payload);
}

std::string FrameConnection::recv_raw(std::uint64_t size) {
  std::string out(size, '\0');
  if (size > 0) sock_.read_exact(out.data(), size);
  return out;
}

void FrameConnection::set_timeout(std::chrono::milliseconds timeout) {
  sock_.set_timeout(timeout);
}

void FrameConnection::close() { sock_.close(); }

}  // namespace floodmr::wire
