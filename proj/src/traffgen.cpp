#include "floodmr/traffgen.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace floodmr {

namespace {

// mt19937_64 raw output is specified bit-for-bit by the standard; the
// mappings below avoid std::*_distribution, whose streams differ between
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, n), n >= 1.
  std::uint64_t below(std::uint64_t n) {
    return std::uint64_t((static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  // Uniform in [lo, hi], inclusive.
  std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {
    return lo + below(hi - lo + 1);
  }

  double unit() { return double(gen_() >> 11) * 0x1.0p-53; }  // [0, 1)

  double expo(double mean) { return -std::log(1.0 - unit()) * mean; }

 private:
  std::mt19937_64 gen_;
};

// Content draws use an independent stream so the plan (IPs, per-host counts)
// stays reproducible from the seed alone.
constexpr std::uint64_t kEmitSeedSalt = 0x9e3779b97f4a7c15ull;

struct Plan {
  std::vector<Ipv4Addr> attacker_ips;
  std::vector<Ipv4Addr> legit_ips;
  std::vector<std::uint64_t> legit_match;
  std::vector<std::uint64_t> legit_noise;
  std::uint64_t attack_records = 0;
  std::uint64_t legit_match_total = 0;
  std::uint64_t noise_total = 0;
};

Plan build_plan(const TraceSpec& spec) {
  Plan plan;
  Rng rng(spec.seed);

  std::unordered_set<std::uint32_t> used;
  used.insert(spec.victim_ip.value());

  plan.attacker_ips.reserve(spec.attacker_count);
  while (plan.attacker_ips.size() < spec.attacker_count) {
    std::uint32_t v = (10u << 24) | std::uint32_t(rng.below(1u << 24));
    if (used.insert(v).second) {
      plan.attacker_ips.push_back(Ipv4Addr::from_value(v));
    }
  }

  plan.legit_ips.reserve(spec.legitimate_host_count);
  while (plan.legit_ips.size() < spec.legitimate_host_count) {
    std::uint32_t v = (192u << 24) | (168u << 16) | std::uint32_t(rng.below(1u << 16));
    if (used.insert(v).second) {
      plan.legit_ips.push_back(Ipv4Addr::from_value(v));
    }
  }

  plan.attack_records =
      std::uint64_t(spec.attacker_count) * spec.packets_per_attacker;

  // Total trace size follows from the attack share; the remainder is split
  // evenly across legitimate hosts, each host drawing how many of its
  // records match the predicate (capped) versus plain noise.
  std::uint64_t total =
      std::uint64_t(std::llround(double(plan.attack_records) / spec.attack_fraction));
  std::uint64_t legit_total =
      total > plan.attack_records ? total - plan.attack_records : 0;

  std::uint32_t hosts = spec.legitimate_host_count;
  plan.legit_match.assign(hosts, 0);
  plan.legit_noise.assign(hosts, 0);
  if (legit_total > 0) {
    std::uint64_t base = legit_total / hosts;
    std::uint64_t rem = legit_total % hosts;
    for (std::uint32_t j = 0; j < hosts; ++j) {
      std::uint64_t quota = base + (j < rem ? 1 : 0);
      std::uint64_t cap = std::min<std::uint64_t>(quota, spec.legitimate_max_packets);
      std::uint64_t match = cap > 0 ? rng.below(cap + 1) : 0;
      plan.legit_match[j] = match;
      plan.legit_noise[j] = quota - match;
      plan.legit_match_total += match;
      plan.noise_total += quota - match;
    }
  }
  return plan;
}

enum SlotKind : std::uint32_t { kAttack = 0, kLegitMatch = 1, kNoise = 2 };

constexpr std::uint32_t make_slot(SlotKind kind, std::uint32_t owner) {
  return (owner << 2) | kind;
}

const char* const kHttpPaths[] = {"index.html", "search", "api/v1/items",
                                  "static/app.js", "download"};
const char* const kUdpServices[] = {"http", "https", "domain", "8080"};

enum class NoiseKind : std::uint8_t {
  SynAck,
  TcpAck,
  HttpResponse,
  HttpPost,
  IcmpReply,
  UdpQuery,
  Arp,
};

std::vector<NoiseKind> noise_menu(AttackClass active) {
  std::vector<NoiseKind> menu = {NoiseKind::SynAck,   NoiseKind::TcpAck,
                                 NoiseKind::HttpResponse, NoiseKind::HttpPost,
                                 NoiseKind::IcmpReply,    NoiseKind::UdpQuery,
                                 NoiseKind::Arp};
  if (active == AttackClass::Udp) {
    std::erase(menu, NoiseKind::UdpQuery);  // would match the UDP predicate
  }
  return menu;
}

void fill_match(AttackClass cls, Rng& rng, PacketRecord& rec) {
  char buf[128];
  switch (cls) {
    case AttackClass::Udp: {
      rec.protocol = rng.below(4) == 0 ? Protocol::Quic : Protocol::Udp;
      rec.length = rng.range(50, 1400);
      int n = std::snprintf(buf, sizeof(buf), "Src port: %llu  Dst port: %s",
                            (unsigned long long)rng.range(1024, 65535),
                            kUdpServices[rng.below(4)]);
      rec.detail.assign(buf, n);
      break;
    }
    case AttackClass::Syn: {
      rec.protocol = Protocol::Tcp;
      rec.length = rng.range(60, 119);
      bool retrans = rng.below(4) == 0;
      int n = std::snprintf(
          buf, sizeof(buf),
          "%s%llu > 80 [SYN] Seq=0 Win=%llu Len=0 MSS=1460 SACK_PERM=1",
          retrans ? "[TCP Retransmission] " : "",
          (unsigned long long)rng.range(1024, 65535),
          (unsigned long long)rng.range(8192, 65535));
      rec.detail.assign(buf, n);
      break;
    }
    case AttackClass::HttpGet: {
      rec.protocol = Protocol::Http;
      rec.length = rng.range(500, 700);
      int n = std::snprintf(buf, sizeof(buf), "GET /%s?_=%llu HTTP/1.1",
                            kHttpPaths[rng.below(5)],
                            (unsigned long long)rng.next());
      rec.detail.assign(buf, n);
      break;
    }
    case AttackClass::Icmp: {
      rec.protocol = Protocol::Icmp;
      rec.length = rng.range(42, 98);
      int n = std::snprintf(
          buf, sizeof(buf), "Echo (ping) request  id=0x%04llx, seq=%llu/%llu, ttl=%llu",
          (unsigned long long)rng.below(65536),
          (unsigned long long)rng.below(65536),
          (unsigned long long)rng.below(65536),
          (unsigned long long)rng.range(32, 128));
      rec.detail.assign(buf, n);
      break;
    }
  }
}

void fill_noise(NoiseKind kind, Rng& rng, PacketRecord& rec) {
  char buf[128];
  int n = 0;
  switch (kind) {
    case NoiseKind::SynAck:
      rec.protocol = Protocol::Tcp;
      rec.length = rng.range(58, 78);
      n = std::snprintf(buf, sizeof(buf),
                        "443 > %llu [SYN, ACK] Seq=0 Ack=1 Win=65160 Len=0 MSS=1460",
                        (unsigned long long)rng.range(1024, 65535));
      break;
    case NoiseKind::TcpAck:
      rec.protocol = Protocol::Tcp;
      rec.length = rng.range(52, 66);
      n = std::snprintf(buf, sizeof(buf), "%llu > 443 [ACK] Seq=1 Ack=1 Win=501 Len=0",
                        (unsigned long long)rng.range(1024, 65535));
      break;
    case NoiseKind::HttpResponse:
      rec.protocol = Protocol::Http;
      rec.length = rng.range(200, 1400);
      n = std::snprintf(buf, sizeof(buf), "HTTP/1.1 200 OK  (text/html)");
      break;
    case NoiseKind::HttpPost:
      rec.protocol = Protocol::Http;
      rec.length = rng.range(300, 700);
      n = std::snprintf(buf, sizeof(buf), "POST /submit HTTP/1.1");
      break;
    case NoiseKind::IcmpReply:
      rec.protocol = Protocol::Icmp;
      rec.length = rng.range(42, 98);
      n = std::snprintf(buf, sizeof(buf),
                        "Echo (ping) reply    id=0x%04llx, seq=%llu/%llu, ttl=64",
                        (unsigned long long)rng.below(65536),
                        (unsigned long long)rng.below(65536),
                        (unsigned long long)rng.below(65536));
      break;
    case NoiseKind::UdpQuery:
      rec.protocol = Protocol::Udp;
      rec.length = rng.range(70, 300);
      n = std::snprintf(buf, sizeof(buf), "Src port: 53  Dst port: %llu",
                        (unsigned long long)rng.range(1024, 65535));
      break;
    case NoiseKind::Arp: {
      rec.protocol = Protocol::Other;
      rec.length = rng.range(42, 60);
      unsigned x = unsigned(rng.below(256)), y = unsigned(rng.below(256));
      n = std::snprintf(buf, sizeof(buf), "Who has 192.168.%u.1? Tell 192.168.%u.%u",
                        x, x, y);
      break;
    }
  }
  rec.detail.assign(buf, n);
}

}  // namespace

void validate_spec(const TraceSpec& spec) {
  auto bad = [](const std::string& why) { throw std::invalid_argument("trace spec: " + why); };
  if (spec.attacker_count < 1) bad("attacker_count must be >= 1");
  if (spec.attacker_count > 4'000'000) bad("attacker_count above the 10.0.0.0/8 draw budget");
  if (spec.packets_per_attacker < 1) bad("packets_per_attacker must be >= 1");
  if (!(spec.attack_fraction > 0.0) || spec.attack_fraction > 1.0) {
    bad("attack_fraction must be in (0, 1]");
  }
  if (spec.legitimate_host_count > 60'000) {
    bad("legitimate_host_count above the 192.168.0.0/16 draw budget");
  }
  if (spec.legitimate_max_packets >= spec.packets_per_attacker) {
    bad("legitimate_max_packets must stay below packets_per_attacker");
  }
  if (!(spec.packets_per_second > 0.0)) bad("packets_per_second must be positive");

  std::uint64_t attack = std::uint64_t(spec.attacker_count) * spec.packets_per_attacker;
  std::uint64_t total = std::uint64_t(std::llround(double(attack) / spec.attack_fraction));
  if (total > attack && spec.legitimate_host_count == 0) {
    bad("attack_fraction < 1 needs at least one legitimate host");
  }
}

struct TraceGenerator::Impl {
  TraceSpec spec;
  TraceStats stats;
  Plan plan;
  std::vector<std::uint32_t> slots;
  std::size_t pos = 0;
  Rng rng;
  std::vector<NoiseKind> menu;
  std::uint64_t frame = 0;
  std::uint64_t elapsed_us = 0;
  double mean_gap_us = 0.0;

  explicit Impl(const TraceSpec& s)
      : spec(s), rng(s.seed ^ kEmitSeedSalt), menu(noise_menu(s.attack_class)) {
    validate_spec(spec);
    plan = build_plan(spec);
    mean_gap_us = 1e6 / spec.packets_per_second;

    stats.attack_records = plan.attack_records;
    stats.legit_match_records = plan.legit_match_total;
    stats.noise_records = plan.noise_total;
    stats.total_records =
        plan.attack_records + plan.legit_match_total + plan.noise_total;

    slots.reserve(stats.total_records);
    for (std::uint32_t i = 0; i < spec.attacker_count; ++i) {
      for (std::uint32_t k = 0; k < spec.packets_per_attacker; ++k) {
        slots.push_back(make_slot(kAttack, i));
      }
    }
    for (std::uint32_t j = 0; j < spec.legitimate_host_count; ++j) {
      for (std::uint64_t k = 0; k < plan.legit_match[j]; ++k) {
        slots.push_back(make_slot(kLegitMatch, j));
      }
      for (std::uint64_t k = 0; k < plan.legit_noise[j]; ++k) {
        slots.push_back(make_slot(kNoise, j));
      }
    }
    // Fisher-Yates with the emit-stream RNG.
    for (std::size_t i = slots.size(); i > 1; --i) {
      std::size_t j = rng.below(i);
      std::swap(slots[i - 1], slots[j]);
    }
  }

  std::optional<PacketRecord> next() {
    if (pos >= slots.size()) return std::nullopt;
    std::uint32_t slot = slots[pos++];
    SlotKind kind = SlotKind(slot & 3);
    std::uint32_t owner = slot >> 2;

    PacketRecord rec;
    rec.frame_no = ++frame;
    elapsed_us += std::uint64_t(std::llround(rng.expo(mean_gap_us)));
    rec.timestamp = double(elapsed_us) / 1e6;
    rec.dst_ip = spec.victim_ip;

    switch (kind) {
      case kAttack:
        rec.src_ip = plan.attacker_ips[owner];
        fill_match(spec.attack_class, rng, rec);
        break;
      case kLegitMatch:
        rec.src_ip = plan.legit_ips[owner];
        fill_match(spec.attack_class, rng, rec);
        break;
      case kNoise:
        rec.src_ip = plan.legit_ips[owner];
        fill_noise(menu[rng.below(menu.size())], rng, rec);
        break;
    }
    assert(matches(spec.attack_class, rec) == (kind != kNoise));
    stats.wire_bytes += rec.length;
    return rec;
  }
};

TraceGenerator::TraceGenerator(const TraceSpec& spec)
    : impl_(std::make_unique<Impl>(spec)) {}
TraceGenerator::~TraceGenerator() = default;
TraceGenerator::TraceGenerator(TraceGenerator&&) noexcept = default;
TraceGenerator& TraceGenerator::operator=(TraceGenerator&&) noexcept = default;

std::optional<PacketRecord> TraceGenerator::next() { return impl_->next(); }
const TraceStats& TraceGenerator::stats() const { return impl_->stats; }

TraceStats write_trace(const TraceSpec& spec,
                       const std::filesystem::path& out_file) {
  TraceGenerator gen(spec);
  std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + out_file.string() + " for writing");
  }
  std::string buf;
  buf.reserve(1 << 20);
  while (auto rec = gen.next()) {
    append_line(buf, *rec);
    if (buf.size() > (1 << 20) - 2048) {
      out.write(buf.data(), std::streamsize(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), std::streamsize(buf.size()));
  out.flush();
  if (!out) throw std::runtime_error("short write to " + out_file.string());
  return gen.stats();
}

std::map<Ipv4Addr, std::uint64_t> ground_truth(const TraceSpec& spec,
                                               std::uint64_t threshold) {
  validate_spec(spec);
  Plan plan = build_plan(spec);
  std::map<Ipv4Addr, std::uint64_t> out;
  if (spec.packets_per_attacker > threshold) {
    for (const auto& ip : plan.attacker_ips) {
      out.emplace(ip, spec.packets_per_attacker);
    }
  }
  for (std::size_t j = 0; j < plan.legit_ips.size(); ++j) {
    if (plan.legit_match[j] > threshold) {
      out.emplace(plan.legit_ips[j], plan.legit_match[j]);
    }
  }
  return out;
}

}  // namespace floodmr
