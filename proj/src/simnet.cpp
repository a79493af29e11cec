#include "encctl/simnet.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

namespace encctl {

std::string PartyId::name() const {
  switch (role) {
    case Role::Sensor: return "sensor";
    case Role::Actuator: return "actuator";
    case Role::Cloud: return "cloud" + std::to_string(index);
    case Role::Agent: return "agent" + std::to_string(index);
    case Role::TrustedEntity: return "trusted";
  }
  return "?";
}

OpCount CostLedger::total_ops() const {
  OpCount t;
  for (const auto& [_, c] : ops) t += c;
  return t;
}

std::uint64_t CostLedger::messages_between(const PartyId& a, const PartyId& b) const {
  std::uint64_t n = 0;
  if (auto it = edges.find({a, b}); it != edges.end()) n += it->second.messages;
  if (a != b) {
    if (auto it = edges.find({b, a}); it != edges.end()) n += it->second.messages;
  }
  return n;
}

std::uint64_t CostLedger::total_messages() const {
  std::uint64_t n = 0;
  for (const auto& [_, e] : edges) n += e.messages;
  return n;
}

std::uint64_t CostLedger::total_bytes() const {
  std::uint64_t n = 0;
  for (const auto& [_, e] : edges) n += e.bytes;
  return n;
}

std::string CostLedger::summary() const {
  std::ostringstream os;
  os << "party        enc      dec      hom_mul  hom_add  mul_const rerand\n";
  for (const auto& [p, c] : ops) {
    os << p.name();
    for (std::size_t pad = p.name().size(); pad < 13; ++pad) os << ' ';
    os << c.enc << '\t' << c.dec << '\t' << c.hom_mul << '\t' << c.hom_add << '\t'
       << c.hom_mul_const << '\t' << c.rerandomize << '\n';
  }
  os << "edge                     messages bytes\n";
  for (const auto& [e, s] : edges) {
    os << e.first.name() << " -> " << e.second.name() << '\t' << s.messages << '\t' << s.bytes
       << '\n';
  }
  for (const auto& [label, r] : rounds) os << "rounds[" << label << "] = " << r << '\n';
  os << "sent " << sent << ", delivered " << delivered << ", dropped " << dropped << '\n';
  return os.str();
}

void Network::send(const PartyId& from, const PartyId& to, const std::string& label,
                   Bytes payload) {
  Envelope env;
  env.from = from;
  env.to = to;
  env.label = label;
  env.payload = std::move(payload);
  const std::string protocol = label.substr(0, label.find('/'));
  env.round = session_[protocol]++;
  env.step = step_;
  env.seq = seq_++;

  ++ledger_.sent;
  ++ledger_.rounds[protocol];
  auto& edge = ledger_.edges[{from, to}];
  ++edge.messages;
  edge.bytes += env.payload.size();
  if (latency_) ledger_.latency_total += latency_(env);
  if (loss_ && loss_(env)) {
    ++ledger_.dropped;
    return;
  }
  if (keep_log_) log_.push_back(env);
  queues_[{from, to}].push_back(std::move(env));
}

Envelope Network::receive(const PartyId& to, const PartyId& from, const std::string& label) {
  auto it = queues_.find({from, to});
  if (it == queues_.end() || it->second.empty()) {
    throw Error(ErrorCode::ProtocolAbort,
                to.name() + " expected '" + label + "' from " + from.name() + ", queue empty");
  }
  Envelope env = std::move(it->second.front());
  it->second.pop_front();
  if (env.label != label) {
    throw Error(ErrorCode::ProtocolAbort,
                to.name() + " expected '" + label + "', got '" + env.label + "'");
  }
  ++ledger_.delivered;
  return env;
}

bool Network::pending(const PartyId& to, const PartyId& from) const {
  auto it = queues_.find({from, to});
  return it != queues_.end() && !it->second.empty();
}

std::size_t Network::in_flight() const {
  std::size_t n = 0;
  for (const auto& [_, q] : queues_) n += q.size();
  return n;
}

void Network::begin_session(const std::string& label) { session_[label] = 0; }

std::uint64_t Network::session_rounds(const std::string& label) const {
  auto it = session_.find(label);
  return it == session_.end() ? 0 : it->second;
}

counting::Scope Network::acting_as(const PartyId& party) {
  return counting::Scope(&ledger_.ops[party]);
}

Writer& Writer::u8(std::uint8_t v) {
  buf_.push_back(v);
  return *this;
}

Writer& Writer::u32(std::uint32_t v) {
  for (int i = 3; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return *this;
}

Writer& Writer::f64(double v) {
  const Bytes b = f64_bytes(v);
  buf_.insert(buf_.end(), b.begin(), b.end());
  return *this;
}

Writer& Writer::bytes(const Bytes& b) {
  u32(static_cast<std::uint32_t>(b.size()));
  buf_.insert(buf_.end(), b.begin(), b.end());
  return *this;
}

void Reader::need(std::size_t n) const {
  if (buf_.size() - pos_ < n) throw Error(ErrorCode::ProtocolAbort, "truncated payload");
}

std::uint8_t Reader::u8() {
  need(1);
  return buf_[pos_++];
}

std::uint32_t Reader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | buf_[pos_++];
  return v;
}

double Reader::f64() {
  need(8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits = (bits << 8) | buf_[pos_++];
  return std::bit_cast<double>(bits);
}

Bytes Reader::bytes() {
  const std::uint32_t n = u32();
  need(n);
  Bytes b(buf_.begin() + static_cast<std::ptrdiff_t>(pos_),
          buf_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
  pos_ += n;
  return b;
}

Bytes f64_bytes(double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  Bytes b(8);
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(bits >> (8 * (7 - i)));
  return b;
}

AuditVerdict noncollusion_audit(const std::vector<Envelope>& log,
                                const std::vector<std::pair<PartyId, PartyId>>& forbidden,
                                const std::set<std::string>& allowed_labels) {
  AuditVerdict v;
  for (const auto& env : log) {
    for (const auto& [a, b] : forbidden) {
      const bool hit = (env.from == a && env.to == b) || (env.from == b && env.to == a);
      if (!hit) continue;
      ++v.forbidden_messages;
      if (!allowed_labels.contains(env.label)) {
        v.pass = false;
        if (v.violations.size() < 20) {
          v.violations.push_back(env.from.name() + " -> " + env.to.name() + " '" + env.label +
                                 "' at step " + std::to_string(env.step));
        }
      }
    }
  }
  return v;
}

LeakageReport leakage_scan(const std::vector<Envelope>& log, const std::vector<Secret>& secrets) {
  LeakageReport r;
  for (const auto& env : log) {
    ++r.scanned_messages;
    for (const auto& s : secrets) {
      // a message is visible to both endpoints
      if (!s.forbidden.contains(env.to) && !s.forbidden.contains(env.from)) continue;
      for (const auto& pattern : s.encodings) {
        if (pattern.empty() || pattern.size() > env.payload.size()) continue;
        auto found = std::search(env.payload.begin(), env.payload.end(), pattern.begin(),
                                 pattern.end());
        if (found == env.payload.end()) continue;
        r.pass = false;
        if (r.hits.size() < 20) {
          r.hits.push_back(s.name + " in '" + env.label + "' " + env.from.name() + " -> " +
                           env.to.name() + " step " + std::to_string(env.step));
        }
        break;
      }
    }
  }
  return r;
}

ChiSquare chi_square_uniform(const std::vector<std::uint64_t>& counts) {
  ChiSquare out;
  if (counts.size() < 2) return out;
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  if (expected <= 0) return out;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    out.statistic += d * d / expected;
  }
  out.dof = static_cast<double>(counts.size() - 1);
  boost::math::chi_squared dist(out.dof);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

}  // namespace encctl
