#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "encctl/common.hpp"

namespace encctl {

enum class Role : std::uint8_t { Sensor, Actuator, Cloud, Agent, TrustedEntity };

struct PartyId {
  Role role = Role::Sensor;
  int index = 0;

  std::string name() const;
  friend auto operator<=>(const PartyId&, const PartyId&) = default;
};

inline PartyId sensor() { return {Role::Sensor, 0}; }
inline PartyId actuator() { return {Role::Actuator, 0}; }
inline PartyId cloud(int i) { return {Role::Cloud, i}; }
inline PartyId agent(int i) { return {Role::Agent, i}; }
inline PartyId trusted_entity() { return {Role::TrustedEntity, 0}; }

using Bytes = std::vector<std::uint8_t>;

struct Envelope {
  PartyId from, to;
  std::string label;  // "protocol/message"
  Bytes payload;
  std::uint64_t round = 0;  // index within the protocol's session
  std::uint64_t step = 0;
  std::uint64_t seq = 0;  // global send order
};

struct EdgeStats {
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
};

struct CostLedger {
  std::map<PartyId, OpCount> ops;
  std::map<std::pair<PartyId, PartyId>, EdgeStats> edges;  // directed
  std::map<std::string, std::uint64_t> rounds;             // per protocol (label prefix)
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t latency_total = 0;  // sum of simulated per-message delays

  OpCount total_ops() const;
  // Messages in both directions between a and b.
  std::uint64_t messages_between(const PartyId& a, const PartyId& b) const;
  std::uint64_t total_messages() const;
  std::uint64_t total_bytes() const;
  std::string summary() const;
};

// Deterministic message bus with FIFO queues per ordered party pair.
class Network {
 public:
  using LossHook = std::function<bool(const Envelope&)>;
  using LatencyHook = std::function<std::uint64_t(const Envelope&)>;

  explicit Network(bool keep_log = true) : keep_log_(keep_log) {}

  void set_step(std::uint64_t k) noexcept { step_ = k; }
  std::uint64_t step() const noexcept { return step_; }

  void send(const PartyId& from, const PartyId& to, const std::string& label, Bytes payload);
  // Pops the oldest message on (from -> to); ProtocolAbort if the queue is
  // empty or the label does not match.
  Envelope receive(const PartyId& to, const PartyId& from, const std::string& label);
  bool pending(const PartyId& to, const PartyId& from) const;
  std::size_t in_flight() const;

  // Starts a new session of `protocol`: round numbering restarts at 0 while
  // the ledger keeps the running total.
  void begin_session(const std::string& protocol);
  std::uint64_t session_rounds(const std::string& protocol) const;

  // Routes operation tallies into the ledger entry of `party`.
  counting::Scope acting_as(const PartyId& party);

  const CostLedger& ledger() const noexcept { return ledger_; }
  CostLedger& ledger() noexcept { return ledger_; }
  const std::vector<Envelope>& log() const noexcept { return log_; }
  void clear_log() { log_.clear(); }

  // Extension points; both default off (lossless, zero latency).
  void set_loss_hook(LossHook h) { loss_ = std::move(h); }
  void set_latency_hook(LatencyHook h) { latency_ = std::move(h); }

 private:
  bool keep_log_;
  std::uint64_t step_ = 0;
  std::uint64_t seq_ = 0;
  std::map<std::pair<PartyId, PartyId>, std::deque<Envelope>> queues_;
  std::map<std::string, std::uint64_t> session_;
  CostLedger ledger_;
  std::vector<Envelope> log_;
  LossHook loss_;
  LatencyHook latency_;
};

// Byte-string writer/reader for protocol payloads.
class Writer {
 public:
  Writer& u8(std::uint8_t v);
  Writer& u32(std::uint32_t v);
  Writer& f64(double v);
  Writer& bytes(const Bytes& b);  // length-prefixed
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

class Reader {
 public:
  explicit Reader(const Bytes& b) : buf_(b) {}
  std::uint8_t u8();
  std::uint32_t u32();
  double f64();
  Bytes bytes();
  bool done() const noexcept { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const;
  const Bytes& buf_;
  std::size_t pos_ = 0;
};

Bytes f64_bytes(double v);

struct AuditVerdict {
  bool pass = true;
  std::uint64_t forbidden_messages = 0;
  std::vector<std::string> violations;
};

// Fails on any envelope between a forbidden pair (either direction) whose
// label is not in `allowed_labels`.
AuditVerdict noncollusion_audit(const std::vector<Envelope>& log,
                                const std::vector<std::pair<PartyId, PartyId>>& forbidden,
                                const std::set<std::string>& allowed_labels = {});

struct Secret {
  std::string name;
  std::vector<Bytes> encodings;  // canonical byte forms to search for
  std::set<PartyId> forbidden;   // parties that must never see it
};

struct LeakageReport {
  bool pass = true;
  std::uint64_t scanned_messages = 0;
  std::vector<std::string> hits;
};

LeakageReport leakage_scan(const std::vector<Envelope>& log, const std::vector<Secret>& secrets);

struct ChiSquare {
  double statistic = 0;
  double dof = 0;
  double p_value = 1;
};

// Pearson test of `counts` against the uniform distribution.
ChiSquare chi_square_uniform(const std::vector<std::uint64_t>& counts);

}  // namespace encctl
