#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "encctl/analysis.hpp"
#include "encctl/coop.hpp"
#include "encctl/linctrl.hpp"
#include "encctl/mpc.hpp"

namespace encctl {

inline const std::vector<std::string>& known_schemes() {
  static const std::vector<std::string> s{
      "plain",          "elgamal-linear", "paillier-linear", "two-cloud-linear",
      "explicit-mpc-a", "explicit-mpc-b", "realtime-pgs",    "two-cloud-pgs",
      "coop-plain",     "coop-shares",    "coop-encrypted",  "coop-masked"};
  return s;
}

struct ScenarioConfig {
  std::string name = "scenario";
  std::string scheme;
  int steps = 10;
  std::uint64_t seed = 1;

  LinearPlant plant;
  Mat K;  // linear schemes

  FixedPointCode code;
  std::size_t key_bits = 64;  // Paillier bits per prime, ElGamal modulus bits

  // predictive schemes
  Mat Q, R, Pf;
  int horizon = 1;
  Vec u_min, u_max;
  Vec domain_lower, domain_upper;  // explicit law domain; defaults to the quantizer box
  int J = 3;
  int kappa = 8;

  // cooperative schemes
  CoopPlant coop;
  SparseGain gain;
  ZeroShareSource source = ZeroShareSource::Central;

  bool certificate = false;
  double x_bound = 0;  // 0: quantizer range

  std::string trace_file;   // default <name>_trace.csv
  std::string ledger_file;  // default <name>_ledger.txt

  bool is_coop() const { return scheme.rfind("coop-", 0) == 0; }
  bool is_mpc() const;
  bool is_linear() const { return !is_coop() && !is_mpc(); }
  OcpSpec ocp() const;
};

// INI text with [scenario], [plant], [controller], [code], [mpc], [coop],
// [analysis] sections. ConfigError names the offending field.
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::filesystem::path& path);

Mat parse_matrix(const std::string& text);  // "1 0.1; 0 1"
Vec parse_vector(const std::string& text);  // "1 0 -2"

std::unique_ptr<Controller> make_controller(const ScenarioConfig& cfg);

struct ScenarioResult {
  Trace trace;
  CostLedger ledger;
  std::vector<Envelope> log;
  std::vector<std::string> warnings;
  std::string scheme;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg, bool keep_log = true);

struct CertificateSets {
  Mat Acl, Bw;
  Box D;
  Polytope Xres, R_min, R_max;
  RpiResult min_info;
  MaxRpiResult max_info;
};

// Disturbance box, minimal and maximal RPI sets for a linear scheme.
CertificateSets certificate_sets(const ScenarioConfig& cfg);

// Throws CertificateViolated when R_min does not fit in Xres or the trace
// breaks the trajectory claim.
CertificateReport certify(const ScenarioConfig& cfg, const CertificateSets& sets, const Trace& trace);

// Hex transcript, one envelope per line.
void write_transcript(std::ostream& os, const std::vector<Envelope>& log);

}  // namespace encctl
