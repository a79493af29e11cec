#include "encctl/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace encctl {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> k{
      {"scenario", {"name", "scheme", "steps", "seed"}},
      {"plant", {"A", "B", "x0", "noise"}},
      {"controller", {"K"}},
      {"code", {"beta", "gamma", "delta", "phi", "key_bits"}},
      {"mpc", {"Q", "R", "P", "N", "u_min", "u_max", "domain_lower", "domain_upper", "J", "kappa"}},
      {"coop", {"agents", "edges", "n", "m", "x0", "noise", "source"}},
      {"analysis", {"certificate", "x_bound"}},
      {"output", {"trace", "ledger"}},
  };
  return k;
}

bool coop_block_key(const std::string& key) {
  return key.rfind("A_", 0) == 0 || key.rfind("B_", 0) == 0 || key.rfind("K_", 0) == 0;
}

[[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ConfigError, "[" + section + "] " + key + ": " + why);
}

class Ini {
 public:
  explicit Ini(pt::ptree tree) : tree_(std::move(tree)) {}

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    const auto s = tree_.get_child_optional(pt::ptree::path_type(section, '\0'));
    if (!s) return std::nullopt;
    const auto v = s->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return *v;
  }

  std::string need(const std::string& section, const std::string& key) const {
    auto v = get(section, key);
    if (!v) fail(section, key, "missing");
    return *v;
  }

  Mat matrix(const std::string& section, const std::string& key) const {
    try {
      return parse_matrix(need(section, key));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ConfigError) throw;
      fail(section, key, e.what());
    }
  }

  Vec vector(const std::string& section, const std::string& key) const {
    try {
      return parse_vector(need(section, key));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ConfigError) throw;
      fail(section, key, e.what());
    }
  }

  double number(const std::string& section, const std::string& key, double def) const {
    const auto v = get(section, key);
    if (!v) return def;
    try {
      std::size_t used = 0;
      const double d = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument(*v);
      return d;
    } catch (const std::exception&) {
      fail(section, key, "not a number: '" + *v + "'");
    }
  }

  long long integer(const std::string& section, const std::string& key, long long def) const {
    const auto v = get(section, key);
    if (!v) return def;
    try {
      std::size_t used = 0;
      const long long d = std::stoll(*v, &used);
      if (used != v->size()) throw std::invalid_argument(*v);
      return d;
    } catch (const std::exception&) {
      fail(section, key, "not an integer: '" + *v + "'");
    }
  }

  bool flag(const std::string& section, const std::string& key, bool def) const {
    const auto v = get(section, key);
    if (!v) return def;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    fail(section, key, "expected true or false");
  }

  void check_keys() const {
    for (const auto& [section, body] : tree_) {
      const auto it = allowed_keys().find(section);
      if (it == allowed_keys().end()) fail(section, "*", "unknown section");
      for (const auto& [key, value] : body) {
        (void)value;
        if (it->second.count(key) == 0 && !(section == "coop" && coop_block_key(key))) {
          fail(section, key, "unknown key");
        }
      }
    }
  }

 private:
  pt::ptree tree_;
};

std::vector<int> int_list(const Ini& ini, const std::string& section, const std::string& key, int count,
                          int def) {
  const auto v = ini.get(section, key);
  if (!v) return std::vector<int>(static_cast<std::size_t>(count), def);
  const Vec parsed = parse_vector(*v);
  if (parsed.size() != count) fail(section, key, "expected " + std::to_string(count) + " entries");
  std::vector<int> out;
  for (Eigen::Index i = 0; i < parsed.size(); ++i) {
    if (parsed(i) < 1 || parsed(i) != static_cast<int>(parsed(i))) fail(section, key, "entries must be positive integers");
    out.push_back(static_cast<int>(parsed(i)));
  }
  return out;
}

void parse_coop(const Ini& ini, ScenarioConfig& cfg) {
  const int M = static_cast<int>(ini.integer("coop", "agents", 0));
  if (M < 1) fail("coop", "agents", "must be >= 1");
  std::vector<std::pair<int, int>> edges;
  {
    std::stringstream ss(ini.need("coop", "edges"));
    std::string tok;
    while (ss >> tok) {
      const auto dash = tok.find('-');
      if (dash == std::string::npos) fail("coop", "edges", "expected i-j pairs, got '" + tok + "'");
      try {
        edges.emplace_back(std::stoi(tok.substr(0, dash)), std::stoi(tok.substr(dash + 1)));
      } catch (const std::exception&) {
        fail("coop", "edges", "bad pair '" + tok + "'");
      }
    }
  }
  auto& p = cfg.coop;
  try {
    p.graph = CommGraph::from_edges(M, edges);
  } catch (const Error& e) {
    fail("coop", "edges", e.what());
  }
  p.n = int_list(ini, "coop", "n", M, 1);
  p.m = int_list(ini, "coop", "m", M, 1);
  for (int i = 0; i < M; ++i) {
    const std::string bi = "B_" + std::to_string(i);
    p.B.push_back(ini.matrix("coop", bi));
    for (int j = 0; j < M; ++j) {
      const std::string ij = std::to_string(i) + "_" + std::to_string(j);
      if (ini.get("coop", "A_" + ij)) p.A[{i, j}] = ini.matrix("coop", "A_" + ij);
      if (ini.get("coop", "K_" + ij)) cfg.gain.K[{i, j}] = ini.matrix("coop", "K_" + ij);
    }
    if (!p.A.count({i, i})) fail("coop", "A_" + std::to_string(i) + "_" + std::to_string(i), "missing");
  }
  p.x0 = ini.vector("coop", "x0");
  p.noise = ini.number("coop", "noise", 0);
  cfg.gain.n = p.n;
  cfg.gain.m = p.m;
  const std::string src = ini.get("coop", "source").value_or("central");
  if (src == "central") {
    cfg.source = ZeroShareSource::Central;
  } else if (src == "decentralized") {
    cfg.source = ZeroShareSource::Decentralized;
  } else {
    fail("coop", "source", "expected central or decentralized");
  }
  try {
    p.validate();
    cfg.gain.validate(p.graph);
  } catch (const Error& e) {
    fail("coop", "*", e.what());
  }
}

}  // namespace

Mat parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) {
    std::stringstream rs(row);
    std::vector<double> r;
    std::string tok;
    while (rs >> tok) {
      try {
        std::size_t used = 0;
        r.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "bad matrix entry '" + tok + "'");
      }
    }
    if (!r.empty()) rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(ErrorCode::ConfigError, "empty matrix");
  for (const auto& r : rows) {
    if (r.size() != rows.front().size()) throw Error(ErrorCode::ConfigError, "ragged matrix rows");
  }
  Mat M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return M;
}

Vec parse_vector(const std::string& text) {
  if (text.find(';') != std::string::npos) throw Error(ErrorCode::ConfigError, "vector must be a single row");
  const Mat M = parse_matrix(text);
  return M.row(0).transpose();
}

bool ScenarioConfig::is_mpc() const {
  return scheme == "explicit-mpc-a" || scheme == "explicit-mpc-b" || scheme == "realtime-pgs" ||
         scheme == "two-cloud-pgs";
}

OcpSpec ScenarioConfig::ocp() const {
  OcpSpec o;
  o.A = plant.A;
  o.B = plant.B;
  o.Q = Q;
  o.R = R;
  o.Pf = Pf;
  o.N = horizon;
  o.u_min = u_min;
  o.u_max = u_max;
  return o;
}

ScenarioConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("syntax: ") + e.what());
  }
  const Ini ini(std::move(tree));
  ini.check_keys();

  ScenarioConfig cfg;
  cfg.scheme = ini.need("scenario", "scheme");
  const auto& known = known_schemes();
  if (std::find(known.begin(), known.end(), cfg.scheme) == known.end()) {
    fail("scenario", "scheme", "unknown scheme '" + cfg.scheme + "'");
  }
  cfg.name = ini.get("scenario", "name").value_or("scenario");
  cfg.steps = static_cast<int>(ini.integer("scenario", "steps", 10));
  if (cfg.steps < 1) fail("scenario", "steps", "must be >= 1");
  const long long seed = ini.integer("scenario", "seed", 1);
  if (seed < 0) fail("scenario", "seed", "must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);

  cfg.code.beta = static_cast<int>(ini.integer("code", "beta", 10));
  cfg.code.gamma = static_cast<int>(ini.integer("code", "gamma", 1));
  cfg.code.delta = static_cast<int>(ini.integer("code", "delta", 1));
  if (cfg.code.beta < 2) fail("code", "beta", "must be >= 2");
  if (cfg.code.gamma < 0) fail("code", "gamma", "must be >= 0");
  if (cfg.code.delta < 0) fail("code", "delta", "must be >= 0");
  if (const auto phi = ini.get("code", "phi")) {
    if (cfg.code.phi.set_str(*phi, 10) != 0 || cfg.code.phi < 2) fail("code", "phi", "not a positive integer");
  } else {
    cfg.code.phi = BigInt(1) << 64;
  }
  const long long kb = ini.integer("code", "key_bits", 64);
  if (kb < 8) fail("code", "key_bits", "must be >= 8");
  cfg.key_bits = static_cast<std::size_t>(kb);

  if (cfg.is_coop()) {
    parse_coop(ini, cfg);
  } else {
    cfg.plant.A = ini.matrix("plant", "A");
    cfg.plant.B = ini.matrix("plant", "B");
    cfg.plant.x0 = ini.vector("plant", "x0");
    cfg.plant.noise = ini.number("plant", "noise", 0);
    try {
      cfg.plant.validate();
    } catch (const Error& e) {
      fail("plant", "*", e.what());
    }
  }
  if (cfg.is_linear()) {
    cfg.K = ini.matrix("controller", "K");
    if (cfg.K.rows() != cfg.plant.m() || cfg.K.cols() != cfg.plant.n()) {
      fail("controller", "K", "must be " + std::to_string(cfg.plant.m()) + "x" + std::to_string(cfg.plant.n()));
    }
  }
  if (cfg.is_mpc()) {
    cfg.Q = ini.matrix("mpc", "Q");
    cfg.R = ini.matrix("mpc", "R");
    cfg.Pf = ini.get("mpc", "P") ? ini.matrix("mpc", "P") : cfg.Q;
    cfg.horizon = static_cast<int>(ini.integer("mpc", "N", 1));
    cfg.u_min = ini.vector("mpc", "u_min");
    cfg.u_max = ini.vector("mpc", "u_max");
    const double r = cfg.code.range();
    cfg.domain_lower = ini.get("mpc", "domain_lower") ? ini.vector("mpc", "domain_lower")
                                                      : Vec(Vec::Constant(cfg.plant.n(), -r));
    cfg.domain_upper = ini.get("mpc", "domain_upper") ? ini.vector("mpc", "domain_upper")
                                                      : Vec(Vec::Constant(cfg.plant.n(), r));
    cfg.J = static_cast<int>(ini.integer("mpc", "J", 3));
    cfg.kappa = static_cast<int>(ini.integer("mpc", "kappa", 8));
    if (cfg.J < 1) fail("mpc", "J", "must be >= 1");
    if (cfg.kappa < 1) fail("mpc", "kappa", "must be >= 1");
    try {
      cfg.ocp().validate();
    } catch (const Error& e) {
      fail("mpc", "*", e.what());
    }
  }
  cfg.certificate = ini.flag("analysis", "certificate", false);
  cfg.x_bound = ini.number("analysis", "x_bound", 0);
  if (cfg.certificate && !cfg.is_linear()) fail("analysis", "certificate", "needs a linear scheme");
  cfg.trace_file = ini.get("output", "trace").value_or(cfg.name + "_trace.csv");
  cfg.ledger_file = ini.get("output", "ledger").value_or(cfg.name + "_ledger.txt");
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  return parse_config(in);
}

std::unique_ptr<Controller> make_controller(const ScenarioConfig& cfg) {
  Rng rng = Rng(cfg.seed).fork("controller");
  const auto& s = cfg.scheme;
  if (s == "plain") return std::make_unique<PlainLinear>(cfg.K);
  if (s == "elgamal-linear") return std::make_unique<ElGamalLinear>(cfg.K, cfg.code, cfg.key_bits, rng);
  if (s == "paillier-linear") return std::make_unique<PaillierLinear>(cfg.K, cfg.code, cfg.key_bits, rng);
  if (s == "two-cloud-linear") return std::make_unique<TwoCloudLinear>(cfg.K, cfg.code, rng);
  if (cfg.is_mpc()) {
    const QPData qp = condense(cfg.ocp());
    if (s == "realtime-pgs") return std::make_unique<RealtimePgs>(qp, cfg.code, cfg.key_bits, rng);
    if (s == "two-cloud-pgs") {
      return std::make_unique<TwoCloudPgs>(qp, cfg.code, cfg.key_bits, cfg.J, cfg.kappa, rng);
    }
    const PwaLaw law = explicit_solve(qp, HPoly::box(cfg.domain_lower, cfg.domain_upper));
    const auto v = s == "explicit-mpc-a" ? ExplicitVariant::IndexToCloud : ExplicitVariant::IndexToActuator;
    return std::make_unique<ExplicitMpc>(law, cfg.code, cfg.key_bits, v, rng);
  }
  const CoopVariant v = s == "coop-plain"    ? CoopVariant::Plain
                        : s == "coop-shares" ? CoopVariant::Shares
                        : s == "coop-encrypted" ? CoopVariant::Encrypted
                                                : CoopVariant::Masked;
  return std::make_unique<CoopController>(cfg.coop, cfg.gain, v, cfg.code, cfg.key_bits, rng, cfg.source);
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, bool keep_log) {
  ScenarioResult res;
  auto ctrl = make_controller(cfg);
  res.scheme = ctrl->scheme();
  if (const auto* coop = dynamic_cast<const CoopController*>(ctrl.get())) {
    for (int i : coop->warnings()) {
      res.warnings.push_back("agent " + std::to_string(i) + " has a single neighbor; masking degenerates");
    }
  }
  Network net(keep_log);
  ctrl->setup(net);
  Rng noise = Rng(cfg.seed).fork("noise");
  const LinearPlant plant = cfg.is_coop() ? cfg.coop.stacked() : cfg.plant;
  res.trace = closed_loop(plant, *ctrl, cfg.steps, net, noise);
  res.ledger = net.ledger();
  res.log = net.log();
  return res;
}

CertificateSets certificate_sets(const ScenarioConfig& cfg) {
  if (!cfg.is_linear()) throw Error(ErrorCode::ConfigError, "certificate needs a linear scheme");
  CertificateSets s;
  const double r = cfg.code.range();
  const double xb = cfg.x_bound > 0 ? cfg.x_bound : r;
  s.Acl = cfg.plant.A + cfg.plant.B * cfg.K;
  s.Bw = cfg.plant.B;
  s.D = quantization_disturbance_bound(cfg.K, cfg.code, xb);
  const auto n = cfg.plant.n();
  s.Xres = HPoly::box(Vec::Constant(n, -r), Vec::Constant(n, r));
  s.min_info = rpi_minimal(s.Acl, s.Bw, s.D);
  s.R_min = s.min_info.set;
  s.max_info = rpi_maximal(s.Acl, s.Bw, s.D, s.Xres);
  s.R_max = s.max_info.set;
  return s;
}

CertificateReport certify(const ScenarioConfig& cfg, const CertificateSets& sets, const Trace& trace) {
  (void)cfg;
  const RpiCheck c = rpi_condition_check(sets.R_min, sets.Acl, sets.Bw, sets.D, sets.Xres);
  if (!c.invariant) throw Error(ErrorCode::CertificateViolated, "minimal RPI approximation is not invariant");
  if (!c.contained) throw Error(ErrorCode::CertificateViolated, "minimal RPI set is not inside Xres");
  if (!sets.max_info.converged) {
    throw Error(ErrorCode::CertificateViolated, "maximal RPI iteration did not converge");
  }
  return trajectory_certificate(trace, sets.R_max, sets.R_min, sets.Xres);
}

void write_transcript(std::ostream& os, const std::vector<Envelope>& log) {
  static const char* hex = "0123456789abcdef";
  for (const auto& e : log) {
    os << e.step << ' ' << e.seq << ' ' << e.round << ' ' << e.from.name() << ' ' << e.to.name() << ' '
       << e.label << ' ';
    for (auto b : e.payload) os << hex[b >> 4] << hex[b & 15];
    os << '\n';
  }
}

}  // namespace encctl
