#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "encctl/scenario.hpp"
#include "encctl/trace_io.hpp"

namespace fs = std::filesystem;
using namespace encctl;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kCertificateViolation = 2;
constexpr int kCountMismatch = 3;

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + p.string());
  return out;
}

void export_sets(const fs::path& dir, const std::string& name, const CertificateSets& sets) {
  for (const auto& [tag, set] : {std::pair{"rpi_min", &sets.R_min}, std::pair{"rpi_max", &sets.R_max}}) {
    auto hs = open_out(dir / (name + "_" + tag + "_halfspaces.csv"));
    write_halfspace_csv(hs, *set);
    if (set->dim() <= 2 && set->rows() > 0) {
      auto vs = open_out(dir / (name + "_" + tag + "_vertices.csv"));
      write_vertex_csv(vs, *set);
    }
  }
}

int report_certificate(const CertificateReport& rep) {
  std::cout << "certificate: pass, entered the minimal RPI set at step " << rep.entry_step << " of "
            << rep.steps << ", max |x| = " << rep.max_norm << '\n';
  return kOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::CertificateViolated:
    case ErrorCode::RangeViolation:
      return kCertificateViolation;
    default:
      return kConfigError;
  }
}

int cmd_run(const std::string& cfg_path, std::optional<std::uint64_t> seed, const fs::path& out_dir,
            bool transcripts) {
  ScenarioConfig cfg = load_config(cfg_path);
  if (seed) cfg.seed = *seed;
  fs::create_directories(out_dir);
  const ScenarioResult res = run_scenario(cfg, transcripts);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';

  {
    auto out = open_out(out_dir / cfg.trace_file);
    write_trace_csv(out, res.trace, res.scheme);
  }
  {
    auto out = open_out(out_dir / cfg.ledger_file);
    out << res.ledger.summary();
  }
  if (transcripts) {
    auto out = open_out(out_dir / (cfg.name + "_transcript.txt"));
    write_transcript(out, res.log);
  }
  std::cout << cfg.name << ": scheme " << res.scheme << ", " << res.trace.rows.size() << " steps, "
            << res.ledger.total_messages() << " messages, " << res.ledger.total_bytes() << " bytes\n";
  if (!res.trace.exact_match()) {
    std::cerr << "error: controller output differs from its plaintext oracle\n";
    return kConfigError;
  }
  std::cout << "oracle: exact match on every step\n";
  if (cfg.certificate) {
    const CertificateSets sets = certificate_sets(cfg);
    export_sets(out_dir, cfg.name, sets);
    return report_certificate(certify(cfg, sets, res.trace));
  }
  return kOk;
}

int cmd_verify(const std::string& trace_path, const std::string& verify_cfg_path) {
  std::ifstream in(trace_path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + trace_path);
  const Trace trace = read_trace_csv(in);
  const ScenarioConfig cfg = load_config(verify_cfg_path);
  if (trace.n != cfg.plant.n()) throw Error(ErrorCode::ConfigError, "trace and config state dimensions differ");
  return report_certificate(certify(cfg, certificate_sets(cfg), trace));
}

int cmd_counts(const std::string& cfg_path, std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg = load_config(cfg_path);
  if (seed) cfg.seed = *seed;
  if (cfg.scheme != "elgamal-linear" && cfg.scheme != "paillier-linear") {
    throw Error(ErrorCode::ConfigError, "counts needs elgamal-linear or paillier-linear");
  }
  const ScenarioResult res = run_scenario(cfg, false);
  const int n = cfg.plant.n();
  const int m = cfg.plant.m();
  OpCount per = cfg.scheme == "elgamal-linear" ? predicted_ops_elgamal(n, m) : predicted_ops_paillier(n, m);
  OpCount predicted;
  for (int k = 0; k < cfg.steps; ++k) predicted += per;
  OpCount measured;
  for (const auto& r : res.trace.rows) measured += r.ops;
  measured.rerandomize = 0;

  std::printf("%-14s %10s %10s\n", "operation", "predicted", "measured");
  const auto row = [](const char* name, std::uint64_t p, std::uint64_t q) {
    std::printf("%-14s %10llu %10llu%s\n", name, static_cast<unsigned long long>(p),
                static_cast<unsigned long long>(q), p == q ? "" : "  MISMATCH");
  };
  row("Enc", predicted.enc, measured.enc);
  row("Dec", predicted.dec, measured.dec);
  row("Mul (x)", predicted.hom_mul, measured.hom_mul);
  row("Add (+)", predicted.hom_add, measured.hom_add);
  row("MulConst (.)", predicted.hom_mul_const, measured.hom_mul_const);
  return predicted == measured ? kOk : kCountMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encrypted control simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool transcripts = false;
  app.add_option("--seed", seed, "Override the scenario seed");
  app.add_option("--out-dir", out_dir, "Directory for traces, ledgers and set exports");
  app.add_flag("--transcripts", transcripts, "Write a hex transcript of every message");

  std::string cfg_path, trace_path, verify_cfg_path;
  auto* run = app.add_subcommand("run", "Run a scenario and write its trace");
  run->add_option("config", cfg_path, "Scenario file")->required();
  auto* verify = app.add_subcommand("verify", "Check a trace against the RPI certificate");
  verify->add_option("trace", trace_path, "Trace CSV")->required();
  verify->add_option("config", verify_cfg_path, "Scenario file with plant, gain and code")->required();
  auto* counts = app.add_subcommand("counts", "Compare predicted and measured operation counts");
  counts->add_option("config", cfg_path, "Linear scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(cfg_path, seed, out_dir, transcripts);
    if (*verify) return cmd_verify(trace_path, verify_cfg_path);
    if (*counts) return cmd_counts(cfg_path, seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
