#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "encctl/linctrl.hpp"
#include "encctl/smpc.hpp"

namespace encctl {

struct OcpSpec {
  Mat A, B;
  Mat Q, R, Pf;
  int N = 1;
  Vec u_min, u_max;
  HPoly X;  // optional state constraints for k = 1..N-1 (no rows = unconstrained)
  HPoly T;  // optional terminal constraint on x(N)

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  void validate() const;
};

// min 1/2 z'Hz + (F x)'z  s.t.  G z <= h + E x, with z = (u(0); ...; u(N-1)).
// F is stored Nm x n so the gradient reads H z + F x.
struct QPData {
  int n = 0, m = 0, N = 0;
  Mat H;
  Mat F;
  Mat G;
  Mat E;
  Vec h;
  Vec z_min, z_max;  // box part of the constraints, repeated per stage
  double lambda_max_H = 0;
  double rho = 0;

  int nz() const { return N * m; }
  // Number of box rows at the top of G (2 * N * m).
  int box_rows() const { return 2 * N * m; }
};

QPData condense(const OcpSpec& ocp);

struct PwaSegment {
  Mat K;         // m x n
  Vec b;         // m
  HPoly region;  // in state space
  Mat Z;         // full optimizer z = Z x + z0
  Vec z0;
  std::vector<int> active;
};

struct PwaLaw {
  int n = 0, m = 0;
  std::vector<PwaSegment> segments;
  int skipped_degenerate = 0;

  std::size_t size() const { return segments.size(); }
  Vec evaluate(const Vec& x) const;
};

inline constexpr int kMaxEnumerationRows = 12;

PwaLaw explicit_solve(const QPData& qp, const HPoly& domain);

// Smallest sigma whose region contains x within 1e-9; NotInAnyRegion otherwise.
std::size_t point_locate(const PwaLaw& law, const Vec& x);

// Largest mismatch between neighbouring affine pieces at sampled facet points.
double pwa_continuity_gap(const PwaLaw& law, const HPoly& domain, int samples_per_facet = 20);

void write_pwa(std::ostream& os, const PwaLaw& law);
PwaLaw read_pwa(std::istream& is);

// One projected-gradient iterate over the box; StepSizeOutOfRange unless
// 0 < rho < 2 / lambda_max(H).
Vec pgs_iterate(const QPData& qp, const Vec& z, const Vec& x, double rho);
Vec pgs_iterate(const QPData& qp, const Vec& z, const Vec& x);

struct PgsResult {
  Vec z;
  int iterations = 0;
  bool converged = false;
};
PgsResult pgs_solve(const QPData& qp, const Vec& x, double tol = 1e-10, int max_iter = 1000000,
                    std::optional<Vec> z_start = std::nullopt);

// Shift with last-block repetition: (z_1, ..., z_{N-1}, z_{N-1}).
Mat shift_warmstart(int N, int m);

enum class ExplicitVariant { IndexToCloud, IndexToActuator };

class ExplicitMpc final : public Controller {
 public:
  ExplicitMpc(PwaLaw law, FixedPointCode code, std::size_t bits_per_prime, ExplicitVariant v,
              Rng rng);
  std::string scheme() const override;
  int n() const override { return law_.n; }
  int m() const override { return law_.m; }
  Vec step(Network& net, const Vec& x) override;
  Vec oracle(const Vec& x) const override;
  double x_range() const override { return code_.range(); }
  std::vector<Secret> secrets(const Vec& x, const Vec& u) const override;

  const PwaLaw& law() const { return law_; }

 private:
  PwaLaw law_;
  FixedPointCode code_;
  ExplicitVariant variant_;
  PaillierKeypair key_;
  std::vector<IntMat> Kq_;
  std::vector<IntVec> bq_;  // lifted to scale 2
  Rng sensor_rng_, cloud_rng_;
};

class RealtimePgs final : public Controller {
 public:
  RealtimePgs(QPData qp, FixedPointCode code, std::size_t bits_per_prime, Rng rng,
              std::optional<Mat> D = std::nullopt);
  std::string scheme() const override { return "realtime-pgs"; }
  int n() const override { return qp_.n; }
  int m() const override { return qp_.m; }
  Vec step(Network& net, const Vec& x) override;
  Vec oracle(const Vec& x) const override;
  double x_range() const override { return code_.range(); }
  std::vector<Secret> secrets(const Vec& x, const Vec& u) const override;

  const Vec& warmstart() const { return z0_; }
  void set_warmstart(const Vec& z0) { z0_ = z0; }

 private:
  Vec project(const Vec& zeta) const;

  QPData qp_;
  FixedPointCode code_;
  Mat D_;
  PaillierKeypair key_;
  IntMat Mq_;  // quantized I - rho H
  IntMat Lq_;  // quantized -rho F
  Vec z0_;     // sensor-side warmstart
  Rng sensor_rng_;
};

// J encrypted projected-gradient iterations between two clouds, then a key
// switch to the actuator.
class TwoCloudPgs final : public Controller {
 public:
  TwoCloudPgs(QPData qp, FixedPointCode code, std::size_t bits_per_prime, int J, int kappa,
              Rng rng);
  std::string scheme() const override { return "two-cloud-pgs"; }
  int n() const override { return qp_.n; }
  int m() const override { return qp_.m; }
  Vec step(Network& net, const Vec& x) override;
  Vec oracle(const Vec& x) const override;
  double x_range() const override { return code_.range(); }
  std::vector<Secret> secrets(const Vec& x, const Vec& u) const override;

  // Fixed-point iterates z^(1..J) of the plaintext oracle, as reals.
  std::vector<Vec> oracle_iterates(const Vec& x) const;
  // Test hook: when enabled, step() decrypts each encrypted iterate outside
  // the network so it can be compared against oracle_iterates().
  void set_audit(bool on) { audit_ = on; }
  const std::vector<Vec>& audited_iterates() const { return audited_; }

  int comparison_bits_at(int iteration) const { return l_[static_cast<std::size_t>(iteration)]; }
  int iterations() const { return J_; }

 private:
  IntVec lifted_box(const Vec& bound, int scale) const;

  QPData qp_;
  FixedPointCode code_;
  int J_;
  int kappa_;
  PaillierKeypair key2_;     // cloud 2
  PaillierKeypair key_act_;  // actuator
  IntMat Mq_, Lq_;
  std::vector<int> l_;  // comparison bit length per iteration
  Rng sensor_rng_, c1_rng_, c2_rng_;
  bool audit_ = false;
  std::vector<Vec> audited_;
};

}  // namespace encctl
