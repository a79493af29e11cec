#pragma once

#include <vector>

#include <Eigen/Dense>

#include "encctl/common.hpp"

namespace encctl {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

using IntVec = std::vector<BigInt>;
using IntMat = std::vector<IntVec>;  // row-major

// Half-space description {x : A x <= b}.
struct HPoly {
  Mat A;
  Vec b;

  int dim() const { return static_cast<int>(A.cols()); }
  int rows() const { return static_cast<int>(A.rows()); }
  bool contains(const Vec& x, double tol = 1e-9) const;
  static HPoly box(const Vec& lower, const Vec& upper);
  HPoly intersect(const HPoly& other) const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0;
  Vec x;
};

// maximize c'x subject to A x <= b with x free. Dense two-phase simplex with
// Bland's rule; intended for the small problems that arise here.
LpResult lp_maximize(const Vec& c, const Mat& A, const Vec& b);

// Support function h_P(d) = max d'x over P.
LpResult support(const HPoly& P, const Vec& d);

// Largest ball inside P; radius <= 0 means P has empty interior.
struct Chebyshev {
  LpStatus status = LpStatus::Infeasible;
  double radius = 0;
  Vec center;
};
Chebyshev chebyshev_ball(const HPoly& P);

// Drops rows implied by the others (one LP per row).
HPoly remove_redundant(const HPoly& P, double tol = 1e-9);

// Dominant eigenvalue of a symmetric positive semidefinite matrix by power
// iteration from a fixed deterministic start vector.
double lambda_max(const Mat& H, double rel_tol = 1e-12, int max_iter = 100000);

double spectral_radius(const Mat& A);

}  // namespace encctl
