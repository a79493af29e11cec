#pragma once

#include <iosfwd>
#include <vector>

#include "encctl/fixedpoint.hpp"
#include "encctl/linalg.hpp"
#include "encctl/linctrl.hpp"

namespace encctl {

struct Box {
  Vec lower, upper;

  static Box symmetric(const Vec& half_width);
  void validate() const;
  int dim() const { return static_cast<int>(lower.size()); }
  HPoly to_poly() const;
  // max over w in the box of a'w
  double support(const Vec& a) const;
};

using Polytope = HPoly;

// Interval bound on d = K^ x^ - K x over |x_j| <= x_bound. The refined form
// uses the actual entry errors e_ij = |K^_ij - K_ij|:
//   |d_i| <= sum_j (|K_ij| + e_ij) beta^-delta + e_ij x_bound;
// the coarse form uses sum_j |K^_ij| beta^-delta + n beta^-delta x_bound.
Box quantization_disturbance_bound(const Mat& K, const FixedPointCode& code, double x_bound,
                                   bool refined = true);

struct SchurVerdict {
  double spectral_radius = 0;
  bool stable = false;
};
SchurVerdict schur_check(const Mat& A, const Mat& B, const Mat& K);

// W = Bw * D for a box D.
double disturbance_support(const Mat& Bw, const Box& D, const Vec& a);

bool is_bounded(const Polytope& P);

struct RpiResult {
  Polytope set;
  int horizon = 0;    // truncation length of the Minkowski sum
  double tail = 0;    // infinity-norm radius covering the truncated tail
  bool invariant = false;
};

// Outer approximation of the minimal RPI set in the given template
// directions (default: +-e_i). NotSchur when rho(Acl) >= 1.
RpiResult rpi_minimal(const Mat& Acl, const Mat& Bw, const Box& D, double tol = 1e-12,
                      const std::vector<Vec>& directions = {});

struct MaxRpiResult {
  Polytope set;
  int iterations = 0;
  bool converged = false;
};

// Backward iteration Omega_{k+1} = X cap pre(Omega_k), at most `cap` steps.
MaxRpiResult rpi_maximal(const Mat& Acl, const Mat& Bw, const Box& D, const Polytope& X,
                         int cap = 100);

struct RpiCheck {
  bool invariant = false;  // Acl R + W subset R
  bool contained = false;  // R subset Xres
  bool holds() const { return invariant && contained; }
};

RpiCheck rpi_condition_check(const Polytope& R, const Mat& Acl, const Mat& Bw, const Box& D,
                             const Polytope& Xres, double tol = 1e-9);

struct CertificateReport {
  int steps = 0;
  int entry_step = -1;  // first step from which every state lies in R_min
  double max_norm = 0;  // largest |x|_inf along the trace
};

// Throws CertificateViolated (naming the step) when x(0) is outside R_max,
// some x(k) leaves Xres, or the trace does not end inside R_min.
CertificateReport trajectory_certificate(const Trace& trace, const Polytope& R_max,
                                         const Polytope& R_min_outer, const Polytope& Xres,
                                         double tol = 1e-9);

// One row per half-space: a_1,...,a_n,b.
void write_halfspace_csv(std::ostream& os, const Polytope& P);
// Counter-clockwise vertices of a bounded 2-D polytope (endpoints in 1-D).
std::vector<Vec> polytope_vertices(const Polytope& P);
void write_vertex_csv(std::ostream& os, const Polytope& P);

}  // namespace encctl
