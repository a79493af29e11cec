#include "encctl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace encctl {

Box Box::symmetric(const Vec& half_width) { return Box{-half_width, half_width}; }

void Box::validate() const {
  if (lower.size() != upper.size()) throw Error(ErrorCode::DimensionMismatch, "box bounds");
  if (!(lower.array() <= upper.array()).all()) throw Error(ErrorCode::OutOfRange, "box lower > upper");
}

HPoly Box::to_poly() const { return HPoly::box(lower, upper); }

double Box::support(const Vec& a) const {
  double s = 0;
  for (Eigen::Index j = 0; j < a.size(); ++j) s += std::max(a(j) * lower(j), a(j) * upper(j));
  return s;
}

Box quantization_disturbance_bound(const Mat& K, const FixedPointCode& code, double x_bound,
                                   bool refined) {
  if (x_bound > code.range()) {
    throw Error(ErrorCode::RangeViolation, "x bound exceeds beta^gamma");
  }
  if (K.size() > 0 && K.cwiseAbs().maxCoeff() > code.range()) {
    throw Error(ErrorCode::RangeViolation, "gain entry exceeds beta^gamma");
  }
  const double h = code.resolution();
  Vec half(K.rows());
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    double s = 0;
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      const double kq = quantize(K(i, j), code);
      if (refined) {
        const double e = std::fabs(kq - K(i, j));
        s += (std::fabs(K(i, j)) + e) * h + e * x_bound;
      } else {
        s += std::fabs(kq) * h + h * x_bound;
      }
    }
    half(i) = s;
  }
  return Box::symmetric(half);
}

SchurVerdict schur_check(const Mat& A, const Mat& B, const Mat& K) {
  SchurVerdict v;
  v.spectral_radius = spectral_radius(A + B * K);
  v.stable = v.spectral_radius < 1 - 1e-9;
  return v;
}

double disturbance_support(const Mat& Bw, const Box& D, const Vec& a) {
  return D.support(Bw.transpose() * a);
}

bool is_bounded(const Polytope& P) {
  for (int i = 0; i < P.dim(); ++i) {
    for (double s : {1.0, -1.0}) {
      Vec d = Vec::Zero(P.dim());
      d(i) = s;
      const LpResult r = support(P, d);
      if (r.status == LpStatus::Unbounded) return false;
    }
  }
  return true;
}

namespace {

std::vector<Vec> axis_directions(int n) {
  std::vector<Vec> out;
  for (int i = 0; i < n; ++i) {
    for (double s : {1.0, -1.0}) {
      Vec d = Vec::Zero(n);
      d(i) = s;
      out.push_back(d);
    }
  }
  return out;
}

double inf_norm(const Mat& M) { return M.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

RpiResult rpi_minimal(const Mat& Acl, const Mat& Bw, const Box& D, double tol,
                      const std::vector<Vec>& directions) {
  D.validate();
  const int n = static_cast<int>(Acl.rows());
  if (spectral_radius(Acl) >= 1 - 1e-9) throw Error(ErrorCode::NotSchur, "closed loop is not Schur");

  // ||Acl^L|| < 1 for some L; the tail then contracts geometrically
  int L = 1;
  Mat AL = Acl;
  while (inf_norm(AL) >= 1) {
    if (++L > 100000) throw Error(ErrorCode::IllConditioned, "no contracting power of Acl");
    AL = AL * Acl;
  }
  const double q = inf_norm(AL);
  double S = 0;
  Mat Ar = Mat::Identity(n, n);
  for (int r = 0; r < L; ++r) {
    S += inf_norm(Ar);
    Ar = Ar * Acl;
  }
  double wbar = 0;
  for (const auto& d : axis_directions(n)) wbar = std::max(wbar, disturbance_support(Bw, D, d));

  RpiResult res;
  Mat AT = Mat::Identity(n, n);
  res.tail = wbar * S / (1 - q);
  while (res.tail > tol) {
    if (++res.horizon > 1000000) throw Error(ErrorCode::IllConditioned, "tail does not shrink");
    AT = AT * Acl;
    res.tail = wbar * inf_norm(AT) * S / (1 - q);
  }

  const auto dirs = directions.empty() ? axis_directions(n) : directions;
  res.set.A.resize(static_cast<Eigen::Index>(dirs.size()), n);
  res.set.b.resize(static_cast<Eigen::Index>(dirs.size()));
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    Vec v = dirs[k];
    double h = 0;
    for (int t = 0; t < res.horizon; ++t) {
      h += disturbance_support(Bw, D, v);
      v = Acl.transpose() * v;
    }
    res.set.A.row(static_cast<Eigen::Index>(k)) = dirs[k].transpose();
    res.set.b(static_cast<Eigen::Index>(k)) = h + res.tail * dirs[k].lpNorm<1>();
  }
  res.invariant = rpi_condition_check(res.set, Acl, Bw, D, res.set).invariant;
  return res;
}

MaxRpiResult rpi_maximal(const Mat& Acl, const Mat& Bw, const Box& D, const Polytope& X, int cap) {
  D.validate();
  if (!is_bounded(X)) throw Error(ErrorCode::UnboundedSet, "state constraint set is unbounded");
  MaxRpiResult res;
  Polytope omega = X;
  for (int k = 0; k < cap; ++k) {
    Polytope pre;
    pre.A = omega.A * Acl;
    pre.b.resize(omega.rows());
    for (int i = 0; i < omega.rows(); ++i) {
      pre.b(i) = omega.b(i) - disturbance_support(Bw, D, omega.A.row(i).transpose());
    }
    const Chebyshev ball = chebyshev_ball(X.intersect(pre));
    res.iterations = k + 1;
    if (ball.status != LpStatus::Optimal || ball.radius < 0) {
      res.set = X.intersect(pre);
      res.converged = true;  // empty: no state can be kept inside X
      return res;
    }
    const Polytope next = remove_redundant(X.intersect(pre));
    bool same = true;
    for (int i = 0; i < next.rows() && same; ++i) {
      const LpResult r = support(omega, next.A.row(i).transpose());
      same = r.status == LpStatus::Optimal && r.value <= next.b(i) + 1e-9;
    }
    omega = next;
    if (same) {
      res.converged = true;
      break;
    }
  }
  res.set = omega;
  return res;
}

RpiCheck rpi_condition_check(const Polytope& R, const Mat& Acl, const Mat& Bw, const Box& D,
                             const Polytope& Xres, double tol) {
  if (!is_bounded(R) || !is_bounded(Xres)) throw Error(ErrorCode::UnboundedSet, "RPI check needs bounded sets");
  RpiCheck c;
  c.invariant = true;
  for (int i = 0; i < R.rows() && c.invariant; ++i) {
    const Vec a = R.A.row(i).transpose();
    const LpResult r = support(R, Acl.transpose() * a);
    if (r.status == LpStatus::Infeasible) break;  // empty set is trivially invariant
    c.invariant = r.value + disturbance_support(Bw, D, a) <= R.b(i) + tol;
  }
  c.contained = true;
  for (int i = 0; i < Xres.rows() && c.contained; ++i) {
    const LpResult r = support(R, Xres.A.row(i).transpose());
    if (r.status == LpStatus::Infeasible) break;
    c.contained = r.value <= Xres.b(i) + tol;
  }
  return c;
}

CertificateReport trajectory_certificate(const Trace& trace, const Polytope& R_max,
                                         const Polytope& R_min_outer, const Polytope& Xres,
                                         double tol) {
  CertificateReport rep;
  rep.steps = static_cast<int>(trace.rows.size());
  if (trace.rows.empty()) throw Error(ErrorCode::CertificateViolated, "empty trace");
  if (!R_max.contains(trace.rows.front().x, tol)) {
    throw Error(ErrorCode::CertificateViolated, "step 0: initial state outside the maximal RPI set");
  }
  for (const auto& row : trace.rows) {
    rep.max_norm = std::max(rep.max_norm, row.x.cwiseAbs().maxCoeff());
    if (!Xres.contains(row.x, tol)) {
      throw Error(ErrorCode::CertificateViolated, "step " + std::to_string(row.step) + ": state leaves Xres");
    }
  }
  for (auto it = trace.rows.rbegin(); it != trace.rows.rend(); ++it) {
    if (!R_min_outer.contains(it->x, tol)) break;
    rep.entry_step = it->step;
  }
  if (rep.entry_step < 0) {
    throw Error(ErrorCode::CertificateViolated,
                "step " + std::to_string(trace.rows.back().step) + ": trace ends outside the minimal RPI set");
  }
  return rep;
}

void write_halfspace_csv(std::ostream& os, const Polytope& P) {
  os << std::setprecision(17);
  for (int j = 0; j < P.dim(); ++j) os << 'a' << j + 1 << ',';
  os << "b\n";
  for (int i = 0; i < P.rows(); ++i) {
    for (int j = 0; j < P.dim(); ++j) os << P.A(i, j) << ',';
    os << P.b(i) << '\n';
  }
}

std::vector<Vec> polytope_vertices(const Polytope& P) {
  if (!is_bounded(P)) throw Error(ErrorCode::UnboundedSet, "vertex list of an unbounded set");
  std::vector<Vec> out;
  if (P.dim() == 1) {
    for (double s : {-1.0, 1.0}) {
      const LpResult r = support(P, Vec::Constant(1, s));
      if (r.status == LpStatus::Optimal) out.push_back(r.x);
    }
    return out;
  }
  if (P.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "vertex export supports 1-D and 2-D sets");
  for (int i = 0; i < P.rows(); ++i) {
    for (int j = i + 1; j < P.rows(); ++j) {
      Mat M(2, 2);
      M << P.A.row(i), P.A.row(j);
      if (std::fabs(M.determinant()) < 1e-12) continue;
      Vec rhs(2);
      rhs << P.b(i), P.b(j);
      const Vec v = M.partialPivLu().solve(rhs);
      if (!P.contains(v, 1e-9)) continue;
      const bool dup = std::any_of(out.begin(), out.end(), [&](const Vec& w) { return (w - v).norm() < 1e-9; });
      if (!dup) out.push_back(v);
    }
  }
  if (out.empty()) return out;
  Vec c = Vec::Zero(2);
  for (const auto& v : out) c += v;
  c /= static_cast<double>(out.size());
  std::sort(out.begin(), out.end(), [&](const Vec& a, const Vec& b) {
    return std::atan2(a(1) - c(1), a(0) - c(0)) < std::atan2(b(1) - c(1), b(0) - c(0));
  });
  return out;
}

void write_vertex_csv(std::ostream& os, const Polytope& P) {
  os << std::setprecision(17);
  for (int j = 0; j < P.dim(); ++j) os << (j ? "," : "") << 'x' << j + 1;
  os << '\n';
  for (const auto& v : polytope_vertices(P)) {
    for (Eigen::Index j = 0; j < v.size(); ++j) os << (j ? "," : "") << v(j);
    os << '\n';
  }
}

}  // namespace encctl
