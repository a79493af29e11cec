#include "encctl/linalg.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace encctl {

bool HPoly::contains(const Vec& x, double tol) const {
  if (A.rows() == 0) return true;
  return ((A * x - b).array() <= tol).all();
}

HPoly HPoly::box(const Vec& lower, const Vec& upper) {
  const auto n = lower.size();
  HPoly P;
  P.A = Mat::Zero(2 * n, n);
  P.b = Vec(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    P.A(i, i) = 1;
    P.b(i) = upper(i);
    P.A(n + i, i) = -1;
    P.b(n + i) = -lower(i);
  }
  return P;
}

HPoly HPoly::intersect(const HPoly& other) const {
  if (rows() == 0) return other;
  if (other.rows() == 0) return *this;
  if (dim() != other.dim()) throw Error(ErrorCode::DimensionMismatch, "polytope dimensions");
  HPoly P;
  P.A.resize(A.rows() + other.A.rows(), A.cols());
  P.A << A, other.A;
  P.b.resize(b.size() + other.b.size());
  P.b << b, other.b;
  return P;
}

namespace {

constexpr double kPivotEps = 1e-11;

// Tableau over non-negative variables; last column is the right-hand side,
// last row the objective written as z - c'y = 0 (maximization).
struct Tableau {
  Mat T;
  std::vector<int> basis;

  int rows() const { return static_cast<int>(T.rows()) - 1; }
  int cols() const { return static_cast<int>(T.cols()) - 1; }

  void pivot(int r, int c) {
    T.row(r) /= T(r, c);
    for (int i = 0; i <= rows(); ++i) {
      if (i != r && T(i, c) != 0) T.row(i) -= T(i, c) * T.row(r);
    }
    basis[static_cast<std::size_t>(r)] = c;
  }

  // false when unbounded
  bool optimize(const std::vector<bool>& allowed) {
    const int m = rows();
    const int n = cols();
    for (int iter = 0; iter < 200000; ++iter) {
      int enter = -1;
      for (int j = 0; j < n; ++j) {
        if (allowed[static_cast<std::size_t>(j)] && T(m, j) < -1e-10) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (T(i, enter) > kPivotEps) {
          const double ratio = T(i, n) / T(i, enter);
          if (ratio < best - 1e-12 ||
              (std::fabs(ratio - best) <= 1e-12 && leave >= 0 &&
               basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw Error(ErrorCode::IllConditioned, "simplex iteration limit");
  }
};

}  // namespace

LpResult lp_maximize(const Vec& c, const Mat& A, const Vec& b) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  LpResult res;
  res.x = Vec::Zero(n);
  if (m == 0) {
    res.status = c.isZero() ? LpStatus::Optimal : LpStatus::Unbounded;
    return res;
  }
  // columns: x+ (n), x- (n), slack (m), artificial (one per negative rhs row)
  std::vector<int> art_row;
  for (int i = 0; i < m; ++i) {
    if (b(i) < 0) art_row.push_back(i);
  }
  const int na = static_cast<int>(art_row.size());
  const int cols = 2 * n + m + na;
  Tableau tab;
  tab.T = Mat::Zero(m + 1, cols + 1);
  tab.basis.assign(static_cast<std::size_t>(m), -1);
  for (int i = 0; i < m; ++i) {
    const double sign = b(i) < 0 ? -1.0 : 1.0;
    tab.T.block(i, 0, 1, n) = sign * A.row(i);
    tab.T.block(i, n, 1, n) = -sign * A.row(i);
    tab.T(i, 2 * n + i) = sign;
    tab.T(i, cols) = sign * b(i);
    if (sign > 0) tab.basis[static_cast<std::size_t>(i)] = 2 * n + i;
  }
  for (int k = 0; k < na; ++k) {
    const int i = art_row[static_cast<std::size_t>(k)];
    tab.T(i, 2 * n + m + k) = 1;
    tab.basis[static_cast<std::size_t>(i)] = 2 * n + m + k;
  }

  std::vector<bool> allowed(static_cast<std::size_t>(cols), true);
  if (na > 0) {
    // phase 1: maximize -sum(artificials)
    for (int k = 0; k < na; ++k) tab.T(m, 2 * n + m + k) = 1;
    for (int i : art_row) tab.T.row(m) -= tab.T.row(i);
    tab.optimize(allowed);
    if (tab.T(m, cols) < -1e-8) {
      res.status = LpStatus::Infeasible;
      return res;
    }
    // drive remaining artificials out of the basis
    for (int i = 0; i < m; ++i) {
      if (tab.basis[static_cast<std::size_t>(i)] < 2 * n + m) continue;
      for (int j = 0; j < 2 * n + m; ++j) {
        if (std::fabs(tab.T(i, j)) > 1e-9) {
          tab.pivot(i, j);
          break;
        }
      }
    }
    for (int k = 0; k < na; ++k) allowed[static_cast<std::size_t>(2 * n + m + k)] = false;
  }

  tab.T.row(m).setZero();
  for (int j = 0; j < n; ++j) {
    tab.T(m, j) = -c(j);
    tab.T(m, n + j) = c(j);
  }
  for (int i = 0; i < m; ++i) {
    const int bj = tab.basis[static_cast<std::size_t>(i)];
    if (tab.T(m, bj) != 0) tab.T.row(m) -= tab.T(m, bj) * tab.T.row(i);
  }
  if (!tab.optimize(allowed)) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  Vec y = Vec::Zero(cols);
  for (int i = 0; i < m; ++i) y(tab.basis[static_cast<std::size_t>(i)]) = tab.T(i, cols);
  res.x = y.head(n) - y.segment(n, n);
  res.value = c.dot(res.x);
  res.status = LpStatus::Optimal;
  return res;
}

LpResult support(const HPoly& P, const Vec& d) { return lp_maximize(d, P.A, P.b); }

Chebyshev chebyshev_ball(const HPoly& P) {
  // maximize t s.t. a_i'x + ||a_i|| t <= b_i, t <= 1e6
  const int n = P.dim();
  const int m = P.rows();
  Mat A(m + 1, n + 1);
  Vec b(m + 1);
  for (int i = 0; i < m; ++i) {
    A.block(i, 0, 1, n) = P.A.row(i);
    A(i, n) = P.A.row(i).norm();
    b(i) = P.b(i);
  }
  A.row(m).setZero();
  A(m, n) = 1;
  b(m) = 1e6;
  Vec c = Vec::Zero(n + 1);
  c(n) = 1;
  const LpResult r = lp_maximize(c, A, b);
  Chebyshev out;
  out.status = r.status;
  if (r.status == LpStatus::Optimal) {
    out.radius = r.x(n);
    out.center = r.x.head(n);
  }
  return out;
}

HPoly remove_redundant(const HPoly& P, double tol) {
  std::vector<int> keep;
  const int m = P.rows();
  for (int i = 0; i < m; ++i) {
    // rows kept so far plus rows not yet examined, with row i relaxed
    std::vector<int> others;
    for (int k : keep) others.push_back(k);
    for (int k = i; k < m; ++k) others.push_back(k);
    Mat A(static_cast<Eigen::Index>(others.size()), P.dim());
    Vec b(static_cast<Eigen::Index>(others.size()));
    for (std::size_t r = 0; r < others.size(); ++r) {
      A.row(static_cast<Eigen::Index>(r)) = P.A.row(others[r]);
      b(static_cast<Eigen::Index>(r)) = P.b(others[r]) + (others[r] == i ? 1.0 : 0.0);
    }
    const LpResult res = lp_maximize(P.A.row(i).transpose(), A, b);
    if (res.status == LpStatus::Infeasible) return P;
    if (res.status == LpStatus::Unbounded || res.value > P.b(i) + tol) keep.push_back(i);
  }
  HPoly out;
  out.A.resize(static_cast<Eigen::Index>(keep.size()), P.dim());
  out.b.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.A.row(static_cast<Eigen::Index>(r)) = P.A.row(keep[r]);
    out.b(static_cast<Eigen::Index>(r)) = P.b(keep[r]);
  }
  return out;
}

double lambda_max(const Mat& H, double rel_tol, int max_iter) {
  if (H.rows() != H.cols() || H.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "lambda_max needs a square matrix");
  }
  // irregular start so that structured matrices do not hide the top eigenvector
  Vec v(H.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::sqrt(static_cast<double>(i) + 2.0);
  v.normalize();
  double lambda = v.dot(H * v);
  for (int it = 0; it < max_iter; ++it) {
    Vec w = H * v;
    const double norm = w.norm();
    if (norm == 0) return 0;
    v = w / norm;
    const double next = v.dot(H * v);
    if (std::fabs(next - lambda) <= rel_tol * std::fabs(next)) return next;
    lambda = next;
  }
  return lambda;
}

double spectral_radius(const Mat& A) {
  if (A.rows() != A.cols()) throw Error(ErrorCode::DimensionMismatch, "spectral radius of non-square");
  if (A.rows() == 0) return 0;
  Eigen::EigenSolver<Mat> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace encctl
