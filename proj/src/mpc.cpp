#include "encctl/mpc.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace encctl {

namespace {

bool is_spd(const Mat& M) {
  if (M.rows() != M.cols() || M.rows() == 0) return false;
  if (!M.isApprox(M.transpose(), 1e-12)) return false;
  Eigen::LLT<Mat> llt(M);
  return llt.info() == Eigen::Success;
}

Mat mat_pow(const Mat& A, int k) {
  Mat P = Mat::Identity(A.rows(), A.cols());
  for (int i = 0; i < k; ++i) P = P * A;
  return P;
}

Mat append_rows(const Mat& top, const Mat& bottom) {
  if (top.rows() == 0) return bottom;
  if (bottom.rows() == 0) return top;
  Mat out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

Vec append(const Vec& top, const Vec& bottom) {
  Vec out(top.size() + bottom.size());
  out << top, bottom;
  return out;
}

BigInt inf_norm(const IntMat& M) {
  BigInt best = 0;
  for (const auto& row : M) {
    BigInt s = 0;
    for (const auto& v : row) s += abs(v);
    if (s > best) best = s;
  }
  return best;
}

Vec clamp(const Vec& z, const Vec& lo, const Vec& hi) { return z.cwiseMax(lo).cwiseMin(hi); }

void send_cts(Network& net, const PartyId& from, const PartyId& to, const std::string& label,
              const std::vector<Ciphertext>& cs, const PaillierPublicKey& pk) {
  for (const auto& c : cs) net.send(from, to, label, serialize(c, pk));
}

std::vector<Ciphertext> recv_cts(Network& net, const PartyId& to, const PartyId& from,
                                 const std::string& label, std::size_t count,
                                 const PaillierPublicKey& pk) {
  std::vector<Ciphertext> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(deserialize_ciphertext(net.receive(to, from, label).payload, pk));
  }
  return out;
}

// sum_j K_ij (.) c_j with every product carrying k_scale extra scalings
std::vector<Ciphertext> hom_matvec(const IntMat& K, const std::vector<Ciphertext>& c,
                                   const PaillierPublicKey& pk, int k_scale,
                                   const BigInt& lift = 1) {
  std::vector<Ciphertext> out;
  out.reserve(K.size());
  for (const auto& row : K) {
    Ciphertext acc = mul_const(c[0], row[0] * lift, pk, k_scale);
    for (std::size_t j = 1; j < row.size(); ++j) {
      acc = add(acc, mul_const(c[j], row[j] * lift, pk, k_scale), pk);
    }
    out.push_back(std::move(acc));
  }
  return out;
}

Bytes pack_doubles(const Vec& v) {
  Writer w;
  for (Eigen::Index i = 0; i < v.size(); ++i) w.f64(v(i));
  return w.take();
}

Vec unpack_doubles(const Bytes& b, Eigen::Index n) {
  Reader r(b);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = r.f64();
  return v;
}

}  // namespace

void OcpSpec::validate() const {
  const auto nn = A.rows();
  if (nn == 0 || A.cols() != nn || B.rows() != nn || B.cols() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "plant matrices A, B");
  }
  if (Q.rows() != nn || Pf.rows() != nn || R.rows() != B.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "weight matrices Q, R, P");
  }
  if (!is_spd(Q) || !is_spd(R) || !is_spd(Pf)) {
    throw Error(ErrorCode::IllConditioned, "Q, R and P must be symmetric positive definite");
  }
  if (N < 1) throw Error(ErrorCode::OutOfRange, "horizon N must be >= 1");
  if (u_min.size() != B.cols() || u_max.size() != B.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "input bounds");
  }
  if (!(u_min.array() < u_max.array()).all()) {
    throw Error(ErrorCode::OutOfRange, "u_min must be below u_max");
  }
  if (X.rows() > 0 && X.dim() != nn) throw Error(ErrorCode::DimensionMismatch, "state constraints");
  if (T.rows() > 0 && T.dim() != nn) throw Error(ErrorCode::DimensionMismatch, "terminal set");
}

QPData condense(const OcpSpec& ocp) {
  ocp.validate();
  const int n = ocp.n();
  const int m = ocp.m();
  const int N = ocp.N;
  Mat Phi = Mat::Zero(N * n, n);
  Mat Gamma = Mat::Zero(N * n, N * m);
  for (int k = 1; k <= N; ++k) {
    Phi.block((k - 1) * n, 0, n, n) = mat_pow(ocp.A, k);
    for (int i = 0; i < k; ++i) {
      Gamma.block((k - 1) * n, i * m, n, m) = mat_pow(ocp.A, k - 1 - i) * ocp.B;
    }
  }
  Mat Qbar = Mat::Zero(N * n, N * n);
  for (int k = 0; k < N; ++k) Qbar.block(k * n, k * n, n, n) = (k == N - 1) ? ocp.Pf : ocp.Q;
  Mat Rbar = Mat::Zero(N * m, N * m);
  for (int k = 0; k < N; ++k) Rbar.block(k * m, k * m, m, m) = ocp.R;

  QPData qp;
  qp.n = n;
  qp.m = m;
  qp.N = N;
  qp.H = 2 * (Gamma.transpose() * Qbar * Gamma + Rbar);
  qp.H = 0.5 * (qp.H + qp.H.transpose());
  qp.F = 2 * Gamma.transpose() * Qbar * Phi;
  if (Eigen::LLT<Mat>(qp.H).info() != Eigen::Success) {
    throw Error(ErrorCode::IllConditioned, "Cholesky factorization of H failed");
  }

  const int nz = N * m;
  qp.z_min.resize(nz);
  qp.z_max.resize(nz);
  for (int k = 0; k < N; ++k) {
    qp.z_min.segment(k * m, m) = ocp.u_min;
    qp.z_max.segment(k * m, m) = ocp.u_max;
  }
  qp.G = Mat::Zero(2 * nz, nz);
  qp.G.topRows(nz) = Mat::Identity(nz, nz);
  qp.G.bottomRows(nz) = -Mat::Identity(nz, nz);
  qp.h = append(qp.z_max, -qp.z_min);
  qp.E = Mat::Zero(2 * nz, n);

  auto add_state_rows = [&](const HPoly& S, int k) {
    const Mat Gk = S.A * Gamma.block((k - 1) * n, 0, n, nz);
    const Mat Ek = -S.A * Phi.block((k - 1) * n, 0, n, n);
    qp.G = append_rows(qp.G, Gk);
    qp.E = append_rows(qp.E, Ek);
    qp.h = append(qp.h, S.b);
  };
  if (ocp.X.rows() > 0) {
    for (int k = 1; k < N; ++k) add_state_rows(ocp.X, k);
  }
  if (ocp.T.rows() > 0) add_state_rows(ocp.T, N);

  qp.lambda_max_H = lambda_max(qp.H);
  qp.rho = 1.0 / qp.lambda_max_H;
  return qp;
}

Vec PwaLaw::evaluate(const Vec& x) const {
  const auto& seg = segments[point_locate(*this, x)];
  return seg.K * x + seg.b;
}

PwaLaw explicit_solve(const QPData& qp, const HPoly& domain) {
  const int rows = static_cast<int>(qp.G.rows());
  if (rows > kMaxEnumerationRows) {
    throw Error(ErrorCode::EnumerationBudgetExceeded,
                std::to_string(rows) + " inequality rows exceed the budget of " +
                    std::to_string(kMaxEnumerationRows));
  }
  if (domain.dim() != qp.n) throw Error(ErrorCode::DimensionMismatch, "domain dimension");
  const int nz = qp.nz();
  const Eigen::LDLT<Mat> Hf(qp.H);
  const Mat HinvF = Hf.solve(qp.F);

  PwaLaw law;
  law.n = qp.n;
  law.m = qp.m;
  for (std::uint32_t mask = 0; mask < (1U << rows); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < rows; ++i) {
      if (mask & (1U << i)) act.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(act.size());
    if (k > nz) {
      ++law.skipped_degenerate;
      continue;
    }
    Mat GA(k, nz), EA(k, qp.n);
    Vec hA(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      GA.row(r) = qp.G.row(act[static_cast<std::size_t>(r)]);
      EA.row(r) = qp.E.row(act[static_cast<std::size_t>(r)]);
      hA(r) = qp.h(act[static_cast<std::size_t>(r)]);
    }
    Mat Z, Lambda;
    Vec z0, lambda0;
    if (k == 0) {
      Z = -HinvF;
      z0 = Vec::Zero(nz);
    } else {
      Eigen::FullPivLU<Mat> lu(GA);
      lu.setThreshold(1e-9);
      if (lu.rank() < k) {
        ++law.skipped_degenerate;  // linearly dependent active rows
        continue;
      }
      const Mat HinvGt = Hf.solve(GA.transpose());
      const Mat S = GA * HinvGt;
      const Eigen::LDLT<Mat> Sf(S);
      Lambda = -Sf.solve(EA + GA * HinvF);
      lambda0 = -Sf.solve(hA);
      Z = -(HinvF + HinvGt * Lambda);
      z0 = -HinvGt * lambda0;
    }
    // primal feasibility of inactive rows, dual feasibility of active rows
    std::vector<Eigen::Index> inactive;
    for (int i = 0; i < rows; ++i) {
      if (!(mask & (1U << i))) inactive.push_back(i);
    }
    HPoly region;
    region.A.resize(static_cast<Eigen::Index>(inactive.size()) + k, qp.n);
    region.b.resize(static_cast<Eigen::Index>(inactive.size()) + k);
    Eigen::Index r = 0;
    for (auto i : inactive) {
      region.A.row(r) = qp.G.row(i) * Z - qp.E.row(i);
      region.b(r) = qp.h(i) - qp.G.row(i).dot(z0);
      ++r;
    }
    for (Eigen::Index a = 0; a < k; ++a, ++r) {
      region.A.row(r) = -Lambda.row(a);
      region.b(r) = lambda0(a);
    }
    region = region.intersect(domain);
    const Chebyshev ball = chebyshev_ball(region);
    if (ball.status != LpStatus::Optimal || ball.radius <= 1e-9) continue;

    PwaSegment seg;
    seg.Z = Z;
    seg.z0 = z0;
    seg.K = Z.topRows(qp.m);
    seg.b = z0.head(qp.m);
    seg.region = remove_redundant(region);
    seg.active = act;
    law.segments.push_back(std::move(seg));
  }
  return law;
}

std::size_t point_locate(const PwaLaw& law, const Vec& x) {
  for (std::size_t s = 0; s < law.segments.size(); ++s) {
    if (law.segments[s].region.contains(x, 1e-9)) return s;
  }
  throw Error(ErrorCode::NotInAnyRegion, "state not covered by any region");
}

double pwa_continuity_gap(const PwaLaw& law, const HPoly& domain, int samples_per_facet) {
  double gap = 0;
  Rng rng(0x5eed);
  for (std::size_t a = 0; a < law.size(); ++a) {
    for (std::size_t b = a + 1; b < law.size(); ++b) {
      const HPoly both = law.segments[a].region.intersect(law.segments[b].region).intersect(domain);
      const Chebyshev ball = chebyshev_ball(both);
      if (ball.status != LpStatus::Optimal || ball.radius < -1e-9) continue;
      std::vector<Vec> points{ball.center};
      for (int s = 0; s < samples_per_facet; ++s) {
        Vec d(law.n);
        for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = rng.uniform(-1, 1);
        const LpResult r = support(both, d);
        if (r.status == LpStatus::Optimal) points.push_back(r.x);
      }
      for (const auto& x : points) {
        const Vec ua = law.segments[a].K * x + law.segments[a].b;
        const Vec ub = law.segments[b].K * x + law.segments[b].b;
        gap = std::max(gap, (ua - ub).cwiseAbs().maxCoeff());
      }
    }
  }
  return gap;
}

void write_pwa(std::ostream& os, const PwaLaw& law) {
  os << std::setprecision(17);
  os << "pwa " << law.n << ' ' << law.m << ' ' << law.size() << '\n';
  for (const auto& s : law.segments) {
    os << "segment " << s.region.rows() << '\n';
    for (Eigen::Index i = 0; i < s.K.rows(); ++i) {
      for (Eigen::Index j = 0; j < s.K.cols(); ++j) os << s.K(i, j) << ' ';
      os << s.b(i) << '\n';
    }
    for (Eigen::Index r = 0; r < s.region.rows(); ++r) {
      for (Eigen::Index j = 0; j < s.region.A.cols(); ++j) os << s.region.A(r, j) << ' ';
      os << s.region.b(r) << '\n';
    }
  }
}

PwaLaw read_pwa(std::istream& is) {
  std::string tag;
  PwaLaw law;
  std::size_t count = 0;
  if (!(is >> tag >> law.n >> law.m >> count) || tag != "pwa" || law.n < 1 || law.m < 1) {
    throw Error(ErrorCode::ConfigError, "PWA table: bad header");
  }
  for (std::size_t s = 0; s < count; ++s) {
    int rows = 0;
    if (!(is >> tag >> rows) || tag != "segment" || rows < 0) {
      throw Error(ErrorCode::ConfigError, "PWA table: bad segment header");
    }
    PwaSegment seg;
    seg.K.resize(law.m, law.n);
    seg.b.resize(law.m);
    for (int i = 0; i < law.m; ++i) {
      for (int j = 0; j < law.n; ++j) is >> seg.K(i, j);
      is >> seg.b(i);
    }
    seg.region.A.resize(rows, law.n);
    seg.region.b.resize(rows);
    for (int r = 0; r < rows; ++r) {
      for (int j = 0; j < law.n; ++j) is >> seg.region.A(r, j);
      is >> seg.region.b(r);
    }
    if (!is) throw Error(ErrorCode::ConfigError, "PWA table: truncated segment");
    law.segments.push_back(std::move(seg));
  }
  return law;
}

Vec pgs_iterate(const QPData& qp, const Vec& z, const Vec& x, double rho) {
  if (!(rho > 0) || !(rho < 2.0 / qp.lambda_max_H)) {
    throw Error(ErrorCode::StepSizeOutOfRange,
                "rho = " + std::to_string(rho) + " outside (0, 2/lambda_max)");
  }
  return clamp(z - rho * (qp.H * z + qp.F * x), qp.z_min, qp.z_max);
}

Vec pgs_iterate(const QPData& qp, const Vec& z, const Vec& x) {
  return pgs_iterate(qp, z, x, qp.rho);
}

PgsResult pgs_solve(const QPData& qp, const Vec& x, double tol, int max_iter,
                    std::optional<Vec> z_start) {
  PgsResult res;
  res.z = z_start ? *z_start : Vec::Zero(qp.nz());
  for (int j = 0; j < max_iter; ++j) {
    const Vec next = pgs_iterate(qp, res.z, x);
    const double step = (next - res.z).cwiseAbs().maxCoeff();
    res.z = next;
    res.iterations = j + 1;
    if (step < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

Mat shift_warmstart(int N, int m) {
  Mat D = Mat::Zero(N * m, N * m);
  for (int k = 0; k < N; ++k) {
    const int src = std::min(k + 1, N - 1);
    D.block(k * m, src * m, m, m) = Mat::Identity(m, m);
  }
  return D;
}

// ---------------------------------------------------------------- explicit

ExplicitMpc::ExplicitMpc(PwaLaw law, FixedPointCode code, std::size_t bits_per_prime,
                         ExplicitVariant v, Rng rng)
    : law_(std::move(law)),
      code_(std::move(code)),
      variant_(v),
      sensor_rng_(rng.fork("sensor")),
      cloud_rng_(rng.fork("cloud")) {
  if (law_.size() == 0) throw Error(ErrorCode::NotInAnyRegion, "empty PWA law");
  Rng key_rng = rng.fork("actuator-key");
  key_ = paillier_keygen(bits_per_prime, key_rng);
  code_.phi = key_.pub.P;
  code_.validate();
  const BigInt lift = code_.scale_factor(1);
  for (const auto& s : law_.segments) {
    Kq_.push_back(quantize_matrix(s.K, code_));
    IntVec b = quantize_vector(s.b, code_);
    for (auto& bi : b) bi *= lift;
    bq_.push_back(std::move(b));
  }
  const double bound = law_.n * code_.range() * code_.range() + code_.range();
  if (max_scale(code_, bound) < 2) {
    throw Error(ErrorCode::PrecisionOverflow, "scale-2 affine law does not fit the modulus");
  }
}

std::string ExplicitMpc::scheme() const {
  return variant_ == ExplicitVariant::IndexToCloud ? "explicit-mpc-a" : "explicit-mpc-b";
}

Vec ExplicitMpc::step(Network& net, const Vec& x) {
  const auto& pk = key_.pub;
  const auto n = static_cast<std::size_t>(law_.n);
  const auto m = static_cast<std::size_t>(law_.m);
  std::uint32_t sigma = 0;
  {
    auto ops = net.acting_as(sensor());
    sigma = static_cast<std::uint32_t>(point_locate(law_, x));
    const IntVec xq = quantize_vector(x, code_);
    std::vector<Ciphertext> xc;
    for (const auto& v : xq) xc.push_back(enc_signed(v, pk, sensor_rng_, 1));
    send_cts(net, sensor(), cloud(1), "explicit/x", xc, pk);
    const PartyId index_to = variant_ == ExplicitVariant::IndexToCloud ? cloud(1) : actuator();
    net.send(sensor(), index_to, "explicit/index", Writer().u32(sigma).take());
  }
  {
    auto ops = net.acting_as(cloud(1));
    const auto xc = recv_cts(net, cloud(1), sensor(), "explicit/x", n, pk);
    auto eval = [&](std::size_t s) {
      auto u = hom_matvec(Kq_[s], xc, pk, 1);
      for (std::size_t i = 0; i < m; ++i) {
        u[i] = add(u[i], enc_signed(bq_[s][i], pk, cloud_rng_, 2), pk);
      }
      send_cts(net, cloud(1), actuator(), "explicit/u", u, pk);
    };
    if (variant_ == ExplicitVariant::IndexToCloud) {
      const Bytes idx = net.receive(cloud(1), sensor(), "explicit/index").payload;
      Reader r(idx);
      const std::uint32_t s = r.u32();
      if (s >= law_.size()) throw Error(ErrorCode::ProtocolAbort, "segment index out of range");
      eval(s);
    } else {
      for (std::size_t s = 0; s < law_.size(); ++s) eval(s);
    }
  }
  auto ops = net.acting_as(actuator());
  std::vector<Ciphertext> uc;
  if (variant_ == ExplicitVariant::IndexToCloud) {
    uc = recv_cts(net, actuator(), cloud(1), "explicit/u", m, pk);
  } else {
    const Bytes idx = net.receive(actuator(), sensor(), "explicit/index").payload;
    Reader r(idx);
    const std::uint32_t s = r.u32();
    const auto all = recv_cts(net, actuator(), cloud(1), "explicit/u", m * law_.size(), pk);
    uc.assign(all.begin() + static_cast<std::ptrdiff_t>(s * m),
              all.begin() + static_cast<std::ptrdiff_t>((s + 1) * m));
  }
  IntVec u;
  for (const auto& c : uc) u.push_back(dec_signed(c, key_));
  return to_real(u, 2, code_);
}

Vec ExplicitMpc::oracle(const Vec& x) const {
  const std::size_t s = point_locate(law_, x);
  IntVec u = int_matvec(Kq_[s], quantize_vector(x, code_));
  for (std::size_t i = 0; i < u.size(); ++i) u[i] += bq_[s][i];
  return to_real(u, 2, code_);
}

std::vector<Secret> ExplicitMpc::secrets(const Vec& x, const Vec& u) const {
  auto s = value_secrets("x", x, code_, key_.pub.residue_bytes(), {cloud(1)});
  auto su = value_secrets("u", u, code_, key_.pub.residue_bytes(), {cloud(1)});
  s.insert(s.end(), su.begin(), su.end());
  return s;
}

// ---------------------------------------------------------------- real-time

RealtimePgs::RealtimePgs(QPData qp, FixedPointCode code, std::size_t bits_per_prime, Rng rng,
                         std::optional<Mat> D)
    : qp_(std::move(qp)), code_(std::move(code)), sensor_rng_(rng.fork("sensor")) {
  Rng key_rng = rng.fork("actuator-key");
  key_ = paillier_keygen(bits_per_prime, key_rng);
  code_.phi = key_.pub.P;
  code_.validate();
  D_ = D ? *D : shift_warmstart(qp_.N, qp_.m);
  if (D_.rows() != qp_.nz() || D_.cols() != qp_.nz()) {
    throw Error(ErrorCode::DimensionMismatch, "warmstart matrix D");
  }
  if (qp_.z_min.cwiseAbs().maxCoeff() > code_.range() || qp_.z_max.cwiseAbs().maxCoeff() > code_.range()) {
    throw Error(ErrorCode::OutOfRange, "input box exceeds the quantizer range");
  }
  const Mat M = Mat::Identity(qp_.nz(), qp_.nz()) - qp_.rho * qp_.H;
  Mq_ = quantize_matrix(M, code_);
  Lq_ = quantize_matrix(-qp_.rho * qp_.F, code_);
  const double bound = (qp_.nz() + qp_.n) * code_.range() * code_.range();
  if (max_scale(code_, bound) < 2) {
    throw Error(ErrorCode::PrecisionOverflow, "scale-2 iterate does not fit the modulus");
  }
  z0_ = Vec::Zero(qp_.nz());
}

Vec RealtimePgs::project(const Vec& zeta) const { return clamp(zeta, qp_.z_min, qp_.z_max); }

Vec RealtimePgs::step(Network& net, const Vec& x) {
  const auto& pk = key_.pub;
  const auto nz = static_cast<std::size_t>(qp_.nz());
  {
    auto ops = net.acting_as(sensor());
    std::vector<Ciphertext> zc, xc;
    for (const auto& v : quantize_vector(z0_, code_)) zc.push_back(enc_signed(v, pk, sensor_rng_, 1));
    for (const auto& v : quantize_vector(x, code_)) xc.push_back(enc_signed(v, pk, sensor_rng_, 1));
    send_cts(net, sensor(), cloud(1), "rtpgs/z0", zc, pk);
    send_cts(net, sensor(), cloud(1), "rtpgs/x", xc, pk);
  }
  {
    auto ops = net.acting_as(cloud(1));
    const auto zc = recv_cts(net, cloud(1), sensor(), "rtpgs/z0", nz, pk);
    const auto xc = recv_cts(net, cloud(1), sensor(), "rtpgs/x", static_cast<std::size_t>(qp_.n), pk);
    auto zeta = hom_matvec(Mq_, zc, pk, 1);
    const auto fx = hom_matvec(Lq_, xc, pk, 1);
    for (std::size_t i = 0; i < nz; ++i) zeta[i] = add(zeta[i], fx[i], pk);
    send_cts(net, cloud(1), actuator(), "rtpgs/zeta", zeta, pk);
  }
  Vec u;
  {
    auto ops = net.acting_as(actuator());
    const auto zc = recv_cts(net, actuator(), cloud(1), "rtpgs/zeta", nz, pk);
    IntVec zeta;
    for (const auto& c : zc) zeta.push_back(dec_signed(c, key_));
    const Vec z1 = project(to_real(zeta, 2, code_));
    u = z1.head(qp_.m);
    net.send(actuator(), sensor(), "rtpgs/z1", pack_doubles(z1));
  }
  const Vec z1 = unpack_doubles(net.receive(sensor(), actuator(), "rtpgs/z1").payload, qp_.nz());
  z0_ = D_ * z1;
  return u;
}

Vec RealtimePgs::oracle(const Vec& x) const {
  IntVec zeta = int_matvec(Mq_, quantize_vector(z0_, code_));
  const IntVec fx = int_matvec(Lq_, quantize_vector(x, code_));
  for (std::size_t i = 0; i < zeta.size(); ++i) zeta[i] += fx[i];
  return project(to_real(zeta, 2, code_)).head(qp_.m);
}

std::vector<Secret> RealtimePgs::secrets(const Vec& x, const Vec& u) const {
  auto s = value_secrets("x", x, code_, key_.pub.residue_bytes(), {cloud(1)});
  auto su = value_secrets("u", u, code_, key_.pub.residue_bytes(), {cloud(1)});
  s.insert(s.end(), su.begin(), su.end());
  return s;
}

// ---------------------------------------------------------------- two clouds

TwoCloudPgs::TwoCloudPgs(QPData qp, FixedPointCode code, std::size_t bits_per_prime, int J,
                         int kappa, Rng rng)
    : qp_(std::move(qp)),
      code_(std::move(code)),
      J_(J),
      kappa_(kappa),
      sensor_rng_(rng.fork("sensor")),
      c1_rng_(rng.fork("cloud1")),
      c2_rng_(rng.fork("cloud2")) {
  if (J_ < 1) throw Error(ErrorCode::OutOfRange, "J must be >= 1");
  Rng k2 = rng.fork("cloud2-key");
  key2_ = paillier_keygen(bits_per_prime, k2);
  Rng ka = rng.fork("actuator-key");
  key_act_ = paillier_keygen(bits_per_prime + 2, ka);  // P_act > 2 P_2
  code_.phi = key2_.pub.P;
  code_.validate();
  if (qp_.z_min.cwiseAbs().maxCoeff() > code_.range() || qp_.z_max.cwiseAbs().maxCoeff() > code_.range()) {
    throw Error(ErrorCode::OutOfRange, "input box exceeds the quantizer range");
  }
  const Mat M = Mat::Identity(qp_.nz(), qp_.nz()) - qp_.rho * qp_.H;
  Mq_ = quantize_matrix(M, code_);
  Lq_ = quantize_matrix(-qp_.rho * qp_.F, code_);

  // integer magnitude bounds per iteration; the iterate z^(j) carries scale j+1
  const BigInt xb = code_.int_range();
  const BigInt mn = inf_norm(Mq_);
  const BigInt ln = inf_norm(Lq_);
  BigInt boxb = 0;
  for (Eigen::Index i = 0; i < qp_.nz(); ++i) {
    boxb = std::max<BigInt>(boxb, abs(quantize_int(qp_.z_min(i), code_)));
    boxb = std::max<BigInt>(boxb, abs(quantize_int(qp_.z_max(i), code_)));
  }
  BigInt zb = 0;
  for (int j = 0; j < J_; ++j) {
    const BigInt zeta_b = mn * zb + ln * xb * code_.scale_factor(j);
    const BigInt box_now = boxb * code_.scale_factor(j + 1);
    const int l = comparison_bits(std::max(zeta_b, box_now));
    check_compare_headroom(l, kappa_, key2_.pub.P);
    l_.push_back(l);
    zb = box_now;
  }
  if (max_scale(code_, code_.range()) < J_ + 1) {
    throw Error(ErrorCode::PrecisionOverflow, "max_scale below J + 1");
  }
}

IntVec TwoCloudPgs::lifted_box(const Vec& bound, int scale) const {
  IntVec out = quantize_vector(bound, code_);
  for (auto& v : out) v *= code_.scale_factor(scale - 1);
  return out;
}

Vec TwoCloudPgs::step(Network& net, const Vec& x) {
  const auto& pk = key2_.pub;
  const auto nz = static_cast<std::size_t>(qp_.nz());
  const auto m = static_cast<std::size_t>(qp_.m);
  audited_.clear();
  {
    auto ops = net.acting_as(sensor());
    std::vector<Ciphertext> xc;
    for (const auto& v : quantize_vector(x, code_)) xc.push_back(enc_signed(v, pk, sensor_rng_, 1));
    send_cts(net, sensor(), cloud(1), "tcpgs/x", xc, pk);
  }
  TwoParty tp{net, cloud(1), cloud(2), key2_, c1_rng_, c2_rng_, kappa_};
  std::vector<Ciphertext> xc, z;
  {
    auto ops = net.acting_as(cloud(1));
    xc = recv_cts(net, cloud(1), sensor(), "tcpgs/x", static_cast<std::size_t>(qp_.n), pk);
    for (std::size_t i = 0; i < nz; ++i) z.push_back(enc(0, pk, c1_rng_, 1));
  }
  for (int j = 0; j < J_; ++j) {
    const int s = j + 1;
    std::vector<Ciphertext> zeta;
    std::vector<Ciphertext> lo, hi;
    {
      auto ops = net.acting_as(cloud(1));
      zeta = hom_matvec(Mq_, z, pk, 1);
      const auto fx = hom_matvec(Lq_, xc, pk, s, code_.scale_factor(s - 1));
      for (std::size_t i = 0; i < nz; ++i) zeta[i] = add(zeta[i], fx[i], pk);
      for (const auto& v : lifted_box(qp_.z_min, s + 1)) lo.push_back(enc_signed(v, pk, c1_rng_, s + 1));
      for (const auto& v : lifted_box(qp_.z_max, s + 1)) hi.push_back(enc_signed(v, pk, c1_rng_, s + 1));
    }
    const int l = l_[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < nz; ++i) {
      z[i] = encrypted_min(tp, encrypted_max(tp, zeta[i], lo[i], l), hi[i], l);
    }
    if (audit_) {
      counting::Scope silent(nullptr);
      IntVec zi;
      for (const auto& c : z) zi.push_back(dec_signed(c, key2_));
      audited_.push_back(to_real(zi, s + 1, code_));
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    const Ciphertext switched = key_switch(tp, z[i], key_act_.pub);
    auto ops = net.acting_as(cloud(1));
    net.send(cloud(1), actuator(), "tcpgs/u", serialize(switched, key_act_.pub));
  }
  auto ops = net.acting_as(actuator());
  IntVec u;
  for (std::size_t i = 0; i < m; ++i) {
    const Ciphertext c =
        deserialize_ciphertext(net.receive(actuator(), cloud(1), "tcpgs/u").payload, key_act_.pub);
    u.push_back(key_switch_lift(dec(c, key_act_), key_act_.pub.P, pk.P));
  }
  return to_real(u, J_ + 1, code_);
}

std::vector<Vec> TwoCloudPgs::oracle_iterates(const Vec& x) const {
  const IntVec xq = quantize_vector(x, code_);
  IntVec z(static_cast<std::size_t>(qp_.nz()), BigInt(0));
  std::vector<Vec> out;
  for (int j = 0; j < J_; ++j) {
    const int s = j + 1;
    IntVec zeta = int_matvec(Mq_, z);
    const IntVec fx = int_matvec(Lq_, xq);
    const IntVec lo = lifted_box(qp_.z_min, s + 1);
    const IntVec hi = lifted_box(qp_.z_max, s + 1);
    for (std::size_t i = 0; i < zeta.size(); ++i) {
      zeta[i] += fx[i] * code_.scale_factor(s - 1);
      z[i] = std::min(std::max(zeta[i], lo[i]), hi[i]);
    }
    out.push_back(to_real(z, s + 1, code_));
  }
  return out;
}

Vec TwoCloudPgs::oracle(const Vec& x) const { return oracle_iterates(x).back().head(qp_.m); }

std::vector<Secret> TwoCloudPgs::secrets(const Vec& x, const Vec& u) const {
  const std::set<PartyId> clouds{cloud(1), cloud(2)};
  auto s = value_secrets("x", x, code_, key2_.pub.residue_bytes(), clouds);
  auto su = value_secrets("u", u, code_, key2_.pub.residue_bytes(), clouds);
  s.insert(s.end(), su.begin(), su.end());
  return s;
}

}  // namespace encctl
