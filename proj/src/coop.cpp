#include "encctl/coop.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/LU>

namespace encctl {

namespace {

Bytes pack_cts(const std::vector<Ciphertext>& cs, const PaillierPublicKey& pk) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(cs.size()));
  for (const auto& c : cs) w.bytes(serialize(c, pk));
  return w.take();
}

std::vector<Ciphertext> unpack_cts(const Bytes& b, const PaillierPublicKey& pk) {
  Reader r(b);
  const std::uint32_t count = r.u32();
  std::vector<Ciphertext> out;
  for (std::uint32_t i = 0; i < count; ++i) out.push_back(deserialize_ciphertext(r.bytes(), pk));
  if (!r.done()) throw Error(ErrorCode::ProtocolAbort, "trailing bytes in ciphertext vector");
  return out;
}

Bytes pack_vec(const Vec& v) {
  Writer w;
  for (Eigen::Index i = 0; i < v.size(); ++i) w.f64(v(i));
  return w.take();
}

Vec unpack_vec(const Bytes& b, int size) {
  Reader r(b);
  Vec v(size);
  for (int i = 0; i < size; ++i) v(i) = r.f64();
  return v;
}

// Residue mod a wide modulus as ciphertext limbs under a narrower key.
std::vector<Ciphertext> enc_limbs(const BigInt& v, std::size_t limb_bits, std::size_t limbs,
                                  const PaillierPublicKey& pk, Rng& rng) {
  std::vector<Ciphertext> out;
  const BigInt mask = (BigInt(1) << limb_bits) - 1;
  BigInt rest = v;
  for (std::size_t k = 0; k < limbs; ++k) {
    out.push_back(enc(BigInt(rest & mask), pk, rng, 1));
    rest >>= limb_bits;
  }
  return out;
}

BigInt dec_limbs(const std::vector<Ciphertext>& cs, std::size_t limb_bits,
                 const PaillierKeypair& key) {
  BigInt v = 0;
  for (std::size_t k = cs.size(); k-- > 0;) v = (v << limb_bits) + dec(cs[k], key);
  return v;
}

}  // namespace

// ---------------------------------------------------------------- graph

CommGraph CommGraph::from_edges(int M, const std::vector<std::pair<int, int>>& edges) {
  CommGraph g;
  g.M = M;
  for (auto [a, b] : edges) {
    if (a == b) throw Error(ErrorCode::ConfigError, "graph has a self loop at " + std::to_string(a));
    if (a < 0 || b < 0 || a >= M || b >= M) {
      throw Error(ErrorCode::ConfigError, "edge endpoint outside 0.." + std::to_string(M - 1));
    }
    if (!g.edges.insert({std::min(a, b), std::max(a, b)}).second) {
      throw Error(ErrorCode::ConfigError, "duplicate edge");
    }
  }
  g.validate();
  return g;
}

CommGraph CommGraph::path(int M) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < M; ++i) e.emplace_back(i, i + 1);
  return from_edges(M, e);
}

CommGraph CommGraph::star(int leaves) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return from_edges(leaves + 1, e);
}

void CommGraph::validate() const {
  if (M < 1) throw Error(ErrorCode::ConfigError, "graph needs at least one agent");
  for (auto [a, b] : edges) {
    if (a >= b || a < 0 || b >= M) throw Error(ErrorCode::ConfigError, "malformed edge");
  }
  std::vector<int> seen{0};
  std::vector<bool> mark(static_cast<std::size_t>(M), false);
  mark[0] = true;
  for (std::size_t k = 0; k < seen.size(); ++k) {
    for (int j : neighbors(seen[k])) {
      if (!mark[static_cast<std::size_t>(j)]) {
        mark[static_cast<std::size_t>(j)] = true;
        seen.push_back(j);
      }
    }
  }
  if (static_cast<int>(seen.size()) != M) throw Error(ErrorCode::ConfigError, "graph is not connected");
}

bool CommGraph::adjacent(int i, int j) const {
  return edges.count({std::min(i, j), std::max(i, j)}) > 0;
}

std::vector<int> CommGraph::neighbors(int i) const {
  std::vector<int> out;
  for (auto [a, b] : edges) {
    if (a == i) out.push_back(b);
    if (b == i) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- plant, gain

void CoopPlant::validate() const {
  graph.validate();
  const auto M = static_cast<std::size_t>(graph.M);
  if (n.size() != M || m.size() != M || B.size() != M) {
    throw Error(ErrorCode::DimensionMismatch, "per-agent dimensions");
  }
  for (const auto& [ij, blk] : A) {
    const auto [i, j] = ij;
    if (i < 0 || j < 0 || i >= graph.M || j >= graph.M) {
      throw Error(ErrorCode::DimensionMismatch, "A block index");
    }
    if (blk.rows() != n[static_cast<std::size_t>(i)] || blk.cols() != n[static_cast<std::size_t>(j)]) {
      throw Error(ErrorCode::DimensionMismatch, "A block size");
    }
  }
  for (std::size_t i = 0; i < M; ++i) {
    if (B[i].rows() != n[i] || B[i].cols() != m[i]) throw Error(ErrorCode::DimensionMismatch, "B block size");
  }
  if (x0.size() != std::accumulate(n.begin(), n.end(), 0)) {
    throw Error(ErrorCode::DimensionMismatch, "x0 length");
  }
}

LinearPlant CoopPlant::stacked() const {
  validate();
  const int N = std::accumulate(n.begin(), n.end(), 0);
  const int Mu = std::accumulate(m.begin(), m.end(), 0);
  std::vector<int> off_n(n.size(), 0), off_m(m.size(), 0);
  for (std::size_t i = 1; i < n.size(); ++i) {
    off_n[i] = off_n[i - 1] + n[i - 1];
    off_m[i] = off_m[i - 1] + m[i - 1];
  }
  LinearPlant p;
  p.A = Mat::Zero(N, N);
  p.B = Mat::Zero(N, Mu);
  for (const auto& [ij, blk] : A) {
    p.A.block(off_n[static_cast<std::size_t>(ij.first)], off_n[static_cast<std::size_t>(ij.second)],
              blk.rows(), blk.cols()) = blk;
  }
  for (std::size_t i = 0; i < B.size(); ++i) p.B.block(off_n[i], off_m[i], n[i], m[i]) = B[i];
  p.x0 = x0;
  p.noise = noise;
  return p;
}

void SparseGain::validate(const CommGraph& g) const {
  const auto M = static_cast<std::size_t>(g.M);
  if (n.size() != M || m.size() != M) throw Error(ErrorCode::DimensionMismatch, "gain dimensions");
  for (const auto& [ij, blk] : K) {
    const auto [i, j] = ij;
    if (i < 0 || j < 0 || i >= g.M || j >= g.M) throw Error(ErrorCode::DimensionMismatch, "gain index");
    if (i != j && !g.adjacent(i, j)) {
      throw Error(ErrorCode::DimensionMismatch, "K(" + std::to_string(i) + "," + std::to_string(j) +
                                                    ") present but agents are not neighbors");
    }
    if (blk.rows() != m[static_cast<std::size_t>(i)] || blk.cols() != n[static_cast<std::size_t>(j)]) {
      throw Error(ErrorCode::DimensionMismatch, "gain block size");
    }
  }
}

const Mat* SparseGain::block(int i, int j) const {
  const auto it = K.find({i, j});
  return it == K.end() ? nullptr : &it->second;
}

Mat SparseGain::dense() const {
  const int N = std::accumulate(n.begin(), n.end(), 0);
  const int Mu = std::accumulate(m.begin(), m.end(), 0);
  Mat D = Mat::Zero(Mu, N);
  std::vector<int> off_n(n.size(), 0), off_m(m.size(), 0);
  for (std::size_t i = 1; i < n.size(); ++i) {
    off_n[i] = off_n[i - 1] + n[i - 1];
    off_m[i] = off_m[i - 1] + m[i - 1];
  }
  for (const auto& [ij, blk] : K) {
    D.block(off_m[static_cast<std::size_t>(ij.first)], off_n[static_cast<std::size_t>(ij.second)],
            blk.rows(), blk.cols()) = blk;
  }
  return D;
}

std::vector<Vec> split_agents(const Vec& x, const std::vector<int>& dims) {
  std::vector<Vec> out;
  Eigen::Index off = 0;
  for (int d : dims) {
    if (off + d > x.size()) throw Error(ErrorCode::DimensionMismatch, "stacked vector too short");
    out.push_back(x.segment(off, d));
    off += d;
  }
  if (off != x.size()) throw Error(ErrorCode::DimensionMismatch, "stacked vector too long");
  return out;
}

Vec stack_agents(const std::vector<Vec>& parts) {
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  Vec out(total);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    out.segment(off, p.size()) = p;
    off += p.size();
  }
  return out;
}

std::vector<Vec> plain_coop_step(const CommGraph& g, const SparseGain& K,
                                 const std::vector<Vec>& xs) {
  K.validate(g);
  if (xs.size() != static_cast<std::size_t>(g.M)) throw Error(ErrorCode::DimensionMismatch, "agent count");
  std::vector<Vec> u;
  for (int i = 0; i < g.M; ++i) {
    const auto mi = K.m[static_cast<std::size_t>(i)];
    Vec ui = Vec::Zero(mi);
    if (const Mat* Kii = K.block(i, i)) ui = *Kii * xs[static_cast<std::size_t>(i)];
    for (int j : g.neighbors(i)) {
      if (const Mat* Kij = K.block(i, j)) {
        const Vec v = *Kij * xs[static_cast<std::size_t>(j)];
        ui += v;
      } else {
        ui += Vec::Zero(mi);
      }
    }
    u.push_back(ui);
  }
  return u;
}

// ---------------------------------------------------------------- observability

int observability_rank(const Mat& A, const Mat& C) {
  const auto n = A.rows();
  Mat O(C.rows() * n, n);
  Mat CA = C;
  for (Eigen::Index k = 0; k < n; ++k) {
    O.middleRows(k * C.rows(), C.rows()) = CA;
    CA = CA * A;
  }
  Eigen::FullPivLU<Mat> lu(O);
  lu.setThreshold(1e-9);
  return static_cast<int>(lu.rank());
}

ObservabilityReport observability_probe(const std::vector<Mat>& A_jj, const std::vector<Mat>& K_ij) {
  if (A_jj.size() != K_ij.size() || A_jj.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "one dynamics block per neighbor gain");
  }
  ObservabilityReport rep;
  const auto rows = K_ij.front().rows();
  Eigen::Index total = 0;
  for (std::size_t j = 0; j < A_jj.size(); ++j) {
    if (A_jj[j].rows() != A_jj[j].cols() || K_ij[j].cols() != A_jj[j].rows() || K_ij[j].rows() != rows) {
      throw Error(ErrorCode::DimensionMismatch, "neighbor block " + std::to_string(j));
    }
    rep.individual_rank.push_back(observability_rank(A_jj[j], K_ij[j]));
    rep.individual_dim.push_back(static_cast<int>(A_jj[j].rows()));
    total += A_jj[j].rows();
  }
  Mat A = Mat::Zero(total, total);
  Mat C(rows, total);
  Eigen::Index off = 0;
  for (std::size_t j = 0; j < A_jj.size(); ++j) {
    const auto d = A_jj[j].rows();
    A.block(off, off, d, d) = A_jj[j];
    C.middleCols(off, d) = K_ij[j];
    off += d;
  }
  rep.aggregated_rank = observability_rank(A, C);
  rep.aggregated_dim = static_cast<int>(total);
  return rep;
}

// ---------------------------------------------------------------- controller

CoopController::CoopController(CoopPlant plant, SparseGain gain, CoopVariant variant,
                               FixedPointCode code, std::size_t bits_per_prime, Rng rng,
                               ZeroShareSource source)
    : plant_(std::move(plant)),
      gain_(std::move(gain)),
      variant_(variant),
      source_(source),
      code_(std::move(code)),
      te_rng_(rng.fork("trusted-entity")) {
  plant_.validate();
  gain_.validate(plant_.graph);
  if (gain_.n != plant_.n || gain_.m != plant_.m) {
    throw Error(ErrorCode::DimensionMismatch, "gain and plant partitions differ");
  }
  total_n_ = std::accumulate(plant_.n.begin(), plant_.n.end(), 0);
  total_m_ = std::accumulate(plant_.m.begin(), plant_.m.end(), 0);
  const int M = plant_.graph.M;
  for (int i = 0; i < M; ++i) agent_rng_.push_back(rng.fork("agent" + std::to_string(i)));
  if (variant_ == CoopVariant::Plain || variant_ == CoopVariant::Shares) return;

  for (int i = 0; i < M; ++i) {
    Rng kr = rng.fork("agent-key" + std::to_string(i));
    keys_.push_back(paillier_keygen(bits_per_prime, kr));
    FixedPointCode ci = code_;
    ci.phi = keys_.back().pub.P;
    ci.validate();
    codes_.push_back(ci);
  }
  for (const auto& [ij, blk] : gain_.K) Kq_[ij] = quantize_matrix(blk, code_);
  for (int i = 0; i < M; ++i) {
    const auto nb = plant_.graph.neighbors(i);
    double cols = plant_.n[static_cast<std::size_t>(i)];
    for (int j : nb) cols += plant_.n[static_cast<std::size_t>(j)];
    if (max_scale(codes_[static_cast<std::size_t>(i)], cols * code_.range() * code_.range()) < 2) {
      throw Error(ErrorCode::PrecisionOverflow, "agent " + std::to_string(i) + " lacks scale-2 headroom");
    }
    if (variant_ == CoopVariant::Masked && nb.size() < 2) degenerate_.push_back(i);
  }
}

std::string CoopController::scheme() const {
  switch (variant_) {
    case CoopVariant::Plain: return "coop-plain";
    case CoopVariant::Shares: return "coop-shares";
    case CoopVariant::Encrypted: return "coop-encrypted";
    case CoopVariant::Masked: return "coop-masked";
  }
  return "coop";
}

double CoopController::x_range() const {
  return encrypted() ? code_.range() : 1e300;
}

bool CoopController::encrypted() const {
  return variant_ == CoopVariant::Encrypted || variant_ == CoopVariant::Masked;
}

void CoopController::setup(Network& net) {
  if (!encrypted()) return;
  enc_K_.clear();
  {
    auto ops = net.acting_as(trusted_entity());
    for (const auto& [ij, Kq] : Kq_) {
      const auto [i, j] = ij;
      if (i == j) continue;
      const auto& pk = keys_[static_cast<std::size_t>(i)].pub;
      std::vector<Ciphertext> flat;
      for (const auto& row : Kq) {
        for (const auto& k : row) flat.push_back(enc_signed(k, pk, te_rng_, 1));
      }
      net.send(trusted_entity(), agent(j), "coop/gain", pack_cts(flat, pk));
    }
  }
  for (const auto& [ij, Kq] : Kq_) {
    const auto [i, j] = ij;
    if (i == j) continue;
    const auto& pk = keys_[static_cast<std::size_t>(i)].pub;
    const auto flat = unpack_cts(net.receive(agent(j), trusted_entity(), "coop/gain").payload, pk);
    auto& rows = enc_K_[ij];
    const std::size_t cols = Kq.front().size();
    for (std::size_t r = 0; r < Kq.size(); ++r) {
      rows.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(r * cols),
                        flat.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
    }
  }
}

Vec CoopController::step(Network& net, const Vec& x) {
  const auto xs = split_agents(x, plant_.n);
  switch (variant_) {
    case CoopVariant::Plain: return stack_agents(step_plain(net, xs, false));
    case CoopVariant::Shares: return stack_agents(step_plain(net, xs, true));
    case CoopVariant::Encrypted: return stack_agents(step_encrypted(net, xs, false));
    case CoopVariant::Masked: return stack_agents(step_encrypted(net, xs, true));
  }
  return {};
}

std::vector<Vec> CoopController::step_plain(Network& net, const std::vector<Vec>& xs, bool shares) {
  const auto& g = plant_.graph;
  const std::string label = shares ? "coop/share" : "coop/x";
  for (int j = 0; j < g.M; ++j) {
    for (int i : g.neighbors(j)) {
      if (shares) {
        const Mat* Kij = gain_.block(i, j);
        const Vec v = Kij ? Vec(*Kij * xs[static_cast<std::size_t>(j)])
                          : Vec(Vec::Zero(plant_.m[static_cast<std::size_t>(i)]));
        net.send(agent(j), agent(i), label, pack_vec(v));
      } else {
        net.send(agent(j), agent(i), label, pack_vec(xs[static_cast<std::size_t>(j)]));
      }
    }
  }
  std::vector<Vec> u;
  for (int i = 0; i < g.M; ++i) {
    const int mi = plant_.m[static_cast<std::size_t>(i)];
    Vec ui = Vec::Zero(mi);
    if (const Mat* Kii = gain_.block(i, i)) ui = *Kii * xs[static_cast<std::size_t>(i)];
    for (int j : g.neighbors(i)) {
      const Bytes& payload = net.receive(agent(i), agent(j), label).payload;
      if (shares) {
        ui += unpack_vec(payload, mi);
      } else {
        const Vec xj = unpack_vec(payload, plant_.n[static_cast<std::size_t>(j)]);
        if (const Mat* Kij = gain_.block(i, j)) {
          const Vec v = *Kij * xj;
          ui += v;
        } else {
          ui += Vec::Zero(mi);
        }
      }
    }
    u.push_back(ui);
  }
  return u;
}

std::map<std::pair<int, int>, IntVec> CoopController::central_pads(Network& net) {
  const auto& g = plant_.graph;
  {
    auto ops = net.acting_as(trusted_entity());
    for (int i = 0; i < g.M; ++i) {
      const auto nb = g.neighbors(i);
      if (nb.size() < 2) continue;  // a single share of zero is zero
      const auto mi = static_cast<std::size_t>(plant_.m[static_cast<std::size_t>(i)]);
      const BigInt& P = keys_[static_cast<std::size_t>(i)].pub.P;
      std::vector<IntVec> per(nb.size(), IntVec(mi));
      for (std::size_t e = 0; e < mi; ++e) {
        const auto zs = shares_of_zero(static_cast<int>(nb.size()), P, te_rng_);
        for (std::size_t k = 0; k < nb.size(); ++k) per[k][e] = zs[k].residue;
      }
      for (std::size_t k = 0; k < nb.size(); ++k) {
        net.send(trusted_entity(), agent(nb[k]), "coopmask/pad", pack_residues(per[k], P));
      }
    }
  }
  std::map<std::pair<int, int>, IntVec> pads;
  for (int i = 0; i < g.M; ++i) {
    const auto nb = g.neighbors(i);
    for (int j : nb) {
      if (nb.size() < 2) {
        pads[{i, j}] = IntVec(static_cast<std::size_t>(plant_.m[static_cast<std::size_t>(i)]), BigInt(0));
        continue;
      }
      pads[{i, j}] = unpack_residues(
          net.receive(agent(j), trusted_entity(), "coopmask/pad").payload,
          keys_[static_cast<std::size_t>(i)].pub.P);
    }
  }
  return pads;
}

std::map<std::pair<int, int>, IntVec> CoopController::decentralized_pads(Network& net) {
  const auto& g = plant_.graph;
  std::map<std::pair<int, int>, IntVec> pads;
  for (int i = 0; i < g.M; ++i) {
    const auto nb = g.neighbors(i);
    const auto mi = static_cast<std::size_t>(plant_.m[static_cast<std::size_t>(i)]);
    for (int j : nb) pads[{i, j}] = IntVec(mi, BigInt(0));
  }
  for (int i = 0; i < g.M; ++i) {
    const auto nb = g.neighbors(i);
    const auto mi = static_cast<std::size_t>(plant_.m[static_cast<std::size_t>(i)]);
    const BigInt& P = keys_[static_cast<std::size_t>(i)].pub.P;
    // round 1: j -> i carries Enc_{j'}(s); round 2: i forwards to j'
    for (std::size_t a = 0; a < nb.size(); ++a) {
      for (std::size_t b = a + 1; b < nb.size(); ++b) {
        const int j = nb[a], jp = nb[b];
        const auto& kp = keys_[static_cast<std::size_t>(jp)];
        const std::size_t limb_bits = bit_length(kp.pub.P) - 2;
        const std::size_t limbs = (bit_length(P) + limb_bits - 1) / limb_bits;
        {
          auto ops = net.acting_as(agent(j));
          std::vector<Ciphertext> flat;
          for (std::size_t e = 0; e < mi; ++e) {
            const BigInt s = rand_below(P, agent_rng_[static_cast<std::size_t>(j)]);
            auto& rj = pads[{i, j}][e];
            rj = mod_floor(rj + s, P);
            const auto cs = enc_limbs(s, limb_bits, limbs, kp.pub, agent_rng_[static_cast<std::size_t>(j)]);
            flat.insert(flat.end(), cs.begin(), cs.end());
          }
          net.send(agent(j), agent(i), "cooppad/relay", pack_cts(flat, kp.pub));
        }
        net.send(agent(i), agent(jp), "cooppad/relay",
                 net.receive(agent(i), agent(j), "cooppad/relay").payload);
        {
          auto ops = net.acting_as(agent(jp));
          const auto flat = unpack_cts(net.receive(agent(jp), agent(i), "cooppad/relay").payload, kp.pub);
          if (flat.size() != mi * limbs) throw Error(ErrorCode::ProtocolAbort, "pad relay size");
          for (std::size_t e = 0; e < mi; ++e) {
            const std::vector<Ciphertext> part(flat.begin() + static_cast<std::ptrdiff_t>(e * limbs),
                                               flat.begin() + static_cast<std::ptrdiff_t>((e + 1) * limbs));
            const BigInt s = dec_limbs(part, limb_bits, kp);
            auto& rjp = pads[{i, jp}][e];
            rjp = mod_floor(rjp - s, P);
          }
        }
      }
    }
  }
  return pads;
}

std::vector<Vec> CoopController::step_encrypted(Network& net, const std::vector<Vec>& xs, bool masked) {
  if (enc_K_.empty() && !plant_.graph.edges.empty()) setup(net);
  const auto& g = plant_.graph;
  std::vector<IntVec> xq;
  for (const auto& xj : xs) xq.push_back(quantize_vector(xj, code_));

  std::map<std::pair<int, int>, IntVec> pads;
  if (masked) {
    pads = source_ == ZeroShareSource::Central ? central_pads(net) : decentralized_pads(net);
    // global view, used only to report mask soundness
    bool ok = true;
    for (int i = 0; i < g.M; ++i) {
      const BigInt& P = keys_[static_cast<std::size_t>(i)].pub.P;
      for (std::size_t e = 0; e < static_cast<std::size_t>(plant_.m[static_cast<std::size_t>(i)]); ++e) {
        BigInt sum = 0;
        for (int j : g.neighbors(i)) sum += pads[{i, j}][e];
        if (mod_floor(sum, P) != 0) ok = false;
      }
    }
    if (!ok) ++mask_failures_;
  }
  const std::string label = masked ? "coopmask/share" : "coop/share";

  // dissemination
  for (int j = 0; j < g.M; ++j) {
    auto ops = net.acting_as(agent(j));
    for (int i : g.neighbors(j)) {
      const auto& pk = keys_[static_cast<std::size_t>(i)].pub;
      const auto mi = static_cast<std::size_t>(plant_.m[static_cast<std::size_t>(i)]);
      std::vector<Ciphertext> v;
      const auto it = enc_K_.find({i, j});
      for (std::size_t r = 0; r < mi; ++r) {
        Ciphertext acc;
        if (it == enc_K_.end()) {
          acc = enc(0, pk, agent_rng_[static_cast<std::size_t>(j)], 2);
        } else {
          const auto& row = it->second[r];
          acc = mul_const(row[0], xq[static_cast<std::size_t>(j)][0], pk, 1);
          for (std::size_t c = 1; c < row.size(); ++c) {
            acc = add(acc, mul_const(row[c], xq[static_cast<std::size_t>(j)][c], pk, 1), pk);
          }
        }
        if (masked) {
          acc = add(acc, enc(pads[{i, j}][r], pk, agent_rng_[static_cast<std::size_t>(j)], 2), pk);
        } else if (it != enc_K_.end()) {
          // mul_const alone is deterministic in x_j (and equals 1 when x_j = 0)
          acc = rerandomize(acc, pk, agent_rng_[static_cast<std::size_t>(j)]);
        }
        v.push_back(std::move(acc));
      }
      net.send(agent(j), agent(i), label, pack_cts(v, pk));
    }
  }

  // assimilation
  std::vector<Vec> u;
  for (int i = 0; i < g.M; ++i) {
    auto ops = net.acting_as(agent(i));
    const auto& key = keys_[static_cast<std::size_t>(i)];
    const auto nb = g.neighbors(i);
    const auto mi = static_cast<std::size_t>(plant_.m[static_cast<std::size_t>(i)]);
    IntVec ui(mi, BigInt(0));
    if (const auto it = Kq_.find({i, i}); it != Kq_.end()) ui = int_matvec(it->second, xq[static_cast<std::size_t>(i)]);
    IntVec w(mi, BigInt(0));
    for (int j : nb) {
      const auto v = unpack_cts(net.receive(agent(i), agent(j), label).payload, key.pub);
      if (v.size() != mi) throw Error(ErrorCode::ProtocolAbort, "share vector length");
      for (std::size_t r = 0; r < mi; ++r) {
        if (v[r].scale != 2) throw Error(ErrorCode::ScaleMismatch, "share must carry scale 2");
        if (masked) {
          const BigInt res = dec(v[r], key);
          if (observer_ && nb.size() >= 2) observer_(i, res, key.pub.P);
          w[r] += res;
        } else {
          w[r] += dec_signed(v[r], key);
        }
      }
    }
    for (std::size_t r = 0; r < mi; ++r) {
      ui[r] += masked ? centered(mod_floor(w[r], key.pub.P), key.pub.P) : w[r];
    }
    u.push_back(to_real(ui, 2, codes_[static_cast<std::size_t>(i)]));
  }
  return u;
}

Vec CoopController::oracle(const Vec& x) const {
  const auto xs = split_agents(x, plant_.n);
  if (!encrypted()) return stack_agents(plain_coop_step(plant_.graph, gain_, xs));
  std::vector<IntVec> xq;
  for (const auto& xj : xs) xq.push_back(quantize_vector(xj, code_));
  std::vector<Vec> u;
  for (int i = 0; i < plant_.graph.M; ++i) {
    IntVec ui(static_cast<std::size_t>(plant_.m[static_cast<std::size_t>(i)]), BigInt(0));
    for (int j = 0; j < plant_.graph.M; ++j) {
      const auto it = Kq_.find({i, j});
      if (it == Kq_.end()) continue;
      const IntVec v = int_matvec(it->second, xq[static_cast<std::size_t>(j)]);
      for (std::size_t r = 0; r < ui.size(); ++r) ui[r] += v[r];
    }
    u.push_back(to_real(ui, 2, code_));
  }
  return stack_agents(u);
}

std::vector<Secret> CoopController::secrets(const Vec& x, const Vec& u) const {
  const auto xs = split_agents(x, plant_.n);
  const auto us = split_agents(u, plant_.m);
  std::vector<Secret> out;
  const int M = plant_.graph.M;
  auto others = [&](int i) {
    std::set<PartyId> s;
    for (int k = 0; k < M; ++k) {
      if (k != i) s.insert(agent(k));
    }
    return s;
  };
  auto add = [&](const std::string& name, const Vec& v, int owner) {
    if (encrypted()) {
      for (int k = 0; k < M; ++k) {
        const auto& ck = codes_[static_cast<std::size_t>(k)];
        auto s = value_secrets(name + "@" + std::to_string(k), v, ck, keys_[static_cast<std::size_t>(k)].pub.residue_bytes(),
                               others(owner));
        out.insert(out.end(), s.begin(), s.end());
      }
    } else {
      const FixedPointCode wide{10, 300, 0, BigInt(1) << 1100};
      auto s = value_secrets(name, v, wide, 0, others(owner));
      out.insert(out.end(), s.begin(), s.end());
    }
  };
  for (int i = 0; i < M; ++i) {
    add("x" + std::to_string(i), xs[static_cast<std::size_t>(i)], i);
    add("u" + std::to_string(i), us[static_cast<std::size_t>(i)], i);
  }
  return out;
}

std::vector<std::pair<PartyId, PartyId>> CoopController::forbidden_pairs() const {
  std::vector<std::pair<PartyId, PartyId>> out;
  for (int i = 0; i < plant_.graph.M; ++i) {
    for (int j = i + 1; j < plant_.graph.M; ++j) {
      if (!plant_.graph.adjacent(i, j)) out.emplace_back(agent(i), agent(j));
    }
  }
  return out;
}

}  // namespace encctl
