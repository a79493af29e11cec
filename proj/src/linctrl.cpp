#include "encctl/linctrl.hpp"

#include <cmath>

#include "encctl/modmath.hpp"

namespace encctl {

void LinearPlant::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "A must be square and non-empty");
  }
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "B must have as many rows as A");
  }
  if (x0.size() != A.rows()) throw Error(ErrorCode::DimensionMismatch, "x0 has wrong length");
  if (noise < 0) throw Error(ErrorCode::OutOfRange, "noise bound must be >= 0");
}

bool Trace::exact_match() const {
  for (const auto& r : rows) {
    if (r.u_enc.size() != r.u_oracle.size()) return false;
    for (Eigen::Index i = 0; i < r.u_enc.size(); ++i) {
      if (r.u_enc(i) != r.u_oracle(i)) return false;
    }
  }
  return true;
}

Vec plain_linear_step(const Mat& K, const Vec& x) {
  if (K.cols() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "K has " + std::to_string(K.cols()) +
                                                  " columns, x has " + std::to_string(x.size()));
  }
  return K * x;
}

IntMat quantize_matrix(const Mat& K, const FixedPointCode& code) {
  IntMat out(static_cast<std::size_t>(K.rows()));
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(quantize_int(K(i, j), code));
  }
  return out;
}

IntVec quantize_vector(const Vec& x, const FixedPointCode& code) {
  IntVec out;
  out.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index j = 0; j < x.size(); ++j) out.push_back(quantize_int(x(j), code));
  return out;
}

IntVec int_matvec(const IntMat& K, const IntVec& x) {
  IntVec out;
  out.reserve(K.size());
  for (const auto& row : K) {
    if (row.size() != x.size()) throw Error(ErrorCode::DimensionMismatch, "int_matvec");
    BigInt acc = 0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += row[j] * x[j];
    out.push_back(acc);
  }
  return out;
}

Vec to_real(const IntVec& v, int scale, const FixedPointCode& code) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = to_real(v[i], scale, code);
  return out;
}

std::vector<Secret> value_secrets(const std::string& name, const Vec& values,
                                  const FixedPointCode& code, std::size_t residue_width,
                                  const std::set<PartyId>& forbidden) {
  std::vector<Secret> out;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    Secret s;
    s.name = name + "[" + std::to_string(j) + "]";
    s.forbidden = forbidden;
    s.encodings.push_back(f64_bytes(values(j)));
    if (std::fabs(values(j)) <= code.range()) {
      const BigInt r = mod_floor(quantize_int(values(j), code), code.phi);
      if (bit_length(r) <= 8 * residue_width) s.encodings.push_back(to_bytes(r, residue_width));
    }
    out.push_back(std::move(s));
  }
  return out;
}

Trace closed_loop(const LinearPlant& plant, Controller& ctrl, int steps, Network& net,
                  Rng& noise_rng) {
  plant.validate();
  if (ctrl.n() != plant.n() || ctrl.m() != plant.m()) {
    throw Error(ErrorCode::DimensionMismatch, "controller and plant dimensions differ");
  }
  Trace trace;
  trace.n = plant.n();
  trace.m = plant.m();
  trace.rows.reserve(static_cast<std::size_t>(steps));
  Vec x = plant.x0;
  for (int k = 0; k < steps; ++k) {
    net.set_step(static_cast<std::uint64_t>(k));
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      if (!(std::fabs(x(j)) <= ctrl.x_range())) {
        throw Error(ErrorCode::RangeViolation, "x[" + std::to_string(j) + "] = " +
                                                   std::to_string(x(j)) + " at step " +
                                                   std::to_string(k));
      }
    }
    const OpCount ops_before = net.ledger().total_ops();
    const std::uint64_t msgs_before = net.ledger().total_messages();
    const std::uint64_t bytes_before = net.ledger().total_bytes();

    TraceRow row;
    row.step = k;
    row.x = x;
    row.u_oracle = ctrl.oracle(x);  // before step(): stateful laws read the pre-step state
    row.u_enc = ctrl.step(net, x);
    row.ops = net.ledger().total_ops() - ops_before;
    row.messages = net.ledger().total_messages() - msgs_before;
    row.bytes = net.ledger().total_bytes() - bytes_before;

    x = plant.A * x + plant.B * row.u_enc;
    if (plant.noise > 0) {
      for (Eigen::Index j = 0; j < x.size(); ++j) x(j) += noise_rng.uniform(-plant.noise, plant.noise);
    }
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

OpCount predicted_ops_elgamal(int n, int m) {
  OpCount c;
  c.enc = static_cast<std::uint64_t>(n);
  c.hom_mul = static_cast<std::uint64_t>(m * n);
  c.dec = static_cast<std::uint64_t>(m * n);
  return c;
}

OpCount predicted_ops_paillier(int n, int m) {
  OpCount c;
  c.enc = static_cast<std::uint64_t>(n);
  c.hom_mul_const = static_cast<std::uint64_t>(m * n);
  c.hom_add = static_cast<std::uint64_t>(m * (n - 1));
  c.dec = static_cast<std::uint64_t>(m);
  return c;
}

Bytes pack_residues(const IntVec& v, const BigInt& phi) {
  const std::size_t w = (bit_length(phi) + 7) / 8;
  Bytes out;
  out.reserve(v.size() * w);
  for (const auto& x : v) {
    const Bytes b = to_bytes(mod_floor(x, phi), w);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

IntVec unpack_residues(const Bytes& b, const BigInt& phi) {
  const std::size_t w = (bit_length(phi) + 7) / 8;
  if (w == 0 || b.size() % w != 0) throw Error(ErrorCode::ProtocolAbort, "bad residue vector");
  IntVec out;
  for (std::size_t off = 0; off < b.size(); off += w) {
    BigInt v = from_bytes(std::span<const std::uint8_t>(b).subspan(off, w));
    if (v >= phi) throw Error(ErrorCode::ProtocolAbort, "residue out of range");
    out.push_back(std::move(v));
  }
  return out;
}

// ---------------------------------------------------------------- plain

PlainLinear::PlainLinear(Mat K) : K_(std::move(K)) {}

Vec PlainLinear::step(Network& net, const Vec& x) {
  Writer w;
  for (Eigen::Index j = 0; j < x.size(); ++j) w.f64(x(j));
  net.send(sensor(), cloud(1), "plain/x", w.take());

  const Envelope ex = net.receive(cloud(1), sensor(), "plain/x");
  Reader rx(ex.payload);
  Vec xc(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) xc(j) = rx.f64();
  const Vec u = plain_linear_step(K_, xc);
  Writer wu;
  for (Eigen::Index i = 0; i < u.size(); ++i) wu.f64(u(i));
  net.send(cloud(1), actuator(), "plain/u", wu.take());

  const Envelope eu = net.receive(actuator(), cloud(1), "plain/u");
  Reader ru(eu.payload);
  Vec out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out(i) = ru.f64();
  return out;
}

Vec PlainLinear::oracle(const Vec& x) const { return plain_linear_step(K_, x); }

std::vector<Secret> PlainLinear::secrets(const Vec& x, const Vec& u) const {
  const FixedPointCode wide{10, 300, 0, BigInt(1) << 1100};
  auto s = value_secrets("x", x, wide, 0, {cloud(1)});
  auto su = value_secrets("u", u, wide, 0, {cloud(1)});
  s.insert(s.end(), su.begin(), su.end());
  return s;
}

// ---------------------------------------------------------------- ElGamal

ElGamalLinear::ElGamalLinear(Mat K, FixedPointCode code, std::size_t key_bits, Rng rng)
    : K_(std::move(K)),
      code_(std::move(code)),
      Kq_(quantize_matrix(K_, code_)),
      key_(),
      sensor_rng_(rng.fork("sensor")),
      setup_rng_(rng.fork("setup")) {
  // |K_ij x_j| <= V^2 must sit strictly inside (-W/2, W/2)
  const BigInt V = code_.int_range();
  offset_ = 1;
  while (offset_ <= 2 * V * V) offset_ <<= 1;
  const BigInt top = (offset_ + V) * (offset_ + V);
  if (bit_length(top) >= key_bits) {
    throw Error(ErrorCode::PrecisionOverflow,
                "ElGamal modulus needs more than " + std::to_string(bit_length(top)) + " bits");
  }
  Rng key_rng = rng.fork("actuator-key");
  key_ = eg_keygen(key_bits, key_rng);
}

void ElGamalLinear::setup(Network& net) {
  auto ops = net.acting_as(trusted_entity());
  enc_K_.assign(Kq_.size(), {});
  Bytes payload;
  for (std::size_t i = 0; i < Kq_.size(); ++i) {
    for (const auto& kij : Kq_[i]) {
      const ElGamalCiphertext c = eg_enc(kij + offset_, key_.pub, setup_rng_, 1);
      const Bytes b = serialize(c, key_.pub);
      payload.insert(payload.end(), b.begin(), b.end());
    }
  }
  net.send(trusted_entity(), cloud(1), "elgamal/gain", std::move(payload));
  const Envelope env = net.receive(cloud(1), trusted_entity(), "elgamal/gain");
  const std::size_t w = 10 + 2 * key_.pub.element_bytes();
  std::size_t off = 0;
  for (std::size_t i = 0; i < Kq_.size(); ++i) {
    for (std::size_t j = 0; j < Kq_[i].size(); ++j, off += w) {
      enc_K_[i].push_back(deserialize_eg(std::span<const std::uint8_t>(env.payload).subspan(off, w), key_.pub));
    }
  }
}

Vec ElGamalLinear::step(Network& net, const Vec& x) {
  if (enc_K_.empty()) setup(net);
  const auto& pk = key_.pub;
  const std::size_t n = static_cast<std::size_t>(K_.cols());
  const std::size_t m = static_cast<std::size_t>(K_.rows());
  {
    auto ops = net.acting_as(sensor());
    const IntVec xq = quantize_vector(x, code_);
    for (std::size_t j = 0; j < n; ++j) {
      net.send(sensor(), cloud(1), "elgamal/x", serialize(eg_enc(xq[j] + offset_, pk, sensor_rng_), pk));
    }
  }
  {
    auto ops = net.acting_as(cloud(1));
    std::vector<ElGamalCiphertext> xc;
    for (std::size_t j = 0; j < n; ++j) {
      xc.push_back(deserialize_eg(net.receive(cloud(1), sensor(), "elgamal/x").payload, pk));
    }
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        net.send(cloud(1), actuator(), "elgamal/phi", serialize(eg_mul(enc_K_[i][j], xc[j], pk), pk));
      }
    }
  }
  auto ops = net.acting_as(actuator());
  IntVec u(m, BigInt(0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const BigInt phi = eg_dec(deserialize_eg(net.receive(actuator(), cloud(1), "elgamal/phi").payload, pk), key_);
      u[i] += centered(phi, offset_);
    }
  }
  return to_real(u, 2, code_);
}

Vec ElGamalLinear::oracle(const Vec& x) const {
  return to_real(int_matvec(Kq_, quantize_vector(x, code_)), 2, code_);
}

std::vector<Secret> ElGamalLinear::secrets(const Vec& x, const Vec& u) const {
  const std::size_t w = key_.pub.element_bytes();
  FixedPointCode at_p = code_;
  at_p.phi = key_.pub.p;
  auto s = value_secrets("x", x, at_p, w, {cloud(1)});
  auto su = value_secrets("u", u, at_p, w, {cloud(1)});
  s.insert(s.end(), su.begin(), su.end());
  for (std::size_t i = 0; i < Kq_.size(); ++i) {
    for (std::size_t j = 0; j < Kq_[i].size(); ++j) {
      Secret k;
      k.name = "K[" + std::to_string(i) + "," + std::to_string(j) + "]";
      k.forbidden = {cloud(1)};
      k.encodings.push_back(to_bytes(Kq_[i][j] + offset_, w));
      k.encodings.push_back(f64_bytes(K_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
      s.push_back(std::move(k));
    }
  }
  return s;
}

// ---------------------------------------------------------------- Paillier

PaillierLinear::PaillierLinear(Mat K, FixedPointCode code, std::size_t bits_per_prime, Rng rng)
    : K_(std::move(K)), sensor_rng_(rng.fork("sensor")) {
  Rng key_rng = rng.fork("actuator-key");
  key_ = paillier_keygen(bits_per_prime, key_rng);
  code_ = code;
  code_.phi = key_.pub.P;
  code_.validate();
  Kq_ = quantize_matrix(K_, code_);
  const double bound = static_cast<double>(K_.cols()) * code_.range() * code_.range();
  if (max_scale(code_, bound) < 2) {
    throw Error(ErrorCode::PrecisionOverflow, "scale-2 products do not fit the Paillier modulus");
  }
}

Vec PaillierLinear::step(Network& net, const Vec& x) {
  const auto& pk = key_.pub;
  const std::size_t n = static_cast<std::size_t>(K_.cols());
  const std::size_t m = static_cast<std::size_t>(K_.rows());
  {
    auto ops = net.acting_as(sensor());
    const IntVec xq = quantize_vector(x, code_);
    for (std::size_t j = 0; j < n; ++j) {
      net.send(sensor(), cloud(1), "paillier/x", serialize(enc_signed(xq[j], pk, sensor_rng_, 1), pk));
    }
  }
  {
    auto ops = net.acting_as(cloud(1));
    std::vector<Ciphertext> xc;
    for (std::size_t j = 0; j < n; ++j) {
      xc.push_back(deserialize_ciphertext(net.receive(cloud(1), sensor(), "paillier/x").payload, pk));
    }
    for (std::size_t i = 0; i < m; ++i) {
      Ciphertext acc = mul_const(xc[0], Kq_[i][0], pk, 1);
      for (std::size_t j = 1; j < n; ++j) acc = add(acc, mul_const(xc[j], Kq_[i][j], pk, 1), pk);
      net.send(cloud(1), actuator(), "paillier/u", serialize(acc, pk));
    }
  }
  auto ops = net.acting_as(actuator());
  IntVec u;
  for (std::size_t i = 0; i < m; ++i) {
    const Ciphertext c = deserialize_ciphertext(net.receive(actuator(), cloud(1), "paillier/u").payload, pk);
    u.push_back(dec_signed(c, key_));
  }
  return to_real(u, 2, code_);
}

Vec PaillierLinear::oracle(const Vec& x) const {
  return to_real(int_matvec(Kq_, quantize_vector(x, code_)), 2, code_);
}

std::vector<Secret> PaillierLinear::secrets(const Vec& x, const Vec& u) const {
  auto s = value_secrets("x", x, code_, key_.pub.residue_bytes(), {cloud(1)});
  auto su = value_secrets("u", u, code_, key_.pub.residue_bytes(), {cloud(1)});
  s.insert(s.end(), su.begin(), su.end());
  return s;
}

// ---------------------------------------------------------------- two clouds

TwoCloudLinear::TwoCloudLinear(Mat K, FixedPointCode code, Rng rng)
    : K_(std::move(K)), code_(std::move(code)), sensor_rng_(rng.fork("sensor")) {
  code_.validate();
  Kq_ = quantize_matrix(K_, code_);
  const double bound = static_cast<double>(K_.cols()) * code_.range() * code_.range();
  if (max_scale(code_, bound) < 2) {
    throw Error(ErrorCode::PrecisionOverflow, "scale-2 products do not fit phi");
  }
}

Vec TwoCloudLinear::step(Network& net, const Vec& x) {
  const BigInt& phi = code_.phi;
  const std::size_t n = static_cast<std::size_t>(K_.cols());
  {
    const IntVec xq = quantize_vector(x, code_);
    IntVec x1, x2;
    for (std::size_t j = 0; j < n; ++j) {
      const BigInt r = rand_below(phi, sensor_rng_);  // fresh pad every step
      x1.push_back(mod_floor(xq[j] + r, phi));
      x2.push_back(r);
    }
    net.send(sensor(), cloud(1), "twocloud/x", pack_residues(x1, phi));
    net.send(sensor(), cloud(2), "twocloud/x", pack_residues(x2, phi));
  }
  for (int c : {1, 2}) {
    const IntVec share = unpack_residues(net.receive(cloud(c), sensor(), "twocloud/x").payload, phi);
    IntVec v = int_matvec(Kq_, share);
    for (auto& vi : v) vi = mod_floor(vi, phi);
    net.send(cloud(c), actuator(), "twocloud/v", pack_residues(v, phi));
  }
  const IntVec v1 = unpack_residues(net.receive(actuator(), cloud(1), "twocloud/v").payload, phi);
  const IntVec v2 = unpack_residues(net.receive(actuator(), cloud(2), "twocloud/v").payload, phi);
  IntVec u;
  for (std::size_t i = 0; i < v1.size(); ++i) u.push_back(centered(v1[i] - v2[i], phi));
  return to_real(u, 2, code_);
}

Vec TwoCloudLinear::oracle(const Vec& x) const {
  return to_real(int_matvec(Kq_, quantize_vector(x, code_)), 2, code_);
}

std::vector<Secret> TwoCloudLinear::secrets(const Vec& x, const Vec& u) const {
  const std::size_t w = (bit_length(code_.phi) + 7) / 8;
  auto s = value_secrets("x", x, code_, w, {cloud(1), cloud(2)});
  auto su = value_secrets("u", u, code_, w, {cloud(1), cloud(2)});
  s.insert(s.end(), su.begin(), su.end());
  return s;
}

}  // namespace encctl
