#pragma once

#include <memory>
#include <string>
#include <vector>

#include "encctl/elgamal.hpp"
#include "encctl/fixedpoint.hpp"
#include "encctl/linalg.hpp"
#include "encctl/paillier.hpp"
#include "encctl/simnet.hpp"

namespace encctl {

struct LinearPlant {
  Mat A;
  Mat B;
  Vec x0;
  double noise = 0;  // optional uniform additive disturbance bound per state

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  void validate() const;
};

// A control law evaluated across simulated parties.
class Controller {
 public:
  virtual ~Controller() = default;

  virtual std::string scheme() const = 0;
  virtual int n() const = 0;
  virtual int m() const = 0;

  // One-time provisioning (key distribution, encrypted gains). Operations are
  // attributed to the trusted entity.
  virtual void setup(Network& net) { (void)net; }

  // Runs one sampling period through `net`; returns the input the actuator applies.
  virtual Vec step(Network& net, const Vec& x) = 0;

  // Plaintext evaluation with identical quantization; bit-identical to step().
  virtual Vec oracle(const Vec& x) const = 0;

  // Largest admissible |x_j| (quantizer range).
  virtual double x_range() const = 0;

  virtual bool encrypted() const { return true; }

  // Values whose byte encodings must not reach the listed parties.
  virtual std::vector<Secret> secrets(const Vec& x, const Vec& u) const {
    (void)x;
    (void)u;
    return {};
  }

  // Party pairs that must never talk directly.
  virtual std::vector<std::pair<PartyId, PartyId>> forbidden_pairs() const { return {}; }
};

struct TraceRow {
  int step = 0;
  Vec x;
  Vec u_enc;
  Vec u_oracle;
  OpCount ops;
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
};

struct Trace {
  int n = 0;
  int m = 0;
  std::vector<TraceRow> rows;

  bool exact_match() const;  // u_enc == u_oracle on every row
};

Vec plain_linear_step(const Mat& K, const Vec& x);

IntMat quantize_matrix(const Mat& K, const FixedPointCode& code);
IntVec quantize_vector(const Vec& x, const FixedPointCode& code);
IntVec int_matvec(const IntMat& K, const IntVec& x);
Vec to_real(const IntVec& v, int scale, const FixedPointCode& code);

// Residue-width and raw-double encodings of each x_j, for leakage scans.
std::vector<Secret> value_secrets(const std::string& name, const Vec& values,
                                  const FixedPointCode& code, std::size_t residue_width,
                                  const std::set<PartyId>& forbidden);

// Drives x(k+1) = A x(k) + B u(k) (+ noise) with u from the controller.
// RangeViolation when a state leaves the quantizer range.
Trace closed_loop(const LinearPlant& plant, Controller& ctrl, int steps, Network& net,
                  Rng& noise_rng);

// Per-step operation counts of the two homomorphic schemes.
OpCount predicted_ops_elgamal(int n, int m);
OpCount predicted_ops_paillier(int n, int m);

class PlainLinear final : public Controller {
 public:
  explicit PlainLinear(Mat K);
  std::string scheme() const override { return "plain"; }
  int n() const override { return static_cast<int>(K_.cols()); }
  int m() const override { return static_cast<int>(K_.rows()); }
  Vec step(Network& net, const Vec& x) override;
  Vec oracle(const Vec& x) const override;
  double x_range() const override { return 1e300; }
  bool encrypted() const override { return false; }
  std::vector<Secret> secrets(const Vec& x, const Vec& u) const override;

 private:
  Mat K_;
};

// Phi_ij = [[K_ij + W]] (x) [[x_j + W]] with W a public power-of-two offset;
// the actuator recovers K_ij x_j as the centered residue mod W.
class ElGamalLinear final : public Controller {
 public:
  ElGamalLinear(Mat K, FixedPointCode code, std::size_t key_bits, Rng rng);
  std::string scheme() const override { return "elgamal-linear"; }
  int n() const override { return static_cast<int>(K_.cols()); }
  int m() const override { return static_cast<int>(K_.rows()); }
  void setup(Network& net) override;
  Vec step(Network& net, const Vec& x) override;
  Vec oracle(const Vec& x) const override;
  double x_range() const override { return code_.range(); }
  std::vector<Secret> secrets(const Vec& x, const Vec& u) const override;

  const BigInt& offset() const { return offset_; }
  const ElGamalKeypair& key() const { return key_; }

 private:
  Mat K_;
  FixedPointCode code_;
  IntMat Kq_;
  BigInt offset_;
  ElGamalKeypair key_;
  Rng sensor_rng_, setup_rng_;
  std::vector<std::vector<ElGamalCiphertext>> enc_K_;  // held by the cloud
};

class PaillierLinear final : public Controller {
 public:
  PaillierLinear(Mat K, FixedPointCode code, std::size_t bits_per_prime, Rng rng);
  std::string scheme() const override { return "paillier-linear"; }
  int n() const override { return static_cast<int>(K_.cols()); }
  int m() const override { return static_cast<int>(K_.rows()); }
  Vec step(Network& net, const Vec& x) override;
  Vec oracle(const Vec& x) const override;
  double x_range() const override { return code_.range(); }
  std::vector<Secret> secrets(const Vec& x, const Vec& u) const override;

  const PaillierKeypair& key() const { return key_; }
  const FixedPointCode& code() const { return code_; }

 private:
  Mat K_;
  FixedPointCode code_;  // phi = P
  IntMat Kq_;
  PaillierKeypair key_;
  Rng sensor_rng_;
};

// Sensor splits x into x + r and r; each cloud applies K; actuator subtracts.
class TwoCloudLinear final : public Controller {
 public:
  TwoCloudLinear(Mat K, FixedPointCode code, Rng rng);
  std::string scheme() const override { return "two-cloud-linear"; }
  int n() const override { return static_cast<int>(K_.cols()); }
  int m() const override { return static_cast<int>(K_.rows()); }
  Vec step(Network& net, const Vec& x) override;
  Vec oracle(const Vec& x) const override;
  double x_range() const override { return code_.range(); }
  std::vector<Secret> secrets(const Vec& x, const Vec& u) const override;
  std::vector<std::pair<PartyId, PartyId>> forbidden_pairs() const override {
    return {{cloud(1), cloud(2)}};
  }

 private:
  Mat K_;
  FixedPointCode code_;
  IntMat Kq_;
  Rng sensor_rng_;
};

// Writes an integer vector as fixed-width residues mod phi.
Bytes pack_residues(const IntVec& v, const BigInt& phi);
IntVec unpack_residues(const Bytes& b, const BigInt& phi);

}  // namespace encctl
