#pragma once

#include "encctl/common.hpp"

namespace encctl {

// Quantization parameters: basis beta, magnitude gamma, resolution delta,
// and the message-space size phi.
struct FixedPointCode {
  int beta = 10;
  int gamma = 1;
  int delta = 1;
  BigInt phi = 1000;

  // Throws PrecisionOverflow unless phi > 2 * beta^(gamma + delta).
  static FixedPointCode make(int beta, int gamma, int delta, BigInt phi);
  void validate() const;

  double range() const;       // beta^gamma
  double resolution() const;  // beta^-delta
  BigInt scale_factor(int scale) const;  // beta^(scale * delta)
  // Largest admissible integer after scaling, beta^(gamma + delta).
  BigInt int_range() const;
};

// Residue with the number of delta-scalings it carries.
struct Encoded {
  BigInt residue;
  int scale = 1;
};

// g(x): round half away from zero onto the grid beta^-delta * Z, restricted
// to [-beta^gamma, beta^gamma - beta^-delta]. OutOfRange when |x| > beta^gamma.
double quantize(double x, const FixedPointCode& code);

// beta^delta * g(x) as an exact signed integer.
BigInt quantize_int(double x, const FixedPointCode& code);

Encoded encode(double x, const FixedPointCode& code);
double decode(const Encoded& e, const FixedPointCode& code);

// Signed representative in (-m/2, m/2].
BigInt centered(const BigInt& residue, const BigInt& modulus);

// Exact rational value v / beta^(scale * delta) rounded to double.
double to_real(const BigInt& v, int scale, const FixedPointCode& code);

// Largest s with 2 * bound * beta^(s * delta) < phi, or -1 if none.
int max_scale(const FixedPointCode& code, double magnitude_bound);

// Re-expresses an integer at `from` scale as one at `to` scale (to >= from).
BigInt lift_scale(const BigInt& v, int from, int to, const FixedPointCode& code);

}  // namespace encctl
