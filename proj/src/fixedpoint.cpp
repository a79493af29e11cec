#include "encctl/fixedpoint.hpp"

#include <cmath>

#include "encctl/modmath.hpp"

namespace encctl {

namespace {

BigInt ipow(int base, long exp) {
  BigInt r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(exp));
  return r;
}

}  // namespace

FixedPointCode FixedPointCode::make(int beta, int gamma, int delta, BigInt phi) {
  FixedPointCode c{beta, gamma, delta, std::move(phi)};
  c.validate();
  return c;
}

void FixedPointCode::validate() const {
  if (beta < 2 || gamma < 1 || delta < 0) {
    throw Error(ErrorCode::OutOfRange, "invalid fixed-point parameters");
  }
  if (phi <= 2 * int_range()) {
    throw Error(ErrorCode::PrecisionOverflow,
                "phi must exceed 2*beta^(gamma+delta) = " + BigInt(2 * int_range()).get_str());
  }
}

double FixedPointCode::range() const { return std::pow(static_cast<double>(beta), gamma); }

double FixedPointCode::resolution() const {
  return std::pow(static_cast<double>(beta), -delta);
}

BigInt FixedPointCode::scale_factor(int scale) const {
  return ipow(beta, static_cast<long>(scale) * delta);
}

BigInt FixedPointCode::int_range() const { return ipow(beta, gamma + delta); }

BigInt quantize_int(double x, const FixedPointCode& code) {
  if (!std::isfinite(x) || std::fabs(x) > code.range()) {
    throw Error(ErrorCode::OutOfRange, "|x| = " + std::to_string(std::fabs(x)) +
                                           " exceeds beta^gamma = " +
                                           std::to_string(code.range()));
  }
  // Exact rational x * beta^delta, then round half away from zero.
  mpq_class scaled(x);
  scaled *= mpq_class(code.scale_factor(1));
  BigInt num = scaled.get_num();
  BigInt den = scaled.get_den();
  BigInt twice = 2 * abs(num) + den;
  BigInt q;
  mpz_fdiv_q(q.get_mpz_t(), twice.get_mpz_t(), BigInt(2 * den).get_mpz_t());
  if (num < 0) q = -q;
  const BigInt top = code.int_range();
  if (q >= top) q = top - 1;
  return q;
}

double quantize(double x, const FixedPointCode& code) {
  return to_real(quantize_int(x, code), 1, code);
}

Encoded encode(double x, const FixedPointCode& code) {
  return Encoded{mod_floor(quantize_int(x, code), code.phi), 1};
}

BigInt centered(const BigInt& residue, const BigInt& modulus) {
  BigInt r = mod_floor(residue, modulus);
  if (2 * r > modulus) r -= modulus;
  return r;
}

double to_real(const BigInt& v, int scale, const FixedPointCode& code) {
  mpq_class q(v, code.scale_factor(scale));
  q.canonicalize();
  return q.get_d();
}

double decode(const Encoded& e, const FixedPointCode& code) {
  return to_real(centered(e.residue, code.phi), e.scale, code);
}

int max_scale(const FixedPointCode& code, double magnitude_bound) {
  if (!(magnitude_bound > 0)) throw Error(ErrorCode::OutOfRange, "magnitude bound must be > 0");
  const mpq_class twice_bound = 2 * mpq_class(magnitude_bound);
  const mpq_class phi(code.phi);
  if (twice_bound >= phi) return -1;
  if (code.delta == 0) return 1 << 20;  // scaling is the identity
  int s = 0;
  while (twice_bound * mpq_class(code.scale_factor(s + 1)) < phi) ++s;
  return s;
}

BigInt lift_scale(const BigInt& v, int from, int to, const FixedPointCode& code) {
  if (to < from) throw Error(ErrorCode::ScaleMismatch, "cannot lower a scale exactly");
  return v * code.scale_factor(to - from);
}

}  // namespace encctl
