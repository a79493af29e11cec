#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "encctl/common.hpp"

namespace encctl {

// Seeded deterministic generator. Not a cryptographic RNG: every party in the
// simulator draws from an Rng so that whole runs replay bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  // Child stream whose seed depends only on (seed, tag); used to hand each
  // party its own reproducible stream.
  Rng fork(std::string_view tag) const;

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Element of Z_m; the constructor reduces into [0, m).
struct Residue {
  BigInt value;
  BigInt modulus;

  Residue(BigInt v, BigInt m);
};

Residue mod_pow(const Residue& base, const BigInt& exp);
BigInt mod_pow(const BigInt& base, const BigInt& exp, const BigInt& modulus);

// Inverse of a modulo m in [0, m); throws NotInvertible when gcd(a, m) != 1.
BigInt mod_inv(const BigInt& a, const BigInt& modulus);

// Non-negative remainder for any sign of a.
BigInt mod_floor(const BigInt& a, const BigInt& modulus);

std::size_t bit_length(const BigInt& v);

// Uniform integer with exactly `bits` random bits, i.e. in [0, 2^bits).
BigInt rand_bits(std::size_t bits, Rng& rng);

// Uniform in [0, bound) by rejection sampling on bit_length(bound - 1) bits.
BigInt rand_below(const BigInt& bound, Rng& rng);

// Uniform element of Z_m^* (resamples until coprime to m).
BigInt rand_unit(const BigInt& modulus, Rng& rng);

inline constexpr int kMillerRabinRounds = 40;

bool is_probable_prime(const BigInt& n, Rng& rng, int rounds = kMillerRabinRounds);

// Probable prime in [2^(bits-1), 2^bits).
BigInt gen_prime(std::size_t bits, Rng& rng);

// Safe prime p = 2q + 1 with q prime, p in [2^(bits-1), 2^bits).
BigInt gen_safe_prime(std::size_t bits, Rng& rng);

// Big-endian encoding padded to `width` bytes; throws OutOfRange if v does
// not fit or is negative.
std::vector<std::uint8_t> to_bytes(const BigInt& v, std::size_t width);
BigInt from_bytes(std::span<const std::uint8_t> bytes);

// 64-bit fingerprint of a public modulus, used as the key id on ciphertexts.
std::uint64_t fingerprint(const BigInt& v);

}  // namespace encctl
