#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "encctl/common.hpp"
#include "encctl/modmath.hpp"

namespace encctl {

struct PaillierPublicKey {
  BigInt P;
  BigInt P2;  // P^2
  std::uint64_t key_id = 0;

  // Serialized width of a ciphertext value, ceil(2 * bits(P) / 8).
  std::size_t value_bytes() const;
  // Serialized width of a plaintext residue mod P.
  std::size_t residue_bytes() const;
};

struct PaillierKeypair {
  PaillierPublicKey pub;
  BigInt p, q;
  BigInt S;   // (p-1)(q-1)
  BigInt mu;  // S^-1 mod P
};

struct Ciphertext {
  BigInt value;
  std::uint64_t key_id = 0;
  int scale = 1;
};

PaillierKeypair paillier_keygen(std::size_t bits_per_prime, Rng& rng);
PaillierKeypair paillier_from_primes(const BigInt& p, const BigInt& q);

// (P+1)^z * r^P mod P^2 with r drawn from Z_{P^2}^*.
Ciphertext enc(const BigInt& z, const PaillierPublicKey& pk, Rng& rng, int scale = 1);
Ciphertext enc_with_nonce(const BigInt& z, const PaillierPublicKey& pk, const BigInt& r,
                          int scale = 1);
// Encrypts a signed integer as its residue mod P.
Ciphertext enc_signed(const BigInt& v, const PaillierPublicKey& pk, Rng& rng, int scale = 1);

BigInt dec(const Ciphertext& c, const PaillierKeypair& key);
// Centered lift of dec(c) into (-P/2, P/2].
BigInt dec_signed(const Ciphertext& c, const PaillierKeypair& key);

Ciphertext add(const Ciphertext& a, const Ciphertext& b, const PaillierPublicKey& pk);
// a - b, computed as a + (P-1) * b.
Ciphertext sub(const Ciphertext& a, const Ciphertext& b, const PaillierPublicKey& pk);
// c^k mod P^2 with k reduced into [0, P); k_scale is added to the scale.
Ciphertext mul_const(const Ciphertext& c, const BigInt& k, const PaillierPublicKey& pk,
                     int k_scale = 0);
Ciphertext rerandomize(const Ciphertext& c, const PaillierPublicKey& pk, Rng& rng);

// key_id (8 bytes) || scale (2 bytes) || value (value_bytes(), big-endian).
std::vector<std::uint8_t> serialize(const Ciphertext& c, const PaillierPublicKey& pk);
Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes,
                                  const PaillierPublicKey& pk);

}  // namespace encctl
