#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "encctl/common.hpp"
#include "encctl/modmath.hpp"

namespace encctl {

struct ElGamalPublicKey {
  BigInt p;  // safe prime 2q + 1
  BigInt q;
  BigInt g;  // generates the order-q subgroup of quadratic residues
  BigInt h;  // g^x mod p
  std::uint64_t key_id = 0;

  std::size_t element_bytes() const;
};

struct ElGamalKeypair {
  ElGamalPublicKey pub;
  BigInt x;
};

struct ElGamalCiphertext {
  BigInt c1, c2;
  std::uint64_t key_id = 0;
  int scale = 1;
};

ElGamalKeypair eg_keygen(std::size_t bits, Rng& rng);

// Messages must lie in [1, p). Semantic security only holds for quadratic
// residues; other messages are accepted, see eg_is_residue.
ElGamalCiphertext eg_enc(const BigInt& m, const ElGamalPublicKey& pk, Rng& rng, int scale = 1);
BigInt eg_dec(const ElGamalCiphertext& c, const ElGamalKeypair& key);
ElGamalCiphertext eg_mul(const ElGamalCiphertext& a, const ElGamalCiphertext& b,
                         const ElGamalPublicKey& pk);
bool eg_is_residue(const BigInt& m, const ElGamalPublicKey& pk);

// key_id (8 bytes) || scale (2 bytes) || c1 || c2, each element_bytes() wide.
std::vector<std::uint8_t> serialize(const ElGamalCiphertext& c, const ElGamalPublicKey& pk);
ElGamalCiphertext deserialize_eg(std::span<const std::uint8_t> bytes, const ElGamalPublicKey& pk);

}  // namespace encctl
