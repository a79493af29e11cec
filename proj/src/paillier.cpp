#include "encctl/paillier.hpp"

namespace encctl {

namespace {

void require_key(const Ciphertext& c, const PaillierPublicKey& pk) {
  if (c.key_id != pk.key_id) throw Error(ErrorCode::KeyMismatch, "ciphertext under another key");
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

std::size_t PaillierPublicKey::value_bytes() const { return (2 * bit_length(P) + 7) / 8; }
std::size_t PaillierPublicKey::residue_bytes() const { return (bit_length(P) + 7) / 8; }

PaillierKeypair paillier_from_primes(const BigInt& p, const BigInt& q) {
  if (p == q) throw Error(ErrorCode::OutOfRange, "Paillier primes must differ");
  PaillierKeypair k;
  k.p = p;
  k.q = q;
  k.pub.P = p * q;
  k.pub.P2 = k.pub.P * k.pub.P;
  k.pub.key_id = fingerprint(k.pub.P);
  k.S = (p - 1) * (q - 1);
  k.mu = mod_inv(k.S, k.pub.P);
  return k;
}

PaillierKeypair paillier_keygen(std::size_t bits_per_prime, Rng& rng) {
  if (bits_per_prime < 4) throw Error(ErrorCode::OutOfRange, "bits_per_prime must be >= 4");
  for (;;) {
    const BigInt p = gen_prime(bits_per_prime, rng);
    const BigInt q = gen_prime(bits_per_prime, rng);
    if (p == q) continue;
    BigInt g;
    const BigInt n = p * q;
    if (bit_length(n) != 2 * bits_per_prime) continue;
    const BigInt s = (p - 1) * (q - 1);
    mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), s.get_mpz_t());
    if (g != 1) continue;
    return paillier_from_primes(p, q);
  }
}

Ciphertext enc_with_nonce(const BigInt& z, const PaillierPublicKey& pk, const BigInt& r,
                          int scale) {
  if (z < 0 || z >= pk.P) {
    throw Error(ErrorCode::MessageOutOfRange, z.get_str() + " not in [0, P)");
  }
  counting::tally(counting::Op::Enc);
  // (P+1)^z = 1 + zP mod P^2
  BigInt gz = mod_floor(1 + z * pk.P, pk.P2);
  BigInt v = mod_floor(gz * mod_pow(r, pk.P, pk.P2), pk.P2);
  return Ciphertext{std::move(v), pk.key_id, scale};
}

Ciphertext enc(const BigInt& z, const PaillierPublicKey& pk, Rng& rng, int scale) {
  return enc_with_nonce(z, pk, rand_unit(pk.P2, rng), scale);
}

Ciphertext enc_signed(const BigInt& v, const PaillierPublicKey& pk, Rng& rng, int scale) {
  return enc(mod_floor(v, pk.P), pk, rng, scale);
}

BigInt dec(const Ciphertext& c, const PaillierKeypair& key) {
  require_key(c, key.pub);
  const BigInt& P = key.pub.P;
  const BigInt& P2 = key.pub.P2;
  if (c.value <= 0 || c.value >= P2) {
    throw Error(ErrorCode::MalformedCiphertext, "ciphertext value outside (0, P^2)");
  }
  counting::tally(counting::Op::Dec);
  const BigInt u = mod_pow(c.value, key.S, P2);
  BigInt quotient, remainder;
  const BigInt u1 = u - 1;
  mpz_fdiv_qr(quotient.get_mpz_t(), remainder.get_mpz_t(), u1.get_mpz_t(), P.get_mpz_t());
  if (remainder != 0) throw Error(ErrorCode::MalformedCiphertext, "L-function division inexact");
  return mod_floor(quotient * key.mu, P);
}

BigInt dec_signed(const Ciphertext& c, const PaillierKeypair& key) {
  BigInt z = dec(c, key);
  if (2 * z > key.pub.P) z -= key.pub.P;
  return z;
}

Ciphertext add(const Ciphertext& a, const Ciphertext& b, const PaillierPublicKey& pk) {
  require_key(a, pk);
  require_key(b, pk);
  if (a.scale != b.scale) {
    throw Error(ErrorCode::ScaleMismatch, "scales " + std::to_string(a.scale) + " and " +
                                              std::to_string(b.scale));
  }
  counting::tally(counting::Op::HomAdd);
  return Ciphertext{mod_floor(a.value * b.value, pk.P2), pk.key_id, a.scale};
}

Ciphertext sub(const Ciphertext& a, const Ciphertext& b, const PaillierPublicKey& pk) {
  return add(a, mul_const(b, pk.P - 1, pk), pk);
}

Ciphertext mul_const(const Ciphertext& c, const BigInt& k, const PaillierPublicKey& pk,
                     int k_scale) {
  require_key(c, pk);
  counting::tally(counting::Op::HomMulConst);
  return Ciphertext{mod_pow(c.value, mod_floor(k, pk.P), pk.P2), pk.key_id, c.scale + k_scale};
}

Ciphertext rerandomize(const Ciphertext& c, const PaillierPublicKey& pk, Rng& rng) {
  require_key(c, pk);
  counting::tally(counting::Op::Rerandomize);
  const BigInt r = rand_unit(pk.P2, rng);
  return Ciphertext{mod_floor(c.value * mod_pow(r, pk.P, pk.P2), pk.P2), pk.key_id, c.scale};
}

std::vector<std::uint8_t> serialize(const Ciphertext& c, const PaillierPublicKey& pk) {
  require_key(c, pk);
  std::vector<std::uint8_t> out;
  out.reserve(10 + pk.value_bytes());
  put_u64(out, c.key_id);
  out.push_back(static_cast<std::uint8_t>((c.scale >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>(c.scale & 0xff));
  const auto body = to_bytes(c.value, pk.value_bytes());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes,
                                  const PaillierPublicKey& pk) {
  if (bytes.size() != 10 + pk.value_bytes()) {
    throw Error(ErrorCode::MalformedCiphertext,
                "expected " + std::to_string(10 + pk.value_bytes()) + " bytes, got " +
                    std::to_string(bytes.size()));
  }
  std::uint64_t id = 0;
  for (int i = 0; i < 8; ++i) id = (id << 8) | bytes[static_cast<std::size_t>(i)];
  const int scale = (bytes[8] << 8) | bytes[9];
  Ciphertext c{from_bytes(bytes.subspan(10)), id, scale};
  require_key(c, pk);
  if (c.value <= 0 || c.value >= pk.P2) {
    throw Error(ErrorCode::MalformedCiphertext, "ciphertext value outside (0, P^2)");
  }
  return c;
}

}  // namespace encctl
