#include "encctl/elgamal.hpp"

namespace encctl {

namespace {

void require_key(const ElGamalCiphertext& c, const ElGamalPublicKey& pk) {
  if (c.key_id != pk.key_id) throw Error(ErrorCode::KeyMismatch, "ciphertext under another key");
}

}  // namespace

std::size_t ElGamalPublicKey::element_bytes() const { return (bit_length(p) + 7) / 8; }

ElGamalKeypair eg_keygen(std::size_t bits, Rng& rng) {
  if (bits < 5) throw Error(ErrorCode::OutOfRange, "ElGamal needs bits >= 5");
  ElGamalKeypair k;
  k.pub.p = gen_safe_prime(bits, rng);
  k.pub.q = (k.pub.p - 1) / 2;
  // squaring any element other than +-1 lands in the order-q subgroup
  do {
    const BigInt a = rand_below(k.pub.p - 3, rng) + 2;
    k.pub.g = mod_pow(a, 2, k.pub.p);
  } while (k.pub.g == 1);
  k.x = rand_below(k.pub.q - 1, rng) + 1;
  k.pub.h = mod_pow(k.pub.g, k.x, k.pub.p);
  k.pub.key_id = fingerprint(k.pub.p * k.pub.h + k.pub.g);
  return k;
}

bool eg_is_residue(const BigInt& m, const ElGamalPublicKey& pk) {
  return mod_pow(m, pk.q, pk.p) == 1;
}

ElGamalCiphertext eg_enc(const BigInt& m, const ElGamalPublicKey& pk, Rng& rng, int scale) {
  if (m < 1 || m >= pk.p) {
    throw Error(ErrorCode::MessageOutOfRange, m.get_str() + " not in [1, p)");
  }
  counting::tally(counting::Op::Enc);
  const BigInt y = rand_below(pk.q - 1, rng) + 1;
  ElGamalCiphertext c;
  c.c1 = mod_pow(pk.g, y, pk.p);
  c.c2 = mod_floor(m * mod_pow(pk.h, y, pk.p), pk.p);
  c.key_id = pk.key_id;
  c.scale = scale;
  return c;
}

BigInt eg_dec(const ElGamalCiphertext& c, const ElGamalKeypair& key) {
  require_key(c, key.pub);
  const BigInt& p = key.pub.p;
  if (c.c1 <= 0 || c.c1 >= p || c.c2 <= 0 || c.c2 >= p) {
    throw Error(ErrorCode::MalformedCiphertext, "component outside (0, p)");
  }
  counting::tally(counting::Op::Dec);
  const BigInt s = mod_pow(c.c1, key.x, p);
  return mod_floor(c.c2 * mod_inv(s, p), p);
}

ElGamalCiphertext eg_mul(const ElGamalCiphertext& a, const ElGamalCiphertext& b,
                         const ElGamalPublicKey& pk) {
  require_key(a, pk);
  require_key(b, pk);
  counting::tally(counting::Op::HomMul);
  ElGamalCiphertext c;
  c.c1 = mod_floor(a.c1 * b.c1, pk.p);
  c.c2 = mod_floor(a.c2 * b.c2, pk.p);
  c.key_id = pk.key_id;
  c.scale = a.scale + b.scale;
  return c;
}

std::vector<std::uint8_t> serialize(const ElGamalCiphertext& c, const ElGamalPublicKey& pk) {
  require_key(c, pk);
  std::vector<std::uint8_t> out;
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(c.key_id >> (8 * i)));
  out.push_back(static_cast<std::uint8_t>((c.scale >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>(c.scale & 0xff));
  for (const BigInt* v : {&c.c1, &c.c2}) {
    const auto b = to_bytes(*v, pk.element_bytes());
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

ElGamalCiphertext deserialize_eg(std::span<const std::uint8_t> bytes,
                                 const ElGamalPublicKey& pk) {
  const std::size_t w = pk.element_bytes();
  if (bytes.size() != 10 + 2 * w) {
    throw Error(ErrorCode::MalformedCiphertext, "bad ElGamal ciphertext length");
  }
  ElGamalCiphertext c;
  for (int i = 0; i < 8; ++i) c.key_id = (c.key_id << 8) | bytes[static_cast<std::size_t>(i)];
  c.scale = (bytes[8] << 8) | bytes[9];
  c.c1 = from_bytes(bytes.subspan(10, w));
  c.c2 = from_bytes(bytes.subspan(10 + w, w));
  require_key(c, pk);
  return c;
}

}  // namespace encctl
