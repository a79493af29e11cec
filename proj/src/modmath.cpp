#include "encctl/modmath.hpp"

#include <functional>
#include <string>

namespace encctl {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::MessageOutOfRange: return "MessageOutOfRange";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::MalformedCiphertext: return "MalformedCiphertext";
    case ErrorCode::ScaleMismatch: return "ScaleMismatch";
    case ErrorCode::ModulusMismatch: return "ModulusMismatch";
    case ErrorCode::ProtocolAbort: return "ProtocolAbort";
    case ErrorCode::PrecisionOverflow: return "PrecisionOverflow";
    case ErrorCode::ZeroEncoding: return "ZeroEncoding";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::EnumerationBudgetExceeded: return "EnumerationBudgetExceeded";
    case ErrorCode::DegenerateActiveSet: return "DegenerateActiveSet";
    case ErrorCode::NotInAnyRegion: return "NotInAnyRegion";
    case ErrorCode::StepSizeOutOfRange: return "StepSizeOutOfRange";
    case ErrorCode::NotSchur: return "NotSchur";
    case ErrorCode::UnboundedSet: return "UnboundedSet";
    case ErrorCode::CertificateViolated: return "CertificateViolated";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

namespace counting {

namespace {
thread_local OpCount* active_sink = nullptr;
}

void tally(Op op) noexcept {
  if (active_sink == nullptr) return;
  switch (op) {
    case Op::Enc: ++active_sink->enc; break;
    case Op::Dec: ++active_sink->dec; break;
    case Op::HomMul: ++active_sink->hom_mul; break;
    case Op::HomAdd: ++active_sink->hom_add; break;
    case Op::HomMulConst: ++active_sink->hom_mul_const; break;
    case Op::Rerandomize: ++active_sink->rerandomize; break;
  }
}

Scope::Scope(OpCount* sink) noexcept : previous_(active_sink) { active_sink = sink; }
Scope::~Scope() { active_sink = previous_; }

}  // namespace counting

namespace {

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng Rng::fork(std::string_view tag) const {
  std::uint64_t h = mix(seed_);
  for (char c : tag) h = mix(h ^ static_cast<std::uint8_t>(c));
  return Rng(h);
}

double Rng::uniform(double lo, double hi) {
  // 53 random mantissa bits
  const double unit = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

Residue::Residue(BigInt v, BigInt m) : value(std::move(v)), modulus(std::move(m)) {
  if (modulus < 2) throw Error(ErrorCode::OutOfRange, "modulus must be >= 2");
  value = mod_floor(value, modulus);
}

Residue mod_pow(const Residue& base, const BigInt& exp) {
  return Residue(mod_pow(base.value, exp, base.modulus), base.modulus);
}

BigInt mod_pow(const BigInt& base, const BigInt& exp, const BigInt& modulus) {
  if (modulus < 2) throw Error(ErrorCode::OutOfRange, "modulus must be >= 2");
  if (exp < 0) throw Error(ErrorCode::OutOfRange, "negative exponent");
  BigInt r;
  const BigInt b = mod_floor(base, modulus);
  mpz_powm(r.get_mpz_t(), b.get_mpz_t(), exp.get_mpz_t(), modulus.get_mpz_t());
  return r;
}

BigInt mod_inv(const BigInt& a, const BigInt& modulus) {
  BigInt r;
  if (modulus < 2 || mpz_invert(r.get_mpz_t(), a.get_mpz_t(), modulus.get_mpz_t()) == 0) {
    throw Error(ErrorCode::NotInvertible,
                a.get_str() + " has no inverse modulo " + modulus.get_str());
  }
  return r;
}

BigInt mod_floor(const BigInt& a, const BigInt& modulus) {
  BigInt r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), modulus.get_mpz_t());
  return r;
}

std::size_t bit_length(const BigInt& v) {
  if (v == 0) return 0;
  return mpz_sizeinbase(v.get_mpz_t(), 2);
}

BigInt rand_bits(std::size_t bits, Rng& rng) {
  BigInt r = 0;
  std::size_t remaining = bits;
  while (remaining > 0) {
    const std::size_t take = remaining >= 64 ? 64 : remaining;
    std::uint64_t word = rng.next_u64();
    if (take < 64) word &= (std::uint64_t{1} << take) - 1;
    r <<= static_cast<mp_bitcnt_t>(take);
    BigInt w;
    mpz_import(w.get_mpz_t(), 1, 1, sizeof(word), 0, 0, &word);
    r += w;
    remaining -= take;
  }
  return r;
}

BigInt rand_below(const BigInt& bound, Rng& rng) {
  if (bound < 1) throw Error(ErrorCode::OutOfRange, "rand_below bound must be >= 1");
  if (bound == 1) return 0;
  const std::size_t bits = bit_length(BigInt(bound - 1));
  for (;;) {
    BigInt candidate = rand_bits(bits, rng);
    if (candidate < bound) return candidate;
  }
}

BigInt rand_unit(const BigInt& modulus, Rng& rng) {
  for (;;) {
    BigInt r = rand_below(modulus, rng);
    if (r == 0) continue;
    BigInt g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), modulus.get_mpz_t());
    if (g == 1) return r;
  }
}

bool is_probable_prime(const BigInt& n, Rng& rng, int rounds) {
  if (n < 2) return false;
  static constexpr unsigned kSmall[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (unsigned p : kSmall) {
    if (n == p) return true;
    if (mpz_divisible_ui_p(n.get_mpz_t(), p) != 0) return false;
  }
  // n - 1 = d * 2^s with d odd
  const BigInt n_minus_1 = n - 1;
  BigInt d = n_minus_1;
  std::size_t s = 0;
  while (mpz_even_p(d.get_mpz_t()) != 0) {
    d >>= 1;
    ++s;
  }
  const BigInt witness_range = n - 3;  // witnesses in [2, n-2]
  for (int i = 0; i < rounds; ++i) {
    const BigInt a = rand_below(witness_range, rng) + 2;
    BigInt x = mod_pow(a, d, n);
    if (x == 1 || x == n_minus_1) continue;
    bool composite = true;
    for (std::size_t r = 1; r < s; ++r) {
      x = (x * x) % n;
      if (x == n_minus_1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

BigInt gen_prime(std::size_t bits, Rng& rng) {
  if (bits < 4) throw Error(ErrorCode::OutOfRange, "gen_prime needs bits >= 4");
  const BigInt top = BigInt(1) << static_cast<mp_bitcnt_t>(bits - 1);
  for (;;) {
    BigInt candidate = top + rand_bits(bits - 1, rng);
    if (is_probable_prime(candidate, rng)) return candidate;
  }
}

BigInt gen_safe_prime(std::size_t bits, Rng& rng) {
  if (bits < 5) throw Error(ErrorCode::OutOfRange, "gen_safe_prime needs bits >= 5");
  const BigInt top = BigInt(1) << static_cast<mp_bitcnt_t>(bits - 2);
  for (;;) {
    // q in [2^(bits-2), 2^(bits-1)) gives p = 2q+1 in [2^(bits-1), 2^bits)
    BigInt q = top + rand_bits(bits - 2, rng);
    if (!is_probable_prime(q, rng, 8)) continue;
    BigInt p = 2 * q + 1;
    if (is_probable_prime(p, rng) && is_probable_prime(q, rng)) return p;
  }
}

std::vector<std::uint8_t> to_bytes(const BigInt& v, std::size_t width) {
  if (v < 0) throw Error(ErrorCode::OutOfRange, "cannot serialize a negative integer");
  const std::size_t needed = (bit_length(v) + 7) / 8;
  if (needed > width) {
    throw Error(ErrorCode::OutOfRange, "integer needs " + std::to_string(needed) +
                                           " bytes, width is " + std::to_string(width));
  }
  std::vector<std::uint8_t> out(width, 0);
  if (needed > 0) {
    std::size_t count = 0;
    mpz_export(out.data() + (width - needed), &count, 1, 1, 1, 0, v.get_mpz_t());
  }
  return out;
}

BigInt from_bytes(std::span<const std::uint8_t> bytes) {
  BigInt r = 0;
  if (!bytes.empty()) mpz_import(r.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  return r;
}

std::uint64_t fingerprint(const BigInt& v) {
  const std::string digits = v.get_str(16);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : digits) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return mix(h);
}

}  // namespace encctl
