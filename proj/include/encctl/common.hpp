#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace encctl {

using BigInt = mpz_class;

enum class ErrorCode : std::uint8_t {
  NotInvertible,
  OutOfRange,
  MessageOutOfRange,
  KeyMismatch,
  MalformedCiphertext,
  ScaleMismatch,
  ModulusMismatch,
  ProtocolAbort,
  PrecisionOverflow,
  ZeroEncoding,
  DimensionMismatch,
  RangeViolation,
  IllConditioned,
  EnumerationBudgetExceeded,
  DegenerateActiveSet,
  NotInAnyRegion,
  StepSizeOutOfRange,
  NotSchur,
  UnboundedSet,
  CertificateViolated,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the toolkit; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Homomorphic-operation tally, the quantities of the "operation count" table.
struct OpCount {
  std::uint64_t enc = 0;
  std::uint64_t dec = 0;
  std::uint64_t hom_mul = 0;        // ciphertext x ciphertext (ElGamal)
  std::uint64_t hom_add = 0;        // ciphertext + ciphertext (Paillier)
  std::uint64_t hom_mul_const = 0;  // ciphertext x plaintext (Paillier)
  std::uint64_t rerandomize = 0;

  OpCount& operator+=(const OpCount& o) noexcept {
    enc += o.enc;
    dec += o.dec;
    hom_mul += o.hom_mul;
    hom_add += o.hom_add;
    hom_mul_const += o.hom_mul_const;
    rerandomize += o.rerandomize;
    return *this;
  }
  friend OpCount operator-(OpCount a, const OpCount& b) noexcept {
    a.enc -= b.enc;
    a.dec -= b.dec;
    a.hom_mul -= b.hom_mul;
    a.hom_add -= b.hom_add;
    a.hom_mul_const -= b.hom_mul_const;
    a.rerandomize -= b.rerandomize;
    return a;
  }
  friend bool operator==(const OpCount&, const OpCount&) = default;
};

namespace counting {

enum class Op : std::uint8_t { Enc, Dec, HomMul, HomAdd, HomMulConst, Rerandomize };

// Records one primitive operation into the active sink of this thread, if any.
void tally(Op op) noexcept;

// Routes tallies on this thread into `sink` for the lifetime of the scope.
// Scopes nest; the previous sink is restored on destruction.
class Scope {
 public:
  explicit Scope(OpCount* sink) noexcept;
  ~Scope();
  Scope(const Scope&) = delete;
  Scope& operator=(const Scope&) = delete;

 private:
  OpCount* previous_;
};

}  // namespace counting

}  // namespace encctl
