#include <gtest/gtest.h>

#include "encctl/smpc.hpp"

using namespace encctl;

namespace {

struct Fixture {
  Network net;
  Rng rng1{11}, rng2{22};
  PaillierKeypair key;
  TwoParty tp;

  explicit Fixture(PaillierKeypair k, int kappa = 8)
      : key(std::move(k)), tp{net, cloud(1), cloud(2), key, rng1, rng2, kappa} {}
};

PaillierKeypair key_bits(std::size_t bits, std::uint64_t seed) {
  Rng rng(seed);
  return paillier_keygen(bits, rng);
}

}  // namespace

TEST(ObliviousTransfer, Example) {
  Fixture f(paillier_from_primes(5, 7));
  EXPECT_EQ(oblivious_transfer(f.net, cloud(1), cloud(2), 4, 9, 1, f.key, f.rng1, f.rng2), 9);
  EXPECT_EQ(oblivious_transfer(f.net, cloud(1), cloud(2), 4, 9, 0, f.key, f.rng1, f.rng2), 4);
}

TEST(ObliviousTransfer, GridAgainstSelection) {
  Fixture f(paillier_from_primes(5, 7));
  for (int z0 = 0; z0 < 10; ++z0) {
    for (int z1 = 0; z1 < 10; ++z1) {
      for (int tau : {0, 1}) {
        const BigInt got = oblivious_transfer(f.net, cloud(1), cloud(2), z0, z1, tau, f.key, f.rng1, f.rng2);
        ASSERT_EQ(got, tau ? z1 : z0);
      }
    }
  }
  EXPECT_EQ(f.net.in_flight(), 0u);
}

TEST(ObliviousTransfer, EqualInputsIgnoreBit) {
  Fixture f(paillier_from_primes(5, 7));
  for (int tau : {0, 1}) {
    EXPECT_EQ(oblivious_transfer(f.net, cloud(1), cloud(2), 6, 6, tau, f.key, f.rng1, f.rng2), 6);
  }
}

TEST(ObliviousTransfer, SenderSeesOnlyCiphertexts) {
  Fixture f(paillier_from_primes(5, 7));
  oblivious_transfer(f.net, cloud(1), cloud(2), 3, 8, 1, f.key, f.rng1, f.rng2);
  for (const auto& e : f.net.log()) {
    if (e.to == cloud(1)) EXPECT_EQ(e.payload.size(), 10 + f.key.pub.value_bytes());
  }
}

TEST(PrivateCompare, Examples) {
  Fixture f(key_bits(32, 1));
  const auto& pk = f.key.pub;
  EXPECT_EQ(private_compare(f.tp, enc(3, pk, f.rng1), enc(5, pk, f.rng1), 4).tau, 1);
  EXPECT_EQ(private_compare(f.tp, enc(5, pk, f.rng1), enc(3, pk, f.rng1), 4).tau, 0);
  EXPECT_EQ(private_compare(f.tp, enc(7, pk, f.rng1), enc(7, pk, f.rng1), 4).tau, 1);
}

TEST(PrivateCompare, ExhaustiveFourBits) {
  Fixture f(key_bits(32, 2));
  const auto& pk = f.key.pub;
  for (int a = 0; a < 16; ++a) {
    for (int b = 0; b < 16; ++b) {
      ASSERT_EQ(private_compare(f.tp, enc(a, pk, f.rng1), enc(b, pk, f.rng1), 4).tau, a <= b ? 1 : 0)
          << a << " vs " << b;
    }
  }
}

TEST(PrivateCompare, MessagesLinearInBits) {
  Fixture f(key_bits(64, 3));
  const auto& pk = f.key.pub;
  for (int l : {4, 8, 16}) {
    const auto out = private_compare(f.tp, enc(1, pk, f.rng1), enc(2, pk, f.rng1), l);
    EXPECT_EQ(out.messages, static_cast<std::uint64_t>(2 * l + 3)) << l;
    EXPECT_EQ(f.net.session_rounds("compare"), static_cast<std::uint64_t>(2 * l + 3));
  }
}

TEST(PrivateCompare, HeadroomEnforced) {
  Fixture f(paillier_from_primes(5, 7));
  try {
    private_compare(f.tp, enc(1, f.key.pub, f.rng1), enc(2, f.key.pub, f.rng1), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PrecisionOverflow);
  }
  EXPECT_NO_THROW(check_compare_headroom(4, 8, BigInt(1) << 14));
  EXPECT_THROW(check_compare_headroom(4, 8, BigInt(1) << 13), Error);
}

TEST(ComparisonBits, Bounds) {
  EXPECT_EQ(comparison_bits(0), 1);
  EXPECT_EQ(comparison_bits(1), 2);
  EXPECT_EQ(comparison_bits(7), 4);
  EXPECT_EQ(comparison_bits(8), 5);
  for (int v = 1; v < 300; ++v) {
    const int l = comparison_bits(v);
    ASSERT_LT(v, 1 << (l - 1));
  }
}

TEST(EncryptedMax, Examples) {
  Fixture f(key_bits(32, 4));
  const auto& pk = f.key.pub;
  const auto m1 = encrypted_max(f.tp, enc_signed(-20, pk, f.rng1), enc_signed(0, pk, f.rng1), 6);
  EXPECT_EQ(dec_signed(m1, f.key), 0);
  const auto m2 = encrypted_max(f.tp, enc_signed(5, pk, f.rng1), enc_signed(-10, pk, f.rng1), 6);
  EXPECT_EQ(dec_signed(m2, f.key), 5);
  const auto m3 = encrypted_min(f.tp, enc_signed(5, pk, f.rng1), enc_signed(-10, pk, f.rng1), 6);
  EXPECT_EQ(dec_signed(m3, f.key), -10);
}

TEST(EncryptedMax, RandomAgainstOracle) {
  Fixture f(key_bits(48, 5));
  const auto& pk = f.key.pub;
  Rng data(6);
  const int l = 12;
  const BigInt half = BigInt(1) << (l - 1);
  for (int t = 0; t < 300; ++t) {
    const BigInt a = rand_below(2 * half - 1, data) - (half - 1);
    const BigInt b = rand_below(2 * half - 1, data) - (half - 1);
    const auto ca = enc_signed(a, pk, f.rng1, 2);
    const auto cb = enc_signed(b, pk, f.rng1, 2);
    const auto mx = encrypted_max(f.tp, ca, cb, l);
    const auto mn = encrypted_min(f.tp, ca, cb, l);
    ASSERT_EQ(dec_signed(mx, f.key), a > b ? a : b);
    ASSERT_EQ(dec_signed(mn, f.key), a < b ? a : b);
    ASSERT_EQ(mx.scale, 2);
  }
}

TEST(EncryptedMax, ScaleMismatchRejected) {
  Fixture f(key_bits(32, 7));
  const auto& pk = f.key.pub;
  EXPECT_THROW(encrypted_max(f.tp, enc(1, pk, f.rng1, 1), enc(1, pk, f.rng1, 2), 4), Error);
}

TEST(KeySwitch, Examples) {
  Fixture f(paillier_from_primes(5, 7));
  const auto target = paillier_from_primes(11, 13);
  for (int u : {12, 0, 34}) {
    const auto c = key_switch(f.tp, enc(u, f.key.pub, f.rng1), target.pub);
    const BigInt lifted = key_switch_lift(dec(c, target), target.pub.P, f.key.pub.P);
    EXPECT_EQ(mod_floor(lifted, 35), u);
  }
  const auto c = key_switch(f.tp, enc_signed(-3, f.key.pub, f.rng1), target.pub);
  EXPECT_EQ(key_switch_lift(dec(c, target), target.pub.P, f.key.pub.P), -3);
}

TEST(KeySwitch, TargetTooSmall) {
  Fixture f(paillier_from_primes(5, 7));
  const auto target = paillier_from_primes(3, 11);
  EXPECT_THROW(key_switch(f.tp, enc(1, f.key.pub, f.rng1), target.pub), Error);
}

TEST(KeySwitch, MaskedValueUniformForP2) {
  Fixture f(paillier_from_primes(5, 7));
  const auto target = paillier_from_primes(11, 13);
  std::vector<std::uint64_t> bins(35, 0);
  const auto u = enc(12, f.key.pub, f.rng1);
  for (int t = 0; t < 100000; ++t) {
    f.net.clear_log();
    key_switch(f.tp, u, target.pub);
    const auto& seen = f.net.log().front();
    ASSERT_EQ(seen.label, "keyswitch/masked");
    ++bins[dec(deserialize_ciphertext(seen.payload, f.key.pub), f.key).get_ui()];
  }
  EXPECT_GT(chi_square_uniform(bins).p_value, 1e-3);
}
