#pragma once

#include <cstdint>
#include <vector>

#include "encctl/paillier.hpp"
#include "encctl/simnet.hpp"

namespace encctl {

// Two parties wired through a Network. p2 owns `key2`; code acting for p1
// only ever reads key2.pub.
struct TwoParty {
  Network& net;
  PartyId p1;
  PartyId p2;
  const PaillierKeypair& key2;
  Rng& rng1;
  Rng& rng2;
  int kappa = 8;  // statistical blinding parameter
};

struct ComparisonOutcome {
  int tau = 0;                 // held by p2: 1 iff a <= b
  std::uint64_t messages = 0;  // envelopes exchanged by this run
};

// Smallest l with |v| < 2^(l-1) for every |v| <= magnitude_bound.
int comparison_bits(const BigInt& magnitude_bound);

// Throws PrecisionOverflow unless 2^(l + kappa + 1) < P.
void check_compare_headroom(int l, int kappa, const BigInt& P);

// Receiver obtains z_tau; the sender never sees tau.
BigInt oblivious_transfer(Network& net, const PartyId& sender, const PartyId& receiver,
                          const BigInt& z0, const BigInt& z1, int tau,
                          const PaillierKeypair& receiver_key, Rng& sender_rng,
                          Rng& receiver_rng);

// a and b encrypt integers in [0, 2^l). Ties give tau = 1.
ComparisonOutcome private_compare(TwoParty& tp, const Ciphertext& a, const Ciphertext& b, int l);

// Operands encrypt signed integers with |v| < 2^(l-1) (centered lift mod P).
// p1 receives a fresh encryption of the max / min.
Ciphertext encrypted_max(TwoParty& tp, const Ciphertext& zeta, const Ciphertext& lower, int l);
Ciphertext encrypted_min(TwoParty& tp, const Ciphertext& zeta, const Ciphertext& upper, int l);

// p1 turns [[u]] under key2 into [[u + t - t']] under `target`, where the
// target plaintext decodes to u through key_switch_lift. Requires P_T > 2 P.
Ciphertext key_switch(TwoParty& tp, const Ciphertext& u, const PaillierPublicKey& target);

// Recovers the signed u from the target-key plaintext.
BigInt key_switch_lift(const BigInt& target_plain, const BigInt& target_P, const BigInt& source_P);

}  // namespace encctl
