#include "encctl/smpc.hpp"

#include <algorithm>

namespace encctl {

namespace {

void send_ct(Network& net, const PartyId& from, const PartyId& to, const std::string& label,
             const Ciphertext& c, const PaillierPublicKey& pk) {
  net.send(from, to, label, serialize(c, pk));
}

Ciphertext recv_ct(Network& net, const PartyId& to, const PartyId& from, const std::string& label,
                   const PaillierPublicKey& pk) {
  const Envelope env = net.receive(to, from, label);
  try {
    return deserialize_ciphertext(env.payload, pk);
  } catch (const Error& e) {
    throw Error(ErrorCode::ProtocolAbort, std::string("malformed '") + label + "': " + e.what());
  }
}

void send_residue(Network& net, const PartyId& from, const PartyId& to, const std::string& label,
                  const BigInt& v, const PaillierPublicKey& pk) {
  net.send(from, to, label, to_bytes(v, pk.residue_bytes()));
}

BigInt recv_residue(Network& net, const PartyId& to, const PartyId& from, const std::string& label,
                    const PaillierPublicKey& pk) {
  const Envelope env = net.receive(to, from, label);
  if (env.payload.size() != pk.residue_bytes()) {
    throw Error(ErrorCode::ProtocolAbort, "malformed '" + label + "'");
  }
  BigInt v = from_bytes(env.payload);
  if (v >= pk.P) throw Error(ErrorCode::ProtocolAbort, "residue out of range in '" + label + "'");
  return v;
}

int random_bit(Rng& rng) { return static_cast<int>(rng.next_u64() & 1U); }

bool bit_of(const BigInt& v, std::size_t i) { return mpz_tstbit(v.get_mpz_t(), i) != 0; }

BigInt pow2(std::size_t e) { return BigInt(1) << static_cast<mp_bitcnt_t>(e); }

enum class Extremum { Max, Min };

Ciphertext encrypted_extremum(TwoParty& tp, const Ciphertext& zeta, const Ciphertext& bound,
                              int l, Extremum kind) {
  const PaillierPublicKey& pk = tp.key2.pub;
  if (zeta.scale != bound.scale) {
    throw Error(ErrorCode::ScaleMismatch, "operands of an encrypted max/min differ in scale");
  }
  check_compare_headroom(l, tp.kappa, pk.P);
  const std::string tag = kind == Extremum::Max ? "max" : "min";
  const int scale = zeta.scale;

  Ciphertext a, b, a_shift, b_shift, ma, mb;
  BigInt r, s;
  {
    auto ops = tp.net.acting_as(tp.p1);
    // step 1: hide which operand is the bound
    const bool swap = random_bit(tp.rng1) == 1;
    a = swap ? bound : zeta;
    b = swap ? zeta : bound;
    const Ciphertext offset = enc(pow2(static_cast<std::size_t>(l - 1)), pk, tp.rng1, scale);
    a_shift = add(a, offset, pk);
    b_shift = add(b, rerandomize(offset, pk, tp.rng1), pk);
  }
  // step 2: p2 learns tau = [a <= b]
  const ComparisonOutcome cmp = private_compare(tp, a_shift, b_shift, l);
  {
    // step 3: additive masks
    auto ops = tp.net.acting_as(tp.p1);
    r = rand_below(pk.P, tp.rng1);
    s = rand_below(pk.P, tp.rng1);
    ma = add(a, enc(r, pk, tp.rng1, scale), pk);
    mb = add(b, enc(s, pk, tp.rng1, scale), pk);
    send_ct(tp.net, tp.p1, tp.p2, tag + "/masked", ma, pk);
    send_ct(tp.net, tp.p1, tp.p2, tag + "/masked", mb, pk);
  }
  {
    // step 4: p2 selects and refreshes
    auto ops = tp.net.acting_as(tp.p2);
    const Ciphertext ra = recv_ct(tp.net, tp.p2, tp.p1, tag + "/masked", pk);
    const Ciphertext rb = recv_ct(tp.net, tp.p2, tp.p1, tag + "/masked", pk);
    const bool pick_b = kind == Extremum::Max ? cmp.tau == 1 : cmp.tau == 0;
    const Ciphertext chosen = rerandomize(pick_b ? rb : ra, pk, tp.rng2);
    send_ct(tp.net, tp.p2, tp.p1, tag + "/select", chosen, pk);
    send_ct(tp.net, tp.p2, tp.p1, tag + "/tau", enc(cmp.tau, pk, tp.rng2, scale), pk);
  }
  // step 5: p1 removes whichever mask survived
  auto ops = tp.net.acting_as(tp.p1);
  const Ciphertext c = recv_ct(tp.net, tp.p1, tp.p2, tag + "/select", pk);
  const Ciphertext tau = recv_ct(tp.net, tp.p1, tp.p2, tag + "/tau", pk);
  const Ciphertext minus_one = enc(pk.P - 1, pk, tp.rng1, scale);
  const Ciphertext tau_minus_one = add(tau, minus_one, pk);
  if (kind == Extremum::Max) {
    return add(add(c, mul_const(tau_minus_one, r, pk), pk), mul_const(tau, -s, pk), pk);
  }
  return add(add(c, mul_const(tau, -r, pk), pk), mul_const(tau_minus_one, s, pk), pk);
}

}  // namespace

int comparison_bits(const BigInt& magnitude_bound) {
  // |v| <= bound < 2^(l-1)
  return static_cast<int>(bit_length(abs(magnitude_bound))) + 1;
}

void check_compare_headroom(int l, int kappa, const BigInt& P) {
  if (l < 1) throw Error(ErrorCode::OutOfRange, "comparison needs l >= 1");
  if (pow2(static_cast<std::size_t>(l + kappa + 1)) >= P) {
    throw Error(ErrorCode::PrecisionOverflow,
                "2^(l+kappa+1) >= P for l=" + std::to_string(l) +
                    ", kappa=" + std::to_string(kappa));
  }
}

BigInt oblivious_transfer(Network& net, const PartyId& sender, const PartyId& receiver,
                          const BigInt& z0, const BigInt& z1, int tau,
                          const PaillierKeypair& receiver_key, Rng& sender_rng,
                          Rng& receiver_rng) {
  const PaillierPublicKey& pk = receiver_key.pub;
  const BigInt& phi = pk.P;
  if (z0 < 0 || z0 >= phi || z1 < 0 || z1 >= phi) {
    throw Error(ErrorCode::MessageOutOfRange, "transfer inputs must lie in [0, phi)");
  }
  if (tau != 0 && tau != 1) throw Error(ErrorCode::OutOfRange, "tau must be a bit");
  net.begin_session("ot");
  BigInt r0, r1;
  {
    auto ops = net.acting_as(sender);
    r0 = rand_below(phi, sender_rng);
    r1 = rand_below(phi, sender_rng);
    send_residue(net, sender, receiver, "ot/masked", mod_floor(z0 + r0, phi), pk);
    send_residue(net, sender, receiver, "ot/masked", mod_floor(z1 + r1, phi), pk);
  }
  {
    auto ops = net.acting_as(receiver);
    const BigInt m0 = recv_residue(net, receiver, sender, "ot/masked", pk);
    const BigInt m1 = recv_residue(net, receiver, sender, "ot/masked", pk);
    send_ct(net, receiver, sender, "ot/select", enc(tau == 1 ? m1 : m0, pk, receiver_rng), pk);
    send_ct(net, receiver, sender, "ot/select", enc(tau, pk, receiver_rng), pk);
  }
  {
    auto ops = net.acting_as(sender);
    const Ciphertext chosen = recv_ct(net, sender, receiver, "ot/select", pk);
    const Ciphertext enc_tau = recv_ct(net, sender, receiver, "ot/select", pk);
    const Ciphertext tau_minus_one = add(enc_tau, enc(pk.P - 1, pk, sender_rng), pk);
    const Ciphertext c =
        add(add(chosen, mul_const(tau_minus_one, r0, pk), pk), mul_const(enc_tau, -r1, pk), pk);
    send_ct(net, sender, receiver, "ot/result", c, pk);
  }
  auto ops = net.acting_as(receiver);
  return mod_floor(dec(recv_ct(net, receiver, sender, "ot/result", pk), receiver_key), phi);
}

ComparisonOutcome private_compare(TwoParty& tp, const Ciphertext& a, const Ciphertext& b, int l) {
  const PaillierPublicKey& pk = tp.key2.pub;
  check_compare_headroom(l, tp.kappa, pk.P);
  const auto L = static_cast<std::size_t>(l);
  const std::uint64_t sent_before = tp.net.ledger().sent;
  tp.net.begin_session("compare");

  // p1 blinds d = b - a + 2^l + r
  BigInt r;
  {
    auto ops = tp.net.acting_as(tp.p1);
    r = rand_bits(L + static_cast<std::size_t>(tp.kappa), tp.rng1);
    const Ciphertext d = add(sub(b, a, pk), enc(pow2(L) + r, pk, tp.rng1, a.scale), pk);
    send_ct(tp.net, tp.p1, tp.p2, "compare/d", d, pk);
  }

  // p2 decrypts z and returns the bits of z mod 2^l
  BigInt z;
  {
    auto ops = tp.net.acting_as(tp.p2);
    z = dec(recv_ct(tp.net, tp.p2, tp.p1, "compare/d", pk), tp.key2);
    for (std::size_t i = 0; i < L; ++i) {
      send_ct(tp.net, tp.p2, tp.p1, "compare/bit", enc(bit_of(z, i) ? 1 : 0, pk, tp.rng2), pk);
    }
  }

  // p1: bitwise comparison of alpha = z mod 2^l against beta = r mod 2^l.
  // A zero term exists iff alpha < beta (delta_a = 0) or alpha >= beta (delta_a = 1).
  int delta_a = 0;
  {
    auto ops = tp.net.acting_as(tp.p1);
    std::vector<Ciphertext> alpha;
    alpha.reserve(L);
    for (std::size_t i = 0; i < L; ++i) {
      alpha.push_back(recv_ct(tp.net, tp.p1, tp.p2, "compare/bit", pk));
    }
    delta_a = random_bit(tp.rng1);
    const BigInt s = 1 - 2 * delta_a;
    const Ciphertext one = enc(1, pk, tp.rng1);

    std::vector<Ciphertext> w;  // [[alpha_i xor beta_i]]
    w.reserve(L);
    for (std::size_t i = 0; i < L; ++i) {
      w.push_back(bit_of(r, i) ? sub(one, alpha[i], pk) : alpha[i]);
    }

    std::vector<Ciphertext> terms;
    terms.reserve(L + 1);
    Ciphertext suffix = enc(0, pk, tp.rng1);  // sum of w_j for j > i
    for (std::size_t k = L; k-- > 0;) {
      const BigInt constant = s - (bit_of(r, k) ? 1 : 0);
      Ciphertext e = add(enc_signed(constant, pk, tp.rng1), alpha[k], pk);
      e = add(e, mul_const(suffix, 3, pk), pk);
      terms.push_back(e);
      suffix = add(suffix, w[k], pk);
    }
    terms.push_back(add(enc(1 - delta_a, pk, tp.rng1), suffix, pk));

    for (auto& t : terms) {
      t = rerandomize(mul_const(t, rand_unit(pk.P, tp.rng1), pk), pk, tp.rng1);
    }
    for (std::size_t i = terms.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rand_below(BigInt(static_cast<unsigned long>(i)), tp.rng1).get_ui());
      std::swap(terms[i - 1], terms[j]);
    }
    for (const auto& t : terms) send_ct(tp.net, tp.p1, tp.p2, "compare/term", t, pk);
    const int t1 = (bit_of(r, L) ? 1 : 0) ^ delta_a;
    tp.net.send(tp.p1, tp.p2, "compare/t1", Bytes{static_cast<std::uint8_t>(t1)});
  }

  ComparisonOutcome out;
  {
    auto ops = tp.net.acting_as(tp.p2);
    bool any_zero = false;
    for (std::size_t i = 0; i <= L; ++i) {
      if (dec(recv_ct(tp.net, tp.p2, tp.p1, "compare/term", pk), tp.key2) == 0) any_zero = true;
    }
    const Envelope t1 = tp.net.receive(tp.p2, tp.p1, "compare/t1");
    if (t1.payload.size() != 1 || t1.payload[0] > 1) {
      throw Error(ErrorCode::ProtocolAbort, "malformed 'compare/t1'");
    }
    out.tau = (bit_of(z, L) ? 1 : 0) ^ (any_zero ? 1 : 0) ^ t1.payload[0];
  }
  out.messages = tp.net.ledger().sent - sent_before;
  return out;
}

Ciphertext encrypted_max(TwoParty& tp, const Ciphertext& zeta, const Ciphertext& lower, int l) {
  return encrypted_extremum(tp, zeta, lower, l, Extremum::Max);
}

Ciphertext encrypted_min(TwoParty& tp, const Ciphertext& zeta, const Ciphertext& upper, int l) {
  return encrypted_extremum(tp, zeta, upper, l, Extremum::Min);
}

Ciphertext key_switch(TwoParty& tp, const Ciphertext& u, const PaillierPublicKey& target) {
  const PaillierPublicKey& pk = tp.key2.pub;
  if (target.P <= 2 * pk.P) {
    throw Error(ErrorCode::PrecisionOverflow, "key switch needs target modulus > 2 P");
  }
  tp.net.begin_session("keyswitch");
  BigInt t;
  {
    auto ops = tp.net.acting_as(tp.p1);
    t = rand_below(pk.P, tp.rng1);
    send_ct(tp.net, tp.p1, tp.p2, "keyswitch/masked", add(u, enc(t, pk, tp.rng1, u.scale), pk), pk);
  }
  {
    auto ops = tp.net.acting_as(tp.p2);
    const Ciphertext masked = recv_ct(tp.net, tp.p2, tp.p1, "keyswitch/masked", pk);
    const BigInt v = dec(masked, tp.key2);
    send_ct(tp.net, tp.p2, tp.p1, "keyswitch/reenc", enc(v, target, tp.rng2, u.scale), target);
  }
  auto ops = tp.net.acting_as(tp.p1);
  const Ciphertext reenc = recv_ct(tp.net, tp.p1, tp.p2, "keyswitch/reenc", target);
  return add(reenc, enc(mod_floor(-t, target.P), target, tp.rng1, u.scale), target);
}

BigInt key_switch_lift(const BigInt& target_plain, const BigInt& target_P, const BigInt& source_P) {
  BigInt w = mod_floor(target_plain, target_P);
  if (2 * w > target_P) w -= target_P;  // v - t in (-P, P)
  w = mod_floor(w, source_P);
  if (2 * w > source_P) w -= source_P;
  return w;
}

}  // namespace encctl
