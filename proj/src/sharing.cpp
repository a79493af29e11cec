#include "encctl/sharing.hpp"

namespace encctl {

std::pair<Share, Share> split2_with_pad(const BigInt& z, const BigInt& phi, const BigInt& r) {
  if (phi < 2) throw Error(ErrorCode::OutOfRange, "phi must be >= 2");
  if (z < 0 || z >= phi) throw Error(ErrorCode::MessageOutOfRange, z.get_str() + " not in [0, phi)");
  return {Share{mod_floor(z + r, phi), phi, 1}, Share{mod_floor(r, phi), phi, 2}};
}

std::pair<Share, Share> split2(const BigInt& z, const BigInt& phi, Rng& rng) {
  if (phi < 2) throw Error(ErrorCode::OutOfRange, "phi must be >= 2");
  return split2_with_pad(z, phi, rand_below(phi, rng));
}

BigInt reconstruct(const Share& c, const Share& r) {
  if (c.phi != r.phi) throw Error(ErrorCode::ModulusMismatch, "shares over different moduli");
  return mod_floor(c.residue - r.residue, c.phi);
}

std::vector<Share> shares_of_zero(int count, const BigInt& phi, Rng& rng) {
  if (count < 2) throw Error(ErrorCode::OutOfRange, "shares_of_zero needs count >= 2");
  std::vector<Share> out;
  out.reserve(static_cast<std::size_t>(count));
  BigInt sum = 0;
  for (int i = 0; i + 1 < count; ++i) {
    BigInt r = rand_below(phi, rng);
    sum += r;
    out.push_back(Share{std::move(r), phi, i});
  }
  out.push_back(Share{mod_floor(-sum, phi), phi, count - 1});
  return out;
}

}  // namespace encctl
