#pragma once

#include <utility>
#include <vector>

#include "encctl/common.hpp"
#include "encctl/modmath.hpp"

namespace encctl {

struct Share {
  BigInt residue;
  BigInt phi;
  int index = 0;
};

// (c, r) with c = z + r mod phi and r uniform.
std::pair<Share, Share> split2(const BigInt& z, const BigInt& phi, Rng& rng);
std::pair<Share, Share> split2_with_pad(const BigInt& z, const BigInt& phi, const BigInt& r);
BigInt reconstruct(const Share& c, const Share& r);

// `count` residues, uniform subject to summing to zero mod phi.
std::vector<Share> shares_of_zero(int count, const BigInt& phi, Rng& rng);

}  // namespace encctl
