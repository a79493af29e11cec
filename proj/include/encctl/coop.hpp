#pragma once

#include <functional>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "encctl/linctrl.hpp"
#include "encctl/sharing.hpp"

namespace encctl {

// Undirected, connected, simple graph on agents 0..M-1.
struct CommGraph {
  int M = 0;
  std::set<std::pair<int, int>> edges;  // stored with first < second

  static CommGraph from_edges(int M, const std::vector<std::pair<int, int>>& edges);
  static CommGraph path(int M);
  static CommGraph star(int leaves);  // center 0

  void validate() const;
  bool adjacent(int i, int j) const;
  std::vector<int> neighbors(int i) const;  // ascending
};

// Agent-partitioned dynamics; A blocks absent from the map are zero.
struct CoopPlant {
  CommGraph graph;
  std::vector<int> n, m;
  std::map<std::pair<int, int>, Mat> A;
  std::vector<Mat> B;
  Vec x0;  // stacked
  double noise = 0;

  void validate() const;
  LinearPlant stacked() const;
};

// K^(ij) present only for i == j and edges (i, j).
struct SparseGain {
  std::vector<int> n, m;
  std::map<std::pair<int, int>, Mat> K;

  void validate(const CommGraph& g) const;
  const Mat* block(int i, int j) const;
  Mat dense() const;
};

std::vector<Vec> split_agents(const Vec& x, const std::vector<int>& dims);
Vec stack_agents(const std::vector<Vec>& parts);

// u^(i) = K^(ii) x^(i) + sum_{j in N_i} v^(ij), v^(ij) = K^(ij) x^(j).
std::vector<Vec> plain_coop_step(const CommGraph& g, const SparseGain& K,
                                 const std::vector<Vec>& xs);

enum class CoopVariant { Plain, Shares, Encrypted, Masked };
enum class ZeroShareSource { Central, Decentralized };

struct ObservabilityReport {
  std::vector<int> individual_rank;  // per neighbor j: rank of (A^(jj), K^(ij))
  std::vector<int> individual_dim;
  int aggregated_rank = 0;
  int aggregated_dim = 0;

  bool aggregated_observable() const { return aggregated_rank == aggregated_dim; }
};

// What agent i can reconstruct about its neighbors from w^(i) over time, for
// dynamically independent neighbors.
ObservabilityReport observability_probe(const std::vector<Mat>& A_jj,
                                        const std::vector<Mat>& K_ij);

int observability_rank(const Mat& A, const Mat& C);

class CoopController final : public Controller {
 public:
  // Called with (agent, residue, modulus) for every decrypted masked message
  // received by an agent with at least two neighbors.
  using MaskedObserver = std::function<void(int, const BigInt&, const BigInt&)>;

  CoopController(CoopPlant plant, SparseGain gain, CoopVariant variant, FixedPointCode code,
                 std::size_t bits_per_prime, Rng rng,
                 ZeroShareSource source = ZeroShareSource::Central);

  std::string scheme() const override;
  int n() const override { return total_n_; }
  int m() const override { return total_m_; }
  void setup(Network& net) override;
  Vec step(Network& net, const Vec& x) override;
  Vec oracle(const Vec& x) const override;
  double x_range() const override;
  bool encrypted() const override;
  std::vector<Secret> secrets(const Vec& x, const Vec& u) const override;
  std::vector<std::pair<PartyId, PartyId>> forbidden_pairs() const override;

  void set_masked_observer(MaskedObserver f) { observer_ = std::move(f); }
  // Agents whose masking degenerates (single neighbor).
  const std::vector<int>& warnings() const { return degenerate_; }
  // Steps on which some agent's masks did not sum to zero.
  std::uint64_t mask_sum_failures() const { return mask_failures_; }
  const PaillierKeypair& key(int i) const { return keys_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<Vec> step_plain(Network& net, const std::vector<Vec>& xs, bool shares);
  std::vector<Vec> step_encrypted(Network& net, const std::vector<Vec>& xs, bool masked);
  // pads[i][j] = r^(ij) for every agent i and neighbor j
  std::map<std::pair<int, int>, IntVec> central_pads(Network& net);
  std::map<std::pair<int, int>, IntVec> decentralized_pads(Network& net);

  CoopPlant plant_;
  SparseGain gain_;
  CoopVariant variant_;
  ZeroShareSource source_;
  FixedPointCode code_;
  std::vector<FixedPointCode> codes_;  // phi = P_i
  std::vector<PaillierKeypair> keys_;
  std::map<std::pair<int, int>, IntMat> Kq_;
  std::map<std::pair<int, int>, std::vector<std::vector<Ciphertext>>> enc_K_;  // held by agent j
  int total_n_ = 0, total_m_ = 0;
  std::vector<Rng> agent_rng_;
  Rng te_rng_;
  std::vector<int> degenerate_;
  std::uint64_t mask_failures_ = 0;
  MaskedObserver observer_;
};

}  // namespace encctl
