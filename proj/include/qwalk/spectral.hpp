#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qwalk/walk.hpp"

namespace qwalk {

/// k-points k_i = 2 pi j_i / N_i of a lattice, indexed like its sites.
class MomentumGrid {
 public:
  explicit MomentumGrid(LatticeSpec lattice) : lattice_(std::move(lattice)) {}

  const LatticeSpec& lattice() const { return lattice_; }
  Eigen::Index points() const { return lattice_.sites(); }
  std::vector<double> momentum(Eigen::Index point) const;

 private:
  LatticeSpec lattice_;
};

/// Momentum-space coin block Diag(e^{-i k . v_c}) C.
ComplexMatrix build_ck(const ComplexMatrix& coin, std::span<const double> k,
                       const DisplacementMap& displacement);

/// Gauge-fixed, ascending, non-degenerate eigensystem of a coin block.
struct SpectralCoin {
  RealVector phases;
  ComplexMatrix vectors;

  Eigen::Index dim() const { return phases.size(); }
  /// e^{i w_j t}
  ComplexVector eigenvalue_powers(int t) const;
  ComplexMatrix reconstruct() const;
};

/// Throws DegenerateSpectrum when the minimum circular phase gap is <= 1e-8.
SpectralCoin spectral_decompose(const ComplexMatrix& ck, std::uint64_t seed = kDefaultSeed);

/// Cyclic shift of the eigenbasis: |phi_j> -> |phi_{j+1}>, |phi_last> -> |phi_1>.
ComplexMatrix build_gk(const SpectralCoin& sc);

/// sum_j e^{i w_j t} |phi_j><phi_j|
ComplexMatrix power_via_spectrum(const SpectralCoin& sc, int t);

/// ((C_k)^t G_k)^m term by term from the eigenbasis products, 1 <= m < dim.
/// m = 1 is the single-product form, m = dim - 1 the reversal precursor.
ComplexMatrix closed_form_m_power(const SpectralCoin& sc, int t, int m);

/// ((C_k)^t G_k)^{dim-1} (C_k)^t written out in the eigenbasis before the
/// phase products are collapsed.
ComplexMatrix reversal_product_form(const SpectralCoin& sc, int t);

/// For eigenbasis position j (1-based): (prod_{u<j} e^{i w_u t})
/// (prod_{v=0}^{dim-j-1} e^{i w_{dim-v} t}) e^{i w_j t}.
Complex phase_product_for(const SpectralCoin& sc, int t, int j);

struct ReversalCheck {
  /// prod_l e^{i w_l t}
  Complex phase{1.0, 0.0};
  /// max |((C_k)^t G_k)^{dim-1} (C_k)^t - phase G_k^dagger| from direct products
  double defect = 0.0;
  /// max_j |phase_product_for(j) - phase|
  double phase_identity_defect = 0.0;
  /// max |reversal_product_form - direct product|
  double product_form_defect = 0.0;
};

ReversalCheck verify_reversal_form(const SpectralCoin& sc, int t);

/// Coin-space amplitudes per k-point (coin_dim x points).
ComplexMatrix to_momentum(const WalkerState& s);
WalkerState from_momentum(const LatticeSpec& lattice, const ComplexMatrix& amps_k, int step_count);

enum class ProtocolOp { Gk, Ck };

struct ProtocolOptions {
  std::uint64_t seed = kDefaultSeed;
  /// When set, every eigenvector is multiplied by a random phase drawn from
  /// this seed before G_k is built.
  std::optional<std::uint64_t> gauge_seed;
};

struct ProtocolResult {
  WalkerState final_state;
  double fidelity = 0.0;
  /// <psi0|psi_final>
  Complex overlap{0.0, 0.0};
  int total_steps = 0;
  std::vector<ProtocolOp> operations;
  /// prod_j e^{i w_j l} for every k-point
  std::vector<Complex> phases;
  /// max over k of |psi_final(k) - phase_k psi0(k)|
  double per_k_defect = 0.0;
};

/// Apply G_k, (C_k)^l, then (G_k, (C_k)^l) 2^n - 1 more times at every k.
/// Throws ProtocolInapplicable naming the first degenerate k.
ProtocolResult run_protocol(const WalkerState& psi0, const CoinOperator& coin, int l,
                            const ProtocolOptions& options = {});

/// Momentum backend: per-k products of C_k, with build_ck(G) at V steps and
/// the pure coin operation G_k at Gk steps.
WalkerState momentum_evolve(const WalkerState& psi0, const CoinOperator& coin, int steps,
                            const InterventionSchedule& schedule,
                            const std::optional<CoinOperator>& intervention = std::nullopt,
                            std::uint64_t seed = kDefaultSeed);

}  // namespace qwalk
