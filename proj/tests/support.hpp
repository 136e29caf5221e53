#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <numbers>
#include <random>
#include <vector>

#include "qwalk/spectral.hpp"

namespace support {

/// True when every k-point of `lattice` gives a non-degenerate coin block.
inline bool nondegenerate_on_grid(const qwalk::CoinOperator& coin, const qwalk::LatticeSpec& lattice) {
  const qwalk::MomentumGrid grid(lattice);
  const qwalk::DisplacementMap disp(lattice.ndim());
  for (Eigen::Index point = 0; point < grid.points(); ++point) {
    const auto k = grid.momentum(point);
    const qwalk::ComplexMatrix ck = qwalk::build_ck(coin.matrix(), k, disp);
    try {
      qwalk::spectral_decompose(ck);
    } catch (const qwalk::DegenerateSpectrum&) {
      return false;
    }
  }
  return true;
}

/// Tensor product of n random two-state coins, redrawn until the momentum
/// blocks are non-degenerate everywhere on `lattice`.
inline qwalk::CoinOperator random_product_coin(int n, const qwalk::LatticeSpec& lattice, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> theta(0.1, 2 * std::numbers::pi - 0.1);
  std::uniform_real_distribution<double> phi(0.05, std::numbers::pi - 0.05);
  for (;;) {
    std::vector<qwalk::CoinOperator> parts;
    for (int i = 0; i < n; ++i) parts.push_back(qwalk::build_coin({theta(rng), phi(rng), phi(rng)}));
    qwalk::CoinOperator coin = qwalk::tensor_coin(parts);
    if (nondegenerate_on_grid(coin, lattice)) return coin;
  }
}

/// Random unitary with eigenphases at least `min_gap` apart.
inline qwalk::ComplexMatrix random_nondegenerate_unitary(Eigen::Index n, std::mt19937_64& rng, double min_gap = 1e-3) {
  for (;;) {
    std::normal_distribution<double> g;
    qwalk::ComplexMatrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = qwalk::Complex(g(rng), g(rng));
    const qwalk::ComplexMatrix h = (a + a.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<qwalk::ComplexMatrix> es(h);
    const qwalk::ComplexVector lambda =
        es.eigenvalues().unaryExpr([](double w) { return std::polar(1.0, w); });
    qwalk::RealVector phases = es.eigenvalues().unaryExpr([](double w) {
      return std::fmod(std::fmod(w, 2 * std::numbers::pi) + 2 * std::numbers::pi, 2 * std::numbers::pi);
    });
    if (qwalk::min_circular_gap(phases) > min_gap)
      return es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().adjoint();
  }
}

inline qwalk::WalkerState coin_basis_at_origin(const qwalk::LatticeSpec& lattice, Eigen::Index coin_dim,
                                               Eigen::Index coin) {
  qwalk::ComplexVector c = qwalk::ComplexVector::Zero(coin_dim);
  c(coin) = 1.0;
  const std::vector<int> origin(static_cast<std::size_t>(lattice.ndim()), 0);
  return qwalk::WalkerState::localized(lattice, c, origin);
}

}  // namespace support
