#pragma once

#include <optional>
#include <span>

#include "qwalk/numerics.hpp"

namespace qwalk {

/// Angles of the general two-state coin: theta in [0, 2pi), phi1 and phi2 in
/// [0, pi).
struct CoinParams {
  double theta = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;

  /// Throws ContractError when an angle is outside its range.
  void validate() const;
  bool operator==(const CoinParams&) const = default;
};

/// A unitary on coin space of dimension 2^n.
class CoinOperator {
 public:
  /// Wraps an explicit matrix; throws unless it is unitary (defect <= 1e-12)
  /// with power-of-two dimension.
  explicit CoinOperator(ComplexMatrix matrix);

  const ComplexMatrix& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  /// Walk dimension n (dim == 2^n).
  int walk_dimension() const;
  /// Set when the coin came from build_coin.
  const std::optional<CoinParams>& params() const { return params_; }

  CoinOperator adjoint() const;

 private:
  friend CoinOperator build_coin(const CoinParams& p);
  CoinOperator(ComplexMatrix matrix, CoinParams p);

  ComplexMatrix matrix_;
  std::optional<CoinParams> params_;
};

/// [[cos t, e^{i p1} sin t], [e^{i p2} sin t, -e^{i(p1+p2)} cos t]]
CoinOperator build_coin(const CoinParams& p);

/// Intervention coin [[0, e^{i p1}], [-e^{i p2}, 0]].
CoinOperator build_g(double phi1, double phi2);

/// D = C^dagger G. For matched phases D is Hermitian and D D = I.
CoinOperator build_d(const CoinOperator& c, const CoinOperator& g);

/// Kronecker product in list order.
CoinOperator tensor_coin(std::span<const CoinOperator> parts);

CoinOperator hadamard_coin();

/// 2|s><s| - I on dimension `dim`, |s> the uniform superposition.
CoinOperator grover_coin(Eigen::Index dim);

}  // namespace qwalk
