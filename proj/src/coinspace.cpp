#include "qwalk/coinspace.hpp"

#include <numbers>
#include <string>

namespace qwalk {

namespace {

constexpr double kPi = std::numbers::pi;

void check_angle(const char* name, double value, double upper) {
  if (!(value >= 0.0 && value < upper)) {
    throw ContractError(std::string("coin parameter ") + name + " = " + std::to_string(value) +
                        " outside [0, " + std::to_string(upper) + ")");
  }
}

}  // namespace

void CoinParams::validate() const {
  check_angle("theta", theta, 2 * kPi);
  check_angle("phi1", phi1, kPi);
  check_angle("phi2", phi2, kPi);
}

CoinOperator::CoinOperator(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw DimensionError("coin matrix is not square");
  if (!is_power_of_two(matrix_.rows()) || matrix_.rows() < 2) {
    throw ContractError("coin dimension " + std::to_string(matrix_.rows()) +
                        " is not a power of two >= 2");
  }
  const double defect = unitarity_defect(matrix_);
  if (defect > kUnitaryTol) {
    throw ContractError("coin matrix is not unitary (defect " + std::to_string(defect) + ")");
  }
}

CoinOperator::CoinOperator(ComplexMatrix matrix, CoinParams p) : CoinOperator(std::move(matrix)) {
  params_ = p;
}

int CoinOperator::walk_dimension() const {
  int n = 0;
  for (Eigen::Index d = dim(); d > 1; d >>= 1) ++n;
  return n;
}

CoinOperator CoinOperator::adjoint() const { return CoinOperator(matrix_.adjoint()); }

CoinOperator build_coin(const CoinParams& p) {
  p.validate();
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  ComplexMatrix m(2, 2);
  m << c, std::polar(s, p.phi1),
       std::polar(s, p.phi2), -std::polar(c, p.phi1 + p.phi2);
  return CoinOperator(std::move(m), p);
}

CoinOperator build_g(double phi1, double phi2) {
  CoinParams{0.0, phi1, phi2}.validate();
  ComplexMatrix m(2, 2);
  m << 0.0, std::polar(1.0, phi1),
       -std::polar(1.0, phi2), 0.0;
  return CoinOperator(std::move(m));
}

CoinOperator build_d(const CoinOperator& c, const CoinOperator& g) {
  if (c.dim() != g.dim()) {
    throw DimensionError("build_d: coin dims " + std::to_string(c.dim()) + " and " +
                         std::to_string(g.dim()) + " differ");
  }
  return CoinOperator(c.matrix().adjoint() * g.matrix());
}

CoinOperator tensor_coin(std::span<const CoinOperator> parts) {
  if (parts.empty()) throw ContractError("tensor_coin: empty factor list");
  ComplexMatrix acc = parts.front().matrix();
  for (const auto& part : parts.subspan(1)) {
    const ComplexMatrix& b = part.matrix();
    ComplexMatrix next(acc.rows() * b.rows(), acc.cols() * b.cols());
    for (Eigen::Index i = 0; i < acc.rows(); ++i)
      for (Eigen::Index j = 0; j < acc.cols(); ++j)
        next.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = acc(i, j) * b;
    acc = std::move(next);
  }
  if (parts.size() == 1) return parts.front();
  return CoinOperator(std::move(acc));
}

CoinOperator hadamard_coin() { return build_coin({kPi / 4, 0.0, 0.0}); }

CoinOperator grover_coin(Eigen::Index dim) {
  const ComplexMatrix s = ComplexMatrix::Constant(dim, dim, 1.0 / static_cast<double>(dim));
  return CoinOperator(2.0 * s - ComplexMatrix::Identity(dim, dim));
}

}  // namespace qwalk
