#pragma once

// Dense complex linear algebra used by every other module: unitarity checks,
// Hermitian/unitary eigendecomposition, power-of-two FFTs and global-phase
// insensitive comparisons. Everything is templated on the real scalar and
// header-only; the rest of the library instantiates it for double.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/errors.hpp"

namespace qwalk {

template <typename Real>
using ComplexMatrixT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using ComplexVectorT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RealVectorT = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using ComplexMatrix = ComplexMatrixT<double>;
using ComplexVector = ComplexVectorT<double>;
using RealVector = RealVectorT<double>;

inline constexpr double kUnitaryTol = 1e-12;
inline constexpr double kStateTol = 1e-12;
inline constexpr double kDegeneracyTol = 1e-8;
inline constexpr double kEigenResidualTol = 1e-10;
inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr int kPencilRedraws = 5;
inline constexpr std::uint64_t kDefaultSeed = 20190101;

/// max_ij |(M^dagger M - I)_ij|.
template <typename Derived>
typename Derived::RealScalar unitarity_defect(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("unitarity_defect: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected square");
  }
  using Plain = typename Derived::PlainObject;
  const Plain gram = m.adjoint() * m;
  return (gram - Plain::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& m, double tol = kUnitaryTol) {
  return m.rows() == m.cols() && unitarity_defect(m) <= tol;
}

/// Largest entrywise |M - M^dagger|.
template <typename Derived>
typename Derived::RealScalar hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) throw DimensionError("hermiticity_defect: matrix is not square");
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Eigenvalues (or eigenphases, for unitary input) with matching orthonormal
/// eigenvectors stored column-wise in the same order.
///
/// For the Hermitian solver `phases` holds the real eigenvalues; for the
/// unitary solver it holds angles in [0, 2pi).
template <typename Real>
struct EigenSystemT {
  RealVectorT<Real> phases;
  ComplexMatrixT<Real> vectors;

  Eigen::Index size() const { return phases.size(); }
  ComplexVectorT<Real> vector(Eigen::Index j) const { return vectors.col(j); }

  /// sum_j e^{i w_j} |phi_j><phi_j|
  ComplexMatrixT<Real> reconstruct_unitary() const {
    const ComplexVectorT<Real> eig =
        phases.unaryExpr([](Real w) { return std::polar(Real(1), w); });
    return vectors * eig.asDiagonal() * vectors.adjoint();
  }

  /// sum_j lambda_j |phi_j><phi_j|
  ComplexMatrixT<Real> reconstruct_hermitian() const {
    return vectors * phases.template cast<std::complex<Real>>().asDiagonal() * vectors.adjoint();
  }
};

using EigenSystem = EigenSystemT<double>;

namespace detail {

template <typename Real>
Real off_diagonal_norm(const ComplexMatrixT<Real>& a) {
  Real sum = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) sum += std::norm(a(i, j));
  return std::sqrt(sum);
}

template <typename Real>
void sort_ascending(EigenSystemT<Real>& es) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(es.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return es.phases(a) < es.phases(b); });
  EigenSystemT<Real> sorted{RealVectorT<Real>(es.size()),
                            ComplexMatrixT<Real>(es.vectors.rows(), es.vectors.cols())};
  for (std::size_t j = 0; j < order.size(); ++j) {
    sorted.phases(static_cast<Eigen::Index>(j)) = es.phases(order[j]);
    sorted.vectors.col(static_cast<Eigen::Index>(j)) = es.vectors.col(order[j]);
  }
  es = std::move(sorted);
}

template <typename Real>
Real wrap_phase(Real w) {
  constexpr Real two_pi = 2 * std::numbers::pi_v<Real>;
  w = std::fmod(w, two_pi);
  if (w < 0) w += two_pi;
  // e^{i w} = 1 must read as phase 0, not 2pi - eps
  if (w >= two_pi - Real(1e-12)) w = 0;
  return w;
}

}  // namespace detail

/// Rotate each column so that its first component with modulus above 1e-10
/// is real and positive.
template <typename Real>
void fix_gauge(ComplexMatrixT<Real>& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      const std::complex<Real> c = vectors(i, j);
      if (std::abs(c) > Real(1e-10)) {
        vectors.col(j) *= std::conj(c) / std::abs(c);
        vectors(i, j) = std::abs(c);
        break;
      }
    }
  }
}

/// Smallest distance between two phases measured along the unit circle
/// (including the wrap-around gap). +inf for fewer than two phases.
template <typename Real>
Real min_circular_gap(const RealVectorT<Real>& phases) {
  constexpr Real two_pi = 2 * std::numbers::pi_v<Real>;
  if (phases.size() < 2) return std::numeric_limits<Real>::infinity();
  std::vector<Real> p(phases.data(), phases.data() + phases.size());
  for (auto& w : p) w = detail::wrap_phase(w);
  std::sort(p.begin(), p.end());
  Real gap = p.front() + two_pi - p.back();
  for (std::size_t j = 1; j < p.size(); ++j) gap = std::min(gap, p[j] - p[j - 1]);
  return gap;
}

/// Cyclic complex Jacobi diagonalization of a Hermitian matrix.
///
/// Sweeps over all (p, q) pairs until the off-diagonal Frobenius norm drops to
/// 1e-13 * max(1, ||M||_F). Eigenvalues come back ascending.
template <typename Real>
EigenSystemT<Real> hermitian_eigendecompose(const ComplexMatrixT<Real>& m, Real tol) {
  if (m.rows() != m.cols()) throw DimensionError("hermitian_eigendecompose: matrix is not square");
  if (hermiticity_defect(m) > tol) {
    throw ContractError("hermitian_eigendecompose: matrix is not Hermitian within tolerance");
  }
  const Eigen::Index n = m.rows();
  ComplexMatrixT<Real> a = (m + m.adjoint()) / Real(2);
  ComplexMatrixT<Real> v = ComplexMatrixT<Real>::Identity(n, n);
  const Real target = Real(1e-13) * std::max(Real(1), a.norm());

  int sweep = 0;
  while (detail::off_diagonal_norm(a) > target) {
    if (sweep++ == kJacobiMaxSweeps) {
      throw ConvergenceError("hermitian_eigendecompose: no convergence after " +
                             std::to_string(kJacobiMaxSweeps) + " sweeps");
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) == Real(0)) continue;
        Eigen::JacobiRotation<std::complex<Real>> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        v.applyOnTheRight(p, q, rot);
        a(p, q) = a(q, p) = 0;
        a(p, p) = std::real(a(p, p));
        a(q, q) = std::real(a(q, q));
      }
    }
  }

  EigenSystemT<Real> es{a.diagonal().real(), std::move(v)};
  detail::sort_ascending(es);
  return es;
}

/// Eigendecomposition of a unitary matrix through a Hermitian pencil.
///
/// B = a (M + M^dagger) + b i (M - M^dagger) shares M's eigenvectors whenever
/// M is non-degenerate; (a, b) = (cos g, sin g) with g drawn from `seed`.
/// Eigenphases are recovered as arg <v|M|v>, wrapped to [0, 2pi), sorted
/// ascending, and each vector is gauge-fixed. A draw whose eigenpairs fail
/// the residual check (clustered pencil values) is redrawn up to five times.
///
/// In strict mode any circular phase gap <= 1e-8 raises DegenerateSpectrum.
template <typename Real>
EigenSystemT<Real> unitary_eigendecompose(const ComplexMatrixT<Real>& m, bool strict,
                                          std::uint64_t seed = kDefaultSeed) {
  if (m.rows() != m.cols()) throw DimensionError("unitary_eigendecompose: matrix is not square");
  if (unitarity_defect(m) > Real(kUnitaryTol)) {
    throw ContractError("unitary_eigendecompose: matrix is not unitary (defect " +
                        std::to_string(static_cast<double>(unitarity_defect(m))) + ")");
  }
  using C = std::complex<Real>;
  const Eigen::Index n = m.rows();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Real> angle(0, 2 * std::numbers::pi_v<Real>);

  const ComplexMatrixT<Real> sym = m + m.adjoint();
  const ComplexMatrixT<Real> antisym = C(0, 1) * (m - m.adjoint());

  std::optional<EigenSystemT<Real>> fallback;
  Real fallback_residual = std::numeric_limits<Real>::infinity();
  for (int attempt = 0; attempt <= kPencilRedraws; ++attempt) {
    const Real g = angle(rng);
    ComplexMatrixT<Real> pencil = std::cos(g) * sym + std::sin(g) * antisym;
    pencil = (pencil + pencil.adjoint()) / Real(2);
    const EigenSystemT<Real> hes = hermitian_eigendecompose<Real>(pencil, Real(1e-9));

    EigenSystemT<Real> es{RealVectorT<Real>(n), hes.vectors};
    Real residual = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const ComplexVectorT<Real> mv = m * es.vectors.col(j);
      const C rayleigh = es.vectors.col(j).dot(mv);
      es.phases(j) = detail::wrap_phase(std::arg(rayleigh));
      residual = std::max(residual, (mv - std::polar(Real(1), es.phases(j)) * es.vectors.col(j))
                                        .template lpNorm<Eigen::Infinity>());
    }

    // pencil values closer than 1e-3 for eigenpairs with distinct phases
    // mean the eigenvectors may be mixed; prefer another draw
    bool clustered = false;
    for (Eigen::Index j = 1; j < n && !clustered; ++j) {
      const Real pencil_gap = hes.phases(j) - hes.phases(j - 1);
      RealVectorT<Real> pair(2);
      pair << es.phases(j), es.phases(j - 1);
      if (pencil_gap < Real(1e-3) && min_circular_gap(pair) > Real(kDegeneracyTol)) clustered = true;
    }

    if (residual <= Real(kEigenResidualTol)) {
      if (!clustered) {
        fallback = std::move(es);
        break;
      }
      if (residual < fallback_residual) {
        fallback_residual = residual;
        fallback = std::move(es);
      }
    }
  }
  if (!fallback) {
    throw DegenerateSpectrum(
        "unitary_eigendecompose: eigenvectors could not be resolved after " +
        std::to_string(kPencilRedraws) + " pencil redraws");
  }

  EigenSystemT<Real> es = std::move(*fallback);
  detail::sort_ascending(es);
  fix_gauge(es.vectors);
  if (strict) {
    const Real gap = min_circular_gap(es.phases);
    if (gap <= Real(kDegeneracyTol)) {
      throw DegenerateSpectrum("unitary_eigendecompose: eigenphases are degenerate (min gap " +
                               std::to_string(static_cast<double>(gap)) + ")");
    }
  }
  return es;
}

inline bool is_power_of_two(long long n) { return n > 0 && (n & (n - 1)) == 0; }

/// In-place unnormalized radix-2 transform of `n` elements spaced `stride`
/// apart. Forward uses e^{-2 pi i k x / n}.
template <typename Real>
void fft_radix2(std::complex<Real>* data, std::ptrdiff_t n, std::ptrdiff_t stride, bool inverse) {
  if (!is_power_of_two(n)) {
    throw UnsupportedSizeError("fft: length " + std::to_string(n) + " is not a power of two");
  }
  auto at = [&](std::ptrdiff_t i) -> std::complex<Real>& { return data[i * stride]; };
  for (std::ptrdiff_t i = 1, j = 0; i < n; ++i) {
    std::ptrdiff_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(at(i), at(j));
  }
  const Real sign = inverse ? Real(1) : Real(-1);
  for (std::ptrdiff_t len = 2; len <= n; len <<= 1) {
    const std::ptrdiff_t half = len / 2;
    for (std::ptrdiff_t k = 0; k < half; ++k) {
      const std::complex<Real> w =
          std::polar(Real(1), sign * 2 * std::numbers::pi_v<Real> * Real(k) / Real(len));
      for (std::ptrdiff_t start = 0; start < n; start += len) {
        const std::complex<Real> u = at(start + k);
        const std::complex<Real> t = w * at(start + k + half);
        at(start + k) = u + t;
        at(start + k + half) = u - t;
      }
    }
  }
}

/// Unitary-normalized n-dimensional DFT over a row-major grid (axis 0 slowest).
template <typename Real>
ComplexVectorT<Real> fft_nd(const ComplexVectorT<Real>& v, std::span<const int> shape, bool inverse) {
  long long total = 1;
  for (int extent : shape) {
    if (!is_power_of_two(extent)) {
      throw UnsupportedSizeError("fft_nd: extent " + std::to_string(extent) +
                                 " is not a power of two");
    }
    total *= extent;
  }
  if (shape.empty() || total != v.size()) {
    throw DimensionError("fft_nd: shape has " + std::to_string(total) + " sites, vector has " +
                         std::to_string(v.size()));
  }
  ComplexVectorT<Real> out = v;
  std::ptrdiff_t stride = total;
  for (int extent : shape) {
    stride /= extent;
    const std::ptrdiff_t block = stride * extent;
    for (std::ptrdiff_t outer = 0; outer < total; outer += block)
      for (std::ptrdiff_t inner = 0; inner < stride; ++inner)
        fft_radix2(out.data() + outer + inner, extent, stride, inverse);
  }
  out /= std::sqrt(static_cast<Real>(total));
  return out;
}

/// |<a|b>|, equal to 1 iff the states agree up to a global phase. Works on any
/// equally-shaped dense operands (vectors or coin x site amplitude blocks).
template <typename DerivedA, typename DerivedB>
typename DerivedA::RealScalar phase_fidelity(const Eigen::MatrixBase<DerivedA>& a,
                                             const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("phase_fidelity: operand shapes differ");
  }
  using Real = typename DerivedA::RealScalar;
  const Real f = std::abs(a.conjugate().cwiseProduct(b).sum());
  return std::min(f, Real(1));
}

}  // namespace qwalk
