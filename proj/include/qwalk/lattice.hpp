#pragma once

#include <span>
#include <vector>

#include "qwalk/numerics.hpp"

namespace qwalk {

/// Cyclic lattice with a power-of-two number of sites per axis. Sites are
/// numbered row-major (axis 0 slowest); site index 0 is the origin and an
/// index i on an axis of extent N reads as coordinate i (i < N/2) or i - N.
class LatticeSpec {
 public:
  explicit LatticeSpec(std::vector<int> dims);
  static LatticeSpec line(int sites) { return LatticeSpec({sites}); }

  const std::vector<int>& dims() const { return dims_; }
  int ndim() const { return static_cast<int>(dims_.size()); }
  Eigen::Index sites() const { return sites_; }

  std::vector<int> coords(Eigen::Index site) const;
  /// Wraps each coordinate modulo its extent.
  Eigen::Index site_index(std::span<const int> coords) const;

  /// True when every axis holds at least 2*steps + 2 sites, so no amplitude
  /// launched from one site can wrap around within `steps` steps.
  bool emulates_line(int steps) const;

  bool operator==(const LatticeSpec&) const = default;

 private:
  std::vector<int> dims_;
  Eigen::Index sites_ = 0;
};

/// Coin index c moves the walker by (-1)^{b_i + 1} along axis i, b_i being bit
/// i of c. For one axis: c = 0 steps left, c = 1 steps right.
class DisplacementMap {
 public:
  explicit DisplacementMap(int ndim);

  int ndim() const { return ndim_; }
  Eigen::Index coin_dim() const { return Eigen::Index{1} << ndim_; }
  int operator()(Eigen::Index coin, int axis) const {
    return ((coin >> axis) & 1) != 0 ? +1 : -1;
  }
  /// v_c as a coin_dim x ndim integer table.
  Eigen::MatrixXi table() const;

 private:
  int ndim_;
};

class WalkerState;

namespace detail {
struct StateAccess;
}

/// Amplitudes over (coin index, site), stored as a coin_dim x sites matrix so
/// coin operators act by left multiplication. Normalized to 1e-12 on entry.
class WalkerState {
 public:
  WalkerState(LatticeSpec lattice, ComplexMatrix amps, int step_count = 0);

  /// |coin> (x) |site>.
  static WalkerState localized(LatticeSpec lattice, const ComplexVector& coin,
                               std::span<const int> coords);
  /// |coin> (x) sum_x position(x)|x>.
  static WalkerState product(LatticeSpec lattice, const ComplexVector& coin,
                             const ComplexVector& position);

  const LatticeSpec& lattice() const { return lattice_; }
  Eigen::Index coin_dim() const { return amps_.rows(); }
  const ComplexMatrix& amps() const { return amps_; }
  int step_count() const { return step_count_; }
  Complex amp(Eigen::Index coin, Eigen::Index site) const { return amps_(coin, site); }

  double norm_squared() const { return amps_.squaredNorm(); }
  /// Amplitudes flattened with index site * coin_dim + coin.
  ComplexVector flat() const { return amps_.reshaped(); }

 private:
  friend struct detail::StateAccess;
  struct Unchecked {};
  WalkerState(Unchecked, LatticeSpec lattice, ComplexMatrix amps, int step_count)
      : lattice_(std::move(lattice)), amps_(std::move(amps)), step_count_(step_count) {}

  LatticeSpec lattice_;
  ComplexMatrix amps_;
  int step_count_ = 0;
};

namespace detail {
/// Library-internal construction without the normalization check, for
/// results of norm-preserving maps.
struct StateAccess {
  static WalkerState make(LatticeSpec lattice, ComplexMatrix amps, int step_count) {
    return WalkerState(WalkerState::Unchecked{}, std::move(lattice), std::move(amps), step_count);
  }
  static ComplexMatrix& amps(WalkerState& s) { return s.amps_; }
  static void set_step_count(WalkerState& s, int t) { s.step_count_ = t; }
};
}  // namespace detail

}  // namespace qwalk
