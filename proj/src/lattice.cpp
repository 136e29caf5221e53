#include "qwalk/lattice.hpp"

#include <string>

namespace qwalk {

LatticeSpec::LatticeSpec(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw ContractError("lattice needs at least one axis");
  sites_ = 1;
  for (int extent : dims_) {
    if (!is_power_of_two(extent) || extent < 2) {
      throw ContractError("lattice extent " + std::to_string(extent) +
                          " is not a power of two >= 2");
    }
    sites_ *= extent;
  }
}

std::vector<int> LatticeSpec::coords(Eigen::Index site) const {
  std::vector<int> out(dims_.size());
  for (int axis = ndim() - 1; axis >= 0; --axis) {
    const int extent = dims_[static_cast<std::size_t>(axis)];
    const int idx = static_cast<int>(site % extent);
    site /= extent;
    out[static_cast<std::size_t>(axis)] = idx < extent / 2 ? idx : idx - extent;
  }
  return out;
}

Eigen::Index LatticeSpec::site_index(std::span<const int> coords) const {
  if (coords.size() != dims_.size()) {
    throw DimensionError("site_index: got " + std::to_string(coords.size()) +
                         " coordinates for a " + std::to_string(dims_.size()) + "-axis lattice");
  }
  Eigen::Index site = 0;
  for (std::size_t axis = 0; axis < dims_.size(); ++axis) {
    const int extent = dims_[axis];
    const int wrapped = ((coords[axis] % extent) + extent) % extent;
    site = site * extent + wrapped;
  }
  return site;
}

bool LatticeSpec::emulates_line(int steps) const {
  for (int extent : dims_)
    if (extent < 2 * steps + 2) return false;
  return true;
}

DisplacementMap::DisplacementMap(int ndim) : ndim_(ndim) {
  if (ndim < 1 || ndim > 16) throw ContractError("displacement map: bad walk dimension");
}

Eigen::MatrixXi DisplacementMap::table() const {
  Eigen::MatrixXi t(coin_dim(), ndim_);
  for (Eigen::Index c = 0; c < coin_dim(); ++c)
    for (int axis = 0; axis < ndim_; ++axis) t(c, axis) = (*this)(c, axis);
  return t;
}

WalkerState::WalkerState(LatticeSpec lattice, ComplexMatrix amps, int step_count)
    : lattice_(std::move(lattice)), amps_(std::move(amps)), step_count_(step_count) {
  if (amps_.cols() != lattice_.sites()) {
    throw DimensionError("walker state has " + std::to_string(amps_.cols()) +
                         " site columns, lattice has " + std::to_string(lattice_.sites()));
  }
  if (amps_.rows() < 1) throw DimensionError("walker state has no coin components");
  const double defect = std::abs(amps_.squaredNorm() - 1.0);
  if (defect > kStateTol) {
    throw ContractError("walker state is not normalized (|norm^2 - 1| = " +
                        std::to_string(defect) + ")");
  }
}

WalkerState WalkerState::localized(LatticeSpec lattice, const ComplexVector& coin,
                                   std::span<const int> coords) {
  ComplexMatrix amps = ComplexMatrix::Zero(coin.size(), lattice.sites());
  amps.col(lattice.site_index(coords)) = coin;
  return WalkerState(std::move(lattice), std::move(amps));
}

WalkerState WalkerState::product(LatticeSpec lattice, const ComplexVector& coin,
                                 const ComplexVector& position) {
  if (position.size() != lattice.sites()) {
    throw DimensionError("product state: position vector does not match lattice");
  }
  ComplexMatrix amps = coin * position.transpose();
  return WalkerState(std::move(lattice), std::move(amps));
}

}  // namespace qwalk
