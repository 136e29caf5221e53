#include "qwalk/spectral.hpp"

#include <numbers>
#include <random>
#include <sstream>
#include <string>

namespace qwalk {

namespace {

std::string format_k(std::span<const double> k) {
  std::ostringstream os;
  os.precision(17);
  os << "k = (";
  for (std::size_t i = 0; i < k.size(); ++i) os << (i ? ", " : "") << k[i];
  os << ")";
  return os.str();
}

ComplexMatrix matrix_power(const ComplexMatrix& m, int t) {
  ComplexMatrix out = ComplexMatrix::Identity(m.rows(), m.cols());
  for (int i = 0; i < t; ++i) out = m * out;
  return out;
}

// 1-based product of lambda_l over l in [first, last]
Complex range_product(const ComplexVector& lambda, int first, int last) {
  Complex p{1.0, 0.0};
  for (int l = first; l <= last; ++l) p *= lambda(l - 1);
  return p;
}

void check_walker_coin(const WalkerState& psi0, const CoinOperator& coin, const char* who) {
  if (coin.dim() != psi0.coin_dim() ||
      coin.dim() != (Eigen::Index{1} << psi0.lattice().ndim())) {
    throw ContractError(std::string(who) + ": coin dimension " + std::to_string(coin.dim()) +
                        " does not fit a walker with coin dimension " +
                        std::to_string(psi0.coin_dim()) + " on a " +
                        std::to_string(psi0.lattice().ndim()) + "-axis lattice");
  }
}

SpectralCoin decompose_at(const ComplexMatrix& ck, std::span<const double> k, std::uint64_t seed) {
  try {
    return spectral_decompose(ck, seed);
  } catch (const DegenerateSpectrum& e) {
    throw ProtocolInapplicable("degenerate coin block at " + format_k(k) + ": " + e.what());
  }
}

}  // namespace

std::vector<double> MomentumGrid::momentum(Eigen::Index point) const {
  std::vector<double> k(lattice_.dims().size());
  for (int axis = lattice_.ndim() - 1; axis >= 0; --axis) {
    const int extent = lattice_.dims()[static_cast<std::size_t>(axis)];
    k[static_cast<std::size_t>(axis)] =
        2.0 * std::numbers::pi * static_cast<double>(point % extent) / extent;
    point /= extent;
  }
  return k;
}

ComplexMatrix build_ck(const ComplexMatrix& coin, std::span<const double> k,
                       const DisplacementMap& displacement) {
  if (coin.rows() != coin.cols() || coin.rows() != displacement.coin_dim() ||
      static_cast<int>(k.size()) != displacement.ndim()) {
    throw ContractError("build_ck: coin, momentum and displacement map dimensions disagree");
  }
  ComplexVector phase(coin.rows());
  for (Eigen::Index c = 0; c < coin.rows(); ++c) {
    double kv = 0.0;
    for (int axis = 0; axis < displacement.ndim(); ++axis)
      kv += k[static_cast<std::size_t>(axis)] * displacement(c, axis);
    phase(c) = std::polar(1.0, -kv);
  }
  return phase.asDiagonal() * coin;
}

ComplexVector SpectralCoin::eigenvalue_powers(int t) const {
  return phases.unaryExpr([t](double w) { return std::polar(1.0, w * t); });
}

ComplexMatrix SpectralCoin::reconstruct() const { return power_via_spectrum(*this, 1); }

SpectralCoin spectral_decompose(const ComplexMatrix& ck, std::uint64_t seed) {
  EigenSystem es = unitary_eigendecompose<double>(ck, /*strict=*/true, seed);
  return {std::move(es.phases), std::move(es.vectors)};
}

ComplexMatrix build_gk(const SpectralCoin& sc) {
  const Eigen::Index n = sc.dim();
  ComplexMatrix cycle = ComplexMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) cycle((j + 1) % n, j) = 1.0;
  return sc.vectors * cycle * sc.vectors.adjoint();
}

ComplexMatrix power_via_spectrum(const SpectralCoin& sc, int t) {
  if (t < 0) throw ContractError("power_via_spectrum: negative power");
  return sc.vectors * sc.eigenvalue_powers(t).asDiagonal() * sc.vectors.adjoint();
}

ComplexMatrix closed_form_m_power(const SpectralCoin& sc, int t, int m) {
  const int n = static_cast<int>(sc.dim());
  if (m < 1 || m > n - 1) {
    throw ContractError("closed_form_m_power: m = " + std::to_string(m) + " outside [1, " +
                        std::to_string(n - 1) + "]");
  }
  const ComplexVector lambda = sc.eigenvalue_powers(t);
  auto phi = [&](int j) { return sc.vectors.col(j - 1); };
  ComplexMatrix out = ComplexMatrix::Zero(n, n);

  for (int k = m + 1; k <= n; ++k)
    out += range_product(lambda, k - (m - 1), k) * phi(k) * phi(k - m).adjoint();
  for (int j = 1; j <= m - 1; ++j) {
    const Complex wrap = range_product(lambda, n - (m - j - 1), n);
    out += range_product(lambda, 1, j) * wrap * phi(j) * phi(n - (m - j)).adjoint();
  }
  out += range_product(lambda, 1, m) * phi(m) * phi(n).adjoint();
  return out;
}

Complex phase_product_for(const SpectralCoin& sc, int t, int j) {
  const int n = static_cast<int>(sc.dim());
  if (j < 1 || j > n) throw ContractError("phase_product_for: j out of range");
  const ComplexVector lambda = sc.eigenvalue_powers(t);
  // prod_{v=0}^{n-j-1} lambda_{n-v} covers indices j+1..n
  return range_product(lambda, 1, j - 1) * range_product(lambda, j + 1, n) * lambda(j - 1);
}

ComplexMatrix reversal_product_form(const SpectralCoin& sc, int t) {
  const int n = static_cast<int>(sc.dim());
  const ComplexVector lambda = sc.eigenvalue_powers(t);
  auto phi = [&](int j) { return sc.vectors.col(j - 1); };
  ComplexMatrix out = range_product(lambda, 1, n) * phi(n) * phi(1).adjoint();
  for (int j = 1; j <= n - 1; ++j) out += phase_product_for(sc, t, j) * phi(j) * phi(j + 1).adjoint();
  return out;
}

ReversalCheck verify_reversal_form(const SpectralCoin& sc, int t) {
  if (t < 0) throw ContractError("verify_reversal_form: negative power");
  const int n = static_cast<int>(sc.dim());
  const ComplexMatrix ck_t = matrix_power(sc.reconstruct(), t);
  const ComplexMatrix gk = build_gk(sc);
  const ComplexMatrix lhs = matrix_power(ck_t * gk, n - 1) * ck_t;

  ReversalCheck r;
  r.phase = range_product(sc.eigenvalue_powers(t), 1, n);
  r.defect = (lhs - r.phase * gk.adjoint()).cwiseAbs().maxCoeff();
  for (int j = 1; j <= n; ++j)
    r.phase_identity_defect = std::max(r.phase_identity_defect, std::abs(phase_product_for(sc, t, j) - r.phase));
  r.product_form_defect = (reversal_product_form(sc, t) - lhs).cwiseAbs().maxCoeff();
  return r;
}

ComplexMatrix to_momentum(const WalkerState& s) {
  const std::vector<int>& dims = s.lattice().dims();
  ComplexMatrix out(s.coin_dim(), s.lattice().sites());
  for (Eigen::Index c = 0; c < s.coin_dim(); ++c) {
    const ComplexVector row = s.amps().row(c).transpose();
    out.row(c) = fft_nd<double>(row, dims, false).transpose();
  }
  return out;
}

WalkerState from_momentum(const LatticeSpec& lattice, const ComplexMatrix& amps_k, int step_count) {
  if (amps_k.cols() != lattice.sites()) throw DimensionError("from_momentum: k-point count mismatch");
  ComplexMatrix amps(amps_k.rows(), amps_k.cols());
  for (Eigen::Index c = 0; c < amps_k.rows(); ++c) {
    const ComplexVector row = amps_k.row(c).transpose();
    amps.row(c) = fft_nd<double>(row, lattice.dims(), true).transpose();
  }
  return detail::StateAccess::make(lattice, std::move(amps), step_count);
}

ProtocolResult run_protocol(const WalkerState& psi0, const CoinOperator& coin, int l,
                            const ProtocolOptions& options) {
  if (l < 1) throw ContractError("run_protocol: l must be >= 1");
  check_walker_coin(psi0, coin, "run_protocol");
  const LatticeSpec& lattice = psi0.lattice();
  const MomentumGrid grid(lattice);
  const DisplacementMap displacement(lattice.ndim());
  const Eigen::Index n = coin.dim();

  const ComplexMatrix initial_k = to_momentum(psi0);
  ComplexMatrix final_k(initial_k.rows(), initial_k.cols());
  std::mt19937_64 gauge_rng(options.gauge_seed.value_or(0));
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

  ProtocolResult result{psi0, 0.0, {}, 0, {}, {}, 0.0};
  result.phases.reserve(static_cast<std::size_t>(grid.points()));
  for (Eigen::Index point = 0; point < grid.points(); ++point) {
    const std::vector<double> k = grid.momentum(point);
    const ComplexMatrix ck = build_ck(coin.matrix(), k, displacement);
    SpectralCoin sc = decompose_at(ck, k, options.seed);
    if (options.gauge_seed) {
      for (Eigen::Index j = 0; j < n; ++j) sc.vectors.col(j) *= std::polar(1.0, angle(gauge_rng));
    }
    const ComplexMatrix gk = build_gk(sc);
    const ComplexMatrix segment = matrix_power(ck, l) * gk;

    ComplexVector v = initial_k.col(point);
    for (Eigen::Index pair = 0; pair < n; ++pair) v = segment * v;
    final_k.col(point) = v;

    const Complex phase = range_product(sc.eigenvalue_powers(l), 1, static_cast<int>(n));
    result.phases.push_back(phase);
    result.per_k_defect = std::max(
        result.per_k_defect, (v - phase * initial_k.col(point)).cwiseAbs().maxCoeff());
  }

  for (Eigen::Index pair = 0; pair < n; ++pair) {
    result.operations.push_back(ProtocolOp::Gk);
    result.operations.insert(result.operations.end(), static_cast<std::size_t>(l), ProtocolOp::Ck);
  }
  result.total_steps = static_cast<int>(result.operations.size());
  result.final_state = from_momentum(lattice, final_k, psi0.step_count() + result.total_steps);
  result.overlap = psi0.amps().conjugate().cwiseProduct(result.final_state.amps()).sum();
  result.fidelity = phase_fidelity(psi0.amps(), result.final_state.amps());
  return result;
}

WalkerState momentum_evolve(const WalkerState& psi0, const CoinOperator& coin, int steps,
                            const InterventionSchedule& schedule,
                            const std::optional<CoinOperator>& intervention, std::uint64_t seed) {
  if (steps < 0) throw ContractError("momentum_evolve: negative step count");
  if (schedule.total_steps() != steps) {
    throw ContractError("momentum_evolve: schedule covers " +
                        std::to_string(schedule.total_steps()) + " steps, asked for " +
                        std::to_string(steps));
  }
  check_walker_coin(psi0, coin, "momentum_evolve");
  bool needs_v = false;
  bool needs_gk = false;
  for (const auto& e : schedule.entries()) (e.kind == InterventionKind::V ? needs_v : needs_gk) = true;
  if (needs_v) {
    if (!intervention) throw ContractError("momentum_evolve: V scheduled without an intervention coin");
    check_walker_coin(psi0, *intervention, "momentum_evolve");
  }

  const LatticeSpec& lattice = psi0.lattice();
  const MomentumGrid grid(lattice);
  const DisplacementMap displacement(lattice.ndim());
  ComplexMatrix amps_k = to_momentum(psi0);

  for (Eigen::Index point = 0; point < grid.points(); ++point) {
    const std::vector<double> k = grid.momentum(point);
    const ComplexMatrix ck = build_ck(coin.matrix(), k, displacement);
    const ComplexMatrix vk = needs_v ? build_ck(intervention->matrix(), k, displacement) : ComplexMatrix();
    const ComplexMatrix gk = needs_gk ? build_gk(decompose_at(ck, k, seed)) : ComplexMatrix();
    ComplexVector v = amps_k.col(point);
    std::size_t next = 0;
    const auto& entries = schedule.entries();
    for (int t = 1; t <= steps; ++t) {
      if (next < entries.size() && entries[next].step == t) {
        v = (entries[next].kind == InterventionKind::V ? vk : gk) * v;
        ++next;
      } else {
        v = ck * v;
      }
    }
    amps_k.col(point) = v;
  }
  return from_momentum(lattice, amps_k, psi0.step_count() + steps);
}

}  // namespace qwalk
