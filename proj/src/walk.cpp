#include "qwalk/walk.hpp"

#include <string>

namespace qwalk {

namespace {

void check_shift_dims(const WalkerState& s) {
  if (s.coin_dim() != (Eigen::Index{1} << s.lattice().ndim())) {
    throw ContractError("shift: coin dimension " + std::to_string(s.coin_dim()) +
                        " does not match a " + std::to_string(s.lattice().ndim()) +
                        "-axis lattice");
  }
}

// destination site of every (coin, site) under the displacement sign * v_c
Eigen::MatrixXi shift_targets(const LatticeSpec& lattice, Eigen::Index coin_dim, int sign) {
  const DisplacementMap disp(lattice.ndim());
  Eigen::MatrixXi target(coin_dim, lattice.sites());
  std::vector<int> moved(static_cast<std::size_t>(lattice.ndim()));
  for (Eigen::Index site = 0; site < lattice.sites(); ++site) {
    const std::vector<int> x = lattice.coords(site);
    for (Eigen::Index c = 0; c < coin_dim; ++c) {
      for (int axis = 0; axis < lattice.ndim(); ++axis)
        moved[static_cast<std::size_t>(axis)] = x[static_cast<std::size_t>(axis)] + sign * disp(c, axis);
      target(c, site) = static_cast<int>(lattice.site_index(moved));
    }
  }
  return target;
}

WalkerState shift_by(WalkerState s, int sign) {
  check_shift_dims(s);
  const Eigen::MatrixXi target = shift_targets(s.lattice(), s.coin_dim(), sign);
  ComplexMatrix& amps = detail::StateAccess::amps(s);
  ComplexMatrix moved(amps.rows(), amps.cols());
  for (Eigen::Index site = 0; site < amps.cols(); ++site)
    for (Eigen::Index c = 0; c < amps.rows(); ++c) moved(c, target(c, site)) = amps(c, site);
  amps = std::move(moved);
  return s;
}

void check_coin(const WalkerState& s, const CoinOperator& coin) {
  if (coin.dim() != s.coin_dim()) {
    throw ContractError("coin of dimension " + std::to_string(coin.dim()) +
                        " applied to walker with coin dimension " + std::to_string(s.coin_dim()));
  }
}

}  // namespace

InterventionSchedule::InterventionSchedule(int total_steps,
                                           std::vector<ScheduledIntervention> entries)
    : total_steps_(total_steps), entries_(std::move(entries)) {
  if (total_steps_ < 0) throw ContractError("schedule: negative total step count");
  int previous = 0;
  for (const auto& e : entries_) {
    if (e.step <= previous || e.step > total_steps_) {
      throw ContractError("schedule: step " + std::to_string(e.step) +
                          " is out of order or outside [1, " + std::to_string(total_steps_) + "]");
    }
    previous = e.step;
  }
}

InterventionSchedule InterventionSchedule::v_at(int total_steps, std::vector<int> steps) {
  std::vector<ScheduledIntervention> entries;
  entries.reserve(steps.size());
  for (int t : steps) entries.push_back({t, InterventionKind::V});
  return {total_steps, std::move(entries)};
}

std::optional<InterventionKind> InterventionSchedule::at(int t) const {
  for (const auto& e : entries_)
    if (e.step == t) return e.kind;
  return std::nullopt;
}

WalkerState apply_shift(WalkerState s) { return shift_by(std::move(s), +1); }

WalkerState apply_inverse_shift(WalkerState s) { return shift_by(std::move(s), -1); }

WalkerState apply_coin(WalkerState s, const ComplexMatrix& coin) {
  if (coin.rows() != s.coin_dim() || coin.cols() != s.coin_dim()) {
    throw ContractError("apply_coin: coin dimension does not match walker");
  }
  ComplexMatrix& amps = detail::StateAccess::amps(s);
  amps = coin * amps;
  return s;
}

WalkerState step(WalkerState s, const CoinOperator& coin) {
  check_coin(s, coin);
  const int t = s.step_count();
  s = apply_shift(apply_coin(std::move(s), coin.matrix()));
  detail::StateAccess::set_step_count(s, t + 1);
  return s;
}

WalkerState step_adjoint(WalkerState s, const CoinOperator& coin) {
  check_coin(s, coin);
  const int t = s.step_count();
  s = apply_coin(apply_inverse_shift(std::move(s)), coin.matrix().adjoint());
  detail::StateAccess::set_step_count(s, t + 1);
  return s;
}

EvolveResult evolve(const WalkerState& s, const CoinOperator& coin, int steps,
                    const InterventionSchedule& schedule, const CoinOperator& intervention,
                    EvolveOptions options) {
  if (steps < 0) throw ContractError("evolve: negative step count");
  if (schedule.total_steps() != steps) {
    throw ContractError("evolve: schedule covers " + std::to_string(schedule.total_steps()) +
                        " steps, asked for " + std::to_string(steps));
  }
  for (const auto& e : schedule.entries()) {
    if (e.kind != InterventionKind::V) {
      throw ContractError("evolve: G_k interventions need the momentum backend");
    }
  }
  check_shift_dims(s);
  check_coin(s, coin);
  if (!schedule.empty()) check_coin(s, intervention);

  // precomputed once: the shift table is the same for every step
  const Eigen::MatrixXi target = shift_targets(s.lattice(), s.coin_dim(), +1);
  EvolveResult result{s, {}};
  if (options.record_trace) {
    result.trace.reserve(static_cast<std::size_t>(steps) + 1);
    result.trace.push_back(position_distribution(s));
  }
  ComplexMatrix& amps = detail::StateAccess::amps(result.state);
  ComplexMatrix tossed(amps.rows(), amps.cols());
  std::size_t next = 0;
  const auto& entries = schedule.entries();
  for (int t = 1; t <= steps; ++t) {
    const bool intervene = next < entries.size() && entries[next].step == t;
    if (intervene) ++next;
    tossed.noalias() = (intervene ? intervention.matrix() : coin.matrix()) * amps;
    for (Eigen::Index site = 0; site < amps.cols(); ++site)
      for (Eigen::Index c = 0; c < amps.rows(); ++c) amps(c, target(c, site)) = tossed(c, site);
    if (options.record_trace) result.trace.push_back(position_distribution(result.state));
  }
  detail::StateAccess::set_step_count(result.state, s.step_count() + steps);
  return result;
}

EvolveResult evolve(const WalkerState& s, const CoinOperator& coin, int steps,
                    EvolveOptions options) {
  return evolve(s, coin, steps, InterventionSchedule::none(steps), coin, options);
}

RealVector position_distribution(const WalkerState& s) {
  return s.amps().cwiseAbs2().colwise().sum().transpose();
}

ComplexMatrix coin_reduced_state(const WalkerState& s) { return s.amps() * s.amps().adjoint(); }

ComplexMatrix materialize_shift(const LatticeSpec& lattice, Eigen::Index coin_dim) {
  if (coin_dim != (Eigen::Index{1} << lattice.ndim())) {
    throw ContractError("materialize_shift: coin dimension does not match lattice");
  }
  const Eigen::MatrixXi target = shift_targets(lattice, coin_dim, +1);
  const Eigen::Index n = coin_dim * lattice.sites();
  ComplexMatrix s = ComplexMatrix::Zero(n, n);
  for (Eigen::Index site = 0; site < lattice.sites(); ++site)
    for (Eigen::Index c = 0; c < coin_dim; ++c)
      s(target(c, site) * coin_dim + c, site * coin_dim + c) = 1.0;
  return s;
}

ComplexMatrix materialize_coin(const LatticeSpec& lattice, const ComplexMatrix& coin) {
  const Eigen::Index d = coin.rows();
  const Eigen::Index n = d * lattice.sites();
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (Eigen::Index site = 0; site < lattice.sites(); ++site) m.block(site * d, site * d, d, d) = coin;
  return m;
}

}  // namespace qwalk
