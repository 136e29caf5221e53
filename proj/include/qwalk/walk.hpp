#pragma once

#include <optional>
#include <vector>

#include "qwalk/coinspace.hpp"
#include "qwalk/lattice.hpp"

namespace qwalk {

/// V replaces the regular step by S (I (x) G); Gk applies the momentum-space
/// cyclic eigenbasis shift as a pure coin operation (momentum backend only).
enum class InterventionKind { V, Gk };

struct ScheduledIntervention {
  int step = 0;  // 1-based: "intervention at t = j" is the j-th step
  InterventionKind kind = InterventionKind::V;
  bool operator==(const ScheduledIntervention&) const = default;
};

class InterventionSchedule {
 public:
  /// Throws ContractError unless steps are strictly increasing in [1, total].
  InterventionSchedule(int total_steps, std::vector<ScheduledIntervention> entries);
  static InterventionSchedule none(int total_steps) { return {total_steps, {}}; }
  /// V at each listed step.
  static InterventionSchedule v_at(int total_steps, std::vector<int> steps);

  int total_steps() const { return total_steps_; }
  const std::vector<ScheduledIntervention>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  /// Intervention applied as step `t` (1-based), if any.
  std::optional<InterventionKind> at(int t) const;

 private:
  int total_steps_;
  std::vector<ScheduledIntervention> entries_;
};

WalkerState apply_shift(WalkerState s);
/// S^dagger: every component moves by -v_c.
WalkerState apply_inverse_shift(WalkerState s);
/// (I (x) coin) without touching the step counter.
WalkerState apply_coin(WalkerState s, const ComplexMatrix& coin);

/// One step of U = S (I (x) C).
WalkerState step(WalkerState s, const CoinOperator& coin);
/// One step of U^dagger = (I (x) C^dagger) S^dagger.
WalkerState step_adjoint(WalkerState s, const CoinOperator& coin);

struct EvolveOptions {
  bool record_trace = false;
};

struct EvolveResult {
  WalkerState state;
  /// Position distributions after 0, 1, ..., steps steps when recorded.
  std::vector<RealVector> trace;
};

/// `steps` steps of U, using V = S (I (x) intervention) at every scheduled
/// step. The schedule must cover exactly `steps` steps and contain only V.
EvolveResult evolve(const WalkerState& s, const CoinOperator& coin, int steps,
                    const InterventionSchedule& schedule, const CoinOperator& intervention,
                    EvolveOptions options = {});
EvolveResult evolve(const WalkerState& s, const CoinOperator& coin, int steps,
                    EvolveOptions options = {});

/// P(x) = sum_c |amp(c, x)|^2.
RealVector position_distribution(const WalkerState& s);

/// rho_c = sum_x amp(., x) amp(., x)^dagger.
ComplexMatrix coin_reduced_state(const WalkerState& s);

/// Dense S on the flattened space (index site * coin_dim + coin). Intended
/// for small lattices.
ComplexMatrix materialize_shift(const LatticeSpec& lattice, Eigen::Index coin_dim);
/// Dense I (x) coin on the flattened space.
ComplexMatrix materialize_coin(const LatticeSpec& lattice, const ComplexMatrix& coin);

}  // namespace qwalk
