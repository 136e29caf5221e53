#pragma once

#include <optional>
#include <vector>

#include "qwalk/walk.hpp"

namespace qwalk {

inline constexpr double kRecurrenceTol = 1e-9;

/// Outcome of a single-intervention run U^{t2} V U^{t1} compared against the
/// closed form (-e^{i(phi1+phi2)})^{t2+1} (I (x) D) (U^dagger)^{t2+1} U^{t1}.
struct ReversionReport {
  double lhs_rhs_fidelity = 0.0;
  /// Strict max |lhs - rhs| with the overall phase included.
  double max_amplitude_difference = 0.0;
  /// (sum_x sqrt(P0(x) P(x)))^2 between initial and final position marginals.
  double position_return_probability = 0.0;
  /// max_x |P(x) - P0(x)|
  double marginal_defect = 0.0;
  Complex phase_factor{1.0, 0.0};
  int t1 = 0;
  int t2 = 0;
  CoinParams params;
};

ReversionReport verify_dual_path(const WalkerState& psi0, const CoinParams& p, int t1, int t2);

/// U^{l-1} V U^{l} against (-e^{i(phi1+phi2)})^l (I (x) D) psi0.
ReversionReport verify_return(const WalkerState& psi0, const CoinParams& p, int l);

struct PeriodReport {
  std::optional<int> position_period;
  std::optional<int> full_state_period;
  int scan_horizon = 0;
  /// Worst phase fidelity with psi0 over all multiples of the full-state
  /// period inside the horizon (1 when no period was found).
  double recurrence_fidelity = 1.0;
  /// Worst max_x |P_t(x) - P_0(x)| over multiples of the position period.
  double position_recurrence_defect = 0.0;
};

struct PeriodicRun {
  PeriodReport report;
  /// Position marginals after 0, 1, ..., horizon steps.
  std::vector<RealVector> position_trace;
  /// Reduced coin states after 0, 1, ..., horizon steps.
  std::vector<ComplexMatrix> coin_trace;
  InterventionSchedule schedule;
};

/// (U^{2l-1} V)^cycles U^l psi0. A period T is reported when the initial
/// position marginal (resp. the full state up to global phase) recurs at every
/// multiple of T inside the horizon and at least twice (T and 2T).
PeriodicRun run_periodic(const WalkerState& psi0, const CoinParams& p, int l, int cycles);

/// V placements of the periodic routine: steps l+1, 3l+1, ..., total (2 cycles + 1) l.
InterventionSchedule periodic_schedule(int l, int cycles);

struct ScanEntry {
  int step = 0;  // 0 = no intervention
  std::vector<int> argmax;
  double p_max = 0.0;
  /// Mass on sites with negative axis-0 coordinate.
  double p_negative = 0.0;
};

struct ScanResult {
  ScanEntry baseline;
  std::vector<ScanEntry> entries;  // entries[j - 1] has V as the j-th step
};

/// Peak location and negative-side mass for a V placed at each step
/// 1..total_steps, plus the intervention-free baseline.
ScanResult scan_intervention_times(const WalkerState& psi0, const CoinParams& p, int total_steps);

/// Summary of a final distribution; ties on the peak go to the lowest site index.
ScanEntry summarize_distribution(const LatticeSpec& lattice, const RealVector& distribution, int step);

/// Classical fidelity (sum_x sqrt(p(x) q(x)))^2.
double distribution_overlap(const RealVector& p, const RealVector& q);

}  // namespace qwalk
