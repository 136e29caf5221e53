#include "qwalk/reversion.hpp"

#include <string>

namespace qwalk {

namespace {

void require_room(const WalkerState& psi0, int steps, const char* who) {
  if (!psi0.lattice().emulates_line(steps)) {
    throw ContractError(std::string(who) + ": lattice too small for " + std::to_string(steps) +
                        " steps (need >= " + std::to_string(2 * steps + 2) + " sites per axis)");
  }
}

Complex reversal_phase(const CoinParams& p, int power) {
  return std::pow(-std::polar(1.0, p.phi1 + p.phi2), power);
}

void fill_position_metrics(ReversionReport& r, const WalkerState& initial,
                           const WalkerState& final_state) {
  const RealVector p0 = position_distribution(initial);
  const RealVector p1 = position_distribution(final_state);
  r.position_return_probability = distribution_overlap(p0, p1);
  r.marginal_defect = (p1 - p0).cwiseAbs().maxCoeff();
}

// smallest T whose every multiple up to the horizon (at least T and 2T) matches
std::optional<int> detect_period(const std::vector<bool>& match) {
  const int horizon = static_cast<int>(match.size()) - 1;
  for (int period = 1; 2 * period <= horizon; ++period) {
    bool ok = true;
    for (int t = period; t <= horizon && ok; t += period) ok = match[static_cast<std::size_t>(t)];
    if (ok) return period;
  }
  return std::nullopt;
}

}  // namespace

double distribution_overlap(const RealVector& p, const RealVector& q) {
  if (p.size() != q.size()) throw DimensionError("distribution_overlap: sizes differ");
  const double bc = (p.cwiseMax(0.0).cwiseProduct(q.cwiseMax(0.0))).cwiseSqrt().sum();
  return bc * bc;
}

ReversionReport verify_dual_path(const WalkerState& psi0, const CoinParams& p, int t1, int t2) {
  if (t1 < 0 || t2 < 0) throw ContractError("verify_dual_path: negative segment length");
  const int total = t1 + t2 + 1;
  require_room(psi0, total, "verify_dual_path");
  const CoinOperator c = build_coin(p);
  const CoinOperator g = build_g(p.phi1, p.phi2);
  const CoinOperator d = build_d(c, g);

  const WalkerState lhs =
      evolve(psi0, c, total, InterventionSchedule::v_at(total, {t1 + 1}), g).state;

  WalkerState rhs = evolve(psi0, c, t1).state;
  for (int i = 0; i <= t2; ++i) rhs = step_adjoint(std::move(rhs), c);
  rhs = apply_coin(std::move(rhs), d.matrix());

  ReversionReport r;
  r.phase_factor = reversal_phase(p, t2 + 1);
  const ComplexMatrix rhs_amps = r.phase_factor * rhs.amps();
  r.max_amplitude_difference = (lhs.amps() - rhs_amps).cwiseAbs().maxCoeff();
  r.lhs_rhs_fidelity = phase_fidelity(lhs.amps(), rhs_amps);
  fill_position_metrics(r, psi0, lhs);
  r.t1 = t1;
  r.t2 = t2;
  r.params = p;
  return r;
}

ReversionReport verify_return(const WalkerState& psi0, const CoinParams& p, int l) {
  if (l < 1) throw ContractError("verify_return: l must be >= 1");
  require_room(psi0, 2 * l, "verify_return");
  const CoinOperator c = build_coin(p);
  const CoinOperator g = build_g(p.phi1, p.phi2);
  const CoinOperator d = build_d(c, g);

  const WalkerState final_state =
      evolve(psi0, c, 2 * l, InterventionSchedule::v_at(2 * l, {l + 1}), g).state;

  ReversionReport r;
  r.phase_factor = reversal_phase(p, l);
  const ComplexMatrix expected = r.phase_factor * (d.matrix() * psi0.amps());
  r.max_amplitude_difference = (final_state.amps() - expected).cwiseAbs().maxCoeff();
  r.lhs_rhs_fidelity = phase_fidelity(final_state.amps(), expected);
  fill_position_metrics(r, psi0, final_state);
  r.t1 = l;
  r.t2 = l - 1;
  r.params = p;
  return r;
}

InterventionSchedule periodic_schedule(int l, int cycles) {
  if (l < 1) throw ContractError("periodic routine: l must be >= 1");
  if (cycles < 1) throw ContractError("periodic routine: cycles must be >= 1");
  std::vector<int> at;
  for (int m = 0; m < cycles; ++m) at.push_back(l + 1 + 2 * l * m);
  return InterventionSchedule::v_at((2 * cycles + 1) * l, std::move(at));
}

PeriodicRun run_periodic(const WalkerState& psi0, const CoinParams& p, int l, int cycles) {
  InterventionSchedule schedule = periodic_schedule(l, cycles);
  const int horizon = schedule.total_steps();
  require_room(psi0, 2 * l, "run_periodic");
  const CoinOperator c = build_coin(p);
  const CoinOperator g = build_g(p.phi1, p.phi2);

  const RealVector p0 = position_distribution(psi0);
  std::vector<bool> position_match(static_cast<std::size_t>(horizon) + 1, false);
  std::vector<bool> state_match(position_match.size(), false);
  std::vector<double> marginal_defect(position_match.size(), 0.0);
  std::vector<double> fidelity(position_match.size(), 1.0);

  PeriodicRun run{{}, {}, {}, schedule};
  run.position_trace.reserve(position_match.size());
  run.coin_trace.reserve(position_match.size());
  run.position_trace.push_back(p0);
  run.coin_trace.push_back(coin_reduced_state(psi0));

  WalkerState s = psi0;
  for (int t = 1; t <= horizon; ++t) {
    s = step(std::move(s), schedule.at(t) ? g : c);
    const auto ut = static_cast<std::size_t>(t);
    run.position_trace.push_back(position_distribution(s));
    run.coin_trace.push_back(coin_reduced_state(s));
    marginal_defect[ut] = (run.position_trace.back() - p0).cwiseAbs().maxCoeff();
    fidelity[ut] = phase_fidelity(s.amps(), psi0.amps());
    position_match[ut] = marginal_defect[ut] <= kRecurrenceTol;
    state_match[ut] = fidelity[ut] >= 1.0 - kRecurrenceTol;
  }

  PeriodReport& rep = run.report;
  rep.scan_horizon = horizon;
  rep.position_period = detect_period(position_match);
  rep.full_state_period = detect_period(state_match);
  if (rep.position_period) {
    for (int t = *rep.position_period; t <= horizon; t += *rep.position_period)
      rep.position_recurrence_defect =
          std::max(rep.position_recurrence_defect, marginal_defect[static_cast<std::size_t>(t)]);
  }
  if (rep.full_state_period) {
    for (int t = *rep.full_state_period; t <= horizon; t += *rep.full_state_period)
      rep.recurrence_fidelity = std::min(rep.recurrence_fidelity, fidelity[static_cast<std::size_t>(t)]);
  }
  return run;
}

ScanEntry summarize_distribution(const LatticeSpec& lattice, const RealVector& distribution,
                                 int step) {
  ScanEntry e;
  e.step = step;
  Eigen::Index best = 0;
  e.p_max = distribution.maxCoeff(&best);
  e.argmax = lattice.coords(best);
  for (Eigen::Index site = 0; site < lattice.sites(); ++site)
    if (lattice.coords(site).front() < 0) e.p_negative += distribution(site);
  return e;
}

ScanResult scan_intervention_times(const WalkerState& psi0, const CoinParams& p, int total_steps) {
  if (total_steps < 2) throw ContractError("scan_intervention_times: need at least 2 steps");
  require_room(psi0, total_steps, "scan_intervention_times");
  const CoinOperator c = build_coin(p);
  const CoinOperator g = build_g(p.phi1, p.phi2);
  const LatticeSpec& lattice = psi0.lattice();

  ScanResult out;
  out.baseline = summarize_distribution(
      lattice, position_distribution(evolve(psi0, c, total_steps).state), 0);
  out.entries.reserve(static_cast<std::size_t>(total_steps));

  // U^{j-1} is shared by every later run, so advance it once
  WalkerState prefix = psi0;
  for (int j = 1; j <= total_steps; ++j) {
    WalkerState s = step(prefix, g);
    s = evolve(s, c, total_steps - j).state;
    out.entries.push_back(summarize_distribution(lattice, position_distribution(s), j));
    prefix = step(std::move(prefix), c);
  }
  return out;
}

}  // namespace qwalk
