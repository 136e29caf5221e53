#include "cli_app.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <numeric>
#include <algorithm>

#include <CLI11.hpp>
#include <json.hpp>

#include "experiment_config.hpp"
#include "qwalk/reversion.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/walk.hpp"

namespace qwalk::cli {

namespace {

using json = nlohmann::ordered_json;

json complex_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string axis_name(std::size_t i) {
  static const char* names[] = {"x", "y", "z"};
  return i < 3 ? names[i] : "x" + std::to_string(i);
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  json to_json() const {
    json arr = json::array();
    for (const auto& row : rows) {
      json obj = json::object();
      for (std::size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = row[i];
      arr.push_back(std::move(obj));
    }
    return arr;
  }

  void write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    char buf[40];
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) os << ',';
        if (row[i].is_number_float()) {
          std::snprintf(buf, sizeof buf, "%.17g", row[i].get<double>());
          os << buf;
        } else {
          os << row[i].dump();
        }
      }
      os << '\n';
    }
  }
};

struct Outcome {
  json metrics = json::object();
  json warnings = json::array();
  std::vector<Table> tables;
  int exit_code = kOk;
  std::string failure;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    exit_code = kNumericalViolation;
    if (!failure.empty()) failure += "; ";
    failure += what;
  }
};

std::vector<std::string> coord_columns(const LatticeSpec& lat) {
  std::vector<std::string> cols;
  for (std::size_t i = 0; i < static_cast<std::size_t>(lat.ndim()); ++i) cols.push_back(axis_name(i));
  return cols;
}

Table distribution_table(const LatticeSpec& lat, std::optional<int> t = std::nullopt,
                         std::string name = "distribution") {
  Table tab{std::move(name), {}, {}};
  if (t) tab.columns.push_back("t");
  for (auto& c : coord_columns(lat)) tab.columns.push_back(c);
  tab.columns.push_back("p");
  return tab;
}

// Sites ordered row-major over ascending signed coordinates.
std::vector<Eigen::Index> display_order(const LatticeSpec& lat) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(lat.sites()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return lat.coords(a) < lat.coords(b); });
  return order;
}

void append_distribution(Table& tab, const LatticeSpec& lat, const RealVector& p, std::optional<int> t) {
  for (Eigen::Index s : display_order(lat)) {
    std::vector<json> row;
    if (t) row.emplace_back(*t);
    for (int c : lat.coords(s)) row.emplace_back(c);
    row.emplace_back(p(s));
    tab.rows.push_back(std::move(row));
  }
}

Table make_distribution(const LatticeSpec& lat, const RealVector& p) {
  Table tab = distribution_table(lat);
  append_distribution(tab, lat, p, std::nullopt);
  return tab;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json summary_json(const ScanEntry& e) {
  return json{{"argmax", e.argmax}, {"p_max", e.p_max}, {"p_negative", e.p_negative}};
}

InterventionSchedule schedule_of(const ExperimentConfig& cfg) {
  return InterventionSchedule::v_at(cfg.steps, cfg.schedule);
}

std::optional<CoinOperator> intervention_of(const ExperimentConfig& cfg) {
  if (cfg.schedule.empty()) return std::nullopt;
  return build_g(cfg.g_phi1, cfg.g_phi2);
}

Outcome cmd_walk(const ExperimentConfig& cfg) {
  Outcome o;
  const WalkerState psi0 = cfg.initial_state();
  const LatticeSpec& lat = psi0.lattice();
  const auto v = intervention_of(cfg);
  const EvolveResult r = v ? evolve(psi0, cfg.coin(), cfg.steps, schedule_of(cfg), *v, {.record_trace = cfg.trace})
                           : evolve(psi0, cfg.coin(), cfg.steps, {.record_trace = cfg.trace});
  const RealVector p = position_distribution(r.state);
  const ScanEntry s = summarize_distribution(lat, p, cfg.steps);
  const std::vector<int> origin(static_cast<std::size_t>(lat.ndim()), 0);
  const double total = p.sum();
  o.metrics["steps"] = cfg.steps;
  o.metrics["schedule"] = cfg.schedule;
  o.metrics["total_probability"] = total;
  o.metrics["p_origin"] = p(lat.site_index(origin));
  o.metrics["peak"] = summary_json(s);
  o.metrics["emulates_line"] = lat.emulates_line(cfg.steps);
  o.check(std::abs(total - 1.0) <= cfg.tol, "total probability " + format_double(total) + " differs from 1");
  o.tables.push_back(make_distribution(lat, p));
  if (cfg.trace) {
    Table tr = distribution_table(lat, 0, "trace");
    for (std::size_t t = 0; t < r.trace.size(); ++t) append_distribution(tr, lat, r.trace[t], static_cast<int>(t));
    o.tables.push_back(std::move(tr));
  }
  return o;
}

Outcome cmd_revert(const ExperimentConfig& cfg) {
  Outcome o;
  const WalkerState psi0 = cfg.initial_state();
  const LatticeSpec& lat = psi0.lattice();
  const CoinParams p = cfg.coin_params();
  const CoinOperator c = build_coin(p);
  const CoinOperator g = build_g(cfg.g_phi1, cfg.g_phi2);
  const CoinOperator d = build_d(c, g);
  const double dd_defect =
      (d.matrix() * d.matrix() - ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff();
  o.metrics["l"] = cfg.l;
  o.metrics["total_steps"] = 2 * cfg.l;
  o.metrics["intervention_step"] = cfg.l + 1;
  o.metrics["dd_defect"] = dd_defect;

  if (cfg.g_mismatched) {
    o.warnings.push_back("intervention phases (g_phi1, g_phi2) differ from the coin phases; D D != I and the "
                         "return identity does not apply");
    const WalkerState out =
        evolve(psi0, c, 2 * cfg.l, InterventionSchedule::v_at(2 * cfg.l, {cfg.l + 1}), g).state;
    const RealVector pf = position_distribution(out);
    o.metrics["position_return_probability"] = distribution_overlap(position_distribution(psi0), pf);
    o.tables.push_back(make_distribution(lat, pf));
    return o;
  }

  const ReversionReport ret = verify_return(psi0, p, cfg.l);
  const ReversionReport eq = verify_dual_path(psi0, p, cfg.l, cfg.l - 1);
  o.metrics["position_return_probability"] = ret.position_return_probability;
  o.metrics["return_state_defect"] = ret.max_amplitude_difference;
  o.metrics["phase_factor"] = complex_json(ret.phase_factor);
  o.metrics["dual_path_max_difference"] = eq.max_amplitude_difference;
  o.metrics["dual_path_fidelity"] = eq.lhs_rhs_fidelity;
  o.check(std::abs(ret.position_return_probability - 1.0) <= cfg.tol,
          "return probability " + format_double(ret.position_return_probability) + " differs from 1");
  o.check(eq.max_amplitude_difference <= cfg.tol,
          "dual-path difference " + format_double(eq.max_amplitude_difference) + " exceeds tol");
  const WalkerState out =
      evolve(psi0, c, 2 * cfg.l, InterventionSchedule::v_at(2 * cfg.l, {cfg.l + 1}), g).state;
  o.tables.push_back(make_distribution(lat, position_distribution(out)));
  return o;
}

Outcome cmd_periodic(const ExperimentConfig& cfg) {
  Outcome o;
  const WalkerState psi0 = cfg.initial_state();
  const LatticeSpec& lat = psi0.lattice();
  const PeriodicRun run = run_periodic(psi0, cfg.coin_params(), cfg.l, cfg.cycles);
  const PeriodReport& r = run.report;
  std::vector<int> steps;
  for (const auto& e : run.schedule.entries()) steps.push_back(e.step);
  o.metrics["l"] = cfg.l;
  o.metrics["cycles"] = cfg.cycles;
  o.metrics["total_steps"] = run.schedule.total_steps();
  o.metrics["intervention_steps"] = steps;
  o.metrics["position_period"] = optional_json(r.position_period);
  o.metrics["full_state_period"] = optional_json(r.full_state_period);
  o.metrics["scan_horizon"] = r.scan_horizon;
  o.metrics["recurrence_fidelity"] = r.recurrence_fidelity;
  o.metrics["position_recurrence_defect"] = r.position_recurrence_defect;
  if (!r.position_period || !r.full_state_period) o.warnings.push_back("horizon too short to confirm a period");
  if (r.full_state_period)
    o.check(r.recurrence_fidelity >= 1.0 - cfg.tol,
            "recurrence fidelity " + format_double(r.recurrence_fidelity) + " below 1 - tol");
  const int last = std::min<int>(4 * cfg.l, static_cast<int>(run.position_trace.size()) - 1);
  Table tr = distribution_table(lat, 0, "trace");
  for (int t = 0; t <= last; ++t) append_distribution(tr, lat, run.position_trace[t], t);
  o.tables.push_back(std::move(tr));
  return o;
}

Outcome cmd_spectral(const ExperimentConfig& cfg) {
  Outcome o;
  const WalkerState psi0 = cfg.initial_state();
  const LatticeSpec& lat = psi0.lattice();
  const CoinOperator coin = cfg.coin();
  ProtocolOptions opts;
  opts.seed = cfg.seed;
  const ProtocolResult r = run_protocol(psi0, coin, cfg.l, opts);

  const MomentumGrid grid(lat);
  const DisplacementMap disp(lat.ndim());
  Table tab{"kpoints", {}, {}};
  for (std::size_t i = 0; i < static_cast<std::size_t>(lat.ndim()); ++i) tab.columns.push_back("k_" + axis_name(i));
  for (const char* c : {"reversal_defect", "reversal_phase_re", "reversal_phase_im", "protocol_phase_re", "protocol_phase_im"})
    tab.columns.emplace_back(c);
  double worst = 0.0;
  for (Eigen::Index pt = 0; pt < grid.points(); ++pt) {
    const auto k = grid.momentum(pt);
    const ReversalCheck rc = verify_reversal_form(spectral_decompose(build_ck(coin.matrix(), k, disp), cfg.seed), cfg.l);
    worst = std::max(worst, rc.defect);
    std::vector<json> row(k.begin(), k.end());
    row.emplace_back(rc.defect);
    row.emplace_back(rc.phase.real());
    row.emplace_back(rc.phase.imag());
    row.emplace_back(r.phases[static_cast<std::size_t>(pt)].real());
    row.emplace_back(r.phases[static_cast<std::size_t>(pt)].imag());
    tab.rows.push_back(std::move(row));
  }
  o.metrics["dim"] = cfg.dim;
  o.metrics["l"] = cfg.l;
  o.metrics["total_steps"] = r.total_steps;
  o.metrics["fidelity"] = r.fidelity;
  o.metrics["accumulated_phase"] = complex_json(r.overlap);
  o.metrics["per_k_defect"] = r.per_k_defect;
  o.metrics["max_reversal_defect"] = worst;
  o.metrics["k_points"] = static_cast<long long>(grid.points());
  o.check(r.fidelity >= 1.0 - cfg.tol, "protocol fidelity " + format_double(r.fidelity) + " below 1 - tol");
  o.check(worst <= cfg.tol, "reversal closed-form defect " + format_double(worst) + " exceeds tol");
  o.tables.push_back(std::move(tab));
  return o;
}

Outcome cmd_scan(const ExperimentConfig& cfg) {
  Outcome o;
  const WalkerState psi0 = cfg.initial_state();
  const ScanResult r = scan_intervention_times(psi0, cfg.coin_params(), cfg.steps);
  Table tab{"scan", {"step"}, {}};
  for (auto& c : coord_columns(psi0.lattice())) tab.columns.push_back("argmax_" + c);
  tab.columns.emplace_back("p_max");
  tab.columns.emplace_back("p_negative");
  auto add = [&](const ScanEntry& e) {
    std::vector<json> row{e.step};
    for (int c : e.argmax) row.emplace_back(c);
    row.emplace_back(e.p_max);
    row.emplace_back(e.p_negative);
    tab.rows.push_back(std::move(row));
  };
  add(r.baseline);
  for (const auto& e : r.entries) add(e);
  o.metrics["total_steps"] = cfg.steps;
  o.metrics["baseline"] = summary_json(r.baseline);
  o.tables.push_back(std::move(tab));
  return o;
}

Outcome cmd_crosscheck(const ExperimentConfig& cfg) {
  Outcome o;
  const WalkerState psi0 = cfg.initial_state();
  const CoinOperator coin = cfg.coin();
  const auto v = intervention_of(cfg);
  const InterventionSchedule sched = schedule_of(cfg);
  const WalkerState a = v ? evolve(psi0, coin, cfg.steps, sched, *v).state : evolve(psi0, coin, cfg.steps).state;
  const WalkerState b = momentum_evolve(psi0, coin, cfg.steps, sched, v, cfg.seed);
  const double diff = (a.amps() - b.amps()).cwiseAbs().maxCoeff();
  o.metrics["steps"] = cfg.steps;
  o.metrics["schedule"] = cfg.schedule;
  o.metrics["max_amplitude_difference"] = diff;
  o.check(diff <= cfg.tol, "backend difference " + format_double(diff) + " exceeds tol");
  o.tables.push_back(make_distribution(a.lattice(), position_distribution(a)));
  return o;
}

Outcome dispatch(const ExperimentConfig& cfg) {
  switch (cfg.mode) {
    case Mode::Walk: return cmd_walk(cfg);
    case Mode::Revert: return cmd_revert(cfg);
    case Mode::Periodic: return cmd_periodic(cfg);
    case Mode::Spectral: return cmd_spectral(cfg);
    case Mode::Scan: return cmd_scan(cfg);
    case Mode::Crosscheck: return cmd_crosscheck(cfg);
  }
  return {};
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << body;
  if (!f) throw ConfigError("write to '" + path + "' failed");
}

std::string sidecar(const std::string& out, const std::string& suffix) { return out + "." + suffix; }

void emit(const ExperimentConfig& cfg, Outcome& o, std::optional<double> wall, std::ostream& out) {
  json manifest = json::object();
  manifest["artifact"] = "qwalk";
  manifest["version"] = kVersion;
  manifest["mode"] = mode_name(cfg.mode);
  json echo = json::object();
  for (const auto& [k, v] : cfg.echo) echo[k] = v;
  manifest["config"] = echo;
  json resolved = json::object();
  resolved["dim"] = cfg.dim;
  resolved["lattice"] = cfg.lattice;
  resolved["seed"] = cfg.seed;
  resolved["tol"] = cfg.tol;
  manifest["resolved"] = resolved;
  manifest["metrics"] = o.metrics;
  manifest["warnings"] = o.warnings;
  manifest["status"] = o.exit_code == kOk ? "ok" : "numerical_violation";
  if (wall) manifest["wall_time_s"] = *wall;

  if (cfg.format == Format::Json) {
    json data = json::object();
    for (const auto& t : o.tables) data[t.name] = t.to_json();
    const std::string body = json{{"manifest", manifest}, {"data", data}}.dump(2) + "\n";
    if (cfg.out.empty()) out << body;
    else write_file(cfg.out, body);
    return;
  }
  json files = json::array();
  for (std::size_t i = 0; i < o.tables.size(); ++i) {
    const std::string path = i == 0 ? cfg.out : sidecar(cfg.out, o.tables[i].name + ".csv");
    std::ostringstream os;
    o.tables[i].write_csv(os);
    write_file(path, os.str());
    files.push_back(json{{"table", o.tables[i].name}, {"path", path}});
  }
  manifest["files"] = files;
  write_file(sidecar(cfg.out, "manifest.json"), manifest.dump(2) + "\n");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coined quantum walk experiments", "qwalk"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "flat key = value file; flags override it");
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_opts;
  for (const auto& key : config_keys()) flag_opts[key] = app.add_option("--" + key, flag_values[key]);
  const std::vector<std::pair<Mode, const char*>> modes{
      {Mode::Walk, "evolve a walk and write its position distribution"},
      {Mode::Revert, "run the single-intervention return experiment"},
      {Mode::Periodic, "run periodic interventions and detect the periods"},
      {Mode::Spectral, "run the momentum-space reversal protocol"},
      {Mode::Scan, "scan single intervention times over a fixed run"},
      {Mode::Crosscheck, "compare the position and momentum backends"}};
  for (const auto& [m, help] : modes) app.add_subcommand(mode_name(m), help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "qwalk: " << e.what() << "\n";
    return kConfigError;
  }

  ExperimentConfig cfg;
  try {
    std::map<std::string, std::string> values;
    if (!config_path.empty()) values = read_config_file(config_path);
    for (const auto& [key, opt] : flag_opts)
      if (opt->count() > 0) values[key] = flag_values[key];
    const Mode mode = *parse_mode(app.get_subcommands().front()->get_name());
    cfg = build_config(mode, values);
  } catch (const ConfigError& e) {
    err << "qwalk: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    Outcome o = dispatch(cfg);
    std::optional<double> wall;
    if (cfg.record_timing)
      wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit(cfg, o, wall, out);
    for (const auto& w : o.warnings) err << "qwalk: warning: " << w.get<std::string>() << "\n";
    if (o.exit_code != kOk) err << "qwalk: " << o.failure << "\n";
    return o.exit_code;
  } catch (const ConfigError& e) {
    err << "qwalk: " << e.what() << "\n";
    return kConfigError;
  } catch (const DegenerateSpectrum& e) {
    err << "qwalk: degenerate spectrum: " << e.what() << "\n";
    return kDegenerate;
  } catch (const ProtocolInapplicable& e) {
    err << "qwalk: protocol inapplicable: " << e.what() << "\n";
    return kDegenerate;
  } catch (const qwalk::Error& e) {
    err << "qwalk: " << e.what() << "\n";
    return kNumericalViolation;
  }
}

}  // namespace qwalk::cli
