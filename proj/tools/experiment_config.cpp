#include "experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace qwalk::cli {

namespace {

constexpr double kPi = std::numbers::pi;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ConfigError("config field '" + key + "': " + what);
}

double parse_plain_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) bad(key, "'" + text + "' is not a number");
  return v;
}

// Decimal literal, or a multiple of pi such as `pi`, `pi/4`, `2pi/3`, `0.5*pi`.
double parse_real(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  const auto at = text.find("pi");
  if (at == std::string::npos) return parse_plain_double(key, text);
  std::string num = trim(text.substr(0, at));
  if (!num.empty() && num.back() == '*') num = trim(num.substr(0, num.size() - 1));
  const double factor = num.empty() ? 1.0 : parse_plain_double(key, num);
  const std::string rest = trim(text.substr(at + 2));
  double den = 1.0;
  if (!rest.empty()) {
    if (rest.front() != '/') bad(key, "'" + text + "' is not a number");
    den = parse_plain_double(key, trim(rest.substr(1)));
    if (den == 0.0) bad(key, "division by zero");
  }
  return factor * kPi / den;
}

long long parse_integer(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  long long v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) bad(key, "'" + text + "' is not an integer");
  return v;
}

int parse_int(const std::string& key, const std::string& raw, long long lo, long long hi) {
  const long long v = parse_integer(key, raw);
  if (v < lo || v > hi) bad(key, std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& raw) {
  std::string t = trim(raw);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  bad(key, "'" + raw + "' is not a boolean");
}

std::vector<double> parse_real_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_real(key, part));
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text, char sep, long long lo, long long hi) {
  std::vector<int> out;
  for (const auto& part : split(text, sep)) out.push_back(parse_int(key, part, lo, hi));
  return out;
}

int next_pow2(long long v) {
  int p = 2;
  while (p < v) p <<= 1;
  return p;
}

// Smallest power-of-two ring on which `steps` steps cannot wrap.
int line_extent(long long steps) { return std::max(8, next_pow2(2 * steps + 2)); }

ComplexMatrix read_coin_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("coin_file", "cannot open '" + path + "'");
  std::vector<std::vector<Complex>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::vector<Complex> row;
    std::string entry;
    while (ls >> entry) {
      const auto parts = split(entry, ',');
      if (parts.size() > 2) bad("coin_file", "entry '" + entry + "' is not re[,im]");
      const double re = parse_real("coin_file", parts[0]);
      const double im = parts.size() == 2 ? parse_real("coin_file", parts[1]) : 0.0;
      row.emplace_back(re, im);
    }
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) bad("coin_file", "no matrix rows");
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != n) bad("coin_file", "matrix is not square");
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Walk: return "walk";
    case Mode::Revert: return "revert";
    case Mode::Periodic: return "periodic";
    case Mode::Spectral: return "spectral";
    case Mode::Scan: return "scan";
    case Mode::Crosscheck: return "crosscheck";
  }
  return "?";
}

std::optional<Mode> parse_mode(const std::string& name) {
  for (Mode m : {Mode::Walk, Mode::Revert, Mode::Periodic, Mode::Spectral, Mode::Scan, Mode::Crosscheck})
    if (name == mode_name(m)) return m;
  return std::nullopt;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "coin",  "coin_file", "theta",  "phi1",   "phi2",     "dim",    "lattice", "coin_index",
      "site",  "state_file", "steps", "l",      "cycles",   "schedule", "trace", "g_phi1",
      "g_phi2", "record_timing", "seed", "tol", "format",   "out"};
  return keys;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  const std::set<std::string> known(config_keys().begin(), config_keys().end());
  std::map<std::string, std::string> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!known.count(key)) throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    values[key] = trim(line.substr(eq + 1));
  }
  return values;
}

CoinOperator ExperimentConfig::coin() const {
  switch (coin_kind) {
    case CoinKind::Grover: return grover_coin(Eigen::Index{1} << dim);
    case CoinKind::File:
      try {
        return CoinOperator(read_coin_file(coin_file));
      } catch (const qwalk::Error& e) {
        bad("coin_file", e.what());
      }
    case CoinKind::Hadamard:
    case CoinKind::Param: break;
  }
  std::vector<CoinOperator> parts;
  for (int i = 0; i < dim; ++i) parts.push_back(build_coin({theta[i], phi1[i], phi2[i]}));
  return tensor_coin(parts);
}

CoinParams ExperimentConfig::coin_params() const {
  if (dim != 1 || (coin_kind != CoinKind::Param && coin_kind != CoinKind::Hadamard))
    throw ConfigError(std::string("mode ") + mode_name(mode) + " needs a parametrised two-state coin (dim = 1)");
  return {theta[0], phi1[0], phi2[0]};
}

WalkerState ExperimentConfig::initial_state() const {
  const LatticeSpec lat = lattice_spec();
  const Eigen::Index coin_dim = Eigen::Index{1} << dim;
  if (state_file.empty()) {
    ComplexVector c = ComplexVector::Zero(coin_dim);
    c(coin_index) = 1.0;
    std::vector<int> at = site.empty() ? std::vector<int>(static_cast<std::size_t>(dim), 0) : site;
    return WalkerState::localized(lat, c, at);
  }
  std::ifstream in(state_file);
  if (!in) bad("state_file", "cannot open '" + state_file + "'");
  ComplexMatrix amps = ComplexMatrix::Zero(coin_dim, lat.sites());
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto parts = split(line, ',');
    if (static_cast<int>(parts.size()) != dim + 3) bad("state_file", "line '" + line + "' is not c,coords...,re,im");
    const int c = parse_int("state_file", parts[0], 0, coin_dim - 1);
    std::vector<int> coords;
    for (int i = 0; i < dim; ++i) coords.push_back(parse_int("state_file", parts[1 + i], -(1 << 30), 1 << 30));
    amps(c, lat.site_index(coords)) = Complex(parse_real("state_file", parts[dim + 1]), parse_real("state_file", parts[dim + 2]));
  }
  try {
    return WalkerState(lat, std::move(amps));
  } catch (const qwalk::Error& e) {
    bad("state_file", e.what());
  }
}

ExperimentConfig build_config(Mode mode, const std::map<std::string, std::string>& values) {
  ExperimentConfig cfg;
  cfg.mode = mode;
  cfg.echo = values;
  auto get = [&](const char* key) -> std::optional<std::string> {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    return it->second;
  };

  if (auto v = get("format")) {
    if (*v == "csv") cfg.format = Format::Csv;
    else if (*v == "json") cfg.format = Format::Json;
    else bad("format", "expected csv or json, got '" + *v + "'");
  }
  if (auto v = get("out")) cfg.out = *v;
  if (cfg.format == Format::Csv && cfg.out.empty()) bad("out", "csv output needs an output path");
  if (auto v = get("seed")) {
    const long long s = parse_integer("seed", *v);
    if (s < 0) bad("seed", "must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = get("record_timing")) cfg.record_timing = parse_bool("record_timing", *v);
  if (auto v = get("trace")) cfg.trace = parse_bool("trace", *v);

  // coin and dimension
  if (auto v = get("coin")) {
    if (*v == "param") cfg.coin_kind = CoinKind::Param;
    else if (*v == "hadamard") cfg.coin_kind = CoinKind::Hadamard;
    else if (*v == "grover") cfg.coin_kind = CoinKind::Grover;
    else bad("coin", "expected param, hadamard or grover, got '" + *v + "'");
  }
  if (auto v = get("coin_file")) {
    if (get("coin") && cfg.coin_kind != CoinKind::Param) bad("coin_file", "conflicts with coin = " + *get("coin"));
    cfg.coin_kind = CoinKind::File;
    cfg.coin_file = *v;
  }
  std::optional<int> dim_given;
  if (auto v = get("dim")) dim_given = parse_int("dim", *v, 1, 8);
  for (const char* key : {"theta", "phi1", "phi2"}) {
    if (get(key) && cfg.coin_kind != CoinKind::Param) bad(key, "only valid with coin = param");
  }
  std::optional<int> list_len;
  auto take_list = [&](const char* key, std::vector<double>& dst, double fallback) {
    if (auto v = get(key)) {
      dst = parse_real_list(key, *v);
      if (dst.size() > 1) {
        if (list_len && *list_len != static_cast<int>(dst.size())) bad(key, "list length differs from the other coin angles");
        list_len = static_cast<int>(dst.size());
      }
    } else {
      dst = {fallback};
    }
  };
  take_list("theta", cfg.theta, kPi / 4);
  take_list("phi1", cfg.phi1, 0.0);
  take_list("phi2", cfg.phi2, 0.0);
  if (cfg.coin_kind == CoinKind::Hadamard) cfg.theta = {kPi / 4};

  if (cfg.coin_kind == CoinKind::File) {
    Eigen::Index n = 0;
    try {
      n = read_coin_file(cfg.coin_file).rows();
    } catch (const qwalk::Error& e) {
      bad("coin_file", e.what());
    }
    if (!is_power_of_two(n) || n < 2) bad("coin_file", "dimension " + std::to_string(n) + " is not a power of two >= 2");
    int d = 0;
    for (Eigen::Index m = n; m > 1; m >>= 1) ++d;
    if (dim_given && *dim_given != d) bad("dim", "coin_file has walk dimension " + std::to_string(d));
    cfg.dim = d;
  } else {
    if (dim_given && list_len && *dim_given != *list_len) bad("dim", "does not match the coin angle lists");
    cfg.dim = dim_given.value_or(list_len.value_or(1));
  }
  for (auto* list : {&cfg.theta, &cfg.phi1, &cfg.phi2}) {
    if (list->size() == 1) list->assign(static_cast<std::size_t>(cfg.dim), list->front());
  }
  for (int i = 0; i < cfg.dim; ++i) {
    try {
      CoinParams{cfg.theta[i], cfg.phi1[i], cfg.phi2[i]}.validate();
    } catch (const qwalk::Error& e) {
      bad("theta/phi1/phi2", e.what());
    }
  }
  if (cfg.coin_kind != CoinKind::File) {
    try {
      (void)cfg.coin();
    } catch (const qwalk::Error& e) {
      bad("coin", e.what());
    }
  }

  cfg.g_phi1 = cfg.phi1[0];
  cfg.g_phi2 = cfg.phi2[0];
  if (auto v = get("g_phi1")) cfg.g_phi1 = parse_real("g_phi1", *v);
  if (auto v = get("g_phi2")) cfg.g_phi2 = parse_real("g_phi2", *v);
  if (!(cfg.g_phi1 >= 0 && cfg.g_phi1 < kPi)) bad("g_phi1", "outside [0, pi)");
  if (!(cfg.g_phi2 >= 0 && cfg.g_phi2 < kPi)) bad("g_phi2", "outside [0, pi)");
  cfg.g_mismatched = cfg.g_phi1 != cfg.phi1[0] || cfg.g_phi2 != cfg.phi2[0];

  // run lengths
  constexpr int kMaxSteps = 1 << 20;
  if (auto v = get("steps")) cfg.steps = parse_int("steps", *v, 0, kMaxSteps);
  if (auto v = get("l")) cfg.l = parse_int("l", *v, 1, kMaxSteps);
  else if (mode == Mode::Spectral) cfg.l = 3;
  if (auto v = get("cycles")) cfg.cycles = parse_int("cycles", *v, 1, 4096);
  if (auto v = get("schedule")) {
    if (!trim(*v).empty()) cfg.schedule = parse_int_list("schedule", *v, ',', 1, cfg.steps);
    for (std::size_t i = 1; i < cfg.schedule.size(); ++i)
      if (cfg.schedule[i] <= cfg.schedule[i - 1]) bad("schedule", "steps must be strictly increasing");
    if (mode != Mode::Walk && mode != Mode::Crosscheck) bad("schedule", std::string("not used by mode ") + mode_name(mode));
    if (!cfg.schedule.empty() && cfg.dim != 1) bad("schedule", "interventions need dim = 1");
  }

  // lattice
  const std::size_t n = static_cast<std::size_t>(cfg.dim);
  if (auto v = get("lattice")) {
    cfg.lattice = parse_int_list("lattice", *v, 'x', 2, 1 << 24);
    if (cfg.lattice.size() == 1 && n > 1) cfg.lattice.assign(n, cfg.lattice.front());
    if (cfg.lattice.size() != n) bad("lattice", "needs " + std::to_string(n) + " extents");
  } else {
    int extent = 8;
    switch (mode) {
      case Mode::Walk:
      case Mode::Crosscheck:
      case Mode::Scan: extent = line_extent(cfg.steps); break;
      case Mode::Revert:
      case Mode::Periodic: extent = line_extent(2LL * cfg.l); break;
      case Mode::Spectral: extent = n == 1 ? 64 : n == 2 ? 32 : 8; break;
    }
    const int cap = n == 1 ? 1 << 20 : n == 2 ? 256 : 16;
    cfg.lattice.assign(n, std::min(extent, cap));
  }
  long long total_sites = 1;
  for (int e : cfg.lattice) {
    if (!is_power_of_two(e)) bad("lattice", "extent " + std::to_string(e) + " is not a power of two");
    total_sites *= e;
  }
  if (total_sites * (1LL << n) > (1LL << 26)) bad("lattice", "state would exceed 2^26 amplitudes");
  const LatticeSpec lat(cfg.lattice);

  switch (mode) {
    case Mode::Revert:
    case Mode::Periodic:
      (void)cfg.coin_params();
      if (!lat.emulates_line(2 * cfg.l)) bad("lattice", "too small for 2l steps without wraparound");
      break;
    case Mode::Scan:
      (void)cfg.coin_params();
      if (!lat.emulates_line(cfg.steps)) bad("lattice", "too small for the scan without wraparound");
      break;
    default: break;
  }

  // initial state
  if (auto v = get("coin_index")) cfg.coin_index = parse_int("coin_index", *v, 0, (1 << n) - 1);
  else cfg.coin_index = 1;
  if (auto v = get("site")) {
    cfg.site = parse_int_list("site", *v, ',', -(1 << 24), 1 << 24);
    if (cfg.site.size() != n) bad("site", "needs " + std::to_string(n) + " coordinates");
  }
  if (auto v = get("state_file")) {
    if (get("coin_index") || get("site")) bad("state_file", "conflicts with coin_index/site");
    cfg.state_file = *v;
    (void)cfg.initial_state();
  }

  const double default_tol = mode == Mode::Crosscheck ? 1e-8 : mode == Mode::Walk ? 1e-10 : 1e-9;
  cfg.tol = default_tol;
  if (auto v = get("tol")) {
    cfg.tol = parse_real("tol", *v);
    if (!(cfg.tol > 0)) bad("tol", "must be positive");
  }
  return cfg;
}

}  // namespace qwalk::cli
