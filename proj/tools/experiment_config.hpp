#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/coinspace.hpp"
#include "qwalk/lattice.hpp"

namespace qwalk::cli {

/// Invalid or inconsistent configuration. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Walk, Revert, Periodic, Spectral, Scan, Crosscheck };
enum class CoinKind { Param, Hadamard, Grover, File };
enum class Format { Csv, Json };

const char* mode_name(Mode m);
std::optional<Mode> parse_mode(const std::string& name);

/// Keys accepted in config files and as --key flags.
const std::vector<std::string>& config_keys();

/// Parses a flat `key = value` file. Blank lines and `#` comments are skipped.
std::map<std::string, std::string> read_config_file(const std::string& path);

struct ExperimentConfig {
  Mode mode = Mode::Walk;
  CoinKind coin_kind = CoinKind::Param;
  int dim = 1;
  std::vector<double> theta, phi1, phi2;
  std::string coin_file;
  std::vector<int> lattice;
  int coin_index = 1;
  std::vector<int> site;
  std::string state_file;
  int steps = 100;
  int l = 50;
  int cycles = 4;
  std::vector<int> schedule;
  bool trace = false;
  double g_phi1 = 0.0;
  double g_phi2 = 0.0;
  bool g_mismatched = false;
  bool record_timing = false;
  std::uint64_t seed = kDefaultSeed;
  double tol = 0.0;
  Format format = Format::Csv;
  std::string out;

  /// Merged key/value pairs as given, echoed into the manifest.
  std::map<std::string, std::string> echo;

  CoinOperator coin() const;
  /// Parameters of the single two-state coin; ConfigError for other coins.
  CoinParams coin_params() const;
  LatticeSpec lattice_spec() const { return LatticeSpec(lattice); }
  WalkerState initial_state() const;
};

/// Validates `values` for `mode` and fills in mode-dependent defaults.
ExperimentConfig build_config(Mode mode, const std::map<std::string, std::string>& values);

}  // namespace qwalk::cli
