#pragma once

// Experiment harness: JSON configuration, figure presets, Monte Carlo sweeps
// over fading draws and CSV output.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cranopt/optimizer.hpp"

namespace cranopt::cli {

/// Bad configuration: unknown key, wrong type, out-of-range value, bad JSON.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChannelModel {
  enum class Kind { Wyner, Fading, Explicit };
  Kind kind = Kind::Fading;
  double g = 0.5;      ///< Wyner inter-cell gain
  double alpha = 1.0;  ///< fading inter-cell gain, linear
  std::vector<CMatrix> h;  ///< explicit channels
};

struct Sweep {
  std::string variable;  ///< C | P | alpha | gamma | g
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string preset = "custom";
  NetworkConfig network;
  ChannelModel channel;
  std::vector<Scheme> schemes;
  bool cutset = false;
  int trials = 1;
  std::uint64_t seed = 0;
  std::optional<Sweep> sweep;
  std::optional<double> gamma;
  std::vector<double> robust_eps;
  SolverOptions solver;
  std::string output;
  bool timing = false;  ///< record wall-clock time; off keeps the CSV reproducible
  int jobs = 0;         ///< worker threads, 0 = hardware concurrency

  void validate() const;
};

/// Parses the JSON text of a config file. Errors name the offending key, or
/// the line and column for syntax errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
ExperimentConfig preset(const std::string& name);

/// "C=1,2,3" -> {C, {1, 2, 3}}
Sweep parse_sweep(const std::string& text);

struct Row {
  std::string preset;
  std::string scheme;
  std::string sweep_var;
  double sweep_value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double sum_rate = 0.0;
  std::string status;
  int iterations = 0;
  double wall_ms = 0.0;
};

inline constexpr const char* kCsvHeader =
    "preset,scheme,sweep_var,sweep_value,trial,seed,sum_rate_bits,status,iterations,wall_ms";

/// The network and channels of one (sweep value, trial) cell.
struct Instance {
  NetworkConfig cfg;
  ChannelSet chans;
  std::optional<double> gamma;
};
Instance make_instance(const ExperimentConfig& cfg, std::optional<double> sweep_value, int trial);

/// Rows in (sweep value, scheme, trial) order; cutset rows follow the schemes.
std::vector<Row> run_experiment(const ExperimentConfig& cfg);

void write_csv(std::ostream& out, const std::vector<Row>& rows);

/// Solves the first scheme of the config on trial 0 and prints a report.
struct SolveOnce {
  SolveResult result;
  Instance instance;
  Scheme scheme = Scheme::JointMultivariate;
};
SolveOnce solve_once(const ExperimentConfig& cfg);
void print_report(std::ostream& out, const SolveOnce& s);
/// Machine-readable record of the same report, as JSON text.
std::string report_json(const SolveOnce& s);

}  // namespace cranopt::cli
