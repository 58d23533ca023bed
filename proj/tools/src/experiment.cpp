#include "cranopt_cli/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "cranopt/errors.hpp"

namespace cranopt::cli {

using nlohmann::json;

namespace {

double from_db(double db) { return std::pow(10.0, db / 10.0); }

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config: key '" + key + "' " + what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(where.empty() ? "<root>" : where, "must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) fail(where.empty() ? k : where + "." + k, "is not recognized");
  }
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) fail(key, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(key, "must be finite");
  return x;
}

int integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) fail(key, "must be an integer");
  return v.get<int>();
}

bool boolean(const json& v, const std::string& key) {
  if (!v.is_boolean()) fail(key, "must be true or false");
  return v.get<bool>();
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) fail(key, "must be a string");
  return v.get<std::string>();
}

/// A scalar broadcast to `n` entries, or a list of exactly `n` entries.
std::vector<double> numbers(const json& v, const std::string& key, int n) {
  if (v.is_array()) {
    if (static_cast<int>(v.size()) != n) fail(key, "must list " + std::to_string(n) + " values");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], key + "[" + std::to_string(i) + "]"));
    return out;
  }
  return std::vector<double>(static_cast<std::size_t>(n), number(v, key));
}

std::vector<int> integers(const json& v, const std::string& key, int n) {
  if (v.is_array()) {
    if (static_cast<int>(v.size()) != n) fail(key, "must list " + std::to_string(n) + " values");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(integer(v[i], key + "[" + std::to_string(i) + "]"));
    return out;
  }
  return std::vector<int>(static_cast<std::size_t>(n), integer(v, key));
}

cplx entry(const json& v, const std::string& key) {
  if (v.is_number()) return {number(v, key), 0.0};
  if (v.is_array() && v.size() == 2) return {number(v[0], key + "[0]"), number(v[1], key + "[1]")};
  fail(key, "must be a number or a [re, im] pair");
}

void apply_network(const json& n, NetworkConfig& net) {
  check_keys(n, "network", {"n_bs", "n_ms", "bs_antennas", "ms_antennas", "streams", "power_db",
                            "power", "backhaul", "weights"});
  const int nb = n.contains("n_bs") ? integer(n["n_bs"], "network.n_bs") : net.n_bs();
  const int nm = n.contains("n_ms") ? integer(n["n_ms"], "network.n_ms") : net.n_ms();
  if (nb < 1) fail("network.n_bs", "must be >= 1");
  if (nm < 1) fail("network.n_ms", "must be >= 1");
  auto resize_int = [](std::vector<int>& v, int size) {
    v.resize(static_cast<std::size_t>(size), v.empty() ? 1 : v.back());
  };
  auto resize_double = [](std::vector<double>& v, int size, double dflt) {
    v.resize(static_cast<std::size_t>(size), v.empty() ? dflt : v.back());
  };
  resize_int(net.bs_antennas, nb);
  resize_int(net.ms_antennas, nm);
  resize_double(net.powers, nb, 1.0);
  resize_double(net.backhaul, nb, 1.0);
  resize_double(net.weights, nm, 1.0);
  if (!net.streams.empty()) net.streams.resize(static_cast<std::size_t>(nm), net.streams.back());
  if (n.contains("bs_antennas")) net.bs_antennas = integers(n["bs_antennas"], "network.bs_antennas", nb);
  if (n.contains("ms_antennas")) net.ms_antennas = integers(n["ms_antennas"], "network.ms_antennas", nm);
  if (n.contains("streams")) net.streams = integers(n["streams"], "network.streams", nm);
  if (n.contains("power_db") && n.contains("power")) fail("network.power", "conflicts with network.power_db");
  if (n.contains("power_db")) {
    net.powers = numbers(n["power_db"], "network.power_db", nb);
    for (auto& p : net.powers) p = from_db(p);
  }
  if (n.contains("power")) net.powers = numbers(n["power"], "network.power", nb);
  if (n.contains("backhaul")) net.backhaul = numbers(n["backhaul"], "network.backhaul", nb);
  if (n.contains("weights")) net.weights = numbers(n["weights"], "network.weights", nm);
}

void apply_channel(const json& c, ChannelModel& ch) {
  check_keys(c, "channel", {"model", "g", "alpha_db", "alpha", "h"});
  if (c.contains("model")) {
    const auto m = text(c["model"], "channel.model");
    if (m == "wyner") {
      ch.kind = ChannelModel::Kind::Wyner;
    } else if (m == "fading") {
      ch.kind = ChannelModel::Kind::Fading;
    } else if (m == "explicit") {
      ch.kind = ChannelModel::Kind::Explicit;
    } else {
      fail("channel.model", "must be one of wyner, fading, explicit");
    }
  }
  if (c.contains("g")) ch.g = number(c["g"], "channel.g");
  if (c.contains("alpha_db") && c.contains("alpha")) fail("channel.alpha", "conflicts with channel.alpha_db");
  if (c.contains("alpha_db")) ch.alpha = from_db(number(c["alpha_db"], "channel.alpha_db"));
  if (c.contains("alpha")) ch.alpha = number(c["alpha"], "channel.alpha");
  if (c.contains("h")) {
    const json& h = c["h"];
    if (!h.is_array()) fail("channel.h", "must be a list with one matrix per MS");
    ch.h.clear();
    for (std::size_t k = 0; k < h.size(); ++k) {
      const std::string key = "channel.h[" + std::to_string(k) + "]";
      const json& m = h[k];
      if (!m.is_array() || m.empty() || !m[0].is_array()) fail(key, "must be a list of rows");
      CMatrix mat(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m[0].size()));
      for (std::size_t r = 0; r < m.size(); ++r) {
        if (!m[r].is_array() || m[r].size() != m[0].size()) fail(key, "rows must have equal length");
        for (std::size_t q = 0; q < m[r].size(); ++q) {
          mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) =
              entry(m[r][q], key + "[" + std::to_string(r) + "][" + std::to_string(q) + "]");
        }
      }
      ch.h.push_back(std::move(mat));
    }
  }
}

void apply_solver(const json& s, SolverOptions& opt) {
  check_keys(s, "solver", {"max_iterations", "rel_tol", "feasibility_tol", "corner_tol"});
  if (s.contains("max_iterations")) opt.max_iterations = integer(s["max_iterations"], "solver.max_iterations");
  if (s.contains("rel_tol")) opt.rel_tol = number(s["rel_tol"], "solver.rel_tol");
  if (s.contains("feasibility_tol")) opt.feasibility_tol = number(s["feasibility_tol"], "solver.feasibility_tol");
  if (s.contains("corner_tol")) opt.corner_tol = number(s["corner_tol"], "solver.corner_tol");
}

ExperimentConfig base_network() {
  ExperimentConfig c;
  c.network = NetworkConfig::uniform(3, 3, 2, 1, from_db(5.0), 2.0);
  c.channel.kind = ChannelModel::Kind::Fading;
  c.channel.alpha = 1.0;
  c.trials = 50;
  return c;
}

const std::set<std::string> kSweepVars = {"C", "P", "alpha", "gamma", "g"};

std::string format_number(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    network.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: network: ") + e.what());
  }
  if (schemes.empty() && !cutset) fail("schemes", "must name at least one scheme");
  if (trials < 1) fail("trials", "must be >= 1");
  if (jobs < 0) fail("jobs", "must be >= 0");
  if (solver.max_iterations < 1) fail("solver.max_iterations", "must be >= 1");
  if (!(solver.rel_tol >= 0.0)) fail("solver.rel_tol", "must be >= 0");
  switch (channel.kind) {
    case ChannelModel::Kind::Wyner:
      if (!(channel.g >= 0.0 && channel.g <= 1.0)) fail("channel.g", "must lie in [0, 1]");
      break;
    case ChannelModel::Kind::Fading:
      if (!(channel.alpha > 0.0 && channel.alpha <= 1.0)) fail("channel.alpha", "must lie in (0, 1]");
      break;
    case ChannelModel::Kind::Explicit:
      if (static_cast<int>(channel.h.size()) != network.n_ms()) fail("channel.h", "needs one matrix per MS");
      break;
  }
  if (gamma && !(*gamma > 0.0 && *gamma < 1.0)) fail("gamma", "must lie in (0, 1)");
  for (double e : robust_eps) {
    if (!(e >= 0.0 && e < 1.0)) fail("robust_eps", "entries must lie in [0, 1)");
  }
  if (!robust_eps.empty() && static_cast<int>(robust_eps.size()) != network.n_ms()) {
    fail("robust_eps", "needs one entry per MS");
  }
  if (sweep) {
    if (!kSweepVars.count(sweep->variable)) fail("sweep.variable", "must be one of C, P, alpha, gamma, g");
    if (sweep->values.empty()) fail("sweep.values", "must not be empty");
    for (double v : sweep->values) {
      if (!std::isfinite(v)) fail("sweep.values", "must be finite");
      if (sweep->variable == "C" && v < 0.0) fail("sweep.values", "backhaul must be >= 0");
      if (sweep->variable == "alpha" && v > 0.0) fail("sweep.values", "alpha in dB must be <= 0");
      if (sweep->variable == "gamma" && !(v > 0.0 && v < 1.0)) fail("sweep.values", "gamma must lie in (0, 1)");
      if (sweep->variable == "g" && !(v >= 0.0 && v <= 1.0)) fail("sweep.values", "g must lie in [0, 1]");
    }
    if (sweep->variable == "alpha" && channel.kind != ChannelModel::Kind::Fading) {
      fail("sweep.variable", "alpha needs the fading channel model");
    }
    if (sweep->variable == "g" && channel.kind != ChannelModel::Kind::Wyner) {
      fail("sweep.variable", "g needs the wyner channel model");
    }
  }
}

std::vector<std::string> preset_names() { return {"fig3", "fig5", "fig6", "fig7", "fig8", "fig9"}; }

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c = base_network();
  c.preset = name;
  if (name == "fig3") {
    c.network = NetworkConfig::uniform(3, 3, 1, 1, from_db(20.0), 0.0);
    c.channel.kind = ChannelModel::Kind::Wyner;
    c.channel.g = 0.5;
    c.sweep = Sweep{"C", {0, 1, 2, 3, 4, 5, 6}};
    c.schemes = {Scheme::JointIndependent, Scheme::JointMultivariate, Scheme::DpcIndependent,
                 Scheme::DpcMultivariate};
    c.trials = 1;  // deterministic channels
  } else if (name == "fig5") {
    c.sweep = Sweep{"gamma", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}};
    c.schemes = {Scheme::SeparateMultivariate, Scheme::SeparateIndependent};
  } else if (name == "fig6") {
    c.sweep = Sweep{"P", {0, 5, 10, 15, 20}};
    c.schemes = {Scheme::JointMultivariate, Scheme::JointIndependent, Scheme::SeparateMultivariate,
                 Scheme::SeparateIndependent};
    c.cutset = true;
  } else if (name == "fig7") {
    c.sweep = Sweep{"P", {0, 5, 10, 15, 20}};
    c.schemes = {Scheme::JointMultivariate, Scheme::JointIndependent, Scheme::DpcMultivariate,
                 Scheme::DpcIndependent};
  } else if (name == "fig8") {
    c.sweep = Sweep{"C", {1, 2, 3, 4, 5, 6, 7, 8}};
    c.schemes = {Scheme::JointMultivariate, Scheme::JointIndependent, Scheme::SeparateMultivariate,
                 Scheme::SeparateIndependent, Scheme::FullCooperation};
  } else if (name == "fig9") {
    c.sweep = Sweep{"alpha", {-20, -15, -10, -5, 0}};
    c.schemes = {Scheme::JointMultivariate, Scheme::JointIndependent, Scheme::SeparateMultivariate,
                 Scheme::SeparateIndependent};
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

Sweep parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("sweep must look like VAR=v1,v2,...");
  Sweep s;
  s.variable = spec.substr(0, eq);
  std::stringstream ss(spec.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      s.values.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("sweep value '" + item + "' is not a number");
    }
  }
  if (!kSweepVars.count(s.variable)) throw ConfigError("sweep variable must be one of C, P, alpha, gamma, g");
  if (s.values.empty()) throw ConfigError("sweep needs at least one value");
  return s;
}

ExperimentConfig parse_config(const std::string& source) {
  json root;
  try {
    root = json::parse(source);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < source.size(); ++i) {
      if (source[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    // nlohmann prefixes its own position text; keep only the reason.
    std::string reason = e.what();
    if (const auto at = reason.find(": ", reason.find("column")); at != std::string::npos) {
      reason = reason.substr(at + 2);
    }
    throw ConfigError("config: syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + reason);
  }
  check_keys(root, "", {"preset", "network", "channel", "schemes", "cutset", "trials", "seed", "sweep",
                        "gamma", "robust_eps", "solver", "output", "timing", "jobs"});
  ExperimentConfig c = base_network();
  c.trials = 1;
  if (root.contains("preset")) c = preset(text(root["preset"], "preset"));
  if (root.contains("network")) apply_network(root["network"], c.network);
  if (root.contains("channel")) apply_channel(root["channel"], c.channel);
  if (root.contains("schemes")) {
    const json& s = root["schemes"];
    if (!s.is_array()) fail("schemes", "must be a list of scheme names");
    c.schemes.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string key = "schemes[" + std::to_string(i) + "]";
      const auto name = text(s[i], key);
      if (name == "cutset") {
        c.cutset = true;
        continue;
      }
      const auto sc = parse_scheme(name);
      if (!sc) fail(key, "names an unknown scheme '" + name + "'");
      c.schemes.push_back(*sc);
    }
  }
  if (root.contains("cutset")) c.cutset = boolean(root["cutset"], "cutset");
  if (root.contains("trials")) c.trials = integer(root["trials"], "trials");
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) fail("seed", "must be a non-negative integer");
    c.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("sweep")) {
    const json& s = root["sweep"];
    check_keys(s, "sweep", {"variable", "values"});
    Sweep sw;
    if (!s.contains("variable")) fail("sweep.variable", "is required");
    sw.variable = text(s["variable"], "sweep.variable");
    if (!s.contains("values") || !s["values"].is_array()) fail("sweep.values", "must be a list of numbers");
    for (std::size_t i = 0; i < s["values"].size(); ++i) {
      sw.values.push_back(number(s["values"][i], "sweep.values[" + std::to_string(i) + "]"));
    }
    c.sweep = sw;
  }
  if (root.contains("gamma")) c.gamma = number(root["gamma"], "gamma");
  if (root.contains("robust_eps")) {
    const json& e = root["robust_eps"];
    c.robust_eps = numbers(e, "robust_eps", e.is_array() ? static_cast<int>(e.size()) : c.network.n_ms());
  }
  if (root.contains("solver")) apply_solver(root["solver"], c.solver);
  if (root.contains("output")) c.output = text(root["output"], "output");
  if (root.contains("timing")) c.timing = boolean(root["timing"], "timing");
  if (root.contains("jobs")) c.jobs = integer(root["jobs"], "jobs");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Instance make_instance(const ExperimentConfig& c, std::optional<double> value, int trial) {
  Instance inst;
  inst.cfg = c.network;
  inst.gamma = c.gamma;
  ChannelModel ch = c.channel;
  if (value) {
    const std::string& var = c.sweep->variable;
    if (var == "C") std::fill(inst.cfg.backhaul.begin(), inst.cfg.backhaul.end(), *value);
    if (var == "P") std::fill(inst.cfg.powers.begin(), inst.cfg.powers.end(), from_db(*value));
    if (var == "alpha") ch.alpha = from_db(*value);
    if (var == "g") ch.g = *value;
    if (var == "gamma") inst.gamma = *value;
  }
  const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(trial);
  switch (ch.kind) {
    case ChannelModel::Kind::Wyner: inst.chans = wyner_channels(inst.cfg, ch.g); break;
    case ChannelModel::Kind::Fading: inst.chans = fading_channels(inst.cfg, ch.alpha, seed); break;
    case ChannelModel::Kind::Explicit: inst.chans = ChannelSet(inst.cfg, ch.h); break;
  }
  return inst;
}

namespace {

Row solve_row(const ExperimentConfig& c, const Instance& inst, std::optional<Scheme> scheme) {
  Row row;
  row.scheme = scheme ? to_string(*scheme) : "cutset";
  ProblemSpec spec;
  spec.cfg = inst.cfg;
  spec.chans = inst.chans;
  spec.scheme = scheme ? *scheme : Scheme::Cutset;
  spec.gamma = inst.gamma;
  spec.options = c.solver;
  if (scheme == Scheme::JointMultivariate) spec.robust_eps = c.robust_eps;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const SolveResult r = solve(spec);
    row.sum_rate = r.sum_rate;
    row.status = to_string(r.status);
    row.iterations = r.iterations;
  } catch (const InfeasibleError&) {
    row.status = "infeasible";
  } catch (const DomainError&) {
    row.status = "error";
  }
  if (c.timing) row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

}  // namespace

std::vector<Row> run_experiment(const ExperimentConfig& c) {
  c.validate();
  std::vector<std::optional<double>> values;
  if (c.sweep) {
    for (double v : c.sweep->values) values.emplace_back(v);
  } else {
    values.emplace_back(std::nullopt);
  }
  std::vector<std::optional<Scheme>> columns(c.schemes.begin(), c.schemes.end());
  if (c.cutset) columns.emplace_back(std::nullopt);

  // One job per (sweep value, trial): every scheme sees the same channel draw.
  const std::size_t n_jobs = values.size() * static_cast<std::size_t>(c.trials);
  std::vector<std::vector<Row>> results(n_jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < n_jobs; j = next++) {
      const auto& value = values[j / static_cast<std::size_t>(c.trials)];
      const int trial = static_cast<int>(j % static_cast<std::size_t>(c.trials));
      const Instance inst = make_instance(c, value, trial);
      for (const auto& col : columns) {
        Row row = solve_row(c, inst, col);
        row.preset = c.preset;
        row.sweep_var = c.sweep ? c.sweep->variable : "none";
        row.sweep_value = value.value_or(0.0);
        row.trial = trial;
        row.seed = c.seed + static_cast<std::uint64_t>(trial);
        results[j].push_back(std::move(row));
      }
    }
  };
  unsigned n_workers = c.jobs > 0 ? static_cast<unsigned>(c.jobs) : std::thread::hardware_concurrency();
  n_workers = std::max(1U, std::min<unsigned>(n_workers, static_cast<unsigned>(n_jobs)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<Row> rows;
  for (std::size_t v = 0; v < values.size(); ++v) {
    for (std::size_t col = 0; col < columns.size(); ++col) {
      for (int t = 0; t < c.trials; ++t) {
        rows.push_back(results[v * static_cast<std::size_t>(c.trials) + static_cast<std::size_t>(t)][col]);
      }
    }
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<Row>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.preset << ',' << r.scheme << ',' << r.sweep_var << ','
        << (r.sweep_var == "none" ? std::string() : format_number(r.sweep_value, 6)) << ',' << r.trial
        << ',' << r.seed << ',' << format_number(r.sum_rate, 10) << ',' << r.status << ','
        << r.iterations << ',' << format_number(r.wall_ms, 6) << '\n';
  }
}

SolveOnce solve_once(const ExperimentConfig& c) {
  c.validate();
  SolveOnce s;
  s.scheme = c.schemes.empty() ? Scheme::Cutset : c.schemes.front();
  s.instance = make_instance(c, std::nullopt, 0);
  ProblemSpec spec;
  spec.cfg = s.instance.cfg;
  spec.chans = s.instance.chans;
  spec.scheme = s.scheme;
  spec.gamma = s.instance.gamma;
  spec.options = c.solver;
  spec.robust_eps = c.robust_eps;
  s.result = solve(spec);
  return s;
}

namespace {

std::string subset_name(BsSubset s) {
  std::string out = "{";
  bool first = true;
  for (int i : subset_members(s)) {
    out += (first ? "" : ",") + std::to_string(i + 1);
    first = false;
  }
  return out + "}";
}

std::string ordering_name(const std::vector<int>& perm) {
  std::string out = "(";
  for (std::size_t i = 0; i < perm.size(); ++i) out += (i ? "," : "") + std::to_string(perm[i] + 1);
  return out + ")";
}

}  // namespace

void print_report(std::ostream& out, const SolveOnce& s) {
  const SolveResult& r = s.result;
  out << "scheme      " << to_string(s.scheme) << '\n';
  out << "status      " << to_string(r.status) << '\n';
  out << "iterations  " << r.iterations << '\n';
  out << "sum rate    " << format_number(r.sum_rate, 8) << " bits/c.u.\n";
  out << "MS rates   ";
  for (double v : r.rates.user_rates) out << ' ' << format_number(v, 8);
  out << '\n';
  if (!r.rates.backhaul.empty()) {
    out << "backhaul (subset: used / capacity)\n";
    for (const auto& u : r.rates.backhaul) {
      out << "  " << subset_name(u.subset) << ": " << format_number(u.bits, 8) << " / "
          << format_number(u.capacity, 8) << '\n';
    }
  }
  out << "BS power   ";
  for (double p : r.rates.bs_power) out << ' ' << format_number(p, 8);
  out << '\n';
  out << "active constraints\n";
  if (r.feasibility.active.empty()) out << "  none\n";
  for (std::size_t idx : r.feasibility.active) out << "  " << r.feasibility.describe(idx) << '\n';
  out << "worst violation " << format_number(r.feasibility.worst_violation, 4) << '\n';
  out << "corner ordering " << (r.ordering ? ordering_name(*r.ordering) : std::string("none")) << '\n';
}

std::string report_json(const SolveOnce& s) {
  const SolveResult& r = s.result;
  json j;
  j["scheme"] = to_string(s.scheme);
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["sum_rate_bits"] = r.sum_rate;
  j["user_rates"] = r.rates.user_rates;
  j["bs_power"] = r.rates.bs_power;
  json bh = json::array();
  for (const auto& u : r.rates.backhaul) {
    bh.push_back({{"subset", subset_members(u.subset)}, {"bits", u.bits}, {"capacity", u.capacity}});
  }
  j["backhaul"] = bh;
  json active = json::array();
  for (std::size_t idx : r.feasibility.active) active.push_back(r.feasibility.describe(idx));
  j["active_constraints"] = active;
  j["worst_violation"] = r.feasibility.worst_violation;
  j["ordering"] = r.ordering ? json(*r.ordering) : json(nullptr);
  j["trace"] = r.trace;
  return j.dump(2);
}

}  // namespace cranopt::cli
