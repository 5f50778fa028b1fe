#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "subdiff/core/errors.hpp"

namespace subdiff {

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

/// Flat `key = value` text: one key per line, `#` starts a comment, list values are comma separated.
class Config {
 public:
  static Config parse(std::string_view text) {
    Config c;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string_view line = raw;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw ConfigurationError("line " + std::to_string(line_no) + ": expected key = value");
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) throw ConfigurationError("line " + std::to_string(line_no) + ": empty key");
      if (c.values_.count(key)) throw ConfigurationError("line " + std::to_string(line_no) + ": duplicate key " + key);
      c.values_[key] = value;
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  /// Keys in sorted order, one per line.
  std::string serialize() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const { return values_; }
  bool operator==(const Config&) const = default;

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t v = 0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigurationError(key + ": expected a nonnegative integer, got '" + s + "'");
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigurationError(key + ": expected true or false, got '" + it->second + "'");
  }

  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::string_view rest = it->second;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      if (item.empty()) throw ConfigurationError(key + ": empty list entry");
      out.push_back(to_double(key, std::string(item)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
      if (trim(rest).empty()) throw ConfigurationError(key + ": trailing comma");
    }
    return out;
  }

  /// Keys not in `known`, for typo detection.
  std::vector<std::string> unknown_keys(const std::set<std::string>& known) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!known.count(k)) out.push_back(k);
    return out;
  }

 private:
  static std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static double to_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
      throw ConfigurationError(key + ": expected a number, got '" + s + "'");
    return v;
  }

  std::map<std::string, std::string> values_;
};

enum class CaseKind { SubDiffusion, NormalDiffusion };

/// Typed experiment description shared by every subcommand.
struct ExperimentConfig {
  CaseKind kind = CaseKind::SubDiffusion;
  double alpha = 0.5;
  double d0 = 1.0;
  double beta = 4.0;
  bool beta_override = false;
  std::vector<double> epsilons{0.2, 0.1, 0.05};
  double da = 1.0;
  std::size_t cells = 512;
  double domain_length = 2.0 * std::numbers::pi;
  double dt = 1e-3;
  double t_end = 1.0;
  std::vector<double> snapshot_times{1.0};
  std::vector<double> comparison_times{1.0};
  std::string kernel = "triangular";
  double kernel_sigma = 0.5;
  std::string initial_profile = "cosine";
  double profile_mean = 1.0;
  double profile_amplitude = 0.5;
  double profile_center = std::numbers::pi;
  double profile_width = 0.5;
  double age_rate = 1.0;
  double moment_factor = 0.5;
  std::uint64_t seed = 1;
  std::size_t particles = 100000;
  unsigned threads = 1;
  std::size_t bins = 32;
  std::size_t bootstrap = 100;
  std::string method = "modal-continuum";
  std::vector<double> msd_window{10.0, 1000.0};
  double msd_tolerance = 0.1;
  double tolerance = 1e-5;
  std::vector<double> alphas{0.25, 0.5, 0.75};
  std::vector<double> decay_deltas;
  bool spatial = true;
  double reference_dt_floor = 5e-4;
  double reference_dx_divisor = 16.0;
  std::string output_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;

  static const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "case", "alpha", "d0", "beta", "beta_override", "epsilons", "da", "cells", "domain_length", "dt", "t_end",
        "snapshot_times", "comparison_times", "kernel", "kernel_sigma", "initial_profile", "profile_mean",
        "profile_amplitude", "profile_center", "profile_width", "age_profile", "age_rate", "moment_factor", "seed",
        "particles", "threads", "bins", "bootstrap", "method", "msd_window", "msd_tolerance", "tolerance", "alphas",
        "decay_deltas", "spatial", "reference_dt_floor", "reference_dx_divisor", "output_dir"};
    return keys;
  }

  /// Reads and validates; absent keys keep their defaults, and beta follows the case unless overridden.
  static ExperimentConfig from(const Config& c) {
    if (const auto unknown = c.unknown_keys(known_keys()); !unknown.empty())
      throw ConfigurationError("unknown config key '" + unknown.front() + "'");
    ExperimentConfig e;
    const std::string kind = c.get_string("case", "subdiffusion");
    if (kind == "subdiffusion") e.kind = CaseKind::SubDiffusion;
    else if (kind == "diffusion") e.kind = CaseKind::NormalDiffusion;
    else throw ConfigurationError("case must be 'subdiffusion' or 'diffusion'");
    e.alpha = c.get_double("alpha", e.alpha);
    e.d0 = c.get_double("d0", e.d0);
    e.beta_override = c.get_bool("beta_override", false);
    e.beta = e.kind == CaseKind::SubDiffusion ? 2.0 / e.alpha : 2.0;
    if (c.has("beta")) {
      const double b = c.get_double("beta", e.beta);
      if (!e.beta_override && std::abs(b - e.beta) > 1e-12 * e.beta)
        throw ConfigurationError("beta must equal " + format_double(e.beta) +
                                 " for this case; set beta_override = true to change it");
      e.beta = b;
    }
    e.epsilons = c.get_list("epsilons", e.epsilons);
    e.da = c.get_double("da", e.kind == CaseKind::SubDiffusion ? 1.0 : 0.05);
    e.cells = c.get_u64("cells", e.cells);
    e.domain_length = c.get_double("domain_length", e.domain_length);
    e.dt = c.get_double("dt", e.dt);
    e.t_end = c.get_double("t_end", e.t_end);
    e.snapshot_times = c.get_list("snapshot_times", {e.t_end});
    e.comparison_times = c.get_list("comparison_times", {e.t_end});
    e.kernel = c.get_string("kernel", e.kernel);
    e.kernel_sigma = c.get_double("kernel_sigma", e.kernel_sigma);
    e.initial_profile = c.get_string("initial_profile", e.initial_profile);
    e.profile_mean = c.get_double("profile_mean", e.profile_mean);
    e.profile_amplitude = c.get_double("profile_amplitude", e.profile_amplitude);
    e.profile_center = c.get_double("profile_center", 0.5 * e.domain_length);
    e.profile_width = c.get_double("profile_width", e.profile_width);
    if (c.get_string("age_profile", "exponential") != "exponential")
      throw ConfigurationError("age_profile must be 'exponential'");
    e.age_rate = c.get_double("age_rate", e.age_rate);
    e.moment_factor = c.get_double("moment_factor", e.moment_factor);
    e.seed = c.get_u64("seed", e.seed);
    e.particles = c.get_u64("particles", e.particles);
    e.threads = static_cast<unsigned>(c.get_u64("threads", e.threads));
    e.bins = c.get_u64("bins", e.bins);
    e.bootstrap = c.get_u64("bootstrap", e.bootstrap);
    e.method = c.get_string("method", e.method);
    e.msd_window = c.get_list("msd_window", e.msd_window);
    e.msd_tolerance = c.get_double("msd_tolerance", e.msd_tolerance);
    e.tolerance = c.get_double("tolerance", e.tolerance);
    e.alphas = c.get_list("alphas", e.alphas);
    e.decay_deltas = c.get_list("decay_deltas", e.decay_deltas);
    e.spatial = c.get_bool("spatial", e.spatial);
    e.reference_dt_floor = c.get_double("reference_dt_floor", e.reference_dt_floor);
    e.reference_dx_divisor = c.get_double("reference_dx_divisor", e.reference_dx_divisor);
    e.output_dir = c.get_string("output_dir", e.output_dir);
    e.validate();
    return e;
  }

  /// Every field written explicitly; from(to_config()) reproduces the struct.
  Config to_config() const {
    Config c;
    c.set("case", kind == CaseKind::SubDiffusion ? "subdiffusion" : "diffusion");
    c.set("alpha", format_double(alpha));
    c.set("d0", format_double(d0));
    c.set("beta", format_double(beta));
    c.set("beta_override", beta_override ? "true" : "false");
    c.set("epsilons", format_list(epsilons));
    c.set("da", format_double(da));
    c.set("cells", std::to_string(cells));
    c.set("domain_length", format_double(domain_length));
    c.set("dt", format_double(dt));
    c.set("t_end", format_double(t_end));
    c.set("snapshot_times", format_list(snapshot_times));
    c.set("comparison_times", format_list(comparison_times));
    c.set("kernel", kernel);
    c.set("kernel_sigma", format_double(kernel_sigma));
    c.set("initial_profile", initial_profile);
    c.set("profile_mean", format_double(profile_mean));
    c.set("profile_amplitude", format_double(profile_amplitude));
    c.set("profile_center", format_double(profile_center));
    c.set("profile_width", format_double(profile_width));
    c.set("age_profile", "exponential");
    c.set("age_rate", format_double(age_rate));
    c.set("moment_factor", format_double(moment_factor));
    c.set("seed", std::to_string(seed));
    c.set("particles", std::to_string(particles));
    c.set("threads", std::to_string(threads));
    c.set("bins", std::to_string(bins));
    c.set("bootstrap", std::to_string(bootstrap));
    c.set("method", method);
    c.set("msd_window", format_list(msd_window));
    c.set("msd_tolerance", format_double(msd_tolerance));
    c.set("tolerance", format_double(tolerance));
    c.set("alphas", format_list(alphas));
    c.set("decay_deltas", format_list(decay_deltas));
    c.set("spatial", spatial ? "true" : "false");
    c.set("reference_dt_floor", format_double(reference_dt_floor));
    c.set("reference_dx_divisor", format_double(reference_dx_divisor));
    c.set("output_dir", output_dir);
    return c;
  }

  void validate() const {
    if (kind == CaseKind::SubDiffusion && !(alpha > 0.0 && alpha < 1.0))
      throw ConfigurationError("alpha must lie in (0, 1)");
    if (kind == CaseKind::NormalDiffusion && !(d0 > 0.0)) throw ConfigurationError("d0 must be positive");
    if (!(beta > 0.0)) throw ConfigurationError("beta must be positive");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
      if (!(epsilons[i] > 0.0)) throw ConfigurationError("epsilons must be positive");
      if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw ConfigurationError("epsilons must be strictly decreasing");
    }
    if (!(da > 0.0)) throw ConfigurationError("da must be positive");
    if (cells < 2) throw ConfigurationError("cells must be at least 2");
    if (!(domain_length > 0.0)) throw ConfigurationError("domain_length must be positive");
    if (!(dt > 0.0)) throw ConfigurationError("dt must be positive");
    if (!(t_end > 0.0)) throw ConfigurationError("t_end must be positive");
    auto check_times = [&](const std::vector<double>& ts, const char* name) {
      for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(ts[i] >= 0.0) || ts[i] > t_end * (1.0 + 1e-12))
          throw ConfigurationError(std::string(name) + " must lie in [0, t_end]");
        if (i > 0 && !(ts[i] > ts[i - 1])) throw ConfigurationError(std::string(name) + " must be increasing");
      }
    };
    check_times(snapshot_times, "snapshot_times");
    check_times(comparison_times, "comparison_times");
    if (kernel != "triangular" && kernel != "gaussian" && kernel != "dirac")
      throw ConfigurationError("kernel must be triangular, gaussian or dirac");
    if (initial_profile != "cosine" && initial_profile != "uniform" && initial_profile != "gaussian")
      throw ConfigurationError("initial_profile must be cosine, uniform or gaussian");
    if (!(age_rate > 0.0)) throw ConfigurationError("age_rate must be positive");
    if (!(moment_factor > 0.0)) throw ConfigurationError("moment_factor must be positive");
    if (particles == 0) throw ConfigurationError("particles must be positive");
    if (threads == 0) throw ConfigurationError("threads must be positive");
    if (bins == 0) throw ConfigurationError("bins must be positive");
    if (method != "modal-continuum" && method != "modal-discrete" && method != "direct")
      throw ConfigurationError("method must be modal-continuum, modal-discrete or direct");
    if (msd_window.size() != 2 || !(msd_window[0] > 0.0) || !(msd_window[1] > msd_window[0]))
      throw ConfigurationError("msd_window must be two increasing positive times");
    if (!(tolerance > 0.0)) throw ConfigurationError("tolerance must be positive");
    for (double a : alphas)
      if (!(a > 0.0 && a < 1.0)) throw ConfigurationError("alphas must lie in (0, 1)");
    for (double d : decay_deltas)
      if (!(d > 0.0 && d < 1.0)) throw ConfigurationError("decay_deltas must lie in (0, 1)");
    if (!(reference_dt_floor > 0.0)) throw ConfigurationError("reference_dt_floor must be positive");
    if (!(reference_dx_divisor >= 4.0)) throw ConfigurationError("reference_dx_divisor must be at least 4");
  }
};

}  // namespace subdiff
