// Experiment configuration: strict JSON schema (see docs/config.md).
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "erlab/bayes/linear_model.hpp"
#include "erlab/vc/threshold.hpp"

namespace erlab::cli {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Experiment { rls_bound, game, vc, rates, capacity, envelope };

inline constexpr Experiment kAllExperiments[] = {Experiment::rls_bound, Experiment::game,
                                                 Experiment::vc,        Experiment::rates,
                                                 Experiment::capacity,  Experiment::envelope};

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::rls_bound: return "rls-bound";
    case Experiment::game: return "game";
    case Experiment::vc: return "vc";
    case Experiment::rates: return "rates";
    case Experiment::capacity: return "capacity";
    case Experiment::envelope: return "envelope";
  }
  return "unknown";
}

struct Tolerances {
  double std_errors = 3.0;     ///< MC comparisons allow this many std errors
  double exact_slack = 1e-12;  ///< slack for exact inequalities
  double duality = 1e-9;       ///< LP primal vs dual
  double ba_tol = 1e-6;        ///< Blahut-Arimoto stopping gap
};

struct GameOptions {
  long n = 2;
  bool exact = true;
  std::vector<std::string> rows = {"posterior_sampling", "bayes_optimal", "constants"};
  int lattice_per_axis = 5;
  long fp_iters = 200000;
  double fp_tol = 1e-3;
};

struct EnvelopeOptions {
  std::size_t points = 50;
  long n = 8;
  std::size_t draws = 1000000;
  int lambda_points = 8;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::rls_bound;
  std::optional<bayes::LinearModelSpec> gaussian;
  std::optional<vc::ThresholdClassSpec> threshold;
  std::vector<long> ns;
  std::size_t reps = 100000;
  std::size_t info_reps = 0;  ///< MC reps for information terms; 0 means reps
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  Tolerances tol;
  GameOptions game;
  EnvelopeOptions envelope;
  json echo;  ///< normalized config written to config-echo.json

  [[nodiscard]] std::size_t information_reps() const { return info_reps ? info_reps : reps; }
};

namespace detail {

/// Reads keys from one JSON object and rejects any it did not read.
class Fields {
 public:
  Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  [[nodiscard]] bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& at(const std::string& key) {
    if (!has(key)) throw ConfigError(where_ + ": missing required key '" + key + "'");
    return obj_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    const json& v = at(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }

  [[nodiscard]] const std::string& where() const { return where_; }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

inline Vector to_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": expected numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Matrix to_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of rows");
  const Vector first = to_vector(j[0], where);
  Matrix m(static_cast<Eigen::Index>(j.size()), first.size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = to_vector(j[r], where);
    if (row.size() != first.size()) throw ConfigError(where + ": ragged rows");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

inline double positive(double v, const std::string& where) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(where + ": must be a positive number");
  return v;
}

inline bayes::LinearModelSpec parse_gaussian(const json& j) {
  Fields f(j, "model");
  (void)f.get<std::string>("type");
  bayes::LinearModelSpec spec;
  spec.d = f.get<long>("d");
  if (spec.d < 1) throw ConfigError("model.d: must be >= 1");
  spec.sigma_w = positive(f.get<double>("sigma_w"), "model.sigma_w");
  spec.sigma_e = positive(f.get<double>("sigma_e"), "model.sigma_e");
  spec.c = f.get_or<double>("c", 0.0);
  spec.mu_prior = f.has("mu_prior") ? to_vector(f.at("mu_prior"), "model.mu_prior")
                                    : Vector::Zero(spec.d);

  Eigen::Index in_dim = 1;
  {
    Fields ff(f.at("features"), "model.features");
    const auto kind = ff.get<std::string>("kind");
    if (kind == "identity") {
      spec.feature_map = bayes::IdentityFeatures{};
      in_dim = spec.d;
    } else if (kind == "constant") {
      spec.feature_map = bayes::MonomialFeatures{0};
    } else if (kind == "monomial") {
      spec.feature_map = bayes::MonomialFeatures{ff.get<int>("degree")};
    } else if (kind == "tabulated") {
      const Vector knots = to_vector(ff.at("knots"), "model.features.knots");
      spec.feature_map = bayes::TabulatedFeatures{
          std::vector<double>(knots.data(), knots.data() + knots.size()),
          to_matrix(ff.at("rows"), "model.features.rows")};
    } else {
      throw ConfigError("model.features.kind: unknown kind '" + kind + "'");
    }
    ff.finish();
  }

  if (f.has("input")) {
    Fields fi(f.at("input"), "model.input");
    const auto kind = fi.get<std::string>("kind");
    if (kind == "uniform_box") {
      spec.input_dist = bayes::UniformBox{to_vector(fi.at("lo"), "model.input.lo"),
                                          to_vector(fi.at("hi"), "model.input.hi")};
    } else if (kind == "gaussian") {
      try {
        spec.input_dist = bayes::GaussianInput{prob::Gaussian(
            to_vector(fi.at("mean"), "model.input.mean"), to_matrix(fi.at("cov"), "model.input.cov"))};
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model.input: ") + e.what());
      }
    } else {
      throw ConfigError("model.input.kind: unknown kind '" + kind + "'");
    }
    fi.finish();
  } else {
    // ||x|| <= 1 on the default box.
    const double half = 1.0 / std::sqrt(static_cast<double>(in_dim));
    spec.input_dist =
        bayes::UniformBox{Vector::Constant(in_dim, -half), Vector::Constant(in_dim, half)};
  }
  f.finish();
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return spec;
}

inline vc::ThresholdClassSpec parse_threshold(const json& j) {
  Fields f(j, "model");
  (void)f.get<std::string>("type");
  const int k = f.get<int>("k");
  if (k < 1) throw ConfigError("model.k: must be >= 1");
  auto spec = vc::ThresholdClassSpec::uniform(k);
  if (f.has("px")) spec.px = f.get<std::vector<double>>("px");
  if (f.has("prior_t")) spec.prior_t = f.get<std::vector<double>>("prior_t");
  f.finish();
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return spec;
}

inline Experiment parse_experiment(const std::string& name) {
  for (Experiment e : kAllExperiments) {
    if (to_string(e) == name) return e;
  }
  throw ConfigError("experiment: unknown experiment '" + name + "'");
}

inline std::uint64_t parse_seed(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    throw ConfigError(where + ": not an unsigned integer: '" + text + "'");
  }
  if (used != text.size() || (!text.empty() && text[0] == '-')) {
    throw ConfigError(where + ": not an unsigned integer: '" + text + "'");
  }
  return v;
}

}  // namespace detail

/// Parses and validates a configuration.  `seed_override` (ERLAB_SEED)
/// replaces the seed from the file.
inline ExperimentConfig parse_config(const json& j,
                                     const std::optional<std::string>& seed_override = {}) {
  detail::Fields f(j, "config");
  ExperimentConfig cfg;
  cfg.experiment = detail::parse_experiment(f.get<std::string>("experiment"));
  const bool needs_gaussian = cfg.experiment == Experiment::rls_bound ||
                              cfg.experiment == Experiment::rates ||
                              cfg.experiment == Experiment::envelope;
  const bool needs_threshold =
      cfg.experiment == Experiment::vc || cfg.experiment == Experiment::capacity;

  {
    const json& m = f.at("model");
    if (!m.is_object() || !m.contains("type") || !m["type"].is_string()) {
      throw ConfigError("model.type: required string");
    }
    const auto type = m["type"].get<std::string>();
    if (type == "gaussian") {
      if (needs_threshold) throw ConfigError("model.type: this experiment needs a threshold model");
      cfg.gaussian = detail::parse_gaussian(m);
    } else if (type == "threshold") {
      if (needs_gaussian) throw ConfigError("model.type: this experiment needs a gaussian model");
      cfg.threshold = detail::parse_threshold(m);
    } else {
      throw ConfigError("model.type: unknown type '" + type + "'");
    }
  }

  if (cfg.experiment != Experiment::game && cfg.experiment != Experiment::envelope) {
    cfg.ns = f.get<std::vector<long>>("ns");
    if (cfg.ns.empty()) throw ConfigError("ns: must be non-empty");
    for (std::size_t i = 0; i < cfg.ns.size(); ++i) {
      if (cfg.ns[i] < 1 || (i > 0 && cfg.ns[i] <= cfg.ns[i - 1])) {
        throw ConfigError("ns: must be positive and strictly increasing");
      }
    }
  }
  const auto reps = f.get_or<long long>("reps", 100000);
  if (reps < 2) throw ConfigError("reps: must be >= 2");
  cfg.reps = static_cast<std::size_t>(reps);
  const auto info_reps = f.get_or<long long>("info_reps", 0);
  if (info_reps < 0) throw ConfigError("info_reps: must be >= 0");
  cfg.info_reps = static_cast<std::size_t>(info_reps);

  if (f.has("seed")) {
    const json& s = f.at("seed");
    if (s.is_number_unsigned()) {
      cfg.seed = s.get<std::uint64_t>();
    } else if (s.is_string()) {
      cfg.seed = detail::parse_seed(s.get<std::string>(), "seed");
    } else {
      throw ConfigError("seed: expected an unsigned integer");
    }
  }
  if (seed_override) cfg.seed = detail::parse_seed(*seed_override, "ERLAB_SEED");
  cfg.output_dir = f.get_or<std::string>("output_dir", cfg.output_dir);
  if (cfg.output_dir.empty()) throw ConfigError("output_dir: must be non-empty");

  if (f.has("tolerances")) {
    detail::Fields ft(f.at("tolerances"), "tolerances");
    cfg.tol.std_errors = detail::positive(ft.get_or("std_errors", cfg.tol.std_errors),
                                          "tolerances.std_errors");
    cfg.tol.exact_slack = ft.get_or("exact_slack", cfg.tol.exact_slack);
    if (!(cfg.tol.exact_slack >= 0.0)) throw ConfigError("tolerances.exact_slack: must be >= 0");
    cfg.tol.duality = detail::positive(ft.get_or("duality", cfg.tol.duality), "tolerances.duality");
    cfg.tol.ba_tol = detail::positive(ft.get_or("ba_tol", cfg.tol.ba_tol), "tolerances.ba_tol");
    ft.finish();
  }

  if (f.has("game")) {
    if (cfg.experiment != Experiment::game) throw ConfigError("game: only for the game experiment");
    detail::Fields fg(f.at("game"), "game");
    auto& g = cfg.game;
    g.n = fg.get_or<long>("n", g.n);
    if (g.n < 0) throw ConfigError("game.n: must be >= 0");
    const auto mode = fg.get_or<std::string>("mode", "exact");
    if (mode != "exact" && mode != "mc") throw ConfigError("game.mode: 'exact' or 'mc'");
    g.exact = mode == "exact";
    g.rows = fg.get_or<std::vector<std::string>>("rows", g.rows);
    for (const auto& r : g.rows) {
      if (r != "posterior_sampling" && r != "bayes_optimal" && r != "rls" && r != "constants") {
        throw ConfigError("game.rows: unknown learner '" + r + "'");
      }
      if (r == "rls" && !cfg.gaussian) throw ConfigError("game.rows: 'rls' needs a gaussian model");
    }
    if (g.rows.empty()) throw ConfigError("game.rows: must be non-empty");
    g.lattice_per_axis = fg.get_or<int>("lattice_per_axis", g.lattice_per_axis);
    if (g.lattice_per_axis < 1) throw ConfigError("game.lattice_per_axis: must be >= 1");
    g.fp_iters = fg.get_or<long>("fp_iters", g.fp_iters);
    if (g.fp_iters < 1) throw ConfigError("game.fp_iters: must be >= 1");
    g.fp_tol = detail::positive(fg.get_or<double>("fp_tol", g.fp_tol), "game.fp_tol");
    fg.finish();
  }
  if (cfg.experiment == Experiment::game && cfg.gaussian && cfg.game.exact) {
    const auto* mono = std::get_if<bayes::MonomialFeatures>(&cfg.gaussian->feature_map);
    if (cfg.gaussian->d != 1 || mono == nullptr || mono->degree != 0) {
      throw ConfigError("game.mode: exact gaussian payoffs need d = 1 constant features");
    }
  }

  if (f.has("envelope")) {
    if (cfg.experiment != Experiment::envelope) {
      throw ConfigError("envelope: only for the envelope experiment");
    }
    detail::Fields fe(f.at("envelope"), "envelope");
    auto& e = cfg.envelope;
    const auto points = fe.get_or<long long>("points", static_cast<long long>(e.points));
    const auto draws = fe.get_or<long long>("draws", static_cast<long long>(e.draws));
    e.n = fe.get_or<long>("n", e.n);
    e.lambda_points = fe.get_or<int>("lambda_points", e.lambda_points);
    if (points < 1 || draws < 2 || e.n < 0 || e.lambda_points < 1) {
      throw ConfigError("envelope: need points >= 1, draws >= 2, n >= 0, lambda_points >= 1");
    }
    e.points = static_cast<std::size_t>(points);
    e.draws = static_cast<std::size_t>(draws);
    fe.finish();
  }

  if (cfg.experiment == Experiment::rates) {
    const auto* mono = std::get_if<bayes::MonomialFeatures>(&cfg.gaussian->feature_map);
    if (cfg.gaussian->d != 1 || mono == nullptr || mono->degree != 0) {
      throw ConfigError("rates: needs d = 1 constant features");
    }
  }
  if (cfg.threshold) {
    long largest = cfg.experiment == Experiment::game ? cfg.game.n : 0;
    for (long n : cfg.ns) largest = std::max(largest, n);
    try {
      vc::detail::guard_size(*cfg.threshold, largest);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("ns: ") + e.what());
    }
  }
  f.finish();

  cfg.echo = j;
  cfg.echo["seed"] = cfg.seed;
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path,
                                    const std::optional<std::string>& seed_override = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j, seed_override);
}

}  // namespace erlab::cli
