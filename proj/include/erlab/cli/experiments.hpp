// The experiments behind `erlab run`.  Each one computes everything in memory
// and returns the CSV body, the JSON report and its invariant checks; the
// caller decides what to write.
#pragma once

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "erlab/bounds/bounds.hpp"
#include "erlab/bounds/legendre.hpp"
#include "erlab/cli/config.hpp"
#include "erlab/game/payoff.hpp"
#include "erlab/game/solvers.hpp"
#include "erlab/rates/rates.hpp"
#include "erlab/risk/envelope.hpp"
#include "erlab/risk/excess_risk.hpp"
#include "erlab/vc/channel.hpp"
#include "erlab/vc/threshold.hpp"

namespace erlab::cli {

struct Check {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct RunResult {
  std::string csv;
  json report;
  std::vector<Check> checks;
  std::map<std::string, std::string> extra_files;  ///< file name -> contents

  [[nodiscard]] bool all_passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

/// Shortest decimal that round-trips; independent of locale.
inline std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

class CsvBuilder {
 public:
  explicit CsvBuilder(const std::vector<std::string>& header) : width_(header.size()) {
    add_cells(header);
  }
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("CsvBuilder: row width mismatch");
    add_cells(cells);
  }
  [[nodiscard]] std::string str() const { return out_; }

 private:
  void add_cells(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ',';
      out_ += cells[i];
    }
    out_ += '\n';
  }
  std::size_t width_;
  std::string out_;
};

inline json to_json(const bounds::BoundReport& b) {
  json inputs = json::object();
  for (const auto& [k, v] : b.inputs) inputs[k] = v;
  return {{"bound_name", std::string(bounds::to_string(b.name))}, {"inputs", inputs}, {"value", b.value}};
}

inline json to_json(const risk::RiskEstimate& r) {
  return {{"mean", r.mean}, {"std_error", r.std_error}, {"reps", r.reps}};
}

namespace detail {

inline void add_check(RunResult& res, std::string name, bool ok, std::string detail) {
  res.checks.push_back({std::move(name), ok, std::move(detail)});
}

inline std::string le_detail(double lhs, double rhs) { return fmt(lhs) + " <= " + fmt(rhs); }

inline prob::SeedSpec base_seed(const ExperimentConfig& cfg) { return {cfg.seed, 0}; }

/// Seed for one (purpose, n) pair; keyed by n so adding sample sizes leaves
/// the other rows unchanged.
inline prob::SeedSpec seed_for(const ExperimentConfig& cfg, std::uint64_t purpose, long n) {
  return base_seed(cfg).child(purpose).child(static_cast<std::uint64_t>(n));
}

enum SeedPurpose : std::uint64_t {
  kRisk = 1,
  kMutualInfo = 2,
  kCondInfo = 3,
  kPayoff = 4,
  kRates = 5,
  kEnvelopePoints = 6,
  kEnvelopeDraws = 7,
};

inline json strategy_json(const game::MixedStrategy& s, const std::vector<std::string>& labels) {
  json j = json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) j[labels[i]] = s.weights[i];
  return j;
}

inline prob::Gaussian center_prior(const bayes::LinearModelSpec& spec) {
  return prob::Gaussian::isotropic(Vector::Zero(spec.d), spec.sigma_w);
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline RunResult run_rls_bound(const ExperimentConfig& cfg) {
  const auto& spec = *cfg.gaussian;
  const double k = cfg.tol.std_errors;
  const auto p0 = detail::center_prior(spec);
  const auto truth = spec.prior();
  const auto env = bounds::subexponential_envelope(spec.sigma_w, spec.sigma_e);
  const bounds::PriorFamily fam{bounds::FamilyKind::gaussian_mean_ball, p0, spec.c};

  RunResult res;
  CsvBuilder csv({"n", "mc_excess_rls", "mc_excess_ps", "se_rls", "se_ps", "mi_wzn", "cmi",
                  "bound_thm10", "bound_thm7"});
  json rows = json::array();
  json bound_list = json::array();
  for (long n : cfg.ns) {
    const auto risk_seed = detail::seed_for(cfg, detail::kRisk, n);
    const auto rls_v = risk::bayes_excess_samples(spec, risk::RidgeRegression{p0}, truth, n,
                                                  cfg.reps, risk_seed);
    const auto ps_v = risk::bayes_excess_samples(spec, risk::PosteriorSampling{p0}, truth, n,
                                                 cfg.reps, risk_seed);
    std::vector<double> diff(rls_v.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = rls_v[i] - ps_v[i];
    const auto rls = prob::summarize(rls_v);
    const auto ps = prob::summarize(ps_v);
    const auto paired = prob::summarize(diff);
    const auto mi = bayes::mi_w_zn(spec, n, cfg.information_reps(),
                                   detail::seed_for(cfg, detail::kMutualInfo, n));
    const auto cmi = bayes::cmi_y_given_xzn(spec, n, cfg.information_reps(),
                                            detail::seed_for(cfg, detail::kCondInfo, n));
    const auto b10 = bounds::gaussian_ps_bound(env, fam, mi.mean, n);
    const auto b7 = bounds::posterior_sampling_bound(env, fam, cmi.mean, n);

    csv.row({std::to_string(n), fmt(rls.mean), fmt(ps.mean), fmt(rls.std_error),
             fmt(ps.std_error), fmt(mi.mean), fmt(cmi.mean), fmt(b10.value), fmt(b7.value)});
    bound_list.push_back(to_json(b10));
    bound_list.push_back(to_json(b7));
    rows.push_back({{"n", n},
                    {"paired_rls_minus_ps", {{"mean", paired.mean}, {"std_error", paired.std_error}}},
                    {"mi_wzn_std_error", mi.std_error},
                    {"cmi_std_error", cmi.std_error}});

    const std::string tag = "[n=" + std::to_string(n) + "]";
    detail::add_check(res, "ps_below_bound_thm10" + tag,
                      ps.mean <= b10.value + k * ps.std_error,
                      detail::le_detail(ps.mean, b10.value + k * ps.std_error));
    detail::add_check(res, "ps_below_bound_thm7" + tag, ps.mean <= b7.value + k * ps.std_error,
                      detail::le_detail(ps.mean, b7.value + k * ps.std_error));
    detail::add_check(res, "rls_le_ps_paired" + tag, paired.mean <= k * paired.std_error,
                      detail::le_detail(paired.mean, k * paired.std_error));
    detail::add_check(res, "excess_nonnegative" + tag,
                      rls.mean >= -k * rls.std_error && ps.mean >= -k * ps.std_error,
                      "rls " + fmt(rls.mean) + ", ps " + fmt(ps.mean));
  }
  res.csv = csv.str();
  res.report["bounds"] = bound_list;
  res.report["rows"] = rows;
  res.report["family_radius"] = bounds::family_radius(fam);
  return res;
}

// ---------------------------------------------------------------------------

inline RunResult run_game(const ExperimentConfig& cfg) {
  const auto& g = cfg.game;
  const double k = cfg.tol.std_errors;
  const game::PayoffMode mode =
      g.exact ? game::PayoffMode{game::ExactMode{}}
              : game::PayoffMode{game::McMode{cfg.reps, detail::seed_for(cfg, detail::kPayoff, g.n)}};
  const bool has_constants =
      std::find(g.rows.begin(), g.rows.end(), "constants") != g.rows.end();

  RunResult res;
  game::PayoffMatrix pm;
  json bound_list = json::array();
  std::optional<bounds::BoundReport> capacity_bound;
  if (cfg.threshold) {
    const auto& spec = *cfg.threshold;
    std::vector<int> ts;
    for (int t = 1; t <= spec.num_thresholds(); ++t) ts.push_back(t);
    std::vector<vc::ThresholdAlgorithm> algs;
    for (const auto& r : g.rows) {
      if (r == "posterior_sampling") algs.emplace_back(vc::ThresholdPosteriorSampling{spec.prior_t});
      if (r == "bayes_optimal") algs.emplace_back(vc::ThresholdBayesOptimal{spec.prior_t});
      if (r == "constants") {
        for (int t : ts) algs.emplace_back(vc::FixedThreshold{t});
      }
    }
    pm = game::build_payoff(spec, algs, ts, g.n, mode);
    if (g.n >= 1) {
      const auto ba = vc::blahut_arimoto(vc::threshold_channel(spec, g.n), cfg.tol.ba_tol);
      capacity_bound = bounds::minimax_capacity_bound(bounds::LossRegime::realizable, 1.0,
                                                      ba.kappa(), g.n);
      bound_list.push_back(to_json(*capacity_bound));
    }
  } else {
    const auto& spec = *cfg.gaussian;
    const auto p0 = detail::center_prior(spec);
    const auto ws = game::mean_lattice(spec.d, spec.c, g.lattice_per_axis);
    std::vector<risk::LinearAlgorithm> algs;
    for (const auto& r : g.rows) {
      if (r == "posterior_sampling") algs.emplace_back(risk::PosteriorSampling{p0});
      if (r == "rls") algs.emplace_back(risk::RidgeRegression{p0});
      if (r == "bayes_optimal") algs.emplace_back(risk::BayesOptimal{spec.prior()});
      if (r == "constants") {
        for (const auto& w : ws) algs.emplace_back(risk::ConstantPredictor{w});
      }
    }
    pm = game::build_payoff(spec, algs, ws, g.n, mode);
  }

  const auto lp = game::solve_lp(pm.values);
  const auto fp = game::solve_fictitious_play(pm.values, g.fp_iters, g.fp_tol);
  const auto pure = game::duality_gap_pure(pm.values);
  const double widen = k * pm.max_std_error();
  const double slack = cfg.tol.exact_slack;

  std::ostringstream payoff_csv;
  game::write_payoff_csv(payoff_csv, pm);
  res.csv = payoff_csv.str();
  res.report["bounds"] = bound_list;
  res.report["lp"] = {{"value", lp.value},
                      {"primal_value", lp.primal_value},
                      {"dual_value", lp.dual_value},
                      {"designer_strategy", detail::strategy_json(lp.row, pm.rows)},
                      {"least_favorable_prior", detail::strategy_json(lp.col, pm.cols)}};
  res.report["fictitious_play"] = {{"value", fp.value},
                                   {"gap", fp.gap},
                                   {"iterations", fp.iterations}};
  res.report["pure"] = {{"minimax", pure.minimax}, {"maximin", pure.maximin}, {"gap", pure.gap}};

  detail::add_check(res, "lp_primal_equals_dual",
                    std::abs(lp.primal_value - lp.dual_value) <= cfg.tol.duality,
                    "|" + fmt(lp.primal_value) + " - " + fmt(lp.dual_value) + "|");
  detail::add_check(res, "fp_within_gap_of_lp",
                    std::abs(fp.value - lp.value) <= fp.gap + widen + slack,
                    "|" + fmt(fp.value) + " - " + fmt(lp.value) + "| vs gap " + fmt(fp.gap));
  detail::add_check(res, "pure_sandwich",
                    pure.maximin <= lp.value + slack && lp.value <= pure.minimax + slack,
                    fmt(pure.maximin) + " <= " + fmt(lp.value) + " <= " + fmt(pure.minimax));
  if (has_constants) {
    detail::add_check(res, "designer_second_pure_maximin_zero",
                      std::abs(pure.maximin) <= slack + widen, "maximin " + fmt(pure.maximin));
  }
  if (capacity_bound) {
    detail::add_check(res, "value_below_bound_thm5b", lp.value <= capacity_bound->value + widen + slack,
                      detail::le_detail(lp.value, capacity_bound->value + widen));
  }
  return res;
}

// ---------------------------------------------------------------------------

inline RunResult run_vc(const ExperimentConfig& cfg) {
  const auto& spec = *cfg.threshold;
  const double slack = cfg.tol.exact_slack;
  RunResult res;
  CsvBuilder csv({"n", "cmi_test", "cmi_yn_over_n", "log_growth_over_n", "sauer_bound",
                  "bayes_excess_bo", "bayes_excess_ps", "bound_thm4b", "n_cmi_yn_over_dvc"});
  json bound_list = json::array();
  for (long n : cfg.ns) {
    const auto nn = static_cast<double>(n);
    const double cmi_test = vc::exact_cmi_test(spec, n);
    const double cmi_yn = vc::exact_cmi_yn(spec, n);
    std::vector<int> distinct;
    for (int x = 1; x <= std::min<long>(n, spec.k); ++x) distinct.push_back(x);
    const double log_growth = std::log(static_cast<double>(vc::growth_count(spec, distinct))) / nn;
    const double sauer = vc::sauer_bound(vc::kThresholdVcDim, n);
    const double bo = vc::exact_bayes_excess(spec, n, vc::ThresholdLearnerKind::bayes_optimal);
    const double ps = vc::exact_bayes_excess(spec, n, vc::ThresholdLearnerKind::posterior_sampling);
    const auto b4 = bounds::bayes_excess_bound(bounds::LossRegime::realizable, 1.0, cmi_test);
    bound_list.push_back(to_json(b4));
    csv.row({std::to_string(n), fmt(cmi_test), fmt(cmi_yn / nn), fmt(log_growth), fmt(sauer),
             fmt(bo), fmt(ps), fmt(b4.value), fmt(nn * cmi_yn / vc::kThresholdVcDim)});

    const std::string tag = "[n=" + std::to_string(n) + "]";
    detail::add_check(res, "cmi_test_le_cmi_yn_over_n" + tag, cmi_test <= cmi_yn / nn + slack,
                      detail::le_detail(cmi_test, cmi_yn / nn));
    detail::add_check(res, "cmi_yn_over_n_le_log_growth" + tag, cmi_yn / nn <= log_growth + slack,
                      detail::le_detail(cmi_yn / nn, log_growth));
    detail::add_check(res, "log_growth_le_sauer" + tag, log_growth <= sauer + slack,
                      detail::le_detail(log_growth, sauer));
    detail::add_check(res, "bo_le_ps" + tag, bo <= ps + slack, detail::le_detail(bo, ps));
    detail::add_check(res, "ps_le_bound_thm4b" + tag, ps <= b4.value + slack,
                      detail::le_detail(ps, b4.value));
  }
  res.csv = csv.str();
  res.report["bounds"] = bound_list;
  return res;
}

// ---------------------------------------------------------------------------

inline RunResult run_rates(const ExperimentConfig& cfg) {
  const auto& spec = *cfg.gaussian;
  const double k = cfg.tol.std_errors;
  const auto truth = spec.prior();
  // log|J| in the half-log-det convention (see lower_rate_bound): Fisher = 1/sigma_e^2.
  const double log_j = -std::log(spec.sigma_e);
  const auto residuals = rates::lemma2_residual(spec.sigma_w, spec.sigma_e, cfg.ns);

  RunResult res;
  CsvBuilder csv({"n", "lemma2_residual", "closed_form_residual", "lower_rate_bound",
                  "mc_excess_bo", "se_bo", "mc_excess_ps", "se_ps"});
  json bound_list = json::array();
  std::vector<double> ns_d;
  std::vector<double> ps_means;
  bool residual_ok = true;
  for (std::size_t i = 0; i < cfg.ns.size(); ++i) {
    const long n = cfg.ns[i];
    const auto nn = static_cast<double>(n);
    const double closed =
        0.5 * std::log1p(spec.sigma_e * spec.sigma_e / (nn * spec.sigma_w * spec.sigma_w));
    const auto lower = rates::lower_rate_bound(1, log_j, n);
    const auto seed = detail::seed_for(cfg, detail::kRates, n);
    const auto bo = risk::bayes_excess_risk_mc(spec, risk::BayesOptimal{truth}, truth, n, cfg.reps, seed);
    const auto ps =
        risk::bayes_excess_risk_mc(spec, risk::PosteriorSampling{truth}, truth, n, cfg.reps, seed);
    bound_list.push_back(to_json(lower));
    csv.row({std::to_string(n), fmt(residuals[i]), fmt(closed), fmt(lower.value), fmt(bo.mean),
             fmt(bo.std_error), fmt(ps.mean), fmt(ps.std_error)});
    ns_d.push_back(nn);
    ps_means.push_back(ps.mean);

    const std::string tag = "[n=" + std::to_string(n) + "]";
    residual_ok = residual_ok && residuals[i] > 0.0 && (i == 0 || residuals[i] < residuals[i - 1]);
    detail::add_check(res, "lemma2_residual_closed_form" + tag,
                      std::abs(residuals[i] - closed) <= 1e-12,
                      "|" + fmt(residuals[i]) + " - " + fmt(closed) + "|");
    detail::add_check(res, "lower_rate_le_bayes_risk" + tag,
                      lower.value <= bo.mean + k * bo.std_error,
                      detail::le_detail(lower.value, bo.mean + k * bo.std_error));
  }
  detail::add_check(res, "lemma2_residual_positive_decreasing", residual_ok, "");
  bool positive = true;
  for (double v : ps_means) positive = positive && v > 0.0;
  if (ps_means.size() >= 3 && positive) {
    const auto fit = rates::fit_rate(ns_d, ps_means);
    res.report["ps_rate_fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
    detail::add_check(res, "ps_rate_slope_in_range", fit.slope >= -1.1 && fit.slope <= -0.4,
                      "slope " + fmt(fit.slope));
  }
  res.csv = csv.str();
  res.report["bounds"] = bound_list;
  return res;
}

// ---------------------------------------------------------------------------

inline RunResult run_capacity(const ExperimentConfig& cfg) {
  const auto& spec = *cfg.threshold;
  RunResult res;
  CsvBuilder csv({"n", "kappa_lower", "kappa_upper", "iterations", "mi_spec_prior",
                  "bound_thm5b"});
  json bound_list = json::array();
  for (long n : cfg.ns) {
    const auto ch = vc::threshold_channel(spec, n);
    const auto ba = vc::blahut_arimoto(ch, cfg.tol.ba_tol);
    const double mi = vc::mutual_information(ch, spec.prior_t);
    const double replug = vc::mutual_information(ch, ba.prior);
    const auto b5 =
        bounds::minimax_capacity_bound(bounds::LossRegime::realizable, 1.0, ba.kappa(), n);
    bound_list.push_back(to_json(b5));
    csv.row({std::to_string(n), fmt(ba.capacity), fmt(ba.upper), std::to_string(ba.iterations),
             fmt(mi), fmt(b5.value)});
    std::ostringstream ch_csv;
    vc::write_channel_csv(ch_csv, ch);
    res.extra_files["channel_n" + std::to_string(n) + ".csv"] = ch_csv.str();

    const std::string tag = "[n=" + std::to_string(n) + "]";
    detail::add_check(res, "capacity_ge_mi_spec_prior" + tag,
                      mi <= ba.kappa() + cfg.tol.exact_slack, detail::le_detail(mi, ba.kappa()));
    detail::add_check(res, "ba_prior_reproduces_capacity" + tag,
                      std::abs(replug - ba.kappa()) <= cfg.tol.ba_tol + cfg.tol.exact_slack,
                      "|" + fmt(replug) + " - " + fmt(ba.kappa()) + "|");
  }
  res.csv = csv.str();
  res.report["bounds"] = bound_list;
  return res;
}

// ---------------------------------------------------------------------------

inline RunResult run_envelope(const ExperimentConfig& cfg) {
  const auto& spec = *cfg.gaussian;
  const auto& e = cfg.envelope;
  const auto truth = spec.prior();
  const auto p0 = detail::center_prior(spec);
  const auto env = bounds::subexponential_envelope(spec.sigma_w, spec.sigma_e);
  std::vector<double> lambdas;
  for (int i = 0; i < e.lambda_points; ++i) lambdas.push_back(env.b * i / e.lambda_points);
  const auto points = risk::random_envelope_points(
      spec, truth, e.n, e.points, detail::seed_for(cfg, detail::kEnvelopePoints, e.n));
  const auto rep = risk::envelope_check(spec, truth, p0, points, lambdas, e.draws,
                                        detail::seed_for(cfg, detail::kEnvelopeDraws, e.n),
                                        cfg.tol.std_errors);
  RunResult res;
  CsvBuilder csv({"point", "lambda", "mc_cgf", "std_error", "exact_cgf", "bound", "violated"});
  for (const auto& r : rep.rows) {
    csv.row({std::to_string(r.point), fmt(r.lambda), fmt(r.mc_cgf), fmt(r.std_error),
             fmt(r.exact_cgf), fmt(r.bound), r.violated ? "1" : "0"});
  }
  res.csv = csv.str();
  res.report["bounds"] = json::array();
  res.report["envelope"] = {{"q", env.q}, {"b", env.b}, {"violations", rep.violations}};
  detail::add_check(res, "envelope_no_violations", rep.violations == 0,
                    std::to_string(rep.violations) + " violations");
  return res;
}

inline RunResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::rls_bound: return run_rls_bound(cfg);
    case Experiment::game: return run_game(cfg);
    case Experiment::vc: return run_vc(cfg);
    case Experiment::rates: return run_rates(cfg);
    case Experiment::capacity: return run_capacity(cfg);
    case Experiment::envelope: return run_envelope(cfg);
  }
  throw std::logic_error("unknown experiment");
}

}  // namespace erlab::cli
