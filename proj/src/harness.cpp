#include "shampoo/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>

#include "shampoo/kernels.hpp"
#include "shampoo/psd.hpp"

namespace shampoo {

namespace {

using nlohmann::json;

// Flattened-dimension ceiling for the per-step side checks; both maintain
// (m*n) x (m*n) matrices and the dominance check eigensolves them each step.
constexpr std::size_t kSideCheckMaxDim = 256;

bool is_shampoo(const ExperimentConfig& cfg) {
  return cfg.optimizer.name == "shampoo";
}

// Checks pin the hyperparameters the theorems assume: exact roots every step
// and no gradient averaging.
ShampooConfig pinned_shampoo_config(const ExperimentConfig& cfg) {
  ShampooConfig sc = cfg.optimizer.shampoo;
  if (cfg.bound_check || cfg.dominance_check || cfg.equivalence_check) {
    sc.root_update_interval = 1;
    sc.momentum = 0.0;
  }
  return sc;
}

ModeVariant resolved_variant(const ShampooConfig& sc,
                             const std::vector<std::size_t>& shape,
                             std::size_t mode) {
  auto it = sc.mode_overrides.find(mode);
  if (it != sc.mode_overrides.end()) return it->second;
  return shape[mode] > sc.diag_threshold ? ModeVariant::diagonal
                                         : ModeVariant::full;
}

bool all_modes(const ShampooConfig& sc, const std::vector<std::size_t>& shape,
               ModeVariant v) {
  for (std::size_t i = 0; i < shape.size(); ++i)
    if (resolved_variant(sc, shape, i) != v) return false;
  return true;
}

std::string theorem_for(const ExperimentConfig& cfg) {
  const ShampooConfig sc = pinned_shampoo_config(cfg);
  const auto& shape = cfg.problem.shape;
  if (all_modes(sc, shape, ModeVariant::full))
    return shape.size() == 2 ? "thm-3.1" : "thm-4.1";
  if (shape.size() == 2 && all_modes(sc, shape, ModeVariant::diagonal))
    return "thm-A.1";
  return "";
}

struct PassOutput {
  std::vector<RunRecord> records;
  double d_frob = 0.0;
  double d_inf = 0.0;
  double dom_worst = std::numeric_limits<double>::infinity();
  double equiv_worst = 0.0;
  std::string abort_reason;
};

// One full online pass at the given learning rate. When `keep` is non-null
// and the optimizer is shampoo, the end-of-run optimizer is moved out so the
// caller can read its accumulated statistics.
PassOutput run_pass(const ExperimentConfig& cfg, double lr,
                    const OnlineProblem& problem, const Comparator& cmp,
                    const std::vector<double>& star_prefix,
                    std::unique_ptr<ShampooOptimizer>* keep) {
  PassOutput out;
  const std::vector<std::size_t>& shape = problem.shape();

  std::unique_ptr<ShampooOptimizer> sh;
  std::unique_ptr<Optimizer> baseline;
  Optimizer* opt = nullptr;
  if (is_shampoo(cfg)) {
    ShampooConfig sc = pinned_shampoo_config(cfg);
    sc.learning_rate = lr;
    sh = std::make_unique<ShampooOptimizer>(shape, sc);
    opt = sh.get();
  } else {
    BaselineConfig bc = cfg.optimizer.baseline;
    bc.learning_rate = lr;
    baseline =
        make_baseline(baseline_kind_from_name(cfg.optimizer.name), shape, bc);
    opt = baseline.get();
  }

  const double r = problem.rank_bound();
  const bool bound_column = sh && !theorem_for(cfg).empty();
  const double d_eta = lr * std::sqrt(2.0 * r);

  // Dominance state: the flattened gradient gram, grown step by step.
  const std::size_t flat = sh ? sh->params().size() : 0;
  SymMatrix gram;
  double r_flat = 0.0;
  if (cfg.dominance_check) {
    gram = SymMatrix(flat);
    r_flat = static_cast<double>(std::min(shape[0], shape[1]));
  }
  // Equivalence state: an explicitly kron-preconditioned flat trajectory fed
  // the same gradients as the real optimizer.
  std::vector<double> mirror(cfg.equivalence_check ? flat : 0, 0.0);
  SymMatrix mirror_l, mirror_r;
  if (cfg.equivalence_check) {
    mirror_l = SymMatrix::identity(shape[0], cfg.optimizer.shampoo.epsilon);
    mirror_r = SymMatrix::identity(shape[1], cfg.optimizer.shampoo.epsilon);
  }

  const std::size_t horizon = problem.horizon();
  out.records.reserve(horizon);
  double cum = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    const DenseTensor& w = opt->params();
    double dist_sq = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double diff = w[i] - cmp.w_star[i];
      dist_sq += diff * diff;
      out.d_inf = std::max(out.d_inf, std::abs(diff));
    }
    out.d_frob = std::max(out.d_frob, std::sqrt(dist_sq));

    auto [loss, grad] = problem.loss_and_grad(t, w);
    cum += loss;
    const double regret = cum - star_prefix[t];

    std::uint64_t wall = 0;
    bool aborted = false;
    if (cfg.record_walltime) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        opt->step(grad);
      } catch (const std::invalid_argument& e) {
        out.abort_reason =
            "step " + std::to_string(t) + " rejected: " + e.what();
        aborted = true;
      }
      wall = static_cast<std::uint64_t>(
          std::chrono::duration_cast<std::chrono::nanoseconds>(
              std::chrono::steady_clock::now() - t0)
              .count());
    } else {
      try {
        opt->step(grad);
      } catch (const std::invalid_argument& e) {
        out.abort_reason =
            "step " + std::to_string(t) + " rejected: " + e.what();
        aborted = true;
      }
    }

    double bound = 0.0;
    if (bound_column && !aborted) {
      const double d_eff = 0.5 * (out.d_frob * out.d_frob / d_eta + d_eta);
      bound = theorem_bound(*sh, d_eff, r);
    }
    out.records.push_back({t, loss, cum, regret, bound, aborted ? 0 : wall});
    if (aborted) break;

    if (cfg.dominance_check) {
      const std::vector<double>& g = vec(grad);
      for (std::size_t i = 0; i < flat; ++i)
        for (std::size_t j = 0; j <= i; ++j)
          gram.set(i, j, gram(i, j) + g[i] * g[j]);
      const SymMatrix lhs =
          std::sqrt(r_flat) * kron(matrix_power(sh->mode_stat(0), 0.25),
                                   matrix_power(sh->mode_stat(1), 0.25));
      SymMatrix damped = gram;
      damped.add_scaled_identity(r_flat * cfg.optimizer.shampoo.epsilon);
      out.dom_worst =
          std::min(out.dom_worst, loewner_slack(lhs, matrix_power(damped, 0.5)));
    }
    if (cfg.equivalence_check) {
      mirror_l.add_scaled(contract(grad, 0));
      mirror_r.add_scaled(contract(grad, 1));
      const SymMatrix pre = kron(matrix_power(mirror_l, -0.25),
                                 matrix_power(mirror_r, -0.25));
      const std::vector<double>& g = vec(grad);
      for (std::size_t i = 0; i < flat; ++i)
        mirror[i] -= lr * kernels::dot(pre.data() + i * flat, g.data(), flat);
      const DenseTensor& updated = opt->params();
      for (std::size_t i = 0; i < flat; ++i)
        out.equiv_worst =
            std::max(out.equiv_worst, std::abs(mirror[i] - updated[i]));
    }
  }

  if (keep && sh) *keep = std::move(sh);
  return out;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const char* where) {
  if (!obj.is_object())
    throw std::invalid_argument(std::string("config error: ") + where +
                                " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument("config error: unknown key \"" + it.key() +
                                  "\" in " + where);
  }
}

double get_number(const json& v, const char* what) {
  if (!v.is_number())
    throw std::invalid_argument(std::string("config error: ") + what +
                                " must be a number");
  return v.get<double>();
}

std::size_t get_count(const json& v, const char* what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::size_t>(v.get<std::int64_t>());
  throw std::invalid_argument(std::string("config error: ") + what +
                              " must be a non-negative integer");
}

bool get_flag(const json& v, const char* what) {
  if (!v.is_boolean())
    throw std::invalid_argument(std::string("config error: ") + what +
                                " must be a boolean");
  return v.get<bool>();
}

std::string get_text(const json& v, const char* what) {
  if (!v.is_string())
    throw std::invalid_argument(std::string("config error: ") + what +
                                " must be a string");
  return v.get<std::string>();
}

std::vector<std::size_t> get_counts(const json& v, const char* what) {
  if (!v.is_array())
    throw std::invalid_argument(std::string("config error: ") + what +
                                " must be an array");
  std::vector<std::size_t> out;
  out.reserve(v.size());
  for (const json& item : v) out.push_back(get_count(item, what));
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  problem.validate();
  if (optimizer.name == "shampoo") {
    optimizer.shampoo.validate();
  } else {
    baseline_kind_from_name(optimizer.name);  // throws for unknown names
    optimizer.baseline.validate();
  }

  const bool any_check = bound_check || dominance_check || equivalence_check;
  if (any_check && optimizer.name != "shampoo")
    throw std::invalid_argument(
        "bound/dominance/equivalence checks require the shampoo optimizer");

  if (dominance_check || equivalence_check) {
    if (problem.shape.size() != 2)
      throw std::invalid_argument(
          "dominance and equivalence checks need an order-2 problem");
    const ShampooConfig sc = pinned_shampoo_config(*this);
    if (!all_modes(sc, problem.shape, ModeVariant::full))
      throw std::invalid_argument(
          "dominance and equivalence checks need full statistics on every "
          "mode");
    if (problem.shape[0] * problem.shape[1] > kSideCheckMaxDim)
      throw std::invalid_argument(
          "dominance and equivalence checks are limited to flattened "
          "dimension " +
          std::to_string(kSideCheckMaxDim));
  }
  if (bound_check && theorem_for(*this).empty())
    throw std::invalid_argument(
        "no regret theorem covers this representation mix: use full "
        "statistics on every mode, or the all-diagonal matrix case");
}

RunResult run(const ExperimentConfig& config) {
  config.validate();
  const OnlineProblem problem(config.problem, config.seed);

  RunResult out;
  out.optimizer_name = config.optimizer.name;
  out.comparator = problem.solve_offline();

  std::vector<double> star_prefix(problem.horizon() + 1, 0.0);
  for (std::size_t t = 1; t <= problem.horizon(); ++t)
    star_prefix[t] =
        star_prefix[t - 1] + problem.loss(t, out.comparator.w_star);

  const double configured_lr = is_shampoo(config)
                                   ? config.optimizer.shampoo.learning_rate
                                   : config.optimizer.baseline.learning_rate;
  const double r = problem.rank_bound();
  const std::string theorem = theorem_for(config);
  const bool use_inf = theorem == "thm-A.1";

  std::unique_ptr<ShampooOptimizer> final_opt;
  double final_lr = configured_lr;
  std::size_t passes = 1;
  PassOutput final_pass = run_pass(config, configured_lr, problem,
                                   out.comparator, star_prefix, &final_opt);

  if (config.bound_check && final_pass.abort_reason.empty() &&
      problem.horizon() > 0) {
    // The theorem's eta depends on D, which depends on the trajectory run
    // with that eta; iterate a few times and accept once D stabilizes.
    double d_hat = use_inf ? final_pass.d_inf : final_pass.d_frob;
    for (int extra = 0; extra < 3 && d_hat > 1e-12; ++extra) {
      const double eta = d_hat / std::sqrt(2.0 * r);
      std::unique_ptr<ShampooOptimizer> opt_next;
      PassOutput next = run_pass(config, eta, problem, out.comparator,
                                 star_prefix, &opt_next);
      ++passes;
      final_pass = std::move(next);
      final_opt = std::move(opt_next);
      final_lr = eta;
      if (!final_pass.abort_reason.empty()) break;
      const double d_next = use_inf ? final_pass.d_inf : final_pass.d_frob;
      const bool stable = std::abs(d_next - d_hat) <= 0.05 * d_hat;
      d_hat = d_next;
      if (stable) break;
    }
  }

  out.records = std::move(final_pass.records);
  out.abort_reason = final_pass.abort_reason;
  out.comparator.d = final_pass.d_frob;
  out.comparator.d_inf = final_pass.d_inf;

  if (config.dominance_check && out.abort_reason.empty()) {
    CheckReport rep;
    rep.tolerance = 1e-7;
    rep.worst = problem.horizon() == 0 ? 0.0 : final_pass.dom_worst;
    rep.pass = rep.worst >= -rep.tolerance;
    out.dominance = rep;
  }
  if (config.equivalence_check && out.abort_reason.empty()) {
    CheckReport rep;
    rep.tolerance = 1e-10;
    rep.worst = final_pass.equiv_worst;
    rep.pass = rep.worst <= rep.tolerance;
    out.equivalence = rep;
  }

  if (config.bound_check && out.abort_reason.empty()) {
    BoundReport br;
    br.theorem_id = theorem;
    br.r_used = r;
    br.eta_used = final_lr;
    br.passes = passes;
    const double alpha = 1.0 / (2.0 * static_cast<double>(problem.shape().size()));
    for (std::size_t mode = 0; mode < problem.shape().size(); ++mode)
      br.trace_terms.push_back(
          final_opt->mode_variant(mode) == ModeVariant::full
              ? trace_power(final_opt->mode_stat(mode), alpha)
              : trace_power(final_opt->mode_stat_diag(mode), alpha));
    if (problem.horizon() == 0) {
      br.pass = true;  // zero steps, zero regret, zero-distance bound
    } else {
      br.d_used = use_inf ? final_pass.d_inf : final_pass.d_frob;
      const double d_eta = final_lr * std::sqrt(2.0 * r);
      const double d_eff = 0.5 * (br.d_used * br.d_used / d_eta + d_eta);
      br.bound = theorem_bound(*final_opt, d_eff, r);
      br.regret = out.records.back().regret;
      br.slack = br.bound - br.regret;
      br.pass = br.slack >= -1e-6 * std::max(1.0, br.bound);
    }
    out.bound_report = br;
  }
  return out;
}

double theorem_bound(const ShampooOptimizer& opt, double d, double r) {
  const double alpha = 1.0 / (2.0 * static_cast<double>(opt.order()));
  double product = 1.0;
  for (std::size_t mode = 0; mode < opt.order(); ++mode)
    product *= opt.mode_variant(mode) == ModeVariant::full
                   ? trace_power(opt.mode_stat(mode), alpha)
                   : trace_power(opt.mode_stat_diag(mode), alpha);
  return std::sqrt(2.0 * r) * d * product;
}

std::vector<double> regret_curve(const std::vector<RunRecord>& records,
                                 const Comparator& comparator,
                                 const OnlineProblem& problem) {
  if (comparator.problem_fingerprint != problem.fingerprint())
    throw std::invalid_argument(
        "comparator belongs to a different problem: solved for \"" +
        comparator.problem_fingerprint + "\", queried with \"" +
        problem.fingerprint() + "\"");
  std::vector<double> curve;
  curve.reserve(records.size());
  double star = 0.0;
  for (const RunRecord& rec : records) {
    star += problem.loss(rec.step, comparator.w_star);
    curve.push_back(rec.cum_loss - star);
  }
  return curve;
}

std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::string out = "step,loss,cum_loss,regret,bound,wall_ns\n";
  char line[192];
  for (const RunRecord& r : records) {
    std::snprintf(line, sizeof line, "%llu,%.17g,%.17g,%.17g,%.17g,%llu\n",
                  static_cast<unsigned long long>(r.step), r.loss, r.cum_loss,
                  r.regret, r.bound,
                  static_cast<unsigned long long>(r.wall_ns));
    out += line;
  }
  return out;
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["seed"] = seed;
  json p;
  p["family"] = family_name(problem.family);
  p["shape"] = problem.shape;
  if (!problem.mode_ranks.empty()) p["mode_ranks"] = problem.mode_ranks;
  p["cond"] = problem.cond;
  p["horizon"] = problem.horizon;
  p["batch"] = problem.batch;
  j["problem"] = p;
  json o;
  o["name"] = optimizer.name;
  if (optimizer.name == "shampoo") {
    o["learning_rate"] = optimizer.shampoo.learning_rate;
    o["epsilon"] = optimizer.shampoo.epsilon;
    o["momentum"] = optimizer.shampoo.momentum;
    o["root_update_interval"] = optimizer.shampoo.root_update_interval;
    o["diag_threshold"] = optimizer.shampoo.diag_threshold;
    o["momentum_into_preconditioner"] =
        optimizer.shampoo.momentum_into_preconditioner;
    if (!optimizer.shampoo.mode_overrides.empty()) {
      json overrides = json::object();
      for (const auto& [mode, variant] : optimizer.shampoo.mode_overrides)
        overrides[std::to_string(mode)] =
            variant == ModeVariant::full ? "full" : "diagonal";
      o["mode_overrides"] = overrides;
    }
  } else {
    o["learning_rate"] = optimizer.baseline.learning_rate;
    o["momentum"] = optimizer.baseline.momentum;
    o["epsilon"] = optimizer.baseline.epsilon;
    o["beta1"] = optimizer.baseline.beta1;
    o["beta2"] = optimizer.baseline.beta2;
    o["adam_epsilon"] = optimizer.baseline.adam_epsilon;
  }
  j["optimizer"] = o;
  j["checks"] = {{"bound", bound_check},
                 {"dominance", dominance_check},
                 {"equivalence", equivalence_check}};
  j["output"] = {{"record_walltime", record_walltime}};
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config parse error: ") +
                                e.what());
  }
  ExperimentConfig cfg;
  check_keys(j, {"seed", "problem", "optimizer", "checks", "output"},
             "the top level");
  if (j.contains("seed")) cfg.seed = get_count(j["seed"], "seed");

  if (!j.contains("problem"))
    throw std::invalid_argument("config error: missing \"problem\"");
  const json& p = j["problem"];
  check_keys(p, {"family", "shape", "mode_ranks", "cond", "horizon", "batch"},
             "problem");
  if (!p.contains("family") || !p.contains("shape") || !p.contains("horizon"))
    throw std::invalid_argument(
        "config error: problem needs \"family\", \"shape\", and \"horizon\"");
  cfg.problem.family = family_from_name(get_text(p["family"], "family"));
  cfg.problem.shape = get_counts(p["shape"], "shape");
  cfg.problem.horizon = get_count(p["horizon"], "horizon");
  if (p.contains("mode_ranks"))
    cfg.problem.mode_ranks = get_counts(p["mode_ranks"], "mode_ranks");
  if (p.contains("cond")) cfg.problem.cond = get_number(p["cond"], "cond");
  if (p.contains("batch")) cfg.problem.batch = get_count(p["batch"], "batch");

  if (!j.contains("optimizer"))
    throw std::invalid_argument("config error: missing \"optimizer\"");
  const json& o = j["optimizer"];
  if (!o.is_object() || !o.contains("name"))
    throw std::invalid_argument("config error: optimizer needs \"name\"");
  cfg.optimizer.name = get_text(o["name"], "optimizer name");
  if (cfg.optimizer.name == "shampoo") {
    check_keys(o,
               {"name", "learning_rate", "epsilon", "momentum",
                "root_update_interval", "diag_threshold",
                "momentum_into_preconditioner", "mode_overrides"},
               "optimizer");
    ShampooConfig& sc = cfg.optimizer.shampoo;
    if (o.contains("learning_rate"))
      sc.learning_rate = get_number(o["learning_rate"], "learning_rate");
    if (o.contains("epsilon")) sc.epsilon = get_number(o["epsilon"], "epsilon");
    if (o.contains("momentum"))
      sc.momentum = get_number(o["momentum"], "momentum");
    if (o.contains("root_update_interval"))
      sc.root_update_interval =
          get_count(o["root_update_interval"], "root_update_interval");
    if (o.contains("diag_threshold"))
      sc.diag_threshold = get_count(o["diag_threshold"], "diag_threshold");
    if (o.contains("momentum_into_preconditioner"))
      sc.momentum_into_preconditioner =
          get_flag(o["momentum_into_preconditioner"],
                   "momentum_into_preconditioner");
    if (o.contains("mode_overrides")) {
      const json& overrides = o["mode_overrides"];
      if (!overrides.is_object())
        throw std::invalid_argument(
            "config error: mode_overrides must map mode index to "
            "\"full\" or \"diagonal\"");
      for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        std::size_t mode = 0;
        try {
          std::size_t consumed = 0;
          mode = std::stoull(it.key(), &consumed);
          if (consumed != it.key().size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
          throw std::invalid_argument(
              "config error: mode_overrides key \"" + it.key() +
              "\" is not a mode index");
        }
        const std::string v = get_text(it.value(), "mode override");
        if (v == "full")
          cfg.optimizer.shampoo.mode_overrides[mode] = ModeVariant::full;
        else if (v == "diagonal")
          cfg.optimizer.shampoo.mode_overrides[mode] = ModeVariant::diagonal;
        else
          throw std::invalid_argument(
              "config error: mode override must be \"full\" or "
              "\"diagonal\", got \"" +
              v + "\"");
      }
    }
  } else {
    baseline_kind_from_name(cfg.optimizer.name);
    check_keys(o,
               {"name", "learning_rate", "momentum", "epsilon", "beta1",
                "beta2", "adam_epsilon"},
               "optimizer");
    BaselineConfig& bc = cfg.optimizer.baseline;
    if (o.contains("learning_rate"))
      bc.learning_rate = get_number(o["learning_rate"], "learning_rate");
    if (o.contains("momentum"))
      bc.momentum = get_number(o["momentum"], "momentum");
    if (o.contains("epsilon")) bc.epsilon = get_number(o["epsilon"], "epsilon");
    if (o.contains("beta1")) bc.beta1 = get_number(o["beta1"], "beta1");
    if (o.contains("beta2")) bc.beta2 = get_number(o["beta2"], "beta2");
    if (o.contains("adam_epsilon"))
      bc.adam_epsilon = get_number(o["adam_epsilon"], "adam_epsilon");
  }

  if (j.contains("checks")) {
    const json& c = j["checks"];
    check_keys(c, {"bound", "dominance", "equivalence"}, "checks");
    if (c.contains("bound")) cfg.bound_check = get_flag(c["bound"], "bound");
    if (c.contains("dominance"))
      cfg.dominance_check = get_flag(c["dominance"], "dominance");
    if (c.contains("equivalence"))
      cfg.equivalence_check = get_flag(c["equivalence"], "equivalence");
  }
  if (j.contains("output")) {
    const json& outp = j["output"];
    check_keys(outp, {"record_walltime"}, "output");
    if (outp.contains("record_walltime"))
      cfg.record_walltime = get_flag(outp["record_walltime"], "record_walltime");
  }
  cfg.validate();
  return cfg;
}

std::string records_to_json(const std::vector<RunRecord>& records,
                            const ExperimentConfig& config) {
  json j;
  j["config"] = json::parse(config.to_json_text());
  json rows = json::array();
  for (const RunRecord& r : records) {
    rows.push_back({{"step", r.step},
                    {"loss", r.loss},
                    {"cum_loss", r.cum_loss},
                    {"regret", r.regret},
                    {"bound", r.bound},
                    {"wall_ns", r.wall_ns}});
  }
  j["records"] = rows;
  return j.dump(2);
}

std::vector<RunRecord> parse_records_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("records parse error: ") +
                                e.what());
  }
  if (!j.contains("records") || !j["records"].is_array())
    throw std::invalid_argument("records parse error: missing records array");
  std::vector<RunRecord> out;
  out.reserve(j["records"].size());
  for (const json& row : j["records"]) {
    RunRecord r;
    r.step = get_count(row.at("step"), "step");
    r.loss = get_number(row.at("loss"), "loss");
    r.cum_loss = get_number(row.at("cum_loss"), "cum_loss");
    r.regret = get_number(row.at("regret"), "regret");
    r.bound = get_number(row.at("bound"), "bound");
    r.wall_ns = get_count(row.at("wall_ns"), "wall_ns");
    out.push_back(r);
  }
  return out;
}

namespace {

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp(target);
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f)
      throw std::runtime_error("cannot open " + tmp.string() +
                               " for writing");
    f.write(content.data(),
            static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f.good())
      throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec)
    throw std::runtime_error("cannot move " + tmp.string() + " to " +
                             target.string() + ": " + ec.message());
}

}  // namespace

void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
  write_atomic(path, records_to_csv(records));
}

void emit_json(const std::vector<RunRecord>& records,
               const ExperimentConfig& config, const std::string& path) {
  write_atomic(path, records_to_json(records, config));
}

}  // namespace shampoo
