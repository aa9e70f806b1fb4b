#include "onc/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "onc/errors.hpp"
#include "onc/json_eigen.hpp"
#include "onc/plot.hpp"

namespace onc {

namespace fs = std::filesystem;
using nlohmann::json;

// --- configuration ----------------------------------------------------------

void ExperimentConfig::validate() const {
  if (horizon < 1) throw ConfigurationError("config: horizon must be >= 1");
  if (repetitions < 0) throw ConfigurationError("config: repetitions must be >= 0");
  if (bank_count < 1) throw ConfigurationError("config: bank count must be >= 1");
  if (!(bank_target_gamma > 0.0 && bank_target_gamma < 1.0)) {
    throw ConfigurationError("config: bank target gamma must be in (0, 1)");
  }
  if (!(ball_radius > 0.0)) throw ConfigurationError("config: ball radius must be positive");
  if (disturbance.kind != "zero" && disturbance.kind != "uniform") {
    throw ConfigurationError("config: disturbance kind must be 'zero' or 'uniform'");
  }
  if (!(disturbance.range >= 0.0)) throw ConfigurationError("config: disturbance range must be >= 0");
  if (algorithm != "batchftpl" && algorithm != "dac" && algorithm != "both") {
    throw ConfigurationError("config: algorithm must be 'batchftpl', 'dac' or 'both'");
  }
  if (sign_mode != "literal" && sign_mode != "random-sign") {
    throw ConfigurationError("config: sign mode must be 'literal' or 'random-sign'");
  }
  if (disturbance_mode != "auto" && disturbance_mode != "on" && disturbance_mode != "off") {
    throw ConfigurationError("config: disturbance mode must be 'auto', 'on' or 'off'");
  }
  if (batch_size < 0 || eta < 0.0 || epsilon < 0.0 || lipschitz < 0.0 || domain_radius < 0.0 ||
      epsilon_bench < 0.0 || dac_learning_rate < 0.0) {
    throw ConfigurationError("config: overrides must be nonnegative (zero means derive)");
  }
  if (!(cost_family.weight_ridge > 0.0)) throw ConfigurationError("config: weight ridge must be positive");
  if (a_matrix.has_value() != b_matrix.has_value()) {
    throw ConfigurationError("config: custom systems need both A and B");
  }
  if (!a_matrix && system_preset != "study-3x2") {
    throw ConfigurationError("config: unknown system preset '" + system_preset + "'");
  }
  for (int t : sweep_horizons) {
    if (t < 1) throw ConfigurationError("config: sweep horizons must be >= 1");
  }
}

json config_to_json(const ExperimentConfig& cfg) {
  json system = {{"preset", cfg.system_preset}};
  if (cfg.a_matrix) {
    system["a"] = to_json(*cfg.a_matrix);
    system["b"] = to_json(*cfg.b_matrix);
  }
  return {
      {"system", system},
      {"horizon", cfg.horizon},
      {"seed", cfg.seed},
      {"repetitions", cfg.repetitions},
      {"costs",
       {{"weight_entry_range", cfg.cost_family.weight_entry_range},
        {"weight_ridge", cfg.cost_family.weight_ridge},
        {"center_range", cfg.cost_family.center_range}}},
      {"disturbance", {{"kind", cfg.disturbance.kind}, {"range", cfg.disturbance.range}}},
      {"bank",
       {{"count", cfg.bank_count},
        {"target_gamma", cfg.bank_target_gamma},
        {"kappa_cap", cfg.bank_kappa_cap}}},
      {"ball_radius", cfg.ball_radius},
      {"algorithm", cfg.algorithm},
      {"batch_size", cfg.batch_size},
      {"eta", cfg.eta},
      {"epsilon", cfg.epsilon},
      {"lipschitz", cfg.lipschitz},
      {"domain_radius", cfg.domain_radius},
      {"epsilon_bench", cfg.epsilon_bench},
      {"sign_mode", cfg.sign_mode},
      {"disturbance_mode", cfg.disturbance_mode},
      {"dac",
       {{"memory", cfg.dac_memory},
        {"truncation", cfg.dac_truncation},
        {"learning_rate", cfg.dac_learning_rate},
        {"coefficient_bound", cfg.dac_coefficient_bound}}},
      {"x1", cfg.x1},
      {"sweep_horizons", cfg.sweep_horizons},
      {"output_dir", cfg.output_dir},
  };
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw ConfigurationError("config: '" + where + "' must be an object");
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigurationError("config: unknown key '" + where + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig cfg;
  try {
    reject_unknown(doc,
                   {"system", "horizon", "seed", "repetitions", "costs", "disturbance", "bank",
                    "ball_radius", "algorithm", "batch_size", "eta", "epsilon", "lipschitz",
                    "domain_radius", "epsilon_bench", "sign_mode", "disturbance_mode", "dac", "x1",
                    "sweep_horizons", "output_dir"},
                   "");
    if (doc.contains("system")) {
      const auto& s = doc.at("system");
      reject_unknown(s, {"preset", "a", "b"}, "system.");
      read(s, "preset", cfg.system_preset);
      if (s.contains("a")) cfg.a_matrix = matrix_from_json(s.at("a"));
      if (s.contains("b")) cfg.b_matrix = matrix_from_json(s.at("b"));
    }
    read(doc, "horizon", cfg.horizon);
    read(doc, "seed", cfg.seed);
    read(doc, "repetitions", cfg.repetitions);
    if (doc.contains("costs")) {
      const auto& c = doc.at("costs");
      reject_unknown(c, {"weight_entry_range", "weight_ridge", "center_range"}, "costs.");
      read(c, "weight_entry_range", cfg.cost_family.weight_entry_range);
      read(c, "weight_ridge", cfg.cost_family.weight_ridge);
      read(c, "center_range", cfg.cost_family.center_range);
    }
    if (doc.contains("disturbance")) {
      const auto& d = doc.at("disturbance");
      reject_unknown(d, {"kind", "range"}, "disturbance.");
      read(d, "kind", cfg.disturbance.kind);
      read(d, "range", cfg.disturbance.range);
    }
    if (doc.contains("bank")) {
      const auto& b = doc.at("bank");
      reject_unknown(b, {"count", "target_gamma", "kappa_cap"}, "bank.");
      read(b, "count", cfg.bank_count);
      read(b, "target_gamma", cfg.bank_target_gamma);
      read(b, "kappa_cap", cfg.bank_kappa_cap);
    }
    read(doc, "ball_radius", cfg.ball_radius);
    read(doc, "algorithm", cfg.algorithm);
    read(doc, "batch_size", cfg.batch_size);
    read(doc, "eta", cfg.eta);
    read(doc, "epsilon", cfg.epsilon);
    read(doc, "lipschitz", cfg.lipschitz);
    read(doc, "domain_radius", cfg.domain_radius);
    read(doc, "epsilon_bench", cfg.epsilon_bench);
    read(doc, "sign_mode", cfg.sign_mode);
    read(doc, "disturbance_mode", cfg.disturbance_mode);
    if (doc.contains("dac")) {
      const auto& d = doc.at("dac");
      reject_unknown(d, {"memory", "truncation", "learning_rate", "coefficient_bound"}, "dac.");
      read(d, "memory", cfg.dac_memory);
      read(d, "truncation", cfg.dac_truncation);
      read(d, "learning_rate", cfg.dac_learning_rate);
      read(d, "coefficient_bound", cfg.dac_coefficient_bound);
    }
    read(doc, "x1", cfg.x1);
    read(doc, "sweep_horizons", cfg.sweep_horizons);
    read(doc, "output_dir", cfg.output_dir);
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string config_hash(const ExperimentConfig& cfg) {
  json doc = config_to_json(cfg);
  doc.erase("output_dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(doc.dump())));
  return buf;
}

LtiSystem make_system(const ExperimentConfig& cfg) {
  if (cfg.a_matrix) return LtiSystem(*cfg.a_matrix, *cfg.b_matrix);
  if (cfg.system_preset == "study-3x2") return study_system();
  throw ConfigurationError("config: unknown system preset '" + cfg.system_preset + "'");
}

// --- experiment setup -------------------------------------------------------

Experiment prepare_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const LtiSystem system = make_system(cfg);
  BankOptions options;
  options.count = cfg.bank_count;
  options.target_gamma = cfg.bank_target_gamma;
  options.kappa_cap = cfg.bank_kappa_cap;
  options.seed = cfg.seed;
  return prepare_experiment(cfg, generate_bank(system, options));
}

Experiment prepare_experiment(const ExperimentConfig& cfg, ControllerBank bank) {
  cfg.validate();
  Experiment e{cfg, make_system(cfg), std::move(bank), InputBall(cfg.ball_radius), VectorXd(), 1, 0.0,
               0.0, false};
  const auto n = e.system.state_dim();
  if (cfg.x1.empty()) {
    e.x1 = VectorXd::Zero(n);
  } else {
    if (static_cast<Eigen::Index>(cfg.x1.size()) != n) throw ConfigurationError("config: x1 dimension mismatch");
    e.x1 = Eigen::Map<const VectorXd>(cfg.x1.data(), n);
  }
  if (e.bank.certificates.empty()) throw ConfigurationError("config: empty bank");
  e.batch_size = cfg.batch_size > 0 ? cfg.batch_size
                                    : derive_batch_size(e.bank.bank_gamma, e.bank.bank_kappa);
  e.epsilon = cfg.epsilon > 0.0 ? cfg.epsilon : 1.0 / cfg.horizon;
  if (cfg.domain_radius > 0.0) {
    e.domain_radius = cfg.domain_radius;
  } else {
    const double radius = steady_state_radius(e.system, e.bank.bank_gamma, e.bank.bank_kappa, e.ball);
    const double envelope =
        bounded_state_envelope(e.system, e.bank.bank_gamma, e.bank.bank_kappa, e.ball, e.x1);
    e.domain_radius = std::max(radius, envelope);
  }
  if (cfg.disturbance_mode == "auto") {
    e.disturbance_mode = cfg.disturbance.kind != "zero";
  } else {
    e.disturbance_mode = cfg.disturbance_mode == "on";
  }
  return e;
}

Instance generate_instance(const Experiment& experiment, int repetition) {
  const auto& cfg = experiment.config;
  const auto n = experiment.system.state_dim();
  CounterRng cost_rng(cfg.seed, "costs", static_cast<std::uint64_t>(repetition));
  CounterRng noise_rng(cfg.seed, "disturbances", static_cast<std::uint64_t>(repetition));

  Instance inst;
  inst.costs.stages.reserve(cfg.horizon);
  inst.disturbances.reserve(cfg.horizon);
  const double r = cfg.cost_family.weight_entry_range;
  for (int t = 0; t < cfg.horizon; ++t) {
    const MatrixXd d = cost_rng.uniform_matrix(n, n, -r, r);
    MatrixXd q = d.transpose() * d + cfg.cost_family.weight_ridge * MatrixXd::Identity(n, n);
    q = (0.5 * (q + q.transpose())).eval();
    VectorXd c = cost_rng.uniform_vector(n, -cfg.cost_family.center_range, cfg.cost_family.center_range);
    inst.costs.stages.push_back(std::make_shared<QuadraticCost>(std::move(q), std::move(c)));
    if (cfg.disturbance.kind == "uniform") {
      inst.disturbances.push_back(noise_rng.uniform_vector(n, -cfg.disturbance.range, cfg.disturbance.range));
    } else {
      inst.disturbances.push_back(VectorXd::Zero(n));
    }
  }
  inst.costs.domain_radius = experiment.domain_radius;
  inst.costs.lipschitz_scale = cfg.lipschitz > 0.0
                                   ? cfg.lipschitz
                                   : quadratic_lipschitz_scale(inst.costs.stages, experiment.domain_radius);
  return inst;
}

std::string instance_hash(const Instance& instance) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const double* data, Eigen::Index count) {
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(data), sizeof(double) * count), h);
  };
  for (const auto& stage : instance.costs.stages) {
    if (const auto* q = dynamic_cast<const QuadraticCost*>(stage.get())) {
      mix(q->weight().data(), q->weight().size());
      mix(q->center().data(), q->center().size());
    }
  }
  for (const auto& w : instance.disturbances) mix(w.data(), w.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Benchmark compute_benchmark(const std::vector<CostHandle>& stages, const LtiSystem& system,
                            const ControllerBank& bank, const InputBall& ball, double epsilon_bench) {
  if (stages.empty()) throw ConfigurationError("compute_benchmark: empty cost sequence");
  const SumCost total(stages);
  std::optional<QuadraticObjective> quadratic;
  if (auto form = total.quadratic_form()) quadratic.emplace(std::move(*form));
  const StageCost& objective = quadratic ? static_cast<const StageCost&>(*quadratic) : total;
  const OracleResult r = approx_min(objective, system, bank, ball, OracleConfig::for_epsilon(epsilon_bench, ball));
  // Report the value as the plain sum of stage costs at the chosen point.
  return Benchmark{total.eval(r.target.point), r.target, r.bank_index};
}

std::vector<VectorXd> disturbance_driven_states(const LtiSystem& system, const MatrixXd& anchor,
                                                const std::vector<VectorXd>& disturbances) {
  const auto n = system.state_dim();
  std::vector<VectorXd> out;
  out.reserve(disturbances.size() + 1);
  SplitState split{VectorXd::Zero(n), VectorXd::Zero(n)};
  out.push_back(split.disturbance_driven);
  const VectorXd zero_input = VectorXd::Zero(system.input_dim());
  for (const auto& w : disturbances) {
    split = step_split(system, split, zero_input, -anchor * split.disturbance_driven, w);
    out.push_back(split.disturbance_driven);
  }
  return out;
}

// --- runs -------------------------------------------------------------------

BatchFtplParams ftpl_params(const Experiment& e, const Instance& instance, int repetition) {
  const auto& cfg = e.config;
  BatchFtplParams p;
  p.horizon = cfg.horizon;
  p.batch_size = e.batch_size;
  p.eta = cfg.eta > 0.0 ? cfg.eta
                        : derive_eta(instance.costs.lipschitz_scale, static_cast<int>(e.system.state_dim()),
                                     cfg.horizon, e.bank.bank_gamma, e.bank.bank_kappa);
  p.epsilon = e.epsilon;
  p.rng_seed = splitmix64(cfg.seed) ^ splitmix64(static_cast<std::uint64_t>(repetition) + 1);
  p.sign_mode = cfg.sign_mode == "random-sign" ? SignMode::kRandomSign : SignMode::kLiteral;
  p.disturbance_mode = e.disturbance_mode;
  p.anchor_gain = e.bank.certificates.front();
  return p;
}

DacParams dac_params(const Experiment& e) {
  const auto& cfg = e.config;
  DacParams p;
  p.memory = cfg.dac_memory;
  p.truncation = cfg.dac_truncation;
  p.learning_rate = cfg.dac_learning_rate > 0.0 ? cfg.dac_learning_rate : 1.0 / std::sqrt(cfg.horizon);
  p.coefficient_bound = cfg.dac_coefficient_bound;
  p.anchor_gain = e.bank.certificates.front();
  return p;
}

RepetitionResult run_repetition(const Experiment& e, int repetition) {
  const auto& cfg = e.config;
  RepetitionResult out;
  out.repetition = repetition;
  const std::string hash = config_hash(cfg);
  try {
    const Instance inst = generate_instance(e, repetition);
    out.instance_hash = instance_hash(inst);

    // Regret is measured in nominal coordinates when the split is active.
    std::vector<CostHandle> bench_stages = inst.costs.stages;
    if (e.disturbance_mode) {
      const auto xd = disturbance_driven_states(e.system, e.bank.certificates.front().gain, inst.disturbances);
      for (std::size_t t = 0; t < bench_stages.size(); ++t) {
        bench_stages[t] = std::make_shared<TranslatedCost>(inst.costs.stages[t], xd[t]);
      }
    }
    const double eps_bench = cfg.epsilon_bench > 0.0 ? cfg.epsilon_bench : 1e-6 * cfg.horizon;
    out.benchmark = compute_benchmark(bench_stages, e.system, e.bank, e.ball, eps_bench).value;

    auto finish = [&](RunTrace trace, json parameters) {
      RunResult r;
      r.cumulative = trace.cumulative();
      r.trace = std::move(trace);
      r.benchmark = out.benchmark;
      r.regret = r.cumulative - r.benchmark;
      r.repetition = repetition;
      r.config_hash = hash;
      r.seed = cfg.seed;
      r.parameters = std::move(parameters);
      return r;
    };

    if (cfg.algorithm != "dac") {
      const BatchFtplParams p = ftpl_params(e, inst, repetition);
      BatchFtplRun run = run_batch_ftpl(p, e.system, e.bank, e.ball, inst.costs, inst.disturbances, e.x1);
      json params = {{"batch_size", p.batch_size},
                     {"eta", p.eta},
                     {"epsilon", p.epsilon},
                     {"lipschitz", inst.costs.lipschitz_scale},
                     {"domain_radius", inst.costs.domain_radius},
                     {"disturbance_mode", p.disturbance_mode},
                     {"sign_mode", cfg.sign_mode}};
      RunTrace trace = run.trace;
      out.ftpl = finish(std::move(trace), std::move(params));
      out.ftpl->ftpl_details = std::move(run);
    }
    if (cfg.algorithm != "batchftpl") {
      const DacParams p = dac_params(e);
      json params = {{"memory", p.memory},
                     {"truncation", p.truncation},
                     {"learning_rate", p.learning_rate},
                     {"coefficient_bound", p.coefficient_bound}};
      out.dac = finish(run_dac(p, e.system, inst.costs, inst.disturbances, e.x1), std::move(params));
    }
  } catch (const Error& err) {
    out.error = err.what();
  }
  return out;
}

ComparisonResult run_comparison(const ExperimentConfig& cfg) { return run_comparison(prepare_experiment(cfg)); }

ComparisonResult run_comparison(const Experiment& e) {
  ComparisonResult result;
  result.config = e.config;
  result.config_hash = config_hash(e.config);
  for (int rep = 0; rep < e.config.repetitions; ++rep) {
    result.repetitions.push_back(run_repetition(e, rep));
  }
  return result;
}

namespace {

const RunResult* pick(const RepetitionResult& r, const std::string& algorithm) {
  const auto& slot = algorithm == "dac" ? r.dac : r.ftpl;
  return slot ? &*slot : nullptr;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

CurveStats cumulative_stats(const ComparisonResult& result, const std::string& algorithm) {
  std::vector<std::vector<double>> curves;
  for (const auto& rep : result.repetitions) {
    if (const RunResult* r = pick(rep, algorithm)) curves.push_back(r->trace.cumulative_curve());
  }
  CurveStats stats;
  stats.runs = static_cast<int>(curves.size());
  if (curves.empty()) return stats;
  const std::size_t len = curves.front().size();
  stats.mean.resize(len);
  stats.stddev.resize(len);
  std::vector<double> column(curves.size());
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t k = 0; k < curves.size(); ++k) column[k] = curves[k][t];
    stats.mean[t] = mean_of(column);
    stats.stddev[t] = std_of(column);
  }
  return stats;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nan("");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nan("");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double mx = mean_of(lx);
  const double my = mean_of(ly);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

SweepResult run_sweep(const ExperimentConfig& base, const RepetitionObserver& observe) {
  ExperimentConfig cfg = base;
  cfg.disturbance.kind = "zero";
  cfg.algorithm = "batchftpl";
  cfg.validate();

  SweepResult result;
  result.config = cfg;
  result.config_hash = config_hash(cfg);

  const LtiSystem system = make_system(cfg);
  BankOptions options;
  options.count = cfg.bank_count;
  options.target_gamma = cfg.bank_target_gamma;
  options.kappa_cap = cfg.bank_kappa_cap;
  options.seed = cfg.seed;
  const ControllerBank bank = generate_bank(system, options);

  std::vector<double> xs, ys;
  for (int horizon : cfg.sweep_horizons) {
    ExperimentConfig point_cfg = cfg;
    point_cfg.horizon = horizon;
    const Experiment e = prepare_experiment(point_cfg, bank);
    SweepPoint point;
    point.horizon = horizon;
    point.epsilon = e.epsilon;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      const RepetitionResult r = run_repetition(e, rep);
      if (observe) observe(e, r);
      if (r.ftpl) {
        point.regrets.push_back(r.ftpl->regret);
      } else {
        ++point.failures;
      }
    }
    point.mean_regret = mean_of(point.regrets);
    point.std_regret = std_of(point.regrets);
    xs.push_back(horizon);
    ys.push_back(point.mean_regret);
    result.points.push_back(std::move(point));
  }
  result.slope = log_log_slope(xs, ys);
  return result;
}

// --- emission ---------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

json timing_json(const std::vector<const RunResult*>& runs) {
  std::vector<double> totals, per_update;
  std::size_t updates = 0;
  for (const auto* r : runs) {
    totals.push_back(r->trace.total_seconds);
    for (double s : r->trace.update_seconds) per_update.push_back(s);
    updates += r->trace.update_seconds.size();
  }
  return {{"total_seconds_mean", mean_of(totals)},
          {"total_seconds_std", std_of(totals)},
          {"per_update_seconds_mean", mean_of(per_update)},
          {"per_update_seconds_std", std_of(per_update)},
          {"updates_per_run", runs.empty() ? 0.0 : static_cast<double>(updates) / runs.size()}};
}

}  // namespace

std::string trace_csv(const RunTrace& trace) {
  std::ostringstream out;
  const auto n = trace.states.empty() ? 0 : trace.states.front().size();
  const auto m = trace.inputs.empty() ? 0 : trace.inputs.front().size();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  for (Eigen::Index i = 1; i <= m; ++i) out << ",u_" << i;
  out << ",stage_cost,cumulative,batch_index\n";
  double cumulative = 0.0;
  for (int t = 0; t < trace.horizon(); ++t) {
    cumulative += trace.stage_costs[t];
    out << t + 1;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << fmt(trace.states[t](i));
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << fmt(trace.inputs[t](i));
    out << ',' << fmt(trace.stage_costs[t]) << ',' << fmt(cumulative) << ',' << trace.batch_index[t] << '\n';
  }
  return out.str();
}

json summary_json(const ComparisonResult& result) {
  json algorithms = json::object();
  for (const std::string algo : {"batchftpl", "dac"}) {
    std::vector<const RunResult*> runs;
    for (const auto& rep : result.repetitions) {
      if (const RunResult* r = pick(rep, algo)) runs.push_back(r);
    }
    if (runs.empty()) continue;
    const CurveStats stats = cumulative_stats(result, algo);
    std::vector<double> cumulative, regret;
    for (const auto* r : runs) {
      cumulative.push_back(r->cumulative);
      regret.push_back(r->regret);
    }
    algorithms[algo] = {{"runs", runs.size()},
                        {"mean_cumulative_curve", stats.mean},
                        {"std_cumulative_curve", stats.stddev},
                        {"final_cumulative_mean", stats.mean.back()},
                        {"final_cumulative_std", stats.stddev.back()},
                        {"cumulative", cumulative},
                        {"regret", regret},
                        {"regret_mean", mean_of(regret)},
                        {"parameters", runs.front()->parameters},
                        {"timing", timing_json(runs)}};
  }
  json reps = json::array();
  int runs_ok = 0;
  for (const auto& rep : result.repetitions) {
    json entry = {{"repetition", rep.repetition}, {"instance_hash", rep.instance_hash}, {"benchmark", rep.benchmark}};
    if (!rep.error.empty()) entry["error"] = rep.error;
    else ++runs_ok;
    if (rep.ftpl) entry["batchftpl_parameters"] = rep.ftpl->parameters;
    reps.push_back(std::move(entry));
  }
  return {{"config_hash", result.config_hash},
          {"config", config_to_json(result.config)},
          {"runs", runs_ok},
          {"repetitions", std::move(reps)},
          {"algorithms", std::move(algorithms)},
          {"distributions",
           {{"weight", "Q_t = D^T D + ridge*I, D_ij ~ U[-weight_entry_range, weight_entry_range]"},
            {"center", "c_t ~ U[-center_range, center_range]^N"},
            {"disturbance", "w_t ~ U[-range, range]^N (or zero)"}}}};
}

json summary_json(const SweepResult& result) {
  json points = json::array();
  for (const auto& p : result.points) {
    points.push_back({{"horizon", p.horizon},
                      {"epsilon", p.epsilon},
                      {"mean_regret", p.mean_regret},
                      {"std_regret", p.std_regret},
                      {"regret_over_sqrt_t", p.mean_regret / std::sqrt(static_cast<double>(p.horizon))},
                      {"regrets", p.regrets},
                      {"failures", p.failures}});
  }
  return {{"config_hash", result.config_hash},
          {"config", config_to_json(result.config)},
          {"points", std::move(points)},
          {"log_log_slope", std::isfinite(result.slope) ? json(result.slope) : json(nullptr)}};
}

void emit(const ComparisonResult& result, const fs::path& dir) {
  make_dirs(dir);
  write_file(dir / "summary.json", summary_json(result).dump(2) + "\n");

  bool any = false;
  for (const auto& rep : result.repetitions) {
    for (const RunResult* r : {pick(rep, "batchftpl"), pick(rep, "dac")}) {
      if (r == nullptr) continue;
      if (!any) make_dirs(dir / "traces");
      any = true;
      char name[64];
      std::snprintf(name, sizeof name, "rep%03d_%s.csv", rep.repetition, r->trace.algorithm.c_str());
      write_file(dir / "traces" / name, trace_csv(r->trace));
    }
  }
  if (!any) return;

  const CurveStats ftpl = cumulative_stats(result, "batchftpl");
  const CurveStats dac = cumulative_stats(result, "dac");
  const std::size_t len = std::max(ftpl.mean.size(), dac.mean.size());
  std::vector<double> ts(len);
  for (std::size_t t = 0; t < len; ++t) ts[t] = static_cast<double>(t + 1);

  std::ostringstream csv;
  csv << "t,batchftpl_mean,batchftpl_std,dac_mean,dac_std\n";
  for (std::size_t t = 0; t < len; ++t) {
    csv << t + 1 << ',' << (t < ftpl.mean.size() ? fmt(ftpl.mean[t]) : "") << ','
        << (t < ftpl.stddev.size() ? fmt(ftpl.stddev[t]) : "") << ',' << (t < dac.mean.size() ? fmt(dac.mean[t]) : "")
        << ',' << (t < dac.stddev.size() ? fmt(dac.stddev[t]) : "") << '\n';
  }
  write_file(dir / "cumulative_cost.csv", csv.str());
  std::vector<plot::Series> series;
  if (ftpl.runs > 0) series.push_back({"BatchFTPL", ftpl.mean, ftpl.stddev, "#1f77b4"});
  if (dac.runs > 0) series.push_back({"DAC", dac.mean, dac.stddev, "#d62728"});
  write_file(dir / "cumulative_cost.svg",
             plot::line_chart("Cumulative cost (mean +- std)", ts, series, "t", "cumulative cost"));

  const json summary = summary_json(result);
  std::vector<std::string> labels;
  std::vector<double> totals, total_err, per_call, per_call_err;
  std::ostringstream runtime_csv;
  runtime_csv << "algorithm,total_seconds_mean,total_seconds_std,per_update_seconds_mean,per_update_seconds_std\n";
  for (const auto& [name, algo] : summary.at("algorithms").items()) {
    const auto& timing = algo.at("timing");
    labels.push_back(name);
    totals.push_back(timing.at("total_seconds_mean"));
    total_err.push_back(timing.at("total_seconds_std"));
    per_call.push_back(timing.at("per_update_seconds_mean"));
    per_call_err.push_back(timing.at("per_update_seconds_std"));
    runtime_csv << name << ',' << fmt(totals.back()) << ',' << fmt(total_err.back()) << ','
                << fmt(per_call.back()) << ',' << fmt(per_call_err.back()) << '\n';
  }
  write_file(dir / "runtime.csv", runtime_csv.str());
  write_file(dir / "runtime_total.svg", plot::bar_chart("Total runtime per run", labels, totals, total_err, "seconds"));
  write_file(dir / "runtime_per_update.svg",
             plot::bar_chart("Time per controller update", labels, per_call, per_call_err, "seconds"));
}

void emit(const SweepResult& result, const fs::path& dir) {
  make_dirs(dir);
  write_file(dir / "sweep_summary.json", summary_json(result).dump(2) + "\n");
  std::ostringstream csv;
  csv << "horizon,mean_regret,std_regret,regret_over_sqrt_t\n";
  std::vector<double> xs, ys;
  for (const auto& p : result.points) {
    const double scaled = p.mean_regret / std::sqrt(static_cast<double>(p.horizon));
    csv << p.horizon << ',' << fmt(p.mean_regret) << ',' << fmt(p.std_regret) << ',' << fmt(scaled) << '\n';
    xs.push_back(p.horizon);
    ys.push_back(scaled);
  }
  write_file(dir / "regret.csv", csv.str());
  write_file(dir / "regret.svg",
             plot::line_chart("Mean regret / sqrt(T)", xs, {{"BatchFTPL", ys, {}, "#1f77b4"}}, "T", "regret / sqrt(T)"));
}

}  // namespace onc
