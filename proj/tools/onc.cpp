// Command-line front end: bank, run, compare, sweep, verify.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "onc/acceptance.hpp"
#include "onc/errors.hpp"
#include "onc/harness.hpp"
#include "onc/json_eigen.hpp"

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kConfig = 1, kNumerical = 2, kAcceptance = 3 };

// Flags that override the config file. Unset flags leave the file value.
struct Overrides {
  std::string config_path;
  std::optional<int> horizon, repetitions, bank_count, batch_size, dac_memory, dac_truncation;
  std::optional<std::uint64_t> seed;
  std::optional<double> bank_gamma, kappa_cap, ball_radius, eta, epsilon, lipschitz, domain_radius,
      epsilon_bench, disturbance_range, dac_lr, dac_bound, weight_range, weight_ridge, center_range;
  std::optional<std::string> algorithm, sign_mode, disturbance_mode, disturbance, output_dir;
  std::optional<std::vector<double>> x1;
  std::optional<std::vector<int>> sweep_horizons;
  std::string bank_path;

  void attach(CLI::App* app, bool with_algorithm) {
    app->add_option("--config", config_path, "JSON config file");
    app->add_option("--horizon,-T", horizon, "horizon T");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--repetitions,-r", repetitions, "number of repetitions");
    app->add_option("--bank-count", bank_count, "controllers in the bank");
    app->add_option("--bank-gamma", bank_gamma, "target gamma of bank certificates");
    app->add_option("--kappa-cap", kappa_cap, "largest admissible kappa");
    app->add_option("--ball-radius,-U", ball_radius, "input offset radius U");
    app->add_option("--bank", bank_path, "load the bank from a JSON file");
    if (with_algorithm) app->add_option("--algorithm", algorithm, "batchftpl | dac | both");
    app->add_option("--batch-size,-H", batch_size, "batch size H (0 derives it)");
    app->add_option("--eta", eta, "perturbation rate (0 derives it)");
    app->add_option("--epsilon", epsilon, "oracle accuracy (0 means 1/T)");
    app->add_option("--lipschitz", lipschitz, "gradient bound L (0 derives it)");
    app->add_option("--domain-radius", domain_radius, "state-domain radius D (0 derives it)");
    app->add_option("--epsilon-bench", epsilon_bench, "benchmark oracle accuracy (0 means 1e-6 T)");
    app->add_option("--sign-mode", sign_mode, "literal | random-sign");
    app->add_option("--disturbance-mode", disturbance_mode, "auto | on | off");
    app->add_option("--disturbance", disturbance, "zero | uniform");
    app->add_option("--disturbance-range", disturbance_range, "w_t ~ U[-r, r]");
    app->add_option("--weight-range", weight_range, "D_ij ~ U[-r, r] in Q = D^T D + ridge I");
    app->add_option("--weight-ridge", weight_ridge, "ridge added to Q");
    app->add_option("--center-range", center_range, "c_t ~ U[-r, r]");
    app->add_option("--dac-memory", dac_memory, "DAC memory m");
    app->add_option("--dac-truncation", dac_truncation, "DAC surrogate truncation h");
    app->add_option("--dac-lr", dac_lr, "DAC step size (0 means 1/sqrt(T))");
    app->add_option("--dac-bound", dac_bound, "DAC Frobenius bound per coefficient");
    app->add_option("--x1", x1, "initial state")->expected(1, -1);
    app->add_option("--sweep-horizons", sweep_horizons, "horizons of the regret sweep")->expected(1, -1);
    app->add_option("--output-dir,-o", output_dir, "output directory");
  }

  onc::ExperimentConfig resolve() const {
    onc::ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw onc::ConfigurationError("cannot read config '" + config_path + "'");
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw onc::ConfigurationError("config '" + config_path + "': " + e.what());
      }
      cfg = onc::config_from_json(doc);
    }
    auto set = [](auto& dst, const auto& src) {
      if (src) dst = *src;
    };
    set(cfg.horizon, horizon);
    set(cfg.seed, seed);
    set(cfg.repetitions, repetitions);
    set(cfg.bank_count, bank_count);
    set(cfg.bank_target_gamma, bank_gamma);
    set(cfg.bank_kappa_cap, kappa_cap);
    set(cfg.ball_radius, ball_radius);
    set(cfg.algorithm, algorithm);
    set(cfg.batch_size, batch_size);
    set(cfg.eta, eta);
    set(cfg.epsilon, epsilon);
    set(cfg.lipschitz, lipschitz);
    set(cfg.domain_radius, domain_radius);
    set(cfg.epsilon_bench, epsilon_bench);
    set(cfg.sign_mode, sign_mode);
    set(cfg.disturbance_mode, disturbance_mode);
    set(cfg.disturbance.kind, disturbance);
    set(cfg.disturbance.range, disturbance_range);
    set(cfg.cost_family.weight_entry_range, weight_range);
    set(cfg.cost_family.weight_ridge, weight_ridge);
    set(cfg.cost_family.center_range, center_range);
    set(cfg.dac_memory, dac_memory);
    set(cfg.dac_truncation, dac_truncation);
    set(cfg.dac_learning_rate, dac_lr);
    set(cfg.dac_coefficient_bound, dac_bound);
    set(cfg.x1, x1);
    set(cfg.sweep_horizons, sweep_horizons);
    set(cfg.output_dir, output_dir);
    cfg.validate();
    return cfg;
  }

  onc::Experiment experiment(const onc::ExperimentConfig& cfg) const {
    if (bank_path.empty()) return onc::prepare_experiment(cfg);
    std::ifstream in(bank_path);
    if (!in) throw onc::ConfigurationError("cannot read bank '" + bank_path + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw onc::ConfigurationError("bank '" + bank_path + "': " + e.what());
    }
    return onc::prepare_experiment(cfg, onc::bank_from_json(doc, onc::make_system(cfg)));
  }
};

void print_header(const onc::ExperimentConfig& cfg) {
  std::printf("config hash: %s\n", onc::config_hash(cfg).c_str());
}

int report_failures(const onc::ComparisonResult& result) {
  int failures = 0;
  for (const auto& rep : result.repetitions) {
    if (rep.error.empty()) continue;
    ++failures;
    std::fprintf(stderr, "repetition %d failed: %s\n", rep.repetition, rep.error.c_str());
  }
  return failures;
}

int cmd_bank(const Overrides& o, const std::string& out_path) {
  const auto cfg = o.resolve();
  print_header(cfg);
  const auto e = o.experiment(cfg);
  std::printf("controllers: %zu  gamma: %.6g  kappa: %.6g  H: %d\n", e.bank.size(), e.bank.bank_gamma,
              e.bank.bank_kappa, e.batch_size);
  const std::string dump = onc::bank_to_json(e.bank).dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::fputs(dump.c_str(), stdout);
  } else {
    std::ofstream out(out_path);
    if (!out || !(out << dump)) throw onc::IoError("cannot write '" + out_path + "'");
    std::printf("wrote %s\n", out_path.c_str());
  }
  return kOk;
}

int cmd_compare(const Overrides& o, bool save_instances, const char* forced_algorithm) {
  auto cfg = o.resolve();
  if (forced_algorithm) cfg.algorithm = forced_algorithm;
  print_header(cfg);
  const auto e = o.experiment(cfg);
  std::printf("bank: %zu controllers, gamma %.6g, kappa %.6g; H = %d, epsilon = %.6g, D = %.6g\n",
              e.bank.size(), e.bank.bank_gamma, e.bank.bank_kappa, e.batch_size, e.epsilon, e.domain_radius);
  const auto result = onc::run_comparison(e);
  onc::emit(result, cfg.output_dir);
  if (save_instances) {
    const std::filesystem::path dir = std::filesystem::path(cfg.output_dir) / "instances";
    std::filesystem::create_directories(dir);
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      const auto inst = onc::generate_instance(e, rep);
      json doc = {{"costs", onc::costs_to_json(inst.costs)}, {"disturbances", onc::to_json(inst.disturbances)}};
      char name[32];
      std::snprintf(name, sizeof name, "rep%03d.json", rep);
      std::ofstream out(dir / name);
      if (!out || !(out << doc.dump() << "\n")) throw onc::IoError("cannot write instance file");
    }
  }
  const json summary = onc::summary_json(result);
  for (const auto& [name, algo] : summary.at("algorithms").items()) {
    std::printf("%-10s runs %d  final cumulative %.6g +- %.6g  mean regret %.6g\n", name.c_str(),
                algo.at("runs").get<int>(), algo.at("final_cumulative_mean").get<double>(),
                algo.at("final_cumulative_std").get<double>(), algo.at("regret_mean").get<double>());
  }
  std::printf("results in %s\n", cfg.output_dir.c_str());
  return report_failures(result) > 0 ? kNumerical : kOk;
}

int cmd_sweep(const Overrides& o) {
  auto cfg = o.resolve();
  print_header(cfg);
  const auto result = onc::run_sweep(cfg);
  onc::emit(result, cfg.output_dir);
  int failures = 0;
  for (const auto& p : result.points) {
    std::printf("T = %5d  mean regret %.6g  std %.6g  failures %d\n", p.horizon, p.mean_regret, p.std_regret,
                p.failures);
    failures += p.failures;
  }
  std::printf("log-log slope: %.4f\nresults in %s\n", result.slope, cfg.output_dir.c_str());
  return failures > 0 ? kNumerical : kOk;
}

int cmd_verify(onc::acceptance::Options opts) {
  const auto results = onc::acceptance::run_all(opts);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%s\n", onc::acceptance::format(r).c_str());
    ok = ok && r.passed;
  }
  return ok ? kOk : kAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batched FTPL online control: experiments and checks"};
  app.require_subcommand(1);

  Overrides bank_o, run_o, compare_o, sweep_o;
  std::string bank_out;
  bool save_instances = false;

  auto* bank = app.add_subcommand("bank", "generate and print a controller bank");
  bank_o.attach(bank, false);
  bank->add_option("--out", bank_out, "write the bank JSON here instead of stdout");

  auto* run = app.add_subcommand("run", "run one algorithm (default batchftpl)");
  run_o.attach(run, true);
  run->add_flag("--save-instances", save_instances, "also write the cost and disturbance sequences");

  auto* compare = app.add_subcommand("compare", "BatchFTPL against DAC on shared instances");
  compare_o.attach(compare, false);
  compare->add_flag("--save-instances", save_instances, "also write the cost and disturbance sequences");

  auto* sweep = app.add_subcommand("sweep", "zero-disturbance regret against T");
  sweep_o.attach(sweep, false);

  onc::acceptance::Options verify_opts;
  std::string scratch;
  auto* verify = app.add_subcommand("verify", "run the acceptance checks");
  verify->add_option("--only", verify_opts.only, "criterion numbers to run")->expected(1, -1);
  verify->add_option("--seed", verify_opts.seed, "master seed");
  verify->add_option("--repetitions", verify_opts.repetitions, "seeds for the statistical checks");
  verify->add_option("--scratch", scratch, "directory for temporary outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*bank) return cmd_bank(bank_o, bank_out);
    if (*run) {
      if (!run_o.algorithm) run_o.algorithm = "batchftpl";
      if (*run_o.algorithm == "both") throw onc::ConfigurationError("run takes a single algorithm; use compare");
      return cmd_compare(run_o, save_instances, nullptr);
    }
    if (*compare) return cmd_compare(compare_o, save_instances, "both");
    if (*sweep) return cmd_sweep(sweep_o);
    if (*verify) {
      if (!scratch.empty()) verify_opts.scratch_dir = scratch;
      return cmd_verify(verify_opts);
    }
  } catch (const onc::ConfigurationError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfig;
  } catch (const onc::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kConfig;
  }
  return kOk;
}
