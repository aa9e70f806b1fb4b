#include "onc/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "onc/errors.hpp"

namespace onc::acceptance {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

std::string printf_string(const char* format, ...) __attribute__((format(printf, 1, 2)));

std::string printf_string(const char* format, ...) {
  char buf[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

template <typename Body>
CheckResult timed(int id, const char* name, Body body) {
  CheckResult r;
  r.id = id;
  r.name = name;
  const auto start = Clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("unexpected error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

LtiSystem random_system(CounterRng& rng, int n, int m, double radius) {
  MatrixXd a = rng.uniform_matrix(n, n, -1.0, 1.0);
  const double rho = spectral_radius(a);
  if (rho > 0.0) a *= radius / rho;
  return LtiSystem(a, rng.uniform_matrix(n, m, -1.0, 1.0));
}

struct SystemWithBank {
  LtiSystem system;
  ControllerBank bank;
};

// Draws systems from the named stream until one admits a bank of the given size.
SystemWithBank random_system_with_bank(std::uint64_t seed, const char* stream, std::uint64_t index,
                                       int n, int m, double radius, int count, double target_gamma) {
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    CounterRng rng(seed, stream, index * 1000 + attempt);
    LtiSystem system = random_system(rng, n, m, radius);
    BankOptions options;
    options.count = count;
    options.target_gamma = target_gamma;
    options.kappa_cap = 50.0;
    options.seed = seed + index * 7919 + attempt;
    try {
      ControllerBank bank = generate_bank(system, options);
      return {std::move(system), std::move(bank)};
    } catch (const BankGenerationError&) {
    }
  }
  throw NumericalError(std::string("no bank-admitting system found in stream ") + stream);
}

// The ten random systems of the stability checks, some open-loop unstable.
std::vector<SystemWithBank> stability_suite(std::uint64_t seed) {
  std::vector<SystemWithBank> out;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const int n = 2 + static_cast<int>(s % 4);
    const int m = 1 + static_cast<int>(s % static_cast<std::uint64_t>(n));
    out.push_back(random_system_with_bank(seed, "acceptance-stability", s, n, m, 0.6 + 0.08 * s, 10, 0.1));
  }
  return out;
}

VectorXd central_difference(const std::function<double(const VectorXd&)>& f, const VectorXd& x, double h) {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    VectorXd plus = x;
    VectorXd minus = x;
    plus(i) += h;
    minus(i) -= h;
    g(i) = (f(plus) - f(minus)) / (2.0 * h);
  }
  return g;
}

double relative_error(const VectorXd& analytic, const VectorXd& numeric) {
  const double scale = std::max(analytic.norm(), numeric.norm());
  if (scale == 0.0) return 0.0;
  return (analytic - numeric).norm() / scale;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

void TargetLog::add(const LtiSystem& system, const ControllerBank& bank, const InputBall& ball,
                    const std::vector<BatchRecord>& batches) {
  const double b_norm = spectral_norm(system.b());
  for (const auto& record : batches) {
    const auto& cert = bank.certificates.at(record.bank_index);
    entries.push_back({record.target.point, cert.kappa / cert.gamma * b_norm * ball.radius()});
  }
}

ExperimentConfig comparison_config(const Options& opts) {
  ExperimentConfig cfg;
  cfg.seed = opts.seed;
  cfg.horizon = opts.horizon;
  cfg.repetitions = opts.repetitions;
  cfg.ball_radius = 1.0;
  cfg.eta = 1.0;
  cfg.algorithm = "both";
  return cfg;
}

CheckResult comparative_performance(const Options& opts, TargetLog& log) {
  return timed(1, "comparative performance", [&](CheckResult& r) {
    const Experiment e = prepare_experiment(comparison_config(opts));
    const ComparisonResult result = run_comparison(e);
    for (const auto& rep : result.repetitions) {
      if (rep.ftpl && rep.ftpl->ftpl_details) log.add(e.system, e.bank, e.ball, rep.ftpl->ftpl_details->batches);
    }
    const CurveStats ftpl = cumulative_stats(result, "batchftpl");
    const CurveStats dac = cumulative_stats(result, "dac");
    if (ftpl.runs != opts.repetitions || dac.runs != opts.repetitions) {
      r.detail = printf_string("only %d/%d BatchFTPL and %d/%d DAC runs completed", ftpl.runs,
                               opts.repetitions, dac.runs, opts.repetitions);
      return;
    }
    const int horizon = opts.horizon;
    int below = 0;
    int intermediate = 0;
    for (int t = 50; t < horizon; ++t) {
      ++intermediate;
      if (ftpl.mean[t - 1] < dac.mean[t - 1]) ++below;
    }
    const double fraction = intermediate > 0 ? static_cast<double>(below) / intermediate : 1.0;
    const double f_end = ftpl.mean.back();
    const double d_end = dac.mean.back();
    r.passed = f_end < d_end && fraction >= 0.8;
    r.detail = printf_string(
        "%d seeds, T=%d, U=%g, eta=%g: mean cumulative at T %.1f (BatchFTPL) vs %.1f (DAC); "
        "BatchFTPL below DAC at %.1f%% of 50 <= t < T (need >= 80%%)",
        opts.repetitions, horizon, e.ball.radius(), e.config.eta, f_end, d_end, 100.0 * fraction);
  });
}

CheckResult sublinear_regret(const Options& opts, TargetLog& log) {
  return timed(2, "sublinear regret", [&](CheckResult& r) {
    ExperimentConfig cfg;
    cfg.seed = opts.seed;
    cfg.repetitions = opts.repetitions;
    cfg.sweep_horizons = opts.sweep_horizons;
    const SweepResult sweep = run_sweep(cfg, [&](const Experiment& e, const RepetitionResult& rep) {
      if (rep.ftpl && rep.ftpl->ftpl_details) log.add(e.system, e.bank, e.ball, rep.ftpl->ftpl_details->batches);
    });
    bool nonnegative = true;
    int failures = 0;
    std::string table;
    for (const auto& p : sweep.points) {
      failures += p.failures;
      if (p.mean_regret < -p.epsilon * p.horizon) nonnegative = false;
      table += printf_string(" T=%d:%.4g", p.horizon, p.mean_regret);
    }
    const bool slope_ok = std::isfinite(sweep.slope) && sweep.slope <= 0.70;
    r.passed = slope_ok && nonnegative && failures == 0;
    r.detail = printf_string("log-log slope %.3f (need <= 0.70); mean regret%s; %s; %d failed runs", sweep.slope,
                             table.c_str(), nonnegative ? "nonnegative within eps*T" : "NEGATIVE beyond eps*T",
                             failures);
  });
}

CheckResult strong_stability_envelope(const Options& opts) {
  return timed(3, "strong-stability envelope", [&](CheckResult& r) {
    int checked = 0;
    int violations = 0;
    int invalid = 0;
    double worst = 0.0;
    for (const auto& sb : stability_suite(opts.seed)) {
      for (const auto& cert : sb.bank.certificates) {
        ++checked;
        if (!certificate_is_valid(cert, sb.system)) ++invalid;
        const auto profile = power_norm_profile(cert, sb.system, 50);
        for (int t = 1; t <= 50; ++t) {
          const double bound = cert.kappa * std::pow(1.0 - cert.gamma, t);
          worst = std::max(worst, profile[t - 1] / bound);
          if (profile[t - 1] > bound * (1.0 + 1e-8)) ++violations;
        }
      }
    }
    r.passed = checked == 100 && violations == 0 && invalid == 0;
    r.detail = printf_string("%d certificates on 10 systems, %d envelope violations, %d invalid witnesses, "
                             "max ||(A-BK)^t|| / (kappa (1-gamma)^t) = %.6f",
                             checked, violations, invalid, worst);
  });
}

CheckResult batch_size_contraction(const Options& opts, TargetLog& log) {
  return timed(4, "batch-size contraction", [&](CheckResult& r) {
    ExperimentConfig cfg;
    cfg.seed = opts.seed;
    cfg.disturbance.kind = "zero";
    cfg.algorithm = "batchftpl";
    cfg.repetitions = 1;
    const Experiment base = prepare_experiment(cfg);

    std::vector<StabilityCertificate> certs = base.bank.certificates;
    for (const auto& sb : stability_suite(opts.seed)) {
      certs.insert(certs.end(), sb.bank.certificates.begin(), sb.bank.certificates.end());
    }
    int contraction_failures = 0;
    double worst_factor = 0.0;
    for (const auto& c : certs) {
      const int h = derive_batch_size(c.gamma, c.kappa);
      const double factor = c.kappa * std::pow(1.0 - c.gamma, h);
      worst_factor = std::max(worst_factor, factor);
      if (factor > 0.5 + 1e-12) ++contraction_failures;
    }

    int envelope_failures = 0;
    double worst_ratio = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      CounterRng rng(opts.seed, "acceptance-x1", static_cast<std::uint64_t>(rep));
      const VectorXd x1 = rng.uniform_vector(3, -20.0, 20.0);
      ExperimentConfig rep_cfg = cfg;
      rep_cfg.x1.assign(x1.data(), x1.data() + x1.size());
      rep_cfg.sign_mode = rep % 2 == 0 ? "literal" : "random-sign";
      const Experiment e = prepare_experiment(rep_cfg, base.bank);
      const Instance inst = generate_instance(e, rep);
      const auto run = run_batch_ftpl(ftpl_params(e, inst, rep), e.system, e.bank, e.ball, inst.costs,
                                      inst.disturbances, e.x1);
      log.add(e.system, e.bank, e.ball, run.batches);
      const double envelope = bounded_state_envelope(e.system, e.bank.bank_gamma, e.bank.bank_kappa, e.ball, x1);
      double peak = 0.0;
      for (const auto& x : run.trace.states) peak = std::max(peak, x.norm());
      worst_ratio = std::max(worst_ratio, peak / envelope);
      if (peak > envelope) ++envelope_failures;
    }
    r.passed = contraction_failures == 0 && envelope_failures == 0;
    r.detail = printf_string("%zu certificates: max kappa(1-gamma)^H = %.6f (need <= 0.5); 20 runs with w=0: "
                             "max ||x_t|| / D_x = %.4f, %d envelope violations",
                             certs.size(), worst_factor, worst_ratio, envelope_failures);
  });
}

CheckResult bounded_steady_states(const Options& opts, TargetLog& log) {
  return timed(5, "bounded steady-state manifold", [&](CheckResult& r) {
    // Own runs: disturbance mode on the study system, both sign modes, plus benchmarks.
    ExperimentConfig cfg;
    cfg.seed = opts.seed;
    cfg.horizon = 200;
    cfg.repetitions = 1;
    cfg.algorithm = "batchftpl";
    const Experiment e = prepare_experiment(cfg);
    const double b_norm = spectral_norm(e.system.b());
    for (int rep = 0; rep < 4; ++rep) {
      const Instance inst = generate_instance(e, rep);
      BatchFtplParams p = ftpl_params(e, inst, rep);
      p.sign_mode = rep % 2 == 0 ? SignMode::kLiteral : SignMode::kRandomSign;
      if (rep >= 2) p.eta = 1.0;
      const auto run = run_batch_ftpl(p, e.system, e.bank, e.ball, inst.costs, inst.disturbances, e.x1);
      log.add(e.system, e.bank, e.ball, run.batches);
      const Benchmark bench = compute_benchmark(inst.costs.stages, e.system, e.bank, e.ball, 1e-6 * cfg.horizon);
      const auto& cert = e.bank.certificates.at(bench.bank_index);
      log.entries.push_back({bench.target.point, cert.kappa / cert.gamma * b_norm * e.ball.radius()});
    }

    int violations = 0;
    double worst_margin = -std::numeric_limits<double>::infinity();
    for (const auto& entry : log.entries) {
      // The Euclidean norm dominates the max-norm, so this is the stronger test.
      const double norm = entry.point.norm();
      worst_margin = std::max(worst_margin, norm - entry.bound);
      if (norm > entry.bound + 1e-9) ++violations;
    }
    r.passed = !log.entries.empty() && violations == 0;
    r.detail = printf_string("%zu oracle outputs, %d exceed kappa/gamma ||B|| U + 1e-9; "
                             "max(||z||_2 - bound) = %.4g",
                             log.entries.size(), violations, worst_margin);
  });
}

CheckResult oracle_accuracy(const Options& opts) {
  return timed(6, "oracle epsilon-optimality", [&](CheckResult& r) {
    constexpr double kEpsilon = 1e-3;
    constexpr double kStep = 1e-4;
    struct Family {
      int n, m;
      double radius;
      int quadratic, smooth;
    };
    const Family families[] = {{1, 1, 1.0, 12, 5}, {2, 1, 1.0, 12, 5}, {2, 2, 0.02, 16, 0}};

    int objectives = 0;
    int failures = 0;
    double worst_gap = -std::numeric_limits<double>::infinity();
    std::uint64_t index = 0;
    for (const auto& fam : families) {
      for (int k = 0; k < fam.quadratic + fam.smooth; ++k, ++index) {
        CounterRng rng(opts.seed, "acceptance-oracle", index);
        const int count = 1 + static_cast<int>(rng.next_u64() % 5);
        const auto sb = random_system_with_bank(opts.seed, "acceptance-oracle-system", index, fam.n, fam.m,
                                                0.3 + 0.6 * rng.uniform(), count, 0.05);
        const InputBall ball(fam.radius);

        // f(x) = sum_j (x - c_j)^T Q_j (x - c_j) + sigma^T x, optionally + alpha sum log cosh(x - d).
        QuadraticForm form = QuadraticForm::zero(fam.n);
        const int terms = 1 + static_cast<int>(rng.next_u64() % 3);
        for (int j = 0; j < terms; ++j) {
          const MatrixXd d = rng.uniform_matrix(fam.n, fam.n, -1.0, 1.0);
          const MatrixXd q = d.transpose() * d + 0.1 * MatrixXd::Identity(fam.n, fam.n);
          const VectorXd c = rng.uniform_vector(fam.n, -3.0, 3.0);
          form.weight += q;
          form.linear -= 2.0 * q * c;
          form.constant += c.dot(q * c);
        }
        form.linear += rng.uniform_vector(fam.n, -2.0, 2.0);

        std::shared_ptr<const StageCost> objective;
        const bool smooth = k >= fam.quadratic;
        if (smooth) {
          const double alpha = rng.uniform(0.5, 2.0);
          const VectorXd shift = rng.uniform_vector(fam.n, -1.0, 1.0);
          auto eval = [form, alpha, shift](const VectorXd& x) {
            double s = form.eval(x);
            for (Eigen::Index i = 0; i < x.size(); ++i) s += alpha * std::log(std::cosh(x(i) - shift(i)));
            return s;
          };
          auto grad = [form, alpha, shift](const VectorXd& x) {
            VectorXd g = form.gradient(x);
            for (Eigen::Index i = 0; i < x.size(); ++i) g(i) += alpha * std::tanh(x(i) - shift(i));
            return g;
          };
          objective = std::make_shared<FunctionCost>(fam.n, eval, grad);
        } else {
          objective = std::make_shared<QuadraticObjective>(form);
        }

        const OracleResult result =
            approx_min(*objective, sb.system, sb.bank, ball, OracleConfig::for_epsilon(kEpsilon, ball));

        // Brute force over a kStep grid of each slice's offset ball.
        double grid_min = std::numeric_limits<double>::infinity();
        const int points = static_cast<int>(std::lround(2.0 * fam.radius / kStep));
        for (const auto& cert : sb.bank.certificates) {
          const MatrixXd s = ball_parametrization(sb.system, cert).map;
          if (fam.m == 1) {
            const VectorXd col = s.col(0);
            for (int i = 0; i <= points; ++i) {
              const double v = -fam.radius + i * kStep;
              grid_min = std::min(grid_min, objective->eval(col * v));
            }
          } else {
            const MatrixXd p = s.transpose() * form.weight * s;
            const VectorXd lin = s.transpose() * form.linear;
            for (int i = 0; i <= points; ++i) {
              const double v0 = -fam.radius + i * kStep;
              for (int j = 0; j <= points; ++j) {
                const double v1 = -fam.radius + j * kStep;
                if (v0 * v0 + v1 * v1 > fam.radius * fam.radius) continue;
                const double value = p(0, 0) * v0 * v0 + (p(0, 1) + p(1, 0)) * v0 * v1 + p(1, 1) * v1 * v1 +
                                     lin(0) * v0 + lin(1) * v1 + form.constant;
                grid_min = std::min(grid_min, value);
              }
            }
          }
        }
        ++objectives;
        const double gap = result.value - grid_min;
        worst_gap = std::max(worst_gap, gap);
        const bool feasible = ball.contains(result.target.policy.offset, 1e-12);
        if (gap > kEpsilon || !feasible) ++failures;
      }
    }
    r.passed = objectives == 50 && failures == 0;
    r.detail = printf_string("%d objectives on banks of 1-5 slices (N,M) in {(1,1),(2,1),(2,2)}: "
                             "%d failures, max(oracle - grid min) = %.3g (epsilon %.0e)",
                             objectives, failures, worst_gap, kEpsilon);
  });
}

CheckResult superposition(const Options& opts, TargetLog& log) {
  return timed(7, "superposition and translated costs", [&](CheckResult& r) {
    ExperimentConfig cfg;
    cfg.seed = opts.seed;
    cfg.horizon = 200;
    cfg.repetitions = 1;
    cfg.algorithm = "batchftpl";
    cfg.disturbance_mode = "on";
    const Experiment e1 = prepare_experiment(cfg);
    BankOptions other;
    other.count = cfg.bank_count;
    other.target_gamma = cfg.bank_target_gamma;
    other.kappa_cap = cfg.bank_kappa_cap;
    other.seed = opts.seed + 1000;
    const Experiment e2 = prepare_experiment(cfg, generate_bank(e1.system, other));

    double split_error = 0.0;
    double cost_error = 0.0;
    int inexact_ledger = 0;
    double xd_gap = 0.0;
    int differing_gains = 0;
    for (int rep = 0; rep < 3; ++rep) {
      const Instance inst = generate_instance(e1, rep);
      BatchFtplParams p = ftpl_params(e1, inst, rep);
      p.eta = 1.0;  // targets that move between slices make the invariance non-trivial
      const auto run1 = run_batch_ftpl(p, e1.system, e1.bank, e1.ball, inst.costs, inst.disturbances, e1.x1);
      BatchFtplParams p2 = ftpl_params(e2, inst, rep);
      p2.eta = 1.0;
      p2.sign_mode = SignMode::kRandomSign;
      const auto run2 = run_batch_ftpl(p2, e2.system, e2.bank, e2.ball, inst.costs, inst.disturbances, e2.x1);
      log.add(e1.system, e1.bank, e1.ball, run1.batches);
      log.add(e2.system, e2.bank, e2.ball, run2.batches);

      for (std::size_t t = 0; t < run1.trace.states.size(); ++t) {
        const VectorXd& x = run1.trace.states[t];
        split_error = std::max(split_error, (run1.nominal[t] + run1.disturbance_driven[t] - x).norm() /
                                                std::max(1.0, x.norm()));
        xd_gap = std::max(xd_gap, (run1.disturbance_driven[t] - run2.disturbance_driven[t]).norm());
      }
      for (int t = 0; t < run1.trace.horizon(); ++t) {
        const auto& f = *inst.costs.stages[t];
        const double ledger = run1.trace.stage_costs[t];
        if (ledger != f.eval(run1.nominal[t] + run1.disturbance_driven[t])) ++inexact_ledger;
        const double physical = f.eval(run1.trace.states[t]);
        cost_error = std::max(cost_error, std::abs(ledger - physical) / std::max(1.0, std::abs(physical)));
      }
      const std::size_t batches = std::min(run1.batches.size(), run2.batches.size());
      for (std::size_t b = 0; b < batches; ++b) {
        const auto& k1 = run1.batches[b].target.policy.certificate.gain;
        const auto& k2 = run2.batches[b].target.policy.certificate.gain;
        if ((k1 - k2).norm() > 1e-9) ++differing_gains;
      }
    }
    r.passed = split_error <= 1e-9 && inexact_ledger == 0 && cost_error <= 1e-9 && xd_gap <= 1e-12 &&
               differing_gains > 0;
    r.detail = printf_string("max |x_nom + x_d - x| = %.2g (1e-9); ledger != f_t(x_nom + x_d) at %d steps; "
                             "max |ledger - f_t(x_t)| = %.2g; x_d gap across banks %.2g (1e-12) with %d batches "
                             "holding different gains",
                             split_error, inexact_ledger, cost_error, xd_gap, differing_gains);
  });
}

CheckResult unrolled_state(const Options& opts, TargetLog& log) {
  return timed(8, "unrolled-state identity", [&](CheckResult& r) {
    double worst = 0.0;
    int steps = 0;
    int distinct_targets = 0;
    for (std::uint64_t inst = 0; inst < 5; ++inst) {
      const auto sb = random_system_with_bank(opts.seed, "acceptance-unroll", inst, 3, 2, 0.9, 10, 0.1);
      const LtiSystem& system = sb.system;
      const InputBall ball(10.0);
      CounterRng rng(opts.seed, "acceptance-unroll-costs", inst);
      const int h = derive_batch_size(sb.bank.bank_gamma, sb.bank.bank_kappa);
      const int horizon = 3 * h;
      CostSequence costs;
      for (int t = 0; t < horizon; ++t) {
        const MatrixXd d = rng.uniform_matrix(3, 3, -1.0, 1.0);
        MatrixXd q = d.transpose() * d + 0.1 * MatrixXd::Identity(3, 3);
        q = (0.5 * (q + q.transpose())).eval();
        costs.stages.push_back(std::make_shared<QuadraticCost>(q, rng.uniform_vector(3, -5.0, 5.0)));
      }
      const std::vector<VectorXd> zero(horizon, VectorXd::Zero(3));
      BatchFtplParams p;
      p.horizon = horizon;
      p.batch_size = h;
      p.eta = 0.05;
      p.epsilon = 1e-6;
      p.rng_seed = splitmix64(opts.seed + inst);
      p.sign_mode = SignMode::kRandomSign;
      const VectorXd x1 = rng.uniform_vector(3, -3.0, 3.0);
      const auto run = run_batch_ftpl(p, system, sb.bank, ball, costs, zero, x1);
      log.add(system, sb.bank, ball, run.batches);
      if (run.batches.size() != 3) {
        r.detail = printf_string("expected 3 batches, got %zu", run.batches.size());
        return;
      }
      for (std::size_t b = 1; b < run.batches.size(); ++b) {
        if ((run.batches[b].target.point - run.batches[b - 1].target.point).norm() > 1e-9) ++distinct_targets;
      }

      // Per-step closed loops and targets from the recorded batches.
      const auto n = system.state_dim();
      const MatrixXd eye = MatrixXd::Identity(n, n);
      std::vector<MatrixXd> closed(horizon + 1);
      std::vector<VectorXd> target(horizon + 2);
      for (int t = 1; t <= horizon; ++t) {
        const auto& rec = run.batches.at(run.trace.batch_index[t - 1] - 1);
        closed[t] = system.closed_loop(rec.target.policy.certificate.gain);
        target[t] = rec.target.point;
      }
      target[horizon + 1] = target[horizon];

      for (int t = 1; t <= horizon; ++t) {
        const VectorXd& z_next = target[t + 1];
        // Phi(t, s) = Abar_t ... Abar_s, accumulated from s = t down to 1.
        MatrixXd phi = eye;  // Phi(t, t + 1)
        VectorXd rhs = VectorXd::Zero(n);
        for (int tau = t; tau >= 1; --tau) {
          rhs += phi * (eye - closed[tau]) * (target[tau] - z_next);
          phi = phi * closed[tau];
        }
        rhs += phi * (x1 - z_next);
        const VectorXd lhs = run.trace.states[t] - z_next;
        worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, lhs.norm()));
        ++steps;
      }
    }
    r.passed = steps > 0 && worst <= 1e-8;
    r.detail = printf_string("5 seeded N=3 instances with 3 batches (%d target switches), %d steps: "
                             "max |x_{t+1} - z_{t+1} - unrolled| = %.3g (1e-8)",
                             distinct_targets, steps, worst);
  });
}

CheckResult gradient_checks(const Options& opts) {
  return timed(9, "gradient checks", [&](CheckResult& r) {
    constexpr double kStep = 1e-5;
    std::map<std::string, double> worst;
    auto record = [&](const std::string& name, const VectorXd& analytic, const VectorXd& numeric) {
      worst[name] = std::max(worst[name], relative_error(analytic, numeric));
    };

    const LtiSystem plant = study_system();
    BankOptions bank_options;
    bank_options.count = 10;
    bank_options.seed = opts.seed;
    const ControllerBank bank = generate_bank(plant, bank_options);

    for (int k = 0; k < 20; ++k) {
      CounterRng rng(opts.seed, "acceptance-gradients", static_cast<std::uint64_t>(k));
      const MatrixXd d = rng.uniform_matrix(3, 3, -1.0, 1.0);
      MatrixXd q = d.transpose() * d + 0.1 * MatrixXd::Identity(3, 3);
      q = (0.5 * (q + q.transpose())).eval();
      auto quad = std::make_shared<QuadraticCost>(q, rng.uniform_vector(3, -5.0, 5.0));
      auto translated = std::make_shared<TranslatedCost>(quad, rng.uniform_vector(3, -2.0, 2.0));
      CounterRng sigma_rng(opts.seed, "acceptance-gradients-sigma", static_cast<std::uint64_t>(k));
      auto perturbation = std::make_shared<PerturbationTerm>(
          PerturbationTerm::sample(3, 0.5, k % 2 == 0 ? SignMode::kLiteral : SignMode::kRandomSign, sigma_rng));
      const SumCost sum({quad, translated, perturbation});
      const VectorXd x = rng.uniform_vector(3, -5.0, 5.0);

      const std::pair<const char*, const StageCost*> costs[] = {
          {"quadratic", quad.get()}, {"translated", translated.get()}, {"perturbation", perturbation.get()},
          {"sum", &sum}};
      for (const auto& [name, cost] : costs) {
        record(name, cost->gradient(x), central_difference([&](const VectorXd& y) { return cost->eval(y); }, x, kStep));
      }

      // Slice objectives in offset coordinates.
      const auto& cert = bank.certificates[static_cast<std::size_t>(k) % bank.size()];
      const SliceMap slice = ball_parametrization(plant, cert);
      const VectorXd v = rng.uniform_vector(2, -7.0, 7.0);
      const auto numeric = central_difference([&](const VectorXd& w) { return pulled_value(sum, slice, w); }, v, kStep);
      record("slice (general)", pulled_gradient(sum, slice, v), numeric);
      record("slice (quadratic)", pull_back(*sum.quadratic_form(), slice).gradient(v), numeric);

      // DAC surrogate loss as a function of the flattened coefficients.
      DacParams dp;
      dp.memory = 1 + k % 4;
      dp.truncation = dp.memory + 2 + k % 5;
      dp.learning_rate = 0.1;
      dp.anchor_gain = cert;
      DacState state = DacState::zero(plant, dp);
      for (int i = 0; i < dp.memory + dp.truncation; ++i) state.push_disturbance(rng.uniform_vector(3, -0.5, 0.5), dp);
      std::vector<MatrixXd> coefficients;
      for (int i = 0; i < dp.memory; ++i) coefficients.push_back(rng.uniform_matrix(2, 3, -1.0, 1.0));
      const auto rows = coefficients.front().rows();
      const auto cols = coefficients.front().cols();
      auto unflatten = [&](const VectorXd& flat) {
        std::vector<MatrixXd> out;
        for (int i = 0; i < dp.memory; ++i) {
          out.push_back(Eigen::Map<const MatrixXd>(flat.data() + i * rows * cols, rows, cols));
        }
        return out;
      };
      VectorXd flat(dp.memory * rows * cols);
      VectorXd analytic(flat.size());
      const auto grads = surrogate_gradient(coefficients, state, dp, plant, *quad);
      for (int i = 0; i < dp.memory; ++i) {
        flat.segment(i * rows * cols, rows * cols) = Eigen::Map<const VectorXd>(coefficients[i].data(), rows * cols);
        analytic.segment(i * rows * cols, rows * cols) = Eigen::Map<const VectorXd>(grads[i].data(), rows * cols);
      }
      record("dac surrogate", analytic, central_difference([&](const VectorXd& f) {
               return quad->eval(surrogate_state(unflatten(f), state, dp, plant));
             }, flat, kStep));
    }
    double overall = 0.0;
    std::string parts;
    for (const auto& [name, err] : worst) {
      overall = std::max(overall, err);
      parts += printf_string("%s%s %.1e", parts.empty() ? "" : ", ", name.c_str(), err);
    }
    r.passed = overall <= 1e-6;
    r.detail = printf_string("20 points each, max relative error %.2g (1e-6): %s", overall, parts.c_str());
  });
}

CheckResult determinism(const Options& opts) {
  return timed(10, "determinism", [&](CheckResult& r) {
    ExperimentConfig cfg;
    cfg.seed = opts.seed;
    cfg.horizon = 200;
    cfg.repetitions = 3;
    const fs::path root = opts.scratch_dir / "determinism";
    fs::remove_all(root);
    const fs::path dirs[] = {root / "a", root / "b"};
    for (const auto& dir : dirs) emit(run_comparison(cfg), dir);

    int compared = 0;
    int differing = 0;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dirs[0] / "traces")) files.push_back(entry.path().filename());
    std::sort(files.begin(), files.end());
    for (const auto& name : files) {
      ++compared;
      if (read_file(dirs[0] / "traces" / name) != read_file(dirs[1] / "traces" / name)) ++differing;
    }
    std::size_t second_count = 0;
    for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dirs[1] / "traces")) ++second_count;
    const bool curves_equal = read_file(dirs[0] / "cumulative_cost.csv") == read_file(dirs[1] / "cumulative_cost.csv");
    r.passed = compared == 6 && differing == 0 && second_count == files.size() && curves_equal;
    r.detail = printf_string("%d trace CSVs compared, %d differ; aggregate curve CSV %s", compared, differing,
                             curves_equal ? "identical" : "differs");
  });
}

std::vector<CheckResult> run_all(const Options& opts) {
  auto wanted = [&](int id) {
    return opts.only.empty() || std::find(opts.only.begin(), opts.only.end(), id) != opts.only.end();
  };
  TargetLog log;
  std::vector<CheckResult> results;
  if (wanted(3)) results.push_back(strong_stability_envelope(opts));
  if (wanted(4)) results.push_back(batch_size_contraction(opts, log));
  if (wanted(6)) results.push_back(oracle_accuracy(opts));
  if (wanted(9)) results.push_back(gradient_checks(opts));
  if (wanted(7)) results.push_back(superposition(opts, log));
  if (wanted(8)) results.push_back(unrolled_state(opts, log));
  if (wanted(10)) results.push_back(determinism(opts));
  if (wanted(1)) results.push_back(comparative_performance(opts, log));
  if (wanted(2)) results.push_back(sublinear_regret(opts, log));
  if (wanted(5)) results.push_back(bounded_steady_states(opts, log));
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return results;
}

std::string format(const CheckResult& r) {
  return printf_string("[%s] %d %s: %s (%.1f s)", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                       r.detail.c_str(), r.seconds);
}

}  // namespace onc::acceptance
