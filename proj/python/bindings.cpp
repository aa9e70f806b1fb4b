#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "onc/acceptance.hpp"
#include "onc/errors.hpp"
#include "onc/harness.hpp"

namespace py = pybind11;
using namespace onc;

namespace {

ExperimentConfig parse_config(const std::string& text) {
  return config_from_json(text.empty() ? nlohmann::json::object() : nlohmann::json::parse(text));
}

py::dict target_dict(const OracleResult& r) {
  py::dict d;
  d["point"] = r.target.point;
  d["offset"] = r.target.policy.offset;
  d["gain"] = r.target.policy.certificate.gain;
  d["bank_index"] = r.bank_index;
  d["value"] = r.value;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Batched follow-the-perturbed-leader control of linear systems";

  auto base = py::register_exception<Error>(m, "Error");
  auto config_error = py::register_exception<ConfigurationError>(m, "ConfigurationError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", config_error.ptr());

  py::class_<LtiSystem>(m, "LtiSystem")
      .def(py::init<MatrixXd, MatrixXd>(), py::arg("a"), py::arg("b"))
      .def_property_readonly("a", &LtiSystem::a)
      .def_property_readonly("b", &LtiSystem::b)
      .def_property_readonly("state_dim", &LtiSystem::state_dim)
      .def_property_readonly("input_dim", &LtiSystem::input_dim)
      .def("closed_loop", &LtiSystem::closed_loop, py::arg("gain"))
      .def("step", [](const LtiSystem& s, const VectorXd& x, const VectorXd& u, const VectorXd& w) {
        return step(s, x, u, w);
      }, py::arg("x"), py::arg("u"), py::arg("w"));

  m.def("study_system", &study_system);

  py::class_<StabilityCertificate>(m, "StabilityCertificate")
      .def_readonly("gain", &StabilityCertificate::gain)
      .def_readonly("gamma", &StabilityCertificate::gamma)
      .def_readonly("kappa", &StabilityCertificate::kappa)
      .def_readonly("transform", &StabilityCertificate::transform)
      .def_readonly("contraction", &StabilityCertificate::contraction);

  py::class_<ControllerBank>(m, "ControllerBank")
      .def_readonly("certificates", &ControllerBank::certificates)
      .def_readonly("bank_gamma", &ControllerBank::bank_gamma)
      .def_readonly("bank_kappa", &ControllerBank::bank_kappa)
      .def("__len__", &ControllerBank::size)
      .def("to_json", [](const ControllerBank& b) { return bank_to_json(b).dump(); });

  m.def("spectral_radius", &spectral_radius, py::arg("m"));
  m.def("certify", &certify, py::arg("system"), py::arg("gain"), py::arg("target_gamma"));
  m.def("certificate_is_valid", &certificate_is_valid, py::arg("certificate"), py::arg("system"),
        py::arg("tol") = 1e-8);
  m.def("power_norm_profile", &power_norm_profile, py::arg("certificate"), py::arg("system"),
        py::arg("horizon"));
  m.def("generate_bank", [](const LtiSystem& system, int count, double target_gamma, double kappa_cap,
                            std::uint64_t seed) {
    return generate_bank(system, BankOptions{count, target_gamma, kappa_cap, seed});
  }, py::arg("system"), py::arg("count") = 100, py::arg("target_gamma") = 0.1, py::arg("kappa_cap") = 50.0,
        py::arg("seed") = 0);
  m.def("bank_from_json", [](const std::string& text, const LtiSystem& system) {
    return bank_from_json(nlohmann::json::parse(text), system);
  }, py::arg("text"), py::arg("system"));

  m.def("steady_state", [](const LtiSystem& system, const StabilityCertificate& cert, const VectorXd& offset) {
    return steady_state_of(system, AffinePolicy{cert, offset}).point;
  }, py::arg("system"), py::arg("certificate"), py::arg("offset"));
  m.def("slice_map", [](const LtiSystem& system, const StabilityCertificate& cert) {
    return ball_parametrization(system, cert).map;
  }, py::arg("system"), py::arg("certificate"));

  m.def("approx_min_quadratic", [](const MatrixXd& weight, const VectorXd& center, const LtiSystem& system,
                                   const ControllerBank& bank, double radius, double epsilon) {
    const QuadraticCost cost(weight, center);
    const InputBall ball(radius);
    return target_dict(approx_min(cost, system, bank, ball, OracleConfig::for_epsilon(epsilon, ball)));
  }, py::arg("weight"), py::arg("center"), py::arg("system"), py::arg("bank"), py::arg("radius") = 10.0,
        py::arg("epsilon") = 1e-6);

  m.def("derive_batch_size", &derive_batch_size, py::arg("gamma"), py::arg("kappa"));
  m.def("derive_eta", &derive_eta, py::arg("lipschitz"), py::arg("state_dim"), py::arg("horizon"),
        py::arg("gamma"), py::arg("kappa"));
  m.def("bounded_state_envelope", [](const LtiSystem& s, double gamma, double kappa, double radius,
                                     const VectorXd& x1) {
    return bounded_state_envelope(s, gamma, kappa, InputBall(radius), x1);
  }, py::arg("system"), py::arg("gamma"), py::arg("kappa"), py::arg("radius"), py::arg("x1"));

  m.def("default_config", [] { return config_to_json(ExperimentConfig{}).dump(); });
  m.def("normalize_config", [](const std::string& text) { return config_to_json(parse_config(text)).dump(); },
        py::arg("config_json"));
  m.def("config_hash", [](const std::string& text) { return config_hash(parse_config(text)); },
        py::arg("config_json"));

  m.def("run_comparison", [](const std::string& text, const std::string& output_dir) {
    const ExperimentConfig cfg = parse_config(text);
    cfg.validate();
    ComparisonResult result;
    {
      py::gil_scoped_release release;
      result = run_comparison(cfg);
    }
    if (!output_dir.empty()) emit(result, output_dir);
    return summary_json(result).dump();
  }, py::arg("config_json") = "", py::arg("output_dir") = "");

  m.def("run_sweep", [](const std::string& text, const std::string& output_dir) {
    const ExperimentConfig cfg = parse_config(text);
    cfg.validate();
    SweepResult result;
    {
      py::gil_scoped_release release;
      result = run_sweep(cfg);
    }
    if (!output_dir.empty()) emit(result, output_dir);
    return summary_json(result).dump();
  }, py::arg("config_json") = "", py::arg("output_dir") = "");

  m.def("trace_csv", [](const std::string& text, int repetition, const std::string& algorithm) {
    ExperimentConfig cfg = parse_config(text);
    cfg.algorithm = algorithm;
    const RepetitionResult r = run_repetition(prepare_experiment(cfg), repetition);
    if (!r.error.empty()) throw NumericalError(r.error);
    return trace_csv(algorithm == "dac" ? r.dac->trace : r.ftpl->trace);
  }, py::arg("config_json"), py::arg("repetition") = 0, py::arg("algorithm") = "batchftpl");

  m.def("verify", [](std::vector<int> only, std::uint64_t seed, const std::string& scratch) {
    acceptance::Options opts;
    opts.only = std::move(only);
    opts.seed = seed;
    if (!scratch.empty()) opts.scratch_dir = scratch;
    std::vector<acceptance::CheckResult> results;
    {
      py::gil_scoped_release release;
      results = acceptance::run_all(opts);
    }
    py::list out;
    for (const auto& r : results) {
      py::dict d;
      d["id"] = r.id;
      d["name"] = r.name;
      d["passed"] = r.passed;
      d["detail"] = r.detail;
      d["seconds"] = r.seconds;
      out.append(d);
    }
    return out;
  }, py::arg("only") = std::vector<int>{}, py::arg("seed") = 1, py::arg("scratch") = "");
}
