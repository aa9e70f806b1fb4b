"""Batched follow-the-perturbed-leader control of known linear systems."""

import json

from . import _core
from ._core import (
    ConfigurationError,
    ControllerBank,
    Error,
    LtiSystem,
    NumericalError,
    StabilityCertificate,
    UsageError,
    approx_min_quadratic,
    bank_from_json,
    bounded_state_envelope,
    certificate_is_valid,
    certify,
    derive_batch_size,
    derive_eta,
    generate_bank,
    study_system,
    power_norm_profile,
    slice_map,
    spectral_radius,
    steady_state,
    trace_csv,
    verify,
)

__all__ = [
    "ConfigurationError",
    "ControllerBank",
    "Error",
    "LtiSystem",
    "NumericalError",
    "StabilityCertificate",
    "UsageError",
    "approx_min_quadratic",
    "bank_from_json",
    "bounded_state_envelope",
    "certificate_is_valid",
    "certify",
    "config_hash",
    "default_config",
    "derive_batch_size",
    "derive_eta",
    "generate_bank",
    "study_system",
    "power_norm_profile",
    "run_comparison",
    "run_sweep",
    "slice_map",
    "spectral_radius",
    "steady_state",
    "trace_csv",
    "verify",
]


def _dump(config):
    if config is None:
        return ""
    return config if isinstance(config, str) else json.dumps(config)


def default_config():
    return json.loads(_core.default_config())


def config_hash(config=None):
    return _core.config_hash(_dump(config))


def run_comparison(config=None, output_dir=""):
    """Runs both controllers on paired instances and returns the summary dict."""
    return json.loads(_core.run_comparison(_dump(config), str(output_dir)))


def run_sweep(config=None, output_dir=""):
    """Zero-disturbance regret sweep; returns the sweep summary dict."""
    return json.loads(_core.run_sweep(_dump(config), str(output_dir)))
