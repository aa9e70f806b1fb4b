import json
import math

import numpy as np
import pytest

import batchftpl as bf


def small_config(**overrides):
    cfg = {"horizon": 30, "repetitions": 2, "bank": {"count": 6}, "ball_radius": 1.0, "eta": 1.0}
    cfg.update(overrides)
    return cfg


def test_study_system_step():
    sys = bf.study_system()
    assert sys.state_dim == 3 and sys.input_dim == 2
    nxt = sys.step(np.ones(3), np.zeros(2), np.zeros(3))
    assert np.allclose(nxt, np.full(3, 1.0 / 3.0), atol=1e-15)
    assert bf.spectral_radius(sys.a) == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_certificate_and_steady_state():
    sys = bf.study_system()
    cert = bf.certify(sys, np.zeros((2, 3)), 0.1)
    assert bf.certificate_is_valid(cert, sys)
    z = bf.steady_state(sys, cert, np.array([1.0, 0.0]))
    assert np.allclose(z, np.array([1.0, 13.0, 169.0]) / 122.0, atol=1e-14)
    profile = bf.power_norm_profile(cert, sys, 10)
    assert all(p <= cert.kappa * (1 - cert.gamma) ** (t + 1) + 1e-12 for t, p in enumerate(profile))


def test_bank_roundtrip_and_oracle():
    sys = bf.study_system()
    bank = bf.generate_bank(sys, count=5, seed=2)
    assert len(bank) == 5
    back = bf.bank_from_json(bank.to_json(), sys)
    assert np.array_equal(back.certificates[3].gain, bank.certificates[3].gain)
    res = bf.approx_min_quadratic(np.eye(3), np.zeros(3), sys, bank, radius=1.0, epsilon=1e-8)
    assert res["value"] <= 1e-8
    assert 0 <= res["bank_index"] < 5


def test_derived_parameters():
    assert bf.derive_batch_size(0.1, 10.0) == 29
    assert bf.derive_eta(1.0, 3, 500, 0.5, 2.0) == pytest.approx(2.2689215826037594e-4, rel=1e-14)
    with pytest.raises(bf.ConfigurationError):
        bf.derive_batch_size(0.0, 2.0)


def test_config_hash_and_errors():
    assert len(bf.config_hash(small_config())) == 16
    assert bf.config_hash(small_config()) == bf.config_hash(json.dumps(small_config()))
    assert bf.config_hash(small_config(output_dir="x")) == bf.config_hash(small_config())
    with pytest.raises(bf.ConfigurationError):
        bf.config_hash({"bogus": 1})
    assert bf.default_config()["horizon"] == 500


def test_comparison_summary(tmp_path):
    summary = bf.run_comparison(small_config(), tmp_path)
    assert summary["runs"] == 2
    for algo in ("batchftpl", "dac"):
        assert len(summary["algorithms"][algo]["mean_cumulative_curve"]) == 30
    assert (tmp_path / "summary.json").exists()
    assert (tmp_path / "traces" / "rep001_dac.csv").exists()
    assert bf.run_comparison(small_config())["config_hash"] == summary["config_hash"]


def test_trace_csv_deterministic():
    a = bf.trace_csv(json.dumps(small_config()), 0, "batchftpl")
    b = bf.trace_csv(json.dumps(small_config()), 0, "batchftpl")
    assert a == b
    lines = a.strip().splitlines()
    assert lines[0].startswith("t,x_1,x_2,x_3,u_1,u_2,stage_cost,cumulative,batch_index")
    assert len(lines) == 31


def test_small_sweep():
    summary = bf.run_sweep(small_config(sweep_horizons=[20, 40]))
    assert [p["horizon"] for p in summary["points"]] == [20, 40]
    assert math.isfinite(summary["log_log_slope"])


def test_verify_subset(tmp_path):
    results = bf.verify([8, 9], scratch=str(tmp_path))
    assert [r["id"] for r in results] == [8, 9]
    assert all(r["passed"] for r in results)
