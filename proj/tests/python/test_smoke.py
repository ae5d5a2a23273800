import math

import numpy as np
import pytest

import dbareit

SMALL = {
    "mesh.target_triangles": 1500,
    "scattering.n": 16,
    "scattering.odd_m": 8,
    "dbar.nz": 17,
}


def small_config(**extra):
    items = {**SMALL, **extra}
    return dbareit.Config.from_overrides([f"{k}={v}" for k, v in items.items()])


def test_config_defaults_and_round_trip(tmp_path):
    cfg = dbareit.Config()
    assert cfg.preset == "example1"
    assert cfg.trace_rule == "boundary_jump"
    assert cfg.g0_sign == "fundamental"
    cfg.k_cutoff = 6.0
    cfg.g0_sign = "plus"
    path = tmp_path / "run.ini"
    path.write_text(cfg.to_ini())
    again = dbareit.load_config(path)
    assert again.k_cutoff == pytest.approx(6.0)
    assert again.g0_sign == "plus"
    assert dbareit.load_config(path, {"dbar.nz": 33}).nz == 33


def test_invalid_values_raise():
    with pytest.raises(dbareit.Error):
        dbareit.Config.from_overrides(["scattering.K=abc"])
    with pytest.raises(dbareit.Error):
        dbareit.Config().g0_sign = "minus"


def test_radial_eigenvalue():
    assert dbareit.radial_dn_eigenvalue(0.5, 1.0, 1.0, 3) == pytest.approx(3.0)
    lam = dbareit.radial_dn_eigenvalue(0.5, 2.0, 1.0, 1)
    assert lam.real > 1.0


def test_homogeneous_reconstruction_is_flat():
    cfg = small_config(**{"phantom.preset": "constant", "phantom.constant_value": "1 0"})
    sim = dbareit.simulate(cfg)
    assert sim.dn_gamma.shape == (31, 31)
    assert np.iscomplexobj(sim.dn_gamma)
    rec = dbareit.reconstruct(cfg, sim)
    assert rec.sigma.shape == (17, 17)
    inside = np.isfinite(rec.sigma)
    assert inside.sum() > 100
    assert np.max(np.abs(rec.sigma[inside] - 1.0)) < 1e-6
    assert np.max(np.abs(rec.epsilon[inside])) < 1e-6


def test_pipeline_report_and_determinism(tmp_path):
    reports = []
    for name in ("a", "b"):
        cfg = small_config()
        cfg.output = str(tmp_path / name)
        reports.append(dbareit.run_pipeline(cfg))
    rep = reports[0]
    assert rep["phantom"] == "example1"
    assert math.isfinite(rep["dynamic_range_percent"]["sigma"])
    assert (tmp_path / "a" / "report.json").exists()
    diffs = dbareit.compare_runs(tmp_path / "a", tmp_path / "b")
    assert diffs and all(d["identical_bytes"] for d in diffs)

    cfg = small_config()
    cfg.output = str(tmp_path / "again")
    again = dbareit.run_reconstruct(cfg, tmp_path / "a")
    assert again["dynamic_range_percent"]["sigma"] == pytest.approx(
        rep["dynamic_range_percent"]["sigma"])
