import math
import os
from pathlib import Path

import numpy as np
import pytest

import kswave

EXPERIMENTS = Path(os.environ.get("KSWAVE_EXPERIMENTS", Path(__file__).resolve().parents[2] / "experiments"))

CASE1 = [(-8, -1), (-7, 10)]
CASE2 = [(-8, -1), (-7, 10), (7, 10), (8, -1)]


def test_theta_root():
    assert kswave.theta_root(1, -1) == pytest.approx((math.sqrt(5) - 1) / 2)
    assert kswave.theta_root(1, -1, backward=True) == pytest.approx((math.sqrt(5) + 1) / 2)
    with pytest.raises(ValueError):
        kswave.theta_root(1, 1)


def test_profiles_and_regime():
    r = kswave.GrowthProfile(CASE1)
    assert r(-7.5) == pytest.approx(11 * -7.5 + 87)
    assert kswave.classify_profile(r) == "case1"
    rep = kswave.check_regime(kswave.SimParams(chi=0.1, mu=1, nu=0.05, b=1, c=1), r)
    assert rep["h1_holds"]
    assert rep["h1_threshold"] == pytest.approx(-3.478, abs=1e-3)


def test_chemical_solve_matches_green_oracle():
    g = kswave.Grid(40, 0.05)
    x = g.nodes()
    u = np.exp(-x**2)
    v, _ = kswave.solve_chemical(u, g, 1.0, 1.0, kswave.BoundaryCase.Case2)
    psi, _ = kswave.greens_psi(u, g, 1.0, 1.0)
    mid = np.abs(x) <= 20
    assert np.max(np.abs(v - psi)[mid]) < 1e-3


def test_eigenvalue_closed_form():
    lam = kswave.principal_eigenvalue(kswave.GrowthProfile.constant(10), 1.0, 7.0, 0.005)
    assert lam == pytest.approx(10 - 0.25 - math.pi**2 / 196, abs=1e-3)
    li = kswave.lambda_infinity(kswave.GrowthProfile(CASE2), 6.5)
    assert li["certified_sign"] == -1


def test_simulate_experiment1():
    g = kswave.Grid(20, 0.1)
    x = g.nodes()
    u0 = np.clip(np.where(np.abs(x) <= 1, 5 * x + 5, np.where(x > 1, 10, 0)), 0, None)
    res = kswave.simulate(kswave.SimParams(chi=0.1, mu=1, nu=0.05, b=1, c=1), kswave.GrowthProfile(CASE1), u0, L=20)
    assert res["outcome"] == "forced_wave_case1"
    assert res["plateau"] == pytest.approx(10, rel=0.02)
    assert res["u"].shape == (401,)


def test_envelope_and_ignition():
    p = kswave.SimParams(chi=0.1, mu=1, nu=0.05, b=1, c=1)
    values, consts = kswave.upper_envelope(p, kswave.GrowthProfile(CASE1), kswave.Grid(20, 0.1))
    assert consts["level"] == pytest.approx(100 / 9)
    assert np.all(np.diff(values) >= 0)
    w = kswave.ignition_wave(p, 10.0, 0.1)
    assert 0 < w["speed"] < w["speed_bound"]


def test_config_and_experiment(tmp_path):
    text = (EXPERIMENTS / "case1_exp1.cfg").read_text()
    assert kswave.parse_config(kswave.parse_config(text)) == kswave.parse_config(text)
    with pytest.raises(ValueError):
        kswave.parse_config(text + "\nbogus = 1\n")
    out = kswave.run_experiment(str(EXPERIMENTS / "case1_exp4.cfg"), str(tmp_path / "e4"))
    assert out["outcome"] == "extinction"
    assert (tmp_path / "e4" / "manifest.txt").exists()
