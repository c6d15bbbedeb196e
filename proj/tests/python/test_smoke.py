import json
import os
from pathlib import Path

import pytest

import campus_epi as ce

DATA = Path(os.environ.get("CAMPUS_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def observed():
    rows = (DATA / "observed_weekly.csv").read_text().split()[1:]
    return [int(r.split(",")[1]) for r in rows]


def test_r0_matches_closed_form():
    assert ce.r0({"alpha": 0.3, "beta": 0.4}) == pytest.approx(4.624, abs=1e-12)
    assert ce.r0_closed_form(1.0, 0.5) == pytest.approx(2.0)


def test_simulate_is_seeded():
    a = ce.simulate({"alpha": 0.4}, seed=3)
    b = ce.simulate({"alpha": 0.4}, seed=3)
    assert a == b
    assert len(a["weekly_cases"]) == 16
    assert sum(a["compartments"]["S"][:1]) == 6490


def test_invalid_params_raise():
    with pytest.raises(ValueError):
        ce.simulate({"alpha": 2.0})
    with pytest.raises(ValueError):
        ce.simulate({"not_a_param": 1})


def test_peaks():
    assert ce.detect_peaks([0, 30, 5, 40, 1]) == [{"height": 30, "week": 2}, {"height": 40, "week": 4}]


def test_fit_ensemble_and_sweep():
    summary, surface = ce.fit(observed(), grid_points=7, n_traj=100, seed=11)
    assert summary["posterior_size"] > 0
    ci = summary["intervals"]
    assert 0.0 <= ci["alpha"]["low"] <= ci["alpha"]["high"] <= 1.0
    ens = ce.ensemble(surface, size=20, seed=2)
    band = ens["band"]
    for lo, b, m, hi in zip(band["fence_low"], band["band_low"], band["median"], band["band_high"]):
        assert lo <= b <= m <= hi
    report = ce.policy_sweep(surface, n=5, seed=3)
    assert len(report["reports"]) == 9
    custom = ce.policy_sweep(surface, strategies=[{"sigma": 0.5, "interval_days": 7}], n=5, seed=3)
    assert custom["reports"][0]["strategy"]["label"] == "50% every 7 days"


def test_functional_band_needs_four_curves():
    with pytest.raises(ValueError):
        ce.functional_band([[1], [2], [3]])


def test_config_defaults():
    text = ce.parse_config("")
    assert "n_cc = 10" in text
    with pytest.raises(ValueError):
        ce.parse_config("[model]\nalpha = 1.5\n")


def test_default_params_roundtrip():
    p = ce.default_params()
    assert p["n_total"] == 6500
    assert json.loads(json.dumps(p)) == p
