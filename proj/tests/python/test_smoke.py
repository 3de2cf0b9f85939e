import math

import numpy as np
import pytest

import tandem_ht as th


def test_tail_constant_at_three_halves():
    assert th.tail_constant(1.5) == pytest.approx(1.0 / (2.0 * math.sqrt(math.pi)), rel=1e-14)


def test_service_distribution():
    d = th.ServiceDistribution(1.5, 1.0)
    assert d.mean() == pytest.approx(3.0)
    assert d.tail(4.0) == pytest.approx(0.125)
    with pytest.raises(Exception):
        th.ServiceDistribution(2.5, 1.0)


def test_kappa_golden():
    assert th.solve_kappa(1.0 / 3.0, 1.5, 0.0, 1.0) == pytest.approx(0.87606184166908352, rel=1e-13)
    assert th.solve_kappa(1.0 / 3.0, 1.5, 0.5, 1.0) == pytest.approx(0.62432823964205286, rel=1e-13)


def test_m_is_a_distribution_function():
    ws = [1.0, 2.0, 10.0, 1e3, 1e6]
    ms = [th.solve_m(0.3, 1.5, 1.0, w) for w in ws]
    assert ms[0] == 0.0
    assert all(a <= b for a, b in zip(ms, ms[1:]))
    assert ms[-1] > 0.99


def test_limit_law():
    cdf = th.LimitCdf(1.0 / 3.0, 1.5, 0.0)
    k0 = cdf.kappa(1.0)
    assert cdf.phi(1.0, 0.5) == pytest.approx((1 + 1 / (0.5 / 3)) ** (-k0 / 3), rel=1e-12)
    x = cdf.quantile(1.0, 0.3)
    assert cdf.phi(1.0, x) == pytest.approx(0.3, rel=1e-10)


def test_schedule():
    s = th.schedule(1.5, 1.0, 0.5, 1e4)
    assert s["rho_n"] == pytest.approx(0.995, rel=1e-14)


def test_simulation_recursion():
    out = th.simulate(0.3, 1.5, 1.0, 5000, seed=7)
    assert out["recursion_violations"] == 0
    assert isinstance(out["r"], np.ndarray)
    assert len(out["r"]) == 5000
    assert np.all(out["max_service"] >= 1.0)
    again = th.simulate(0.3, 1.5, 1.0, 5000, seed=7)
    assert np.array_equal(out["r"], again["r"])


def test_run_experiment(tmp_path):
    report, tables = th.run({"kind": "solve-m", "rho": 0.9, "grid_points": 64}, out_dir=str(tmp_path))
    assert report["passed"]
    assert set(tables["solve_m"]) == {"w", "m", "residual"}
    assert np.max(np.abs(tables["solve_m"]["residual"])) <= 1e-10
    assert (tmp_path / "solve_m.csv").exists()


def test_config_errors_are_value_errors():
    with pytest.raises(th.ConfigError) as err:
        th.run({"kind": "theorem1", "n_grid": [100, 0.5]})
    assert "n_grid[1]" in str(err.value)
    assert issubclass(th.ConfigError, ValueError)
    with pytest.raises(th.ConfigError):
        th.run({"kind": "solve-m", "bogus": 1})


def test_overrides_and_kinds():
    assert "theorem2" in th.kinds()
    r1, t1 = th.run({"kind": "solve-kappa", "y_grid": [1.0, 2.0]}, gamma=0.5)
    assert r1["spec"]["gamma"] == 0.5
    assert t1["solve_kappa"]["kappa"][0] == pytest.approx(0.62432823964205286, rel=1e-12)
