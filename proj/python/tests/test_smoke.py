import math

import numpy as np
import pytest

import srrw


def test_two_step_law():
    pmf = srrw.exact_pmf("rademacher", 0.5, 2)
    assert pmf[(0.0,)] == pytest.approx(0.25)
    assert pmf[(2.0,)] == pytest.approx(0.375)
    assert pmf[(-2.0,)] == pytest.approx(0.375)


def test_forest_matches_direct_law():
    for n in range(1, 6):
        a = srrw.exact_pmf("rademacher", 0.3, n)
        b = srrw.forest_pmf("rademacher", 0.3, n)
        assert a.keys() == b.keys()
        for k in a:
            assert a[k] == pytest.approx(b[k], abs=1e-12)


def test_simulate_is_deterministic():
    a = srrw.simulate(0.6, "gaussian", n=5000, seed=7, d=2, checkpoints=[100, 1000, 5000])
    b = srrw.simulate(0.6, "gaussian", n=5000, seed=7, d=2, checkpoints=[100, 1000, 5000])
    assert list(a["times"]) == [100, 1000, 5000]
    assert a["positions"].shape == (3, 2)
    np.testing.assert_array_equal(a["positions"], b["positions"])
    np.testing.assert_allclose(a["norms"], np.linalg.norm(a["positions"], axis=1))


def test_full_reinforcement_is_a_line():
    r = srrw.simulate(1.0, "rademacher", n=1000, seed=3, checkpoints=[10, 1000])
    assert abs(r["positions"][0, 0]) == 10
    assert abs(r["positions"][1, 0]) == 1000


def test_second_moment_oracle():
    m = srrw.second_moment_oracle(0.5, 1.0, 3)
    assert m[-1] == pytest.approx(5.5)


def test_beta_limit():
    s = srrw.beta_scaled(100000, 0.5)
    assert s[-1] == pytest.approx(srrw.beta_scaling_limit(0.5), abs=1e-3)
    assert srrw.beta_closed_form(1, 0.5) == pytest.approx(1.0)


def test_forest_clusters_partition():
    sizes = srrw.forest_clusters(2000, 0.7, seed=1)
    assert sum(sizes.values()) == 2000
    assert 1 in sizes


def test_lyapunov():
    assert srrw.taylor_radius() == pytest.approx(5 - 2 * math.sqrt(5), abs=1e-10)
    r = srrw.certify("sqrt-abs", samples=20000, seed=1)
    assert r["pass"] and r["violations"] == 0


def test_canonical_distribution_and_errors():
    assert srrw.canonical_distribution("rademacher") == srrw.canonical_distribution(
        srrw.canonical_distribution("rademacher")
    )
    with pytest.raises(ValueError):
        srrw.simulate(1.5, "rademacher", n=10)
