import json
import math

import pytest

import evoter


def test_pair_approximation():
    eq = evoter.pa_equilibrium(0.5, 1.0, 40.0)
    assert eq.J0 == pytest.approx(10.0)
    assert eq.feasible
    assert evoter.pa_nu_c(0.5) == pytest.approx(0.5)


def test_run_is_reproducible():
    p = evoter.ModelParams()
    p.n, p.L, p.nu, p.max_updates = 200, 10.0, 1.5, 20000
    a = evoter.run(p, 7)
    b = evoter.run(p, 7)
    assert a.trajectory == b.trajectory
    assert a.updates <= 20000
    assert evoter.classify_run(a, 200, 10.0) in {"rapid", "prolonged", "indeterminate"}


def test_validation_raises():
    p = evoter.ModelParams()
    p.nu = -1.0
    with pytest.raises(ValueError):
        p.validate()
    with pytest.raises(ValueError):
        p.clock = "sundial"


def test_fit_arch_recovers_roots():
    pts = [(x, 2.0 * x * (1 - x) - 0.1) for x in (0.05 + 0.9 * i / 40 for i in range(41))]
    fit = evoter.fit_arch(pts)
    lo, hi = fit.roots
    assert lo == pytest.approx(0.0528, abs=5e-5)
    assert hi == pytest.approx(0.9472, abs=5e-5)


def test_table_prediction():
    s = evoter.derive_from_Ub(0.1666, 2.0)
    assert s.Uab == pytest.approx(0.1041, abs=5e-5)
    assert s.Ubb == pytest.approx(0.0625, abs=5e-5)
    assert s.Uaa == pytest.approx(0.2208, abs=5e-5)


def test_square_drift():
    g = evoter.OpinionGraph(4, [(0, 1), (1, 2), (2, 3), (0, 3)], [1, 0, 1, 0])
    assert g.n10 == 4
    for nu in (0.5, 1.0):
        d = evoter.drift(g, nu, 2.0)
        assert d["exact_match"]
        assert d["identity_sum_ok"]
        assert d["formula"][0] == pytest.approx(-4 - 6 * nu)


def test_ame_fixed_point_and_coupling():
    a = evoter.AmeParams(0.3, 0.4, 0.1, 2.0)
    l1, l2 = evoter.ame_eigenvalues(1, a)
    assert l1 <= l2 < 0
    x, y = evoter.ame_fixed_point(1, a)
    assert y == pytest.approx(0.2)
    d = evoter.backward_distances(a, 5, 50, (0.1, 0.1), (2.0, 2.0))
    assert len(d) == 50
    assert d[-1] < 1e-8
    assert all(math.isfinite(v) for v in d)


def test_cli_entry_point():
    code, out, err = evoter.cli(["table1", "--use-paper-ub", "--nu", "2"])
    assert code == 0
    assert "2,0.1666,0.1025,0.1041,0.0604,0.0625,0.2336,0.2208" in out
    code, out, err = evoter.cli(["pa", "--p", "0.5", "--nu", "1", "--L", "40"])
    assert json.loads(out)["J0"] == pytest.approx(10.0)
    code, _, err = evoter.cli(["simulate", "--nu", "-1"])
    assert code == 2 and err
