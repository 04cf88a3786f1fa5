import math

import pytest

import rirkit


def reference_g():
    return rirkit.TransferFunction([1.5679e-5, -2.5685e-5], [1.0, -2.000985, 1.000994])


def test_analyze_reference_g():
    r = rirkit.analyze(reference_g())
    assert r["status"] == "exact_sufficient"
    assert r["lower_bound"] == pytest.approx(0.2868, rel=0.05)


def test_synth_closes_loop_on_circle():
    g = rirkit.TransferFunction([1.0], [1.0, -2.0])
    s = rirkit.synth(g)
    assert s["single_mode"]
    roots = rirkit.closed_loop_poles(g * s["f"])
    assert max(abs(r) for r in roots) == pytest.approx(1.0, abs=1e-9)


def test_errors_map_to_exceptions():
    with pytest.raises(rirkit.InvalidInput):
        rirkit.TransferFunction([1.0, 0.0, 0.0], [1.0, 2.0])
    with pytest.raises(rirkit.PreconditionError):
        rirkit.analyze(rirkit.TransferFunction([1.0], [1.0, -0.5]))


def test_pcr_bound():
    best, bound = rirkit.pcr_max_search(math.pi / 3, -math.pi / 4, trials=500, seed=3)
    assert best <= bound + 1e-6


def test_maglev_bound():
    g = rirkit.maglev_zoh(1.0, 1.0, 0.1, 0.01)
    assert g(1.0).real == pytest.approx(1.0, rel=1e-9)
    b = rirkit.maglev_upper_bound(1.0, 1.0, 0.1, 0.01)
    assert b["validated"] and b["ratio"] > 1.0


def test_fhn_search():
    r = rirkit.fhn_search_eo()
    assert r["e_o"] == pytest.approx(-0.1192, abs=3e-3)
    assert r["status"] == "exact_sufficient"
