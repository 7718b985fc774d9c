import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brc.gaussian import (GaussianBrcParams, SweepSpec, cap, cell_bounds, gaussian_extremes,
                          gaussian_region, gaussian_sweep)
from brc.regions import includes, support

UNIT = GaussianBrcParams()
COARSE = SweepSpec.uniform(11)


def test_cap_examples():
    assert cap(0) == 0.0
    assert cap(1) == pytest.approx(0.5)
    assert cap(3) == pytest.approx(1.0)
    assert np.allclose(cap(np.array([0.0, 15.0])), [0.0, 2.0])
    with pytest.raises(ValueError):
        cap(-1)


def test_params_validation():
    with pytest.raises(ValueError):
        GaussianBrcParams(P=0)
    with pytest.raises(ValueError):
        SweepSpec(1, 2, 2)
    assert UNIT.scaled(P=2).P == 2 and UNIT.scaled(P=2).P1 == 1


def test_grid_slices():
    g = np.linspace(0, 1, 7)
    bd = cell_bounds(UNIT, 0.0, g[:, None], g[None, :])
    assert np.all(bd["r0"] == 0)            # no power on the common layer
    bd = cell_bounds(UNIT, g[:, None], 0.0, g[None, :])
    assert np.all(bd["r1_relay"] == 0) and np.all(bd["sum"] == 0)   # relay learns nothing


def test_witness_cell():
    sw = gaussian_sweep(UNIT, SweepSpec.uniform(26))
    c = sw.cell(1, 1, 1)
    assert c["r0"] == pytest.approx(cap(2.0)) == pytest.approx(0.7925, abs=1e-4)
    assert c["sum"] == pytest.approx(0.5, abs=1e-12)
    assert c["r0_reach"] == pytest.approx(0.5, abs=1e-12)


def test_sum_rate_and_extremes():
    region = gaussian_region(UNIT, SweepSpec.uniform(26))
    assert support(region, [1, 1]) == pytest.approx(0.5, abs=1e-6)
    ex = gaussian_extremes(UNIT, SweepSpec.uniform(26))
    assert ex.r1_only == pytest.approx(0.5, abs=1e-6)
    assert ex.r0_only == pytest.approx(0.5, abs=1e-6)
    assert ex.sum_rate == pytest.approx(0.5, abs=1e-6)


def test_sum_rate_never_exceeds_relay_capacity():
    for P, N in ((1, 1), (4, 0.5), (0.3, 2)):
        p = UNIT.scaled(P=P, N1t=N)
        assert support(gaussian_region(p, COARSE), [1, 1]) <= cap(P / N) + 1e-12


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["P", "P1"]), st.floats(0.2, 5.0))
def test_monotone_in_power(name, v):
    p = UNIT.scaled(**{name: v})
    big = p.scaled(**{name: 2 * v})
    assert includes(gaussian_region(big, COARSE), gaussian_region(p, COARSE), tol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["N1", "N2", "N1t"]), st.floats(0.2, 5.0))
def test_antitone_in_noise(name, v):
    p = UNIT.scaled(**{name: v})
    noisy = p.scaled(**{name: 2 * v})
    assert includes(gaussian_region(p, COARSE), gaussian_region(noisy, COARSE), tol=1e-9)


def test_refined_grid_contains_coarse():
    for n in (6, 11):
        spec = SweepSpec.uniform(n)
        fine = spec.refined()
        assert np.all(np.isin(spec.grids()[0], fine.grids()[0]))
        assert includes(gaussian_region(UNIT, fine), gaussian_region(UNIT, spec), tol=1e-12)


def test_equal_noises_make_the_two_direct_bounds_meet():
    # with N1 = N2 the common layer at full power equals the direct link at zero common power
    p = UNIT.scaled(N1=0.7, N2=0.7)
    g = np.linspace(0, 1, 5)
    a1 = cell_bounds(p, 1.0, g, 0.5)["r0"]
    a0 = cell_bounds(p, 0.0, g, 0.5)["r1_direct"]
    assert np.allclose(a1, a0, atol=1e-15)


def test_workers_do_not_change_the_region():
    a = gaussian_region(UNIT, COARSE, workers=1)
    b = gaussian_region(UNIT, COARSE, workers=4)
    assert np.array_equal(a.vertices, b.vertices)
