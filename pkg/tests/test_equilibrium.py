import numpy as np
import pytest

from m3ma import equilibrium as eqm
from m3ma.equilibrium import RegimeClass
from m3ma.game import DerivedParams, Profile
from m3ma.verifier import deviation_gain, grid_oracle


@pytest.mark.parametrize(
    "alpha, gamma, regime",
    [(0, 0, RegimeClass.NEUTRAL), (-0.1, 0, RegimeClass.BOTH_NONPOSITIVE), (0.1, -0.3, RegimeClass.ALPHA_POS_GAMMA_NEG)],
)
def test_classify_regime(alpha, gamma, regime):
    assert eqm.classify_regime(alpha, gamma) is regime


def test_extremum_point():
    assert eqm.extremum_point(0.1, -0.3) == pytest.approx(0.375)
    assert eqm.extremum_point(-0.1, 0.1) == pytest.approx(0.25)
    with pytest.raises(eqm.DegenerateParabola):
        eqm.extremum_point(0.2, 0.2)


def test_double_root_patterns():
    (p,) = eqm.double_root_patterns(3, 0.1, -0.3)
    assert (p.k, p.x_plus, p.x_minus) == (1, pytest.approx(0.5), pytest.approx(0.25))
    assert p.value == pytest.approx(-0.05, abs=1e-12)
    (q,) = eqm.double_root_patterns(4, -0.3, 0.2)
    assert (q.k, q.x_plus, q.x_minus) == (3, pytest.approx(0.3), pytest.approx(0.1))
    assert q.as_vector().sum() == pytest.approx(1.0)
    assert eqm.double_root_patterns(2, 0.1, -0.3) == []
    assert eqm.double_root_patterns(2, -0.2, 0.5) == []


def test_boundary_delta_is_flagged():
    # x_ext = 0.25 and k = 2 = 1/(2 x_ext): delta equals x_ext, so x_minus would be 0
    notes = []
    assert eqm.double_root_patterns(3, 0.1, -0.1, notes) == []
    assert len(notes) == 1 and "k=2" in notes[0]
    s = eqm.enumerate_equilibria(3, 0.1, -0.1)
    assert s.notes
    # the excluded point is (0.5, 0.5, 0), which is already UniformSupport(2)
    assert "UniformSupport(2)" in {f.describe() for f in s.families}


def test_enumerate_examples():
    assert eqm.enumerate_equilibria(3, 0, 0).continuum
    with pytest.raises(eqm.ContinuumNotExpandable):
        eqm.expand_points(eqm.enumerate_equilibria(3, 0, 0))

    pts = eqm.expand_points(eqm.enumerate_equilibria(2, -0.1, 0))
    assert len(pts) == 1 and np.allclose(pts[0], [0.5, 0.5])

    s = eqm.enumerate_equilibria(3, 0.1, -0.3)
    names = sorted(f.describe().split("(")[0] for f in s.families)
    assert names == ["DoubleRoots", "Pure", "UniformSupport"]
    pts = eqm.expand_points(s)
    assert len(pts) == 7
    assert sum(np.allclose(sorted(p), [0.25, 0.25, 0.5]) for p in pts) == 3
    assert not any(np.allclose(sorted(p), [0, 0.5, 0.5]) for p in pts)

    s = eqm.enumerate_equilibria(3, 0.1, 0.2)
    assert len(eqm.expand_points(s)) == 7
    assert {f.describe() for f in s.families} == {"Pure", "UniformSupport(3)", "UniformSupport(2)"}


def test_expand_orbits():
    fam = eqm.EquilibriumFamily("uniform", 1)
    np.testing.assert_array_equal(sorted(map(tuple, eqm.family_points(fam, 3))), [(0, 0, 1), (0, 1, 0), (1, 0, 0)])
    fam = eqm.EquilibriumFamily("uniform", 2)
    assert len(eqm.family_points(fam, 3)) == 3


def test_degenerate_line_family():
    # m = 4, alpha = -0.1, gamma = 0.1: x_ext = 0.25, so 4 x_ext = 1 and k = 2 leaves delta free
    s = eqm.enumerate_equilibria(4, -0.1, 0.1)
    lines = [f for f in s.families if f.kind == "double_roots_line"]
    assert lines
    g = DerivedParams(-0.1, 2, 0.1)
    for p in eqm.expand_points(s, line_samples=7):
        assert max(deviation_gain(Profile.symmetric(p), g)) <= 1e-12


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_matches_case_table(m):
    rng = np.random.default_rng(m)
    for _ in range(60):
        gamma = rng.uniform(-1.5, 1.5)
        alpha = rng.uniform((gamma - 2) / 2, (gamma + 2) / 2)
        got = {tuple(np.round(p, 9)) for p in eqm.expand_points(eqm.enumerate_equilibria(m, alpha, gamma))}
        want = {tuple(np.round(p, 9)) for p in eqm.table_points(m, alpha, gamma)}
        assert got == want, (alpha, gamma)


@pytest.mark.parametrize("alpha, gamma", [(0.1, -0.3), (-0.3, 0.2), (0.05, 0.4), (-0.2, -0.5), (0.3, -0.9)])
def test_grid_finds_nothing_new(alpha, gamma):
    g = DerivedParams(alpha, 2, gamma)
    pts = np.array(eqm.expand_points(eqm.enumerate_equilibria(3, alpha, gamma)))
    for q in grid_oracle(3, g, 60, tol=1e-6):
        assert np.min(np.max(np.abs(pts - q), axis=1)) <= 1 / 60 + 1e-12
