import numpy as np
import pytest

from newton_atlas.poly import ComplexPolynomial
from newton_atlas.rational import RationalMap
from newton_atlas.newton import newton_map
from newton_atlas.orbits import (
    BoundViolated,
    OrbitInventory,
    SeedGrid,
    classify,
    fatou_shishikura_count,
    find_periodic_orbits,
)

CUBE = newton_map(ComplexPolynomial([-1, 0, 0, 1]))
SMALE = newton_map(ComplexPolynomial([2, -2, 0, 1]))


def test_classify_bands():
    assert classify(0j) == "superattracting"
    assert classify(0.5 + 0j) == "attracting"
    assert classify(1.5 + 0j) == "repelling"
    assert classify(1.0 + 0j) == "parabolic"
    assert classify(np.exp(2j * np.pi / 7)) == "parabolic"
    golden = np.exp(2j * np.pi * (np.sqrt(5) - 1) / 2)
    assert classify(golden) == "irrationally-indifferent"


def test_cube_fixed_points():
    inv = find_periodic_orbits(CUBE, 1)
    finite = [o for o in inv.orbits if o.points[0] is not None]
    inf_orbits = [o for o in inv.orbits if o.points[0] is None]
    assert len(finite) == 3
    assert all(o.cls == "superattracting" for o in finite)
    assert len(inf_orbits) == 1
    assert inf_orbits[0].cls == "repelling"
    assert abs(inf_orbits[0].multiplier - 1.5) < 1e-10
    got = sorted((o.points[0] for o in finite), key=lambda z: (z.real, z.imag))
    expect = sorted(np.exp(2j * np.pi * np.arange(3) / 3),
                    key=lambda z: (z.real, z.imag))
    assert np.allclose(got, expect, atol=1e-9)


def test_smale_two_cycle():
    inv = find_periodic_orbits(SMALE, 2)
    two = [o for o in inv.orbits if o.period == 2 and o.cls == "superattracting"]
    assert len(two) == 1
    pts = sorted(two[0].points, key=lambda z: z.real)
    assert abs(pts[0]) < 1e-9 and abs(pts[1] - 1) < 1e-9
    assert abs(two[0].multiplier) < 1e-10


def test_exact_period_minimality():
    inv = find_periodic_orbits(SMALE, 4)
    for o in inv.orbits:
        if o.points[0] is None:
            continue
        for div in range(1, o.period):
            if o.period % div == 0:
                z = SMALE.map.iterate(o.points[0], div)
                assert abs(z - o.points[0]) > 1e-9


def test_determinism():
    a = find_periodic_orbits(SMALE, 3)
    b = find_periodic_orbits(SMALE, 3)
    assert len(a.orbits) == len(b.orbits)
    for oa, ob in zip(a.orbits, b.orbits):
        assert oa.period == ob.period
        assert oa.points == ob.points
        assert oa.multiplier == ob.multiplier


def test_max_period_zero_rejected():
    with pytest.raises(ValueError):
        find_periodic_orbits(CUBE, 0)


def test_fs_count_smale():
    inv = find_periodic_orbits(SMALE, 2)
    rep = fatou_shishikura_count(inv, SMALE.degree)
    assert rep["ok"]
    assert rep["nonrepelling_count"] == 4  # 3 roots + the 2-cycle
    assert rep["critical_orbit_count"] == 4
    assert rep["bound"] == 4


def test_fs_count_cube():
    inv = find_periodic_orbits(CUBE, 1)
    rep = fatou_shishikura_count(inv, CUBE.degree)
    assert rep["nonrepelling_count"] == 3
    assert rep["critical_orbit_count"] == 3


def test_fs_count_empty():
    inv = OrbitInventory(orbits=(), max_period=1, nonrepelling_count=0,
                         critical_orbit_count=0)
    assert fatou_shishikura_count(inv, 3)["ok"]


def test_fs_count_violation_raises():
    inv = OrbitInventory(orbits=(), max_period=1, nonrepelling_count=9,
                         critical_orbit_count=1)
    with pytest.raises(BoundViolated):
        fatou_shishikura_count(inv, 3)


def test_seed_grid_margin_enforced():
    grid = SeedGrid(center=0j, half_width=0.1, n=4)
    with pytest.raises(ValueError):
        find_periodic_orbits(SMALE, 1, seed_grid=grid)


def test_polynomial_dynamics_basilica():
    # z^2 - 1 has the superattracting 2-cycle {0, -1}
    f = RationalMap(ComplexPolynomial([-1, 0, 1]), ComplexPolynomial([1]))
    inv = find_periodic_orbits(f, 2, include_infinity=False)
    two = [o for o in inv.orbits if o.period == 2]
    assert len(two) == 1
    assert two[0].cls == "superattracting"
