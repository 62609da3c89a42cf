import numpy as np
import pytest

from newton_atlas.poly import ComplexPolynomial
from newton_atlas.rational import RationalMap
from newton_atlas.orbits import find_periodic_orbits
from newton_atlas.fsi import (
    InterpolationIllConditioned,
    hermite_interpolant,
    perturb_and_check,
    polynomial_fs_count,
)

GOLDEN = np.exp(2j * np.pi * (np.sqrt(5) - 1) / 2)


def quadratic_with_multiplier(mu):
    """z^2 + c with a fixed point alpha = mu/2 of multiplier mu."""
    c = mu / 2 - mu * mu / 4
    return ComplexPolynomial([c, 0, 1])


def inventory_of(p, max_period=2):
    return find_periodic_orbits(RationalMap(p, ComplexPolynomial([1])),
                                max_period, include_infinity=False)


def test_hermite_conditions():
    p = quadratic_with_multiplier(GOLDEN)
    s = [GOLDEN / 2, 1.7 - 0.3j]
    q = hermite_interpolant(p, s, [False, True])
    dp, dq = p.derivative(), q.derivative()
    assert abs(q(s[0])) < 1e-12
    assert abs(q(s[1])) < 1e-12
    assert abs(dq(s[0]) - dp(s[0])) < 1e-10
    assert abs(dq(s[1])) < 1e-10
    assert q.degree == 2 * len(s) - 1


def test_hermite_rejects_confluent():
    p = quadratic_with_multiplier(GOLDEN)
    with pytest.raises(InterpolationIllConditioned):
        hermite_interpolant(p, [0.5, 0.5 + 1e-9], [False, False])


def test_perturb_empty_marked_set():
    # z^2: only a superattracting finite cycle, so S is empty and q = 0
    p = ComplexPolynomial([0, 0, 1])
    rep = perturb_and_check(p, inventory_of(p, 1))
    assert rep["marked_count"] == 0
    assert rep["ok"]


def test_perturb_golden_indifferent():
    p = quadratic_with_multiplier(GOLDEN)
    inv = inventory_of(p, 1)
    cls = {o.cls for o in inv.orbits}
    assert "irrationally-indifferent" in cls
    rep = perturb_and_check(p, inv, eps_list=(-1e-4,))
    assert rep["ok"]
    cyc = [c for e in rep["per_eps"] for c in e["cycles"]
           if c["class_before"] == "irrationally-indifferent"][0]
    assert cyc["class_after"] == "attracting"
    mu_after = complex(*cyc["multiplier_after"])
    assert abs(mu_after - GOLDEN * (1 - 1e-4)) < 1e-12


def test_perturb_multiplier_law_five_eps():
    p = quadratic_with_multiplier(GOLDEN)
    inv = inventory_of(p, 1)
    rep = perturb_and_check(p, inv, eps_list=(1e-3, -1e-3, 1e-4, -1e-4, 1e-5))
    assert rep["ok"]
    for entry in rep["per_eps"]:
        for cyc in entry["cycles"]:
            assert cyc["multiplier_rel_error"] < 1e-10
            assert cyc["periodicity_residual"] < 1e-12 * 2


def test_perturb_parabolic_unchanged():
    # c = 1/4: parabolic fixed point 1/2 with multiplier exactly 1
    p = ComplexPolynomial([0.25, 0, 1])
    inv = inventory_of(p, 1)
    assert any(o.cls == "parabolic" for o in inv.orbits)
    rep = perturb_and_check(p, inv, eps_list=(1e-4, -1e-4))
    assert rep["ok"]
    for entry in rep["per_eps"]:
        for cyc in entry["cycles"]:
            if cyc["class_before"] == "parabolic":
                mu_after = complex(*cyc["multiplier_after"])
                assert abs(mu_after - 1.0) < 1e-10


def test_polynomial_count_z2():
    rep = polynomial_fs_count(ComplexPolynomial([0, 0, 1]), 2)
    assert rep["ok"] and rep["nonrepelling_count"] == 1 and rep["bound"] == 1


def test_polynomial_count_basilica():
    rep = polynomial_fs_count(ComplexPolynomial([-1, 0, 1]), 2)
    assert rep["nonrepelling_count"] == 1


def test_polynomial_count_bicritical_cubic():
    # cubic with superattracting fixed points at 0 and 1:
    # p(0)=0, p'(0)=0, p(1)=1, p'(1)=0  ->  p = -2z^3 + 3z^2
    p = ComplexPolynomial([0, 0, 3, -2])
    assert abs(p(0)) < 1e-15 and abs(p(1) - 1) < 1e-15
    dp = p.derivative()
    assert abs(dp(0)) < 1e-15 and abs(dp(1)) < 1e-15
    rep = polynomial_fs_count(p, 3)
    assert rep["nonrepelling_count"] == 2
    assert rep["bound"] == 2
