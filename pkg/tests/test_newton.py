import numpy as np
import pytest

from newton_atlas.poly import ComplexPolynomial, ZeroPolynomial
from newton_atlas.rational import RationalMap, resultant_lower_bound
from newton_atlas.newton import (
    DegreeTooSmall,
    NotFixed,
    NotPeriodic,
    head_check,
    multiplier_at_fixed_point,
    multiplier_of_orbit,
    newton_map,
    parse_polynomial,
    format_polynomial,
)

CUBE = ComplexPolynomial([-1, 0, 0, 1])          # z^3 - 1
SMALE = ComplexPolynomial([2, -2, 0, 1])         # z^3 - 2z + 2


def test_newton_map_cube_roots():
    n = newton_map(CUBE)
    # map = (2z^3 + 1) / (3z^2), verified by the evaluation identity
    rng = np.random.default_rng(0)
    for _ in range(20):
        z = complex(rng.standard_normal(), rng.standard_normal())
        lhs = n.map(z) * (3 * z ** 2)
        assert abs(lhs - (2 * z ** 3 + 1)) < 1e-10 * (1 + abs(z)) ** 3
    assert n.degree == 3
    assert len(n.poles) == 1 and n.poles[0][1] == 2
    assert abs(n.poles[0][0]) < 1e-12


def test_newton_map_rejects_degenerate():
    with pytest.raises(DegreeTooSmall):
        newton_map(ComplexPolynomial.from_roots([1, 1]))  # (z-1)^2
    with pytest.raises(ZeroPolynomial):
        newton_map(ComplexPolynomial([0]))


def test_fixed_points_are_roots():
    n = newton_map(SMALE)
    for r, _ in n.roots:
        img = n.map(r)
        assert abs(img - r) < 1e-10


def test_critical_points_smale():
    # critical points of N for z^3-2z+2: the three roots and z=0 (p''=6z)
    n = newton_map(SMALE)
    crit = sorted(n.critical_points, key=lambda t: (t[0].real, t[0].imag))
    assert sum(m for _, m in crit) == 2 * n.degree - 2
    assert any(abs(c) < 1e-9 for c, _ in crit)
    for r, _ in n.roots:
        assert any(abs(c - r) < 1e-7 for c, _ in crit)


def test_multiplier_simple_root_is_zero():
    n = newton_map(CUBE)
    assert abs(multiplier_at_fixed_point(n, 1.0 + 0j)) < 1e-10


def test_multiplier_at_infinity():
    n = newton_map(CUBE)
    lam = multiplier_at_fixed_point(n, None)
    assert abs(lam - 1.5) < 1e-12


def test_multiplier_multiple_root():
    # (z-1)^2 (z-i) (z+i): root of multiplicity 2 has multiplier 1/2
    p = ComplexPolynomial.from_roots([1, 1, 1j, -1j])
    n = newton_map(p)
    lam = multiplier_at_fixed_point(n, 1.0 + 0j)
    assert abs(lam - 0.5) < 1e-9
    assert abs(multiplier_at_fixed_point(n, None) - 4 / 3) < 1e-9


def test_multiplier_not_fixed_raises():
    n = newton_map(CUBE)
    with pytest.raises(NotFixed):
        multiplier_at_fixed_point(n, 0.3 + 0.2j)


def test_orbit_multiplier_two_cycle():
    n = newton_map(SMALE)
    mu = multiplier_of_orbit(n, [0j, 1 + 0j])
    assert abs(mu) < 1e-12  # superattracting: N'(0) = 0
    # starting point does not matter
    mu2 = multiplier_of_orbit(n, [1 + 0j, 0j])
    assert abs(mu - mu2) <= 1e-9 * max(1.0, abs(mu))


def test_orbit_multiplier_fixed_consistency():
    n = newton_map(CUBE)
    mu1 = multiplier_of_orbit(n, [1 + 0j])
    assert abs(mu1 - multiplier_at_fixed_point(n, 1 + 0j)) < 1e-12


def test_orbit_multiplier_rejects_noncycle():
    n = newton_map(CUBE)
    with pytest.raises(NotPeriodic):
        multiplier_of_orbit(n, [0.5 + 0j, 2.0 + 0j])


def test_head_check_roundtrip():
    ok, wit = head_check(newton_map(CUBE).map)
    assert ok
    ms = sorted(w["m"] for w in wit if w["point"] is not None)
    assert ms == [1, 1, 1]
    inf_wit = [w for w in wit if w["point"] is None][0]
    assert abs(inf_wit["multiplier"] - 1.5) < 1e-12


def test_head_check_rejects_power_map():
    f = RationalMap(ComplexPolynomial([0, 0, 0, 1]), ComplexPolynomial([1]))
    ok, wit = head_check(f)
    assert not ok  # infinity superattracting, not repelling


def test_head_check_rejects_generic_rational():
    # z^3/(z^2+1) + 1 = (z^3 + z^2 + 1)/(z^2 + 1)
    f = RationalMap(ComplexPolynomial([1, 0, 1, 1]), ComplexPolynomial([1, 0, 1]))
    ok, wit = head_check(f)
    assert not ok
    assert any(w["point"] is not None and not w["ok"] for w in wit)


def test_reduced_form_resultant():
    n = newton_map(SMALE)
    assert resultant_lower_bound(n.map) > 1e-9


def test_polynomial_wire_format():
    p = parse_polynomial("-1:0,0:0,0:0,1:0")
    assert p.coefficients == (-1 + 0j, 0j, 0j, 1 + 0j)
    q = parse_polynomial("2,-2,0,1")
    assert q.coefficients == (2 + 0j, -2 + 0j, 0j, 1 + 0j)
    assert parse_polynomial(format_polynomial(p)).coefficients == p.coefficients


def test_multiplicity_formula_sweep():
    # roots of multiplicities 1..3: finite multipliers are (m-1)/m
    p = ComplexPolynomial.from_roots([0, 0, 0, 2, 2, -3])
    n = newton_map(p)
    assert n.degree == 3
    for r, m in n.roots:
        lam = multiplier_at_fixed_point(n, r)
        assert abs(lam - (m - 1) / m) < 1e-9
    # infinity: deg p / (deg p - 1) = 6/5
    assert abs(multiplier_at_fixed_point(n, None) - 1.2) < 1e-9
