import numpy as np
import pytest
from fractions import Fraction

from newton_atlas.poly import ComplexPolynomial
from newton_atlas.newton import newton_map
from newton_atlas.basins import (
    ExtraCriticalPoint,
    NotSuperattracting,
    basin_of,
    boettcher_chart,
    trace_equipotential,
    trace_fixed_rays,
)
from newton_atlas.sphere import chordal, chordal_to_inf
from newton_atlas.curves import point_polyline_distance

CUBE = newton_map(ComplexPolynomial([-1, 0, 0, 1]))       # z^3 - 1
SMALE = newton_map(ComplexPolynomial([2, -2, 0, 1]))      # z^3 - 2z + 2
ODD = newton_map(ComplexPolynomial([0, -1, 0, 1]))        # z^3 - z


def test_basin_of_real_start():
    assert basin_of(CUBE, 2.0 + 0j) == [i for i, (r, _) in enumerate(CUBE.roots)
                                        if abs(r - 1) < 1e-9][0]


def test_basin_of_root_is_itself():
    for i, (r, _) in enumerate(CUBE.roots):
        assert basin_of(CUBE, r) == i


def test_basin_of_pole_orbit_returns_none():
    assert basin_of(CUBE, 0j, max_iter=500) is None


def test_chart_cube_local_degree():
    chart = boettcher_chart(CUBE, 1.0 + 0j)
    assert chart.k == 2
    # local model at 1: beta1 = 1, beta2 = 2/3 (hand computation)
    assert abs(chart.beta1 - 1.0) < 1e-10
    assert abs(chart.beta2 - 2.0 / 3.0) < 1e-10


def test_chart_rejects_multiple_root():
    p = ComplexPolynomial.from_roots([1, 1, 1j, -1j])
    n = newton_map(p)
    with pytest.raises(NotSuperattracting):
        boettcher_chart(n, 1.0 + 0j)


def test_chart_conjugacy_residual():
    chart = boettcher_chart(CUBE, 1.0 + 0j)
    assert chart.conjugacy_residual(100) < 1e-8


def test_chart_conjugacy_residual_smale():
    root = [r for r, _ in SMALE.roots if abs(r.imag) < 1e-9][0]
    chart = boettcher_chart(SMALE, root)
    assert chart.k == 2
    assert chart.conjugacy_residual(60) < 1e-8


def test_fixed_rays_cube():
    chart = boettcher_chart(CUBE, 1.0 + 0j)
    rays = trace_fixed_rays(chart)
    assert len(rays) == 1  # k = 2
    ray = rays[0]
    assert ray.ends_at_infinity
    poly = ray.polyline()
    # by symmetry the ray from root 1 runs along the positive real axis
    assert np.max(np.abs(poly.imag)) < 1e-6
    assert poly.real[-1] > 100.0


def test_ray_forward_invariance():
    chart = boettcher_chart(CUBE, 1.0 + 0j)
    ray = trace_fixed_rays(chart)[0]
    resid = ray.forward_invariance_residual(50)
    assert resid < 10 * chart.tol.lift_eps


def test_odd_cubic_has_two_rays_at_zero():
    # z^3 - z: N has local degree 3 at the root 0 (p''(0) = 0)
    chart = boettcher_chart(ODD, 0j)
    assert chart.k == 3
    rays = trace_fixed_rays(chart)
    assert len(rays) == 2
    for ray in rays:
        assert ray.ends_at_infinity
    d0 = rays[0].initial_direction()
    d1 = rays[1].initial_direction()
    # directions are opposite (fixed angles 0 and 1/2 of the tripling map)
    assert abs(d0 + d1) < 1e-9
    # label 0 has the smaller nonnegative argument
    a0 = np.angle(d0) % (2 * np.pi)
    a1 = np.angle(d1) % (2 * np.pi)
    assert a0 <= a1


def test_total_channel_edges_cube():
    total = 0
    for r, _ in CUBE.roots:
        total += len(trace_fixed_rays(boettcher_chart(CUBE, r)))
    assert total == 3


def test_equipotential_closed_and_invariant():
    chart = boettcher_chart(CUBE, 1.0 + 0j)
    eq = trace_equipotential(chart, 0.5)
    poly = eq.polyline()
    assert chordal(poly[0], poly[-1]) < 1e-12
    # winding around the center once
    from newton_atlas.curves import winding_number
    assert winding_number(poly, chart.center) == 1
    # level law: N(E(r)) lands on E(r^k)
    inner = eq.parent
    worst = 0.0
    for a in list(eq.grid())[::7]:
        img = CUBE.map(eq.eval_at(a))
        worst = max(worst, point_polyline_distance(img, inner.polyline()))
    assert worst < chart.tol.membership_eps


def test_equipotential_modulus_oracle():
    chart = boettcher_chart(CUBE, 1.0 + 0j)
    eq = trace_equipotential(chart, 0.5)
    for a in [Fraction(1, 7), Fraction(2, 5), Fraction(9, 11)]:
        z = eq.eval_at(a)
        assert abs(chart.boettcher_modulus(z) - 0.5) < 1e-6


def test_equipotential_level_validation():
    chart = boettcher_chart(CUBE, 1.0 + 0j)
    with pytest.raises(ValueError):
        trace_equipotential(chart, 1.2)
