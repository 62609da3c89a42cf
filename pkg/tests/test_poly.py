import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from newton_atlas.poly import ComplexPolynomial, ZeroPolynomial, aberth_roots


def test_trim_and_degree():
    p = ComplexPolynomial([1, 2, 0, 0])
    assert p.degree == 1
    assert p.coefficients == (1 + 0j, 2 + 0j)
    assert ComplexPolynomial([0]).is_zero


def test_horner_matches_numpy():
    rng = np.random.default_rng(7)
    c = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    p = ComplexPolynomial(c)
    z = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    ref = np.polyval(c[::-1], z)
    assert np.allclose(p(z), ref, rtol=1e-13, atol=1e-13)
    assert np.isclose(p(z[0]), ref[0])


def test_derivative():
    p = ComplexPolynomial([5, 0, 3, 2])  # 5 + 3z^2 + 2z^3
    dp = p.derivative()
    assert dp.coefficients == (0j, 6 + 0j, 6 + 0j)


def test_from_roots_and_eval():
    p = ComplexPolynomial.from_roots([1, 1j, -2], leading=3.0)
    for r in (1, 1j, -2):
        assert abs(p(r)) < 1e-12
    assert p.degree == 3
    assert p.coefficients[-1] == 3 + 0j


def test_taylor_shift():
    p = ComplexPolynomial([1, -2, 0, 1])  # 1 - 2z + z^3
    q = p.taylor_shift(0.5 + 0.25j)
    rng = np.random.default_rng(3)
    for _ in range(5):
        u = complex(rng.standard_normal(), rng.standard_normal())
        assert abs(q(u) - p(0.5 + 0.25j + u)) < 1e-12 * (1 + abs(u)) ** 3


def test_aberth_simple_roots_vs_numpy():
    rng = np.random.default_rng(11)
    for _ in range(10):
        deg = rng.integers(2, 9)
        c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        mine = np.sort_complex(aberth_roots(c.astype(complex)))
        ref = np.sort_complex(np.roots(c[::-1]))
        assert np.allclose(mine, ref, rtol=1e-8, atol=1e-8)


def test_aberth_cubic_exact():
    # z^3 - 1
    roots = np.sort_complex(aberth_roots(np.array([-1, 0, 0, 1], dtype=complex)))
    expect = np.sort_complex(np.exp(2j * np.pi * np.arange(3) / 3))
    assert np.allclose(roots, expect, atol=1e-12)


def test_zero_polynomial_roots_raises():
    with pytest.raises(ZeroPolynomial):
        aberth_roots(np.array([0j]))


def test_distinct_roots_multiplicities():
    # (z-1)^2 (z-i) (z+i): double root at 1
    p = ComplexPolynomial.from_roots([1, 1, 1j, -1j])
    got = p.distinct_roots()
    mults = sorted(m for _, m in got)
    assert mults == [1, 1, 2]
    for z, m in got:
        if m == 2:
            assert abs(z - 1) < 1e-7


def test_distinct_roots_triple():
    p = ComplexPolynomial.from_roots([2, 2, 2, -1, 0.5j])
    got = {m for _, m in p.distinct_roots()}
    assert got == {1, 3}
    triple = [z for z, m in p.distinct_roots() if m == 3][0]
    # polished on p'' where the root is simple
    assert abs(triple - 2) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False,
                                   allow_infinity=False),
                min_size=2, max_size=6))
def test_roots_reproduce_polynomial(roots):
    # well-separated roots only: merge anything closer than the cluster gap
    sep = []
    for r in roots:
        if all(abs(r - s) > 0.2 for s in sep):
            sep.append(r)
    if len(sep) < 2:
        sep = [0, 1.5]
    p = ComplexPolynomial.from_roots(sep)
    found = list(p.roots())
    for r in sep:
        j = int(np.argmin([abs(r - f) for f in found]))
        assert abs(r - found[j]) < 1e-7
        found.pop(j)
    assert not found
