"""Newton map formation and fixed-point multiplier structure.

For p with distinct roots xi_i of multiplicities m_i the map z - p/p'
reduces to (z*s' - s*t)/... concretely: with u = prod (z - xi_i) and
ut = sum_i m_i * u/(z - xi_i), the reduced form is (z*ut - u)/ut, which is
coprime by construction.  Finite fixed points are the distinct roots,
attracting with multiplier (m-1)/m; infinity is repelling with multiplier
deg p/(deg p - 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from newton_atlas.poly import ComplexPolynomial, ZeroPolynomial
from newton_atlas.rational import RationalMap
from newton_atlas.sphere import chordal
from newton_atlas.tolerances import Tolerances, DEFAULT_TOLERANCES


class DegreeTooSmall(ValueError):
    pass


class NotFixed(ValueError):
    pass


class NotPeriodic(ValueError):
    pass


@dataclass(frozen=True)
class NewtonMapDescriptor:
    source: ComplexPolynomial
    map: RationalMap
    roots: tuple[tuple[complex, int], ...]          # (position, multiplicity as root of p)
    degree: int                                      # number of distinct roots = deg of map
    critical_points: tuple[tuple[complex, int], ...]  # (position, local multiplicity)
    poles: tuple[tuple[complex, int], ...]

    @property
    def simple_roots(self) -> bool:
        return all(m == 1 for _, m in self.roots)

    def local_degree(self, z: complex, tol: float = 1e-7) -> int:
        """Local degree of the map at z: 1 + critical multiplicity there."""
        for c, m in self.critical_points:
            if abs(z - c) < tol * (1.0 + abs(c)):
                return m + 1
        return 1

    def critical_values(self) -> list[complex]:
        vals = []
        for c, _ in self.critical_points:
            v = self.map(c)
            if v is not None:
                vals.append(v)
        return vals

    def free_critical_points(self) -> list[tuple[complex, int]]:
        """Critical points that are not roots of p."""
        out = []
        for c, m in self.critical_points:
            if not any(abs(c - r) < 1e-8 * (1.0 + abs(r)) for r, _ in self.roots):
                out.append((c, m))
        return out


def newton_map(p: ComplexPolynomial, tol: Tolerances = DEFAULT_TOLERANCES) -> NewtonMapDescriptor:
    """Descriptor for N_p(z) = z - p(z)/p'(z) in reduced rational form."""
    if p.is_zero:
        raise ZeroPolynomial("Newton map of the zero polynomial is undefined")
    if p.degree < 2:
        raise DegreeTooSmall("need at least 3 distinct roots")
    roots = p.distinct_roots(tol.mult_cluster_eps)
    d = len(roots)
    if d < 3:
        raise DegreeTooSmall(f"polynomial has {d} distinct roots; need >= 3")

    if all(m == 1 for _, m in roots):
        # z - p/p' is already reduced
        num = ComplexPolynomial((0j,)).shifted_by_z_times(p.derivative()) - p
        den = p.derivative()
    else:
        # cancel gcd(p, p') exactly via the radical: u = prod(z - xi),
        # ut = sum_i m_i u / (z - xi_i); reduced map is (z ut - u)/ut
        u = ComplexPolynomial.from_roots([z for z, _ in roots])
        ut = ComplexPolynomial((0j,))
        for i, (zi, mi) in enumerate(roots):
            others = [zj for j, (zj, _) in enumerate(roots) if j != i]
            ut = ut + float(mi) * ComplexPolynomial.from_roots(others)
        num = ComplexPolynomial((0j,)).shifted_by_z_times(ut) - u
        den = ut
    fmap = RationalMap(num, den)

    poles = den.distinct_roots(tol.mult_cluster_eps)
    crit = _critical_points(fmap, tol)
    return NewtonMapDescriptor(
        source=p,
        map=fmap,
        roots=tuple(roots),
        degree=d,
        critical_points=tuple(crit),
        poles=tuple(poles),
    )


def _critical_points(f: RationalMap, tol: Tolerances) -> list[tuple[complex, int]]:
    """Finite critical points with multiplicities: zeros of P'Q - PQ'.

    At a pole of order k that numerator vanishes to order exactly k-1,
    which is the critical multiplicity of the pole, so its roots give all
    finite critical points directly.  Infinity is never critical for a
    Newton map (simple repelling fixed point).
    """
    num = f.numerator.derivative() * f.denominator - f.numerator * f.denominator.derivative()
    if num.is_zero or num.degree < 1:
        return []
    return [(z, m) for z, m in num.distinct_roots(tol.mult_cluster_eps)]


def multiplier_at_fixed_point(n: NewtonMapDescriptor, xi,
                              tol: Tolerances = DEFAULT_TOLERANCES) -> complex:
    """N'(xi) at a fixed point; at infinity via the 1/z chart."""
    if xi is None:
        if not n.map.fixes_infinity():
            raise NotFixed("infinity is not fixed")
        return n.map.multiplier_at_infinity()
    img = n.map(xi)
    if img is None or chordal(img, xi) >= tol.fixpoint_eps * 1e3:
        raise NotFixed(f"{xi} is not a fixed point")
    return n.map.derivative(xi)


def multiplier_of_orbit(n: NewtonMapDescriptor, orbit,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> complex:
    """Chain-rule product of N' over an n-cycle."""
    period = len(orbit)
    for i in range(period):
        img = n.map(orbit[i])
        nxt = orbit[(i + 1) % period]
        if chordal(img, nxt) >= tol.fixpoint_eps * 1e3:
            raise NotPeriodic("points do not form a cycle at tolerance")
    mu = 1.0 + 0j
    for z in orbit:
        if z is None:
            mu *= n.map.multiplier_at_infinity()
        else:
            mu *= n.map.derivative(z)
    return mu


def head_check(f: RationalMap, tol: Tolerances = DEFAULT_TOLERANCES,
               m_max: int = 64):
    """Head's-theorem test: is f the Newton map of some polynomial?

    True iff infinity is a repelling fixed point and every finite fixed
    point has multiplier (m-1)/m for some integer m >= 1.  Returns
    (verdict, witnesses); each witness records a fixed point, its
    multiplier and the matched m (or None).
    """
    if f.degree < 3:
        raise DegreeTooSmall("Head's theorem applies to degree >= 3")
    witnesses = []
    ok = True

    if not f.fixes_infinity():
        witnesses.append({"point": None, "multiplier": None, "m": None,
                          "ok": False, "reason": "infinity not fixed"})
        ok = False
    else:
        lam = f.multiplier_at_infinity()
        rep = abs(lam) > 1.0 + tol.root_eps
        witnesses.append({"point": None, "multiplier": lam, "m": None,
                          "ok": rep,
                          "reason": None if rep else "infinity not repelling"})
        ok = ok and rep

    # finite fixed points: roots of P(z) - z Q(z)
    fixnum = f.numerator - ComplexPolynomial((0j,)).shifted_by_z_times(f.denominator)
    if not fixnum.is_zero and fixnum.degree >= 1:
        for z, mult in fixnum.distinct_roots(1e-9):
            if mult > 1:
                # multiple fixed point: multiplier is exactly 1 (parabolic),
                # never of the form (m-1)/m < 1
                witnesses.append({"point": z, "multiplier": 1.0 + 0j, "m": None,
                                  "ok": False, "reason": "parabolic fixed point"})
                ok = False
                continue
            lam = f.derivative(z)
            matched = None
            for m in range(1, m_max + 1):
                if abs(lam - (m - 1) / m) < max(tol.root_eps, 1e-9 * m * m):
                    matched = m
                    break
            witnesses.append({"point": z, "multiplier": lam, "m": matched,
                              "ok": matched is not None,
                              "reason": None if matched else "multiplier not (m-1)/m"})
            ok = ok and matched is not None
    return ok, witnesses


def parse_polynomial(text: str) -> ComplexPolynomial:
    """Parse the `re:im,re:im,...` ascending-powers wire format."""
    coeffs = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise ValueError("empty coefficient entry")
        if ":" in part:
            re_s, im_s = part.split(":", 1)
            coeffs.append(complex(float(re_s), float(im_s)))
        else:
            coeffs.append(complex(float(part), 0.0))
    return ComplexPolynomial(coeffs)


def format_polynomial(p: ComplexPolynomial) -> str:
    return ",".join(f"{c.real:.17g}:{c.imag:.17g}" for c in p.coefficients)
