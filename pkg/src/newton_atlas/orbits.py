"""Periodic orbit search and multiplier classification.

Orbits of N up to a period bound are located with Newton's method on
F(z) = N^k(z) - z from a deterministic seed set (uniform grid over a
rectangle covering roots and critical points, plus the critical points
themselves and perturbed roots).  Converged points are deduplicated in
the chordal metric, grouped into cycles and reduced to exact minimal
period.  Everything is deterministic: identical seeds and tolerances
produce identical inventories.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from newton_atlas.newton import NewtonMapDescriptor
from newton_atlas.rational import RationalMap
from newton_atlas.sphere import chordal
from newton_atlas.tolerances import Tolerances, DEFAULT_TOLERANCES

CLASS_BAND = 1e-6
ANGLE_EPS = 1e-8
MAX_ROOT_OF_UNITY_ORDER = 64


class BoundViolated(AssertionError):
    pass


def classify(mu: complex, band: float = CLASS_BAND, angle_eps: float = ANGLE_EPS,
             max_order: int = MAX_ROOT_OF_UNITY_ORDER) -> str:
    """Multiplier taxonomy.

    superattracting (|mu| < 1e-9), attracting (|mu| < 1 - band),
    repelling (|mu| > 1 + band), else indifferent: parabolic iff mu is
    within angle_eps of a root of unity of order <= max_order, otherwise
    irrationally-indifferent.
    """
    a = abs(mu)
    if a < 1e-9:
        return "superattracting"
    if a < 1.0 - band:
        return "attracting"
    if a > 1.0 + band:
        return "repelling"
    for q in range(1, max_order + 1):
        for p in range(q):
            if abs(mu - np.exp(2j * np.pi * p / q)) <= angle_eps:
                return "parabolic"
    return "irrationally-indifferent"


@dataclass(frozen=True)
class PeriodicOrbit:
    points: tuple            # sphere points; None = infinity
    period: int
    multiplier: complex
    cls: str
    borderline: bool = False  # |mu| within 10x band of the indifference circle

    def key(self):
        return (self.period, _point_sort_key(self.points[0]))

    def contains(self, z, tol: float = 1e-7) -> bool:
        return any(chordal(z, w) < tol for w in self.points)


def _point_sort_key(z):
    if z is None:
        return (-np.inf, -np.inf)
    return (round(z.real, 10), round(z.imag, 10))


def _canonical_rotation(points: list) -> tuple:
    i0 = min(range(len(points)), key=lambda i: _point_sort_key(points[i]))
    return tuple(points[i0:] + points[:i0])


@dataclass(frozen=True)
class SeedGrid:
    center: complex
    half_width: float
    n: int = 24

    def points(self) -> np.ndarray:
        xs = np.linspace(-self.half_width, self.half_width, self.n)
        gx, gy = np.meshgrid(xs, xs)
        return (self.center + gx + 1j * gy).ravel()


def default_seed_grid(marks: list[complex], n: int = 24, margin: float = 2.5) -> SeedGrid:
    pts = np.array([m for m in marks if m is not None], dtype=complex)
    if len(pts) == 0:
        return SeedGrid(0j, 2.0, n)
    center = complex(np.mean(pts))
    spread = float(np.max(np.abs(pts - center))) if len(pts) > 1 else 1.0
    return SeedGrid(center, max(margin * spread, 1.0), n)


@dataclass(frozen=True)
class OrbitInventory:
    orbits: tuple[PeriodicOrbit, ...]
    max_period: int
    nonrepelling_count: int
    critical_orbit_count: int
    seed_coverage: dict = field(default_factory=dict)

    def nonrepelling(self) -> list[PeriodicOrbit]:
        return [o for o in self.orbits if o.cls != "repelling"]

    def by_class(self) -> dict:
        out: dict[str, int] = {}
        for o in self.orbits:
            out[o.cls] = out.get(o.cls, 0) + 1
        return out


def _newton_on_cycle_equation(f: RationalMap, seeds: np.ndarray, k: int,
                              steps: int = 60) -> np.ndarray:
    """Vectorized damped Newton for N^k(z) = z; non-converged become nan."""
    z = seeds.astype(complex).copy()
    for _ in range(steps):
        w = z.copy()
        dw = np.ones_like(z)
        with np.errstate(all="ignore"):
            for _ in range(k):
                dw = dw * f.derivative_arr(w)
                w = f(w)
            fval = w - z
            dfval = dw - 1.0
            step = np.where(dfval != 0, fval / dfval, np.nan)
        with np.errstate(all="ignore"):
            bad = ~np.isfinite(step)
            step = np.where(bad, 0.0, step)
            # damp huge steps so seeds do not shoot off through poles
            mag = np.abs(step)
            step = np.where(mag > 1.0, step / np.where(mag > 0, mag, 1.0), step)
            z = z - step
        z[bad & ~np.isfinite(z)] = np.nan
    return z


def find_periodic_orbits(n, max_period: int, seed_grid: SeedGrid | None = None,
                         tol: Tolerances = DEFAULT_TOLERANCES,
                         include_infinity: bool = True) -> OrbitInventory:
    """Locate cycles of period <= max_period.

    `n` is a NewtonMapDescriptor or a bare RationalMap (for polynomial
    dynamics p(z)/1).  Critical points are always included as seeds so
    every non-repelling cycle reachable from a critical orbit is found.
    """
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    if isinstance(n, NewtonMapDescriptor):
        f = n.map
        marks = [r for r, _ in n.roots] + [c for c, _ in n.critical_points]
        crit = [c for c, _ in n.critical_points]
    else:
        f = n
        crit = _critical_points_of(f)
        fixpts = (f.numerator - _z_times(f.denominator))
        marks = list(crit)
        if not fixpts.is_zero and fixpts.degree >= 1:
            marks += [z for z, _ in fixpts.distinct_roots()]
    if seed_grid is None:
        seed_grid = default_seed_grid(marks)
    _validate_margin(seed_grid, marks)

    seeds = [seed_grid.points()]
    seeds.append(np.array(crit, dtype=complex))
    root_like = np.array(marks, dtype=complex)
    for off in (1e-3 + 1e-3j, -1e-3 + 1e-3j, 1e-3 - 1e-3j, -1e-3 - 1e-3j):
        seeds.append(root_like + off)
    seeds = np.concatenate([s for s in seeds if len(s)])

    dedup_tol = 10.0 * tol.fixpoint_eps
    found: dict = {}
    converged_seeds = 0
    for k in range(1, max_period + 1):
        z = _newton_on_cycle_equation(f, seeds, k)
        ok = np.isfinite(z)
        with np.errstate(all="ignore"):
            w = z.copy()
            for _ in range(k):
                w = f(w)
            # chordal residual (w is close to z wherever this matters)
            resid = 2.0 * np.abs(w - z) / (1.0 + np.abs(z) ** 2)
        ok &= np.isfinite(resid) & (resid < dedup_tol)
        converged_seeds += int(np.count_nonzero(ok))
        for z0 in z[ok]:
            orbit = _extract_exact_orbit(f, complex(z0), k, dedup_tol)
            if orbit is None:
                continue
            key = _canonical_rotation(orbit)
            rkey = tuple(_point_sort_key(p) for p in key)
            if rkey not in found and not _near_known(found, key, dedup_tol):
                found[rkey] = key

    if include_infinity and f.fixes_infinity():
        key = (None,)
        rkey = tuple(_point_sort_key(p) for p in key)
        found.setdefault(rkey, key)

    orbits = []
    for key in found.values():
        mu = _orbit_multiplier(f, key)
        cls = classify(mu)
        borderline = abs(abs(mu) - 1.0) <= 10 * CLASS_BAND and cls in ("attracting", "repelling")
        orbits.append(PeriodicOrbit(points=key, period=len(key), multiplier=mu,
                                    cls=cls, borderline=borderline))
    orbits.sort(key=PeriodicOrbit.key)

    crit_orbits = count_critical_orbits(f, crit)
    coverage = {
        "seeds": int(len(seeds)) * max_period,
        "converged": converged_seeds,
    }
    inv = OrbitInventory(
        orbits=tuple(orbits),
        max_period=max_period,
        nonrepelling_count=sum(1 for o in orbits if o.cls != "repelling"),
        critical_orbit_count=crit_orbits,
        seed_coverage=coverage,
    )
    return inv


def _z_times(q):
    from newton_atlas.poly import ComplexPolynomial
    return ComplexPolynomial((0j,)).shifted_by_z_times(q)


def _critical_points_of(f: RationalMap) -> list[complex]:
    num = f.numerator.derivative() * f.denominator - f.numerator * f.denominator.derivative()
    if num.is_zero or num.degree < 1:
        return []
    return [z for z, _ in num.distinct_roots()]


def _validate_margin(grid: SeedGrid, marks: list[complex]):
    for m in marks:
        if m is None:
            continue
        if max(abs((m - grid.center).real), abs((m - grid.center).imag)) > grid.half_width / 2.0 + 1e-12:
            raise ValueError("seed grid does not cover marks with margin factor >= 2")


def _cycle_deriv(f: RationalMap, z: complex, k: int) -> complex:
    dw = 1.0 + 0j
    w = z
    for _ in range(k):
        dw *= f.derivative(w)
        w = f(w)
        if w is None:
            return complex(np.nan)
    return dw - 1.0


def _polish_near_parabolic(f: RationalMap, z: complex, k: int) -> complex:
    """Refine a multiple root of N^k(z) - z by Newton on its derivative.

    Plain Newton stalls at ~sqrt(eps) on parabolic points (mu = 1 makes
    them double roots of the cycle equation); the derivative has a simple
    root there.
    """
    d1 = _cycle_deriv(f, z, k)
    if not np.isfinite(abs(d1)) or abs(d1) > 1e-3:
        return z
    for _ in range(40):
        h = 1e-6 * (1.0 + abs(z))
        d1 = _cycle_deriv(f, z, k)
        d2 = (_cycle_deriv(f, z + h, k) - _cycle_deriv(f, z - h, k)) / (2 * h)
        if not np.isfinite(abs(d2)) or d2 == 0:
            break
        step = d1 / d2
        z = z - step
        if abs(step) < 1e-13 * (1.0 + abs(z)):
            break
    return z


def _extract_exact_orbit(f: RationalMap, z0: complex, k: int, tol: float):
    z0 = _polish_near_parabolic(f, z0, k)
    orbit = [z0]
    for _ in range(k - 1):
        nxt = f(orbit[-1])
        if nxt is None or not np.isfinite(abs(nxt)):
            return None
        orbit.append(nxt)
    # minimal period: smallest divisor k' with N^k'(z) = z and pairwise
    # distinct points along the k'-orbit
    for kp in sorted(d for d in range(1, k + 1) if k % d == 0):
        if chordal(f.iterate(z0, kp), z0) < tol:
            sub = orbit[:kp]
            if all(chordal(sub[i], sub[j]) > tol
                   for i in range(kp) for j in range(i + 1, kp)):
                return sub
            return None
    return None


def _near_known(found: dict, key: tuple, tol: float) -> bool:
    for other in found.values():
        if len(other) != len(key):
            continue
        if all(any(chordal(a, b) < 10 * tol for b in other) for a in key):
            return True
    return False


def _orbit_multiplier(f: RationalMap, orbit: tuple) -> complex:
    mu = 1.0 + 0j
    for z in orbit:
        if z is None:
            mu *= f.multiplier_at_infinity()
        else:
            mu *= f.derivative(z)
    return mu


def count_critical_orbits(f: RationalMap, crit: list[complex],
                          horizon: int = 80, tol: float = 1e-7) -> int:
    """Number of distinct critical orbits that avoid infinity.

    Critical points that are poles or prepoles land on the repelling fixed
    point at infinity; those orbits can never be associated with a
    non-repelling cycle and are not counted.
    """
    orbits = []
    for c in crit:
        pts = [c]
        z = c
        hits_infinity = False
        for _ in range(horizon):
            z = f(z)
            if z is None or abs(z) > 2e7:  # chordal distance to infinity < 1e-7
                hits_infinity = True
                break
            pts.append(z)
        if not hits_infinity:
            orbits.append(pts)

    def same_orbit(a, b):
        # equal as sets: each is eventually inside the other from the start
        def contains(big, z):
            return any(chordal(z, w) < tol for w in big)
        return contains(a, b[0]) and contains(b, a[0])

    distinct: list = []
    for o in orbits:
        if not any(same_orbit(o, d) for d in distinct):
            distinct.append(o)
    return len(distinct)


def fatou_shishikura_count(inv: OrbitInventory, degree: int) -> dict:
    """Check nonrepelling <= critical orbits <= 2d - 2 and tabulate."""
    report = {
        "per_class": inv.by_class(),
        "nonrepelling_count": inv.nonrepelling_count,
        "critical_orbit_count": inv.critical_orbit_count,
        "bound": 2 * degree - 2,
        "ok": True,
    }
    if not (inv.nonrepelling_count <= inv.critical_orbit_count <= 2 * degree - 2):
        report["ok"] = False
        raise BoundViolated(
            f"Fatou-Shishikura bound violated: {inv.nonrepelling_count} "
            f"non-repelling vs {inv.critical_orbit_count} critical orbits "
            f"(bound {2 * degree - 2}); this signals a numerics bug"
        )
    return report
