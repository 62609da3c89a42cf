"""Basin membership, Boettcher coordinates, internal rays, equipotentials.

The chart at a superattracting root xi with local degree k realizes the
conjugacy N(phi(w)) = phi(w^k) numerically: a second-order local inverse
series covers |w| <= r_deep and everything further out is produced by
inverse-branch continuation (iterated k-th-root pullback of small
circles).  All curves are exact-evaluable: every stored point solves its
defining corrector equation to solver precision and new points can be
inserted at any parameter, so error does not compound down pullback
chains.

Radial parameterization: level lam stands for Boettcher radius
r(lam) = r_deep ** (k ** -lam), so the map sends level lam to lam - 1,
level 0 is the deep circle and lam -> infinity approaches the basin
boundary.  Fixed internal rays (angles j/(k-1)) are self-targeted chains
traced from the series zone out to the repelling fixed point at
infinity, finishing along its linearizing coordinate.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from newton_atlas.newton import NewtonMapDescriptor
from newton_atlas.rational import PreimageSolver
from newton_atlas.sphere import chordal, chordal_to_inf
from newton_atlas.tolerances import Tolerances, DEFAULT_TOLERANCES

R_DEEP = 1e-3
MAX_TURN = 0.12          # radians, max bend per polyline joint
REFINE_DEPTH = 12


class NotSuperattracting(ValueError):
    pass


class ExtraCriticalPoint(ValueError):
    pass


class RayStalled(RuntimeError):
    pass


class LiftFailure(RuntimeError):
    pass


def basin_of(n: NewtonMapDescriptor, z, max_iter: int | None = None,
             tol: Tolerances = DEFAULT_TOLERANCES):
    """Index of the root whose basin contains z, or None.

    Iterates until within root_eps*10 of a root or the cap is reached;
    the exact fixed point at infinity short-circuits to None.
    """
    cap = max_iter if max_iter is not None else tol.max_iter
    thresh = 10.0 * tol.root_eps
    for _ in range(cap):
        if z is None:
            if n.map(None) is None:
                return None
            z = n.map(None)
            continue
        for i, (r, _) in enumerate(n.roots):
            if abs(z - r) < thresh:
                return i
        z = n.map(z)
    return None


def basin_of_arr(n: NewtonMapDescriptor, z: np.ndarray, max_iter: int = 200,
                 tol: Tolerances = DEFAULT_TOLERANCES):
    """Vectorized basin index (-1 = undecided); also returns step counts."""
    z = z.astype(complex).copy()
    idx = np.full(z.shape, -1, dtype=np.int32)
    steps = np.zeros(z.shape, dtype=np.int32)
    roots = np.array([r for r, _ in n.roots])
    thresh = 10.0 * tol.root_eps
    alive = np.ones(z.shape, dtype=bool)
    for it in range(max_iter):
        if not alive.any():
            break
        za = z[alive]
        for i, r in enumerate(roots):
            hit = np.abs(za - r) < thresh
            if hit.any():
                sub = np.where(alive)[0] if z.ndim == 1 else None
                # write back through the alive mask
                tmp_idx = idx[alive]
                tmp_idx[hit] = i
                idx[alive] = tmp_idx
                tmp_steps = steps[alive]
                tmp_steps[hit] = it
                steps[alive] = tmp_steps
        alive = alive & (idx < 0)
        if not alive.any():
            break
        with np.errstate(all="ignore"):
            z[alive] = n.map(z[alive])
        bad = alive & ~np.isfinite(z)
        alive = alive & ~bad
    return idx, steps


# ---------------------------------------------------------------------------
# chart
# ---------------------------------------------------------------------------

@dataclass
class BoettcherChart:
    """Numeric Boettcher coordinate phi: (D, 0) -> (U_xi, xi)."""

    nmap: NewtonMapDescriptor
    root_index: int
    center: complex
    k: int                       # local degree of N at the center
    beta1: complex               # phi(w) = center + beta1 w + beta2 w^2 + O(w^3)
    beta2: complex
    solver: PreimageSolver = field(repr=False)
    tol: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)
    _rays: dict = field(default_factory=dict, repr=False)
    _circles: dict = field(default_factory=dict, repr=False)

    # radius <-> level
    def radius_of_level(self, lam: float) -> float:
        return R_DEEP ** (float(self.k) ** (-float(lam)))

    def level_of_radius(self, r: float) -> float:
        return float(np.log(np.log(r) / np.log(R_DEEP)) / np.log(self.k)) * -1.0

    def series(self, w: complex) -> complex:
        return self.center + self.beta1 * w + self.beta2 * w * w

    def series_inverse(self, z: complex) -> complex:
        u = z - self.center
        return u / self.beta1 - self.beta2 * u * u / self.beta1 ** 3

    def boettcher_modulus(self, z: complex, max_steps: int = 512) -> float:
        """|phi^{-1}(z)| via forward iteration into the series zone.

        Independent of the curve machinery, so it serves as an oracle for
        equipotential levels.
        """
        w = z
        steps = 0
        core = R_DEEP * 1.05
        while True:
            m = abs(self.series_inverse(w)) if abs(w - self.center) < 0.5 else 1.0
            if abs(w - self.center) < 0.5 and m <= core:
                break
            w = self.nmap.map(w)
            steps += 1
            if w is None or steps > max_steps:
                raise ValueError("point does not iterate into the chart core")
        m = abs(self.series_inverse(w))
        return float(m ** (self.k ** float(-steps)))

    # fixed internal rays ---------------------------------------------------

    def fixed_ray_angles(self) -> list[Fraction]:
        return [Fraction(j, self.k - 1) for j in range(self.k - 1)]

    def ray(self, theta: Fraction) -> "RayCurve":
        if theta not in self._rays:
            self._rays[theta] = RayCurve(self, theta)
        return self._rays[theta]

    def circle(self, radius: float) -> "CircleCurve":
        key = round(radius, 14)
        if key not in self._circles:
            self._circles[key] = _build_circle_chain(self, radius)
        return self._circles[key]

    def conjugacy_residual(self, samples: int = 100) -> float:
        """max chordal |N(phi(w)) - phi(w^k)| over quasi-random w, |w|<=0.9."""
        rng = np.random.default_rng(314159)
        radii = [0.3, 0.5, 0.7, 0.9]
        worst = 0.0
        per = max(1, samples // len(radii))
        for r in radii:
            outer = self.circle(r)
            inner = outer.parent if outer.parent is not None else self.circle(r ** self.k)
            for _ in range(per):
                a = Fraction(int(rng.integers(0, 1 << 20)), 1 << 20)
                z1 = outer.eval_at(a)
                z2 = inner.eval_at((a * self.k) % 1)
                worst = max(worst, chordal(self.nmap.map(z1), z2))
        return worst


def boettcher_chart(n: NewtonMapDescriptor, xi: complex,
                    tol: Tolerances = DEFAULT_TOLERANCES) -> BoettcherChart:
    """Chart at a superattracting fixed point of an attracting-critically-
    finite map.

    Raises NotSuperattracting for roots with nonzero multiplier and
    ExtraCriticalPoint when a non-root critical point converges to this
    root (the conjugacy machinery assumes the root is the only critical
    point in its basin component chain, per the restricted input class).
    """
    root_index = None
    for i, (r, _) in enumerate(n.roots):
        if abs(r - xi) < 1e-7 * (1.0 + abs(r)):
            root_index = i
            break
    if root_index is None:
        raise ValueError(f"{xi} is not a root of the source polynomial")
    xi = n.roots[root_index][0]
    mu = n.map.derivative(xi)
    if abs(mu) >= tol.root_eps:
        raise NotSuperattracting(f"multiplier {mu} at {xi}")

    for c, _ in n.free_critical_points():
        if basin_of(n, c, max_iter=2000, tol=tol) is not None:
            raise ExtraCriticalPoint(
                f"critical point {c} lies in a root basin; "
                "input is outside the attracting-critically-finite scope")

    k = n.local_degree(xi)
    # second-order local model: N(xi+u) - xi = (A(u))/B(u)
    a_num = n.map.numerator.taylor_shift(xi) - xi * n.map.denominator.taylor_shift(xi)
    b_den = n.map.denominator.taylor_shift(xi)
    a = list(a_num.coefficients) + [0j] * (k + 2)
    b = list(b_den.coefficients) + [0j] * 2
    scale = max(abs(c) for c in a) + 1e-300
    for j in range(k):
        if abs(a[j]) > 1e-6 * scale:
            raise NotSuperattracting(
                f"local degree mismatch at {xi}: coefficient {j} is {a[j]}")
    ak = a[k] / b[0]
    ak1 = (a[k + 1] - ak * b[1]) / b[0]
    beta1 = cmath.exp(-cmath.log(ak) / (k - 1))
    beta2 = -ak1 * beta1 * beta1 / (k * ak)
    return BoettcherChart(
        nmap=n, root_index=root_index, center=xi, k=k,
        beta1=beta1, beta2=beta2, solver=PreimageSolver(n.map), tol=tol)


# ---------------------------------------------------------------------------
# rays
# ---------------------------------------------------------------------------

class RayCurve:
    """Fixed internal ray at Boettcher angle theta (k*theta = theta mod 1).

    Points are indexed by radial level; the corrector target of the point
    at level lam is the ray's own point at level lam - 1, so the curve is
    exact by construction.  The traced polyline ends when it is chordally
    within tail_eps of infinity.
    """

    def __init__(self, chart: BoettcherChart, theta: Fraction):
        k = chart.k
        if (theta * k) % 1 != theta % 1:
            raise ValueError(f"{theta} is not a fixed angle of degree {k}")
        self.chart = chart
        self.theta = theta % 1
        self.pts: dict[Fraction, complex] = {}
        self.ends_at_infinity = False
        self._grid: list[Fraction] = []
        self._trace()

    # exact evaluation ------------------------------------------------------

    def point_at(self, lam) -> complex:
        """Ray point at radial level lam (Fraction cached, float ad hoc)."""
        if isinstance(lam, Fraction):
            got = self.pts.get(lam)
            if got is not None:
                return got
        val = self._compute(lam)
        if isinstance(lam, Fraction):
            self.pts[lam] = val
        return val

    def _compute(self, lam) -> complex:
        ch = self.chart
        if lam <= 0:
            w = ch.radius_of_level(lam) * cmath.exp(2j * cmath.pi * float(self.theta))
            return ch.series(w)
        target = self.point_at(lam - 1)
        seed = self._seed(lam)
        got = ch.solver.solve(target, seed)
        resid = ch.solver.residual(got, target)
        if resid > ch.tol.lift_eps:
            raise RayStalled(
                f"ray corrector residual {resid} at level {float(lam)}")
        return got

    def _seed(self, lam) -> complex:
        grid = self._grid
        if not grid:
            w = self.chart.radius_of_level(lam) * cmath.exp(
                2j * cmath.pi * float(self.theta))
            return self.chart.series(w)
        import bisect
        i = bisect.bisect_left(grid, lam)
        lo = grid[max(0, i - 1)]
        hi = grid[min(len(grid) - 1, i)]
        zlo, zhi = self.pts[lo], self.pts[hi]
        if lo == hi or hi <= lam <= lo:
            return zlo
        if lam > grid[-1]:
            # extrapolate outward in the 1/z chart (tail is near infinity)
            if len(grid) >= 2 and abs(self.pts[grid[-1]]) > 10.0:
                u1 = 1.0 / self.pts[grid[-2]]
                u2 = 1.0 / self.pts[grid[-1]]
                lam1, lam2 = float(grid[-2]), float(grid[-1])
                t = (float(lam) - lam2) / max(lam2 - lam1, 1e-12)
                u = u2 + (u2 - u1) * t
                return 1.0 / u if u != 0 else 1e300 + 0j
            return self.pts[grid[-1]]
        if lam < grid[0]:
            return self.pts[grid[0]]
        t = (float(lam) - float(lo)) / max(float(hi) - float(lo), 1e-12)
        return zlo + (zhi - zlo) * t

    # tracing ---------------------------------------------------------------

    def _trace(self, substeps: int = 4, max_levels: int = 80):
        ch = self.chart
        tail = ch.tol.tail_eps
        step_cap = Fraction(1, substeps)
        lam = Fraction(0)
        self.pts[lam] = self._compute(lam)
        self._grid = [lam]
        guard = 0
        while True:
            guard += 1
            if guard > max_levels * substeps * 4:
                raise RayStalled("ray trace exceeded its step budget")
            nxt = lam + step_cap
            z = self.point_at(nxt)
            self._grid.append(nxt)
            self._refine_between(lam, nxt)
            lam = nxt
            if chordal_to_inf(self.pts[lam]) < tail:
                self.ends_at_infinity = True
                break
            if float(lam) > max_levels:
                raise RayStalled(
                    f"ray did not reach infinity by level {max_levels}")

    def _refine_between(self, lo: Fraction, hi: Fraction, depth: int = 0):
        ch = self.chart
        zlo, zhi = self.pts[lo], self.pts[hi]
        step = chordal(zlo, zhi)
        need = step > ch.tol.ray_step
        if not need and depth < REFINE_DEPTH:
            need = self._turn_violation(lo, hi)
        if not need or depth >= REFINE_DEPTH:
            return
        mid = (lo + hi) / 2
        self.point_at(mid)
        import bisect
        bisect.insort(self._grid, mid)
        self._refine_between(lo, mid, depth + 1)
        self._refine_between(mid, hi, depth + 1)

    def _turn_violation(self, lo: Fraction, hi: Fraction) -> bool:
        import bisect
        grid = self._grid
        i = bisect.bisect_left(grid, lo)
        prev = grid[i - 1] if i > 0 else None
        if prev is None:
            return False
        a, b, c = self.pts[prev], self.pts[lo], self.pts[hi]
        return _turn_angle(a, b, c) > MAX_TURN

    def polyline(self) -> np.ndarray:
        pts = [self.chart.center]
        for lam in self._grid:
            pts.append(self.pts[lam])
        return np.array(pts, dtype=complex)

    def initial_direction(self) -> complex:
        v = self.chart.beta1 * cmath.exp(2j * cmath.pi * float(self.theta))
        return v / abs(v)

    def forward_invariance_residual(self, samples: int = 50) -> float:
        """max over samples z of distance(N(z), this polyline)."""
        from newton_atlas.curves import point_polyline_distance
        poly = self.polyline()
        idx = np.linspace(1, len(self._grid) - 1, samples).astype(int)
        worst = 0.0
        for i in idx:
            z = self.pts[self._grid[i]]
            img = self.chart.nmap.map(z)
            if img is None:
                continue
            worst = max(worst, point_polyline_distance(img, poly))
        return worst


def _turn_angle(a: complex, b: complex, c: complex) -> float:
    # measure the bend in whichever chart keeps the points moderate
    if max(abs(a), abs(b), abs(c)) > 1e3:
        a, b, c = _inv(a), _inv(b), _inv(c)
    v1, v2 = b - a, c - b
    if v1 == 0 or v2 == 0:
        return 0.0
    return abs(cmath.phase(v2 / v1))


def _inv(z: complex) -> complex:
    return 1.0 / z if z != 0 else 1e300 + 0j


def trace_fixed_rays(chart: BoettcherChart) -> list[RayCurve]:
    """The k-1 fixed internal rays, labelled per the angle convention:
    label 0 has the initial direction of smallest nonnegative argument."""
    rays = [chart.ray(theta) for theta in chart.fixed_ray_angles()]
    args = [cmath.phase(r.initial_direction()) % (2 * np.pi) for r in rays]
    j0 = int(np.argmin(args))
    ordered = rays[j0:] + rays[:j0]
    for label, r in enumerate(ordered):
        r.label = label
    return ordered


# ---------------------------------------------------------------------------
# equipotential circles
# ---------------------------------------------------------------------------

class CircleCurve:
    """Closed curve phi({|w| = radius}), angle-indexed and insertable."""

    def __init__(self, chart: BoettcherChart, radius: float,
                 parent: "CircleCurve | None"):
        self.chart = chart
        self.radius = radius
        self.parent = parent
        self.pts: dict[Fraction, complex] = {}
        self._grid: list[Fraction] = []

    def eval_at(self, alpha: Fraction) -> complex:
        alpha = alpha % 1
        got = self.pts.get(alpha)
        if got is not None:
            return got
        val = self._compute(alpha)
        self.pts[alpha] = val
        if self._grid:
            import bisect
            bisect.insort(self._grid, alpha)
        return val

    def _compute(self, alpha: Fraction) -> complex:
        ch = self.chart
        if self.parent is None:
            w = self.radius * cmath.exp(2j * cmath.pi * float(alpha))
            return ch.series(w)
        target = self.parent.eval_at((alpha * ch.k) % 1)
        seed = self._seed(alpha)
        got = ch.solver.solve(target, seed)
        if ch.solver.residual(got, target) > ch.tol.lift_eps:
            raise LiftFailure(
                f"equipotential corrector stalled at angle {float(alpha)}")
        return got

    def _seed(self, alpha: Fraction) -> complex:
        if not self._grid:
            # anchor seeding is handled by the chain builder
            raise LiftFailure("circle queried before its anchor was set")
        import bisect
        i = bisect.bisect_left(self._grid, alpha)
        lo = self._grid[i - 1] if i > 0 else self._grid[-1]
        hi = self._grid[i % len(self._grid)]
        zlo, zhi = self.pts[lo], self.pts[hi]
        return 0.5 * (zlo + zhi)

    def seed_anchor(self, alpha: Fraction, value: complex):
        self.pts[alpha] = value
        self._grid = [alpha]

    def march(self, initial: int = 64):
        """Walk the full circle once, refining by step and turn."""
        ch = self.chart
        base = [Fraction(j, initial) for j in range(initial)]
        for a in base:
            if a not in self.pts:
                target = self.parent.eval_at((a * ch.k) % 1)
                seed = self._march_seed(a)
                got = ch.solver.solve(target, seed)
                if ch.solver.residual(got, target) > ch.tol.lift_eps:
                    raise LiftFailure("equipotential march stalled")
                self.pts[a] = got
        self._grid = sorted(self.pts.keys())
        # adaptive refinement sweep
        for _ in range(REFINE_DEPTH):
            grid = self._grid
            inserts = []
            for i in range(len(grid)):
                a, b = grid[i], grid[(i + 1) % len(grid)]
                za, zb = self.pts[a], self.pts[b]
                gap = chordal(za, zb)
                prev = grid[i - 1]
                turn = _turn_angle(self.pts[prev], za, zb)
                if gap > self.chart.tol.ray_step or turn > MAX_TURN:
                    span = (b - a) % 1
                    inserts.append((a + span / 2) % 1)
            if not inserts:
                break
            for m in inserts:
                self.eval_at(m)
            self._grid = sorted(self.pts.keys())

    def _march_seed(self, alpha: Fraction) -> complex:
        if not self._grid and not self.pts:
            raise LiftFailure("circle has no anchor")
        keys = sorted(self.pts.keys(), key=lambda a: abs(float(a - alpha)))
        return self.pts[keys[0]]

    def polyline(self) -> np.ndarray:
        grid = sorted(self.pts.keys())
        arr = np.array([self.pts[a] for a in grid], dtype=complex)
        return np.append(arr, arr[0])

    def grid(self) -> list[Fraction]:
        return sorted(self.pts.keys())


def _build_circle_chain(chart: BoettcherChart, radius: float) -> CircleCurve:
    if not (0.0 < radius < 1.0):
        raise ValueError("equipotential level must lie in (0, 1)")
    k = chart.k
    radii = [radius]
    while radii[-1] > R_DEEP:
        radii.append(radii[-1] ** k)
    chain: list[CircleCurve] = []
    parent = None
    for r in reversed(radii):
        c = CircleCurve(chart, r, parent)
        if parent is None:
            for j in range(128):
                c.eval_at(Fraction(j, 128))
            c._grid = sorted(c.pts.keys())
        else:
            anchor = _circle_anchor(chart, chain, r)
            c.seed_anchor(Fraction(0), anchor)
            c.march()
        chain.append(c)
        parent = c
    return chain[-1]


def _circle_anchor(chart: BoettcherChart, chain: list[CircleCurve],
                   radius: float) -> complex:
    """Anchor point at angle 0 on the radius circle.

    Angle 0 is fixed under angle-multiplication by k, so the anchor chain
    is a radial sequence; extrapolation along it seeds the corrector.
    """
    parent = chain[-1]
    target = parent.eval_at(Fraction(0))
    if len(chain) >= 2:
        z2, z1 = chain[-1].pts[Fraction(0)], chain[-2].pts[Fraction(0)]
        r2, r1 = chain[-1].radius, chain[-2].radius
        t = (radius - r2) / max(r2 - r1, 1e-15)
        seed = z2 + (z2 - z1) * t
    else:
        w = radius * cmath.exp(0j)
        seed = chart.series(w)
    got = chart.solver.solve(target, seed)
    if chart.solver.residual(got, target) > chart.tol.lift_eps:
        raise LiftFailure("equipotential anchor stalled")
    return got


def trace_equipotential(chart: BoettcherChart, level: float) -> CircleCurve:
    """Closed equipotential at Boettcher radius `level` in the chart."""
    return chart.circle(level)
