"""Rational maps on the Riemann sphere.

A map is stored as a reduced pair of polynomials P/Q.  Evaluation,
derivatives and preimages are chart-aware: near infinity everything is
rewritten through u = 1/z using coefficient reversal, so no computation
ever manipulates astronomically large intermediates except plain
iteration, which switches chart beyond |z| > 1e12.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from newton_atlas.poly import ComplexPolynomial, polish_multiple_root
from newton_atlas.sphere import OVERFLOW, chordal


class NotReduced(ValueError):
    pass


@dataclass(frozen=True)
class RationalMap:
    numerator: ComplexPolynomial
    denominator: ComplexPolynomial
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.denominator.is_zero:
            raise ZeroDivisionError("denominator is identically zero")

    @property
    def degree(self) -> int:
        return max(self.numerator.degree, self.denominator.degree)

    # -- charts -----------------------------------------------------------

    def _reversed_pair(self):
        """(u^D P(1/u), u^D Q(1/u)) with D = degree of the map."""
        if "rev" not in self._cache:
            d = self.degree
            self._cache["rev"] = (
                self.numerator.reversed_padded(d),
                self.denominator.reversed_padded(d),
            )
        return self._cache["rev"]

    def _derivative_pair(self):
        """Numerator/denominator of the derivative: (P'Q - PQ', Q^2)."""
        if "deriv" not in self._cache:
            p, q = self.numerator, self.denominator
            num = p.derivative() * q - p * q.derivative()
            self._cache["deriv"] = (num, q * q)
        return self._cache["deriv"]

    # -- evaluation --------------------------------------------------------

    def __call__(self, z):
        """Value at a sphere point (None = infinity).  Returns None for
        infinity.  Vectorized over finite numpy arrays (poles give inf)."""
        if isinstance(z, np.ndarray):
            with np.errstate(all="ignore"):
                big = np.abs(z) > OVERFLOW
                out = self.numerator(z) / self.denominator(z)
                if np.any(big):
                    pr, qr = self._reversed_pair()
                    u = 1.0 / z[big]
                    out[big] = pr(u) / qr(u)
            return out
        if z is None:
            pr, qr = self._reversed_pair()
            a, b = pr(0j), qr(0j)
            return None if b == 0 else a / b
        if abs(z) > OVERFLOW:
            pr, qr = self._reversed_pair()
            u = 1.0 / z
            a, b = pr(u), qr(u)
        else:
            a, b = self.numerator(z), self.denominator(z)
        if b == 0:
            return None
        return a / b

    def derivative(self, z):
        """dN/dz at a finite point (chart-free value of the derivative)."""
        if z is None:
            raise ValueError("use multiplier_at_infinity for the chart derivative")
        num, den = self._derivative_pair()
        if abs(z) > OVERFLOW:
            d = max(num.degree, den.degree)
            u = 1.0 / z
            return num.reversed_padded(d)(u) / den.reversed_padded(d)(u)
        b = den(z)
        if b == 0:
            return complex(np.inf, 0.0)
        return num(z) / b

    def derivative_arr(self, z: np.ndarray) -> np.ndarray:
        num, den = self._derivative_pair()
        with np.errstate(all="ignore"):
            return num(z) / den(z)

    def fixes_infinity(self) -> bool:
        return self.numerator.degree > self.denominator.degree

    def multiplier_at_infinity(self) -> complex:
        """Derivative at infinity of the conjugated map u -> 1/N(1/u).

        Requires infinity to be fixed; in that chart the multiplier is
        lead(Q)/lead(P) when deg Q = deg P - 1, and 0 for deeper gaps.
        """
        if not self.fixes_infinity():
            raise ValueError("infinity is not a fixed point")
        p, q = self.numerator, self.denominator
        gap = p.degree - q.degree
        if gap > 1:
            return 0j  # superattracting at infinity
        return q.coefficients[-1] / p.coefficients[-1]

    def iterate(self, z, k: int):
        """k-fold composition with overflow-to-infinity handling."""
        for _ in range(k):
            if z is None:
                z = self(None)
                if z is None:
                    continue
            else:
                z = self(z)
            if z is not None and abs(z) > OVERFLOW:
                # pass through the 1/z chart once to decide if this is
                # effectively the point at infinity
                if abs(z) > 1e2 * OVERFLOW:
                    z = None if not np.isfinite(abs(z)) else z
        return z

    # -- preimages ---------------------------------------------------------

    def preimages(self, value, cluster_eps: float = 1e-8) -> list[tuple[complex | None, int]]:
        """All solutions of N(w) = value with multiplicities (degree total).

        `value` may be None (infinity); infinity itself appears among the
        preimages when the degree deficit demands it.
        """
        d = self.degree
        if value is None:
            r = self.denominator
        else:
            r = self.numerator - complex(value) * self.denominator
        finite = []
        if not r.is_zero and r.degree >= 1:
            finite = r.distinct_roots(cluster_eps)
            # polish against the defining equation once more
            finite = [(polish_multiple_root(r, z, m), m) for z, m in finite]
        deficit = d - (r.degree if not r.is_zero else 0)
        out: list[tuple[complex | None, int]] = list(finite)
        if deficit > 0:
            out.append((None, deficit))
        total = sum(m for _, m in out)
        if total != d:
            # clustering merged or split; fall back to raw multiplicity count
            raise NotReduced(
                f"preimage multiplicities sum to {total}, expected {d}"
            )
        return out

    def solve_preimage(self, value, seed: complex, newton_steps: int = 60,
                       tol: float = 1e-13) -> complex:
        """One preimage of `value` near `seed` by damped polynomial Newton.

        Solves P(w) - v Q(w) = 0 for finite targets and Q(w) = 0 for
        infinity, switching to the 1/w chart when the iterate is large.
        """
        if value is None:
            r = self.denominator
        elif abs(value) > 1.0:
            # scale equation by 1/value for conditioning: P/v - Q = 0
            r = (1.0 / complex(value)) * self.numerator - self.denominator
        else:
            r = self.numerator - complex(value) * self.denominator
        dr = r.derivative()
        w = complex(seed)
        if abs(w) > OVERFLOW:
            d = r.degree
            rr = r.reversed_padded(d)
            return _newton_scalar(rr, rr.derivative(), 1.0 / w, newton_steps, tol)
        return _newton_scalar(r, dr, w, newton_steps, tol)


def _newton_scalar(r: ComplexPolynomial, dr: ComplexPolynomial, z: complex,
                   steps: int, tol: float) -> complex:
    scale = r.scale_norm()
    for _ in range(steps):
        f = r(z)
        if abs(f) < tol * scale * (1.0 + abs(z)) ** r.degree:
            break
        df = dr(z)
        if df == 0:
            z = z + 1e-9 * (1.0 + abs(z))
            continue
        z = z - f / df
    return z


class PreimageSolver:
    """Fast scalar Newton solver for N(w) = value, reused across calls.

    Coefficients are cached as tuples so the inner loop is plain Horner
    on python complex scalars.  Targets and iterates switch to reciprocal
    charts when large, so poles and infinity are ordinary targets.
    """

    def __init__(self, f: RationalMap):
        self.f = f
        d = f.degree
        self.p = f.numerator.coefficients
        self.q = f.denominator.coefficients + (0j,) * (d - f.denominator.degree)
        self.dp = f.numerator.derivative().coefficients
        self.dq = f.denominator.derivative().coefficients
        pr, qr = f._reversed_pair()
        self.pr = pr.coefficients
        self.qr = qr.coefficients
        self.dpr = pr.derivative().coefficients
        self.dqr = qr.derivative().coefficients

    @staticmethod
    def _horner(c, z):
        acc = c[-1]
        for k in range(len(c) - 2, -1, -1):
            acc = acc * z + c[k]
        return acc

    def residual(self, w, value) -> float:
        """Chordal residual between N(w) and the target value."""
        img = self.f(w)
        if img is None:
            return chordal(None, value)
        return chordal(img, value)

    def solve(self, value, seed: complex, steps: int = 50, tol: float = 5e-14) -> complex:
        """One preimage of value near seed (value None = infinity)."""
        h = self._horner
        w = complex(seed)
        big_target = value is not None and abs(value) > 1.0
        for _ in range(steps):
            use_rev = abs(w) > 1e6
            if use_rev:
                u = 1.0 / w
                if value is None:
                    fval, dval = h(self.qr, u), h(self.dqr, u)
                elif big_target:
                    iv = 1.0 / value
                    fval = iv * h(self.pr, u) - h(self.qr, u)
                    dval = iv * h(self.dpr, u) - h(self.dqr, u)
                else:
                    fval = h(self.pr, u) - value * h(self.qr, u)
                    dval = h(self.dpr, u) - value * h(self.dqr, u)
                if dval == 0:
                    break
                step = fval / dval
                u2 = u - step
                w = complex(1e300) if u2 == 0 else 1.0 / u2
                if abs(step) < tol * (1.0 + abs(u)):
                    break
            else:
                if value is None:
                    fval, dval = h(self.q, w), h(self.dq, w)
                elif big_target:
                    iv = 1.0 / value
                    fval = iv * h(self.p, w) - h(self.q, w)
                    dval = iv * h(self.dp, w) - h(self.dq, w)
                else:
                    fval = h(self.p, w) - value * h(self.q, w)
                    dval = h(self.dp, w) - value * h(self.dq, w)
                if dval == 0:
                    w = w + 1e-12 * (1.0 + abs(w))
                    continue
                step = fval / dval
                w = w - step
                if abs(step) < tol * (1.0 + abs(w)):
                    break
        return w


def resultant_lower_bound(f: RationalMap) -> float:
    """Scaled modulus of the numerator/denominator resultant.

    Product of |P(q_i)| over denominator roots, normalized by coefficient
    norms; nonzero iff the pair shares no root, which certifies reduced
    form at tolerance.
    """
    p, q = f.numerator, f.denominator
    if q.degree == 0:
        return 1.0
    qroots = q.roots()
    vals = np.abs(p(qroots))
    scale = p.scale_norm() * (1.0 + np.max(np.abs(qroots))) ** p.degree
    return float(np.min(vals) / scale)
