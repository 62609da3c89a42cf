"""Complex polynomials with ascending-power coefficients.

Ascending order keeps Horner evaluation and differentiation index-local.
Root finding uses Aberth-Ehrlich simultaneous iteration with a random
perturbation restart; multiple roots are recovered by clustering and then
re-polished on the appropriate derivative, where they are simple again.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np


class ZeroPolynomial(ValueError):
    pass


def _trim(coeffs) -> tuple[complex, ...]:
    c = [complex(x) for x in coeffs]
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class ComplexPolynomial:
    """Polynomial sum(coefficients[k] * z**k)."""

    coefficients: tuple[complex, ...]

    def __init__(self, coefficients):
        object.__setattr__(self, "coefficients", _trim(coefficients))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return self.coefficients == (0j,)

    @classmethod
    def from_roots(cls, roots, leading=1.0 + 0j) -> "ComplexPolynomial":
        c = np.array([complex(leading)])
        for r in roots:
            c = np.convolve(c, np.array([-complex(r), 1.0 + 0j]))
        return cls(c)

    def __call__(self, z):
        """Horner evaluation; works on scalars and numpy arrays."""
        c = self.coefficients
        if isinstance(z, np.ndarray):
            acc = np.full(z.shape, c[-1], dtype=complex)
            for k in range(len(c) - 2, -1, -1):
                acc = acc * z + c[k]
            return acc
        acc = c[-1]
        for k in range(len(c) - 2, -1, -1):
            acc = acc * z + c[k]
        return acc

    def derivative(self) -> "ComplexPolynomial":
        c = self.coefficients
        if len(c) == 1:
            return ComplexPolynomial((0j,))
        return ComplexPolynomial(tuple(k * c[k] for k in range(1, len(c))))

    def __mul__(self, other):
        if isinstance(other, ComplexPolynomial):
            return ComplexPolynomial(np.convolve(self.coefficients, other.coefficients))
        return ComplexPolynomial(tuple(complex(other) * c for c in self.coefficients))

    __rmul__ = __mul__

    def __add__(self, other):
        a, b = list(self.coefficients), list(other.coefficients)
        if len(a) < len(b):
            a, b = b, a
        return ComplexPolynomial(tuple(x + (b[i] if i < len(b) else 0j) for i, x in enumerate(a)))

    def __sub__(self, other):
        return self + (-1.0) * other

    def shifted_by_z_times(self, other: "ComplexPolynomial") -> "ComplexPolynomial":
        """self + z * other (used to form z*q - p style numerators)."""
        b = (0j,) + other.coefficients
        return self + ComplexPolynomial(b)

    def taylor_shift(self, center: complex) -> "ComplexPolynomial":
        """Coefficients of p(center + u) in powers of u (synthetic division)."""
        center = complex(center)
        work = list(self.coefficients)
        out = []
        while work:
            if len(work) == 1:
                out.append(work[0])
                break
            # synthetic division by (z - center): remainder = next coefficient
            b = [0j] * (len(work) - 1)
            b[-1] = work[-1]
            for k in range(len(work) - 2, 0, -1):
                b[k - 1] = work[k] + center * b[k]
            out.append(work[0] + center * b[0])
            work = b
        return ComplexPolynomial(out)

    def reversed_padded(self, degree: int) -> "ComplexPolynomial":
        """u**degree * p(1/u) as a polynomial in u (degree >= self.degree)."""
        c = list(self.coefficients) + [0j] * (degree - self.degree)
        return ComplexPolynomial(tuple(reversed(c)))

    def scale_norm(self) -> float:
        return float(max(abs(c) for c in self.coefficients))

    def roots(self) -> np.ndarray:
        """All roots (with multiplicity) via Aberth-Ehrlich."""
        return aberth_roots(np.array(self.coefficients, dtype=complex))

    def distinct_roots(self, cluster_eps: float = 2e-5) -> list[tuple[complex, int]]:
        """Roots grouped into (position, multiplicity) clusters.

        Cluster centers of multiplicity m are re-polished by Newton on the
        (m-1)-st derivative, where the root is simple.
        """
        if self.degree < 1:
            return []
        raw = self.roots()
        clusters = cluster_points(raw, cluster_eps)
        out = []
        for center, mult in clusters:
            out.append((polish_multiple_root(self, center, mult), mult))
        out.sort(key=lambda t: (round(t[0].real, 12), round(t[0].imag, 12)))
        return out


def cluster_points(points: np.ndarray, eps: float) -> list[tuple[complex, int]]:
    """Greedy agglomerative clustering with threshold eps * (1 + |z|)."""
    pts = sorted(points, key=lambda z: (z.real, z.imag))
    groups: list[list[complex]] = []
    for z in pts:
        placed = False
        for g in groups:
            c = sum(g) / len(g)
            if abs(z - c) <= eps * (1.0 + abs(c)):
                g.append(z)
                placed = True
                break
        if not placed:
            groups.append([z])
    return [(sum(g) / len(g), len(g)) for g in groups]


def polish_multiple_root(p: ComplexPolynomial, z: complex, mult: int) -> complex:
    """Newton-polish a multiplicity-`mult` root on the (mult-1)-st derivative."""
    q = p
    for _ in range(mult - 1):
        q = q.derivative()
    dq = q.derivative()
    for _ in range(40):
        f = q(z)
        df = dq(z)
        if df == 0:
            break
        step = f / df
        z = z - step
        if abs(step) < 1e-15 * (1.0 + abs(z)):
            break
    return z


def _initial_circle(coeffs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = len(coeffs) - 1
    lead = abs(coeffs[-1])
    radius = 1.0 + max(abs(coeffs[k]) for k in range(n)) / lead if n else 1.0
    radius = min(radius, 1e6)
    k = np.arange(n)
    angles = 2.0 * np.pi * (k + 0.35) / n + 0.4
    return 0.5 * radius * np.exp(1j * angles) * (1.0 + 0.01 * rng.standard_normal(n))


def aberth_roots(coeffs: np.ndarray, maxit: int = 400) -> np.ndarray:
    """Aberth-Ehrlich simultaneous root iteration.

    Deterministic: the perturbation RNG is seeded from the coefficients.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    n = len(coeffs) - 1
    if n <= 0:
        if np.all(coeffs == 0):
            raise ZeroPolynomial("zero polynomial has no well-defined roots")
        return np.array([], dtype=complex)
    # strip roots at the origin exactly
    nz = 0
    while nz < n and coeffs[nz] == 0:
        nz += 1
    zeros_at_origin = np.zeros(nz, dtype=complex)
    coeffs = coeffs[nz:]
    n = len(coeffs) - 1
    if n == 0:
        return zeros_at_origin
    if n == 1:
        return np.concatenate([zeros_at_origin, [-coeffs[0] / coeffs[1]]])

    seed = int.from_bytes(hashlib.sha256(coeffs.tobytes()).digest()[:8], "big")
    rng = np.random.default_rng(seed)
    dcoeffs = coeffs[1:] * np.arange(1, n + 1)

    def horner(c, z):
        acc = np.full(z.shape, c[-1], dtype=complex)
        for k in range(len(c) - 2, -1, -1):
            acc = acc * z + c[k]
        return acc

    scale = np.max(np.abs(coeffs))
    best = None
    best_res = np.inf
    z = _initial_circle(coeffs, rng)
    for attempt in range(4):
        for _ in range(maxit):
            pv = horner(coeffs, z)
            dv = horner(dcoeffs, z)
            with np.errstate(all="ignore"):
                ratio = np.where(dv != 0, pv / dv, 0.1 + 0j)
                diff = z[:, None] - z[None, :]
                np.fill_diagonal(diff, np.inf)
                s = np.sum(1.0 / diff, axis=1)
                w = ratio / (1.0 - ratio * s)
            w = np.where(np.isfinite(w), w, 0.0)
            z = z - w
            if np.max(np.abs(w)) < 1e-15 * (1.0 + np.max(np.abs(z))):
                break
        res = np.max(np.abs(horner(coeffs, z))) / scale
        if res < best_res:
            best, best_res = z.copy(), res
        if res < 1e-12:
            break
        # stagnation: restart with a perturbed configuration
        z = best * (1.0 + 0.03 * rng.standard_normal(len(z))) + 0.01 * (
            rng.standard_normal(len(z)) + 1j * rng.standard_normal(len(z))
        )
    roots = np.concatenate([zeros_at_origin, np.sort_complex(best)])
    return roots
