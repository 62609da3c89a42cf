"""Fatou-Shishikura verification: perturbation law and injection assembly.

The polynomial side is exact: given marked non-repelling cycles S, a
Hermite interpolant q with q|_S = 0, q'|_S = 0 on parabolic points and
q'|_S = p'|_S elsewhere makes p_eps = p + eps*q keep every marked point
periodic with unchanged period, while non-parabolic multipliers scale by
(1+eps)^n.  The injection assembly for Newton maps lives at the end of
this module and consumes orbit inventories, graphs and puzzle data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from newton_atlas.poly import ComplexPolynomial
from newton_atlas.rational import RationalMap
from newton_atlas.orbits import (
    BoundViolated,
    OrbitInventory,
    PeriodicOrbit,
    classify,
    find_periodic_orbits,
)
from newton_atlas.tolerances import Tolerances, DEFAULT_TOLERANCES


class InterpolationIllConditioned(ValueError):
    pass


@dataclass(frozen=True)
class PerturbedPolynomial:
    base: ComplexPolynomial
    marked: tuple[complex, ...]
    interpolant: ComplexPolynomial
    eps: float

    @property
    def polynomial(self) -> ComplexPolynomial:
        return self.base + self.eps * self.interpolant


def hermite_interpolant(p: ComplexPolynomial, marked: list[complex],
                        parabolic: list[bool]) -> ComplexPolynomial:
    """Minimal-degree q with q|_S = 0 and q'|_S = 0 (parabolic) / p'|_S.

    q = W * h with W = prod(z - s); then q'(s) = W'(s) h(s), so h is the
    Lagrange interpolant of target'(s)/W'(s).
    """
    if not marked:
        return ComplexPolynomial([0])
    s = np.array(marked, dtype=complex)
    scale = 1.0 + float(np.max(np.abs(s)))
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if abs(s[i] - s[j]) < 1e-6 * scale:
                raise InterpolationIllConditioned(
                    f"marked points {s[i]} and {s[j]} are too close")
    w = ComplexPolynomial.from_roots(s)
    dw = w.derivative()
    dp = p.derivative()
    targets = []
    for si, para in zip(s, parabolic):
        tprime = 0j if para else dp(si)
        denom = dw(si)
        if abs(denom) < 1e-12 * scale ** (len(s) - 1):
            raise InterpolationIllConditioned("confluent marked points")
        targets.append(tprime / denom)
    h = _lagrange(s, np.array(targets, dtype=complex))
    return w * h


def _lagrange(xs: np.ndarray, ys: np.ndarray) -> ComplexPolynomial:
    acc = ComplexPolynomial([0])
    for i in range(len(xs)):
        li = ComplexPolynomial([1])
        denom = 1.0 + 0j
        for j in range(len(xs)):
            if j == i:
                continue
            li = li * ComplexPolynomial([-xs[j], 1])
            denom *= (xs[i] - xs[j])
        acc = acc + (ys[i] / denom) * li
    return acc


def perturb_and_check(p: ComplexPolynomial, inventory: OrbitInventory,
                      eps_list=(1e-3, -1e-3, 1e-4, -1e-4, 1e-5),
                      tol: Tolerances = DEFAULT_TOLERANCES) -> dict:
    """Build p_eps = p + eps*q and verify the multiplier law exactly.

    Marked set S: all points of non-repelling, non-superattracting finite
    cycles of the inventory.  Checks, for every eps: marked points stay
    periodic with the same period (residual < 1e-12 * scale), non-parabolic
    multipliers equal mu*(1+eps)^n to relative 1e-10, parabolic multipliers
    are unchanged, and eps < 0 turns marked indifferent cycles attracting.
    """
    cycles = [o for o in inventory.orbits
              if o.cls not in ("repelling", "superattracting")
              and all(z is not None for z in o.points)]
    marked = []
    parabolic_flags = []
    for o in cycles:
        for z in o.points:
            marked.append(z)
            parabolic_flags.append(o.cls == "parabolic")
    q = hermite_interpolant(p, marked, parabolic_flags)

    scale = p.scale_norm()
    report = {
        "marked_count": len(marked),
        "interpolant_degree": q.degree if marked else 0,
        "paper_phrase_multiplier": "(1+eps)^n",
        "tested_law": "mu*(1+eps)^n",
        "per_eps": [],
        "ok": True,
    }
    for eps in eps_list:
        p_eps = p + float(eps) * q
        entry = {"eps": float(eps), "cycles": [], "ok": True}
        for o in cycles:
            n_ = o.period
            # exact periodicity of the marked points under p_eps
            z = o.points[0]
            w = z
            for _ in range(n_):
                w = p_eps(w)
            resid = abs(w - z)
            mu_eps = np.prod([p_eps.derivative()(pt) for pt in o.points])
            if o.cls == "parabolic":
                expect = o.multiplier
            else:
                expect = o.multiplier * (1.0 + eps) ** n_
            rel = abs(mu_eps - expect) / max(abs(expect), 1e-30)
            new_cls = classify(mu_eps)
            cyc_ok = (resid < 1e-12 * max(scale, 1.0)) and rel < 1e-10
            if eps < 0 and o.cls in ("irrationally-indifferent",):
                cyc_ok = cyc_ok and new_cls == "attracting"
            entry["cycles"].append({
                "period": n_,
                "class_before": o.cls,
                "class_after": new_cls,
                "multiplier_before": _c2l(o.multiplier),
                "multiplier_after": _c2l(mu_eps),
                "periodicity_residual": float(resid),
                "multiplier_rel_error": float(rel),
                "ok": bool(cyc_ok),
            })
            entry["ok"] = entry["ok"] and cyc_ok
        report["per_eps"].append(entry)
        report["ok"] = report["ok"] and entry["ok"]
    return report


def _c2l(z: complex):
    return [float(z.real), float(z.imag)]


def polynomial_fs_count(p: ComplexPolynomial, max_period: int,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> dict:
    """Count non-repelling cycles of the polynomial and check <= d - 1."""
    if p.degree < 2:
        raise ValueError("polynomial degree must be >= 2")
    f = RationalMap(p, ComplexPolynomial([1]))
    inv = find_periodic_orbits(f, max_period, include_infinity=False, tol=tol)
    count = inv.nonrepelling_count
    report = {
        "degree": p.degree,
        "max_period": max_period,
        "nonrepelling_count": count,
        "bound": p.degree - 1,
        "per_class": inv.by_class(),
        "ok": count <= p.degree - 1,
    }
    if not report["ok"]:
        raise BoundViolated(
            f"{count} non-repelling cycles exceeds d-1 = {p.degree - 1}")
    return report
