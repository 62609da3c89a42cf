"""Shared numeric tolerances.

Every module takes its thresholds from one `Tolerances` value so that a run
is reproducible from config alone.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class Tolerances:
    """Numeric thresholds shared by all pipeline stages.

    root_eps        accuracy target for roots / fixed points and the
                    superattracting test |multiplier| < root_eps
    fixpoint_eps    residual threshold for cycle equations
    ray_step        maximal chordal step along traced curves
    lift_eps        corrector residual / forward-invariance budget for
                    lifted curves
    membership_eps  conjugacy and containment check budget
    max_iter        iteration cap for basin convergence searches
    """

    root_eps: float = 1e-9
    fixpoint_eps: float = 1e-10
    ray_step: float = 5e-3
    lift_eps: float = 1e-6
    membership_eps: float = 1e-6
    max_iter: int = 10_000
    # roots closer than this (scaled by 1 + |z|) are treated as one
    # multiple root; double precision cannot split tighter clusters for
    # multiplicities up to 3
    mult_cluster_eps: float = 2e-5
    # chordal distance to infinity at which curve tails stop
    tail_eps: float = 1e-6

    def __post_init__(self):
        for name in ("root_eps", "fixpoint_eps", "ray_step", "lift_eps",
                     "membership_eps", "mult_cluster_eps", "tail_eps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.max_iter <= 0:
            raise ValueError("max_iter must be strictly positive")

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()
