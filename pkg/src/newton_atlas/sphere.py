"""Riemann-sphere geometry helpers.

Points are plain complex numbers; the point at infinity is represented by
`None` in vertex positions and handled through the chart u = 1/z.  All
distances are chordal: the Euclidean distance between stereographic images
on the unit sphere, so that infinity is an ordinary point (max distance 2).
"""

from __future__ import annotations

import numpy as np

OVERFLOW = 1e12  # plain-iteration overflow threshold: beyond it use 1/z


def chordal(z, w) -> float:
    """Chordal distance between two sphere points (None = infinity)."""
    if z is None and w is None:
        return 0.0
    if z is None:
        return 2.0 / np.sqrt(1.0 + abs(w) ** 2)
    if w is None:
        return 2.0 / np.sqrt(1.0 + abs(z) ** 2)
    return 2.0 * abs(z - w) / np.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


def chordal_to_inf(z) -> float:
    if z is None:
        return 0.0
    return 2.0 / np.sqrt(1.0 + abs(z) ** 2)


def chordal_arr(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Vectorized chordal distance for finite complex arrays."""
    z = np.asarray(z)
    w = np.asarray(w)
    return 2.0 * np.abs(z - w) / np.sqrt((1.0 + np.abs(z) ** 2) * (1.0 + np.abs(w) ** 2))


def embed_r3(z: np.ndarray) -> np.ndarray:
    """Stereographic embedding onto the unit sphere in R^3.

    Chordal distance equals Euclidean distance between embedded points,
    which lets KD-trees answer chordal proximity queries.
    """
    z = np.asarray(z, dtype=complex)
    a2 = np.abs(z) ** 2
    denom = 1.0 + a2
    out = np.empty(z.shape + (3,))
    out[..., 0] = 2.0 * z.real / denom
    out[..., 1] = 2.0 * z.imag / denom
    out[..., 2] = (a2 - 1.0) / denom
    return out


INF_R3 = np.array([0.0, 0.0, 1.0])


def embed_point(z) -> np.ndarray:
    if z is None:
        return INF_R3
    return embed_r3(np.array([z]))[0]


def polyline_chordal_lengths(points: np.ndarray) -> np.ndarray:
    """Chordal length of each segment of a finite polyline."""
    return chordal_arr(points[:-1], points[1:])


def chordal_diameter(points: np.ndarray, include_inf: bool = False) -> float:
    """Chordal diameter of a finite point cloud (optionally with infinity)."""
    pts = embed_r3(points)
    if include_inf:
        pts = np.vstack([pts, INF_R3[None, :]])
    # exact pairwise max; desk-scale clouds are small after decimation
    if len(pts) > 1500:
        idx = np.linspace(0, len(pts) - 1, 1500).astype(int)
        pts = pts[idx]
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    return float(np.sqrt(d2.max()))
