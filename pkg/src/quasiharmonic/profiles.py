"""Potential profiles behind the figures: rows of (coord, value)."""

from __future__ import annotations

import math
import warnings

import numpy as np

from .errors import TangentPole
from .geometry import curved_potential

FIGURES = {
    "I": ("v1d", [-2.0, -1.0]),
    "II": ("v1d", [1.0, 2.0]),
    "III": ("v2d-radial", [-1.0, 0.0, 1.0]),
    "IV": ("curved", [-1.0, 0.0, 1.0]),
}
WALL_GAP = 1e-3
FAR = 1e3


def oscillator_profile(lam: float, alpha: float, coords) -> np.ndarray:
    """(1/2) alpha^2 s^2 / (1 + lam s^2); points outside the lambda < 0 disc are dropped."""
    s = np.asarray(coords, dtype=float)
    if lam < 0.0:
        s = s[1.0 + lam * s * s > 0.0]
    return np.column_stack([s, 0.5 * alpha * alpha * s * s / (1.0 + lam * s * s)])


def curved_profile(kappa: float, omega0: float, coords) -> np.ndarray:
    rows = []
    skipped = 0
    for rho in np.asarray(coords, dtype=float):
        try:
            rows.append((rho, curved_potential(kappa, omega0, float(rho))))
        except TangentPole:
            skipped += 1
    if skipped:
        warnings.warn(f"omitted {skipped} rows at or beyond the tangent pole (kappa = {kappa})", stacklevel=2)
    return np.array(rows, dtype=float).reshape(-1, 2)


def default_grid(kind: str, parameter: float, points: int = 1001) -> np.ndarray:
    """Grids used by the figure presets.

    Positive lambda grids reach coord = 1000 to expose the asymptote; negative
    lambda grids stop just inside the disc; the positively curved grid ends
    WALL_GAP short of the pole.
    """
    if kind == "curved":
        if parameter > 0.0:
            return np.linspace(0.0, math.pi / (2.0 * math.sqrt(parameter)) - WALL_GAP, points)
        return np.linspace(0.0, 3.0, points)
    if parameter < 0.0:
        top = (1.0 - 1e-3) / math.sqrt(-parameter)
        half = np.linspace(0.0, top, points)
    elif parameter == 0.0:
        half = np.linspace(0.0, 3.0, points)
    else:
        half = np.unique(np.concatenate([np.linspace(0.0, 10.0, points), np.geomspace(10.0, FAR, points // 4 + 2)]))
    if kind == "v1d":
        return np.concatenate([-half[:0:-1], half])
    return half


def profile(kind: str, parameter: float, strength: float = 1.0, coords=None, points: int = 1001) -> np.ndarray:
    """``parameter`` is lambda for the flat kinds and kappa for ``curved``;
    ``strength`` is alpha or omega0."""
    grid = default_grid(kind, parameter, points) if coords is None else np.asarray(coords, dtype=float)
    if kind == "curved":
        return curved_profile(parameter, strength, grid)
    if kind in ("v1d", "v2d-radial"):
        if kind == "v2d-radial" and np.any(grid < 0.0):
            raise ValueError("radial profiles need r >= 0")
        return oscillator_profile(parameter, strength, grid)
    raise ValueError(f"unknown profile kind {kind!r}")


def figure_profiles(figure: str, points: int = 1001) -> dict[str, np.ndarray]:
    """Named curves of a figure preset (alpha = omega0 = 1)."""
    kind, values = FIGURES[figure]
    tag = "kappa" if kind == "curved" else "lambda"
    return {f"fig{figure}_{tag}{v:g}": profile(kind, v, 1.0, points=points) for v in values}
