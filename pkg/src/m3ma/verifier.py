"""Independent Nash checks: best-response gains, support stationarity, grid scans."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .game import Profile, as_params, f_tilde_raw

GRID_TOL = 1e-6
DEFAULT_GRID_CAP = 10**7


class GridTooLarge(RuntimeError):
    pass


def _gains(x, y, z, g):
    """Vectorized deviation gain of the player holding ``x``; arrays shaped (..., m)."""
    f = (g.alpha - g.gamma) * y * z + 0.5 * (g.beta + g.gamma) * y + 0.5 * (g.gamma - g.beta) * z
    # sum_j x_j (max f - f_j) equals max f - x.f but is exactly 0 when f is constant
    return np.sum(x * (f.max(axis=-1, keepdims=True) - f), axis=-1)


def deviation_gain(profile: Profile, game) -> tuple:
    """Best-response improvement available to X, Y and Z.

    The payoff is linear in the own strategy, so the best response is a
    vertex and the gain is max_i f_i - x.f exactly.
    """
    g = as_params(game)
    x, y, z = profile.x, profile.y, profile.z
    return (float(_gains(x, y, z, g)), float(_gains(y, z, x, g)), float(_gains(z, x, y, g)))


def is_epsilon_nash(profile: Profile, game, tol: float = 1e-9) -> bool:
    return max(deviation_gain(profile, game)) <= tol


@dataclass(frozen=True)
class StationarityReport:
    common_value: float
    max_equality_violation: float
    max_inequality_violation: float
    is_nash: bool


def stationarity_check(strategy, game, tol: float = 1e-9) -> StationarityReport:
    """Support conditions for a symmetric candidate x = y = z = strategy."""
    p = np.asarray(strategy, dtype=float)
    pos = p > 0
    vals = f_tilde_raw(p[pos], game.alpha, game.gamma)
    C = float(vals.mean())
    eq = float(np.max(np.abs(vals - C)))
    ineq = max(0.0, -C) if not pos.all() else 0.0
    return StationarityReport(C, eq, ineq, eq <= tol and ineq <= tol)


def simplex_grid(m: int, d: int) -> np.ndarray:
    """All points of the simplex with denominator d, lexicographic order."""
    rows = []
    for bars in itertools.combinations(range(d + m - 1), m - 1):
        edges = (-1,) + bars + (d + m - 1,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(m)])
    pts = np.array(rows, dtype=float) / d
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def grid_oracle(m: int, game, d: int, symmetric_only: bool = True, tol: float = GRID_TOL,
                cap: int = DEFAULT_GRID_CAP) -> list:
    """Brute-force scan for epsilon-Nash points on the grid of denominator ``d``.

    Symmetric scans return strategies; the asymmetric scan returns
    ``Profile`` objects.
    """
    if d < 2:
        raise ValueError("resolution must be >= 2")
    g = as_params(game)
    from math import comb

    n = comb(d + m - 1, m - 1)
    count = n if symmetric_only else n**3
    if count > cap:
        raise GridTooLarge(f"grid has {count} evaluations, cap is {cap}")
    pts = simplex_grid(m, d)
    if symmetric_only:
        gain = _gains(pts, pts, pts, g)
        return [p for p, gn in zip(pts, gain) if gn <= tol]
    out = []
    # chunk over x to bound memory
    Y, Z = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    Y, Z = pts[Y.ravel()], pts[Z.ravel()]
    for x in pts:
        X = np.broadcast_to(x, Y.shape)
        worst = np.maximum(np.maximum(_gains(X, Y, Z, g), _gains(Y, Z, X, g)), _gains(Z, X, Y, g))
        for j in np.flatnonzero(worst <= tol):
            out.append(Profile(x, Y[j], Z[j]))
    return out
