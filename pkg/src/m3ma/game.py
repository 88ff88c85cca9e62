"""Three-player matching m-action games: scores, derived parameters, payoffs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIMPLEX_TOL = 1e-9
RENORM_TOL = 1e-6


class ConstraintError(ValueError):
    """Raised when game scores or parameters violate the ordering constraints."""


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class GameScores:
    """Raw scores: winner ``a``, loser ``b``, isolated ``c``, three-way ``epsilon``."""

    a: float
    b: float
    c: float
    epsilon: float
    m: int = 2

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ConstraintError(f"m must be an integer >= 2, got {self.m}")
        if not (self.b < self.c):
            raise ConstraintError(f"b < c violated (b={self.b}, c={self.c})")
        if not (self.c < self.a):
            raise ConstraintError(f"c < a violated (c={self.c}, a={self.a})")
        if not (self.b < self.epsilon):
            raise ConstraintError(f"b < epsilon violated (b={self.b}, epsilon={self.epsilon})")
        if not (self.epsilon < self.a):
            raise ConstraintError(f"epsilon < a violated (epsilon={self.epsilon}, a={self.a})")


@dataclass(frozen=True)
class DerivedParams:
    """Canonical coordinates of a game.

    alpha = epsilon - c (synchronization), beta = a - b (rotation),
    gamma = a + b - 2c (competition seeking), plus the payoff offset c.
    """

    alpha: float
    beta: float
    gamma: float
    c: float = 0.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ConstraintError(f"beta > 0 violated (beta={self.beta})")
        if not abs(self.gamma) < self.beta:
            raise ConstraintError(f"|gamma| < beta violated (gamma={self.gamma}, beta={self.beta})")
        lo, hi = (self.gamma - self.beta) / 2, (self.gamma + self.beta) / 2
        if not lo < self.alpha < hi:
            raise ConstraintError(
                f"(gamma-beta)/2 < alpha < (gamma+beta)/2 violated (alpha={self.alpha}, range=({lo}, {hi}))"
            )


def derive_params(scores: GameScores) -> DerivedParams:
    return DerivedParams(
        alpha=scores.epsilon - scores.c,
        beta=scores.a - scores.b,
        gamma=scores.a + scores.b - 2 * scores.c,
        c=scores.c,
    )


def scores_from_derived(alpha: float, beta: float, gamma: float, offset: float = 0.0, m: int = 2) -> GameScores:
    """Inverse of :func:`derive_params` with ``c = offset``."""
    if not beta > 0 or not abs(gamma) < beta or not (gamma - beta) / 2 < alpha < (gamma + beta) / 2:
        raise ConstraintError(f"infeasible parameters (alpha={alpha}, beta={beta}, gamma={gamma})")
    c = offset
    return GameScores(a=c + (beta + gamma) / 2, b=c + (gamma - beta) / 2, c=c, epsilon=c + alpha, m=m)


def as_params(game) -> DerivedParams:
    if isinstance(game, DerivedParams):
        return game
    if isinstance(game, GameScores):
        return derive_params(game)
    raise TypeError(f"expected DerivedParams or GameScores, got {type(game).__name__}")


def as_strategy(p, tol: float = RENORM_TOL) -> np.ndarray:
    """Validate a point of the simplex; renormalize small drift, reject the rest."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise DimensionError(f"strategy must be a non-empty vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("strategy has non-finite entries")
    if np.any(p < -tol) or np.any(p > 1 + tol):
        raise ValueError(f"strategy entries outside [0, 1]: {p}")
    s = p.sum()
    if abs(s - 1) > tol:
        raise ValueError(f"strategy sums to {s}, not 1")
    if abs(s - 1) > SIMPLEX_TOL or np.any(p < 0):
        p = np.clip(p, 0.0, None)
        p = p / p.sum()
    return p


@dataclass(frozen=True)
class Profile:
    """Strategies of players X, Y, Z over a common action set."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        x, y, z = (as_strategy(v) for v in (self.x, self.y, self.z))
        if not x.size == y.size == z.size:
            raise DimensionError(f"strategy lengths differ: {x.size}, {y.size}, {z.size}")
        for name, v in (("x", x), ("y", y), ("z", z)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def symmetric(cls, p) -> "Profile":
        return cls(p, p, p)

    @property
    def m(self) -> int:
        return self.x.size

    def rotated(self) -> "Profile":
        """(x, y, z) -> (y, z, x)."""
        return Profile(self.y, self.z, self.x)

    def as_array(self) -> np.ndarray:
        return np.stack([self.x, self.y, self.z])


def _check_pair(*vs):
    n = {np.shape(v) for v in vs}
    if len(n) != 1:
        raise DimensionError(f"strategy lengths differ: {[np.shape(v) for v in vs]}")


def payoff(x, y, z, game) -> float:
    """Expected payoff of the player using ``x`` against ``y`` (beaten) and ``z`` (beating).

    Y's payoff is ``payoff(y, z, x)`` and Z's is ``payoff(z, x, y)``.
    """
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    _check_pair(x, y, z)
    if isinstance(game, GameScores):
        a, b, c, eps = game.a, game.b, game.c, game.epsilon
    else:
        s = scores_from_derived(game.alpha, game.beta, game.gamma, game.c)
        a, b, c, eps = s.a, s.b, s.c, s.epsilon
    yb, zb = 1 - y, 1 - z
    return float(eps * np.sum(x * y * z) + a * np.sum(x * y * zb) + b * np.sum(x * yb * z) + c * np.sum(x * yb * zb))


def payoff_gradient(y, z, game) -> np.ndarray:
    """Gradient of the payoff in the own strategy: f(y_i, z_i) componentwise."""
    g = as_params(game)
    y, z = np.asarray(y, dtype=float), np.asarray(z, dtype=float)
    _check_pair(y, z)
    return (g.alpha - g.gamma) * y * z + 0.5 * (g.beta + g.gamma) * y + 0.5 * (g.gamma - g.beta) * z + g.c


def f_tilde(p, game) -> float:
    """Diagonal gradient (alpha - gamma) p^2 + gamma p, offset excluded."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"f_tilde is defined on [0, 1], got {p}")
    return f_tilde_raw(p, game.alpha, game.gamma)


def f_tilde_raw(p, alpha: float, gamma: float):
    # vectorized, no domain check; used by the equilibrium code which only needs (alpha, gamma)
    return (alpha - gamma) * p * p + gamma * p
