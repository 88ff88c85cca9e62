"""Continuous-time FTRL in m-3MA: mirror maps, vector fields and RK4 integration.

Arrays holding the three players use a leading axis of length 3 in the
order (X, Y, Z); every function also accepts extra leading batch axes,
so many initial conditions can be integrated at once.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .game import DerivedParams, Profile, as_params

BLOWUP_DUAL = 1e6


class Regularizer(enum.Enum):
    ENTROPIC = "entropic"
    EUCLIDEAN = "euclidean"


class Mode(enum.Enum):
    DUAL = "dual"
    PRIMAL_REPLICATOR = "primal_replicator"
    TWO_ACTION = "two_action"


class IntegrationError(RuntimeError):
    pass


class BoundaryError(ValueError):
    pass


def _reg(reg) -> Regularizer:
    return reg if isinstance(reg, Regularizer) else Regularizer(reg)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the simplex along the last axis (sort and threshold)."""
    v = np.asarray(v, dtype=float)
    m = v.shape[-1]
    u = -np.sort(-v, axis=-1)
    css = np.cumsum(u, axis=-1) - 1.0
    ind = np.arange(1, m + 1)
    cond = u - css / ind > 0
    # cond holds on a prefix; rho is its length
    rho = np.count_nonzero(cond, axis=-1)
    tau = np.take_along_axis(css, rho[..., None] - 1, axis=-1) / rho[..., None]
    return np.maximum(v - tau, 0.0)


def mirror_map(dual, reg=Regularizer.ENTROPIC) -> np.ndarray:
    """argmax over the simplex of dual.x - h(x), along the last axis."""
    dual = np.asarray(dual, dtype=float)
    if not np.all(np.isfinite(dual)):
        raise ValueError("non-finite dual vector")
    if _reg(reg) is Regularizer.ENTROPIC:
        e = np.exp(dual - dual.max(axis=-1, keepdims=True))
        return e / e.sum(axis=-1, keepdims=True)
    return project_simplex(dual)


def regularizer_value(p, reg) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if _reg(reg) is Regularizer.ENTROPIC:
        return np.sum(np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0), axis=-1)
    return 0.5 * np.sum(p * p, axis=-1)


def conjugate_value(dual, reg=Regularizer.ENTROPIC) -> np.ndarray:
    """max over the simplex of dual.x - h(x)."""
    dual = np.asarray(dual, dtype=float)
    if not np.all(np.isfinite(dual)):
        raise ValueError("non-finite dual vector")
    if _reg(reg) is Regularizer.ENTROPIC:
        mx = dual.max(axis=-1)
        return mx + np.log(np.sum(np.exp(dual - mx[..., None]), axis=-1))
    q = project_simplex(dual)
    return np.sum(dual * q, axis=-1) - 0.5 * np.sum(q * q, axis=-1)


def inverse_mirror_map(p, reg=Regularizer.ENTROPIC) -> np.ndarray:
    """A dual vector mapping to ``p`` (defined up to a constant shift)."""
    p = np.asarray(p, dtype=float)
    if _reg(reg) is Regularizer.ENTROPIC:
        if np.any(p < 1e-12):
            raise BoundaryError("entropic initialization needs every probability >= 1e-12")
        return np.log(p)
    return p.copy()


def _f(y, z, g: DerivedParams):
    return (g.alpha - g.gamma) * y * z + 0.5 * (g.beta + g.gamma) * y + 0.5 * (g.gamma - g.beta) * z + g.c


def _cyclic_gradients(P, g):
    """Stacked (f(y,z), f(z,x), f(x,y)) for P shaped (..., 3, m)."""
    x, y, z = P[..., 0, :], P[..., 1, :], P[..., 2, :]
    return np.stack([_f(y, z, g), _f(z, x, g), _f(x, y, g)], axis=-2)


def _profile_array(profile) -> np.ndarray:
    return profile.as_array() if isinstance(profile, Profile) else np.asarray(profile, dtype=float)


def ftrl_dual_velocity(profile, game) -> np.ndarray:
    """Rows: X's, Y's and Z's dual velocities (the payoff gradients)."""
    return _cyclic_gradients(_profile_array(profile), as_params(game))


def replicator_rhs(profile, game) -> np.ndarray:
    P = _profile_array(profile)
    F = _cyclic_gradients(P, as_params(game))
    return P * (F - np.sum(P * F, axis=-1, keepdims=True))


def gradient_ascent_rhs(profile, game) -> np.ndarray:
    """Interior-only primal form of Euclidean FTRL."""
    P = _profile_array(profile)
    if np.any(P <= 1e-12):
        raise BoundaryError("gradient ascent form holds only in the interior; use dual mode")
    F = _cyclic_gradients(P, as_params(game))
    return F - F.mean(axis=-1, keepdims=True)


def two_action_weight(p, reg):
    if _reg(reg) is Regularizer.ENTROPIC:
        return p * (1.0 - p)
    return np.full_like(np.asarray(p, dtype=float), 0.5)


def two_action_rhs(point, game, reg=Regularizer.ENTROPIC) -> np.ndarray:
    """(x1', y1', z1') of the reduced m = 2 dynamics; gamma does not enter."""
    g = as_params(game)
    P = np.asarray(point, dtype=float)
    x, y, z = P[..., 0], P[..., 1], P[..., 2]
    a, b = g.alpha, g.beta
    return np.stack([
        two_action_weight(x, reg) * (a * (y + z - 1) + b * (y - z)),
        two_action_weight(y, reg) * (a * (z + x - 1) + b * (z - x)),
        two_action_weight(z, reg) * (a * (x + y - 1) + b * (x - y)),
    ], axis=-1)


def rk4_step(state, h: float, rhs):
    """One classical RK4 step of ``state' = rhs(state)``."""
    k1 = rhs(state)
    k2 = rhs(state + 0.5 * h * k1)
    k3 = rhs(state + 0.5 * h * k2)
    k4 = rhs(state + h * k3)
    return state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass(frozen=True)
class IntegratorConfig:
    horizon: float
    step: float = 0.02
    mode: Mode = Mode.DUAL
    regularizer: Regularizer = Regularizer.ENTROPIC
    record_every: int = 1
    method: str = "RK4"

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "regularizer", Regularizer(self.regularizer))
        if not self.step > 0 or not self.horizon > 0:
            raise ValueError("step and horizon must be positive")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError("record_every must be a positive integer")
        if self.method != "RK4":
            raise ValueError(f"unsupported method {self.method}")
        if self.mode is Mode.PRIMAL_REPLICATOR and self.regularizer is not Regularizer.ENTROPIC:
            raise ValueError("primal replicator integration requires the entropic regularizer")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.step))


@dataclass
class LearnerState:
    """Dual vectors of the three players plus the cached primal profile."""

    duals: np.ndarray  # (3, m)
    reg: Regularizer = Regularizer.ENTROPIC
    t: float = 0.0
    primal: np.ndarray = field(init=False)

    def __post_init__(self):
        self.duals = np.asarray(self.duals, dtype=float)
        self.primal = mirror_map(self.duals, self.reg)

    @classmethod
    def from_profile(cls, profile, reg=Regularizer.ENTROPIC, t: float = 0.0) -> "LearnerState":
        return cls(inverse_mirror_map(_profile_array(profile), reg), _reg(reg), t)

    @property
    def x_dual(self):
        return self.duals[0]

    @property
    def y_dual(self):
        return self.duals[1]

    @property
    def z_dual(self):
        return self.duals[2]

    @property
    def profile(self) -> Profile:
        return Profile(*self.primal)

    def advance(self, h: float, game) -> "LearnerState":
        g = as_params(game)
        new = rk4_step(self.duals, h, lambda D: _cyclic_gradients(mirror_map(D, self.reg), g))
        if not np.all(np.isfinite(new)):
            raise IntegrationError("non-finite dual state")
        return LearnerState(new, self.reg, self.t + h)


@dataclass
class Trajectory:
    """Recorded samples of one run; ``profiles`` has shape (n, 3, m)."""

    t: np.ndarray
    profiles: np.ndarray
    V: np.ndarray
    G: np.ndarray
    duals: np.ndarray
    config: IntegratorConfig
    game: DerivedParams
    error: str | None = None

    @property
    def m(self) -> int:
        return self.profiles.shape[-1]

    def __len__(self):
        return len(self.t)

    def profile(self, i: int) -> Profile:
        return Profile(*self.profiles[i])

    @property
    def sync(self) -> np.ndarray:
        """Probability sum_i x_i y_i z_i that all three players match."""
        return self.V + 1.0 / self.m**2


def _sync_V(P):
    m = P.shape[-1]
    return np.sum(P[..., 0, :] * P[..., 1, :] * P[..., 2, :], axis=-1) - 1.0 / m**2


def _divergence_G(D, reg):
    m = D.shape[-1]
    return np.sum(conjugate_value(D, reg) - D.sum(axis=-1) / m, axis=-1)


def _initial_array(initial) -> np.ndarray:
    if isinstance(initial, LearnerState):
        return initial.primal
    return _profile_array(initial)


def _record_indices(n: int, rec: int) -> list:
    idx = list(range(0, n + 1, rec))
    if idx[-1] != n:
        idx.append(n)
    return idx


def _integrate_numpy(kind, S0, reg, g, h, n, rec):
    B = S0.shape[0]
    if kind == 0:
        def rhs(S):
            return _cyclic_gradients(mirror_map(S, reg), g)
    elif kind == 1:
        def rhs(S):
            return replicator_rhs(S, g)
    else:
        def rhs(S):
            out = np.zeros_like(S)
            out[..., 0] = two_action_rhs(S[..., 0], g, reg)
            return out
    idx = _record_indices(n, rec)
    out = np.empty((B, len(idx)) + S0.shape[1:])
    status = np.full(B, -1)
    S = S0.copy()
    out[:, 0] = S
    j = 1
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n + 1):
            new = rk4_step(S, h, rhs)
            if kind == 1:
                new = np.clip(new, 0.0, None)
                new = new / new.sum(axis=-1, keepdims=True)
            flat = new.reshape(B, -1)
            bad = ~np.all(np.isfinite(flat), axis=1)
            if kind == 0:
                bad |= np.nanmax(np.abs(flat), axis=1) > BLOWUP_DUAL
            elif kind == 2:
                bad |= np.any((new[..., 0] < -1e-12) | (new[..., 0] > 1 + 1e-12), axis=-1)
            status[bad & (status < 0)] = step
            ok = status < 0
            S = np.where(ok[:, None, None], new, S)
            if j < len(idx) and step == idx[j]:
                out[:, j] = S
                j += 1
    return out, status


def _integrate_numba(kind, S0, reg, g, h, n, rec):
    from . import _kernels

    idx = _record_indices(n, rec)
    out = np.empty((S0.shape[0], len(idx)) + S0.shape[1:])
    status = np.empty(S0.shape[0], dtype=np.int64)
    _kernels.integrate(
        kind, np.ascontiguousarray(S0, dtype=float), 0 if reg is Regularizer.ENTROPIC else 1,
        g.alpha - g.gamma, 0.5 * (g.beta + g.gamma), 0.5 * (g.gamma - g.beta), g.c, g.alpha, g.beta,
        h, n, rec, BLOWUP_DUAL, out, status,
    )
    return out, status


def _have_numba() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def simulate_batch(initials, game, config: IntegratorConfig, engine: str = "auto") -> list:
    """Integrate several initial conditions; one Trajectory each.

    A run that blows up (non-finite state, dual magnitude above 1e6, or a
    reduced state leaving [0, 1]) is frozen at its last good state and
    returned with ``error`` set. ``engine`` is "numba", "numpy" or "auto";
    both engines implement the same RK4 update.
    """
    g = as_params(game)
    reg, mode, h = config.regularizer, config.mode, config.step
    P0 = np.stack([_initial_array(p) for p in initials])  # (B, 3, m)
    B, _, m = P0.shape
    if mode is Mode.TWO_ACTION and m != 2:
        raise ValueError("two-action reduction requires m = 2")
    if mode is Mode.DUAL:
        kind = 0
        if all(isinstance(s, LearnerState) for s in initials):
            S0 = np.stack([s.duals for s in initials])
        else:
            S0 = inverse_mirror_map(P0, reg)
    else:
        if reg is Regularizer.ENTROPIC and np.any(P0 < 1e-12):
            raise BoundaryError("entropic initialization needs every probability >= 1e-12")
        kind = 1 if mode is Mode.PRIMAL_REPLICATOR else 2
        S0 = P0.copy()
    if engine == "auto":
        engine = "numba" if _have_numba() else "numpy"
    run = _integrate_numba if engine == "numba" else _integrate_numpy
    states, status = run(kind, S0, reg, g, h, config.n_steps, config.record_every)

    if kind == 0:
        Ps = mirror_map(states, reg)
        Ds = states
    elif kind == 1:
        Ps = states
        Ds = np.log(np.maximum(states, 1e-300))
    else:
        x1 = states[..., 0]
        Ps = np.stack([x1, 1.0 - x1], axis=-1)
        Ds = np.log(np.maximum(Ps, 1e-300)) if reg is Regularizer.ENTROPIC else Ps
    T = np.array(_record_indices(config.n_steps, config.record_every), dtype=float) * h
    Vs = _sync_V(Ps)
    Gs = _divergence_G(Ds, reg)
    out = []
    for b in range(B):
        err = None if status[b] < 0 else f"integration blow-up at t={status[b] * h:.6g}"
        out.append(Trajectory(T.copy(), Ps[b], Vs[b], Gs[b], Ds[b], config, g, err))
    return out


def simulate(initial, game, config: IntegratorConfig) -> Trajectory:
    return simulate_batch([initial], game, config)[0]
