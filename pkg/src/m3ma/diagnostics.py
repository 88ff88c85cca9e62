"""Synchronization V, divergence G, their analytic rates, and regime labels."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dynamics import Regularizer, Trajectory, _reg, conjugate_value, regularizer_value
from .game import DimensionError, Profile, as_params


class UnsupportedCombination(ValueError):
    pass


class TooFewSamples(ValueError):
    pass


def _P(profile) -> np.ndarray:
    return profile.as_array() if isinstance(profile, Profile) else np.asarray(profile, dtype=float)


def sync_V(profile) -> float:
    """sum_i x_i y_i z_i - 1/m^2."""
    P = _P(profile)
    if P.shape[-2] != 3:
        raise DimensionError("expected three strategies")
    m = P.shape[-1]
    return np.sum(P[..., 0, :] * P[..., 1, :] * P[..., 2, :], axis=-1) - 1.0 / m**2


def divergence_G(duals, reg=Regularizer.ENTROPIC, m: int | None = None) -> float:
    """Cyclic sum of conj(dual) - dual.1/m, with its constant offset kept."""
    D = np.asarray(duals, dtype=float)
    if m is not None and D.shape[-1] != m:
        raise DimensionError(f"duals have {D.shape[-1]} actions, expected {m}")
    mm = D.shape[-1]
    return np.sum(conjugate_value(D, reg) - D.sum(axis=-1) / mm, axis=-1)


def G_uniform_offset(reg, m: int) -> float:
    """Value of G at the uniform point; subtract it to recenter G at zero."""
    return float(-3 * regularizer_value(np.full(m, 1.0 / m), reg))


def _cyc(P):
    x, y, z = P[..., 0, :], P[..., 1, :], P[..., 2, :]
    return ((x, y, z), (y, z, x), (z, x, y))


def v_dot_analytic(profile, game, reg=Regularizer.ENTROPIC) -> float:
    """Closed-form dV/dt at an interior profile.

    m = 2: alpha * sum_cyc w(x1) (y1 + z1 - 1)^2 for either regularizer.
    m > 2 (entropic): sum_cyc of (alpha - gamma) Var_x[y z] + gamma Cov_x[y z, (y + z)/2];
    at gamma = 0 this is alpha * sum_cyc Var_x[y z]. The beta terms cancel
    under the cyclic sum in both cases.
    """
    g = as_params(game)
    reg = _reg(reg)
    P = _P(profile)
    m = P.shape[-1]
    if m == 2:
        total = 0.0
        for x, y, z in _cyc(P):
            w = x[..., 0] * (1 - x[..., 0]) if reg is Regularizer.ENTROPIC else 0.5
            total = total + w * (y[..., 0] + z[..., 0] - 1) ** 2
        return g.alpha * total
    if reg is not Regularizer.ENTROPIC:
        raise UnsupportedCombination("no closed form for the Euclidean regularizer with m > 2")
    total = 0.0
    for x, y, z in _cyc(P):
        yz = y * z
        s = 0.5 * (y + z)
        mean_yz = np.sum(x * yz, axis=-1)
        var = np.sum(x * yz * yz, axis=-1) - mean_yz**2
        cov = np.sum(x * yz * s, axis=-1) - mean_yz * np.sum(x * s, axis=-1)
        total = total + (g.alpha - g.gamma) * var + g.gamma * cov
    return total


def g_dot_analytic(profile, game) -> float:
    """sum_cyc sum_i f_i (x_i - 1/m); regularizer-free."""
    g = as_params(game)
    P = _P(profile)
    m = P.shape[-1]
    total = 0.0
    for x, y, z in _cyc(P):
        f = (g.alpha - g.gamma) * y * z + 0.5 * (g.beta + g.gamma) * y + 0.5 * (g.gamma - g.beta) * z + g.c
        total = total + np.sum(f * (x - 1.0 / m), axis=-1)
    return total


class RegimeLabel(enum.Enum):
    CYCLING = "Cycling"
    SYNCHRONIZING = "Synchronizing"
    DESYNCHRONIZING = "Desynchronizing"
    MIXED = "Mixed"


@dataclass(frozen=True)
class Classification:
    label: RegimeLabel
    v_trend: float
    terminal_sync: float
    recurrence: float


@dataclass(frozen=True)
class Thresholds:
    sync_high: float = 0.99
    sync_low: float = 0.01
    v_rel_tol: float = 1e-4
    recurrence: float = 1e-2


def _segment_distance(p, A, B):
    """Euclidean distance from p to each segment [A_k, B_k]."""
    d = B - A
    dd = np.sum(d * d, axis=-1)
    s = np.where(dd > 0, np.sum((p - A) * d, axis=-1) / np.where(dd > 0, dd, 1.0), 0.0)
    s = np.clip(s, 0.0, 1.0)
    return np.linalg.norm(A + s[:, None] * d - p, axis=-1)


def recurrence_score(traj: Trajectory) -> float:
    """Closest approach to the initial state after a quarter of the horizon.

    Measured against the piecewise-linear path between samples, so a
    coarse recording still detects a closed orbit passing through the start.
    """
    X = traj.profiles.reshape(len(traj), -1)
    t = traj.t
    late = np.flatnonzero(t >= t[-1] / 4)
    if len(late) < 2:
        return float("inf")
    A, B = X[late[:-1]], X[late[1:]]
    return float(_segment_distance(X[0], A, B).min())


def classify_trajectory(traj: Trajectory, thresholds: Thresholds = Thresholds()) -> Classification:
    if len(traj) < 100:
        raise TooFewSamples(f"need at least 100 samples, got {len(traj)}")
    V = traj.V
    trend = float(V[-1] - V[0])
    sync = float(traj.sync[-1])
    rec = recurrence_score(traj)
    if sync >= thresholds.sync_high:
        label = RegimeLabel.SYNCHRONIZING
    elif sync <= thresholds.sync_low and trend <= 0:
        label = RegimeLabel.DESYNCHRONIZING
    elif abs(trend) <= thresholds.v_rel_tol * (1 + abs(V[0])) and rec <= thresholds.recurrence:
        label = RegimeLabel.CYCLING
    else:
        label = RegimeLabel.MIXED
    return Classification(label, trend, sync, rec)


def central_difference(values: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Central difference at interior samples (uniform spacing assumed)."""
    return (values[2:] - values[:-2]) / (t[2:] - t[:-2])


def rate_residuals(traj: Trajectory):
    """Max |finite-difference rate - analytic rate| for V and G along a run.

    Returns (v_residual or None, g_residual); V is skipped where no closed
    form exists (Euclidean, m > 2).
    """
    P = traj.profiles[1:-1]
    reg = traj.config.regularizer
    g_res = float(np.max(np.abs(central_difference(traj.G, traj.t) - g_dot_analytic(P, traj.game))))
    try:
        vd = v_dot_analytic(P, traj.game, reg)
    except UnsupportedCombination:
        return None, g_res
    v_res = float(np.max(np.abs(central_difference(traj.V, traj.t) - vd)))
    return v_res, g_res


# (x_1, y_1, z_1) corners visited, in order, by the m = 2 boundary cycle when alpha < 0
HETEROCLINIC_CYCLE = ((0, 0, 1), (0, 1, 1), (0, 1, 0), (1, 1, 0), (1, 0, 0), (1, 0, 1))


def vertex_itinerary(traj: Trajectory, tol: float = 0.05, since: float = 0.0) -> list:
    """Corners of the (x_1, y_1, z_1) cube the run passes near, repeats collapsed.

    A sample counts only when every coordinate is within ``tol`` of 0 or 1
    and its time is at least ``since`` (to skip the approach transient).
    """
    if traj.m != 2:
        raise DimensionError("vertex itinerary is defined for m = 2")
    c = traj.profiles[:, :, 0]
    near = np.all(np.minimum(c, 1 - c) <= tol, axis=1) & (traj.t >= since)
    seq = []
    for row in np.rint(c[near]).astype(int):
        v = tuple(int(u) for u in row)
        if not seq or seq[-1] != v:
            seq.append(v)
    return seq


def follows_cycle(seq, cycle=HETEROCLINIC_CYCLE, min_steps: int = 6) -> bool:
    """True when seq has at least min_steps transitions, each to the next corner of cycle."""
    nxt = {cycle[k]: cycle[(k + 1) % len(cycle)] for k in range(len(cycle))}
    if len(seq) < min_steps + 1:
        return False
    return all(nxt.get(a) == b for a, b in zip(seq, seq[1:]))
