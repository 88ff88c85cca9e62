"""Exact enumeration of the (symmetric) Nash equilibria of an m-3MA game.

Every equilibrium has x = y = z, and a symmetric strategy with support S is
Nash iff f~ is constant (= C) on its positive entries and f~(0) = 0 <= C
whenever some entry is zero. Equilibria therefore depend on (alpha, gamma)
only. Families are stored up to action permutation; :func:`expand_points`
enumerates the orbits.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .game import f_tilde_raw

#: tolerance used to certify equal f~ values and the sign of C
VALUE_TOL = 1e-12


class DegenerateParabola(ValueError):
    pass


class ContinuumNotExpandable(ValueError):
    pass


class RegimeClass(enum.Enum):
    NEUTRAL = "Neutral"
    BOTH_NONPOSITIVE = "BothNonpositive"
    ALPHA_POS_GAMMA_NEG = "AlphaPosGammaNeg"
    BOTH_NONNEGATIVE = "BothNonnegative"
    GAMMA_POS_ALPHA_NEG = "GammaPosAlphaNeg"


def classify_regime(alpha: float, gamma: float) -> RegimeClass:
    # first match wins; (0, 0) satisfies three rows
    if alpha == 0 and gamma == 0:
        return RegimeClass.NEUTRAL
    if alpha <= 0 and gamma <= 0:
        return RegimeClass.BOTH_NONPOSITIVE
    if alpha > 0 > gamma:
        return RegimeClass.ALPHA_POS_GAMMA_NEG
    if alpha >= 0 and gamma >= 0:
        return RegimeClass.BOTH_NONNEGATIVE
    return RegimeClass.GAMMA_POS_ALPHA_NEG


def extremum_point(alpha: float, gamma: float) -> float:
    """Location gamma / (2 (gamma - alpha)) of the extremum of f~."""
    if gamma == alpha:
        raise DegenerateParabola(f"f~ is linear when alpha == gamma (= {alpha})")
    return gamma / (2.0 * (gamma - alpha))


def _conflicting(alpha: float, gamma: float) -> bool:
    return (alpha > 0 > gamma) or (gamma > 0 > alpha)


@dataclass(frozen=True)
class DoubleRootPattern:
    """k entries at ``x_plus`` and ``support_size - k`` entries at ``x_minus``."""

    k: int
    x_plus: float
    x_minus: float
    support_size: int
    alpha: float
    gamma: float

    @property
    def value(self) -> float:
        """The common value C = f~(x_plus) = f~(x_minus)."""
        return 0.5 * (f_tilde_raw(self.x_plus, self.alpha, self.gamma) + f_tilde_raw(self.x_minus, self.alpha, self.gamma))

    def as_vector(self) -> np.ndarray:
        m = self.support_size
        return np.array([self.x_plus] * self.k + [self.x_minus] * (m - self.k))


@dataclass(frozen=True)
class DoubleRootLine:
    """Degenerate case m' x_ext = 1 with k = m'/2: x_plus + x_minus = 2 x_ext for any
    0 < delta < x_ext, so a whole segment of strategies is Nash."""

    k: int
    x_ext: float
    support_size: int


@dataclass(frozen=True)
class EquilibriumFamily:
    kind: str  # "uniform", "double_roots" or "double_roots_line"
    support_size: int
    pattern: DoubleRootPattern | DoubleRootLine | None = None

    @property
    def is_pure(self) -> bool:
        return self.kind == "uniform" and self.support_size == 1

    def describe(self) -> str:
        if self.is_pure:
            return "Pure"
        if self.kind == "uniform":
            return f"UniformSupport({self.support_size})"
        p = self.pattern
        if self.kind == "double_roots":
            return (f"DoubleRoots(k={p.k}, x_plus={p.x_plus:.17g}, x_minus={p.x_minus:.17g}, "
                    f"support={p.support_size})")
        return f"DoubleRootsLine(k={p.k}, x_plus+x_minus={2 * p.x_ext:.17g}, support={p.support_size})"


@dataclass
class EquilibriumSet:
    m: int
    alpha: float
    gamma: float
    regime: RegimeClass
    continuum: bool = False
    families: list = field(default_factory=list)
    #: flags for boundary cases hit during enumeration
    notes: list = field(default_factory=list)


def double_root_patterns(support_size: int, alpha: float, gamma: float, notes: list | None = None) -> list:
    """Strategies on ``support_size`` actions taking two values with equal f~.

    ``notes`` collects flags for the k = 1/(2 x_ext) boundary (delta = x_ext).
    """
    m = support_size
    if m < 2 or not _conflicting(alpha, gamma):
        return []
    x_ext = extremum_point(alpha, gamma)
    out = []
    for k in range(1, m):
        if 2 * k == m:
            continue
        delta = (m * x_ext - 1.0) / (m - 2 * k)
        if not delta > VALUE_TOL:
            continue
        if not delta < x_ext - VALUE_TOL:
            if abs(delta - x_ext) <= VALUE_TOL and notes is not None:
                notes.append(f"boundary k=1/(2 x_ext) hit at support {m}, k={k}: x_minus=0 excluded")
            continue
        # redundant with the delta window, kept as the stated k-range rule
        if x_ext > 1.0 / m and not k <= 1.0 / (2 * x_ext):
            continue
        if x_ext < 1.0 / m and not k >= 1.0 / (2 * x_ext):
            continue
        out.append(DoubleRootPattern(k, x_ext + delta, x_ext - delta, m, alpha, gamma))
    return out


def _double_root_line(support_size: int, alpha: float, gamma: float):
    m = support_size
    if m < 4 or m % 2 or not _conflicting(alpha, gamma):
        return None
    x_ext = extremum_point(alpha, gamma)
    if abs(m * x_ext - 1.0) > VALUE_TOL:
        return None
    return DoubleRootLine(m // 2, x_ext, m)


def enumerate_equilibria(m: int, alpha: float, gamma: float) -> EquilibriumSet:
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    regime = classify_regime(alpha, gamma)
    result = EquilibriumSet(m, alpha, gamma, regime)
    if regime is RegimeClass.NEUTRAL:
        result.continuum = True
        return result
    for size in range(1, m + 1):
        # f~(1/size) >= 0  <=>  gamma (size - 1) + alpha >= 0
        if size == m or gamma * (size - 1) + alpha >= -VALUE_TOL:
            result.families.append(EquilibriumFamily("uniform", size))
        for pat in double_root_patterns(size, alpha, gamma, result.notes):
            if size == m or pat.value >= -VALUE_TOL:
                result.families.append(EquilibriumFamily("double_roots", size, pat))
        line = _double_root_line(size, alpha, gamma)
        if line is not None and (size == m or f_tilde_raw(line.x_ext, alpha, gamma) > 0):
            result.families.append(EquilibriumFamily("double_roots_line", size, line))
            result.notes.append(f"degenerate support {size}: x_ext = 1/{size}, segment of double-root equilibria")
    return result


def _orbit(values: np.ndarray, m: int):
    """All distinct placements of a support vector (sorted descending) in m actions."""
    size = len(values)
    seen = set()
    for support in itertools.combinations(range(m), size):
        for perm in set(itertools.permutations(values)):
            p = np.zeros(m)
            p[list(support)] = perm
            key = tuple(p)
            if key not in seen:
                seen.add(key)
                yield p


def family_points(family: EquilibriumFamily, m: int, line_samples: int = 0) -> list:
    if family.kind == "uniform":
        base = np.full(family.support_size, 1.0 / family.support_size)
        return list(_orbit(base, m))
    if family.kind == "double_roots":
        return list(_orbit(family.pattern.as_vector(), m))
    if not line_samples:
        raise ContinuumNotExpandable(f"{family.describe()} is a continuum; pass line_samples to sample it")
    line = family.pattern
    pts = []
    for j in range(1, line_samples + 1):
        d = line.x_ext * j / (line_samples + 1)
        vec = np.array([line.x_ext + d] * line.k + [line.x_ext - d] * (line.support_size - line.k))
        pts.extend(_orbit(vec, m))
    return pts


def expand_points(eqset: EquilibriumSet, m: int | None = None, line_samples: int = 0) -> list:
    """Distinct simplex points of every family, lexicographically sorted."""
    if eqset.continuum:
        raise ContinuumNotExpandable("the equilibrium set is the whole simplex")
    m = eqset.m if m is None else m
    pts = {}
    for fam in eqset.families:
        for p in family_points(fam, m, line_samples):
            pts.setdefault(tuple(p), p)
    return [pts[k] for k in sorted(pts)]


# literal transcription of the five-row case table, used as a cross-check

def _floor(v: float) -> int:
    return math.floor(v + 1e-9)


def _ceil(v: float) -> int:
    return math.ceil(v - 1e-9)


def _uniform_family_points(size: int, m: int) -> list:
    return list(_orbit(np.full(size, 1.0 / size), m))


def _n_dr(size: int, m: int, alpha: float, gamma: float) -> list:
    """N_DR(size) embedded in m actions, with the printed k ranges."""
    x_ext = extremum_point(alpha, gamma)
    bound = 1.0 / (2 * x_ext)
    if x_ext > 1.0 / size:
        ks = range(1, min(_floor(bound), size - 1) + 1)
    elif x_ext < 1.0 / size:
        ks = range(max(_ceil(bound), 1), size)
    else:
        ks = range(0)
    pts = []
    for k in ks:
        if 2 * k == size:
            continue
        delta = (size * x_ext - 1.0) / (size - 2 * k)
        vec = np.array([x_ext + delta] * k + [x_ext - delta] * (size - k))
        pts.extend(_orbit(vec, m))
    return pts


def table_points(m: int, alpha: float, gamma: float):
    """Equilibrium strategies read off the case table directly (None for the continuum)."""
    regime = classify_regime(alpha, gamma)
    if regime is RegimeClass.NEUTRAL:
        return None
    pure = _uniform_family_points(1, m)
    uni = _uniform_family_points(m, m)
    A = range(2, m)
    pts = []
    if regime is RegimeClass.BOTH_NONPOSITIVE:
        pts = uni
    elif regime is RegimeClass.BOTH_NONNEGATIVE:
        pts = pure + uni + [p for s in A for p in _uniform_family_points(s, m)]
    elif regime is RegimeClass.ALPHA_POS_GAMMA_NEG:
        hi = min(_floor(1.0 / (2 * extremum_point(alpha, gamma))), m - 1)
        pts = pure + uni + [p for s in range(2, hi + 1) for p in _uniform_family_points(s, m)]
        pts += _n_dr(m, m, alpha, gamma)
    else:
        lo = max(_ceil(1.0 / (2 * extremum_point(alpha, gamma))), 2)
        pts = uni + [p for s in range(lo, m) for p in _uniform_family_points(s, m)]
        pts += [p for s in range(2, m + 1) for p in _n_dr(s, m, alpha, gamma)]
    return pts
