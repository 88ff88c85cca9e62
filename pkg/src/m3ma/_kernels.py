"""Compiled RK4 loops backing :func:`m3ma.dynamics.simulate_batch`.

Each kernel integrates a batch of independent runs with the same game and
step, recording every ``rec`` steps. ``status[b]`` is the step index at
which run b blew up, or -1.
"""

import numpy as np
from numba import njit

ENTROPIC = 0
EUCLIDEAN = 1


@njit(cache=True)
def _mirror(d, reg, out):
    m = d.shape[0]
    if reg == ENTROPIC:
        mx = d[0]
        for i in range(1, m):
            if d[i] > mx:
                mx = d[i]
        s = 0.0
        for i in range(m):
            out[i] = np.exp(d[i] - mx)
            s += out[i]
        for i in range(m):
            out[i] /= s
    else:
        u = -np.sort(-d)
        css = 0.0
        tau = 0.0
        for i in range(m):
            css += u[i]
            t = (css - 1.0) / (i + 1)
            if u[i] - t > 0:
                tau = t
        for i in range(m):
            v = d[i] - tau
            out[i] = v if v > 0 else 0.0


@njit(cache=True)
def _grad(P, A, b1, b2, c, out):
    m = P.shape[1]
    for p in range(3):
        q = (p + 1) % 3
        r = (p + 2) % 3
        for i in range(m):
            y = P[q, i]
            z = P[r, i]
            out[p, i] = A * y * z + b1 * y + b2 * z + c


@njit(cache=True)
def _dual_rhs(D, reg, A, b1, b2, c, P, out):
    for p in range(3):
        _mirror(D[p], reg, P[p])
    _grad(P, A, b1, b2, c, out)


@njit(cache=True)
def _replicator_rhs(P, A, b1, b2, c, out):
    _grad(P, A, b1, b2, c, out)
    m = P.shape[1]
    for p in range(3):
        avg = 0.0
        for i in range(m):
            avg += P[p, i] * out[p, i]
        for i in range(m):
            out[p, i] = P[p, i] * (out[p, i] - avg)


@njit(cache=True)
def _two_rhs(s, reg, a, b, out):
    for p in range(3):
        x = s[p]
        y = s[(p + 1) % 3]
        z = s[(p + 2) % 3]
        w = x * (1.0 - x) if reg == ENTROPIC else 0.5
        out[p] = w * (a * (y + z - 1.0) + b * (y - z))


@njit(cache=True)
def _rhs(kind, S, reg, A, b1, b2, c, a, b, P, out):
    if kind == 0:
        _dual_rhs(S, reg, A, b1, b2, c, P, out)
    elif kind == 1:
        _replicator_rhs(S, A, b1, b2, c, out)
    else:
        _two_rhs(S[:, 0], reg, a, b, out[:, 0])


@njit(cache=True)
def _axpy(S, s, k, out):
    for p in range(S.shape[0]):
        for i in range(S.shape[1]):
            out[p, i] = S[p, i] + s * k[p, i]


@njit(cache=True)
def integrate(kind, S0, reg, A, b1, b2, c, a, b, h, n, rec, blowup, out, status):
    """kind: 0 dual FTRL, 1 primal replicator, 2 two-action (state in column 0)."""
    B = S0.shape[0]
    m = S0.shape[2]
    P = np.empty((3, m))
    k1 = np.empty((3, m))
    k2 = np.empty((3, m))
    k3 = np.empty((3, m))
    k4 = np.empty((3, m))
    tmp = np.empty((3, m))
    for bi in range(B):
        S = S0[bi].copy()
        status[bi] = -1
        out[bi, 0] = S
        j = 1
        for step in range(1, n + 1):
            if status[bi] < 0:
                _rhs(kind, S, reg, A, b1, b2, c, a, b, P, k1)
                _axpy(S, 0.5 * h, k1, tmp)
                _rhs(kind, tmp, reg, A, b1, b2, c, a, b, P, k2)
                _axpy(S, 0.5 * h, k2, tmp)
                _rhs(kind, tmp, reg, A, b1, b2, c, a, b, P, k3)
                _axpy(S, h, k3, tmp)
                _rhs(kind, tmp, reg, A, b1, b2, c, a, b, P, k4)
                for p in range(3):
                    for i in range(m):
                        tmp[p, i] = S[p, i] + (h / 6.0) * (k1[p, i] + 2.0 * k2[p, i] + 2.0 * k3[p, i] + k4[p, i])
                bad = False
                if kind == 1:
                    for p in range(3):
                        s = 0.0
                        for i in range(m):
                            if tmp[p, i] < 0.0:
                                tmp[p, i] = 0.0
                            s += tmp[p, i]
                        for i in range(m):
                            tmp[p, i] /= s
                for p in range(3):
                    for i in range(m):
                        v = tmp[p, i]
                        if not np.isfinite(v):
                            bad = True
                        elif kind == 0 and abs(v) > blowup:
                            bad = True
                        elif kind == 2 and i == 0 and (v < -1e-12 or v > 1.0 + 1e-12):
                            bad = True
                if bad:
                    status[bi] = step
                else:
                    for p in range(3):
                        for i in range(m):
                            S[p, i] = tmp[p, i]
            if step % rec == 0 or step == n:
                for p in range(3):
                    for i in range(m):
                        out[bi, j, p, i] = S[p, i]
                j += 1
