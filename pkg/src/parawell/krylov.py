"""Arnoldi approximation of exp(t A) v for a batch of vectors.

Each row of the input is propagated in its own Krylov space; the rows only
share the sparse mat-vec call. The error is controlled by the usual
a posteriori estimate ``beta * h[j+1, j] * |(exp(H_j))[j, 0]|``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import ConvergenceError

BREAKDOWN = 1e-13


def _arnoldi_expmv(A, tau, V, m, tol):
    b, n = V.shape
    beta = np.sqrt(np.sum(V * V, axis=1))
    live = beta > 0
    safe_beta = np.where(live, beta, 1.0)

    Q = np.zeros((m + 1, b, n))
    Q[0] = V / safe_beta[:, None]
    H = np.zeros((b, m + 1, m))
    done = ~live
    err = np.zeros(b)
    coeff = None

    for j in range(m):
        w = tau * (A @ Q[j].T).T
        for i in range(j + 1):
            h = np.sum(Q[i] * w, axis=1)
            H[:, i, j] = h
            w -= h[:, None] * Q[i]
        hn = np.sqrt(np.sum(w * w, axis=1))
        H[:, j + 1, j] = hn

        small = scipy.linalg.expm(H[:, : j + 1, : j + 1])
        coeff = small[:, :, 0]
        err = np.abs(hn * small[:, j, 0])
        broke = hn <= BREAKDOWN * np.maximum(1.0, np.abs(H[:, : j + 1, j]).max(axis=1))
        err = np.where(broke, 0.0, err)
        done = done | broke | (err <= tol)
        if done.all():
            break
        Q[j + 1] = np.where(broke[:, None], 0.0, w / np.where(broke, 1.0, hn)[:, None])

    k = coeff.shape[1]
    out = np.einsum("bi,ibn->bn", coeff, Q[:k])
    out *= beta[:, None]
    err = np.where(live, err, 0.0)
    return out, err


def expmv(A, t, V, m=30, tol=1e-10, max_restarts=1):
    """Return ``exp(t A) @ v`` for every row ``v`` of ``V``.

    ``tol`` bounds the estimated error relative to ``|v|``. If a single
    Krylov space of dimension ``m`` does not reach it, the interval is split
    into twice as many substeps (one restart by default) before giving up
    with :class:`ConvergenceError`.
    """
    V = np.asarray(V, dtype=float)
    V2 = V.reshape(-1, V.shape[-1])
    m = max(1, min(m, V2.shape[1]))
    if t == 0:
        return V.copy()

    substeps = 1
    for _ in range(max_restarts + 1):
        tau = t / substeps
        cur = V2
        worst = 0.0
        for _ in range(substeps):
            cur, err = _arnoldi_expmv(A, tau, cur, m, tol)
            worst = max(worst, float(err.max(initial=0.0)))
        if worst <= tol:
            return cur.reshape(V.shape)
        substeps *= 2
    raise ConvergenceError(
        f"Krylov expmv did not converge with m={m} after {max_restarts} restart(s)", worst
    )
