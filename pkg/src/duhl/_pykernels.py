"""Pure-Python coordinate sweeps, used when the compiled module is unavailable.

Both sweeps update ``alpha`` and the shadow vector in place, visiting the
columns of ``A`` in ``order``.  Zero columns are pinned at their regularizer's
minimizer without touching the shadow vector.
"""
import numpy as np


def en_sweep(A, norms, alpha, vt, order, lam, eta, d):
    for j in order:
        nrm = norms[j]
        if nrm == 0.0:
            alpha[j] = 0.0
            continue
        a = A[:, j]
        denom = nrm + lam * eta * d
        tau = lam * d * (1.0 - eta) / denom
        gamma = (alpha[j] * nrm - float(np.dot(a, vt))) / denom
        if gamma > tau:
            new = gamma - tau
        elif gamma < -tau:
            new = gamma + tau
        else:
            new = 0.0
        delta = new - alpha[j]
        if delta != 0.0:
            vt += a * delta
            alpha[j] = new


def svm_sweep(A, norms, y, alpha, vh, order, lam, n):
    scale = 1.0 / (lam * n)
    for j in order:
        nrm = norms[j]
        yj = y[j]
        if nrm == 0.0:
            alpha[j] = yj
            continue
        a = A[:, j]
        step = (yj - scale * float(np.dot(a, vh))) / (scale * nrm)
        t = min(1.0, max(0.0, yj * (alpha[j] + step)))
        new = yj * t
        delta = new - alpha[j]
        if delta != 0.0:
            vh += a * delta
            alpha[j] = new
