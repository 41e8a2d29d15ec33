# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled coordinate sweeps. Same contract as duhl._pykernels."""


def en_sweep(const double[::1, :] A, const double[::1] norms, double[::1] alpha,
             double[::1] vt, const Py_ssize_t[::1] order, double lam, double eta,
             double d):
    cdef Py_ssize_t rows = A.shape[0]
    cdef Py_ssize_t k, j, r
    cdef double nrm, dot, denom, tau, gamma, new, delta
    with nogil:
        for k in range(order.shape[0]):
            j = order[k]
            nrm = norms[j]
            if nrm == 0.0:
                alpha[j] = 0.0
                continue
            dot = 0.0
            for r in range(rows):
                dot = dot + A[r, j] * vt[r]
            denom = nrm + lam * eta * d
            tau = lam * d * (1.0 - eta) / denom
            gamma = (alpha[j] * nrm - dot) / denom
            if gamma > tau:
                new = gamma - tau
            elif gamma < -tau:
                new = gamma + tau
            else:
                new = 0.0
            delta = new - alpha[j]
            if delta != 0.0:
                for r in range(rows):
                    vt[r] = vt[r] + A[r, j] * delta
                alpha[j] = new


def svm_sweep(const double[::1, :] A, const double[::1] norms, const double[::1] y,
              double[::1] alpha, double[::1] vh, const Py_ssize_t[::1] order,
              double lam, double n):
    cdef Py_ssize_t rows = A.shape[0]
    cdef Py_ssize_t k, j, r
    cdef double nrm, dot, step, yj, t, new, delta
    cdef double scale = 1.0 / (lam * n)
    with nogil:
        for k in range(order.shape[0]):
            j = order[k]
            nrm = norms[j]
            yj = y[j]
            if nrm == 0.0:
                alpha[j] = yj
                continue
            dot = 0.0
            for r in range(rows):
                dot = dot + A[r, j] * vh[r]
            step = (yj - scale * dot) / (scale * nrm)
            t = yj * (alpha[j] + step)
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            new = yj * t
            delta = new - alpha[j]
            if delta != 0.0:
                for r in range(rows):
                    vh[r] = vh[r] + A[r, j] * delta
                alpha[j] = new
