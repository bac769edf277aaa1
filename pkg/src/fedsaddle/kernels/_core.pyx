# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels for the quadratic-saddle oracle.

Mirrors kernels.pure exactly: both entry points route every gradient through
one shared routine, and the estimator recursion applies the same elementwise
IEEE operation sequence (the build forces -ffp-contract=off so no FMA fusion
can change roundings within a backend).
"""
import numpy as np

name = "compiled"
compiled = True


cdef void _grads(const double[:, ::1] hess, const double[::1] lin,
                 const double[:, ::1] coup, double mu, double sigma,
                 const double[::1] x, const double[::1] y,
                 const double[::1] nx, const double[::1] ny,
                 double[::1] gx, double[::1] gy) noexcept nogil:
    cdef Py_ssize_t d1 = x.shape[0], d2 = y.shape[0], i, j
    cdef double acc
    for i in range(d1):
        acc = 0.0
        for j in range(d1):
            acc += hess[i, j] * x[j]
        for j in range(d2):
            acc += coup[i, j] * y[j]
        acc += lin[i]
        if sigma != 0.0:
            acc += sigma * nx[i]
        gx[i] = acc
    for j in range(d2):
        acc = 0.0
        for i in range(d1):
            acc += coup[i, j] * x[i]
        acc -= mu * y[j]
        if sigma != 0.0:
            acc += sigma * ny[j]
        gy[j] = acc


cdef void _col_mean(const double[:, ::1] noise, double[::1] out) noexcept nogil:
    cdef Py_ssize_t rows = noise.shape[0], cols = noise.shape[1], r, j
    for j in range(cols):
        out[j] = 0.0
    for r in range(rows):
        for j in range(cols):
            out[j] += noise[r, j]
    for j in range(cols):
        out[j] /= rows


def quad_batch_grads(const double[:, ::1] hess, const double[::1] lin,
                     const double[:, ::1] coup, double mu, double sigma,
                     const double[::1] x, const double[::1] y,
                     const double[:, ::1] noise):
    cdef Py_ssize_t d1 = x.shape[0], d2 = y.shape[0]
    nm = np.empty(d1 + d2)
    gx = np.empty(d1)
    gy = np.empty(d2)
    cdef double[::1] nm_v = nm, gx_v = gx, gy_v = gy
    with nogil:
        _col_mean(noise, nm_v)
        _grads(hess, lin, coup, mu, sigma, x, y, nm_v[:d1], nm_v[d1:], gx_v, gy_v)
    return gx, gy


cdef void _vr_update(const double[:, ::1] hess, const double[::1] lin,
                     const double[:, ::1] coup, double mu, double sigma,
                     const double[::1] x, const double[::1] y,
                     double[::1] px, double[::1] py,
                     double[::1] u, double[::1] v,
                     const double[:, ::1] noise, double alpha, double beta,
                     double[::1] s) noexcept nogil:
    cdef Py_ssize_t d1 = x.shape[0], d2 = y.shape[0], i
    cdef double[::1] nx = s[:d1], ny = s[d1:d1 + d2]
    cdef double[::1] gxn = s[d1 + d2:2 * d1 + d2], gyn = s[2 * d1 + d2:2 * d1 + 2 * d2]
    cdef double[::1] gxo = s[2 * (d1 + d2):3 * d1 + 2 * d2], gyo = s[3 * d1 + 2 * d2:]
    cdef double ca = 1.0 - alpha, cb = 1.0 - beta, t
    _col_mean(noise, s[:d1 + d2])
    _grads(hess, lin, coup, mu, sigma, x, y, nx, ny, gxn, gyn)
    _grads(hess, lin, coup, mu, sigma, px, py, nx, ny, gxo, gyo)
    for i in range(d1):
        t = u[i] - gxo[i]
        u[i] = gxn[i] + ca * t
        px[i] = x[i]
    for i in range(d2):
        t = v[i] - gyo[i]
        v[i] = gyn[i] + cb * t
        py[i] = y[i]


def quad_vr_update(const double[:, ::1] hess, const double[::1] lin,
                   const double[:, ::1] coup, double mu, double sigma,
                   const double[::1] x, const double[::1] y,
                   double[::1] px, double[::1] py,
                   double[::1] u, double[::1] v,
                   const double[:, ::1] noise, double alpha, double beta):
    cdef Py_ssize_t d1 = x.shape[0], d2 = y.shape[0]
    scratch = np.empty(3 * (d1 + d2))
    cdef double[::1] s = scratch
    with nogil:
        _vr_update(hess, lin, coup, mu, sigma, x, y, px, py, u, v, noise, alpha, beta, s)


def quad_vr_round(const double[:, ::1] hess, const double[:, ::1] lin_rows,
                  const double[:, ::1] coup, double mu, double sigma,
                  double[:, ::1] X, double[:, ::1] Y,
                  double[:, ::1] PX, double[:, ::1] PY,
                  double[:, ::1] U, double[:, ::1] V,
                  const double[:, :, ::1] noise, double alpha, double beta,
                  double step_x, double step_y, int do_step):
    cdef Py_ssize_t d1 = X.shape[1], d2 = Y.shape[1], n = X.shape[0], k, i
    scratch = np.empty(3 * (d1 + d2))
    cdef double[::1] s = scratch
    with nogil:
        for k in range(n):
            _vr_update(hess, lin_rows[k], coup, mu, sigma, X[k], Y[k],
                       PX[k], PY[k], U[k], V[k], noise[k], alpha, beta, s)
            if do_step:
                for i in range(d1):
                    X[k, i] = X[k, i] - step_x * U[k, i]
                for i in range(d2):
                    Y[k, i] = Y[k, i] + step_y * V[k, i]
