# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: character-series heat kernel and the SL(2, C) stepper.

Same contracts as ``_kernels_py``; results agree to rounding.
"""
import numpy as np
cimport numpy as cnp

cdef extern from "<complex.h>" nogil:
    double complex cexp(double complex)
    double complex csqrt(double complex)
    double complex ccosh(double complex)
    double complex csinh(double complex)
    double cabs(double complex)

cdef extern from "<math.h>" nogil:
    double hypot(double, double)

NAME = "cython"


def heat_series(traces, tau, int nmax):
    T = np.ascontiguousarray(np.ravel(traces), dtype=np.complex128)
    cdef Py_ssize_t npts = T.shape[0]
    cdef const double[:, ::1] t = T.view(np.float64).reshape(npts, 2)
    out = np.empty(npts, dtype=np.complex128)
    cdef double[:, ::1] acc = out.view(np.float64).reshape(npts, 2)
    n_ = np.arange(max(nmax + 1, 2))
    coef = np.ascontiguousarray((n_ * np.exp(-complex(tau) * (n_ * n_ - 1) / 4.0)).view(np.float64))
    cdef const double[::1] c = coef
    cdef double tr, ti, pr, pi, qr, qi, xr, xi, ar, ai
    cdef Py_ssize_t i
    cdef int n
    with nogil:
        for i in range(npts):
            tr = t[i, 0]
            ti = t[i, 1]
            pr = 0.0
            pi = 0.0
            qr = 1.0
            qi = 0.0
            ar = 1.0
            ai = 0.0
            for n in range(2, nmax + 1):
                xr = tr * qr - ti * qi - pr
                xi = tr * qi + ti * qr - pi
                pr = qr
                pi = qi
                qr = xr
                qi = xi
                ar = ar + c[2 * n] * xr - c[2 * n + 1] * xi
                ai = ai + c[2 * n] * xi + c[2 * n + 1] * xr
            acc[i, 0] = ar
            acc[i, 1] = ai
    return out.reshape(np.shape(traces))


# Taylor coefficients 1/((2k-1)2k) and 1/(2k(2k+1)), k = 0..11
cdef double CH_R[12]
cdef double SH_R[12]
for _k in range(1, 12):
    CH_R[_k] = 1.0 / ((2.0 * _k - 1.0) * (2.0 * _k))
    SH_R[_k] = 1.0 / ((2.0 * _k) * (2.0 * _k + 1.0))


cdef struct c2:
    double re
    double im


cdef inline c2 _mul(c2 a, c2 b) noexcept nogil:
    cdef c2 r
    r.re = a.re * b.re - a.im * b.im
    r.im = a.re * b.im + a.im * b.re
    return r


cdef inline c2 _fma(c2 a, c2 b, c2 c) noexcept nogil:
    # a * b + c
    cdef c2 r
    r.re = a.re * b.re - a.im * b.im + c.re
    r.im = a.re * b.im + a.im * b.re + c.im
    return r


cdef inline void _expm_traceless(c2* a, c2* e) noexcept nogil:
    # A^2 = delta I; cosh(sqrt delta) and sinh(sqrt delta)/sqrt delta are entire in delta
    cdef c2 delta, ch, sh, t, one
    cdef double complex zd, r, zc, zs
    cdef double mag2
    cdef int k, terms
    t = _mul(a[1], a[2])
    delta = _mul(a[0], a[3])
    delta.re = t.re - delta.re
    delta.im = t.im - delta.im
    mag2 = delta.re * delta.re + delta.im * delta.im
    if mag2 < 1.0:
        if mag2 < 1e-4:
            terms = 5
        elif mag2 < 0.09:
            terms = 8
        else:
            terms = 11
        one.re = 1.0
        one.im = 0.0
        ch = one
        sh = one
        for k in range(terms, 0, -1):
            t.re = delta.re * CH_R[k]
            t.im = delta.im * CH_R[k]
            ch = _fma(ch, t, one)
            t.re = delta.re * SH_R[k]
            t.im = delta.im * SH_R[k]
            sh = _fma(sh, t, one)
    else:
        zd = delta.re + 1j * delta.im
        r = csqrt(zd)
        zc = ccosh(r)
        zs = csinh(r) / r
        ch.re = zc.real
        ch.im = zc.imag
        sh.re = zs.real
        sh.im = zs.imag
    e[0] = _fma(sh, a[0], ch)
    e[1] = _mul(sh, a[1])
    e[2] = _mul(sh, a[2])
    e[3] = _fma(sh, a[3], ch)


def sde_endpoints(V, xi, scale, int block):
    cdef const double[:, :, ::1] Vr = np.ascontiguousarray(
        np.asarray(V, dtype=np.complex128).view(np.float64).reshape(len(V), 4, 2))
    cdef const double[:, :, ::1] X = np.ascontiguousarray(xi, dtype=np.float64)
    cdef const double[:, ::1] S = np.ascontiguousarray(
        np.broadcast_to(scale, (X.shape[0], X.shape[2])), dtype=np.float64)
    cdef Py_ssize_t n_steps = X.shape[0], n_paths = X.shape[1], k = X.shape[2]
    if block < 1 or k % block or Vr.shape[0] != k:
        raise ValueError("field count must match xi and be a multiple of block")
    out = np.zeros((n_paths, 2, 2), dtype=np.complex128)
    cdef double[:, ::1] Z = out.view(np.float64).reshape(n_paths, 8)
    cdef Py_ssize_t p, m, j, g, gi, q, ng = k // block
    cdef c2 a[4]
    cdef c2 e[4]
    cdef c2 z[4]
    cdef c2 det
    cdef double worst = 0.0, dev, c
    for p in range(n_paths):
        Z[p, 0] = 1.0
        Z[p, 6] = 1.0
    with nogil:
        # step-major so each step reads one contiguous slab of xi
        for m in range(n_steps):
            for p in range(n_paths):
                for q in range(4):
                    z[q].re = Z[p, 2 * q]
                    z[q].im = Z[p, 2 * q + 1]
                for gi in range(ng):
                    g = gi * block
                    for q in range(4):
                        a[q].re = 0.0
                        a[q].im = 0.0
                    for j in range(g, g + block):
                        c = S[m, j] * X[m, p, j]
                        for q in range(4):
                            a[q].re = a[q].re + c * Vr[j, q, 0]
                            a[q].im = a[q].im + c * Vr[j, q, 1]
                    _expm_traceless(a, e)
                    a[0] = _fma(z[0], e[0], _mul(z[1], e[2]))
                    a[1] = _fma(z[0], e[1], _mul(z[1], e[3]))
                    a[2] = _fma(z[2], e[0], _mul(z[3], e[2]))
                    a[3] = _fma(z[2], e[1], _mul(z[3], e[3]))
                    for q in range(4):
                        z[q] = a[q]
                for q in range(4):
                    Z[p, 2 * q] = z[q].re
                    Z[p, 2 * q + 1] = z[q].im
                det = _mul(z[0], z[3])
                a[0] = _mul(z[1], z[2])
                dev = hypot(det.re - a[0].re - 1.0, det.im - a[0].im)
                if dev > worst:
                    worst = dev
    return out, worst
