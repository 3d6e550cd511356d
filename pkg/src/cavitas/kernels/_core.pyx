# cython: language_level=3
"""Compiled propagation kernels; mirrors kernels._pure exactly (same API, same
stepping rules, no randomness)."""

from libc.math cimport sqrt as c_sqrt

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()


def apply_h(amps, cpl, double g, out=None):
    """(H/hbar)|psi> for H = (g/2)(J+ a + J- a+) on the amplitude grid amps[i, n]."""
    a = np.ascontiguousarray(amps, dtype=np.complex128)
    c = np.ascontiguousarray(cpl, dtype=np.float64)
    if out is None:
        out = np.zeros_like(a)
    else:
        out[:] = 0.0
    _apply_h_impl(a, c, g, out)
    return out


@cython.boundscheck(False)
@cython.wraparound(False)
cdef void _apply_h_impl(double complex[:, ::1] a, double[::1] cpl, double g,
                        double complex[:, ::1] out) nogil:
    cdef Py_ssize_t dm = a.shape[0]
    cdef Py_ssize_t dn = a.shape[1]
    cdef Py_ssize_t i, n
    cdef double hg = 0.5 * g
    for i in range(dm):
        for n in range(dn):
            out[i, n] = 0.0
            if i > 0 and n + 1 < dn:
                out[i, n] = out[i, n] + hg * cpl[i - 1] * c_sqrt(n + 1.0) * a[i - 1, n + 1]
            if i + 1 < dm and n > 0:
                out[i, n] = out[i, n] + hg * cpl[i] * c_sqrt(<double> n) * a[i + 1, n - 1]


cdef class StepEngine:
    """Fixed-step AB4 propagator with RK4 bootstrap for d psi/dt = -i H psi - (w/2) psi."""

    cdef public double g
    cdef public double dt
    cdef Py_ssize_t dm, dn
    cdef int hist_len, hist_head
    cdef bint has_decay
    cdef double _norm2, _norm2_prev
    cdef double[::1] cpl
    cdef double[::1] decay_w
    cdef double[::1] sq
    cdef double complex[:, ::1] y
    cdef double complex[:, ::1] y_prev
    cdef double complex[:, ::1] k2
    cdef double complex[:, ::1] k3
    cdef double complex[:, ::1] ytmp
    cdef double complex[:, :, ::1] hist

    def __init__(self, cpl, decay_w, double g, double dt):
        self.cpl = np.ascontiguousarray(cpl, dtype=np.float64)
        self.decay_w = np.ascontiguousarray(decay_w, dtype=np.float64)
        self.g = g
        self.dt = dt
        self.dm = self.cpl.shape[0] + 1
        self.dn = self.decay_w.shape[0]
        self.sq = np.sqrt(np.arange(self.dn, dtype=np.float64))
        self.y = np.zeros((self.dm, self.dn), dtype=np.complex128)
        self.y_prev = np.zeros((self.dm, self.dn), dtype=np.complex128)
        self.k2 = np.zeros((self.dm, self.dn), dtype=np.complex128)
        self.k3 = np.zeros((self.dm, self.dn), dtype=np.complex128)
        self.ytmp = np.zeros((self.dm, self.dn), dtype=np.complex128)
        self.hist = np.zeros((4, self.dm, self.dn), dtype=np.complex128)
        self.hist_len = 0
        self.hist_head = 0
        self.has_decay = bool(np.any(np.asarray(self.decay_w)))
        self._norm2 = 0.0
        self._norm2_prev = 0.0

    # -- state access ------------------------------------------------------------

    def set_state(self, amps):
        a = np.ascontiguousarray(amps, dtype=np.complex128)
        if a.shape != (self.dm, self.dn):
            raise ValueError(f"state shape {a.shape} != {(self.dm, self.dn)}")
        np.asarray(self.y)[:] = a
        self.hist_len = 0
        self._norm2 = self._compute_norm2(self.y)
        self._norm2_prev = self._norm2

    def get_state(self):
        return np.asarray(self.y).copy()

    def get_prev_state(self):
        return np.asarray(self.y_prev).copy()

    @property
    def norm2(self):
        return self._norm2

    @property
    def norm2_prev(self):
        return self._norm2_prev

    def renormalize(self):
        cdef double drift = abs(1.0 - self._norm2)
        cdef double scale = 1.0 / c_sqrt(self._norm2)
        np.asarray(self.y)[:] = np.asarray(self.y) * scale
        np.asarray(self.hist)[:] = np.asarray(self.hist) * scale
        self._norm2 = self._compute_norm2(self.y)
        return drift

    # -- internals ---------------------------------------------------------------

    @cython.boundscheck(False)
    @cython.wraparound(False)
    cdef double _compute_norm2(self, double complex[:, ::1] v) nogil:
        cdef Py_ssize_t i, n
        cdef double acc = 0.0
        cdef double complex z
        for i in range(self.dm):
            for n in range(self.dn):
                z = v[i, n]
                acc += z.real * z.real + z.imag * z.imag
        return acc

    @cython.boundscheck(False)
    @cython.wraparound(False)
    cdef void _rhs(self, double complex[:, ::1] v, double complex[:, ::1] out) nogil:
        # out = -i H v - (w/2) v
        cdef Py_ssize_t i, n
        cdef double hg = 0.5 * self.g
        cdef double complex acc
        for i in range(self.dm):
            for n in range(self.dn):
                acc = 0.0
                if i > 0 and n + 1 < self.dn:
                    acc = acc + hg * self.cpl[i - 1] * self.sq[n + 1] * v[i - 1, n + 1]
                if i + 1 < self.dm and n > 0:
                    acc = acc + hg * self.cpl[i] * self.sq[n] * v[i + 1, n - 1]
                acc = acc * (-1j)
                if self.has_decay:
                    acc = acc - 0.5 * self.decay_w[n] * v[i, n]
                out[i, n] = acc

    @cython.boundscheck(False)
    @cython.wraparound(False)
    cdef void _rk4_step(self, double complex[:, ::1] f0, double h) nogil:
        # y <- y + (h/6)(k1 + 2 k2 + 2 k3 + k4), k1 = f0.  _rhs reads only
        # neighbors of its input, so input and output must never alias.
        cdef Py_ssize_t i, n
        cdef double half = 0.5 * h
        cdef double sixth = h / 6.0
        for i in range(self.dm):
            for n in range(self.dn):
                self.ytmp[i, n] = self.y[i, n] + half * f0[i, n]
        self._rhs(self.ytmp, self.k2)
        for i in range(self.dm):
            for n in range(self.dn):
                self.ytmp[i, n] = self.y[i, n] + half * self.k2[i, n]
        self._rhs(self.ytmp, self.k3)
        for i in range(self.dm):
            for n in range(self.dn):
                self.ytmp[i, n] = self.y[i, n] + h * self.k3[i, n]
        # k4 into k2 slot after folding k2 into the accumulator is not possible in
        # one pass; accumulate k1 + 2k2 + 2k3 first, then add k4.
        for i in range(self.dm):
            for n in range(self.dn):
                self.k3[i, n] = f0[i, n] + 2.0 * self.k2[i, n] + 2.0 * self.k3[i, n]
        self._rhs(self.ytmp, self.k2)     # k4
        for i in range(self.dm):
            for n in range(self.dn):
                self.y[i, n] = self.y[i, n] + sixth * (self.k3[i, n] + self.k2[i, n])

    @cython.boundscheck(False)
    @cython.wraparound(False)
    cdef double _step_once(self) nogil:
        cdef Py_ssize_t i, n
        cdef int i0, i1, i2, i3
        cdef double c0 = self.dt * 55.0 / 24.0
        cdef double c1 = self.dt * -59.0 / 24.0
        cdef double c2 = self.dt * 37.0 / 24.0
        cdef double c3 = self.dt * -9.0 / 24.0
        cdef double acc = 0.0
        cdef double complex z
        for i in range(self.dm):
            for n in range(self.dn):
                self.y_prev[i, n] = self.y[i, n]
        self._norm2_prev = self._norm2
        self.hist_head = (self.hist_head + 1) % 4
        self._rhs(self.y, self.hist[self.hist_head])
        if self.hist_len >= 3:
            i0 = self.hist_head
            i1 = (i0 + 3) % 4
            i2 = (i0 + 2) % 4
            i3 = (i0 + 1) % 4
            for i in range(self.dm):
                for n in range(self.dn):
                    z = self.y[i, n] + (c0 * self.hist[i0, i, n] + c1 * self.hist[i1, i, n]
                                        + c2 * self.hist[i2, i, n] + c3 * self.hist[i3, i, n])
                    self.y[i, n] = z
                    acc += z.real * z.real + z.imag * z.imag
        else:
            self._rk4_step(self.hist[self.hist_head], self.dt)
            acc = self._compute_norm2(self.y)
        if self.hist_len < 4:
            self.hist_len += 1
        self._norm2 = acc
        return acc

    # -- public stepping ---------------------------------------------------------

    def step_once(self):
        self._step_once()

    def run(self, Py_ssize_t nsteps, double threshold=-1.0):
        cdef Py_ssize_t k
        cdef int crossed = 0
        cdef Py_ssize_t done = nsteps
        with nogil:
            for k in range(nsteps):
                self._step_once()
                if threshold >= 0.0 and self._norm2 < threshold:
                    done = k + 1
                    crossed = 1
                    break
        return done, bool(crossed)

    def rk4_once(self, double h):
        cdef Py_ssize_t i, n
        with nogil:
            for i in range(self.dm):
                for n in range(self.dn):
                    self.y_prev[i, n] = self.y[i, n]
            self._norm2_prev = self._norm2
            self._rhs(self.y, self.hist[0])
            self._rk4_step(self.hist[0], h)
            self._norm2 = self._compute_norm2(self.y)
        self.hist_len = 0
        self.hist_head = 0

    # -- jump operators ----------------------------------------------------------

    def apply_lowering(self):
        cdef Py_ssize_t i, n
        with nogil:
            for i in range(self.dm):
                for n in range(self.dn - 1):
                    self.y[i, n] = self.sq[n + 1] * self.y[i, n + 1]
                self.y[i, self.dn - 1] = 0.0
            self._norm2 = self._compute_norm2(self.y)
        self.hist_len = 0

    def apply_raising(self):
        cdef Py_ssize_t i, n
        with nogil:
            for i in range(self.dm):
                for n in range(self.dn - 1, 0, -1):
                    self.y[i, n] = self.sq[n] * self.y[i, n - 1]
                self.y[i, 0] = 0.0
            self._norm2 = self._compute_norm2(self.y)
        self.hist_len = 0

    def mean_photon_weights(self):
        cdef Py_ssize_t i, n
        cdef double ntot = 0.0, tot = 0.0
        cdef double complex z
        with nogil:
            for i in range(self.dm):
                for n in range(self.dn):
                    z = self.y[i, n]
                    tot += z.real * z.real + z.imag * z.imag
                    ntot += n * (z.real * z.real + z.imag * z.imag)
        return ntot, ntot + tot
