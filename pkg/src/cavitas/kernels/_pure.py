"""Reference numpy implementation of the propagation kernels.

The compiled backend (`_core.pyx`) mirrors this module function-for-function;
both are driven through `cavitas.kernels`.  No randomness lives here: jump
decisions and thresholds are handled by the caller, which keeps the draw-order
contract identical across backends.
"""

from __future__ import annotations

import math

import numpy as np


def apply_h(amps: np.ndarray, cpl: np.ndarray, g: float, out: np.ndarray | None = None) -> np.ndarray:
    """(H/hbar)|psi> for H = (g/2)(J+ a + J- a+) on the amplitude grid amps[i, n].

    cpl[i] couples atomic indices i <-> i+1.  Out-of-range ladder terms vanish
    (truncation at the top Fock level).
    """
    dm, dn = amps.shape
    if out is None:
        out = np.zeros_like(amps)
    else:
        out[:] = 0.0
    hg = 0.5 * g
    sq = np.sqrt(np.arange(dn))
    # J+ a  : (i-1, n+1) -> (i, n)
    out[1:, : dn - 1] += hg * cpl[:, None] * sq[1:][None, :] * amps[: dm - 1, 1:]
    # J- a+ : (i+1, n-1) -> (i, n)
    out[: dm - 1, 1:] += hg * cpl[:, None] * sq[1:][None, :] * amps[1:, : dn - 1]
    return out


class StepEngine:
    """Fixed-step AB4 propagator with RK4 bootstrap for d psi/dt = -i H psi - (w/2) psi.

    Time is dimensionless (units of 1/g applied by the caller through dt and g).
    `run` advances whole steps and reports early if the squared norm falls below
    a threshold (waiting-time jump sampling); the states on both sides of the
    crossing step stay accessible for bracketing.  Any discontinuity (jump, echo
    pulse, renormalization with scaling of the stored derivatives) restarts the
    multistep history.
    """

    def __init__(self, cpl: np.ndarray, decay_w: np.ndarray, g: float, dt: float) -> None:
        self.cpl = np.ascontiguousarray(cpl, dtype=np.float64)
        self.decay_w = np.ascontiguousarray(decay_w, dtype=np.float64)
        self.g = float(g)
        self.dt = float(dt)
        self.dm = len(self.cpl) + 1
        self.dn = len(self.decay_w)
        shape = (self.dm, self.dn)
        self._y = np.zeros(shape, dtype=np.complex128)
        self._y_prev = np.zeros(shape, dtype=np.complex128)
        self._hist = np.zeros((4, *shape), dtype=np.complex128)
        self._scratch = np.zeros(shape, dtype=np.complex128)
        self._hist_len = 0
        self._hist_head = 0          # slot holding f at the current point once pushed
        self._norm2 = 0.0
        self._norm2_prev = 0.0
        self._sq = np.sqrt(np.arange(self.dn))

    # -- state access ------------------------------------------------------------

    def set_state(self, amps: np.ndarray) -> None:
        if amps.shape != self._y.shape:
            raise ValueError(f"state shape {amps.shape} != {self._y.shape}")
        self._y[:] = amps
        self._hist_len = 0
        self._norm2 = float(np.vdot(self._y, self._y).real)
        self._norm2_prev = self._norm2

    def get_state(self) -> np.ndarray:
        return self._y.copy()

    def get_prev_state(self) -> np.ndarray:
        return self._y_prev.copy()

    @property
    def norm2(self) -> float:
        return self._norm2

    @property
    def norm2_prev(self) -> float:
        return self._norm2_prev

    def renormalize(self) -> float:
        """Scale state (and derivative history) to unit norm; returns |1 - norm^2| before scaling."""
        drift = abs(1.0 - self._norm2)
        scale = 1.0 / math.sqrt(self._norm2)
        self._y *= scale
        self._hist *= scale
        self._norm2 = float(np.vdot(self._y, self._y).real)
        return drift

    # -- stepping ----------------------------------------------------------------

    def _rhs(self, y: np.ndarray, out: np.ndarray) -> None:
        apply_h(y, self.cpl, self.g, out)
        out *= -1j
        if self.decay_w.any():
            out -= 0.5 * self.decay_w[None, :] * y

    def _push_rhs(self) -> np.ndarray:
        self._hist_head = (self._hist_head + 1) % 4
        f = self._hist[self._hist_head]
        self._rhs(self._y, f)
        return f

    def _rk4_from(self, f0: np.ndarray, h: float) -> None:
        y = self._y
        k = self._scratch
        acc = f0.copy()                      # k1 weight 1
        self._rhs(y + 0.5 * h * f0, k)       # k2
        acc += 2.0 * k
        self._rhs(y + 0.5 * h * k, k)        # k3
        acc += 2.0 * k
        self._rhs(y + h * k, k)              # k4
        acc += k
        y += (h / 6.0) * acc

    def step_once(self) -> None:
        """One grid step: AB4 when four derivatives are banked, RK4 otherwise."""
        self._y_prev[:] = self._y
        self._norm2_prev = self._norm2
        f = self._push_rhs()
        if self._hist_len >= 3:
            h = self._hist
            i0 = self._hist_head
            self._y += (self.dt / 24.0) * (
                55.0 * h[i0] - 59.0 * h[(i0 - 1) % 4] + 37.0 * h[(i0 - 2) % 4] - 9.0 * h[(i0 - 3) % 4]
            )
        else:
            self._rk4_from(f, self.dt)
        if self._hist_len < 4:
            self._hist_len += 1
        self._norm2 = float(np.vdot(self._y, self._y).real)

    def run(self, nsteps: int, threshold: float = -1.0) -> tuple[int, bool]:
        """Advance up to nsteps; stop right after the first step whose norm^2 < threshold."""
        for k in range(nsteps):
            self.step_once()
            if threshold >= 0.0 and self._norm2 < threshold:
                return k + 1, True
        return nsteps, False

    def rk4_once(self, h: float) -> None:
        """Single RK4 step of arbitrary size (jump-time refinement); clears the AB history."""
        self._y_prev[:] = self._y
        self._norm2_prev = self._norm2
        f = self._scratch.copy()
        self._rhs(self._y, f)
        self._rk4_from(f, h)
        self._hist_len = 0
        self._norm2 = float(np.vdot(self._y, self._y).real)

    # -- jump operators ----------------------------------------------------------

    def apply_lowering(self) -> None:
        """a |psi> in place (unnormalized); clears the AB history."""
        y = self._y
        y[:, : self.dn - 1] = self._sq[1:][None, :] * y[:, 1:]
        y[:, self.dn - 1] = 0.0
        self._hist_len = 0
        self._norm2 = float(np.vdot(y, y).real)

    def apply_raising(self) -> None:
        """a+ |psi> in place (unnormalized, top level truncated); clears the AB history."""
        y = self._y
        y[:, 1:] = self._sq[1:][None, :] * y[:, : self.dn - 1]
        y[:, 0] = 0.0
        self._hist_len = 0
        self._norm2 = float(np.vdot(y, y).real)

    def mean_photon_weights(self) -> tuple[float, float]:
        """(<n>, <n>+1) times norm^2 of the current state, for thermal channel weights."""
        w = np.einsum("in,in->n", self._y, self._y.conj()).real
        n_tot = float((np.arange(self.dn) * w).sum())
        return n_tot, n_tot + float(w.sum())
