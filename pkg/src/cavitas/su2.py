"""Collective spin algebra on the symmetric (Dicke) subspace of N two-level atoms.

The N atoms couple identically to the mode, so only the maximal-spin sector
J = N/2 is ever populated.  Basis orders the projections ascending,
index i <-> m = -J + i, so matrices act on vectors of length N + 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, lgamma, log, sqrt

import numpy as np

from .errors import ConfigurationError, DomainError

# Beyond this the alternating rotation sum loses too many digits to cancellation
# (relative error roughly 4^J * eps; ~1e-7 at N=40).
MAX_ATOMS = 40


@dataclass(frozen=True)
class SpinQuantum:
    """Collective spin sector of N two-level atoms: J = N/2."""

    n_atoms: int

    def __post_init__(self) -> None:
        if not isinstance(self.n_atoms, (int, np.integer)) or self.n_atoms < 1:
            raise ConfigurationError(f"atom count must be a positive integer, got {self.n_atoms!r}")
        if self.n_atoms > MAX_ATOMS:
            raise DomainError(f"atom count {self.n_atoms} exceeds supported maximum {MAX_ATOMS}")

    @property
    def j(self) -> float:
        return 0.5 * self.n_atoms

    @property
    def dim(self) -> int:
        """Dicke-basis dimension N + 1."""
        return self.n_atoms + 1

    @property
    def twice_m(self) -> np.ndarray:
        """2m as exact integers, ascending: -N, -N+2, ..., N."""
        return np.arange(-self.n_atoms, self.n_atoms + 1, 2)

    @property
    def m_values(self) -> np.ndarray:
        """Projections m = -J..J ascending (floats, exact for half-integers)."""
        return 0.5 * self.twice_m

    def index_of(self, m: float) -> int:
        """Basis index of projection m; raises DomainError if m is not a valid projection."""
        tm = int(round(2.0 * m))
        if abs(2.0 * m - tm) > 1e-9 or (tm + self.n_atoms) % 2 != 0:
            raise DomainError(f"m={m} is not a projection of J={self.j}")
        i = (tm + self.n_atoms) // 2
        if not 0 <= i <= self.n_atoms:
            raise DomainError(f"m={m} outside -J..J for J={self.j}")
        return i

    def ladder_coupling(self) -> np.ndarray:
        """Couplings sqrt(J(J+1) - m(m+1)) between index i and i+1, length N."""
        j = self.j
        m = self.m_values[:-1]
        return np.sqrt(j * (j + 1.0) - m * (m + 1.0))


def jz_matrix(spin: SpinQuantum) -> np.ndarray:
    return np.diag(spin.m_values)


def jplus_matrix(spin: SpinQuantum) -> np.ndarray:
    jp = np.zeros((spin.dim, spin.dim))
    cpl = spin.ladder_coupling()
    for i in range(spin.dim - 1):
        jp[i + 1, i] = cpl[i]
    return jp


def jminus_matrix(spin: SpinQuantum) -> np.ndarray:
    return jplus_matrix(spin).T


def collective_operators(spin: SpinQuantum) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense (Jz, J+, J-) on the ascending-m Dicke basis."""
    return jz_matrix(spin), jplus_matrix(spin), jminus_matrix(spin)


def _log_factorial(n: int) -> float:
    return lgamma(n + 1.0)


def rotation_matrix(spin: SpinQuantum) -> np.ndarray:
    """Matrix elements R[m, m'] = <J,m'| exp(i pi Jy / 2) |J,m> on the ascending-m basis.

    Evaluated as the Wigner small-d function at pi/2 with log-space factorials,
    so the entries stay finite and accurate up to MAX_ATOMS.  The m' = J column
    reduces to the closed form 2^-J sqrt((2J)!/((J-m)!(J+m)!)), and R is
    orthogonal with R^-1 = R^T.
    """
    n = spin.n_atoms
    dim = spin.dim
    r = np.empty((dim, dim))
    lf = [_log_factorial(k) for k in range(n + 1)]
    log2 = log(2.0)
    for i in range(dim):          # row: m = -J + i, so J+m = i, J-m = n-i
        for k in range(dim):      # col: m' = -J + k
            # d^J_{m,m'}(pi/2): sum over s with all four factorial arguments >= 0
            s_lo = max(0, k - i)
            s_hi = min(n - i, k)
            pref = 0.5 * (lf[i] + lf[n - i] + lf[k] + lf[n - k]) - 0.5 * n * log2
            acc = 0.0
            for s in range(s_lo, s_hi + 1):
                # m - m' + s = i - k + s  (>= 0 in range)
                term = pref - (lf[k - s] + lf[s] + lf[n - i - s] + lf[i - k + s])
                acc += (-1.0) ** (i - k + s) * exp(term)
            r[i, k] = acc
    return r


def rotation_column_closed_form(spin: SpinQuantum) -> np.ndarray:
    """The m' = J column R[m, J] = 2^-J sqrt((2J)!/((J-m)!(J+m)!))."""
    n = spin.n_atoms
    out = np.empty(spin.dim)
    for i in range(spin.dim):
        lg = 0.5 * (_log_factorial(n) - _log_factorial(n - i) - _log_factorial(i))
        out[i] = exp(lg - 0.5 * n * log(2.0))
    return out
