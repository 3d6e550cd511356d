"""Truncated Dicke (x) Fock representation: state constructors and observables.

Joint amplitudes are stored as a dense complex array amps[i, n] multiplying
|J, m_i> (x) |n>, with the atomic index ascending in m and n the photon number.
At the scales treated here the joint dimension stays in the hundreds, so no
sparsity machinery is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, TruncationError
from .su2 import SpinQuantum


def default_cutoff(nbar: float) -> int:
    """Fock cutoff keeping the Poisson tail mass negligible (< 1e-10 up to nbar ~ 40)."""
    if nbar < 0:
        raise ConfigurationError(f"mean photon number must be >= 0, got {nbar}")
    return math.ceil(nbar + 8.0 * math.sqrt(nbar) + 10.0)


@dataclass(frozen=True)
class FockCutoff:
    """Highest retained photon number."""

    nmax: int

    def __post_init__(self) -> None:
        if not isinstance(self.nmax, (int, np.integer)) or self.nmax < 0:
            raise ConfigurationError(f"nmax must be a nonnegative integer, got {self.nmax!r}")

    @property
    def dim(self) -> int:
        return self.nmax + 1

    def require_coherent(self, alpha: complex) -> None:
        """Reject amplitudes whose Poisson tail would spill over the cutoff."""
        a = abs(alpha)
        need = a * a + 8.0 * a
        if need > self.nmax:
            raise TruncationError(
                f"cutoff nmax={self.nmax} too small for |alpha|={a:.4g}; need nmax >= {math.ceil(need)}"
            )


def coherent_field_state(alpha: complex, cutoff: FockCutoff) -> np.ndarray:
    """Truncated coherent state |alpha>, renormalized; amplitudes via log-space Poisson weights."""
    cutoff.require_coherent(alpha)
    n = np.arange(cutoff.dim)
    a = abs(alpha)
    if a == 0.0:
        out = np.zeros(cutoff.dim, dtype=np.complex128)
        out[0] = 1.0
        return out
    log_mag = -0.5 * a * a + n * math.log(a) - 0.5 * np.array([math.lgamma(k + 1.0) for k in range(cutoff.dim)])
    phase = n * np.angle(alpha)
    out = np.exp(log_mag + 1j * phase)
    out /= np.linalg.norm(out)
    return out


@dataclass
class JointState:
    """Complex amplitudes over the truncated Dicke (x) Fock product basis."""

    amps: np.ndarray
    spin: SpinQuantum
    cutoff: FockCutoff

    def __post_init__(self) -> None:
        want = (self.spin.dim, self.cutoff.dim)
        if self.amps.shape != want:
            raise ConfigurationError(f"amplitude array shape {self.amps.shape} != {want}")
        if self.amps.dtype != np.complex128:
            self.amps = self.amps.astype(np.complex128)

    def copy(self) -> "JointState":
        return JointState(self.amps.copy(), self.spin, self.cutoff)

    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def normalized(self) -> "JointState":
        return JointState(self.amps / math.sqrt(self.norm2()), self.spin, self.cutoff)

    def population(self, m: float) -> float:
        """P(m) = sum_n |amps[m, n]|^2 / norm^2."""
        i = self.spin.index_of(m)
        row = self.amps[i]
        return float(np.vdot(row, row).real / self.norm2())

    def populations(self) -> np.ndarray:
        p = np.einsum("in,in->i", self.amps, self.amps.conj()).real
        return p / p.sum()

    def mean_photon(self) -> float:
        n = np.arange(self.cutoff.dim)
        w = np.einsum("in,in->n", self.amps, self.amps.conj()).real
        return float((n * w).sum() / w.sum())

    def excitation_expectation(self) -> float:
        """<Jz + a+a>, the conserved total excitation (invariant under the coupled evolution)."""
        w_atom = np.einsum("in,in->i", self.amps, self.amps.conj()).real
        w_field = np.einsum("in,in->n", self.amps, self.amps.conj()).real
        norm = w_atom.sum()
        return float((self.spin.m_values * w_atom).sum() / norm + (np.arange(self.cutoff.dim) * w_field).sum() / norm)

    def top_level_leakage(self, levels: int = 5) -> float:
        """Probability resting in the top `levels` Fock states (truncation health check)."""
        block = self.amps[:, -levels:]
        return float(np.vdot(block, block).real / self.norm2())


def product_state(atomic: np.ndarray, field: np.ndarray, spin: SpinQuantum, cutoff: FockCutoff) -> JointState:
    atomic = np.asarray(atomic, dtype=np.complex128)
    field = np.asarray(field, dtype=np.complex128)
    if atomic.shape != (spin.dim,) or field.shape != (cutoff.dim,):
        raise ConfigurationError(
            f"dimension mismatch: atomic {atomic.shape} vs {(spin.dim,)}, field {field.shape} vs {(cutoff.dim,)}"
        )
    for name, vec in (("atomic", atomic), ("field", field)):
        if abs(np.vdot(vec, vec).real - 1.0) > 1e-6:
            raise ConfigurationError(f"{name} factor must be normalized")
    return JointState(np.outer(atomic, field), spin, cutoff)


def basis_product_state(m: float, n: int, spin: SpinQuantum, cutoff: FockCutoff) -> JointState:
    """|J, m> (x) |n>."""
    if not 0 <= n <= cutoff.nmax:
        raise DomainError(f"photon number {n} outside 0..{cutoff.nmax}")
    amps = np.zeros((spin.dim, cutoff.dim), dtype=np.complex128)
    amps[spin.index_of(m), n] = 1.0
    return JointState(amps, spin, cutoff)


def excited_population(state: JointState, m: float) -> float:
    """Probability of detecting J + m atoms in the excited state."""
    return state.population(m)


def field_phase_distribution(state: JointState, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Coherent-overlap (Husimi-cut) histogram of the field phase over [-pi, pi).

    Probe states are |sqrt(<n>) e^{i theta}>; the atomic index is traced by
    summing the squared overlap per polarization.  Returns (bin centers, weights
    summing to 1).
    """
    if bins < 8:
        raise ConfigurationError(f"need at least 8 bins, got {bins}")
    amp = math.sqrt(max(state.mean_photon(), 1e-12))
    centers = -math.pi + (np.arange(bins) + 0.5) * (2.0 * math.pi / bins)
    hist = np.empty(bins)
    norm2 = state.norm2()
    for b, theta in enumerate(centers):
        probe = coherent_field_state(amp * np.exp(1j * theta), state.cutoff)
        ov = state.amps @ probe.conj()
        hist[b] = float(np.vdot(ov, ov).real / norm2)
    hist /= hist.sum()
    return centers, hist


# --- stable-subspace bookkeeping -------------------------------------------------
#
# H couples |J, m> (x) |n> only to states of equal m + n, so the joint space
# splits into ladders H_p labeled by p = n - l along |J, J-l> (x) |p+l>.
# Every state in H_p has total excitation Jz + n = J + p.


def subspace_labels(spin: SpinQuantum, cutoff: FockCutoff) -> range:
    return range(-spin.n_atoms, cutoff.nmax + 1)


def subspace_indices(spin: SpinQuantum, cutoff: FockCutoff, p: int) -> list[tuple[int, int]]:
    """(atomic index, photon number) pairs spanning H_p, ordered by l."""
    if p not in subspace_labels(spin, cutoff):
        raise DomainError(f"subspace label {p} outside {-spin.n_atoms}..{cutoff.nmax}")
    n_at = spin.n_atoms
    pairs = []
    for l in range(max(0, -p), min(n_at, cutoff.nmax - p) + 1):
        pairs.append((n_at - l, p + l))   # m = J - l  ->  index N - l
    return pairs


def split_by_subspace(state: JointState) -> dict[int, np.ndarray]:
    out = {}
    for p in subspace_labels(state.spin, state.cutoff):
        idx = subspace_indices(state.spin, state.cutoff, p)
        out[p] = np.array([state.amps[i, n] for i, n in idx])
    return out


def assemble_from_subspaces(blocks: dict[int, np.ndarray], spin: SpinQuantum, cutoff: FockCutoff) -> JointState:
    amps = np.zeros((spin.dim, cutoff.dim), dtype=np.complex128)
    for p, vec in blocks.items():
        for (i, n), a in zip(subspace_indices(spin, cutoff, p), vec):
            amps[i, n] = a
    return JointState(amps, spin, cutoff)


def dump_state_csv(state: JointState, path: str) -> None:
    """Debug dump: one row (m, n, re, im) per basis amplitude."""
    with open(path, "w", newline="") as fh:
        fh.write("m,n,re,im\n")
        for i, m in enumerate(state.spin.m_values):
            for n in range(state.cutoff.dim):
                a = state.amps[i, n]
                fh.write(f"{m:g},{n},{a.real:.12g},{a.imag:.12g}\n")
