"""Analytic model of the mesoscopic Rabi signal.

For a coherent field with nbar photons, each equatorial atomic polarization m
drags a quasi-coherent field component whose phase advances at the slow rate
m g / (2 sqrt(nbar)).  The signal P_m(t) decomposes over pair separations
q = m_+ - m_- into amplitudes A_q modulated by the component overlaps R_q(t):
collapse when the components separate, revivals when pairs re-overlap at
q phi = 0 mod 2pi.  This module builds the components, the coefficients, the
assembled signal, the upper/lower envelopes, and the revival schedule.

All formulas live on the slow phase phi = g t / (2 sqrt(nbar)); the offset
constant c only shifts the fast oscillation inside the envelopes, never the
envelopes themselves.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .errors import ConfigurationError, DomainError
from .hilbert import FockCutoff, JointState, coherent_field_state
from .su2 import SpinQuantum, rotation_matrix


class ValidityWarning(UserWarning):
    """The requested regime strains the nbar >> N assumption behind the model."""


@dataclass(frozen=True)
class MesoParams:
    """Model parameters: spin sector, mean photon number, coupling, offset c.

    c in [0, N+1] fixes where the effective frequency sqrt(n + c) is expanded;
    the default reproduces the known single-atom limit (c = 1) and sits at the
    midpoint (N+1)/2 otherwise.  Construction warns when nbar < 5 N, where the
    expansion underlying every formula here starts to degrade.
    """

    spin: SpinQuantum
    nbar: float
    g: float = 1.0
    c: float | None = None

    def __post_init__(self) -> None:
        if not self.nbar > 0:
            raise ConfigurationError(f"nbar must be > 0, got {self.nbar}")
        if not self.g > 0:
            raise ConfigurationError(f"coupling g must be > 0, got {self.g}")
        if self.c is None:
            object.__setattr__(self, "c", 1.0 if self.spin.n_atoms == 1 else (self.spin.n_atoms + 1) / 2.0)
        if not 0.0 <= self.c <= self.spin.n_atoms + 1:
            raise ConfigurationError(f"c must lie in [0, N+1]=[0, {self.spin.n_atoms + 1}], got {self.c}")
        if self.nbar < 5.0 * self.spin.n_atoms:
            warnings.warn(
                f"nbar={self.nbar:g} < 5 N={5 * self.spin.n_atoms}: mesoscopic model out of its comfort zone",
                ValidityWarning,
                stacklevel=2,
            )

    def phi(self, t: float) -> float:
        """Slow dimensionless time g t / (2 sqrt(nbar))."""
        return self.g * t / (2.0 * math.sqrt(self.nbar))

    def time_of(self, phi: float) -> float:
        return 2.0 * math.sqrt(self.nbar) * phi / self.g

    def default_cutoff(self) -> FockCutoff:
        from .hilbert import default_cutoff

        return FockCutoff(default_cutoff(self.nbar))


@dataclass(frozen=True, eq=False)
class SignalCoefficients:
    """Pair-separation amplitudes A_q; real by construction (rotation matrix is real).

    A_{-q} = A_q, and the full sum collapses to 1 when initial and detected
    projections coincide, 0 otherwise.
    """

    q: np.ndarray
    a: np.ndarray

    @property
    def a0(self) -> float:
        return float(self.a[len(self.a) // 2])

    def __getitem__(self, q: int) -> float:
        k = q + (len(self.a) - 1) // 2
        if not 0 <= k < len(self.a):
            raise DomainError(f"separation q={q} outside +-{(len(self.a) - 1) // 2}")
        return float(self.a[k])


def signal_coefficients(m0: float, m: float, spin: SpinQuantum) -> SignalCoefficients:
    """Brute-force A_q: double sum over polarization pairs grouped by q = m_+ - m_-.

    m0 is the initial projection (along z), m the detected one.
    """
    r = rotation_matrix(spin)
    rinv = r.T
    i0 = spin.index_of(m0)
    im = spin.index_of(m)
    n = spin.n_atoms
    acc = np.zeros(2 * n + 1)
    for ip in range(spin.dim):  # index of m_+
        for il in range(spin.dim):  # index of m_-
            q = ip - il
            acc[q + n] += r[i0, ip] * r[i0, il] * rinv[ip, im] * rinv[il, im]
    return SignalCoefficients(q=np.arange(-n, n + 1), a=acc)


@dataclass(frozen=True, eq=False)
class GBComponent:
    """One polarization branch: field component, atomic vector, classical phase.

    The joint contribution to the entangled state is
    weight * classical_phase * |atomic> (x) |field|>.
    """

    m: float
    field: np.ndarray
    atomic: np.ndarray
    classical_phase: complex


def gb_field_state(m: float, t: float, params: MesoParams, cutoff: FockCutoff) -> np.ndarray:
    """Field component dragged by polarization m, truncated and renormalized.

    Amplitude on |k>:  e^{i m g t sqrt(nbar)} e^{-nbar/2} alpha^k / sqrt(k!) e^{-i m g t sqrt(k)}
    with alpha = sqrt(nbar).  At t = 0 (or m = 0) this is the coherent state.
    """
    params.spin.index_of(m)  # domain check
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
    alpha = math.sqrt(params.nbar)
    cutoff.require_coherent(alpha)
    k = np.arange(cutoff.dim)
    log_mag = -0.5 * params.nbar + k * math.log(alpha)
    log_mag = log_mag - 0.5 * np.array([math.lgamma(x + 1.0) for x in range(cutoff.dim)])
    phase = m * params.g * t * (alpha - np.sqrt(k))
    out = np.exp(log_mag + 1j * phase)
    out /= np.linalg.norm(out)
    return out


def atomic_polarization(m: float, t: float, params: MesoParams) -> np.ndarray:
    """Atomic vector of branch m over the Dicke basis (ascending m'); unit norm.

    Component on |J, m'>:  e^{-i g m t (c - J + m') / (2 sqrt(nbar))} (R^-1)_{m, m'}.
    At t = 0 this is row m of the inverse rotation (an X-basis eigenstate).
    """
    spin = params.spin
    i = spin.index_of(m)
    rinv_row = rotation_matrix(spin).T[i]
    rate = params.g * m / (2.0 * math.sqrt(params.nbar))
    drift = params.c - spin.j + spin.m_values
    return rinv_row * np.exp(-1j * rate * t * drift)


def gb_component(m: float, t: float, params: MesoParams, cutoff: FockCutoff) -> GBComponent:
    phase = complex(np.exp(-1j * m * params.g * t * math.sqrt(params.nbar)))
    return GBComponent(
        m=m,
        field=gb_field_state(m, t, params, cutoff),
        atomic=atomic_polarization(m, t, params),
        classical_phase=phase,
    )


def entangled_state(m0: float, t: float, params: MesoParams, cutoff: FockCutoff) -> JointState:
    """Model joint state grown from |J, m0> (x) |alpha>: N+1 correlated branches.

    Sum over m of R_{m0,m} e^{-i m g t sqrt(nbar)} |D_m(t)> (x) |psi_m(t)>,
    renormalized (the branches are only approximately orthogonal at t > 0).
    """
    spin = params.spin
    r = rotation_matrix(spin)
    i0 = spin.index_of(m0)
    amps = np.zeros((spin.dim, cutoff.dim), dtype=np.complex128)
    for i, m in enumerate(spin.m_values):
        comp = gb_component(m, t, params, cutoff)
        amps += r[i0, i] * comp.classical_phase * np.outer(comp.atomic, comp.field)
    return JointState(amps, spin, cutoff).normalized()


def overlap_factor(m_plus: float, m_minus: float, t: float, params: MesoParams, cutoff: FockCutoff) -> complex:
    """<psi_{m_-}(t) | psi_{m_+}(t)>, by direct truncated Fock summation.

    Depends only on the separation q = m_+ - m_-; modulus <= 1 with equality at
    t = 0 or q = 0.  The direct sum keeps the component spreading that erodes
    late revival replicas, which a rigid-coherent approximation would miss.
    """
    a = gb_field_state(m_plus, t, params, cutoff)
    b = gb_field_state(m_minus, t, params, cutoff)
    return complex(np.vdot(b, a))


def _overlap_by_q(q: int, t: float, params: MesoParams, cutoff: FockCutoff) -> complex:
    """R_q via a representative pair with separation q (q-only dependence is exact)."""
    if q == 0:
        return 1.0 + 0.0j
    j = params.spin.j
    if q > 0:
        return overlap_factor(j, j - q, t, params, cutoff)
    return np.conj(_overlap_by_q(-q, t, params, cutoff))


def mesoscopic_rabi(
    m0: float, m: float, t: float, params: MesoParams, cutoff: FockCutoff | None = None
) -> float:
    """Model Rabi signal P_m(t): coefficients times overlaps times phase factors.

    The q-th term oscillates at the fast rate g q sqrt(nbar) (plus the slow
    polarization drift set by c), weighted by A_q R_q(t).
    """
    if cutoff is None:
        cutoff = params.default_cutoff()
    coeffs = signal_coefficients(m0, m, params.spin)
    spin = params.spin
    phi = params.phi(t)
    fast = params.g * t * math.sqrt(params.nbar)
    drift = (params.c - spin.j + m) * phi
    total = coeffs.a0
    for q in range(1, spin.n_atoms + 1):
        rq = _overlap_by_q(q, t, params, cutoff)
        total += 2.0 * coeffs[q] * (rq * np.exp(-1j * q * (fast + drift))).real
    return float(total)


# --- envelopes -------------------------------------------------------------------
#
# Upper envelope: all pair terms add in phase.  Lower envelope: inside a window
# around an isolated revival of separation q_r >= 2 only the +-q_r pair
# oscillates, so the minimum dips to A_0 - 2|A R|; elsewhere every term reaches
# its extreme simultaneously with alternating (-1)^q signs (at t=0 this
# reproduces the classical minimum exactly).

#: Half-width (in phi) of the single-separation window around such a revival.
def _window_half_width(spin: SpinQuantum) -> float:
    return math.pi / (2.0 * spin.n_atoms)


def _single_q_at(phi: float, spin: SpinQuantum) -> int | None:
    """Separation q_r whose isolated revival window contains phi, else None.

    Windows sit at phi = 2 pi j / q_r with gcd(j, q_r) = 1 and q_r >= 2; when
    two windows overlap (possible from N = 4 up) the nearest center wins.
    """
    width = _window_half_width(spin)
    best: tuple[float, int] | None = None
    for q_r in range(2, spin.n_atoms + 1):
        spacing = 2.0 * math.pi / q_r
        j = round(phi / spacing)
        if j < 1 or gcd(j, q_r) != 1:
            continue
        dist = abs(phi - j * spacing)
        if dist < width and (best is None or dist < best[0]):
            best = (dist, q_r)
    return None if best is None else best[1]


def envelopes(
    t: float,
    params: MesoParams,
    m0: float | None = None,
    m: float | None = None,
    cutoff: FockCutoff | None = None,
    decoherence=None,
) -> tuple[float, float]:
    """(upper, lower) envelope of the signal at time t; c never enters here.

    `decoherence` is an optional per-separation damping factor q -> D_q in
    [0, 1]; None means no damping.
    """
    spin = params.spin
    j = spin.j
    if m0 is None:
        m0 = j
    if m is None:
        m = j
    if cutoff is None:
        cutoff = params.default_cutoff()
    coeffs = signal_coefficients(m0, m, spin)
    phi = params.phi(t)
    q_r = _single_q_at(phi, spin)

    terms = {}
    for q in range(1, spin.n_atoms + 1):
        damp = 1.0 if decoherence is None else float(decoherence(q))
        terms[q] = 2.0 * abs(coeffs[q]) * abs(_overlap_by_q(q, t, params, cutoff)) * damp

    if q_r is not None:
        gap = terms[q_r]
        return coeffs.a0 + gap, coeffs.a0 - gap
    upper = coeffs.a0 + sum(terms.values())
    lower = coeffs.a0 + sum((-1.0) ** q * v for q, v in terms.items())
    return upper, lower


@dataclass(frozen=True)
class RevivalEvent:
    """One revival: position, which separations re-overlap there, and its order."""

    phi: float
    subset: tuple[int, ...]
    gcd: int
    pairs: int
    replica: bool


def revival_schedule(spin: SpinQuantum) -> list[RevivalEvent]:
    """Revivals in phi (0, 2 pi], classified by the gcd of the re-overlapping set.

    For each base separation d, the set {d, 2d, ...} up to 2J re-overlaps first
    at phi = 2 pi / d; later multiples 2 pi j / d with gcd(j, d) = 1 are its
    replicas (other j coincide with coarser events).  The pair count N+1-d
    counts polarization pairs at the base separation.
    """
    n = spin.n_atoms
    if n < 1:
        raise DomainError(f"need at least one atom, got {n}")
    events = []
    for d in range(1, n + 1):
        subset = tuple(range(d, n + 1, d))
        for jj in range(1, d + 1):
            if gcd(jj, d) != 1:
                continue
            events.append(
                RevivalEvent(
                    phi=2.0 * math.pi * jj / d,
                    subset=subset,
                    gcd=d,
                    pairs=n + 1 - d,
                    replica=jj > 1,
                )
            )
    events.sort(key=lambda e: e.phi)
    return events
