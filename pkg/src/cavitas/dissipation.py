"""Open-system dynamics: reference density-matrix solver, quantum-jump Monte
Carlo, analytic decoherence functionals, and field-decay oracles.

The Monte Carlo unfolding is the waiting-time flavor: between jumps the state
evolves under the non-hermitian drift and its squared norm is the survival
probability, so a jump fires exactly when that norm crosses a uniform draw.
Emission applies a, absorption a+ (two-channel unfolding of the finite
temperature bath); the analytic functionals instead fold temperature into the
single factor kappa_T = 1 + 2 n_th multiplying gamma.

All randomness is drawn in this module's Python layer in a documented order
(initial threshold; then per jump: one channel draw when n_th > 0, then the
next threshold), which makes seeded runs reproducible within a backend.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .errors import ConfigurationError, DomainError, IntegrationError
from .exact_dynamics import IntegratorConfig, TCParams, _advance, _echo_signs
from .hilbert import FockCutoff, JointState
from .mesoscopic import MesoParams, envelopes
from .su2 import SpinQuantum

#: Largest joint dimension the dense reference solver accepts.
MASTER_DIM_LIMIT = 200

#: Safety cap on jumps resolved inside a single propagation window.
_MAX_JUMPS_PER_WINDOW = 1000


@dataclass(frozen=True)
class BathParams:
    """Cavity energy decay rate and the thermal occupation of its environment."""

    gamma: float
    n_th: float = 0.0

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ConfigurationError(f"gamma must be >= 0, got {self.gamma}")
        if self.n_th < 0:
            raise ConfigurationError(f"n_th must be >= 0, got {self.n_th}")

    @property
    def kappa_T(self) -> float:
        """Thermal enhancement 1 + 2 n_th of the decoherence rate."""
        return 1.0 + 2.0 * self.n_th

    def decay_weights(self, n: np.ndarray) -> np.ndarray:
        """Total jump flux out of Fock level n: gamma ((1 + 2 n_th) n + n_th)."""
        return self.gamma * ((1.0 + 2.0 * self.n_th) * n + self.n_th)


@dataclass
class JumpRecord:
    """Dates and channels of the jumps along one trajectory, in time order."""

    events: list[tuple[float, str]] = field(default_factory=list)

    def __post_init__(self) -> None:
        last = -math.inf
        for t, ch in self.events:
            if ch not in ("emit", "absorb"):
                raise ConfigurationError(f"unknown jump channel {ch!r}")
            if t <= last:
                raise ConfigurationError("jump times must be strictly increasing")
            last = t

    def times(self, channel: str | None = None) -> np.ndarray:
        return np.array([t for t, ch in self.events if channel is None or ch == channel])

    def count(self, channel: str | None = None) -> int:
        return sum(1 for _, ch in self.events if channel is None or ch == channel)


def dump_jump_records(records: Sequence[JumpRecord], path: str) -> None:
    """CSV dump, one row per jump: trajectory_id, jump_time, channel."""
    with open(path, "w", newline="") as fh:
        fh.write("trajectory_id,jump_time,channel\n")
        for i, rec in enumerate(records):
            for t, ch in rec.events:
                fh.write(f"{i},{t:.12g},{ch}\n")


# --- analytic decoherence functionals -----------------------------------------


@dataclass(frozen=True)
class DecoherenceEval:
    """Damping exponent and phase of one pair separation: F = e^{-d + i theta}."""

    q: int
    d: float
    theta: float

    @property
    def F(self) -> complex:
        return cmath.exp(complex(-self.d, self.theta))


def _one_minus_sinc(x: float) -> float:
    # 1 - sin(x)/x without cancellation near 0.
    if abs(x) < 1e-4:
        x2 = x * x
        return x2 / 6.0 - x2 * x2 / 120.0
    return 1.0 - math.sin(x) / x


def decoherence_free(q: int, t: float, params: MesoParams, bath: BathParams) -> DecoherenceEval:
    """Pair decoherence accumulated by free dissipative evolution up to t.

    d_q = (2 gamma_eff nbar^{3/2} phi / g) (1 - sin(q phi)/(q phi)),
    theta_q = (4 gamma_eff nbar^{3/2} / (g q)) sin^2(q phi / 2),
    with gamma_eff = gamma kappa_T and phi = g t / (2 sqrt(nbar)).  Vanishes
    cubically in phi, is even (d) / odd (theta) in q, and q = 0 gives F = 1.
    """
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
    geff = bath.gamma * bath.kappa_T
    if q == 0 or geff == 0.0 or t == 0.0:
        return DecoherenceEval(q=q, d=0.0, theta=0.0)
    phi = params.phi(t)
    base = 2.0 * geff * params.nbar**1.5 / params.g
    d = base * phi * _one_minus_sinc(q * phi)
    theta = (2.0 * base / q) * math.sin(0.5 * q * phi) ** 2
    return DecoherenceEval(q=q, d=d, theta=theta)


def decoherence_echo(
    q: int, t_pi: float, t: float, params: MesoParams, bath: BathParams
) -> DecoherenceEval:
    """Pair decoherence when the reversal pulse fired at t_pi <= t.

    d_q = (2 gamma_eff nbar^{3/2} / g) (phi - [2 sin(q phi_pi) - sin(q (2 phi_pi - phi))] / q),
    theta_q = (4 gamma_eff nbar^{3/2} / (g q)) (2 sin^2(q phi_pi / 2) - sin^2(q (2 phi_pi - phi) / 2)).
    Coincides with the free functional at t = t_pi and stays positive after:
    the pulse reverses the phases but not the already-scattered information.
    """
    if t_pi < 0:
        raise DomainError(f"pulse time must be >= 0, got {t_pi}")
    if t < t_pi:
        raise DomainError(f"t={t:g} precedes the pulse at {t_pi:g}; use decoherence_free")
    geff = bath.gamma * bath.kappa_T
    if q == 0 or geff == 0.0 or t == 0.0:
        return DecoherenceEval(q=q, d=0.0, theta=0.0)
    phi = params.phi(t)
    phi_pi = params.phi(t_pi)
    base = 2.0 * geff * params.nbar**1.5 / params.g
    refl = q * (2.0 * phi_pi - phi)
    d = base * (phi - (2.0 * math.sin(q * phi_pi) - math.sin(refl)) / q)
    theta = (2.0 * base / q) * (2.0 * math.sin(0.5 * q * phi_pi) ** 2 - math.sin(0.5 * refl) ** 2)
    return DecoherenceEval(q=q, d=d, theta=theta)


def echo_overlap_time(t_pi: float, t: float) -> float:
    """Free-evolution time whose component overlap applies after the pulse."""
    if t < t_pi:
        raise DomainError(f"t={t:g} precedes the pulse at {t_pi:g}")
    return abs(2.0 * t_pi - t)


def cat_decoherence(theta: float, t: float, nbar: float, gamma: float) -> complex:
    """Coherence left between field components separated by angle theta at time t.

    exp(nbar (e^{i theta} - 1)(1 - e^{-gamma t})): the generating function of the
    Poisson-distributed emission count, evaluated at e^{i theta}.
    """
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
    return cmath.exp(nbar * (cmath.exp(1j * theta) - 1.0) * (1.0 - math.exp(-gamma * t)))


def dissipative_envelopes(
    t: float,
    params: MesoParams,
    bath: BathParams,
    m0: float | None = None,
    m: float | None = None,
    cutoff: FockCutoff | None = None,
    echo_time: float | None = None,
) -> tuple[float, float]:
    """Signal envelopes with each pair term damped by e^{-d_q(t)}.

    The undamped weights keep the initial photon number (the drift of nbar
    itself shows up only through the phase functional, not the envelope), so
    this reduces to the lossless envelopes exactly when gamma = 0.  After an
    echo pulse the overlaps are evaluated at the reflected time |2 t_pi - t|
    while the damping keeps integrating forward.
    """
    if echo_time is not None and t >= echo_time:
        damp = lambda q: math.exp(-decoherence_echo(q, echo_time, t, params, bath).d)
        return envelopes(echo_overlap_time(echo_time, t), params, m0, m, cutoff, damp)
    damp = lambda q: math.exp(-decoherence_free(q, t, params, bath).d)
    return envelopes(t, params, m0, m, cutoff, damp)


def jump_phase_functional_mc(
    q: int,
    t: float,
    params: MesoParams,
    bath: BathParams,
    n_samples: int,
    seed: int,
    echo_time: float | None = None,
) -> tuple[complex, float]:
    """Trajectory average of the pair-phase kick functional (validation oracle).

    Each emission at t_l multiplies the pair coherence by e^{i q phi(t_l)}
    (phase reflected off the pulse for echo runs); emission dates follow the
    undepleted Poisson flux nbar gamma kappa_T.  Returns (mean, stderr) with
    stderr = sqrt((var Re + var Im) / M), directly comparable to F_q.
    """
    if n_samples < 2:
        raise ConfigurationError(f"need at least 2 samples, got {n_samples}")
    rng = np.random.default_rng(seed)
    lam = params.nbar * bath.gamma * bath.kappa_T
    phi_pi = params.phi(echo_time) if echo_time is not None else None
    vals = np.empty(n_samples, dtype=np.complex128)
    for i in range(n_samples):
        k = rng.poisson(lam * t)
        tl = rng.uniform(0.0, t, size=k)
        ph = params.g * tl / (2.0 * math.sqrt(params.nbar))
        if phi_pi is not None:
            ph = np.where(tl < echo_time, ph, 2.0 * phi_pi - ph)
        vals[i] = np.exp(1j * q * ph.sum())
    mean = complex(vals.mean())
    stderr = math.sqrt((vals.real.var(ddof=1) + vals.imag.var(ddof=1)) / n_samples)
    return mean, stderr


# --- dense reference solver ----------------------------------------------------


def field_lowering(cutoff: FockCutoff) -> np.ndarray:
    """Annihilation operator a on the truncated Fock space."""
    a = np.zeros((cutoff.dim, cutoff.dim))
    n = np.arange(1, cutoff.dim)
    a[n - 1, n] = np.sqrt(n)
    return a


def joint_lowering(spin: SpinQuantum, cutoff: FockCutoff) -> np.ndarray:
    """a on the flattened (atomic (x) Fock) basis."""
    return np.kron(np.eye(spin.dim), field_lowering(cutoff))


def thermal_jump_ops(bath: BathParams, cutoff: FockCutoff, spin: SpinQuantum | None = None) -> list[np.ndarray]:
    """Scaled jump operators of the two-channel bath unfolding.

    sqrt(gamma (1 + n_th)) a always; sqrt(gamma n_th) a+ only when n_th > 0.
    """
    a = field_lowering(cutoff) if spin is None else joint_lowering(spin, cutoff)
    ops = [math.sqrt(bath.gamma * (1.0 + bath.n_th)) * a]
    if bath.n_th > 0:
        ops.append(math.sqrt(bath.gamma * bath.n_th) * a.conj().T)
    return ops


def master_solve(
    rho0: np.ndarray,
    hamiltonian: np.ndarray,
    jump_ops: Sequence[np.ndarray],
    sample_times: Sequence[float] | np.ndarray,
    dt: float,
) -> np.ndarray:
    """Fixed-step RK4 reference integration of the dissipative evolution.

    Returns rho at every sample time, shape (K, dim, dim).  Trace and
    hermiticity are watched along the way and positivity at the samples; any
    violation aborts the run.  The dense cost grows as dim^3 per step, so
    dimensions above MASTER_DIM_LIMIT are refused: use the trajectory sampler
    for anything bigger.
    """
    rho = np.array(rho0, dtype=np.complex128)
    dim = rho.shape[0]
    if rho.shape != (dim, dim) or hamiltonian.shape != (dim, dim):
        raise ConfigurationError(f"rho {rho.shape} and H {hamiltonian.shape} must be square and equal size")
    if dim > MASTER_DIM_LIMIT:
        raise ConfigurationError(
            f"dimension {dim} exceeds the dense reference limit {MASTER_DIM_LIMIT}; "
            "use the Monte Carlo sampler instead"
        )
    if not dt > 0:
        raise ConfigurationError(f"dt must be > 0, got {dt}")
    times = np.asarray(sample_times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ConfigurationError("sample times must be nonempty, nonnegative, strictly increasing")
    if abs(np.trace(rho).real - 1.0) > 1e-8 or abs(np.trace(rho).imag) > 1e-8:
        raise ConfigurationError("initial state must have unit trace")
    if np.abs(rho - rho.conj().T).max() > 1e-8:
        raise ConfigurationError("initial state must be hermitian")

    ops = [np.asarray(L, dtype=np.complex128) for L in jump_ops]
    ksum = sum((L.conj().T @ L for L in ops), np.zeros((dim, dim), dtype=np.complex128))
    h = np.asarray(hamiltonian, dtype=np.complex128)

    def liouville(r: np.ndarray) -> np.ndarray:
        out = -1j * (h @ r - r @ h) - 0.5 * (ksum @ r + r @ ksum)
        for L in ops:
            out += L @ r @ L.conj().T
        return out

    def rk4(r: np.ndarray, step: float) -> np.ndarray:
        k1 = liouville(r)
        k2 = liouville(r + 0.5 * step * k1)
        k3 = liouville(r + 0.5 * step * k2)
        k4 = liouville(r + step * k3)
        return r + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def check(r: np.ndarray, t: float, eigen: bool) -> None:
        if abs(np.trace(r) - 1.0) > 1e-8:
            raise IntegrationError(f"trace drift {abs(np.trace(r) - 1.0):.3e} at t={t:g}")
        if np.abs(r - r.conj().T).max() > 1e-8:
            raise IntegrationError(f"hermiticity loss at t={t:g}")
        if eigen and np.linalg.eigvalsh(r).min() < -1e-8:
            raise IntegrationError(f"negative population {np.linalg.eigvalsh(r).min():.3e} at t={t:g}")

    out = np.empty((times.size, dim, dim), dtype=np.complex128)
    t_now = 0.0
    for k, t_target in enumerate(times):
        span = t_target - t_now
        nfull = int(math.floor(span / dt + 1e-9))
        for i in range(nfull):
            rho = rk4(rho, dt)
            if i % 64 == 0:
                check(rho, t_now + (i + 1) * dt, eigen=False)
        rem = span - nfull * dt
        if rem > 1e-9 * dt:
            rho = rk4(rho, rem)
        t_now = t_target
        check(rho, t_now, eigen=True)
        out[k] = rho
    return out


def extract_branch_matrix(
    rho: np.ndarray, branch_amps: Sequence[complex], cutoff: FockCutoff
) -> tuple[np.ndarray, float]:
    """Least-squares coefficients C with rho ~ sum_ij C[i,j] |b_i><b_j|.

    The b_i are coherent amplitudes; the fit is meaningful when they are well
    separated (dyad basis close to independent).  Returns (C, residual) with
    the Frobenius-norm residual of the reconstruction.
    """
    from .hilbert import coherent_field_state

    vecs = [coherent_field_state(b, cutoff) for b in branch_amps]
    cols = []
    for vi in vecs:
        for vj in vecs:
            cols.append(np.outer(vi, vj.conj()).ravel())
    basis = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(basis, rho.ravel(), rcond=None)
    resid = float(np.linalg.norm(basis @ coef - rho.ravel()))
    return coef.reshape(len(vecs), len(vecs)), resid


# --- quantum-jump Monte Carlo ---------------------------------------------------


def _do_jump(eng, bath: BathParams, rng, events: list | None, t_abs: float) -> None:
    # Channel probability proportional to <L+L> of the pre-jump state.
    if bath.n_th > 0:
        w_n, w_np1 = eng.mean_photon_weights()
        w_emit = bath.gamma * (1.0 + bath.n_th) * w_n
        w_abs = bath.gamma * bath.n_th * w_np1
        if rng.random() * (w_emit + w_abs) < w_emit:
            eng.apply_lowering()
            ch = "emit"
        else:
            eng.apply_raising()
            ch = "absorb"
    else:
        eng.apply_lowering()
        ch = "emit"
    eng.renormalize()
    if events is not None:
        events.append((t_abs, ch))


def _partial_with_jumps(eng, h: float, u: float, t_start: float, bath: BathParams, rng, events) -> float:
    """Advance one sub-grid window of length h, resolving every jump inside it.

    The engine enters at the window start; the jump date inside a decaying
    sub-step is found by log-linear interpolation of the squared norm, the step
    is redone up to that date, the jump applied, and the remainder retried.
    """
    eng.rk4_once(h)
    offset = 0.0
    jumps = 0
    while eng.norm2 < u:
        jumps += 1
        if jumps > _MAX_JUMPS_PER_WINDOW:
            raise IntegrationError(f"more than {_MAX_JUMPS_PER_WINDOW} jumps in one window")
        n2p = eng.norm2_prev
        frac = math.log(n2p / u) / math.log(n2p / eng.norm2)
        delta = (h - offset) * frac
        eng.set_state(eng.get_prev_state())
        eng.rk4_once(delta)
        _do_jump(eng, bath, rng, events, t_start + offset + delta)
        u = rng.random()
        offset += delta
        eng.rk4_once(h - offset)
    return u


def _advance_mc(eng, duration: float, dt: float, u: float, t_start: float, bath: BathParams, rng, events) -> float:
    """Advance `duration` on the fixed grid, detouring into windows at each jump."""
    done = 0.0
    while duration - done > 1e-9 * dt:
        left = duration - done
        nfull = int(math.floor(left / dt + 1e-9))
        if nfull == 0:
            u = _partial_with_jumps(eng, left, u, t_start + done, bath, rng, events)
            return u
        taken, crossed = eng.run(nfull, u)
        if not crossed:
            done += nfull * dt
            rem = duration - done
            if rem > 1e-9 * dt:
                u = _partial_with_jumps(eng, rem, u, t_start + done, bath, rng, events)
            return u
        # norm crossed the threshold inside grid step `taken`: redo it as a window
        done += (taken - 1) * dt
        eng.set_state(eng.get_prev_state())
        u = _partial_with_jumps(eng, dt, u, t_start + done, bath, rng, events)
        done += dt
    return u


def mc_trajectory(
    initial: JointState,
    params: TCParams,
    bath: BathParams,
    integ: IntegratorConfig,
    sample_times: Sequence[float] | np.ndarray,
    rng: np.random.Generator,
    echo_time: float | None = None,
    record_jumps: bool = True,
) -> tuple[np.ndarray, JumpRecord]:
    """One unfolded trajectory; top-projection population at each sample time.

    The state stays unnormalized between jumps (its squared norm is the
    survival probability), so sampled populations are read as ratios.  Jump
    dates are exact to the window interpolation, not quantized to the grid.
    """
    params.check_state(initial)
    times = np.asarray(sample_times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ConfigurationError("sample times must be nonempty, nonnegative, strictly increasing")
    dt_phys = integ.dt / params.g
    decay_w = bath.decay_weights(np.arange(params.cutoff.dim, dtype=float))
    integ.check_cap(params.cutoff)
    eng = kernels.StepEngine(params.spin.ladder_coupling(), decay_w, params.g, dt_phys)
    eng.set_state(initial.normalized().amps)
    signs = _echo_signs(params.spin)

    events_t: list[tuple[float, int]] = [(float(tk), 1) for tk in times]
    if echo_time is not None:
        if echo_time < 0:
            raise DomainError(f"echo time must be >= 0, got {echo_time}")
        events_t.append((float(echo_time), 0))
    events_t.sort()

    u = rng.random()
    jumps: list | None = [] if record_jumps else None
    P = np.empty(times.size)
    t_now = 0.0
    idx = 0
    for t_ev, kind in events_t:
        u = _advance_mc(eng, t_ev - t_now, dt_phys, u, t_now, bath, rng, jumps)
        t_now = t_ev
        if kind == 0:
            eng.set_state(eng.get_state() * signs[:, None])
            continue
        amps = eng.get_state()
        row = amps[-1]
        P[idx] = float(np.vdot(row, row).real / eng.norm2)
        idx += 1
    return P, JumpRecord(jumps if jumps is not None else [])


def mc_average(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(mean, standard error) across the leading trajectory axis."""
    samples = np.asarray(samples)
    if samples.shape[0] < 2:
        raise ConfigurationError(f"need at least 2 trajectories, got {samples.shape[0]}")
    return samples.mean(axis=0), samples.std(axis=0, ddof=1) / math.sqrt(samples.shape[0])


@dataclass
class McResult:
    """Ensemble-averaged signal with per-sample standard error."""

    t: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_traj: int
    samples: np.ndarray | None = None
    records: list[JumpRecord] | None = None


def mc_ensemble(
    params: TCParams,
    bath: BathParams,
    integ: IntegratorConfig,
    sample_times: Sequence[float] | np.ndarray,
    n_traj: int,
    seed: int,
    initial: JointState | None = None,
    initial_provider: Callable[[int, np.random.Generator], JointState] | None = None,
    echo_time: float | None = None,
    max_workers: int | None = None,
    keep_samples: bool = False,
    keep_records: bool = False,
) -> McResult:
    """Average `n_traj` independent trajectories of one configuration.

    Each trajectory owns an RNG stream spawned from the master seed by index,
    so results do not depend on worker scheduling; the reduction runs in index
    order.  `initial_provider(i, rng)` replaces a fixed initial state when the
    preparation itself is stochastic (it draws from the same stream, before the
    propagation consumes it).
    """
    if n_traj < 2:
        raise ConfigurationError(f"need at least 2 trajectories, got {n_traj}")
    if (initial is None) == (initial_provider is None):
        raise ConfigurationError("pass exactly one of initial / initial_provider")
    times = np.asarray(sample_times, dtype=float)
    streams = np.random.SeedSequence(seed).spawn(n_traj)

    def one(i: int) -> tuple[np.ndarray, JumpRecord]:
        rng = np.random.default_rng(streams[i])
        init = initial if initial_provider is None else initial_provider(i, rng)
        return mc_trajectory(
            init, params, bath, integ, times, rng, echo_time=echo_time, record_jumps=keep_records
        )

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(one, range(n_traj)))

    P = np.stack([r[0] for r in results])
    mean, stderr = mc_average(P)
    return McResult(
        t=times.copy(),
        mean=mean,
        stderr=stderr,
        n_traj=n_traj,
        samples=P if keep_samples else None,
        records=[r[1] for r in results] if keep_records else None,
    )


# --- exact field-only trajectory ------------------------------------------------


def field_jump_process(
    field0: np.ndarray,
    bath: BathParams,
    t_final: float,
    rng: np.random.Generator,
    record_jumps: bool = True,
) -> tuple[np.ndarray, JumpRecord]:
    """Field-only trajectory solved in closed form (no integrator).

    With the atoms absent, the no-jump drift only rescales each Fock amplitude
    by e^{-w_n tau / 2}, so the survival probability is an explicit sum of
    exponentials and each jump date is a bracketed root of S(tau) = u.  Used
    for photon-count statistics and for the thermalization stage of prepared
    runs.  Returns the normalized field at t_final and the jump record.
    """
    if t_final < 0:
        raise DomainError(f"duration must be >= 0, got {t_final}")
    c = np.array(field0, dtype=np.complex128)
    if c.ndim != 1:
        raise ConfigurationError("field state must be a 1-D amplitude vector")
    c /= np.linalg.norm(c)
    n = np.arange(c.size, dtype=float)
    w = bath.decay_weights(n)
    events: list[tuple[float, str]] = []
    t = 0.0
    u = rng.random()
    while True:
        rem = t_final - t
        p = (c.conj() * c).real
        if (p * np.exp(-w * rem)).sum() >= u:
            c = c * np.exp(-0.5 * w * rem)
            c /= np.linalg.norm(c)
            break
        tau = brentq(lambda x: (p * np.exp(-w * x)).sum() - u, 0.0, rem, rtol=8.9e-16)
        c = c * np.exp(-0.5 * w * tau)
        t += tau
        pj = (c.conj() * c).real
        ch = "emit"
        if bath.n_th > 0:
            w_emit = bath.gamma * (1.0 + bath.n_th) * (n * pj).sum()
            w_abs = bath.gamma * bath.n_th * ((n + 1.0) * pj).sum()
            if rng.random() * (w_emit + w_abs) >= w_emit:
                ch = "absorb"
        if ch == "emit":
            c[:-1] = np.sqrt(n[1:]) * c[1:]
            c[-1] = 0.0
        else:
            c[1:] = np.sqrt(n[1:]) * c[:-1]
            c[0] = 0.0
        norm = np.linalg.norm(c)
        if norm == 0.0:
            raise IntegrationError("jump annihilated the state; cutoff too small or vacuum emission")
        c /= norm
        if record_jumps:
            events.append((t, ch))
        u = rng.random()
    return c, JumpRecord(events if record_jumps else [])
