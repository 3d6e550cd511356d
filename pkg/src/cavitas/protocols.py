"""End-to-end numerical experiments: spontaneous-revival runs, echo runs,
thermalized preparation, harmonic contrast measurement, and a built-in
validation bundle.

Time grids are specified in the dimensionless slow phase phi = g t / (2 sqrt(nbar))
because every quantity of interest is periodic in it; physical times are
anchored through the vacuum Rabi frequency (g / 2 pi in kHz) and reported in
microseconds.  All ensemble runs are seeded and reproduce byte-identically for
a fixed seed and configuration within a kernel backend.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import kernels
from .dissipation import (
    BathParams,
    cat_decoherence,
    decoherence_echo,
    decoherence_free,
    dissipative_envelopes,
    field_jump_process,
    master_solve,
    mc_ensemble,
    thermal_jump_ops,
)
from .errors import ConfigurationError, DomainError
from .exact_dynamics import (
    IntegratorConfig,
    RabiSeries,
    TCParams,
    dense_hamiltonian,
    exact_rabi_series,
)
from .hilbert import FockCutoff, JointState, coherent_field_state, default_cutoff, product_state
from .mesoscopic import MesoParams, _overlap_by_q, _window_half_width, mesoscopic_rabi
from .su2 import SpinQuantum

#: Flight-limit coefficient: detection ends after 2.5 slow periods of sqrt(nbar).
_FLIGHT_PERIODS = 2.5

_MODES = ("spontaneous", "echo", "thermal", "envelopes-only", "validate")


def flight_limit(nbar: float) -> float:
    """Largest slow phase reachable before the atoms leave the cavity.

    phi_m = 2 pi 2.5 / sqrt(nbar): 0.65 revolutions at nbar = 15, 0.79 at 10.
    """
    if nbar <= 0:
        raise DomainError(f"nbar must be > 0, got {nbar}")
    return 2.0 * math.pi * _FLIGHT_PERIODS / math.sqrt(nbar)


@dataclass(frozen=True)
class SystemConfig:
    """Physical system: atom count, field, coupling, and dissipation rates.

    `g_over_gamma` may be `inf` for a lossless cavity.  `g_khz` anchors the
    absolute time axis (vacuum Rabi frequency g / 2 pi in kHz); internally all
    rates are radians per microsecond.  `cutoff` is the Fock truncation nmax,
    defaulted from nbar when omitted.
    """

    n_atoms: int = 1
    nbar: float = 15.0
    g_over_gamma: float = 1540.0
    g_khz: float = 49.0
    n_th: float = 0.0
    c: float | None = None
    cutoff: int | None = None

    def __post_init__(self) -> None:
        if self.nbar <= 0:
            raise ConfigurationError(f"nbar must be > 0, got {self.nbar}")
        if self.g_over_gamma <= 0:
            raise ConfigurationError(f"g_over_gamma must be > 0, got {self.g_over_gamma}")
        if self.g_khz <= 0:
            raise ConfigurationError(f"g_khz must be > 0, got {self.g_khz}")
        if self.n_th < 0:
            raise ConfigurationError(f"n_th must be >= 0, got {self.n_th}")

    @property
    def g(self) -> float:
        """Coupling in radians per microsecond."""
        return 2.0 * math.pi * self.g_khz * 1e-3

    @property
    def gamma(self) -> float:
        """Cavity energy decay rate in radians per microsecond."""
        if math.isinf(self.g_over_gamma):
            return 0.0
        return self.g / self.g_over_gamma

    @property
    def spin(self) -> SpinQuantum:
        return SpinQuantum(self.n_atoms)

    def fock(self) -> FockCutoff:
        nmax = default_cutoff(self.nbar) if self.cutoff is None else self.cutoff
        return FockCutoff(nmax)

    def meso(self) -> MesoParams:
        return MesoParams(spin=self.spin, nbar=self.nbar, g=self.g, c=self.c)

    def tc(self) -> TCParams:
        return TCParams(g=self.g, spin=self.spin, cutoff=self.fock())

    def bath(self) -> BathParams:
        return BathParams(gamma=self.gamma, n_th=self.n_th)

    def time_of_phi(self, phi: float) -> float:
        """Physical time (microseconds) of a slow phase."""
        return 2.0 * math.sqrt(self.nbar) * phi / self.g


@dataclass(frozen=True)
class ExperimentConfig:
    """One full experiment: mode, system, protocol timings, grid, and seed."""

    mode: str = "spontaneous"
    system: SystemConfig = field(default_factory=SystemConfig)
    t_pi_us: float | None = None
    gamma_tp: float = 0.47
    n0: float | None = None
    trajectories: int = 2000
    phi_max: float = 6.6
    phi_steps: int = 1200
    seed: int = 7041
    limit_to_flight: bool = False

    def __post_init__(self) -> None:
        if self.mode not in _MODES:
            raise ConfigurationError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.t_pi_us is not None and self.t_pi_us < 0:
            raise ConfigurationError(f"t_pi_us must be >= 0, got {self.t_pi_us}")
        if self.gamma_tp <= 0:
            raise ConfigurationError(f"gamma_tp must be > 0, got {self.gamma_tp}")
        if self.n0 is not None and not (self.system.n_th > 0 and 0 <= self.n0 < self.system.n_th):
            raise ConfigurationError(f"n0 must lie in [0, n_th) with n_th > 0, got {self.n0}")
        if self.trajectories < 2:
            raise ConfigurationError(f"trajectories must be >= 2, got {self.trajectories}")
        if self.phi_max <= 0:
            raise ConfigurationError(f"phi_max must be > 0, got {self.phi_max}")
        if self.phi_steps < 2:
            raise ConfigurationError(f"phi_steps must be >= 2, got {self.phi_steps}")

    def phi_grid(self) -> np.ndarray:
        top = self.phi_max
        if self.limit_to_flight:
            top = min(top, flight_limit(self.system.nbar))
        return np.linspace(0.0, top, self.phi_steps)

    def times_us(self) -> np.ndarray:
        return self.phi_grid() * (2.0 * math.sqrt(self.system.nbar) / self.system.g)


def aligned_integrator(params: TCParams, spacing: float, resolution: float = 0.04) -> IntegratorConfig:
    """Integrator whose step divides the sample spacing exactly.

    The grid step is chosen as spacing / n with the smallest n that keeps
    dt * sqrt(nmax) at or below `resolution` (in 1 / g units), so sampling
    never needs a fractional step and the multistep history survives across
    sample boundaries.
    """
    if spacing <= 0:
        raise ConfigurationError(f"sample spacing must be > 0, got {spacing}")
    spacing_g = spacing * params.g
    target = resolution / math.sqrt(params.cutoff.nmax)
    n = max(1, math.ceil(spacing_g / target - 1e-9))
    return IntegratorConfig(dt=spacing_g / n)


def excited_initial(system: SystemConfig) -> JointState:
    """All atoms excited, field coherent with mean photon number nbar."""
    spin = system.spin
    cut = system.fock()
    atomic = np.zeros(spin.dim)
    atomic[-1] = 1.0
    return product_state(atomic, coherent_field_state(math.sqrt(system.nbar), cut), spin, cut)


def _series_meta(config: ExperimentConfig, extra: dict | None = None) -> dict:
    meta = {
        "mode": config.mode,
        "n_atoms": config.system.n_atoms,
        "nbar": config.system.nbar,
        "g_over_gamma": config.system.g_over_gamma,
        "g_khz": config.system.g_khz,
        "n_th": config.system.n_th,
        "seed": config.seed,
        "backend": kernels.backend_name(),
    }
    if extra:
        meta.update(extra)
    return meta


def _envelope_arrays(
    times: np.ndarray,
    system: SystemConfig,
    echo_time: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    meso = system.meso()
    bath = system.bath()
    cut = system.fock()
    up = np.empty(times.size)
    lo = np.empty(times.size)
    for k, t in enumerate(times):
        up[k], lo[k] = dissipative_envelopes(t, meso, bath, cutoff=cut, echo_time=echo_time)
    return up, lo


def _run_signal(
    config: ExperimentConfig,
    times: np.ndarray,
    echo_time: float | None,
    initial_provider=None,
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Exact signal when lossless, trajectory average otherwise."""
    system = config.system
    par = system.tc()
    spacing = (times[-1] - times[0]) / (times.size - 1)
    integ = aligned_integrator(par, spacing)
    if system.gamma == 0.0 and initial_provider is None:
        ser = exact_rabi_series(excited_initial(system), par, integ, times, echo_at=echo_time)
        return ser.P, np.zeros(times.size), {"dt": integ.dt, "n_traj": 0, **ser.meta}
    res = mc_ensemble(
        par,
        system.bath(),
        integ,
        times,
        n_traj=config.trajectories,
        seed=config.seed,
        initial=None if initial_provider is not None else excited_initial(system),
        initial_provider=initial_provider,
        echo_time=echo_time,
    )
    return res.mean, res.stderr, {"dt": integ.dt, "n_traj": res.n_traj}


def run_spontaneous(config: ExperimentConfig) -> RabiSeries:
    """Free dissipative evolution from all atoms excited and a coherent field.

    Columns: measured signal (exact when gamma = 0, trajectory mean with
    standard error otherwise) plus the analytic dissipative envelopes and the
    flight-limit phase.
    """
    phi = config.phi_grid()
    times = config.times_us()
    P, stderr, extra = _run_signal(config, times, echo_time=None)
    up, lo = _envelope_arrays(times, config.system)
    return RabiSeries(
        phi=phi,
        t=times,
        P=P,
        P_stderr=stderr,
        P_upper=up,
        P_lower=lo,
        flight_phi=flight_limit(config.system.nbar),
        meta=_series_meta(config, extra),
    )


def run_echo(config: ExperimentConfig) -> RabiSeries:
    """Evolution with an instantaneous reversal pulse at t_pi microseconds.

    A pulse beyond the sampled window changes nothing and the run degenerates
    to the spontaneous protocol on the shared grid.
    """
    if config.t_pi_us is None:
        raise ConfigurationError("echo mode needs t_pi_us")
    times = config.times_us()
    if config.t_pi_us >= times[-1]:
        ser = run_spontaneous(replace(config, mode="spontaneous"))
        ser.meta.update(mode="echo", t_pi_us=config.t_pi_us, degenerate=True)
        return ser
    phi = config.phi_grid()
    P, stderr, extra = _run_signal(config, times, echo_time=config.t_pi_us)
    up, lo = _envelope_arrays(times, config.system, echo_time=config.t_pi_us)
    return RabiSeries(
        phi=phi,
        t=times,
        P=P,
        P_stderr=stderr,
        P_upper=up,
        P_lower=lo,
        flight_phi=flight_limit(config.system.nbar),
        meta=_series_meta(config, {"t_pi_us": config.t_pi_us, **extra}),
    )


def thermalization_time(config: ExperimentConfig) -> float:
    """Preparation duration in microseconds, from gamma_tp or from n0.

    When n0 is given it fixes gamma t_p through the bath filling law
    n0 = n_th (1 - e^{-gamma t_p}); otherwise gamma_tp is used directly.
    """
    gamma = config.system.gamma
    if gamma == 0.0:
        raise ConfigurationError("thermalized preparation needs gamma > 0")
    if config.n0 is not None:
        return -math.log(1.0 - config.n0 / config.system.n_th) / gamma
    return config.gamma_tp / gamma


def run_thermalized(config: ExperimentConfig) -> RabiSeries:
    """Two-stage run: lossy thermal preparation of the field, then coupling.

    Stage one evolves the bare field for t_p from the boosted amplitude
    alpha_0 = sqrt(nbar) e^{gamma t_p / 2}, trajectory by trajectory, so that
    decay lands the mean photon number on nbar at coupling time while the
    thermal bath deposits n0 = n_th (1 - e^{-gamma t_p}) background photons.
    Stage two couples the excited atoms to each prepared field sample and runs
    the spontaneous (or echo, when t_pi_us is set) protocol.  Stage one draws
    from each trajectory's stream before the propagation does.
    """
    system = config.system
    if system.n_th <= 0:
        raise ConfigurationError("thermalized preparation needs n_th > 0")
    t_p = thermalization_time(config)
    gamma = system.gamma
    alpha0 = math.sqrt(system.nbar) * math.exp(0.5 * gamma * t_p)
    prep_cut = FockCutoff(max(default_cutoff(alpha0 * alpha0), system.fock().nmax))
    run_cut = system.fock()
    spin = system.spin
    atomic = np.zeros(spin.dim)
    atomic[-1] = 1.0
    bath = system.bath()

    def provider(_: int, rng: np.random.Generator) -> JointState:
        c0 = coherent_field_state(alpha0, prep_cut)
        cT, _rec = field_jump_process(c0, bath, t_p, rng, record_jumps=False)
        fld = np.zeros(run_cut.dim, dtype=np.complex128)
        k = min(run_cut.dim, cT.size)
        fld[:k] = cT[:k]
        norm = np.linalg.norm(fld)
        if norm < 0.5:
            raise ConfigurationError("run cutoff truncates most of the prepared field; raise it")
        return product_state(atomic, fld / norm, spin, run_cut)

    echo_time = config.t_pi_us if config.t_pi_us is not None and config.t_pi_us < config.times_us()[-1] else None
    phi = config.phi_grid()
    times = config.times_us()
    P, stderr, extra = _run_signal(config, times, echo_time=echo_time, initial_provider=provider)
    up, lo = _envelope_arrays(times, system, echo_time=echo_time)
    return RabiSeries(
        phi=phi,
        t=times,
        P=P,
        P_stderr=stderr,
        P_upper=up,
        P_lower=lo,
        flight_phi=flight_limit(system.nbar),
        meta=_series_meta(config, {"t_p_us": t_p, "alpha0": alpha0, **extra}),
    )


def run_envelopes(config: ExperimentConfig) -> RabiSeries:
    """Analytic-only series: closed-form signal with dissipative envelopes."""
    phi = config.phi_grid()
    times = config.times_us()
    meso = config.system.meso()
    cut = config.system.fock()
    P = np.array([mesoscopic_rabi(meso.spin.j, meso.spin.j, t, meso, cutoff=cut) for t in times])
    up, lo = _envelope_arrays(times, config.system)
    return RabiSeries(
        phi=phi,
        t=times,
        P=P,
        P_stderr=np.zeros(times.size),
        P_upper=up,
        P_lower=lo,
        flight_phi=flight_limit(config.system.nbar),
        meta=_series_meta(config, {"analytic": True}),
    )


def run_experiment(config: ExperimentConfig) -> RabiSeries:
    """Dispatch one configuration to its protocol runner."""
    if config.mode == "spontaneous":
        return run_spontaneous(config)
    if config.mode == "echo":
        return run_echo(config)
    if config.mode == "thermal":
        return run_thermalized(config)
    if config.mode == "envelopes-only":
        return run_envelopes(config)
    raise ConfigurationError(f"mode {config.mode!r} does not produce a series; use validate()")


# --- harmonic contrast measurement ---------------------------------------------


def _phase_columns(
    phi: np.ndarray,
    q: int,
    params: MesoParams,
    bath: BathParams | None,
    cutoff: FockCutoff,
    echo_phi: float | None,
) -> np.ndarray:
    """Full model factor of harmonic q at each phase sample.

    Carries the overlap magnitude and phase, the fast carrier, and (when a
    bath is given) the dissipative damping and chirp, so a constant complex
    amplitude is all that remains to fit.
    """
    carrier = 2.0 * params.nbar + params.c
    out = np.empty(phi.size, dtype=np.complex128)
    for k, ph in enumerate(phi):
        t = params.time_of(ph)
        if echo_phi is None:
            r = _overlap_by_q(q, t, params, cutoff)
            signed = ph
            if bath is not None:
                ev = decoherence_free(q, t, params, bath)
                r *= math.exp(-ev.d) * np.exp(1j * ev.theta)
        else:
            signed = 2.0 * echo_phi - ph
            r = _overlap_by_q(q, params.time_of(abs(signed)), params, cutoff)
            if signed < 0:
                r = r.conjugate()
            if bath is not None:
                ev = decoherence_echo(q, params.time_of(echo_phi), t, params, bath)
                r *= math.exp(-ev.d) * np.exp(1j * ev.theta)
        out[k] = r * np.exp(-1j * q * carrier * signed)
    return out


def fit_harmonics(
    phi: np.ndarray,
    P: np.ndarray,
    params: MesoParams,
    q_values: Sequence[int],
    bath: BathParams | None = None,
    cutoff: FockCutoff | None = None,
    echo_phi: float | None = None,
) -> dict[int, float]:
    """Least-squares amplitude of each model harmonic over a phase window.

    The regressors carry the full model factor (overlap, fast carrier, and
    when a bath is given the dissipative damping and chirp), so the fitted
    complex amplitude per harmonic is a constant, nominally 2 A_q.  Returns
    the fitted amplitude magnitudes |w_q|; robust to sampling noise.
    """
    phi = np.asarray(phi, dtype=float)
    P = np.asarray(P, dtype=float)
    if phi.shape != P.shape or phi.ndim != 1:
        raise ConfigurationError("phi and P must be 1-D arrays of equal length")
    if phi.size < 2 * len(q_values) + 2:
        raise ConfigurationError(f"{phi.size} samples cannot constrain {len(q_values)} harmonics")
    if cutoff is None:
        cutoff = params.default_cutoff()
    cols = [np.ones(phi.size)]
    for q in q_values:
        z = _phase_columns(phi, q, params, bath, cutoff, echo_phi)
        cols.append(z.real)
        cols.append(z.imag)
    design = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(design, P, rcond=None)
    return {q: float(math.hypot(coef[1 + 2 * i], coef[2 + 2 * i])) for i, q in enumerate(q_values)}


def measure_contrast(
    phi: np.ndarray,
    P: np.ndarray,
    params: MesoParams,
    center_phi: float,
    order: int,
    bath: BathParams | None = None,
    cutoff: FockCutoff | None = None,
    echo_phi: float | None = None,
    half_width: float | None = None,
) -> float:
    """Peak-to-peak revival contrast from a windowed harmonic fit.

    Within the window around a revival of order q_r only harmonics at
    multiples of q_r are slowly varying; the amplitudes are fitted over the
    window and the model swing is evaluated at the window center, where the
    swing is twice the sum of the odd-multiple terms (even multiples raise
    both extremes together).
    """
    if order < 1:
        raise ConfigurationError(f"revival order must be >= 1, got {order}")
    if half_width is None:
        half_width = _window_half_width(params.spin)
    if cutoff is None:
        cutoff = params.default_cutoff()
    mask = np.abs(np.asarray(phi) - center_phi) <= half_width
    if mask.sum() < 8:
        raise ConfigurationError(f"only {int(mask.sum())} samples inside the fit window")
    q_values = list(range(order, int(2 * params.spin.j) + 1, order))
    w = fit_harmonics(np.asarray(phi)[mask], np.asarray(P)[mask], params, q_values,
                      bath=bath, cutoff=cutoff, echo_phi=echo_phi)
    total = 0.0
    center = np.array([center_phi])
    for q in q_values:
        if (q // order) % 2 == 1:
            scale = abs(_phase_columns(center, q, params, bath, cutoff, echo_phi)[0])
            total += w[q] * scale
    return 2.0 * total


def predicted_contrast(
    t: float,
    system: SystemConfig,
    echo_time: float | None = None,
) -> float:
    """Analytic revival contrast: the dissipative envelope gap at time t."""
    up, lo = dissipative_envelopes(t, system.meso(), system.bath(), cutoff=system.fock(),
                                   echo_time=echo_time)
    return up - lo


# --- built-in validation bundle -------------------------------------------------


@dataclass
class ValidationCheck:
    name: str
    passed: bool
    measured: float
    bound: str
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[ValidationCheck]
    elapsed_s: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        lines = []
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            line = f"{tag}  {c.name:<24} measured={c.measured:.6g}  bound: {c.bound}"
            if c.detail:
                line += f"  ({c.detail})"
            lines.append(line)
        tag = "PASS" if self.passed else "FAIL"
        lines.append(f"{tag}  {len(self.checks)} checks in {self.elapsed_s:.1f} s")
        return "\n".join(lines)


def _excitation_drift(n_atoms: int, nbar: float, nmax: int, dt: float, phi_stop: float) -> float:
    from .exact_dynamics import evolve

    sysc = SystemConfig(n_atoms=n_atoms, nbar=nbar, g_over_gamma=math.inf, cutoff=nmax)
    par = sysc.tc()
    init = excited_initial(sysc)
    t = sysc.time_of_phi(phi_stop)
    before = init.excitation_expectation()
    after = evolve(init, par, IntegratorConfig(dt=dt), t).excitation_expectation()
    return abs(after - before)


def validate(config: ExperimentConfig | None = None, dt_override: float | None = None) -> ValidationReport:
    """Fast self-check bundle: conservation and integrator order, the vacuum
    Rabi oracle, trajectory-vs-density-matrix agreement, photon-count
    statistics, analytic signal bounds, and formula invariants.

    Deterministic for a fixed seed; `dt_override` replaces the conservation
    check's step (a deliberately coarse value makes that check fail, which is
    the intended negative control).
    """
    seed = 7041 if config is None else config.seed
    t0 = _time.perf_counter()
    checks: list[ValidationCheck] = []

    dt = 0.004 if dt_override is None else dt_override
    drift = _excitation_drift(2, 6.0, 30, dt, 1.0)
    checks.append(ValidationCheck("excitation-conservation", drift < 1e-7, drift, "< 1e-7",
                                  f"dt={dt:g}"))

    d_coarse = _excitation_drift(2, 6.0, 30, 0.008, 1.0)
    d_fine = _excitation_drift(2, 6.0, 30, 0.004, 1.0)
    ratio = d_coarse / d_fine if d_fine > 0 else math.inf
    checks.append(ValidationCheck("integrator-order", 8.0 <= ratio <= 80.0, ratio, "in [8, 80]",
                                  "drift ratio for a step doubling"))

    sysv = SystemConfig(n_atoms=1, nbar=1e-12, g_over_gamma=math.inf, cutoff=8)
    par = TCParams(g=sysv.g, spin=sysv.spin, cutoff=sysv.fock())
    from .hilbert import basis_product_state

    init = basis_product_state(0.5, 0, sysv.spin, sysv.fock())
    ts = np.linspace(0.05, 4.0 * math.pi / sysv.g, 40)
    ser = exact_rabi_series(init, par, IntegratorConfig(dt=0.002), ts)
    err = np.abs(ser.P - np.cos(0.5 * sysv.g * ts) ** 2).max()
    checks.append(ValidationCheck("vacuum-rabi", err < 1e-6, err, "< 1e-6"))

    sysm = SystemConfig(n_atoms=1, nbar=3.0, g_over_gamma=50.0, n_th=0.2, cutoff=18)
    parm = sysm.tc()
    integm = IntegratorConfig.for_cutoff(sysm.fock())
    tmax = sysm.time_of_phi(2.5)
    tsm = np.linspace(tmax / 8, tmax, 8)
    res = mc_ensemble(parm, sysm.bath(), integm, tsm, n_traj=200, seed=seed,
                      initial=excited_initial(sysm))
    rho0 = np.outer(excited_initial(sysm).amps.ravel(), excited_initial(sysm).amps.ravel().conj())
    out = master_solve(rho0, dense_hamiltonian(parm), thermal_jump_ops(sysm.bath(), sysm.fock(), sysm.spin),
                       tsm, 0.02 / sysm.g)
    dimF = sysm.fock().dim
    Pm = np.array([np.trace(r.reshape(2, dimF, 2, dimF)[1, :, 1, :]).real for r in out])
    z = float((np.abs(res.mean - Pm) / res.stderr).max())
    checks.append(ValidationCheck("mc-vs-master", z < 4.5, z, "max |z| < 4.5", "200 trajectories"))

    rng = np.random.default_rng(seed)
    bathp = BathParams(gamma=0.3)
    cutp = FockCutoff(30)
    counts = np.array([
        field_jump_process(coherent_field_state(2.0, cutp), bathp, 2.0, rng)[1].count()
        for _ in range(400)
    ], dtype=float)
    lam = 4.0 * (1.0 - math.exp(-0.3 * 2.0))
    zc = abs(counts.mean() - lam) / (counts.std(ddof=1) / math.sqrt(counts.size))
    checks.append(ValidationCheck("poisson-jumps", zc < 4.0, zc, "|z| < 4.0", "400 trajectories"))

    theta, gt = 0.5 * math.pi, 0.1
    vals = np.array([
        np.exp(1j * theta * field_jump_process(coherent_field_state(2.0, cutp), bathp, gt / 0.3, rng)[1].count())
        for _ in range(400)
    ])
    want = cat_decoherence(theta, gt / 0.3, 4.0, 0.3)
    se = math.sqrt((vals.real.var(ddof=1) + vals.imag.var(ddof=1)) / vals.size)
    zk = abs(vals.mean() - want) / se
    checks.append(ValidationCheck("cat-coherence", zk < 4.0, zk, "|z| < 4.0", "400 trajectories"))

    sys2 = SystemConfig(n_atoms=2, nbar=15.0, g_over_gamma=math.inf)
    meso2 = sys2.meso()
    cut2 = sys2.fock()
    viol = 0.0
    for ph in np.linspace(0.02, 2.0 * math.pi, 400):
        t = meso2.time_of(ph)
        sig = mesoscopic_rabi(meso2.spin.j, meso2.spin.j, t, meso2, cutoff=cut2)
        up, lo = dissipative_envelopes(t, meso2, sys2.bath(), cutoff=cut2)
        viol = max(viol, sig - up, lo - sig)
    checks.append(ValidationCheck("signal-within-envelopes", viol < 0.05, viol, "< 0.05",
                                  "analytic signal vs envelopes, N=2"))

    from .mesoscopic import signal_coefficients

    co = signal_coefficients(1.5, 1.5, SpinQuantum(3))
    total = co.a0 + 2.0 * sum(co[q] for q in range(1, 4))
    checks.append(ValidationCheck("coefficient-sum", abs(total - 1.0) < 1e-12, abs(total - 1.0),
                                  "< 1e-12", "N=3 weights resum to 1"))

    tref = meso2.time_of(2.0)
    envs = []
    for cval in (0.0, 1.0, sys2.n_atoms + 1.0):
        sc = SystemConfig(n_atoms=2, nbar=15.0, c=cval)
        envs.append(dissipative_envelopes(tref, sc.meso(), sc.bath(), cutoff=cut2))
    same = envs[0] == envs[1] == envs[2]
    checks.append(ValidationCheck("c-independence", same, 0.0 if same else 1.0, "byte-identical",
                                  "envelopes for c in {0, 1, N+1}"))

    sys_e = SystemConfig(n_atoms=2, nbar=15.0, g_over_gamma=1540.0)
    t_pi = sys_e.meso().time_of(0.8)
    eps = 1e-9
    a = dissipative_envelopes(t_pi - eps, sys_e.meso(), sys_e.bath(), cutoff=cut2)
    b = dissipative_envelopes(t_pi + eps, sys_e.meso(), sys_e.bath(), cutoff=cut2, echo_time=t_pi)
    gap = max(abs(a[0] - b[0]), abs(a[1] - b[1]))
    checks.append(ValidationCheck("echo-continuity", gap < 1e-6, gap, "< 1e-6",
                                  "envelopes across the pulse instant"))

    return ValidationReport(checks=checks, elapsed_s=_time.perf_counter() - t0)
