"""Acceptance suite: one test per release criterion.

Every test prints a single pass/fail line with its measured values before
asserting, so the run log always shows the numbers behind each verdict.  Two
criteria are known not to hold for this model family and fail honestly rather
than being loosened: the revival-visibility bound at the strongest damping
(criterion 9, first clause) and the baseline scaling-rate band (criterion 13).
"""

import math
import time
import warnings

import numpy as np
import pytest
from scipy.signal import find_peaks

from cavitas.dissipation import (
    BathParams,
    cat_decoherence,
    field_jump_process,
    master_solve,
    mc_ensemble,
    thermal_jump_ops,
)
from cavitas.exact_dynamics import IntegratorConfig, dense_hamiltonian, evolve, exact_rabi_series
from cavitas.hilbert import FockCutoff, basis_product_state, coherent_field_state
from cavitas.mesoscopic import ValidityWarning, envelopes, mesoscopic_rabi
from cavitas.protocols import (
    ExperimentConfig,
    SystemConfig,
    aligned_integrator,
    excited_initial,
    measure_contrast,
    predicted_contrast,
    run_echo,
    run_envelopes,
    run_spontaneous,
    run_thermalized,
)
from cavitas.su2 import SpinQuantum

TWO_PI = 2.0 * math.pi
SEED = 7041


def _report(num: int, name: str, ok: bool, detail: str) -> None:
    print(f"criterion {num:02d} {name}: {'PASS' if ok else 'FAIL'}  {detail}")


def test_criterion_01_conservation() -> None:
    """Lossless evolution conserves norm and total excitation over a full turn."""
    t0 = time.perf_counter()
    worst_norm = 0.0
    worst_exc = 0.0
    for n_atoms in (1, 2, 3):
        s = SystemConfig(n_atoms=n_atoms, nbar=15.0, g_over_gamma=math.inf, cutoff=130)
        init = excited_initial(s)
        fin = evolve(init, s.tc(), IntegratorConfig(dt=0.001), s.time_of_phi(TWO_PI))
        worst_norm = max(worst_norm, abs(fin.norm2() - 1.0))
        worst_exc = max(worst_exc, abs(fin.excitation_expectation() - init.excitation_expectation()))
    elapsed = time.perf_counter() - t0
    ok = worst_norm < 1e-6 and worst_exc < 1e-8 and elapsed < 60.0
    _report(1, "conservation", ok,
            f"norm_drift={worst_norm:.2e} (<1e-6) excitation_drift={worst_exc:.2e} (<1e-8) "
            f"runtime={elapsed:.1f}s (<60s)")
    assert worst_norm < 1e-6
    assert worst_exc < 1e-8
    assert elapsed < 60.0


def test_criterion_02_vacuum_rabi_oracle() -> None:
    """One atom, empty cavity: exact P_e(t) = cos^2(g t / 2) to 1e-6."""
    spin = SpinQuantum(1)
    cut = FockCutoff(8)
    from cavitas.exact_dynamics import TCParams

    params = TCParams(g=1.0, spin=spin, cutoff=cut)
    init = basis_product_state(0.5, 0, spin, cut)
    ts = np.linspace(0.1, 4.0 * TWO_PI, 80)
    ser = exact_rabi_series(init, params, IntegratorConfig(dt=0.002), ts)
    err = float(np.abs(ser.P - np.cos(0.5 * ts) ** 2).max())
    ok = err < 1e-6
    _report(2, "vacuum-rabi-oracle", ok, f"max_err={err:.2e} (<1e-6)")
    assert err < 1e-6


def test_criterion_03_envelope_fit_large_field() -> None:
    """Exact extrema near the first revival sit on the analytic envelopes."""
    t0 = time.perf_counter()
    s = SystemConfig(n_atoms=1, nbar=40.0, g_over_gamma=math.inf)
    phi = np.arange(TWO_PI - 0.3, TWO_PI + 0.3001, 0.002)
    ts = phi * (2.0 * math.sqrt(s.nbar) / s.g)
    integ = IntegratorConfig(dt=0.04 / math.sqrt(s.fock().nmax))
    ser = exact_rabi_series(excited_initial(s), s.tc(), integ, ts)
    pair = [envelopes(t, s.meso(), cutoff=s.fock()) for t in ts]
    up = np.array([p[0] for p in pair])
    lo = np.array([p[1] for p in pair])
    peaks, _ = find_peaks(ser.P, prominence=0.01)
    troughs, _ = find_peaks(-ser.P, prominence=0.01)
    err_up = float(np.abs(ser.P[peaks] - up[peaks]).max())
    err_lo = float(np.abs(ser.P[troughs] - lo[troughs]).max())
    elapsed = time.perf_counter() - t0
    ok = err_up < 0.05 and err_lo < 0.05 and peaks.size >= 5 and troughs.size >= 5 and elapsed < 120.0
    _report(3, "envelope-fit-large-field", ok,
            f"{peaks.size} maxima err={err_up:.4f}, {troughs.size} minima err={err_lo:.4f} "
            f"(<0.05) runtime={elapsed:.1f}s (<120s)")
    assert peaks.size >= 5 and troughs.size >= 5
    assert err_up < 0.05
    assert err_lo < 0.05
    assert elapsed < 120.0


def test_criterion_04_revival_positions() -> None:
    """Three-atom envelope gap peaks at 2pi/3, pi, 4pi/3, 2pi and nowhere else."""
    s = SystemConfig(n_atoms=3, nbar=15.0, g_over_gamma=math.inf)
    phi = np.arange(0.5, 7.5001, 0.002)
    ts = phi * (2.0 * math.sqrt(s.nbar) / s.g)
    meso = s.meso()
    cut = s.fock()
    gap = np.array([(lambda p: p[0] - p[1])(envelopes(t, meso, cutoff=cut)) for t in ts])
    peaks, props = find_peaks(gap, prominence=0.005, distance=int(0.3 / 0.002))
    expected = np.array([TWO_PI / 3.0, math.pi, 4.0 * math.pi / 3.0, TWO_PI])
    errs = np.array([np.abs(phi[peaks] - e).min() for e in expected])
    strays = [
        float(phi[i])
        for i, prom in zip(peaks, props["prominences"])
        if prom >= 0.02 and np.abs(phi[i] - expected).min() > 0.1
    ]
    ok = bool(errs.max() < 0.1 and not strays)
    _report(4, "revival-positions", ok,
            f"position_errs={np.round(errs, 4).tolist()} (<0.1) strays={strays}")
    assert errs.max() < 0.1
    assert not strays


def _emission_counts(n_samples: int) -> np.ndarray:
    """Field-only jump ensemble shared by the two count-statistics criteria."""
    bath = BathParams(gamma=1.0)
    field0 = coherent_field_state(math.sqrt(10.0), FockCutoff(45))
    streams = np.random.SeedSequence(SEED).spawn(n_samples)
    return np.array([
        field_jump_process(field0, bath, 0.1, np.random.default_rng(st))[1].count()
        for st in streams
    ], dtype=float)


def test_criterion_05_cat_decoherence_oracle() -> None:
    """Averaged phase kick e^{i theta N} matches the Poisson generating function."""
    t0 = time.perf_counter()
    theta = 0.5 * math.pi
    k = _emission_counts(2000)
    vals = np.exp(1j * theta * k)
    want = cat_decoherence(theta, 0.1, 10.0, 1.0)
    se_re = float(vals.real.std(ddof=1) / math.sqrt(k.size))
    se_im = float(vals.imag.std(ddof=1) / math.sqrt(k.size))
    z_re = abs(float(vals.real.mean()) - want.real) / se_re
    z_im = abs(float(vals.imag.mean()) - want.imag) / se_im
    elapsed = time.perf_counter() - t0
    ok = z_re < 3.0 and z_im < 3.0 and elapsed < 180.0
    _report(5, "cat-decoherence-oracle", ok,
            f"z_re={z_re:.2f} z_im={z_im:.2f} (<3) runtime={elapsed:.1f}s (<180s)")
    assert z_re < 3.0
    assert z_im < 3.0
    assert elapsed < 180.0


def test_criterion_06_poisson_jump_statistics() -> None:
    """Mean emission count = nbar (1 - e^{-gamma t}) within 3 standard errors."""
    k = _emission_counts(2000)
    lam = 10.0 * (1.0 - math.exp(-0.1))
    se = float(k.std(ddof=1) / math.sqrt(k.size))
    z = abs(float(k.mean()) - lam) / se
    ok = z < 3.0
    _report(6, "poisson-jump-statistics", ok, f"mean={k.mean():.4f} target={lam:.4f} z={z:.2f} (<3)")
    assert z < 3.0


def test_criterion_07_trajectories_match_master() -> None:
    """4000-trajectory ensemble agrees with the dense reference solution."""
    t0 = time.perf_counter()
    s = SystemConfig(n_atoms=1, nbar=6.0, g_over_gamma=308.0, cutoff=30)
    par = s.tc()
    integ = IntegratorConfig.for_cutoff(s.fock())
    tmax = s.time_of_phi(TWO_PI)
    ts = np.linspace(tmax / 50, tmax, 50)
    res = mc_ensemble(par, s.bath(), integ, ts, n_traj=4000, seed=SEED, initial=excited_initial(s))
    init = excited_initial(s)
    rho0 = np.outer(init.amps.ravel(), init.amps.ravel().conj())
    out = master_solve(rho0, dense_hamiltonian(par), thermal_jump_ops(s.bath(), s.fock(), s.spin),
                       ts, 0.012 / s.g)
    dim_f = s.fock().dim
    p_master = np.array([np.trace(r.reshape(2, dim_f, 2, dim_f)[1, :, 1, :]).real for r in out])
    z = np.abs(res.mean - p_master) / res.stderr
    elapsed = time.perf_counter() - t0
    ok = bool(z.max() < 3.0 and elapsed < 600.0)
    _report(7, "trajectories-match-master", ok,
            f"max_z={z.max():.2f} (<3 at 50 samples) runtime={elapsed:.0f}s (<600s)")
    assert z.max() < 3.0
    assert elapsed < 600.0


def test_criterion_08_dissipative_envelope_accuracy() -> None:
    """Fitted revival contrast at the half-turn matches the damped envelope gap."""
    t0 = time.perf_counter()
    s = SystemConfig(n_atoms=2, nbar=15.0, g_over_gamma=1540.0)
    par = s.tc()
    center = math.pi
    phi = np.arange(center - 0.22, center + 0.2201, 0.004)
    ts = np.array([s.time_of_phi(p) for p in phi])
    integ = aligned_integrator(par, ts[1] - ts[0])
    res = mc_ensemble(par, s.bath(), integ, ts, n_traj=3000, seed=SEED, initial=excited_initial(s))
    measured = measure_contrast(phi, res.mean, s.meso(), center, 2, bath=s.bath(),
                                cutoff=s.fock(), half_width=0.2)
    predicted = predicted_contrast(s.time_of_phi(center), s)
    diff = abs(measured - predicted)
    elapsed = time.perf_counter() - t0
    ok = diff < 0.03
    _report(8, "dissipative-envelope-accuracy", ok,
            f"measured={measured:.4f} predicted={predicted:.4f} |diff|={diff:.4f} (<0.03) "
            f"runtime={elapsed:.0f}s")
    assert diff < 0.03


def test_criterion_09_contrast_presence_absence() -> None:
    """Full-turn revival: visible at weak damping, suppressed at strong damping.

    The strong-damping clause demands contrast below 0.02, but the damped
    envelope gap at these parameters is 0.051: the claim as stated is not
    reachable, so this test fails and reports the measured margin.
    """
    weak = SystemConfig(n_atoms=1, nbar=15.0, g_over_gamma=4310.0)
    strong = SystemConfig(n_atoms=1, nbar=15.0, g_over_gamma=308.0)
    c_weak = predicted_contrast(weak.time_of_phi(TWO_PI), weak)
    c_strong = predicted_contrast(strong.time_of_phi(TWO_PI), strong)
    ok = c_weak > 0.2 and c_strong < 0.02
    _report(9, "contrast-presence-absence", ok,
            f"weak_damping={c_weak:.4f} (>0.2) strong_damping={c_strong:.4f} (<0.02)")
    assert c_weak > 0.2
    assert c_strong < 0.02  # known shortfall: measured 0.0511


def test_criterion_10_echo_revival_contrast() -> None:
    """Reversal pulse at phi 0.8 focuses a revival at 1.6: near-unit contrast
    lossless, damped by the scattered-photon record otherwise."""
    t0 = time.perf_counter()
    lossless = {}
    for n_atoms in (1, 2, 3):
        s = SystemConfig(n_atoms=n_atoms, nbar=15.0, g_over_gamma=math.inf)
        cfg = ExperimentConfig(mode="echo", system=s, t_pi_us=s.time_of_phi(0.8),
                               phi_max=2.0, phi_steps=700)
        ser = run_echo(cfg)
        window = np.abs(ser.phi - 1.6) <= 0.2
        lossless[n_atoms] = float(ser.P[window].max() - ser.P[window].min())
    damped = {}
    for n_atoms in (1, 2, 3):
        s = SystemConfig(n_atoms=n_atoms, nbar=15.0, g_over_gamma=1540.0)
        t_pi = s.time_of_phi(0.8)
        cfg = ExperimentConfig(mode="echo", system=s, t_pi_us=t_pi, trajectories=2000,
                               phi_max=1.8, phi_steps=460, seed=SEED)
        ser = run_echo(cfg)
        fit = measure_contrast(ser.phi, ser.P, s.meso(), 1.6, 1, bath=s.bath(),
                               cutoff=s.fock(), echo_phi=0.8, half_width=0.2)
        pred = predicted_contrast(2.0 * t_pi, s, echo_time=t_pi)
        damped[n_atoms] = (fit, pred, abs(fit - pred))
    elapsed = time.perf_counter() - t0
    ok = all(v > 0.95 for v in lossless.values()) and all(d[2] < 0.03 for d in damped.values())
    _report(10, "echo-revival-contrast", ok,
            "lossless=" + "/".join(f"{lossless[n]:.3f}" for n in (1, 2, 3)) + " (>0.95)  "
            "damped |fit-pred|=" + "/".join(f"{damped[n][2]:.4f}" for n in (1, 2, 3)) +
            f" (<0.03) runtime={elapsed:.0f}s")
    for n_atoms in (1, 2, 3):
        assert lossless[n_atoms] > 0.95
        assert damped[n_atoms][2] < 0.03


def test_criterion_11_finite_temperature_contrast() -> None:
    """Thermal background photons lower the first partial revival's contrast."""
    t0 = time.perf_counter()
    cold_sys = SystemConfig(n_atoms=3, nbar=15.0, g_over_gamma=1540.0)
    cfg_cold = ExperimentConfig(mode="spontaneous", system=cold_sys, trajectories=1000,
                                phi_max=math.pi + 0.2, phi_steps=840, seed=SEED)
    cold_ser = run_spontaneous(cfg_cold)
    cold = measure_contrast(cold_ser.phi, cold_ser.P, cold_sys.meso(), math.pi, 2,
                            bath=cold_sys.bath(), cutoff=cold_sys.fock(), half_width=0.2)
    warm_sys = SystemConfig(n_atoms=3, nbar=15.0, g_over_gamma=1540.0, n_th=0.4)
    cfg_warm = ExperimentConfig(mode="thermal", system=warm_sys, gamma_tp=0.47, trajectories=1000,
                                phi_max=math.pi + 0.2, phi_steps=840, seed=SEED)
    warm_ser = run_thermalized(cfg_warm)
    warm = measure_contrast(warm_ser.phi, warm_ser.P, warm_sys.meso(), math.pi, 2,
                            bath=warm_sys.bath(), cutoff=warm_sys.fock(), half_width=0.2)
    elapsed = time.perf_counter() - t0
    ok = abs(cold - 0.15) <= 0.03 and abs(warm - 0.11) <= 0.03 and cold > warm and elapsed < 1200.0
    _report(11, "finite-temperature-contrast", ok,
            f"cold={cold:.4f} (0.15+-0.03) warm={warm:.4f} (0.11+-0.03) "
            f"reduction={cold - warm:.4f} (>0) runtime={elapsed:.0f}s (<1200s)")
    assert abs(cold - 0.15) <= 0.03
    assert abs(warm - 0.11) <= 0.03
    assert cold > warm
    assert elapsed < 1200.0


def test_criterion_12_offset_independence() -> None:
    """The carrier offset c moves only the fast oscillation, never the envelopes."""
    n_atoms = 2
    # clause 1: the envelope columns are byte-identical across c
    column_sets = []
    signals = []
    for c in (0.0, 1.0, n_atoms + 1.0):
        s = SystemConfig(n_atoms=n_atoms, nbar=15.0, g_over_gamma=math.inf, c=c)
        ser = run_envelopes(ExperimentConfig(mode="envelopes-only", system=s,
                                             phi_max=2.4, phi_steps=300))
        column_sets.append((ser.P_upper.tobytes(), ser.P_lower.tobytes()))
        signals.append(ser.P)
    identical = column_sets[0] == column_sets[1] == column_sets[2]
    signal_moves = bool(np.abs(signals[0] - signals[1]).max() > 0.01)

    # clause 2: envelopes traced through the signal's own extrema agree too
    dphi = 0.002
    phi = np.arange(0.2, 2.4001, dphi)
    curves = {}
    for c in (0.0, 1.0, n_atoms + 1.0):
        s = SystemConfig(n_atoms=n_atoms, nbar=15.0, g_over_gamma=math.inf, c=c)
        meso = s.meso()
        ts = phi * (2.0 * math.sqrt(s.nbar) / s.g)
        P = np.array([mesoscopic_rabi(s.spin.j, s.spin.j, t, meso, cutoff=s.fock()) for t in ts])
        peaks, _ = find_peaks(P)
        troughs, _ = find_peaks(-P)
        curves[c] = (np.interp(phi, phi[peaks], P[peaks]), np.interp(phi, phi[troughs], P[troughs]))
    core = (phi > 0.7) & (phi < 2.2)
    dev = max(
        max(float(np.abs(curves[c][0] - curves[0.0][0])[core].max()),
            float(np.abs(curves[c][1] - curves[0.0][1])[core].max()))
        for c in (1.0, n_atoms + 1.0)
    )
    ok = identical and signal_moves and dev < 0.01
    _report(12, "offset-independence", ok,
            f"envelope_columns_identical={identical} signal_differs={signal_moves} "
            f"traced_envelope_dev={dev:.4f} (<0.01)")
    assert identical
    assert signal_moves
    assert dev < 0.01


def test_criterion_13_baseline_scaling() -> None:
    """The plateau offset from the ideal baseline should shrink ~2x from
    nbar 10 to 40.

    Measured offsets shrink faster (ratio 3.9), outside the accepted band
    [1.5, 3]: the criterion fails honestly with both offsets reported.
    """
    errors = {}
    for nbar in (10.0, 40.0):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ValidityWarning)
            s = SystemConfig(n_atoms=3, nbar=nbar, g_over_gamma=math.inf)
            cfg = ExperimentConfig(mode="spontaneous", system=s, phi_max=1.55, phi_steps=600)
            ser = run_spontaneous(cfg)
        mask = (ser.phi >= 1.1) & (ser.phi <= 1.5)
        errors[nbar] = abs(float(ser.P[mask].mean()) - 5.0 / 16.0)
    ratio = errors[10.0] / errors[40.0]
    ok = 1.5 <= ratio <= 3.0
    _report(13, "baseline-scaling", ok,
            f"offset(nbar=10)={errors[10.0]:.5f} offset(nbar=40)={errors[40.0]:.5f} "
            f"ratio={ratio:.2f} (band [1.5, 3])")
    assert 1.5 <= ratio <= 3.0  # known shortfall: measured ratio 3.87
