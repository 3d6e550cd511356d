"""Truncated product space: state constructors, observables, stable subspaces."""

import math

import numpy as np
import pytest

from cavitas.errors import ConfigurationError, DomainError, TruncationError
from cavitas.hilbert import (
    FockCutoff,
    JointState,
    assemble_from_subspaces,
    basis_product_state,
    coherent_field_state,
    default_cutoff,
    dump_state_csv,
    excited_population,
    field_phase_distribution,
    product_state,
    split_by_subspace,
    subspace_indices,
    subspace_labels,
)
from cavitas.su2 import SpinQuantum


def test_default_cutoff_values() -> None:
    assert default_cutoff(15.0) == 56
    assert default_cutoff(0.0) == 10
    # monotone in nbar
    values = [default_cutoff(x) for x in (1.0, 5.0, 10.0, 20.0, 40.0)]
    assert values == sorted(values)
    with pytest.raises(ConfigurationError):
        default_cutoff(-1.0)


def test_fock_cutoff_validation() -> None:
    assert FockCutoff(10).dim == 11
    with pytest.raises(ConfigurationError):
        FockCutoff(-1)
    with pytest.raises(ConfigurationError):
        FockCutoff(2.5)  # type: ignore[arg-type]


def test_coherent_state_statistics() -> None:
    """Truncated coherent state keeps Poisson mean and variance."""
    cut = FockCutoff(56)
    f = coherent_field_state(math.sqrt(15.0), cut)
    n = np.arange(cut.dim)
    w = np.abs(f) ** 2
    assert abs(w.sum() - 1.0) < 1e-12
    assert abs((n * w).sum() - 15.0) < 1e-8
    var = ((n - 15.0) ** 2 * w).sum()
    assert abs(var - 15.0) < 1e-6


def test_coherent_state_phase_convention() -> None:
    cut = FockCutoff(20)
    f = coherent_field_state(2.0 * np.exp(1j * 0.7), cut)
    # amplitude on |n> carries phase n * arg(alpha)
    assert abs(np.angle(f[3]) - 3 * 0.7) < 1e-12


def test_coherent_state_rejects_tight_cutoff() -> None:
    with pytest.raises(TruncationError):
        coherent_field_state(3.0, FockCutoff(30))


def test_vacuum_coherent_state() -> None:
    f = coherent_field_state(0.0, FockCutoff(8))
    assert f[0] == 1.0
    assert np.all(f[1:] == 0.0)


def test_product_state_shapes_and_norm() -> None:
    spin = SpinQuantum(2)
    cut = FockCutoff(30)
    atomic = np.zeros(3)
    atomic[-1] = 1.0
    state = product_state(atomic, coherent_field_state(2.0, cut), spin, cut)
    assert state.amps.shape == (3, 31)
    assert abs(state.norm2() - 1.0) < 1e-12
    assert abs(state.population(1.0) - 1.0) < 1e-12
    assert abs(state.mean_photon() - 4.0) < 1e-6


def test_product_state_rejects_unnormalized_factor() -> None:
    spin = SpinQuantum(1)
    cut = FockCutoff(5)
    with pytest.raises(ConfigurationError):
        product_state(np.array([0.5, 0.5]), coherent_field_state(0.0, cut), spin, cut)


def test_basis_product_state() -> None:
    spin = SpinQuantum(3)
    cut = FockCutoff(12)
    state = basis_product_state(0.5, 7, spin, cut)
    assert state.amps[spin.index_of(0.5), 7] == 1.0
    assert abs(state.excitation_expectation() - (0.5 + 7.0)) < 1e-12
    assert excited_population(state, 0.5) == 1.0
    with pytest.raises(DomainError):
        basis_product_state(0.5, 13, spin, cut)


def test_populations_sum_to_one() -> None:
    rng = np.random.default_rng(11)
    spin = SpinQuantum(2)
    cut = FockCutoff(9)
    amps = rng.normal(size=(3, 10)) + 1j * rng.normal(size=(3, 10))
    state = JointState(amps, spin, cut)
    p = state.populations()
    assert abs(p.sum() - 1.0) < 1e-12
    assert np.all(p >= 0.0)


def test_subspace_split_assemble_roundtrip() -> None:
    """The equal-excitation ladders partition every amplitude exactly once."""
    rng = np.random.default_rng(7)
    spin = SpinQuantum(3)
    cut = FockCutoff(8)
    amps = rng.normal(size=(4, 9)) + 1j * rng.normal(size=(4, 9))
    state = JointState(amps, spin, cut)
    blocks = split_by_subspace(state)
    total = sum(len(v) for v in blocks.values())
    assert total == 4 * 9
    back = assemble_from_subspaces(blocks, spin, cut)
    assert np.array_equal(back.amps, state.amps)


def test_subspace_excitation_label() -> None:
    # every member of ladder p has total excitation J + p
    spin = SpinQuantum(2)
    cut = FockCutoff(6)
    for p in subspace_labels(spin, cut):
        for i, n in subspace_indices(spin, cut, p):
            m = spin.m_values[i]
            assert m + n == spin.j + p
    with pytest.raises(DomainError):
        subspace_indices(spin, cut, cut.nmax + 1)


def test_phase_distribution_peaks_at_field_phase() -> None:
    spin = SpinQuantum(1)
    cut = FockCutoff(40)
    atomic = np.array([0.0, 1.0])
    state = product_state(atomic, coherent_field_state(3.0 * np.exp(1j * 1.2), cut), spin, cut)
    centers, hist = field_phase_distribution(state, 64)
    assert abs(hist.sum() - 1.0) < 1e-12
    assert abs(centers[int(np.argmax(hist))] - 1.2) < 0.1
    with pytest.raises(ConfigurationError):
        field_phase_distribution(state, 4)


def test_dump_state_csv(tmp_path) -> None:
    state = basis_product_state(0.5, 1, SpinQuantum(1), FockCutoff(2))
    path = tmp_path / "state.csv"
    dump_state_csv(state, str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "m,n,re,im"
    assert len(lines) == 1 + 2 * 3
    assert "0.5,1,1,0" in lines
