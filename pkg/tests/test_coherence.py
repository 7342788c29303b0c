import math

import numpy as np
import pytest

from rpcompass.coherence import (
    ST_BASIS,
    CoherenceOptions,
    TraceSeries,
    coherence_envelope,
    coherence_trace,
    diagonal_in_basis,
    relative_entropy_of_coherence,
    von_neumann_entropy,
)
from rpcompass.config import HyperfineTensor
from rpcompass.dynamics import FactorizedEvolution, evolve_joint
from rpcompass.experiments import equal_tensor_system
from rpcompass.hamiltonian import build_radical_hamiltonians

from conftest import make_config

SINGLET = np.outer(ST_BASIS[0].conj(), ST_BASIS[0])
PRODUCT = CoherenceOptions("electrons", "product_z")
ST = CoherenceOptions("electrons", "singlet_triplet")


def test_entropy_examples(rng):
    v = rng.normal(size=5) + 1j * rng.normal(size=5)
    v /= np.linalg.norm(v)
    assert abs(von_neumann_entropy(np.outer(v, v.conj()))) < 1e-12
    assert math.isclose(von_neumann_entropy(np.eye(8) / 8), math.log(8), rel_tol=1e-14)
    assert math.isclose(von_neumann_entropy(np.diag([0.5, 0.5, 0, 0])), math.log(2), rel_tol=1e-14)


def test_entropy_preconditions():
    with pytest.raises(ValueError, match="trace"):
        von_neumann_entropy(np.eye(2))
    with pytest.raises(ValueError, match="negative"):
        von_neumann_entropy(np.diag([1.1, -0.1]))
    # tiny negative eigenvalues are clamped
    assert von_neumann_entropy(np.diag([1 + 1e-11, -1e-11])) == pytest.approx(0.0, abs=1e-9)


def test_singlet_coherence():
    assert math.isclose(relative_entropy_of_coherence(SINGLET, PRODUCT), math.log(2), rel_tol=1e-12)
    assert relative_entropy_of_coherence(SINGLET, ST) < 1e-12


def test_zero_iff_diagonal(rng):
    p = rng.random(4)
    diag = np.diag(p / p.sum()).astype(complex)
    assert relative_entropy_of_coherence(diag, PRODUCT) == 0.0
    off = diag.copy()
    off[1, 2] = off[2, 1] = 0.05
    assert relative_entropy_of_coherence(off, PRODUCT) > 1e-4
    # a state diagonal in the singlet/triplet basis has zero coherence there
    q = rng.random(4)
    st_diag = ST_BASIS.conj().T @ np.diag(q / q.sum()) @ ST_BASIS
    assert relative_entropy_of_coherence(st_diag, ST) < 1e-12
    assert relative_entropy_of_coherence(st_diag, PRODUCT) > 1e-4


def test_unnormalized_scaling():
    rho = 0.3 * SINGLET
    full = relative_entropy_of_coherence(rho, PRODUCT)
    raw = relative_entropy_of_coherence(rho, CoherenceOptions("electrons", "product_z", renormalize=False))
    assert math.isclose(full, math.log(2))
    assert math.isclose(raw, 0.3 * math.log(2))


def test_options_validated():
    with pytest.raises(ValueError):
        CoherenceOptions(subsystem="nuclei")
    with pytest.raises(ValueError):
        CoherenceOptions(basis="x")


def _st_joint_unitary(na, nb):
    """Change of basis to (S/T of the electrons) x (nuclear Zeeman), via explicit permutation."""
    d = 4 * na * nb
    perm = np.zeros((d, d))
    for a in range(2):
        for i in range(na):
            for b in range(2):
                for j in range(nb):
                    src = ((a * na + i) * 2 + b) * nb + j
                    dst = ((a * 2 + b) * na + i) * nb + j
                    perm[dst, src] = 1
    return np.kron(ST_BASIS, np.eye(na * nb)) @ perm


def test_basis_covariance(presets):
    cfg = presets["fad-trp-1-1"].with_field(theta=0.9)
    rho = evolve_joint(cfg, 0.7e-6).matrix
    rho = rho / np.trace(rho)
    dims = (3, 3)
    u = _st_joint_unitary(*dims)
    conj = u @ rho @ u.conj().T
    assert np.allclose(np.sort(diagonal_in_basis(rho, "singlet_triplet", dims)), np.sort(np.diag(conj).real),
                       atol=1e-12)
    from rpcompass.coherence import _shannon

    via_matrix = _shannon(np.diag(conj).real) - von_neumann_entropy(conj)
    direct = relative_entropy_of_coherence(rho, CoherenceOptions("joint", "singlet_triplet"), dims)
    assert abs(via_matrix - direct) < 1e-10


def test_series_nonnegative_and_metadata(presets):
    cfg = presets["fad-trp-2-2"].with_field(theta=0.5)
    s = coherence_trace(cfg, np.linspace(0, 2e-6, 7), CoherenceOptions("joint", "singlet_triplet"))
    assert isinstance(s, TraceSeries)
    assert np.all(s.values >= 0)
    assert s.metadata["config_digest"] == cfg.digest()
    assert s.metadata["basis"] == "singlet_triplet"


def test_axial_theta_zero_constant():
    cfg = make_config([(0, 0, 1.7569), (0, 0, 0.6)], [(0, 0, 1.0812)], spin=1.0, k=1.0)
    s = coherence_trace(cfg, np.linspace(0, 10e-6, 41))
    assert np.ptp(s.values) < 1e-9
    assert s.values[0] > 0


def test_truncates_when_trace_underflows(presets):
    cfg = presets["fad-trp-1-1"].with_rate(1e9)
    s = coherence_trace(cfg, [0.0, 1e-7, 1e-6])
    assert len(s.values) == 2
    assert s.metadata["truncated_at"] == 1e-6


def test_more_nuclei_lose_electron_coherence_faster(presets):
    c0 = math.log(2)
    two = coherence_envelope(presets["fad-trp-2-2"], 2e-6)
    six = coherence_envelope(presets["fad-trp-3-3"], 2e-6)
    assert six < 0.1 * c0
    assert six < two


def test_transverse_components_suppress_coherence():
    levels = [coherence_envelope(equal_tensor_system(HyperfineTensor(a, a, 1.0812)), 2e-6) for a in (0, 0.08, 0.17)]
    assert levels[0] > levels[1] > levels[2]


def test_oscillation_peak_matches_hyperfine_gap():
    cfg = make_config([(0, 0, 1.7569)], [(0, 0, 1.0812)], spin=1.0)
    span, n = 4e-6, 4000
    t = np.arange(n) * span / n
    c = coherence_trace(cfg, t, PRODUCT).values
    spec = np.abs(np.fft.rfft(c - c.mean()))
    freqs = 2 * np.pi * np.fft.rfftfreq(n, span / n)
    peak = freqs[np.argmax(spec[1:]) + 1]
    ha, hb = build_radical_hamiltonians(cfg)
    gaps = []
    for h in (ha, hb):
        e = np.linalg.eigvalsh(h.matrix)
        gaps.append(np.abs(e[:, None] - e[None, :]).ravel())
    ga, gb = gaps
    predicted = np.concatenate([ga, gb, np.abs(ga[:, None] + gb[None, :]).ravel(),
                                np.abs(ga[:, None] - gb[None, :]).ravel()])
    bin_width = freqs[1]
    assert np.min(np.abs(predicted - peak)) <= bin_width


def test_factorized_electron_state_used_for_electron_subsystem(presets):
    cfg = presets["fad-trp-1-1"]
    ev = FactorizedEvolution(cfg)
    s = coherence_trace(cfg, [1e-6], PRODUCT)
    assert math.isclose(s.values[0], relative_entropy_of_coherence(ev.electron_state(1e-6), PRODUCT), rel_tol=1e-12)
