"""Time evolution of the radical pair from a singlet start.

With equal singlet and triplet recombination rates the density matrix is
unitary evolution times ``exp(-k t)``. Because the two radical Hamiltonians
act on disjoint factors, every quantity here is assembled from per-radical
Heisenberg-picture electron spin operators, each radical diagonalized once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .config import RadicalPairConfig
from .hamiltonian import RadicalHamiltonian, build_joint_hamiltonian, build_radical_hamiltonians
from .spin_algebra import ComplexMatrix, SpinTriple, hermitian_eig

UNEQUAL_RATES_MSG = (
    "ks != kt: the factorized evolution requires equal recombination rates; "
    "use rpcompass.oracle.integrate_master_equation for unequal rates"
)


class ProjectorPair(NamedTuple):
    qs: ComplexMatrix
    qt: ComplexMatrix


@dataclass(frozen=True)
class EigenSystem:
    """One radical Hamiltonian in its own eigenbasis.

    ``spin_in_eigenbasis`` holds V^dagger S V for the electron spin of the
    radical; ``nuclear_dim`` is the size of the radical's nuclear space.
    """

    eigenvalues: NDArray[np.float64]
    eigenvectors: ComplexMatrix
    spin_in_eigenbasis: SpinTriple
    nuclear_dim: int

    @classmethod
    def from_hamiltonian(cls, h: RadicalHamiltonian) -> EigenSystem:
        w, v = hermitian_eig(h.matrix)
        rotated = SpinTriple(*(v.conj().T @ s @ v for s in h.electron_spin))
        return cls(w, v, rotated, h.dim // 2)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def max_gap(self) -> float:
        return float(self.eigenvalues[-1] - self.eigenvalues[0])

    def heisenberg_spin(self, t: float) -> SpinTriple:
        """exp(-iHt) S exp(iHt) in the original product basis."""
        phase = np.exp(-1j * self.eigenvalues * t)
        v = self.eigenvectors
        out = []
        for s in self.spin_in_eigenbasis:
            st = phase[:, None] * s * phase.conj()[None, :]
            out.append(v @ st @ v.conj().T)
        return SpinTriple(*out)

    def _pair_weights(self) -> ComplexMatrix:
        # g[n, p, q, m] = (S_p)_{mn} (S_q)_{nm}
        s = np.stack(self.spin_in_eigenbasis)
        g = np.einsum("pmn,qnm->npqm", s, s)
        return g.reshape(self.dim, 9 * self.dim)


def correlation_tensor(eig: EigenSystem, t: float) -> ComplexMatrix:
    """R_pq(t) = Tr[S_p exp(-iHt) S_q exp(iHt)] as a 3x3 complex matrix."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return correlation_tensors(eig, np.array([t]))[0]


def correlation_tensors(eig: EigenSystem, times: ArrayLike) -> NDArray[np.complex128]:
    """Correlation tensors at many times, shape (len(times), 3, 3).

    R_pq(t) = sum_mn (S_p)_mn (S_q)_nm exp(i (w_m - w_n) t), evaluated as
    v^T G_pq conj(v) with v = exp(i w t).
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    v = np.exp(1j * np.outer(times, eig.eigenvalues))
    x = (v.conj() @ eig._pair_weights()).reshape(len(times), 9, eig.dim)
    r = np.einsum("tm,tkm->tk", v, x)
    return r.reshape(len(times), 3, 3)


class FactorizedEvolution:
    """Eigen-decomposed radical pair; evaluates observables at arbitrary times."""

    def __init__(self, config: RadicalPairConfig):
        if not config.rates.equal:
            raise ValueError(UNEQUAL_RATES_MSG)
        self.config = config
        ha, hb = build_radical_hamiltonians(config)
        self.eig_a = EigenSystem.from_hamiltonian(ha)
        self.eig_b = EigenSystem.from_hamiltonian(hb)
        self.k = config.rates.ks
        self.n_nuclear = self.eig_a.nuclear_dim * self.eig_b.nuclear_dim

    def singlet_probability(self, times: ArrayLike, include_decay: bool = False) -> NDArray[np.float64]:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times < 0):
            raise ValueError("times must be >= 0")
        ra = correlation_tensors(self.eig_a, times)
        rb = correlation_tensors(self.eig_b, times)
        p = 0.25 + np.einsum("tpq,tpq->t", ra, rb).real / self.n_nuclear
        if include_decay:
            p = p * np.exp(-self.k * times)
        return p

    def joint_state(self, t: float) -> ComplexMatrix:
        """rho(t) = exp(-kt)/N [I/4 - sum_p S_Ap(t) x S_Bp(t)] on the joint space."""
        sa = self.eig_a.heisenberg_spin(t)
        sb = self.eig_b.heisenberg_spin(t)
        dim = self.eig_a.dim * self.eig_b.dim
        rho = 0.25 * np.eye(dim, dtype=np.complex128)
        for a, b in zip(sa, sb):
            rho -= np.kron(a, b)
        return rho * (np.exp(-self.k * t) / self.n_nuclear)

    def electron_state(self, t: float) -> ComplexMatrix:
        """Joint state traced over all nuclei, ordered (electron A, electron B)."""
        sa = self.eig_a.heisenberg_spin(t)
        sb = self.eig_b.heisenberg_spin(t)
        na, nb = self.eig_a.nuclear_dim, self.eig_b.nuclear_dim
        rho = 0.25 * self.n_nuclear * np.eye(4, dtype=np.complex128)
        for a, b in zip(sa, sb):
            rho -= np.kron(_trace_nuclei(a, na), _trace_nuclei(b, nb))
        return rho * (np.exp(-self.k * t) / self.n_nuclear)


def _trace_nuclei(op: ComplexMatrix, n_nuc: int) -> ComplexMatrix:
    return np.einsum("aibi->ab", op.reshape(2, n_nuc, 2, n_nuc))


@dataclass(frozen=True)
class DensityMatrix:
    matrix: ComplexMatrix
    time: float

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def check(self, herm_tol: float = 1e-10, psd_tol: float = 1e-10) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        lam = np.linalg.eigvalsh((m + m.conj().T) / 2)
        if lam[0] < -psd_tol:
            raise ValueError(f"density matrix has negative eigenvalue {lam[0]:.3e}")
        if not -psd_tol <= self.trace <= 1 + psd_tol:
            raise ValueError(f"density matrix trace {self.trace} outside [0, 1]")


def singlet_projector(config: RadicalPairConfig) -> ProjectorPair:
    """Q_S = I/4 - S_A . S_B and Q_T = I - Q_S on the joint space."""
    ha, hb = build_radical_hamiltonians(config)
    dim = ha.dim * hb.dim
    qs = 0.25 * np.eye(dim, dtype=np.complex128)
    for a, b in zip(ha.electron_spin, hb.electron_spin):
        qs -= np.kron(a, b)
    return ProjectorPair(qs, np.eye(dim, dtype=np.complex128) - qs)


def singlet_probability(config: RadicalPairConfig, t: float | ArrayLike, include_decay: bool = False):
    """Singlet fraction 1/4 + (1/N) Re sum_pq R_Apq(t) R_Bpq(t).

    Without decay this is the conditional singlet fraction of the surviving
    pairs; ``include_decay`` multiplies by exp(-k t). Returns a float for a
    scalar ``t`` and an array otherwise.
    """
    p = FactorizedEvolution(config).singlet_probability(t, include_decay)
    return float(p[0]) if np.ndim(t) == 0 else p


def evolve_joint(config: RadicalPairConfig, t: float) -> DensityMatrix:
    """Joint density matrix at time ``t`` from the factorized spin operators."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return DensityMatrix(FactorizedEvolution(config).joint_state(t), t)


def evolve_joint_direct(config: RadicalPairConfig, t: float) -> DensityMatrix:
    """exp(-iHt) (Q_S/N) exp(iHt) exp(-kt) with the full joint Hamiltonian."""
    if not config.rates.equal:
        raise ValueError(UNEQUAL_RATES_MSG)
    w, v = hermitian_eig(build_joint_hamiltonian(config))
    u = (v * np.exp(-1j * w * t)) @ v.conj().T
    rho0 = singlet_projector(config).qs / config.nuclear_dim
    return DensityMatrix(u @ rho0 @ u.conj().T * np.exp(-config.rates.ks * t), t)
