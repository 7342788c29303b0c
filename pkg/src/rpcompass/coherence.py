"""Relative entropy of coherence, C(rho) = S(rho_diag) - S(rho).

States live either on the joint space ordered (electron A, nuclei A,
electron B, nuclei B) or on the two-electron space (electron A, electron B).
The reference basis is the product Zeeman basis or, for the electron pair,
the singlet/triplet basis (nuclei stay in their Zeeman basis).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import RadicalPairConfig
from .dynamics import UNEQUAL_RATES_MSG, FactorizedEvolution

logger = logging.getLogger(__name__)

SUBSYSTEMS = ("joint", "electrons")
BASES = ("product_z", "singlet_triplet")
MIN_TRACE = 1e-250

_R2 = 1 / math.sqrt(2)
# Rows S, T+, T0, T- in the basis |uu>, |ud>, |du>, |dd>.
ST_BASIS = np.array(
    [
        [0, _R2, -_R2, 0],
        [1, 0, 0, 0],
        [0, _R2, _R2, 0],
        [0, 0, 0, 1],
    ],
    dtype=np.complex128,
)


@dataclass(frozen=True)
class CoherenceOptions:
    subsystem: str = "joint"
    basis: str = "product_z"
    renormalize: bool = True

    def __post_init__(self):
        if self.subsystem not in SUBSYSTEMS:
            raise ValueError(f"subsystem must be one of {SUBSYSTEMS}, got {self.subsystem!r}")
        if self.basis not in BASES:
            raise ValueError(f"basis must be one of {BASES}, got {self.basis!r}")

    def as_dict(self) -> dict:
        return {"subsystem": self.subsystem, "basis": self.basis, "renormalize": self.renormalize}


@dataclass
class TraceSeries:
    times: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have equal length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


def _entropy_from_eigenvalues(lam: np.ndarray) -> float:
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def von_neumann_entropy(rho: np.ndarray, trace_tol: float = 1e-9, psd_tol: float = 1e-10) -> float:
    """-Tr(rho ln rho) of a unit-trace state, with 0 ln 0 = 0.

    Eigenvalues in [-psd_tol, 0) are clamped to zero; anything more negative,
    or a trace off by more than ``trace_tol``, raises ``ValueError``.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    tr = np.trace(rho).real
    if abs(tr - 1) > trace_tol:
        raise ValueError(f"state must have unit trace, got {tr}")
    lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if lam[0] < -psd_tol:
        raise ValueError(f"state has negative eigenvalue {lam[0]:.3e}")
    return _entropy_from_eigenvalues(np.clip(lam, 0.0, None))


def _shannon(p: np.ndarray, psd_tol: float = 1e-10) -> float:
    if np.min(p) < -psd_tol:
        raise ValueError(f"diagonal has negative entry {np.min(p):.3e}")
    return _entropy_from_eigenvalues(np.clip(p, 0.0, None))


def reduce_to_electrons(rho: np.ndarray, nuclear_dims: tuple[int, int]) -> np.ndarray:
    na, nb = nuclear_dims
    t = rho.reshape(2, na, 2, nb, 2, na, 2, nb)
    return np.einsum("aibjcidj->abcd", t).reshape(4, 4)


def diagonal_in_basis(rho: np.ndarray, basis: str, nuclear_dims: tuple[int, int]) -> np.ndarray:
    """Diagonal of ``rho`` in the chosen reference basis."""
    if basis == "product_z":
        return np.real(np.diagonal(rho)).copy()
    na, nb = nuclear_dims
    t = rho.reshape(2, na, 2, nb, 2, na, 2, nb)
    u = ST_BASIS.reshape(4, 2, 2)
    # <s,i,j| rho |s,i,j> with |s> = sum_ab u[s,a,b] |a>|b>
    d = np.einsum("sab,aibjcidj,scd->sij", u, t, u.conj(), optimize=True)
    return np.real(d).ravel()


def coherence_of_state(rho: np.ndarray, options: CoherenceOptions = CoherenceOptions(),
                       nuclear_dims: tuple[int, int] | None = None, psd_tol: float = 1e-10) -> float:
    """C(rho) for a joint (or already reduced two-electron) state.

    With ``renormalize`` the state is scaled to unit trace first. Without it,
    the entropy difference is evaluated on rho as given, which equals
    Tr(rho) * C(rho / Tr(rho)). Small negative results are clamped to 0.
    ``psd_tol`` bounds the negative eigenvalues tolerated (and clamped).
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if nuclear_dims is None:
        if rho.shape != (4, 4):
            raise ValueError("nuclear_dims is required for a joint state")
        nuclear_dims = (1, 1)
    if options.subsystem == "electrons" and rho.shape != (4, 4):
        rho = reduce_to_electrons(rho, nuclear_dims)
        nuclear_dims = (1, 1)
    tr = float(np.trace(rho).real)
    if tr <= MIN_TRACE:
        raise ValueError(f"state trace {tr:.3e} is too small to normalize")
    sigma = rho / tr
    c = (_shannon(diagonal_in_basis(sigma, options.basis, nuclear_dims), psd_tol)
         - von_neumann_entropy(sigma, psd_tol=psd_tol))
    if c < -1e-10:
        raise ValueError(f"negative coherence {c:.3e}")
    c = max(c, 0.0)
    return c if options.renormalize else tr * c


def relative_entropy_of_coherence(rho: np.ndarray, options: CoherenceOptions = CoherenceOptions(),
                                  nuclear_dims: tuple[int, int] | None = None) -> float:
    return coherence_of_state(rho, options, nuclear_dims)


def coherence_trace(config: RadicalPairConfig, times: Sequence[float],
                    options: CoherenceOptions = CoherenceOptions()) -> TraceSeries:
    """C(rho(t)) along the factorized evolution.

    The series stops early (and says so in ``metadata["truncated_at"]``) if
    exp(-k t) underflows so far that the state can no longer be normalized.
    """
    if not config.rates.equal:
        raise ValueError(UNEQUAL_RATES_MSG)
    ev = FactorizedEvolution(config)
    times = np.asarray(times, dtype=float)
    dims = (ev.eig_a.nuclear_dim, ev.eig_b.nuclear_dim)
    meta = {"config_digest": config.digest(), "source": "factorized", **options.as_dict()}
    values = []
    for i, t in enumerate(times):
        if math.exp(-ev.k * t) <= MIN_TRACE:
            logger.warning("state trace underflows at t=%g s; truncating coherence series", t)
            meta["truncated_at"] = float(t)
            times = times[:i]
            break
        if options.subsystem == "electrons":
            rho = ev.electron_state(t)
            values.append(coherence_of_state(rho, options, None))
        else:
            values.append(coherence_of_state(ev.joint_state(t), options, dims))
    return TraceSeries(times, np.array(values), meta)


def coherence_envelope(config: RadicalPairConfig, t_center: float, half_width: float = 100e-9,
                       step: float = 0.5e-9, options: CoherenceOptions | None = None) -> float:
    """Late-time coherence level: max of C(t) over [t_center - half_width, t_center + half_width].

    The two-electron coherence oscillates on nanosecond scales (and fully
    revives for purely axial couplings at theta = 0), so a single sample is
    not a stable measure of how much coherence survives. The window maximum
    tracks the envelope. Defaults to the renormalized two-electron state in
    the product basis.
    """
    options = options or CoherenceOptions(subsystem="electrons")
    lo = max(0.0, t_center - half_width)
    n = int(round((t_center + half_width - lo) / step))
    times = lo + step * np.arange(n + 1)
    return float(np.max(coherence_trace(config, times, options).values))
