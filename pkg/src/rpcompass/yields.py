"""Singlet yield for equal recombination rates.

Two routes: the closed-form Lorentzian sum over per-radical eigenstate
pairs, and direct composite-Simpson quadrature of k * rho_S(t) * exp(-k t).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import RadicalPairConfig
from .dynamics import UNEQUAL_RATES_MSG, EigenSystem, FactorizedEvolution

IMAG_TOL = 1e-9
DEFAULT_SKIP_BELOW = 1e-18
ROW_CHUNK = 256
TIME_CHUNK = 4096


@dataclass(frozen=True)
class YieldResult:
    value: float
    method: str  # "closed_form" or "integrated"
    config_digest: str
    tail_bound: float = 0.0
    imag_residual: float = 0.0


def _pair_products(eig: EigenSystem) -> tuple[np.ndarray, np.ndarray]:
    """Rows p*3+q, columns (m, n): (S_p)_mn (S_q)_nm, and w_m - w_n per column."""
    s = np.stack(eig.spin_in_eigenbasis)
    prod = np.einsum("pmn,qnm->pqmn", s, s).reshape(9, -1)
    w = eig.eigenvalues
    return prod, (w[:, None] - w[None, :]).ravel()


def _keep(prod: np.ndarray, skip_below: float) -> np.ndarray:
    return np.max(np.abs(prod), axis=0) >= skip_below


def worker_count() -> int:
    raw = os.environ.get("RPCOMPASS_WORKERS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def lorentzian_sum(eig_a: EigenSystem, eig_b: EigenSystem, k: float, skip_below: float | None = DEFAULT_SKIP_BELOW,
                   workers: int = 1) -> complex:
    """sum_pq sum_mnrs (S_Ap)_mn (S_Aq)_nm (S_Bp)_sr (S_Bq)_rs k^2 / (k^2 + dw^2).

    Pairs whose per-radical element products are all below ``skip_below`` in
    magnitude are dropped; ``None`` keeps every term. The (m, n) rows are cut
    into fixed chunks and the partial sums are combined in chunk order, so
    the result does not depend on ``workers``.
    """
    pa, da = _pair_products(eig_a)
    pb, db = _pair_products(eig_b)
    if skip_below is not None and skip_below > 0:
        ka, kb = _keep(pa, skip_below), _keep(pb, skip_below)
        pa, da, pb, db = pa[:, ka], da[ka], pb[:, kb], db[kb]
    k2 = k * k

    def chunk_sum(start: int) -> complex:
        stop = min(start + ROW_CHUNK, pa.shape[1])
        c = pa[:, start:stop].T @ pb
        dw = da[start:stop, None] + db[None, :]
        return complex(np.sum(c * (k2 / (k2 + dw * dw))))

    starts = range(0, pa.shape[1], ROW_CHUNK)
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk_sum, starts))
    else:
        parts = [chunk_sum(s) for s in starts]
    return _pairwise_sum(parts)


def _pairwise_sum(parts: list[complex]) -> complex:
    if not parts:
        return 0j
    while len(parts) > 1:
        parts = [parts[i] + parts[i + 1] if i + 1 < len(parts) else parts[i] for i in range(0, len(parts), 2)]
    return parts[0]


def singlet_yield_closed(config: RadicalPairConfig, skip_below: float | None = DEFAULT_SKIP_BELOW,
                         workers: int = 1, evolution: FactorizedEvolution | None = None) -> YieldResult:
    """Closed-form singlet yield, normalized by N = N1 * N2.

    The imaginary part of the sum must vanish; a residual above 1e-9 raises
    ``RuntimeError`` instead of being discarded.
    """
    if not config.rates.equal:
        raise ValueError(UNEQUAL_RATES_MSG)
    ev = evolution or FactorizedEvolution(config)
    total = lorentzian_sum(ev.eig_a, ev.eig_b, ev.k, skip_below, workers) / ev.n_nuclear
    if abs(total.imag) > IMAG_TOL:
        raise RuntimeError(f"singlet yield has imaginary residual {total.imag:.3e}")
    return YieldResult(0.25 + total.real, "closed_form", config.digest(), 0.0, abs(total.imag))


def max_frequency(ev: FactorizedEvolution) -> float:
    """Largest |w_Am - w_An + w_Bs - w_Br| over all eigenvalue pairs."""
    return ev.eig_a.max_gap() + ev.eig_b.max_gap()


def required_dt(config: RadicalPairConfig) -> float:
    ev = FactorizedEvolution(config)
    fmax = max_frequency(ev)
    return math.inf if fmax == 0 else 0.1 / fmax


def simpson_weights(n_intervals: int, dt: float) -> np.ndarray:
    w = np.ones(n_intervals + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (dt / 3.0)


def singlet_yield_integrated(config: RadicalPairConfig, horizon: float | None = None, dt: float | None = None) -> YieldResult:
    """Simpson quadrature of k_S rho_S(t) exp(-k t) over [0, horizon].

    Defaults: ``horizon = 15/k`` and ``dt = 0.1 / max|dw|``. A horizon shorter
    than 10/k, or a step coarser than 0.1/max|dw|, raises ``ValueError``.
    The reported ``tail_bound`` is exp(-k * horizon), an upper bound on the
    neglected remainder.
    """
    if not config.rates.equal:
        raise ValueError(UNEQUAL_RATES_MSG)
    ev = FactorizedEvolution(config)
    k = ev.k
    fmax = max_frequency(ev)
    dt_max = math.inf if fmax == 0 else 0.1 / fmax
    if horizon is None:
        horizon = 15.0 / k
    if horizon < 10.0 / k * (1 - 1e-12):
        raise ValueError(f"horizon {horizon:.3e} s is shorter than the required 10/k = {10.0 / k:.3e} s")
    if dt is None:
        dt = min(dt_max, horizon / 1000)
    if dt > dt_max * (1 + 1e-12):
        raise ValueError(f"dt {dt:.3e} s does not resolve the fastest frequency; need dt <= {dt_max:.3e} s")

    n = max(2, math.ceil(horizon / dt))
    n += n % 2
    h = horizon / n
    acc = 0.0
    for start in range(0, n + 1, TIME_CHUNK):
        idx = np.arange(start, min(start + TIME_CHUNK, n + 1))
        t = idx * h
        w = np.where(idx % 2 == 1, 4.0, 2.0)
        w[idx == 0] = 1.0
        w[idx == n] = 1.0
        f = ev.singlet_probability(t, include_decay=True)
        acc += float(np.dot(w, f))
    value = config.rates.ks * acc * h / 3.0
    return YieldResult(value, "integrated", config.digest(), math.exp(-k * horizon))
