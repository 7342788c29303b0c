"""Brute-force reference for the fast paths.

Integrates the Haberkorn master equation

    drho/dt = -i[H, rho] - ks/2 {Q_S, rho} - kt/2 {Q_T, rho}

on the full joint space with fixed-step classical RK4, starting from
Q_S / N. Unequal rates are supported. Nothing here uses the per-radical
factorization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .config import RadicalPairConfig
from .hamiltonian import build_joint_hamiltonian
from .dynamics import singlet_projector

MAX_ORACLE_DIM = 256
STABILITY_FACTOR = 0.05
# default step = stability bound / 8: RK4 does not preserve positivity of the
# rank-deficient singlet start, and the drift (~h^3.5, growing linearly in t)
# stays near 1e-9 at 5 us with this refinement
DEFAULT_REFINEMENT = 8
PSD_DRIFT_TOL = 1e-8


@dataclass
class Trajectory:
    config: RadicalPairConfig
    times: np.ndarray
    states: list[np.ndarray]
    singlet_population: np.ndarray  # Tr[rho Q_S]
    singlet_yield: np.ndarray  # ks * integral of Tr[rho Q_S]
    triplet_yield: np.ndarray
    dt: float
    steps: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def recombined(self) -> np.ndarray:
        return self.singlet_yield + self.triplet_yield


def _generator(config: RadicalPairConfig):
    h = build_joint_hamiltonian(config)
    qs, qt = singlet_projector(config)
    ks, kt = config.rates.ks, config.rates.kt
    # drho/dt = K rho + rho K^dagger
    k_op = -1j * h - 0.5 * ks * qs - 0.5 * kt * qt
    return h, qs, qt, k_op


def max_stable_dt(config: RadicalPairConfig) -> float:
    h = build_joint_hamiltonian(config)
    scale = max(float(np.max(np.abs(np.linalg.eigvalsh(h)))), config.rates.ks, config.rates.kt)
    return STABILITY_FACTOR / scale


class _RK4Propagator:
    """One classical RK4 step for drho/dt = K rho + rho K^dagger, as matrices.

    For a linear time-invariant generator L the RK4 update is the degree-4
    Taylor polynomial of hL, i.e. sum_{i+l<=4} A_i rho A_l^dagger with
    A_i = (hK)^i / i!. The yield increment of an extra variable
    dy/dt = k Tr[Q rho] under the same RK4 stages is k Tr[W rho] with
    W = sum_{i+l<=3} h^(i+l+1) / ((i+l+1) i! l!) (K^dagger)^l Q K^i.
    """

    def __init__(self, k_op: np.ndarray, h: float, qs: np.ndarray, qt: np.ndarray):
        d = k_op.shape[0]
        self.d = d
        hk = h * k_op
        powers = [np.eye(d, dtype=np.complex128)]
        for _ in range(4):
            powers.append(powers[-1] @ hk)
        a = [p / math.factorial(i) for i, p in enumerate(powers)]
        b = [sum(a[: 5 - i]) for i in range(5)]
        self.a_stack = np.hstack(a)
        self.b_dag_stack = np.hstack([m.conj().T for m in b])

        kpow = [np.linalg.matrix_power(k_op, i) for i in range(4)]
        kdag = [m.conj().T for m in kpow]

        def weight(q):
            w = np.zeros_like(q)
            for i in range(4):
                for l in range(4 - i):
                    j = i + l
                    w += h ** (j + 1) / ((j + 1) * math.factorial(i) * math.factorial(l)) * (kdag[l] @ q @ kpow[i])
            return w.conj().T  # so that vdot(w, rho) = Tr[W rho]

        self.ws = weight(qs)
        self.wt = weight(qt)

    def step(self, rho: np.ndarray) -> np.ndarray:
        d = self.d
        t = (rho @ self.b_dag_stack).reshape(d, 5, d).transpose(1, 0, 2).reshape(5 * d, d)
        out = self.a_stack @ t
        return 0.5 * (out + out.conj().T)


def integrate_master_equation(
    config: RadicalPairConfig,
    dt: float | None = None,
    horizon: float = 1e-6,
    sample_times=None,
    max_dim: int = MAX_ORACLE_DIM,
    method: str = "propagator",
) -> Trajectory:
    """Fixed-step RK4 integration of the master equation.

    States are stored at ``sample_times`` (default: 101 points on
    [0, horizon]); between samples the interval is split into equal steps no
    longer than ``dt`` (default: the stability bound / 8). Singlet and triplet yields are carried as extra
    state variables through the same RK4 stages, and rho is re-symmetrized
    after every step.

    ``method="stages"`` runs the textbook four-stage loop;
    ``method="propagator"`` applies the identical update in matrix form and
    is several times faster for small dimensions.
    """
    config.validate()
    if config.joint_dim > max_dim:
        raise ValueError(f"oracle is limited to joint dimension {max_dim}, config has {config.joint_dim}")
    if method not in ("stages", "propagator"):
        raise ValueError(f"unknown method {method!r}")
    dt_max = max_stable_dt(config)
    if dt is None:
        dt = dt_max / DEFAULT_REFINEMENT
    if dt <= 0 or dt > dt_max * (1 + 1e-12):
        raise ValueError(f"dt {dt:.3e} s violates the stability bound dt <= {dt_max:.3e} s")
    if sample_times is None:
        sample_times = np.linspace(0.0, horizon, 101)
    sample_times = np.asarray(sample_times, dtype=float)
    if sample_times.ndim != 1 or np.any(np.diff(sample_times) <= 0) or sample_times[0] < 0:
        raise ValueError("sample_times must be strictly increasing and >= 0")

    _, qs, qt, k_op = _generator(config)
    ks, kt = config.rates.ks, config.rates.kt

    def rhs(rho):
        m = k_op @ rho
        return m + m.conj().T

    def singlet_pop(rho):
        return np.vdot(qs, rho).real

    rho = qs / config.nuclear_dim
    t = 0.0
    ys = yt = 0.0
    states, pops, ys_list, yt_list = [], [], [], []
    total_steps = 0
    props: dict[float, _RK4Propagator] = {}
    for target in sample_times:
        n = math.ceil((target - t) / dt - 1e-9) if target > t else 0
        h = (target - t) / n if n else 0.0
        if n and method == "propagator":
            prop = props.get(h) or props.setdefault(h, _RK4Propagator(k_op, h, qs, qt))
            for _ in range(n):
                ys += ks * np.vdot(prop.ws, rho).real
                yt += kt * np.vdot(prop.wt, rho).real
                rho = prop.step(rho)
        else:
            for _ in range(n):
                k1 = rhs(rho)
                r2 = rho + (0.5 * h) * k1
                k2 = rhs(r2)
                r3 = rho + (0.5 * h) * k2
                k3 = rhs(r3)
                r4 = rho + h * k3
                k4 = rhs(r4)
                # the yield integrands are linear in rho, so the stage
                # combination is traced once
                stage_sum = rho + 2.0 * (r2 + r3) + r4
                p_s = singlet_pop(stage_sum)
                ys += h / 6 * ks * p_s
                yt += h / 6 * kt * (np.trace(stage_sum).real - p_s)
                rho = rho + (h / 6) * (k1 + 2.0 * (k2 + k3) + k4)
                rho = 0.5 * (rho + rho.conj().T)
        total_steps += n
        t = float(target)
        states.append(rho.copy())
        pops.append(singlet_pop(rho))
        ys_list.append(ys)
        yt_list.append(yt)

    return Trajectory(
        config,
        sample_times.copy(),
        states,
        np.array(pops),
        np.array(ys_list),
        np.array(yt_list),
        dt,
        total_steps,
        {"method": method},
    )


def master_equation_yield(config: RadicalPairConfig, max_dim: int = MAX_ORACLE_DIM) -> tuple[float, float]:
    """Singlet and triplet yields integrated to infinite time, exactly.

    The time integral X = int_0^inf rho(t) dt of the master equation obeys
    K X + X K^dagger = -rho(0), solved here as a Sylvester equation on the
    joint space; the yields are ks Tr[Q_S X] and kt Tr[Q_T X]. Used where
    stepping to 10/k would take millions of RK4 steps.
    """
    config.validate()
    if config.joint_dim > max_dim:
        raise ValueError(f"oracle is limited to joint dimension {max_dim}, config has {config.joint_dim}")
    _, qs, qt, k_op = _generator(config)
    rho0 = qs / config.nuclear_dim
    x = scipy.linalg.solve_sylvester(k_op, k_op.conj().T, -rho0)
    return float(config.rates.ks * np.real(np.vdot(qs, x))), float(config.rates.kt * np.real(np.vdot(qt, x)))


def oracle_coherence(trajectory: Trajectory, options=None):
    """Relative entropy of coherence along an integrated trajectory."""
    from .coherence import CoherenceOptions, TraceSeries, coherence_of_state

    options = options or CoherenceOptions()
    cfg = trajectory.config
    dims = (cfg.radical_a.nuclear_dim, cfg.radical_b.nuclear_dim)
    values = [coherence_of_state(rho, options, dims, psd_tol=PSD_DRIFT_TOL) for rho in trajectory.states]
    return TraceSeries(
        trajectory.times.copy(),
        np.array(values),
        {"config_digest": cfg.digest(), "source": "oracle", **options.as_dict()},
    )


@dataclass(frozen=True)
class Check:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)


@dataclass
class ValidationReport:
    config_digest: str
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        return [
            f"{'PASS' if c.passed else 'FAIL'} {c.name}: max deviation {c.deviation:.3e} (tolerance {c.tolerance:.0e})"
            for c in self.checks
        ]


STATE_TIMES = (0.1e-6, 1e-6, 5e-6)
VALIDATION_THETAS = (0.0, math.pi / 4, math.pi / 2)
RK4_FULL_TIMES_MAX_DIM = 36


def validate_config(config: RadicalPairConfig, thetas=VALIDATION_THETAS, state_times=STATE_TIMES,
                    rk4_refinement: int | None = None) -> ValidationReport:
    """Cross-check the fast paths against the brute-force ones.

    Equal rates: closed-form yield vs the exact master-equation yield at each
    theta; factorized vs direct joint state; factorized state vs RK4 (all
    ``state_times`` for joint dimension <= 36, only the first otherwise;
    RK4 step = max stable step / ``rk4_refinement``, default 8 for small and
    2 for larger systems);
    initial singlet probability. Unequal rates: probability conservation of
    the master equation only.
    """
    from .dynamics import evolve_joint, evolve_joint_direct, singlet_probability
    from .yields import singlet_yield_closed

    config.validate()
    if config.joint_dim > MAX_ORACLE_DIM:
        raise ValueError(f"oracle is limited to joint dimension {MAX_ORACLE_DIM}, config has {config.joint_dim}")
    checks: list[Check] = []
    if not config.rates.equal:
        ys, yt = master_equation_yield(config)
        checks.append(Check("probability conservation (singlet + triplet yield = 1)", abs(ys + yt - 1.0), 1e-9))
        return ValidationReport(config.digest(), checks)

    checks.append(Check("initial singlet probability = 1", abs(float(singlet_probability(config, 0.0)) - 1.0), 1e-12))

    dev = 0.0
    for theta in thetas:
        cfg = config.with_field(theta=theta)
        dev = max(dev, abs(singlet_yield_closed(cfg).value - master_equation_yield(cfg)[0]))
    checks.append(Check("closed-form yield vs master-equation yield", dev, 1e-4))

    dev_direct = dev_trace = 0.0
    for t in state_times:
        fact = evolve_joint(config, t)
        dev_direct = max(dev_direct, float(np.max(np.abs(fact.matrix - evolve_joint_direct(config, t).matrix))))
        expected = math.exp(-config.rates.ks * t)
        dev_trace = max(dev_trace, abs(fact.trace - expected) / expected)
    checks.append(Check("factorized vs direct joint state", dev_direct, 1e-10))
    checks.append(Check("state trace vs exp(-k t), relative", dev_trace, 1e-10))

    small = config.joint_dim <= RK4_FULL_TIMES_MAX_DIM
    rk4_times = tuple(state_times) if small else tuple(state_times[:1])
    if rk4_refinement is None:
        rk4_refinement = 8 if small else 2
    traj = integrate_master_equation(config, dt=max_stable_dt(config) / rk4_refinement, sample_times=rk4_times)
    dev_rk4 = max(float(np.max(np.abs(rho - evolve_joint(config, t).matrix))) for rho, t in zip(traj.states, traj.times))
    label = ", ".join(f"{t * 1e6:g}" for t in rk4_times)
    checks.append(Check(f"factorized vs RK4 joint state at t = {label} us", dev_rk4, 1e-7))
    return ValidationReport(config.digest(), checks)
