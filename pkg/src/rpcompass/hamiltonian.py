"""Per-radical and joint spin Hamiltonians in angular-frequency units (rad/s).

Each radical is one electron coupled to its nuclei by diagonal hyperfine
tensors, plus the electron Zeeman term. Nuclear Zeeman, exchange and
dipolar couplings are not included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import FieldConfig, RadicalPairConfig, RadicalSpec
from .spin_algebra import ComplexMatrix, SpinTriple, embed, spin_operators

# Free-electron gyromagnetic ratio, rad s^-1 T^-1.
GAMMA_E = 1.760859627e11
RAD_PER_S_PER_MT = GAMMA_E * 1e-3
RAD_PER_S_PER_UT = GAMMA_E * 1e-6


@dataclass(frozen=True)
class RadicalHamiltonian:
    matrix: ComplexMatrix
    electron_spin: SpinTriple
    dims: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def field_vector(f: FieldConfig) -> np.ndarray:
    """Field direction times magnitude in microtesla, (x, y, z)."""
    st = math.sin(f.theta)
    return f.b_magnitude * np.array([st * math.cos(f.phi), st * math.sin(f.phi), math.cos(f.theta)])


def build_radical_hamiltonian(radical: RadicalSpec, field: FieldConfig) -> RadicalHamiltonian:
    dims = radical.dims
    half = spin_operators(0.5)
    s = SpinTriple(*(embed(op, 0, dims) for op in half))

    bvec = field_vector(field) * RAD_PER_S_PER_UT
    h = bvec[0] * s.sx + bvec[1] * s.sy + bvec[2] * s.sz
    for j, nucleus in enumerate(radical.nuclei, start=1):
        ops = spin_operators(nucleus.spin)
        for e_op, n_op, a in zip(s, ops, nucleus.hyperfine.components):
            if a != 0.0:
                h = h + (a * RAD_PER_S_PER_MT) * (e_op @ embed(n_op, j, dims))
    return RadicalHamiltonian(h, s, dims)


def build_radical_hamiltonians(config: RadicalPairConfig) -> tuple[RadicalHamiltonian, RadicalHamiltonian]:
    config.validate()
    return (
        build_radical_hamiltonian(config.radical_a, config.field),
        build_radical_hamiltonian(config.radical_b, config.field),
    )


def build_joint_hamiltonian(config: RadicalPairConfig) -> ComplexMatrix:
    """H_A x I_B + I_A x H_B on (radical A particles, radical B particles)."""
    ha, hb = build_radical_hamiltonians(config)
    return np.kron(ha.matrix, np.eye(hb.dim)) + np.kron(np.eye(ha.dim), hb.matrix)
