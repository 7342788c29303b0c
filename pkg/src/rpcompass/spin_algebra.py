"""Dense complex matrix utilities for spin systems.

Angular-momentum matrices for arbitrary spin quantum number (hbar = 1, Sz
eigenbasis ordered from m = +s down to m = -s), Kronecker embedding into
multi-particle product spaces and a checked Hermitian eigendecomposition.
"""

from __future__ import annotations

from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray

ComplexMatrix = NDArray[np.complex128]


class SpinTriple(NamedTuple):
    sx: ComplexMatrix
    sy: ComplexMatrix
    sz: ComplexMatrix


class EigenDecomposition(NamedTuple):
    eigenvalues: NDArray[np.float64]
    eigenvectors: ComplexMatrix


def spin_multiplicity(s: float) -> int:
    """Return 2s + 1, rejecting anything that is not a non-negative half-integer."""
    two_s = 2 * float(s)
    if not np.isfinite(two_s) or two_s < 0 or abs(two_s - round(two_s)) > 1e-12:
        raise ValueError(f"spin quantum number must be a non-negative half-integer, got {s!r}")
    return int(round(two_s)) + 1


def spin_operators(s: float) -> SpinTriple:
    """Standard (2s+1)-dimensional spin matrices in the Sz eigenbasis."""
    dim = spin_multiplicity(s)
    s = (dim - 1) / 2
    m = s - np.arange(dim)
    # <m+1|S+|m> on the first superdiagonal
    raise_elems = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    s_plus = np.diag(raise_elems, k=1).astype(np.complex128)
    s_minus = s_plus.conj().T
    sx = (s_plus + s_minus) / 2
    sy = (s_plus - s_minus) / 2j
    sz = np.diag(m).astype(np.complex128)
    return SpinTriple(sx, sy, sz)


def embed(op: ComplexMatrix, slot: int, dims: Sequence[int]) -> ComplexMatrix:
    """Kronecker product I x ... x op x ... x I with ``op`` at position ``slot``."""
    dims = [int(d) for d in dims]
    if not 0 <= slot < len(dims):
        raise ValueError(f"slot {slot} out of range for {len(dims)} particles")
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (dims[slot], dims[slot]):
        raise ValueError(f"operator shape {op.shape} does not match dims[{slot}] = {dims[slot]}")
    left = int(np.prod(dims[:slot], dtype=np.int64))
    right = int(np.prod(dims[slot + 1 :], dtype=np.int64))
    out = op
    if left > 1:
        out = np.kron(np.eye(left, dtype=np.complex128), out)
    if right > 1:
        out = np.kron(out, np.eye(right, dtype=np.complex128))
    return out


def kron_all(ops: Sequence[ComplexMatrix]) -> ComplexMatrix:
    return reduce(np.kron, ops)


def is_hermitian(h: ComplexMatrix, rtol: float = 1e-10) -> bool:
    h = np.asarray(h)
    scale = max(np.linalg.norm(h), 1.0)
    return bool(np.linalg.norm(h - h.conj().T) <= rtol * scale)


def hermitian_eig(h: ComplexMatrix, rtol: float = 1e-10) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises ``ValueError`` when ``h`` deviates from Hermiticity by more than
    ``rtol`` relative to its Frobenius norm.
    """
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    if not is_hermitian(h, rtol):
        raise ValueError("matrix is not Hermitian")
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return EigenDecomposition(w, v)


def commutator(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    return a @ b - b @ a
