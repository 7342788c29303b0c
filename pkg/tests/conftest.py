import math

import numpy as np
import pytest

from rpcompass.config import (
    FieldConfig,
    HyperfineTensor,
    NucleusSpec,
    RadicalPairConfig,
    RadicalSpec,
    RateConfig,
    builtin_presets,
)


@pytest.fixture(scope="session")
def presets():
    return builtin_presets()


def make_config(tensors_a=(), tensors_b=(), spin=0.5, theta=0.0, phi=0.0, k=1e4, b=47.0):
    """Small hand-built pair; tensors are (ax, ay, az) triples in mT."""

    def radical(label, tensors):
        return RadicalSpec(label, tuple(NucleusSpec(f"X{i}", spin, HyperfineTensor(*t)) for i, t in enumerate(tensors)))

    return RadicalPairConfig(
        radical("A", tensors_a), radical("B", tensors_b), FieldConfig(b, theta, phi), RateConfig(k, k)
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


QUARTER_TURN = math.pi / 2
