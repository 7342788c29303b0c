"""Radical-pair spin dynamics for the avian compass model.

Singlet probability, singlet yield, compass sensitivity and coherence
dynamics for multi-nuclei radical pairs, with a brute-force master-equation
validator.
"""

__version__ = "0.1.0"

from .config import (
    ConfigError,
    FieldConfig,
    HyperfineTensor,
    NucleusSpec,
    RadicalPairConfig,
    RadicalSpec,
    RateConfig,
    builtin_presets,
    parse_config,
    serialize_config,
)
from .dynamics import evolve_joint, singlet_probability, singlet_projector
from .yields import singlet_yield_closed, singlet_yield_integrated
from .coherence import CoherenceOptions, coherence_trace, relative_entropy_of_coherence
from .experiments import AngleGrid, delta_yield_0_90, sensitivity, yield_profile

__all__ = [
    "AngleGrid",
    "CoherenceOptions",
    "ConfigError",
    "FieldConfig",
    "HyperfineTensor",
    "NucleusSpec",
    "RadicalPairConfig",
    "RadicalSpec",
    "RateConfig",
    "builtin_presets",
    "coherence_trace",
    "delta_yield_0_90",
    "evolve_joint",
    "parse_config",
    "relative_entropy_of_coherence",
    "sensitivity",
    "serialize_config",
    "singlet_probability",
    "singlet_projector",
    "singlet_yield_closed",
    "singlet_yield_integrated",
    "yield_profile",
]
