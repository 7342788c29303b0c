"""Radical-pair experiment description and its JSON configuration format.

Document layout (UTF-8 JSON)::

    {
      "radical_a": {"label": "FAD", "nuclei": [
          {"label": "N5", "spin": 1, "ax_mT": -0.0989, "ay_mT": -0.0989, "az_mT": 1.7569}
      ]},
      "radical_b": {"label": "Trp", "nuclei": []},
      "field": {"b_uT": 47.0, "theta_rad": 0.0, "phi_rad": 0.0},
      "rates": {"ks_per_s": 10000.0, "kt_per_s": 10000.0}
    }

``field`` and ``rates`` are optional, as are ``field`` members and a
nucleus ``spin`` (derived from the label: ``N*`` is spin 1, ``H*`` spin 1/2).
``theta_deg``/``phi_deg`` may be given instead of the radian keys. Spins may
be written as numbers or as fractions such as ``"1/2"``.
"""

from __future__ import annotations

import hashlib
import json
import math
import dataclasses
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Mapping

from .spin_algebra import spin_multiplicity

DEFAULT_B_UT = 47.0
DEFAULT_RATE = 1e4
MAX_RADICAL_DIM = 256
MAX_JOINT_DIM = 4096

SPIN_MAPPINGS = ("label", "half")


class ConfigError(ValueError):
    """Invalid configuration document or violated model invariant."""


def default_spin(label: str, mapping: str = "label") -> float:
    """Nuclear spin implied by a nucleus label.

    ``mapping="label"`` gives 14N (spin 1) for labels starting with ``N`` and
    spin 1/2 otherwise; ``mapping="half"`` makes every nucleus spin 1/2.
    """
    if mapping == "half":
        return 0.5
    if mapping != "label":
        raise ConfigError(f"unknown spin mapping {mapping!r}; choose from {SPIN_MAPPINGS}")
    return 1.0 if label.strip().upper().startswith("N") else 0.5


@dataclass(frozen=True)
class HyperfineTensor:
    """Diagonal hyperfine coupling in millitesla."""

    ax: float
    ay: float
    az: float

    def __post_init__(self):
        for name in ("ax", "ay", "az"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"hyperfine component {name} must be finite")

    @property
    def components(self) -> tuple[float, float, float]:
        return (self.ax, self.ay, self.az)


@dataclass(frozen=True)
class NucleusSpec:
    label: str
    spin: float
    hyperfine: HyperfineTensor

    def __post_init__(self):
        try:
            mult = spin_multiplicity(self.spin)
        except ValueError as exc:
            raise ConfigError(f"nucleus {self.label!r}: {exc}") from None
        if mult < 2:
            raise ConfigError(f"nucleus {self.label!r}: spin must be positive")

    @property
    def dim(self) -> int:
        return spin_multiplicity(self.spin)


@dataclass(frozen=True)
class RadicalSpec:
    label: str
    nuclei: tuple[NucleusSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nuclei", tuple(self.nuclei))

    @property
    def nuclear_dim(self) -> int:
        return math.prod(n.dim for n in self.nuclei)

    @property
    def dim(self) -> int:
        return 2 * self.nuclear_dim

    @property
    def dims(self) -> tuple[int, ...]:
        """Particle dimensions, electron first then nuclei in order."""
        return (2,) + tuple(n.dim for n in self.nuclei)


@dataclass(frozen=True)
class FieldConfig:
    """Static field: magnitude in microtesla, inclination and azimuth in radians."""

    b_magnitude: float = DEFAULT_B_UT
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.b_magnitude) or self.b_magnitude < 0:
            raise ConfigError("field magnitude must be finite and >= 0")
        if not (0.0 <= self.theta <= math.pi):
            raise ConfigError(f"theta must lie in [0, pi], got {self.theta}")
        if not (0.0 <= self.phi < 2 * math.pi):
            raise ConfigError(f"phi must lie in [0, 2pi), got {self.phi}")


@dataclass(frozen=True)
class RateConfig:
    """Singlet and triplet recombination rates in 1/s."""

    ks: float = DEFAULT_RATE
    kt: float = DEFAULT_RATE

    def __post_init__(self):
        for name in ("ks", "kt"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ConfigError(f"rate {name} must be finite and > 0, got {v}")

    @property
    def equal(self) -> bool:
        return self.ks == self.kt


@dataclass(frozen=True)
class RadicalPairConfig:
    radical_a: RadicalSpec
    radical_b: RadicalSpec
    field: FieldConfig = dataclasses.field(default_factory=FieldConfig)
    rates: RateConfig = dataclasses.field(default_factory=RateConfig)

    @property
    def nuclear_dim(self) -> int:
        """N = N1 * N2, the size of the joint nuclear spin space."""
        return self.radical_a.nuclear_dim * self.radical_b.nuclear_dim

    @property
    def joint_dim(self) -> int:
        return self.radical_a.dim * self.radical_b.dim

    def validate(self, max_radical_dim: int = MAX_RADICAL_DIM, max_joint_dim: int = MAX_JOINT_DIM) -> RadicalPairConfig:
        for rad in (self.radical_a, self.radical_b):
            if rad.dim > max_radical_dim:
                raise ConfigError(
                    f"radical {rad.label!r} has Hilbert dimension {rad.dim}, above the cap of {max_radical_dim}"
                )
        if self.joint_dim > max_joint_dim:
            raise ConfigError(f"joint dimension {self.joint_dim} exceeds the cap of {max_joint_dim}")
        return self

    def with_field(self, theta: float | None = None, phi: float | None = None, b_magnitude: float | None = None):
        f = self.field
        return replace(
            self,
            field=FieldConfig(
                f.b_magnitude if b_magnitude is None else b_magnitude,
                f.theta if theta is None else theta,
                f.phi if phi is None else phi,
            ),
        )

    def with_rate(self, k: float) -> RadicalPairConfig:
        return replace(self, rates=RateConfig(k, k))

    def with_all_tensors(self, tensor: HyperfineTensor) -> RadicalPairConfig:
        """Same nuclei, every hyperfine tensor replaced by ``tensor``."""

        def swap(rad: RadicalSpec) -> RadicalSpec:
            return replace(rad, nuclei=tuple(replace(n, hyperfine=tensor) for n in rad.nuclei))

        return replace(self, radical_a=swap(self.radical_a), radical_b=swap(self.radical_b))

    def digest(self) -> str:
        return config_digest(self)


# --- serialization ---------------------------------------------------------


def _spin_value(raw: Any, where: str) -> float:
    if isinstance(raw, bool):
        raise ConfigError(f"{where}: spin must be a number or fraction string")
    if isinstance(raw, (int, float)):
        return float(raw)
    if isinstance(raw, str):
        try:
            return float(Fraction(raw.strip()))
        except (ValueError, ZeroDivisionError):
            pass
    raise ConfigError(f"{where}: cannot read spin {raw!r}")


def _number(obj: Mapping, key: str, where: str, default: float | None = None) -> float:
    if key not in obj:
        if default is None:
            raise ConfigError(f"{where}: missing required key {key!r}")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


def _check_keys(obj: Any, allowed: set[str], where: str) -> None:
    if not isinstance(obj, Mapping):
        raise ConfigError(f"{where}: expected an object")
    extra = set(obj) - allowed
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")


def _radical_from_dict(obj: Any, where: str, spin_mapping: str) -> RadicalSpec:
    _check_keys(obj, {"label", "nuclei"}, where)
    label = str(obj.get("label", where))
    nuclei_raw = obj.get("nuclei", [])
    if not isinstance(nuclei_raw, list):
        raise ConfigError(f"{where}.nuclei: expected a list")
    nuclei = []
    for i, rec in enumerate(nuclei_raw):
        w = f"{where}.nuclei[{i}]"
        _check_keys(rec, {"label", "spin", "ax_mT", "ay_mT", "az_mT"}, w)
        if "label" not in rec:
            raise ConfigError(f"{w}: missing required key 'label'")
        nlabel = str(rec["label"])
        spin = _spin_value(rec["spin"], w) if "spin" in rec else default_spin(nlabel, spin_mapping)
        tensor = HyperfineTensor(_number(rec, "ax_mT", w), _number(rec, "ay_mT", w), _number(rec, "az_mT", w))
        nuclei.append(NucleusSpec(nlabel, spin, tensor))
    return RadicalSpec(label, tuple(nuclei))


def config_from_dict(doc: Any, spin_mapping: str = "label", **caps) -> RadicalPairConfig:
    _check_keys(doc, {"radical_a", "radical_b", "field", "rates"}, "document")
    for key in ("radical_a", "radical_b"):
        if key not in doc:
            raise ConfigError(f"document: missing required section {key!r}")
    ra = _radical_from_dict(doc["radical_a"], "radical_a", spin_mapping)
    rb = _radical_from_dict(doc["radical_b"], "radical_b", spin_mapping)

    fd = doc.get("field", {})
    _check_keys(fd, {"b_uT", "theta_rad", "phi_rad", "theta_deg", "phi_deg"}, "field")
    angles = {}
    for name in ("theta", "phi"):
        if f"{name}_rad" in fd and f"{name}_deg" in fd:
            raise ConfigError(f"field: give only one of {name}_rad and {name}_deg")
        if f"{name}_deg" in fd:
            angles[name] = math.radians(_number(fd, f"{name}_deg", "field"))
        else:
            angles[name] = _number(fd, f"{name}_rad", "field", 0.0)
    fcfg = FieldConfig(_number(fd, "b_uT", "field", DEFAULT_B_UT), angles["theta"], angles["phi"])

    rd = doc.get("rates", {})
    _check_keys(rd, {"ks_per_s", "kt_per_s"}, "rates")
    rcfg = RateConfig(_number(rd, "ks_per_s", "rates", DEFAULT_RATE), _number(rd, "kt_per_s", "rates", DEFAULT_RATE))
    return RadicalPairConfig(ra, rb, fcfg, rcfg).validate(**caps)


def parse_config(text: str, spin_mapping: str = "label", **caps) -> RadicalPairConfig:
    """Parse and validate a configuration document.

    Syntax errors are reported with their line number; any violated model
    invariant raises ``ConfigError`` naming it.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(doc, spin_mapping=spin_mapping, **caps)


def _radical_to_dict(rad: RadicalSpec) -> dict:
    return {
        "label": rad.label,
        "nuclei": [
            {
                "label": n.label,
                "spin": n.spin,
                "ax_mT": n.hyperfine.ax,
                "ay_mT": n.hyperfine.ay,
                "az_mT": n.hyperfine.az,
            }
            for n in rad.nuclei
        ],
    }


def config_to_dict(cfg: RadicalPairConfig) -> dict:
    return {
        "radical_a": _radical_to_dict(cfg.radical_a),
        "radical_b": _radical_to_dict(cfg.radical_b),
        "field": {"b_uT": cfg.field.b_magnitude, "theta_rad": cfg.field.theta, "phi_rad": cfg.field.phi},
        "rates": {"ks_per_s": cfg.rates.ks, "kt_per_s": cfg.rates.kt},
    }


def serialize_config(cfg: RadicalPairConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"


def config_digest(cfg: RadicalPairConfig) -> str:
    canonical = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


# --- presets ---------------------------------------------------------------

# Diagonal hyperfine couplings (mT) of the FAD radical anion and the Trp
# radical cation.
FAD_NUCLEI = (
    ("N5", (-0.0989, -0.0989, 1.7569)),
    ("N10", (-0.0241, -0.0144, 0.6046)),
    ("H6", (-0.5304, -0.4336, -0.1976)),
)
TRP_NUCLEI = (
    ("N1", (0.0, 0.0, 1.0812)),
    ("H1", (0.4716, -0.3699, 0.0)),
    ("H4", (-0.74, -0.536, -0.1879)),
)


def fad_trp_config(n: int, spin_mapping: str = "label") -> RadicalPairConfig:
    """The n-n FAD/Trp pair built from the first ``n`` nuclei of each radical."""
    if not 0 <= n <= 3:
        raise ConfigError(f"n must be between 0 and 3, got {n}")

    def radical(label, table):
        return RadicalSpec(
            label,
            tuple(NucleusSpec(lab, default_spin(lab, spin_mapping), HyperfineTensor(*hf)) for lab, hf in table[:n]),
        )

    return RadicalPairConfig(radical("FAD", FAD_NUCLEI), radical("Trp", TRP_NUCLEI)).validate()


def builtin_presets(spin_mapping: str = "label") -> dict[str, RadicalPairConfig]:
    return {f"fad-trp-{n}-{n}": fad_trp_config(n, spin_mapping) for n in (1, 2, 3)}
