import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from rpcompass.config import (
    ConfigError,
    FieldConfig,
    HyperfineTensor,
    NucleusSpec,
    RadicalPairConfig,
    RadicalSpec,
    RateConfig,
    builtin_presets,
    default_spin,
    parse_config,
    serialize_config,
)

SIX_NUCLEI_DOC = """{
  "radical_a": {"label": "FAD", "nuclei": [
    {"label": "N5", "ax_mT": -0.0989, "ay_mT": -0.0989, "az_mT": 1.7569},
    {"label": "N10", "ax_mT": -0.0241, "ay_mT": -0.0144, "az_mT": 0.6046},
    {"label": "H6", "ax_mT": -0.5304, "ay_mT": -0.4336, "az_mT": -0.1976}
  ]},
  "radical_b": {"label": "Trp", "nuclei": [
    {"label": "N1", "ax_mT": 0.0, "ay_mT": 0.0, "az_mT": 1.0812},
    {"label": "H1", "ax_mT": 0.4716, "ay_mT": -0.3699, "az_mT": 0.0},
    {"label": "H4", "ax_mT": -0.74, "ay_mT": -0.536, "az_mT": -0.1879}
  ]}
}"""


def test_six_nuclei_document_dims_and_defaults():
    cfg = parse_config(SIX_NUCLEI_DOC)
    assert cfg.radical_a.dim == 36 and cfg.radical_b.dim == 24
    assert cfg.rates.ks == cfg.rates.kt == 1e4
    assert cfg.field.b_magnitude == 47.0 and cfg.field.phi == 0.0
    assert cfg == builtin_presets()["fad-trp-3-3"]


def test_all_spin_half_mapping():
    cfg = parse_config(SIX_NUCLEI_DOC, spin_mapping="half")
    assert cfg.radical_a.dim == 16 and cfg.radical_b.dim == 16


def test_empty_system():
    cfg = parse_config('{"radical_a": {"nuclei": []}, "radical_b": {"nuclei": []}}')
    assert cfg.joint_dim == 4 and cfg.nuclear_dim == 1


def test_default_spin():
    assert default_spin("N5") == 1.0
    assert default_spin("H6") == 0.5
    assert default_spin("N5", "half") == 0.5


def test_explicit_spin_forms():
    doc = {
        "radical_a": {"nuclei": [{"label": "N5", "spin": "1/2", "ax_mT": 0, "ay_mT": 0, "az_mT": 1}]},
        "radical_b": {"nuclei": [{"label": "H1", "spin": 1.5, "ax_mT": 0, "ay_mT": 0, "az_mT": 1}]},
        "field": {"theta_deg": 90},
    }
    cfg = parse_config(json.dumps(doc))
    assert cfg.radical_a.nuclei[0].spin == 0.5
    assert cfg.radical_b.nuclei[0].dim == 4
    assert math.isclose(cfg.field.theta, math.pi / 2)


def test_presets_match_reference_couplings():
    p = builtin_presets()
    assert set(p) == {"fad-trp-1-1", "fad-trp-2-2", "fad-trp-3-3"}
    one = p["fad-trp-1-1"]
    assert [n.label for n in one.radical_a.nuclei] == ["N5"]
    assert [n.label for n in one.radical_b.nuclei] == ["N1"]
    assert one.radical_a.nuclei[0].hyperfine.components == (-0.0989, -0.0989, 1.7569)
    assert one.radical_b.nuclei[0].hyperfine.components == (0.0, 0.0, 1.0812)
    two = p["fad-trp-2-2"]
    assert [n.label for n in two.radical_a.nuclei + two.radical_b.nuclei] == ["N5", "N10", "N1", "H1"]
    three = p["fad-trp-3-3"]
    assert len(three.radical_a.nuclei + three.radical_b.nuclei) == 6
    assert three.radical_a.nuclei[2].hyperfine.components == (-0.5304, -0.4336, -0.1976)
    assert three.radical_b.nuclei[2].hyperfine.components == (-0.74, -0.536, -0.1879)


@pytest.mark.parametrize("name", ["fad-trp-1-1", "fad-trp-2-2", "fad-trp-3-3"])
def test_preset_round_trip(name):
    cfg = builtin_presets()[name]
    assert parse_config(serialize_config(cfg)) == cfg


@pytest.mark.parametrize(
    "text, fragment",
    [
        ('{"radical_a": {}, \n "radical_b": {}', "line 2"),
        ('{"radical_a": {}}', "radical_b"),
        ('{"radical_a": {}, "radical_b": {}, "colour": 1}', "unknown keys"),
        ('{"radical_a": {}, "radical_b": {}, "rates": {"ks_per_s": 0}}', "ks"),
        ('{"radical_a": {}, "radical_b": {}, "field": {"theta_rad": 4}}', "theta"),
        ('{"radical_a": {}, "radical_b": {}, "field": {"b_uT": -1}}', "magnitude"),
        ('{"radical_a": {"nuclei": [{"label": "H", "spin": 0.3, "ax_mT": 0, "ay_mT": 0, "az_mT": 0}]}, '
         '"radical_b": {}}', "spin"),
        ('{"radical_a": {"nuclei": [{"label": "H", "ax_mT": 0, "ay_mT": 0}]}, "radical_b": {}}', "az_mT"),
        ('{"radical_a": {"nuclei": [{"label": "H", "ax_mT": "x", "ay_mT": 0, "az_mT": 0}]}, "radical_b": {}}',
         "ax_mT"),
    ],
)
def test_invalid_documents(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


def test_dimension_cap_is_an_error_not_a_crash():
    nuclei = [{"label": f"N{i}", "ax_mT": 0, "ay_mT": 0, "az_mT": 1} for i in range(6)]
    doc = json.dumps({"radical_a": {"nuclei": nuclei}, "radical_b": {"nuclei": nuclei[:2]}})
    with pytest.raises(ConfigError, match="cap"):
        parse_config(doc)
    with pytest.raises(ConfigError, match="joint dimension"):
        parse_config(SIX_NUCLEI_DOC, max_joint_dim=512)


def test_nonfinite_tensor_rejected():
    with pytest.raises(ConfigError):
        HyperfineTensor(float("nan"), 0, 0)


finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
nucleus = st.builds(
    NucleusSpec,
    st.sampled_from(["N5", "H1", "C3", "X"]),
    st.sampled_from([0.5, 1.0, 1.5]),
    st.builds(HyperfineTensor, finite, finite, finite),
)
radical = st.builds(RadicalSpec, st.sampled_from(["A", "B", "FAD"]), st.lists(nucleus, max_size=2).map(tuple))
configs = st.builds(
    RadicalPairConfig,
    radical,
    radical,
    st.builds(FieldConfig, st.floats(0, 100), st.floats(0, math.pi), st.floats(0, 6.28)),
    st.builds(RateConfig, st.floats(1, 1e9), st.floats(1, 1e9)),
)


@settings(max_examples=200, deadline=None)
@given(configs)
def test_round_trip_property(cfg):
    assert parse_config(serialize_config(cfg)) == cfg
    assert parse_config(serialize_config(cfg)).digest() == cfg.digest()
