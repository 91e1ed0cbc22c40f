import json

import pytest

from scentplan.schema import (
    MappingRule,
    OdorDescriptor,
    OdorFamily,
    OdorSchema,
    SchemaError,
    load_schema,
    pattern_matches,
    schema_from_dict,
    schema_to_dict,
    serialize_schema,
)


def _family(fid, *descriptor_ids):
    return OdorFamily(fid, fid.title(), tuple(OdorDescriptor(d, d.split(".")[-1]) for d in descriptor_ids))


def test_default_schema_shape(default_schema):
    assert default_schema.schema_id == "default-v1"
    assert len(default_schema.families) == 12
    assert sum(len(f.descriptors) for f in default_schema.families) == 48


def test_lookup_label_first_match_wins(default_schema):
    rule = default_schema.lookup_label("a sliced lemon")
    assert rule.descriptor_id == "citrus.lemon"
    assert rule.default_intensity == pytest.approx(0.8)


def test_lookup_label_unmapped_returns_none(default_schema):
    assert default_schema.lookup_label("cutting board") is None
    assert default_schema.lookup_label("") is None


@pytest.mark.parametrize(
    "pattern,label,expected",
    [
        ("lemon", "a sliced lemon", True),
        ("lemon", "LEMON tree", True),
        ("board", "surfboard", False),  # token match, not substring
        ("sea|ocean", "calm ocean at dawn", True),
        ("soy sauce", "bottle of soy sauce", True),
        ("soy sauce", "soy milk with hot sauce", False),  # run must be consecutive
        ("pine", "pineapple", False),
    ],
)
def test_pattern_matches(pattern, label, expected):
    assert pattern_matches(pattern, label) is expected


def test_duplicate_descriptor_id_rejected():
    with pytest.raises(SchemaError, match="duplicate descriptor id 'a.x'"):
        OdorSchema("s", (_family("a", "a.x"), _family("b", "a.x")), ())


def test_dangling_mapping_target_rejected():
    rule = MappingRule("lemon", "citrus.nope", 0.5)
    with pytest.raises(SchemaError, match="citrus.nope"):
        OdorSchema("s", (_family("citrus", "citrus.lemon"),), (rule,))


def test_empty_schema_rejected():
    with pytest.raises(SchemaError, match="empty schema"):
        OdorSchema("s", (), ())
    with pytest.raises(SchemaError, match="empty schema"):
        _family("citrus")


def test_intensity_out_of_range_rejected():
    with pytest.raises(SchemaError, match="default_intensity"):
        MappingRule("lemon", "citrus.lemon", 1.5)


def test_descriptor_lookup_errors(default_schema):
    assert default_schema.has_descriptor("citrus.lemon")
    assert not default_schema.has_descriptor("citrus.durian")
    with pytest.raises(SchemaError, match="citrus.durian"):
        default_schema.descriptor("citrus.durian")


def test_round_trip_preserves_semantics(default_schema):
    doc = schema_to_dict(default_schema)
    again = schema_from_dict(json.loads(json.dumps(doc)))
    assert schema_to_dict(again) == doc
    assert again.descriptor_ids == default_schema.descriptor_ids
    # the mapping table round-trips in order, so lookups agree
    for label in ("lemon", "ocean waves", "cutting board", "espresso machine"):
        a, b = default_schema.lookup_label(label), again.lookup_label(label)
        assert (a is None) == (b is None)
        if a is not None:
            assert a.descriptor_id == b.descriptor_id


def test_load_schema_from_file(tmp_path, default_schema):
    path = tmp_path / "alt.json"
    path.write_text(serialize_schema(default_schema), "utf-8")
    assert load_schema(path).schema_id == default_schema.schema_id


def test_load_schema_rejects_malformed(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", "utf-8")
    with pytest.raises(SchemaError, match="not valid JSON"):
        load_schema(bad)
    missing = tmp_path / "missing.json"
    missing.write_text('{"schema_id": "x"}', "utf-8")
    with pytest.raises(SchemaError, match="missing field"):
        load_schema(missing)
