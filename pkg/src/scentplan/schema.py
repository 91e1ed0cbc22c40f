"""Fixed odor vocabulary: families, descriptors, and the visual-label mapping table.

Every scent plan in the workbench draws its descriptors from one
:class:`OdorSchema`.  The schema is data, not code: the shipped default lives
in ``data/default_schema.json`` and alternative schemas can be loaded from any
JSON document with the same shape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


class SchemaError(ValueError):
    """Raised when a schema document violates a structural invariant."""


@dataclass(frozen=True)
class OdorDescriptor:
    descriptor_id: str
    name: str


@dataclass(frozen=True)
class OdorFamily:
    family_id: str
    name: str
    descriptors: tuple[OdorDescriptor, ...]

    def __post_init__(self) -> None:
        if not self.descriptors:
            raise SchemaError(f"empty schema: family '{self.family_id}' has no descriptors")


@dataclass(frozen=True)
class MappingRule:
    """One visual-label lookup rule.

    ``visual_label_pattern`` is a case-insensitive token pattern: alternatives
    separated by ``|``, each matching when its word sequence appears in the
    label's word sequence.  ``pattern_matches("lemon", "a sliced lemon")`` is
    true; ``"board"`` does not match ``"surfboard"``.
    """

    visual_label_pattern: str
    descriptor_id: str
    default_intensity: float

    def __post_init__(self) -> None:
        if not self.visual_label_pattern.strip():
            raise SchemaError(f"mapping rule for '{self.descriptor_id}' has an empty pattern")
        if not 0.0 <= self.default_intensity <= 1.0:
            raise SchemaError(
                f"mapping rule '{self.visual_label_pattern}' default_intensity "
                f"{self.default_intensity} outside [0, 1]"
            )


def _tokens(text: str) -> list[str]:
    return [t for t in "".join(c.lower() if c.isalnum() else " " for c in text).split() if t]


def pattern_matches(pattern: str, label: str) -> bool:
    """True when any ``|``-alternative of *pattern* occurs in *label* as a token run."""
    label_toks = _tokens(label)
    for alt in pattern.split("|"):
        alt_toks = _tokens(alt)
        if not alt_toks:
            continue
        n = len(alt_toks)
        for i in range(len(label_toks) - n + 1):
            if label_toks[i : i + n] == alt_toks:
                return True
    return False


@dataclass(frozen=True)
class OdorSchema:
    """The fixed vocabulary all plans must draw from, plus the lookup table.

    Invariants enforced at construction: descriptor ids are globally unique
    across families, every mapping rule targets an existing descriptor, and
    the schema is non-empty.
    """

    schema_id: str
    families: tuple[OdorFamily, ...]
    mapping: tuple[MappingRule, ...]
    _by_id: dict[str, OdorDescriptor] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.families:
            raise SchemaError(f"empty schema: '{self.schema_id}' has no families")
        by_id: dict[str, OdorDescriptor] = {}
        for fam in self.families:
            for desc in fam.descriptors:
                if desc.descriptor_id in by_id:
                    raise SchemaError(f"duplicate descriptor id '{desc.descriptor_id}'")
                by_id[desc.descriptor_id] = desc
        for rule in self.mapping:
            if rule.descriptor_id not in by_id:
                raise SchemaError(
                    f"dangling mapping target '{rule.descriptor_id}' "
                    f"(pattern '{rule.visual_label_pattern}')"
                )
        object.__setattr__(self, "_by_id", by_id)

    @property
    def descriptor_ids(self) -> tuple[str, ...]:
        return tuple(self._by_id)

    def descriptor(self, descriptor_id: str) -> OdorDescriptor:
        try:
            return self._by_id[descriptor_id]
        except KeyError:
            raise SchemaError(f"unknown descriptor id '{descriptor_id}'") from None

    def has_descriptor(self, descriptor_id: str) -> bool:
        return descriptor_id in self._by_id

    def lookup_label(self, label: str) -> MappingRule | None:
        """First mapping rule whose pattern matches *label*, or None."""
        for rule in self.mapping:
            if pattern_matches(rule.visual_label_pattern, label):
                return rule
        return None


def schema_from_dict(doc: dict) -> OdorSchema:
    try:
        families = tuple(
            OdorFamily(
                family_id=f["family_id"],
                name=f["name"],
                descriptors=tuple(
                    OdorDescriptor(d["descriptor_id"], d["name"]) for d in f["descriptors"]
                ),
            )
            for f in doc["families"]
        )
        mapping = tuple(
            MappingRule(
                visual_label_pattern=m["visual_label_pattern"],
                descriptor_id=m["descriptor_id"],
                default_intensity=float(m["default_intensity"]),
            )
            for m in doc["mapping"]
        )
        return OdorSchema(schema_id=doc["schema_id"], families=families, mapping=mapping)
    except KeyError as exc:
        raise SchemaError(f"schema document missing field {exc}") from exc


def schema_to_dict(schema: OdorSchema) -> dict:
    return {
        "schema_id": schema.schema_id,
        "families": [
            {
                "family_id": fam.family_id,
                "name": fam.name,
                "descriptors": [
                    {"descriptor_id": d.descriptor_id, "name": d.name} for d in fam.descriptors
                ],
            }
            for fam in schema.families
        ],
        "mapping": [
            {
                "visual_label_pattern": r.visual_label_pattern,
                "descriptor_id": r.descriptor_id,
                "default_intensity": r.default_intensity,
            }
            for r in schema.mapping
        ],
    }


def serialize_schema(schema: OdorSchema) -> str:
    return json.dumps(schema_to_dict(schema), indent=2, ensure_ascii=False) + "\n"


def load_schema(source: str | Path) -> OdorSchema:
    """Load and validate a schema document.

    *source* is a file path, or the sentinel string ``"default"`` for the
    schema shipped with the package.
    """
    if source == "default":
        text = resources.files("scentplan").joinpath("data", "default_schema.json").read_text("utf-8")
    else:
        text = Path(source).read_text("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"schema document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("schema document must be a JSON object")
    return schema_from_dict(doc)
