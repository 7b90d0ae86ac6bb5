"""Tabular ingestion: empirical secret-conditional distributions from CSV.

A public categorical attribute is mapped onto contiguous 1-based numeric
indices (the index order defines the metric geometry, so unknown labels
reject the row rather than silently extending the mapping). Per-secret
counts then normalize into the conditional distributions that calibration
consumes.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

from .distributions import DiscreteDistribution
from .errors import ValidationError
from .pairs import DiscriminativePair

_ADULT_RESOURCE = "adult_education_by_race.json"
_ADULT_PAIR = ("White", "Asian-Pac-Islander")


@dataclass(frozen=True, eq=False)
class AttributeMapping:
    """Ordered category labels mapped to indices 1..n."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        labels = tuple(str(label) for label in self.labels)
        if not labels:
            raise ValidationError("an attribute mapping needs at least one label")
        seen: dict[str, int] = {}
        for i, label in enumerate(labels):
            if label in seen:
                raise ValidationError(
                    f"duplicate label {label!r} at positions {seen[label]} and {i}"
                )
            seen[label] = i
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_positions", seen)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        """1-based index of a label."""
        try:
            return self._positions[label] + 1
        except KeyError:
            raise ValidationError(f"label {label!r} is not in the attribute mapping") from None

    @property
    def support(self) -> np.ndarray:
        return np.arange(1, len(self.labels) + 1, dtype=float)

    @classmethod
    def from_json_file(cls, path: str) -> "AttributeMapping":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if not isinstance(payload, list):
            raise ValidationError("a mapping file must hold a JSON array of labels")
        return cls(labels=tuple(payload))


def load_table(
    path: str,
    secret_column: str,
    data_column: str,
    mapping: AttributeMapping,
    delimiter: str = ",",
) -> dict[str, np.ndarray]:
    """Count data-column indices per secret label from a headered CSV.

    Cells are stripped of surrounding whitespace. Rows whose data label is
    not in the mapping are rejected; the error reports how many rows were
    rejected and names the first offending label with its row number.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        if reader.fieldnames is None:
            raise ValidationError(f"{path}: empty file (no header row)")
        fieldnames = [name.strip() for name in reader.fieldnames]
        for column in (secret_column, data_column):
            if column not in fieldnames:
                raise ValidationError(f"{path}: column {column!r} not found in header {fieldnames}")
        counts: dict[str, np.ndarray] = {}
        rejected: list[tuple[int, str]] = []
        rows = 0
        for rownum, raw in enumerate(reader, start=2):
            row = {key.strip(): (value or "").strip() for key, value in raw.items() if key}
            rows += 1
            secret = row.get(secret_column, "")
            label = row.get(data_column, "")
            try:
                idx = mapping.index(label)
            except ValidationError:
                rejected.append((rownum, label))
                continue
            if secret not in counts:
                counts[secret] = np.zeros(len(mapping))
            counts[secret][idx - 1] += 1
    if rejected:
        rownum, label = rejected[0]
        raise ValidationError(
            f"{path}: {len(rejected)} row(s) rejected with unmappable data labels; "
            f"first is label {label!r} at row {rownum}"
        )
    if rows == 0:
        raise ValidationError(f"{path}: no data rows")
    return counts


def empirical_conditionals(
    counts: Mapping[str, Sequence[float]],
) -> dict[str, DiscreteDistribution]:
    """Normalize per-secret counts on the mapped index support 1..n."""
    out: dict[str, DiscreteDistribution] = {}
    for secret, values in counts.items():
        arr = np.asarray(values, dtype=float)
        if arr.sum() <= 0:
            raise ValidationError(f"secret {secret!r} has zero total count")
        support = np.arange(1, arr.size + 1, dtype=float)
        out[secret] = DiscreteDistribution.from_weights(support, arr)
    return out


def enumerate_pairs(
    conditionals: Mapping[str, DiscreteDistribution],
    pairs: Sequence[Sequence[str]] | None = None,
    prior: str = "empirical",
) -> list[DiscriminativePair]:
    """Build discriminative pairs: all unordered secret pairs, or a listed subset."""
    if pairs is None:
        labels = sorted(conditionals)
        if len(labels) < 2:
            raise ValidationError("need at least two secrets to enumerate pairs")
        listed = [
            (labels[i], labels[j])
            for i in range(len(labels))
            for j in range(i + 1, len(labels))
        ]
    else:
        listed = []
        for entry in pairs:
            if len(entry) != 2:
                raise ValidationError(f"pair {entry!r} must hold exactly two labels")
            a, b = str(entry[0]), str(entry[1])
            for label in (a, b):
                if label not in conditionals:
                    raise ValidationError(f"unknown secret label {label!r} in pair list")
            listed.append((a, b))
    return [
        DiscriminativePair(labels=(a, b), p=conditionals[a], q=conditionals[b], prior=prior)
        for a, b in listed
    ]


def load_conditionals_json(payload: Mapping) -> dict[str, DiscreteDistribution]:
    """Parse a per-secret distribution object; keys starting with '_' are metadata."""
    out = {}
    for label, dist in payload.items():
        if label.startswith("_"):
            continue
        out[str(label)] = DiscreteDistribution.from_json_dict(dist)
    if not out:
        raise ValidationError("no per-secret distributions found")
    return out


def adult_education_fixture() -> dict:
    """Raw packaged fixture: education-index conditionals per race, plus metadata."""
    text = resources.files("pufferot.data").joinpath(_ADULT_RESOURCE).read_text("utf-8")
    return json.loads(text)


def adult_education_conditionals() -> dict[str, DiscreteDistribution]:
    """Education-index distributions conditioned on race (packaged fixture)."""
    return load_conditionals_json(adult_education_fixture())


def adult_education_pair() -> DiscriminativePair:
    """The White vs Asian-Pac-Islander education pair from the packaged fixture."""
    conditionals = adult_education_conditionals()
    return enumerate_pairs(conditionals, pairs=[_ADULT_PAIR], prior="adult")[0]
