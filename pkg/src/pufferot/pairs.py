"""Discriminative secret pairs: the indistinguishability targets.

A pair couples two secret labels with the conditional distributions of the
public value under each secret, tagged by the prior (adversary) they were
derived from. Collections of pairs are what calibration and verification
consume.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .distributions import DiscreteDistribution
from .errors import ValidationError


@dataclass(frozen=True, eq=False)
class DiscriminativePair:
    labels: tuple[str, str]
    p: DiscreteDistribution
    q: DiscreteDistribution
    prior: str = "empirical"

    def __post_init__(self) -> None:
        left, right = self.labels
        if left == right:
            raise ValidationError(f"pair labels must be distinct, got {left!r} twice")

    def swapped(self) -> "DiscriminativePair":
        return DiscriminativePair(
            labels=(self.labels[1], self.labels[0]), p=self.q, q=self.p, prior=self.prior
        )

    def to_json_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "prior": self.prior,
            "p": self.p.to_json_dict(),
            "q": self.q.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, payload: Mapping) -> "DiscriminativePair":
        for key in ("labels", "p", "q"):
            if key not in payload:
                raise ValidationError(f"pair object is missing {key!r}")
        labels = payload["labels"]
        if len(labels) != 2:
            raise ValidationError("pair labels must hold exactly two entries")
        return cls(
            labels=(str(labels[0]), str(labels[1])),
            p=DiscreteDistribution.from_json_dict(payload["p"]),
            q=DiscreteDistribution.from_json_dict(payload["q"]),
            prior=str(payload.get("prior", "empirical")),
        )
