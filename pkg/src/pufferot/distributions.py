"""Finite discrete probability distributions on the real line.

The value type here is deliberately small: a strictly increasing support
and an aligned probability mass vector. Everything downstream (transport
plans, noise calibration, verification) consumes these objects and relies
on their invariants, so construction is strict and instances are frozen.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError

#: Absolute tolerance on the total-mass-equals-one invariant.
MASS_TOL = 1e-12


def _as_vector(values: Sequence[float], name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError(f"{name} must not be empty")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise ValidationError(f"{name}[{bad[0]}] is not finite: {arr[bad[0]]!r}")
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probability mass on a strictly increasing finite support.

    Masses may be zero: a zero atom records a declared support point
    (which matters for support-based sensitivity bounds) and is only
    removed by an explicit :meth:`prune`. Duplicate support values are
    always an error, never merged silently. Instances are immutable and
    safe for concurrent reads.
    """

    support: np.ndarray
    mass: np.ndarray

    def __post_init__(self) -> None:
        support = _as_vector(self.support, "support")
        mass = _as_vector(self.mass, "mass")
        if support.size != mass.size:
            raise ValidationError(
                f"support and mass lengths differ: {support.size} != {mass.size}"
            )
        steps = np.diff(support)
        bad = np.flatnonzero(steps <= 0)
        if bad.size:
            i = int(bad[0]) + 1
            raise ValidationError(
                f"support must be strictly increasing; support[{i}]={support[i]!r} "
                f"does not exceed support[{i - 1}]={support[i - 1]!r}"
            )
        neg = np.flatnonzero(mass < 0)
        if neg.size:
            i = int(neg[0])
            raise ValidationError(f"mass[{i}] is negative: {mass[i]!r}")
        total = float(mass.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise ValidationError(f"mass must sum to 1 within {MASS_TOL}, got {total!r}")
        support.setflags(write=False)
        mass.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_weights(
        cls, support: Sequence[float], weights: Sequence[float]
    ) -> "DiscreteDistribution":
        """Build a distribution from nonnegative weights.

        The support is sorted ascending (weights permuted accordingly) and
        the weights are normalized to sum to one.
        """
        sup = _as_vector(support, "support")
        w = _as_vector(weights, "weights")
        if sup.size != w.size:
            raise ValidationError(
                f"support and weights lengths differ: {sup.size} != {w.size}"
            )
        neg = np.flatnonzero(w < 0)
        if neg.size:
            i = int(neg[0])
            raise ValidationError(f"weights[{i}] is negative: {w[i]!r}")
        order = np.argsort(sup, kind="stable")
        sup = sup[order]
        w = w[order]
        dup = np.flatnonzero(np.diff(sup) == 0)
        if dup.size:
            i = int(order[dup[0] + 1])
            raise ValidationError(
                f"duplicate support value {sup[dup[0]]!r} (input index {i})"
            )
        total = float(w.sum())
        if total <= 0:
            raise ValidationError("weights must have a positive sum")
        return cls(sup, w / total)

    def __len__(self) -> int:
        return int(self.support.size)

    def cdf(self, x: float) -> float:
        """Right-continuous cumulative mass: sum of mass at support <= x."""
        k = int(np.searchsorted(self.support, x, side="right"))
        return float(self.mass[:k].sum())

    def prune(self) -> "DiscreteDistribution":
        """Drop zero-mass atoms, leaving the strictly positive support."""
        keep = self.mass > 0
        if keep.all():
            return self
        return DiscreteDistribution(self.support[keep], self.mass[keep])

    def to_json_dict(self) -> dict:
        return {"support": self.support.tolist(), "mass": self.mass.tolist()}

    @classmethod
    def from_json_dict(cls, payload: Mapping) -> "DiscreteDistribution":
        for key in ("support", "mass"):
            if key not in payload:
                raise ValidationError(f"distribution object is missing {key!r}")
        return cls(payload["support"], payload["mass"])


def poisson_binomial(p_values: Sequence[float]) -> DiscreteDistribution:
    """Distribution of a sum of independent Bernoulli(p_i) variables.

    Computed by iterated convolution on the integer grid {0, ..., V}; the
    full grid is kept even where the mass is zero.
    """
    ps = _as_vector(p_values, "p_values")
    bad = np.flatnonzero((ps < 0) | (ps > 1))
    if bad.size:
        i = int(bad[0])
        raise ValidationError(f"p_values[{i}]={ps[i]!r} is outside [0, 1]")
    pmf = np.array([1.0])
    for p in ps:
        pmf = np.convolve(pmf, [1.0 - p, p])
    pmf = np.maximum(pmf, 0.0)
    pmf /= pmf.sum()
    return DiscreteDistribution(np.arange(ps.size + 1, dtype=float), pmf)
