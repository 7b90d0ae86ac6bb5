"""Independent multi-user systems and their secret-conditional output laws.

Each of V users independently draws a value from a per-user alphabet; a
separable query sums one term per user. Conditioning on a user's value
shifts the convolution of the other users' terms; conditioning on absence
marginalizes the user out, which equals the prior mixture of the value
conditionals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .distributions import DiscreteDistribution
from .errors import ValidationError
from .pairs import DiscriminativePair
from .transport import L1, Metric

#: Nearby non-integer output atoms are merged within this tolerance.
ATOM_MERGE_TOL = 1e-9
#: Cap on the atom count of the running convolution.
MAX_ATOMS = 10_000

MODES = ("values", "absence")


@dataclass(frozen=True, eq=False)
class SeparableQuery:
    """Per-user output tables for a query that sums one term per user."""

    tables: tuple[Mapping[float, float], ...]

    def output(self, user: int, value: float) -> float:
        table = self.tables[user]
        try:
            return float(table[float(value)])
        except KeyError:
            raise ValidationError(
                f"value {value!r} is not in the alphabet of user {user}"
            ) from None

    @classmethod
    def counting(cls, alphabets: Sequence[Sequence[float]]) -> "SeparableQuery":
        """Identity per-user terms: the query counts (sums) the raw values."""
        return cls(tables=tuple({float(a): float(a) for a in alpha} for alpha in alphabets))


@dataclass(frozen=True, eq=False)
class SecretEvent:
    """Either "user i reported value a" or "user i is absent"."""

    user: int
    value: float | None = None

    @classmethod
    def absent(cls, user: int) -> "SecretEvent":
        return cls(user=user, value=None)

    @property
    def is_absent(self) -> bool:
        return self.value is None


@dataclass(frozen=True, eq=False)
class UserSystem:
    """V independent users with per-user priors and a separable query."""

    priors: tuple[DiscreteDistribution, ...]
    query: SeparableQuery

    def __post_init__(self) -> None:
        priors = tuple(self.priors)
        if not priors:
            raise ValidationError("a user system needs at least one user")
        if len(self.query.tables) != len(priors):
            raise ValidationError(
                f"query has {len(self.query.tables)} tables for {len(priors)} users"
            )
        for i, prior in enumerate(priors):
            for a in prior.support:
                out = self.query.output(i, a)
                if not np.isfinite(out):
                    raise ValidationError(f"query output for user {i} at {a!r} is not finite")
        object.__setattr__(self, "priors", priors)

    @property
    def user_count(self) -> int:
        return len(self.priors)

    def alphabet(self, user: int) -> np.ndarray:
        self._check_user(user)
        return self.priors[user].support

    def _check_user(self, user: int) -> None:
        if not 0 <= user < len(self.priors):
            raise ValidationError(f"user index {user} out of range for {len(self.priors)} users")


def bernoulli_counting(p_values: Sequence[float]) -> UserSystem:
    """Counting query over users with {0, 1} alphabets and P(1) = p_i."""
    ps = np.asarray(p_values, dtype=float)
    if ps.ndim != 1 or ps.size == 0:
        raise ValidationError("p_values must be a nonempty vector")
    if np.any((ps < 0) | (ps > 1)):
        raise ValidationError("each p must lie in [0, 1]")
    priors = tuple(
        DiscreteDistribution(np.array([0.0, 1.0]), np.array([1.0 - p, p])) for p in ps
    )
    query = SeparableQuery.counting([prior.support for prior in priors])
    return UserSystem(priors=priors, query=query)


def _pushforward(prior: DiscreteDistribution, system: UserSystem, user: int):
    """Atoms of f_i(S_i): query outputs with prior mass, merged exactly."""
    agg: dict[float, float] = {}
    for a, m in zip(prior.support, prior.mass):
        if m <= 0:
            continue
        out = system.query.output(user, a)
        agg[out] = agg.get(out, 0.0) + m
    values = np.array(sorted(agg), dtype=float)
    mass = np.array([agg[v] for v in values], dtype=float)
    return values, mass


def _merge_close(values: np.ndarray, mass: np.ndarray):
    """Merge atoms lying within ATOM_MERGE_TOL; value is the mass-weighted mean."""
    order = np.argsort(values, kind="stable")
    values = values[order]
    mass = mass[order]
    out_vals: list[float] = []
    out_mass: list[float] = []
    k = 0
    while k < values.size:
        end = k + 1
        while end < values.size and values[end] - values[end - 1] <= ATOM_MERGE_TOL:
            end += 1
        chunk_mass = mass[k:end].sum()
        out_vals.append(float((values[k:end] * mass[k:end]).sum() / chunk_mass))
        out_mass.append(float(chunk_mass))
        k = end
    return np.array(out_vals), np.array(out_mass)


def _convolve(a_vals, a_mass, b_vals, b_mass, integer_grid: bool):
    if integer_grid:
        lo = int(round(a_vals[0] + b_vals[0]))
        hi = int(round(a_vals[-1] + b_vals[-1]))
        if hi - lo + 1 > MAX_ATOMS:
            raise ValidationError(
                f"convolution grid would hold {hi - lo + 1} atoms (cap {MAX_ATOMS})"
            )
        a_lo, b_lo = int(round(a_vals[0])), int(round(b_vals[0]))
        a_pmf = np.zeros(int(round(a_vals[-1])) - a_lo + 1)
        b_pmf = np.zeros(int(round(b_vals[-1])) - b_lo + 1)
        a_pmf[np.round(a_vals).astype(int) - a_lo] = a_mass
        b_pmf[np.round(b_vals).astype(int) - b_lo] = b_mass
        pmf = np.convolve(a_pmf, b_pmf)
        vals = np.arange(lo, lo + pmf.size, dtype=float)
        keep = pmf > 0
        return vals[keep], pmf[keep]
    sums = np.add.outer(a_vals, b_vals).ravel()
    mass = np.multiply.outer(a_mass, b_mass).ravel()
    vals, mass = _merge_close(sums, mass)
    if vals.size > MAX_ATOMS:
        raise ValidationError(f"convolution support grew to {vals.size} atoms (cap {MAX_ATOMS})")
    return vals, mass


def _all_outputs_integer(system: UserSystem) -> bool:
    return all(
        float(out).is_integer() for table in system.query.tables for out in table.values()
    )


def conditional_output_dist(system: UserSystem, event: SecretEvent) -> DiscreteDistribution:
    """Law of the query output conditioned on a per-user secret event.

    For a value event the other users' terms are convolved and shifted by
    the conditioned user's output; for an absence event all users are
    convolved, which equals the prior mixture over the user's values.
    """
    system._check_user(event.user)
    integer_grid = _all_outputs_integer(system)
    if not event.is_absent:
        alphabet = system.priors[event.user].support
        if not np.any(alphabet == float(event.value)):
            raise ValidationError(
                f"value {event.value!r} is not in the alphabet of user {event.user}"
            )
    vals = np.array([0.0])
    mass = np.array([1.0])
    for i, prior in enumerate(system.priors):
        if not event.is_absent and i == event.user:
            continue
        pv, pm = _pushforward(prior, system, i)
        vals, mass = _convolve(vals, mass, pv, pm, integer_grid)
    if not event.is_absent:
        vals = vals + system.query.output(event.user, event.value)
    return DiscreteDistribution.from_weights(vals, mass)


def discriminative_pairs(
    system: UserSystem, user: int, mode: str = "values"
) -> list[DiscriminativePair]:
    """Secret pairs for one user: all value pairs, or each value vs absence."""
    system._check_user(user)
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    alphabet = system.priors[user].support
    conditionals = {
        float(a): conditional_output_dist(system, SecretEvent(user, float(a)))
        for a in alphabet
    }
    pairs = []
    if mode == "values":
        for ai in range(alphabet.size):
            for bi in range(ai + 1, alphabet.size):
                a, b = float(alphabet[ai]), float(alphabet[bi])
                pairs.append(
                    DiscriminativePair(
                        labels=(f"S{user}={a:g}", f"S{user}={b:g}"),
                        p=conditionals[a],
                        q=conditionals[b],
                        prior="scenario",
                    )
                )
    else:
        absent = conditional_output_dist(system, SecretEvent.absent(user))
        for a in alphabet:
            a = float(a)
            pairs.append(
                DiscriminativePair(
                    labels=(f"S{user}={a:g}", f"S{user}=absent"),
                    p=conditionals[a],
                    q=absent,
                    prior="scenario",
                )
            )
    return pairs


def query_sensitivity(
    system: UserSystem, user: int, metric: Metric = L1, mode: str = "values"
) -> float:
    """Worst per-user output swing: max over a, b of d(f_i(a) - f_i(b)).

    The value is independent of the priors. Absence pairs are covered by
    the same bound (the absent conditional is a mixture of the value
    conditionals), so both modes return it.
    """
    system._check_user(user)
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    outputs = [system.query.output(user, a) for a in system.priors[user].support]
    best = 0.0
    for i in range(len(outputs)):
        for j in range(i + 1, len(outputs)):
            best = max(best, metric(outputs[i] - outputs[j]))
    return best
