"""Exact probability algebra over finite discrete variables.

Tables are dense numpy arrays with one axis per variable.  Every table is
immutable once built: the underlying arrays are flagged read-only so they can
be shared freely between threads and processes.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ConstructionError, PositivityError, UnknownNameError

__all__ = [
    "CIResult",
    "CondTable",
    "JointTable",
    "MaskedValue",
    "VariableSpec",
    "check_ci",
    "condition",
    "marginalize",
    "missingness_odds",
    "restrict",
    "sample",
]

SUM_TOL = 1e-12
RENORMALIZE_LIMIT = 1e-9


@dataclass(frozen=True)
class VariableSpec:
    name: str
    cardinality: int

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ConstructionError(f"variable name must be a non-empty string, got {self.name!r}")
        if int(self.cardinality) != self.cardinality or self.cardinality < 1:
            raise ConstructionError(
                f"variable {self.name!r} needs a positive integer cardinality, got {self.cardinality!r}"
            )
        object.__setattr__(self, "cardinality", int(self.cardinality))

    def to_json(self) -> dict:
        return {"name": self.name, "cardinality": self.cardinality}


@dataclass(frozen=True)
class MaskedValue:
    """A possibly missing value; ``value == cardinality`` marks non-response."""

    responded: int
    value: int

    @classmethod
    def observed(cls, value: int) -> MaskedValue:
        return cls(1, int(value))

    @classmethod
    def missing(cls, cardinality: int) -> MaskedValue:
        return cls(0, int(cardinality))

    def validate(self, cardinality: int) -> None:
        if self.responded not in (0, 1):
            raise ArgumentError(f"responded flag must be 0 or 1, got {self.responded!r}")
        if self.responded == 1 and not 0 <= self.value < cardinality:
            raise ArgumentError(f"value {self.value} outside support of size {cardinality}")
        if self.responded == 0 and self.value != cardinality:
            raise ArgumentError(f"missing value must carry sentinel {cardinality}, got {self.value}")


def _freeze(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


def _check_unique(variables: Sequence[VariableSpec]) -> None:
    names = [v.name for v in variables]
    if len(set(names)) != len(names):
        raise ConstructionError(f"duplicate variable names in {names}")


def _settle_sum(total: float, what: str) -> bool:
    """Return True when renormalization is needed; raise past the hard limit."""
    drift = abs(total - 1.0)
    if drift > RENORMALIZE_LIMIT:
        raise ConstructionError(f"{what} sums to {total!r}, off by {drift:.3e}")
    return drift > SUM_TOL


class JointTable:
    """Joint distribution over an ordered list of discrete variables."""

    __slots__ = ("probabilities", "variables")

    def __init__(self, variables: Iterable[VariableSpec], probabilities):
        variables = tuple(variables)
        _check_unique(variables)
        probs = np.asarray(probabilities, dtype=float)
        shape = tuple(v.cardinality for v in variables)
        if probs.size != int(np.prod(shape, dtype=int)):
            raise ConstructionError(f"expected {int(np.prod(shape))} probabilities, got {probs.size}")
        probs = probs.reshape(shape)
        if not np.all(np.isfinite(probs)):
            raise ConstructionError("probabilities must be finite")
        if np.any(probs < 0):
            raise ConstructionError(f"negative probability {probs.min()!r}")
        total = float(probs.sum())
        if _settle_sum(total, "joint table"):
            probs = probs / total
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "probabilities", _freeze(probs))

    def __setattr__(self, key, value):
        raise AttributeError("JointTable is immutable")

    def __repr__(self):
        dims = ", ".join(f"{v.name}:{v.cardinality}" for v in self.variables)
        return f"JointTable({dims})"

    @classmethod
    def from_array(cls, names: Sequence[str], array) -> JointTable:
        array = np.asarray(array, dtype=float)
        if array.ndim != len(names):
            raise ConstructionError(f"{len(names)} names for an array with {array.ndim} axes")
        return cls([VariableSpec(n, c) for n, c in zip(names, array.shape)], array)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def cards(self) -> dict[str, int]:
        return {v.name: v.cardinality for v in self.variables}

    def spec(self, name: str) -> VariableSpec:
        for v in self.variables:
            if v.name == name:
                return v
        raise UnknownNameError(f"unknown variable {name!r}; table has {list(self.names)}")

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownNameError(f"unknown variable {name!r}; table has {list(self.names)}") from None

    def array(self, names: Sequence[str]) -> np.ndarray:
        """Marginal probabilities over ``names``, with axes in that order."""
        names = list(names)
        if len(set(names)) != len(names):
            raise ArgumentError(f"repeated names in {names}")
        axes = [self.axis(n) for n in names]
        dropped = tuple(i for i in range(len(self.variables)) if i not in axes)
        marginal = self.probabilities.sum(axis=dropped) if dropped else self.probabilities
        kept = sorted(axes)
        return np.transpose(marginal, [kept.index(a) for a in axes])

    def reorder(self, names: Sequence[str]) -> JointTable:
        if sorted(names) != sorted(self.names):
            raise ArgumentError(f"reorder needs a permutation of {list(self.names)}")
        return JointTable([self.spec(n) for n in names], self.array(names))

    def to_json(self) -> dict:
        return {
            "variables": [v.to_json() for v in self.variables],
            "probabilities": [float(p) for p in self.probabilities.ravel()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> JointTable:
        try:
            variables = [VariableSpec(v["name"], v["cardinality"]) for v in data["variables"]]
            return cls(variables, data["probabilities"])
        except (KeyError, TypeError) as exc:
            raise ConstructionError(f"malformed joint table: {exc}") from None


class CondTable:
    """Conditional distribution of ``targets`` given ``givens``.

    ``probabilities`` has the given axes first and the target axes last.
    Rows whose conditioning event has probability zero are flagged in
    ``unsupported`` and hold zeros.
    """

    __slots__ = ("givens", "probabilities", "targets", "unsupported")

    def __init__(self, targets, givens, probabilities, unsupported=None):
        targets, givens = tuple(targets), tuple(givens)
        _check_unique(targets + givens)
        gshape = tuple(v.cardinality for v in givens)
        tshape = tuple(v.cardinality for v in targets)
        probs = np.asarray(probabilities, dtype=float).reshape(gshape + tshape)
        if unsupported is None:
            unsupported = np.zeros(gshape, dtype=bool)
        unsupported = np.asarray(unsupported, dtype=bool).reshape(gshape)
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ConstructionError("conditional probabilities must be finite and nonnegative")
        taxes = tuple(range(len(gshape), len(gshape) + len(tshape)))
        sums = probs.sum(axis=taxes) if taxes else np.ones(gshape)
        probs = np.where(unsupported[(...,) + (None,) * len(tshape)], 0.0, probs)
        drift = np.abs(np.where(unsupported, 1.0, sums) - 1.0)
        if drift.size and drift.max() > RENORMALIZE_LIMIT:
            raise ConstructionError(f"conditional rows drift from 1 by up to {drift.max():.3e}")
        if drift.size and drift.max() > SUM_TOL:
            safe = np.where(unsupported, 1.0, sums)
            probs = probs / safe[(...,) + (None,) * len(tshape)]
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "givens", givens)
        object.__setattr__(self, "probabilities", _freeze(probs))
        unsupported = np.array(unsupported, copy=True)
        unsupported.setflags(write=False)
        object.__setattr__(self, "unsupported", unsupported)

    def __setattr__(self, key, value):
        raise AttributeError("CondTable is immutable")

    def __repr__(self):
        t = ",".join(v.name for v in self.targets)
        g = ",".join(v.name for v in self.givens)
        return f"CondTable({t} | {g})"

    @property
    def target_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.targets)

    @property
    def given_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.givens)

    def to_json(self) -> dict:
        return {
            "targets": [v.to_json() for v in self.targets],
            "givens": [v.to_json() for v in self.givens],
            "probabilities": [float(p) for p in self.probabilities.ravel()],
            "unsupported": [bool(u) for u in self.unsupported.ravel()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> CondTable:
        try:
            targets = [VariableSpec(v["name"], v["cardinality"]) for v in data["targets"]]
            givens = [VariableSpec(v["name"], v["cardinality"]) for v in data["givens"]]
            return cls(targets, givens, data["probabilities"], data.get("unsupported"))
        except (KeyError, TypeError) as exc:
            raise ConstructionError(f"malformed conditional table: {exc}") from None


@dataclass(frozen=True)
class CIResult:
    holds: bool
    max_deviation: float


def _names(vars_: Iterable[str] | str) -> list[str]:
    if isinstance(vars_, str):
        return [vars_]
    return list(vars_)


def marginalize(table: JointTable, keep: Iterable[str]) -> JointTable:
    keep = set(_names(keep))
    for name in keep:
        table.axis(name)
    names = [n for n in table.names if n in keep]
    return JointTable([table.spec(n) for n in names], table.array(names))


def condition(table: JointTable, targets, givens) -> CondTable:
    targets, givens = _names(targets), _names(givens)
    if set(targets) & set(givens):
        raise ArgumentError(f"targets {targets} and givens {givens} overlap")
    if not targets:
        raise ArgumentError("condition needs at least one target")
    joint = table.array(givens + targets)
    mass = joint.sum(axis=tuple(range(len(givens), len(givens) + len(targets))))
    unsupported = mass <= 0
    safe = np.where(unsupported, 1.0, mass)
    probs = joint / safe[(...,) + (None,) * len(targets)]
    return CondTable([table.spec(n) for n in targets], [table.spec(n) for n in givens], probs, unsupported)


def restrict(table: JointTable, event: Mapping[str, int]) -> JointTable:
    """Condition on a point event and drop the event variables."""
    index = [slice(None)] * len(table.variables)
    for name, value in event.items():
        spec = table.spec(name)
        if not 0 <= value < spec.cardinality:
            raise ArgumentError(f"{name}={value} outside support")
        index[table.axis(name)] = value
    sliced = table.probabilities[tuple(index)]
    mass = float(sliced.sum())
    if mass <= 0:
        raise PositivityError(f"event {dict(event)} has probability zero")
    kept = [v for v in table.variables if v.name not in event]
    return JointTable(kept, sliced / mass)


def missingness_odds(table: JointTable, indicator: str, givens=()) -> np.ndarray:
    """P(indicator=0 | givens) / P(indicator=1 | givens) for every given cell."""
    givens = _names(givens)
    if table.spec(indicator).cardinality != 2:
        raise ArgumentError(f"{indicator} must be binary")
    joint = table.array(givens + [indicator])
    responded = joint[..., 1]
    if np.any(responded <= 0):
        cell = tuple(int(i) for i in np.argwhere(responded <= 0)[0])
        raise PositivityError(f"P({indicator}=1 | {dict(zip(givens, cell))}) is zero")
    return joint[..., 0] / responded


def check_ci(table: JointTable, a, b, c=(), tol: float = 1e-9, event: Mapping[str, int] | None = None) -> CIResult:
    """Check a ⫫ b | c, optionally within the sub-population ``event``."""
    a, b, c = _names(a), _names(b), _names(c)
    sets = [set(a), set(b), set(c), set(event or ())]
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            if sets[i] & sets[j]:
                raise ArgumentError(f"sets must be disjoint: {a}, {b}, {c}, {dict(event or {})}")
    if not a or not b:
        raise ArgumentError("both independence sides must be non-empty")
    if event:
        table = restrict(table, event)
    joint = table.array(c + a + b)
    nc = len(c)
    na = len(a)
    flat = joint.reshape(joint.shape[:nc] + (int(np.prod(joint.shape[nc : nc + na])), -1))
    mass = flat.sum(axis=(-2, -1))
    supported = mass > 0
    safe = np.where(supported, mass, 1.0)[..., None, None]
    pab = flat / safe
    gap = pab - pab.sum(axis=-1, keepdims=True) * pab.sum(axis=-2, keepdims=True)
    gap = np.where(supported[..., None, None], np.abs(gap), 0.0)
    deviation = float(gap.max()) if gap.size else 0.0
    return CIResult(deviation <= tol, deviation)


def sample(table: JointTable, n: int, seed: int) -> list[tuple[int, ...]]:
    """Inverse-CDF draws over the flattened table, row-major order."""
    if n < 0:
        raise ArgumentError("sample size must be nonnegative")
    if n == 0:
        return []
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(table.probabilities.ravel())
    cdf /= cdf[-1]
    flat = np.searchsorted(cdf, rng.random(n), side="right")
    flat = np.minimum(flat, cdf.size - 1)
    cells = np.unravel_index(flat, table.probabilities.shape)
    return [tuple(int(axis[i]) for axis in cells) for i in range(n)]
