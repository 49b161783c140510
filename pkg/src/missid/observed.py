"""Observed-data laws with masked mediator, outcome and shadow values.

An observed law is a joint table over ``X, A, R_M, M, R_Y, Y`` and, when a
shadow variable is recorded, ``R_Z, Z``.  The masked variables have one
extra support point, the sentinel, which carries all the mass of
non-response.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .errors import ArgumentError, ConstructionError, PositivityError
from .probability import JointTable, VariableSpec

__all__ = ["RESPONSE_FLOOR", "ObservedLaw", "Patterns", "mask_joint"]

# Response probabilities below this are treated as positivity failures.
RESPONSE_FLOOR = 1e-10

_PAIRS = (("M", "R_M"), ("Y", "R_Y"), ("Z", "R_Z"))


class ObservedLaw:
    __slots__ = ("table",)

    def __init__(self, table: JointTable):
        names = table.names
        expected = ["X", "A", "R_M", "M", "R_Y", "Y"]
        if "Z" in names:
            expected += ["R_Z", "Z"]
        if list(names) != expected:
            raise ConstructionError(f"observed law needs variables {expected}, got {list(names)}")
        probs = table.probabilities
        for value, indicator in _PAIRS:
            if value not in names:
                continue
            sentinel = table.spec(value).cardinality - 1
            va, ia = table.axis(value), table.axis(indicator)
            arr = np.moveaxis(probs, (ia, va), (0, 1))
            if np.any(arr[0, :sentinel] > 0) or np.any(arr[1, sentinel] > 0):
                raise ConstructionError(f"{value} mass is inconsistent with its response flag {indicator}")
        object.__setattr__(self, "table", table)

    def __setattr__(self, key, value):
        raise AttributeError("ObservedLaw is immutable")

    def __repr__(self):
        return f"ObservedLaw({self.cards})"

    @property
    def has_shadow(self) -> bool:
        return "Z" in self.table.names

    @property
    def cards(self) -> dict[str, int]:
        """Substantive cardinalities (without the sentinel)."""
        cards = {"X": self.table.cards["X"], "A": self.table.cards["A"]}
        for value, _ in _PAIRS:
            if value in self.table.names:
                cards[value] = self.table.cards[value] - 1
        return cards

    @property
    def shadow_missing_mass(self) -> float:
        if not self.has_shadow:
            return 0.0
        return float(self.table.array(["R_Z"])[0])

    def masked(self, keep: Sequence[str] = ("X", "A")) -> np.ndarray:
        """Mass over ``keep`` + (M†, Y†); masked axes end with the sentinel."""
        keep = list(keep)
        for name in keep:
            if name not in ("X", "A", "Z"):
                raise ArgumentError(f"can only keep X, A or Z, got {name!r}")
        return np.array(self.table.array(keep + ["M", "Y"]))

    def to_json(self) -> dict:
        return self.table.to_json()

    @classmethod
    def from_json(cls, data) -> ObservedLaw:
        return cls(JointTable.from_json(data))


def mask_joint(joint: JointTable) -> ObservedLaw:
    """Mask a joint over substantive variables and their response indicators."""
    names = list(joint.names)
    arr = np.array(joint.probabilities)
    specs = {v.name: v for v in joint.variables}
    for value, indicator in _PAIRS:
        if value not in names:
            continue
        if indicator not in names:
            # Always observed: attach a degenerate indicator.
            arr = np.stack([np.zeros_like(arr), arr], axis=-1)
            names.append(indicator)
            specs[indicator] = VariableSpec(indicator, 2)
        va, ia = names.index(value), names.index(indicator)
        moved = np.moveaxis(arr, (ia, va), (0, 1))
        card = moved.shape[1]
        out = np.zeros((2, card + 1) + moved.shape[2:])
        out[1, :card] = moved[1]
        out[0, card] = moved[0].sum(axis=0)
        arr = np.moveaxis(out, (0, 1), (ia, va))
        specs[value] = VariableSpec(value, card + 1)
    order = ["X", "A", "R_M", "M", "R_Y", "Y"]
    if "Z" in names:
        order += ["R_Z", "Z"]
    if sorted(order) != sorted(names):
        raise ArgumentError(f"joint must hold exactly {order}, got {names}")
    arr = np.transpose(arr, [names.index(n) for n in order])
    return ObservedLaw(JointTable([specs[n] for n in order], arr))


def _divide(num, den, what: str):
    den = np.asarray(den, dtype=float)
    if np.any(den <= 0):
        raise PositivityError(f"{what}: conditioning event has probability zero")
    return np.asarray(num, dtype=float) / den


def _response(num, den, what: str):
    """A response probability that must stay above the floor."""
    value = _divide(num, den, what)
    if np.any(value < RESPONSE_FLOOR):
        raise PositivityError(f"{what} falls below {RESPONSE_FLOOR:g}")
    return value


class Patterns:
    """Observed-data quantities used by the identification formulas.

    ``masked`` has covariate axes followed by (M†, Y†).  All returned
    arrays keep the covariate axes first; trailing axes are M then Y.
    """

    def __init__(self, masked: np.ndarray):
        masked = np.asarray(masked, dtype=float)
        self.masked = masked
        self.p11 = masked[..., :-1, :-1]
        self.p10 = masked[..., :-1, -1]
        self.p01 = masked[..., -1, :-1]
        self.p00 = masked[..., -1, -1]
        self.n11 = self.p11.sum(axis=(-2, -1))
        self.n10 = self.p10.sum(axis=-1)
        self.n01 = self.p01.sum(axis=-1)
        self.total = self.n11 + self.n10 + self.n01 + self.p00
        # Complete-case margins.
        self.cc_m = self.p11.sum(axis=-1)
        self.cc_y = self.p11.sum(axis=-2)

    @property
    def m_card(self) -> int:
        return self.p11.shape[-2]

    @property
    def y_card(self) -> int:
        return self.p11.shape[-1]

    # Response probabilities given covariates only.
    def rm1(self):
        return _response(self.n11 + self.n10, self.total, "P(R_M=1|X,A)")

    def ry1(self):
        return _response(self.n11 + self.n01, self.total, "P(R_Y=1|X,A)")

    def r11(self):
        return _response(self.n11, self.total, "P(R_MY=1|X,A)")

    def rm1_given_ry1(self):
        return _response(self.n11, self.n11 + self.n01, "P(R_M=1|X,A,R_Y=1)")

    def rm1_given_ry0(self):
        return _response(self.n10, self.n10 + self.p00, "P(R_M=1|X,A,R_Y=0)")

    def ry1_given_rm1(self):
        return _response(self.n11, self.n11 + self.n10, "P(R_Y=1|X,A,R_M=1)")

    def ry1_given_rm0(self):
        return _response(self.n01, self.n01 + self.p00, "P(R_Y=1|X,A,R_M=0)")

    # Cell-level response probabilities.
    def rm1_given_y_ry1(self):
        return _response(self.cc_y, self.cc_y + self.p01, "P(R_M=1|X,A,Y,R_Y=1)")

    def ry1_given_m_rm1(self):
        return _response(self.cc_m, self.cc_m + self.p10, "P(R_Y=1|X,A,M,R_M=1)")

    # Observed-data densities.
    def m_given_rm1(self):
        return _divide(self.cc_m + self.p10, (self.n11 + self.n10)[..., None], "P(M|X,A,R_M=1)")

    def m_given_r11(self):
        return _divide(self.cc_m, self.n11[..., None], "P(M|X,A,R_MY=1)")

    def y_given_m_r11(self):
        return _divide(self.p11, self.cc_m[..., None], "P(Y|X,A,M,R_MY=1)")

    def m_given_y_r11(self):
        """Axes (..., M, Y): P(M=m | X,A,Y=y,R_MY=1)."""
        return _divide(self.p11, self.cc_y[..., None, :], "P(M|X,A,Y,R_MY=1)")

    def y_given_ry1(self):
        return _divide(self.cc_y + self.p01, (self.n11 + self.n01)[..., None], "P(Y|X,A,R_Y=1)")

    def y_given_rm0_ry1(self):
        return _divide(self.p01, self.n01[..., None], "P(Y|X,A,R_M=0,R_Y=1)")

    def y_given_rm1_ry1(self):
        return _divide(self.cc_y, self.n11[..., None], "P(Y|X,A,R_MY=1)")

    def m_given_rm1_ry0(self):
        return _divide(self.p10, self.n10[..., None], "P(M|X,A,R_M=1,R_Y=0)")

    # Missingness odds.
    def odds_rm0_given_y_ry1(self):
        return _divide(self.p01, self.cc_y, "odds(R_M=0|X,A,Y,R_Y=1)")

    def odds_ry0_given_m_rm1(self):
        return _divide(self.p10, self.cc_m, "odds(R_Y=0|X,A,M,R_M=1)")

    def odds_rm0(self):
        return _divide(self.n01 + self.p00, self.n11 + self.n10, "odds(R_M=0|X,A)")
