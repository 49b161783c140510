"""Tilting functions and the identified densities they imply."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .errors import CoverageError
from .observed import Patterns
from .probability import CondTable, VariableSpec

__all__ = ["QFunctions", "TiltingSet", "assemble", "tilts_from_response"]


def _table_json(array: np.ndarray, axes: tuple[str, ...]) -> dict:
    return {
        "axes": list(axes),
        "values": {",".join(map(str, idx)): float(array[idx]) for idx in np.ndindex(array.shape)},
    }


def _table_from_json(data: Mapping) -> tuple[np.ndarray, tuple[str, ...]]:
    axes = tuple(data["axes"])
    cells = {tuple(int(i) for i in key.split(",")) if key else (): v for key, v in data["values"].items()}
    shape = tuple(max(c[i] for c in cells) + 1 for i in range(len(axes)))
    array = np.zeros(shape)
    for idx, value in cells.items():
        array[idx] = value
    return array, axes


@dataclass(frozen=True)
class QFunctions:
    """Solved inverse response probabilities, one array per shadow equation.

    Arrays carry the covariate axes first.  ``extra`` holds the solutions
    of external shadow systems keyed by name.
    """

    q_1a: np.ndarray | None = None
    q_2a: np.ndarray | None = None
    q_1b: np.ndarray | None = None
    q_2b: np.ndarray | None = None
    q_1c: np.ndarray | None = None
    q_2c: np.ndarray | None = None
    extra: Mapping[str, np.ndarray] = field(default_factory=dict)

    def items(self):
        for name in ("q_1a", "q_2a", "q_1b", "q_2b", "q_1c", "q_2c"):
            value = getattr(self, name)
            if value is not None:
                yield name, value
        yield from sorted(self.extra.items())

    def to_json(self) -> dict:
        return {name: np.asarray(v).ravel().tolist() for name, v in self.items()}


@dataclass(frozen=True)
class TiltingSet:
    model: str
    covariates: tuple[str, ...]
    h: np.ndarray
    h_b: np.ndarray
    k: np.ndarray
    g: np.ndarray | None
    g_b: np.ndarray | None
    identified_M: CondTable
    identified_Y: CondTable
    drift_M: float
    drift_Y: float
    q: QFunctions | None = None
    systems: tuple = ()
    notes: tuple[str, ...] = ()

    @property
    def m_axes(self) -> tuple[str, ...]:
        return self.covariates + ("M",)

    @property
    def my_axes(self) -> tuple[str, ...]:
        return self.covariates + ("M", "Y")

    def response_probability(self, patterns: Patterns) -> np.ndarray:
        """Implied P(R_MY=1 | covariates, M, Y) = P(R_MY=1|covariates) / g_b."""
        return patterns.r11()[..., None, None] / self.g_b

    def to_json(self) -> dict:
        out = {
            "model": self.model,
            "covariates": list(self.covariates),
            "h": _table_json(self.h, self.m_axes),
            "h_b": _table_json(self.h_b, self.m_axes),
            "k": _table_json(self.k, self.my_axes),
            "identified_M": self.identified_M.to_json(),
            "identified_Y": self.identified_Y.to_json(),
            "drift_M": self.drift_M,
            "drift_Y": self.drift_Y,
            "notes": list(self.notes),
        }
        if self.g is not None:
            out["g"] = _table_json(self.g, self.my_axes)
        if self.g_b is not None:
            out["g_b"] = _table_json(self.g_b, self.my_axes)
        if self.q is not None:
            out["q"] = self.q.to_json()
        if self.systems:
            out["systems"] = [s.to_json() for s in self.systems]
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> TiltingSet:
        h, _ = _table_from_json(data["h"])
        h_b, _ = _table_from_json(data["h_b"])
        k, _ = _table_from_json(data["k"])
        g = _table_from_json(data["g"])[0] if "g" in data else None
        g_b = _table_from_json(data["g_b"])[0] if "g_b" in data else None
        return cls(
            model=data["model"],
            covariates=tuple(data["covariates"]),
            h=h,
            h_b=h_b,
            k=k,
            g=g,
            g_b=g_b,
            identified_M=CondTable.from_json(data["identified_M"]),
            identified_Y=CondTable.from_json(data["identified_Y"]),
            drift_M=float(data["drift_M"]),
            drift_Y=float(data["drift_Y"]),
            notes=tuple(data.get("notes", ())),
        )


def _normalize(raw: np.ndarray) -> tuple[np.ndarray, float]:
    sums = raw.sum(axis=-1, keepdims=True)
    if np.any(~np.isfinite(raw)) or np.any(sums <= 0):
        raise CoverageError("tilted density has an empty or undefined row")
    return raw / sums, float(np.max(np.abs(sums - 1.0)))


def assemble(
    patterns: Patterns,
    covariates: tuple[str, ...],
    cards: Mapping[str, int],
    model: str,
    *,
    h=None,
    h_b=None,
    k=None,
    g=None,
    g_b=None,
    q: QFunctions | None = None,
    systems=(),
    notes=(),
) -> TiltingSet:
    """Tilt the observed densities and fill in the tilts not given explicitly.

    ``h`` (relative to P(M|X,A,R_M=1)) takes precedence over ``h_b``
    (relative to P(M|X,A,R_MY=1)) for the mediator density.
    """
    m_card, y_card = patterns.m_card, patterns.y_card
    cov_shape = patterns.total.shape
    if h is not None:
        raw_m = np.broadcast_to(h, cov_shape + (m_card,)) * patterns.m_given_rm1()
    else:
        raw_m = np.broadcast_to(h_b, cov_shape + (m_card,)) * patterns.m_given_r11()
    identified_m, drift_m = _normalize(raw_m)
    k = np.broadcast_to(np.asarray(k, dtype=float), cov_shape + (m_card, y_card)).copy()
    identified_y, drift_y = _normalize(k * patterns.y_given_m_r11())
    if h is None:
        h = identified_m / patterns.m_given_rm1()
    if h_b is None:
        h_b = identified_m / patterns.m_given_r11()
    h = np.broadcast_to(np.asarray(h, dtype=float), cov_shape + (m_card,)).copy()
    h_b = np.broadcast_to(np.asarray(h_b, dtype=float), cov_shape + (m_card,)).copy()
    if g is None:
        g = h[..., None] * k
    if g_b is None:
        g_b = h_b[..., None] * k
    g = np.broadcast_to(np.asarray(g, dtype=float), k.shape).copy()
    g_b = np.broadcast_to(np.asarray(g_b, dtype=float), k.shape).copy()

    cov_specs = [VariableSpec(n, cards[n]) for n in covariates]
    m_spec, y_spec = VariableSpec("M", m_card), VariableSpec("Y", y_card)
    table_m = CondTable([m_spec], cov_specs, identified_m)
    table_y = CondTable([y_spec], cov_specs + [m_spec], identified_y)
    for array in (h, h_b, k, g, g_b):
        array.setflags(write=False)
    return TiltingSet(
        model=model,
        covariates=tuple(covariates),
        h=h,
        h_b=h_b,
        k=k,
        g=g,
        g_b=g_b,
        identified_M=table_m,
        identified_Y=table_y,
        drift_M=drift_m,
        drift_Y=drift_y,
        q=q,
        systems=tuple(systems),
        notes=tuple(notes),
    )


def tilts_from_response(patterns: Patterns, response: np.ndarray) -> dict:
    """All five tilts implied by P(R_MY=1 | covariates, M, Y).

    Once the joint response probability is known, g_b and g follow from
    their definitions and h, h_b, k from averaging over complete cases.
    """
    y_given = patterns.y_given_m_r11()
    g_b = patterns.r11()[..., None, None] / response
    h_b = (y_given * g_b).sum(axis=-1)
    g = (patterns.rm1()[..., None, None] * patterns.ry1_given_m_rm1()[..., None]) / response
    h = (y_given * g).sum(axis=-1)
    return {"h": h, "h_b": h_b, "k": g_b / h_b[..., None], "g": g, "g_b": g_b}
