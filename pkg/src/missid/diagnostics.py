"""Testable implications of the catalog models, evaluated on observed laws."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .catalog import ModelId
from .errors import ArgumentError, MissidError, PositivityError
from .observed import RESPONSE_FLOOR, ObservedLaw, Patterns
from .probability import check_ci
from .shadow import red_extra_deviation
from .shadow_models import _external_response, model_systems, solve_systems
from .tilting import QFunctions, TiltingSet

__all__ = [
    "CHECK_IDS",
    "DEFAULT_TOL",
    "CheckRecord",
    "DiagnosticsReport",
    "assigned_checks",
    "audit",
    "check_T1_T2",
    "check_T3",
    "check_T4_T5",
    "check_T9",
    "check_red_extra_systems",
    "pattern_odds_gap",
]

CHECK_IDS = ("T1", "T2", "T3", "T4", "T5", "T9", "RED_EXTRA", "EXT_PAR_PRODUCT")
DEFAULT_TOL = 1e-8
XA = ("X", "A")


@dataclass(frozen=True)
class CheckRecord:
    id: str
    max_deviation: float
    tolerance: float
    passed: bool | None
    cells_evaluated: int
    cells_skipped: int = 0

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "cells_evaluated": self.cells_evaluated,
            "cells_skipped": self.cells_skipped,
        }


@dataclass(frozen=True)
class DiagnosticsReport:
    model: str
    checks: tuple[CheckRecord, ...]
    notes: tuple[str, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def check(self, check_id: str) -> CheckRecord:
        for record in self.checks:
            if record.id == check_id:
                return record
        raise KeyError(check_id)

    def to_json(self) -> dict:
        return {"model": self.model, "checks": [c.to_json() for c in self.checks], "notes": list(self.notes)}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _record(check_id: str, gaps: np.ndarray, usable: np.ndarray, tol: float, empirical: bool) -> CheckRecord:
    gaps = np.asarray(gaps, dtype=float)
    usable = np.broadcast_to(usable, gaps.shape)
    values = np.abs(gaps[usable])
    deviation = float(values.max()) if values.size else 0.0
    passed = None if empirical else deviation <= tol
    return CheckRecord(check_id, deviation, tol, passed, int(usable.sum()), int((~usable).sum()))


def _ci_record(obs: ObservedLaw, check_id, a, b, event, tol, empirical) -> CheckRecord:
    table = obs.table
    mass = table.array(["X", "A", event[0]])[..., event[1]]
    usable = mass > RESPONSE_FLOOR
    result = check_ci(table, a, b, XA, tol, {event[0]: event[1]})
    passed = None if empirical else result.max_deviation <= tol
    return CheckRecord(check_id, result.max_deviation, tol, passed, int(usable.sum()), int((~usable).sum()))


def check_T1_T2(obs: ObservedLaw, tol: float = DEFAULT_TOL, empirical: bool = False) -> tuple[CheckRecord, CheckRecord]:
    """T1: R_Y ⫫ M | X,A,R_M=1.  T2: R_M ⫫ Y | X,A,R_Y=1."""
    t1 = _ci_record(obs, "T1", "R_Y", "M", ("R_M", 1), tol, empirical)
    t2 = _ci_record(obs, "T2", "R_M", "Y", ("R_Y", 1), tol, empirical)
    return t1, t2


def pattern_odds_gap(p: Patterns, odds_m: np.ndarray, odds_y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """P(0,0|cov)/P(1,1|cov) − E[odds_M · odds_Y | cov, R_MY=1], per covariate cell.

    ``odds_m`` and ``odds_y`` broadcast over (cov..., M, Y).
    """
    usable = p.n11 > RESPONSE_FLOOR
    n11 = np.where(usable, p.n11, 1.0)
    lhs = p.p00 / n11
    weights = p.p11 / n11[..., None, None]
    rhs = (weights * odds_m * odds_y).sum(axis=(-2, -1))
    return lhs - rhs, usable


def check_T3(obs: ObservedLaw, tol: float = DEFAULT_TOL, empirical: bool = False) -> CheckRecord:
    """P(R_M=0,R_Y=0|X,A)/P(1,1|X,A) against the complete-case mean of the two observed odds."""
    p = Patterns(obs.masked(XA))
    odds_m = p.odds_rm0_given_y_ry1()[..., None, :]
    odds_y = p.odds_ry0_given_m_rm1()[..., :, None]
    gap, usable = pattern_odds_gap(p, odds_m, odds_y)
    return _record("T3", gap, usable, tol, empirical)


def check_T4_T5(
    obs: ObservedLaw, q: QFunctions, tol: float = DEFAULT_TOL, empirical: bool = False
) -> tuple[CheckRecord | None, CheckRecord | None]:
    """T4: 1/P(R_M=1|X,A,R_Y=0) = E[q_1a | X,A,R_Y=0,R_M=1]; T5 mirrors it with q_2a."""
    if q is None or (q.q_1a is None and q.q_2a is None):
        raise ArgumentError("T4/T5 need solved q_1a or q_2a tables")
    p = Patterns(obs.masked(XA))
    t4 = t5 = None
    if q.q_1a is not None:
        usable = p.n10 > RESPONSE_FLOOR
        n10 = np.where(usable, p.n10, 1.0)
        lhs = (p.n10 + p.p00) / n10
        rhs = (p.p10 / n10[..., None] * q.q_1a).sum(axis=-1)
        t4 = _record("T4", lhs - rhs, usable, tol, empirical)
    if q.q_2a is not None:
        usable = p.n01 > RESPONSE_FLOOR
        n01 = np.where(usable, p.n01, 1.0)
        lhs = (p.n01 + p.p00) / n01
        rhs = (p.p01 / n01[..., None] * q.q_2a).sum(axis=-1)
        t5 = _record("T5", lhs - rhs, usable, tol, empirical)
    return t4, t5


def check_T9(
    obs: ObservedLaw,
    odds_m: np.ndarray,
    odds_y: np.ndarray,
    tol: float = DEFAULT_TOL,
    empirical: bool = False,
    check_id: str = "T9",
) -> CheckRecord:
    """The pattern-odds equality with odds conditional on (X,A,M,Y) from the parallel solves."""
    p = Patterns(obs.masked(XA))
    gap, usable = pattern_odds_gap(p, odds_m, odds_y)
    return _record(check_id, gap, usable, tol, empirical)


def check_red_extra_systems(systems, tol: float = DEFAULT_TOL, empirical: bool = False) -> CheckRecord:
    """Worst R_Z=0 equation over solved red systems."""
    gaps, skipped = [], 0
    for system in systems:
        if system.variant != "red" or not system.z_masked:
            continue
        try:
            gaps.append(red_extra_deviation(system.source, system.solution_q))
        except PositivityError:
            skipped += 1
    gaps = np.array(gaps)
    record = _record("RED_EXTRA", gaps, np.ones(gaps.shape, dtype=bool), tol, empirical)
    return CheckRecord(record.id, record.max_deviation, tol, record.passed, record.cells_evaluated, skipped)


def assigned_checks(model: ModelId) -> tuple[str, ...]:
    family = model.family
    table = {
        "S3": ("T1", "T2"),
        "S4": ("T3",),
        "S5": ("T1",),
        "Z4": ("T1",),
        "S6": ("T2",),
        "Z5": ("T2",),
        "Z1": ("T4", "T5"),
    }
    if family in table:
        return table[family]
    if family == "Z2" and model.mode == "strong":
        return ("T4",)
    if family == "Z3" and model.mode == "strong":
        return ("T5",)
    checks = []
    if family == "EXT_PARALLEL":
        checks.append("EXT_PAR_PRODUCT" if model.placement == "upstream_covariate" else "T9")
    if model.external and model.shadow_missingness == "2i":
        checks.append("RED_EXTRA")
    return tuple(checks)


_NO_CHECK_NOTES = {
    "S1": "not falsifiable within this catalog",
    "S2": "not falsifiable within this catalog",
    "Z2": "testable conditions are not available under weak completeness",
    "Z3": "testable conditions are not available under weak completeness",
}


def _solved_q(obs: ObservedLaw, model: ModelId, artifacts: TiltingSet | None):
    """Solved systems for the audit; re-solved without feasibility checks when absent."""
    if artifacts is not None and artifacts.systems:
        return {(s.name.split()[0], s.cell): s for s in artifacts.systems}, artifacts.q
    solved = solve_systems(model_systems(obs, model), tol=np.inf, check_feasible=False)
    return solved, None


def _internal_q(solved: dict, obs: ObservedLaw) -> QFunctions:
    cards = obs.cards
    cov = (cards["X"], cards["A"])
    tables = {}
    for (name, cell), system in solved.items():
        if name not in tables:
            tables[name] = np.full(cov + (system.design.shape[1],), np.nan)
        tables[name][cell[:2]] = system.solution_q
    return QFunctions(q_1a=tables.get("q_1a"), q_2a=tables.get("q_2a"))


def audit(
    obs: ObservedLaw,
    model: ModelId,
    artifacts: TiltingSet | None = None,
    tol: float = DEFAULT_TOL,
    empirical: bool = False,
) -> DiagnosticsReport:
    """Run exactly the testable implications assigned to ``model``.

    ``artifacts`` may carry the solved shadow systems of a previous
    identification; otherwise the needed systems are solved here by least
    squares with no feasibility requirement, so violations still yield
    deviations.  Empirical laws report deviations without a verdict.
    """
    ids = assigned_checks(model)
    if not ids:
        note = _NO_CHECK_NOTES.get(model.family, "no testable implication assigned in this catalog")
        return DiagnosticsReport(model.label, (), (note,))
    records, notes = [], []
    if "T1" in ids or "T2" in ids:
        t1, t2 = check_T1_T2(obs, tol, empirical)
        records += [r for r in (t1, t2) if r.id in ids]
    if "T3" in ids:
        records.append(check_T3(obs, tol, empirical))
    needs_q = {"T4", "T5", "T9", "EXT_PAR_PRODUCT", "RED_EXTRA"} & set(ids)
    if needs_q:
        try:
            solved, q = _solved_q(obs, model, artifacts)
        except MissidError as exc:
            notes.append(f"shadow systems could not be solved: {exc}")
            solved, q = {}, None
        if solved and ({"T4", "T5"} & set(ids)):
            q = q if q is not None and (q.q_1a is not None or q.q_2a is not None) else _internal_q(solved, obs)
            t4, t5 = check_T4_T5(obs, q, tol, empirical)
            records += [r for r in (t4, t5) if r is not None and r.id in ids]
        if solved and ({"T9", "EXT_PAR_PRODUCT"} & set(ids)):
            cards = obs.cards
            shape = (cards["X"], cards["A"], cards["M"], cards["Y"])
            _, tables = _external_response(solved, model, shape)
            check_id = "T9" if "T9" in ids else "EXT_PAR_PRODUCT"
            records.append(check_T9(obs, tables["q_M"] - 1.0, tables["q_Y"] - 1.0, tol, empirical, check_id))
        if solved and "RED_EXTRA" in ids:
            records.append(check_red_extra_systems(solved.values(), tol, empirical))
    return DiagnosticsReport(model.label, tuple(records), tuple(notes))
