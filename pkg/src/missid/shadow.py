"""Discrete shadow-variable integral equations.

A shadow system is built from ``obs2d[w†, z†]``: the joint mass of the
partially observed target W (rows, the last row holding all W-missing
mass) and the shadow variable Z (columns, optionally followed by one
column holding all Z-missing mass), within one conditioning cell.  Each
usable shadow cell contributes one equation

    Σ_w P(W=w | z-cell, R_W=1) · q(w) = 1 / P(R_W=1 | z-cell)

whose unknown q(w) = 1 / P(R_W=1 | W=w).
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ArgumentError,
    AssumptionError,
    CompletenessFailure,
    InfeasibleSolution,
    ModelMisfit,
    PositivityError,
)
from .observed import ObservedLaw
from .probability import CondTable, JointTable, restrict

__all__ = [
    "FEASIBILITY_SLACK",
    "RANK_TOL",
    "SOLVE_TOL",
    "VARIANTS",
    "CompletenessResult",
    "RankSummary",
    "RedExtraResult",
    "ShadowSystem",
    "build_shadow_system",
    "check_red_extra",
    "completeness_check",
    "rank_summary",
    "red_extra_deviation",
    "shadow_system_from_masked",
    "solve_shadow",
]

VARIANTS = ("plain", "red", "red_dagger", "blue")
SOLVE_TOL = 1e-8
RANK_TOL = 1e-10
FEASIBILITY_SLACK = 1e-9


@dataclass(frozen=True)
class ShadowSystem:
    design: np.ndarray
    rhs: np.ndarray
    variant: str
    row_labels: tuple[str, ...]
    source: np.ndarray
    z_masked: bool
    name: str = ""
    cell: tuple[int, ...] = ()
    skipped_rows: int = 0
    solution_q: np.ndarray | None = None
    rank: int | None = None
    condition_number: float | None = None
    residual: float | None = None
    boundary: tuple[int, ...] = field(default=())

    @property
    def shape(self) -> tuple[int, int]:
        return self.design.shape

    @property
    def solved(self) -> bool:
        return self.solution_q is not None

    def describe(self) -> str:
        where = f" at cell {self.cell}" if self.cell else ""
        return f"{self.name or 'shadow system'} ({self.variant}){where}"

    def to_json(self) -> dict:
        def num(x):
            return None if x is None else (float(x) if np.isfinite(x) else str(x))

        return {
            "name": self.name,
            "variant": self.variant,
            "cell": list(self.cell),
            "rows": list(self.row_labels),
            "design": [[float(v) for v in row] for row in self.design],
            "rhs": [float(v) for v in self.rhs],
            "q": None if self.solution_q is None else [float(v) for v in self.solution_q],
            "rank": self.rank,
            "condition_number": num(self.condition_number),
            "residual": num(self.residual),
            "boundary": list(self.boundary),
            "skipped_rows": self.skipped_rows,
        }


def _row(column: np.ndarray, label: str, what: str) -> tuple[np.ndarray, float] | None:
    """Design row and right-hand side from one column of obs2d, or None if empty."""
    total = float(column.sum())
    if total <= 0:
        return None
    observed = column[:-1]
    responded = float(observed.sum())
    if responded <= 0:
        raise PositivityError(f"{what}: P(R_W=1 | {label}) is zero")
    return observed / responded, total / responded


def shadow_system_from_masked(
    obs2d,
    variant: str = "plain",
    *,
    z_masked: bool = False,
    name: str = "",
    cell: tuple[int, ...] = (),
) -> ShadowSystem:
    """Build one shadow system from masked (W†, Z or Z†) mass.

    ``z_masked`` marks the last column of ``obs2d`` as the Z-missing column.
    """
    obs2d = np.asarray(obs2d, dtype=float)
    if obs2d.ndim != 2 or obs2d.shape[0] < 2:
        raise ArgumentError("obs2d must be a matrix with a W-missing row")
    if variant not in VARIANTS:
        raise ArgumentError(f"unknown shadow variant {variant!r}; expected one of {VARIANTS}")
    what = name or "shadow system"
    n_z = obs2d.shape[1] - (1 if z_masked else 0)
    missing_z = obs2d[:, -1] if z_masked else np.zeros(obs2d.shape[0])
    if variant == "plain" and missing_z.sum() > 0:
        raise AssumptionError(f"{what}: the plain variant needs a fully observed shadow variable")

    scale = 1.0
    if variant == "blue":
        # Odds tilt for shadow non-response that depends on R_W.
        observed_w, missing_w = obs2d[:-1].sum(), obs2d[-1].sum()
        if missing_w <= 0 or observed_w <= 0:
            raise PositivityError(f"{what}: both R_W values need positive mass")
        rz1_given_rw1 = (observed_w - missing_z[:-1].sum()) / observed_w
        rz1_given_rw0 = (missing_w - missing_z[-1]) / missing_w
        if rz1_given_rw0 <= 0:
            raise PositivityError(f"{what}: P(R_Z=1 | R_W=0) is zero")
        scale = rz1_given_rw1 / rz1_given_rw0

    design, rhs, labels, skipped = [], [], [], 0
    for z in range(n_z):
        built = _row(obs2d[:, z], f"z={z}", what)
        if built is None:
            skipped += 1
            continue
        row, inverse = built
        if variant == "blue":
            inverse = 1.0 + (inverse - 1.0) * scale
        design.append(row)
        rhs.append(inverse)
        labels.append(f"z={z}")
    if variant == "red_dagger":
        if missing_z.sum() <= 0:
            raise AssumptionError(f"{what}: the weak variant needs shadow non-response mass")
        row, inverse = _row(missing_z, "R_Z=0", what)
        design.append(row)
        rhs.append(inverse)
        labels.append("R_Z=0")
    if not design:
        raise PositivityError(f"{what}: no supported shadow cell")
    return ShadowSystem(
        design=np.array(design),
        rhs=np.array(rhs),
        variant=variant,
        row_labels=tuple(labels),
        source=obs2d,
        z_masked=z_masked,
        name=name,
        cell=tuple(cell),
        skipped_rows=skipped,
    )


def _masked_axis(arr: np.ndarray, axis: int, indicator_axis: int, already_masked: bool) -> np.ndarray:
    """Collapse (value, indicator) axes into one leading masked axis."""
    values = np.moveaxis(arr, (axis, indicator_axis), (0, 1))
    observed = values[:, 1]
    missing = values[:, 0].sum(axis=0)
    if already_masked:
        observed = observed[:-1]
    return np.concatenate([observed, missing[None]], axis=0)


_INDICATORS = {"M": "R_M", "Y": "R_Y", "Z": "R_Z"}


def build_shadow_system(
    obs: ObservedLaw | JointTable,
    w_var: str,
    r_w: str,
    z_var: str,
    variant: str = "plain",
    cell: Mapping[str, int] | None = None,
    r_z: str | None = None,
) -> ShadowSystem:
    """Shadow system for target ``w_var`` with indicator ``r_w`` and shadow ``z_var``.

    ``obs`` is either an observed law (masked values) or a joint table over
    substantive variables and indicators.  ``cell`` fixes other variables.
    """
    masked = isinstance(obs, ObservedLaw)
    table = obs.table if masked else obs
    if masked and r_z is None:
        r_z = _INDICATORS.get(z_var)
    if cell:
        table = restrict(table, cell)
    if r_z is not None and r_z not in table.names:
        r_z = None
    names = [w_var, r_w, z_var] + ([r_z] if r_z else [])
    arr = table.array(names)
    # Axes: W, R_W, Z[, R_Z] -> W†, Z[, R_Z]
    w_masked = _masked_axis(arr, 0, 1, masked)
    if r_z:
        z_part = _masked_axis(np.moveaxis(w_masked, 0, -1), 0, 1, masked)
        obs2d = np.moveaxis(z_part, -1, 0)
        z_has_missing = True
    else:
        obs2d = w_masked
        if masked and z_var in _INDICATORS:
            obs2d = obs2d[:, :-1]
        z_has_missing = False
    label = f"{w_var} shadowed by {z_var}"
    cell_index = tuple(int(v) for v in (cell or {}).values())
    return shadow_system_from_masked(obs2d, variant, z_masked=z_has_missing, name=label, cell=cell_index)


@dataclass(frozen=True)
class RankSummary:
    rank: int
    columns: int
    condition_number: float

    @property
    def full(self) -> bool:
        return self.rank == self.columns


def rank_summary(matrix, rank_tol: float = RANK_TOL) -> RankSummary:
    """SVD rank with a threshold relative to the largest singular value."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    columns = matrix.shape[1]
    singular = np.linalg.svd(matrix, compute_uv=False)
    if singular.size == 0 or singular[0] <= 0:
        return RankSummary(0, columns, float("inf"))
    rank = int(np.sum(singular > rank_tol * singular[0]))
    if singular.size < columns or singular[-1] <= 0:
        condition = float("inf")
    else:
        condition = float(singular[0] / singular[-1])
    return RankSummary(rank, columns, condition)


def solve_shadow(
    system: ShadowSystem,
    tol: float = SOLVE_TOL,
    rank_tol: float = RANK_TOL,
    check_feasible: bool = True,
) -> ShadowSystem:
    """Least-squares solve; returns the system with its solution attached."""
    if tol <= 0:
        raise ArgumentError("solve tolerance must be positive")
    summary = rank_summary(system.design, rank_tol)
    if not summary.full:
        error = CompletenessFailure(
            f"{system.describe()}: design rank {summary.rank} < {summary.columns} target values"
        )
        error.system = replace(system, rank=summary.rank, condition_number=summary.condition_number)
        raise error
    q, *_ = np.linalg.lstsq(system.design, system.rhs, rcond=None)
    residual = float(np.max(np.abs(system.design @ q - system.rhs)))
    solved = replace(
        system,
        solution_q=q,
        rank=summary.rank,
        condition_number=summary.condition_number,
        residual=residual,
        boundary=tuple(int(i) for i in np.flatnonzero(np.abs(q - 1.0) <= FEASIBILITY_SLACK)),
    )
    if residual > tol:
        error = ModelMisfit(f"{system.describe()}: residual {residual:.3g} exceeds {tol:g}")
        error.system = solved
        raise error
    if check_feasible and np.any(q < 1.0 - FEASIBILITY_SLACK):
        error = InfeasibleSolution(
            f"{system.describe()}: solution {q.min():.6g} < 1 implies a response probability above one"
        )
        error.system = solved
        raise error
    return solved


@dataclass(frozen=True)
class CompletenessResult:
    complete: bool
    rank: int
    condition_number: float


def completeness_check(
    cond: CondTable,
    complete_in: str,
    rank_tol: float = RANK_TOL,
    rows: tuple[str, ...] | None = None,
) -> CompletenessResult:
    """Full column rank of P(complete_in | rows, other givens) in every other-given cell.

    ``rows`` names the givens that index matrix rows (default: all givens).
    Unsupported rows are ignored.  The reported rank is the smallest and the
    condition number the largest over conditioning cells.
    """
    if cond.target_names != (complete_in,):
        raise ArgumentError(f"conditional table must have the single target {complete_in!r}")
    givens = list(cond.given_names)
    rows = list(givens if rows is None else rows)
    others = [g for g in givens if g not in rows]
    order = [givens.index(g) for g in others + rows] + [len(givens)]
    probs = np.transpose(cond.probabilities, order)
    unsupported = np.transpose(cond.unsupported, order[:-1])
    n_other = len(others)
    other_shape = probs.shape[:n_other]
    width = probs.shape[-1]
    worst_rank, worst_cond = width, 0.0
    for idx in np.ndindex(*other_shape):
        matrix = probs[idx].reshape(-1, width)
        keep = ~unsupported[idx].reshape(-1)
        if not keep.any():
            continue
        summary = rank_summary(matrix[keep], rank_tol)
        worst_rank = min(worst_rank, summary.rank)
        worst_cond = max(worst_cond, summary.condition_number)
    return CompletenessResult(worst_rank == width, worst_rank, worst_cond)


@dataclass(frozen=True)
class RedExtraResult:
    holds: bool
    deviation: float


def red_extra_deviation(obs2d, q) -> float:
    """odds(R_W=0 | R_Z=0) − E[q(W) − 1 | R_Z=0, R_W=1]; obs2d ends with the Z-missing column."""
    obs2d = np.asarray(obs2d, dtype=float)
    column = obs2d[:, -1]
    if column.sum() <= 0:
        raise PositivityError("the R_Z=0 cell has probability zero")
    responded = column[:-1].sum()
    if responded <= 0:
        raise PositivityError("P(R_W=1 | R_Z=0) is zero")
    odds = column[-1] / responded
    return float(odds - (column[:-1] / responded) @ (np.asarray(q) - 1.0))


def check_red_extra(system: ShadowSystem, tol: float = SOLVE_TOL) -> RedExtraResult:
    """Extra testable equation of a strong-completeness red solve."""
    if not system.solved:
        raise ArgumentError("check_red_extra needs a solved system")
    if not system.z_masked:
        raise AssumptionError("the shadow variable is fully observed; no R_Z=0 cell")
    deviation = red_extra_deviation(system.source, system.solution_q)
    return RedExtraResult(abs(deviation) <= tol, deviation)
