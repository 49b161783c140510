"""Mediation parameters μ(a,a′), μ(a,m) and μ(a) from identified densities."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, CoverageError
from .observed import ObservedLaw
from .probability import CondTable, JointTable, condition

__all__ = ["EstimandSet", "compute_estimands", "covariate_law", "estimands_from_full_law"]

TOTAL_EXPECTATION_TOL = 1e-10


@dataclass(frozen=True)
class EstimandSet:
    """``mu_crossed[a, a2]`` = μ(a, a′=a2); ``mu_controlled[a, m]``; ``mu_marginal[a]``."""

    mu_crossed: np.ndarray
    mu_controlled: np.ndarray
    mu_marginal: np.ndarray
    outcome_values: np.ndarray
    total_expectation_gap: float

    def contrast(self, a: int = 1, a_ref: int = 0, a_mediator: int = 0) -> float:
        """μ(a, a_mediator) − μ(a_ref, a_mediator), an interventional direct effect."""
        return float(self.mu_crossed[a, a_mediator] - self.mu_crossed[a_ref, a_mediator])

    def to_json(self) -> dict:
        return {
            "mu_crossed": self.mu_crossed.tolist(),
            "mu_controlled": self.mu_controlled.tolist(),
            "mu_marginal": self.mu_marginal.tolist(),
            "outcome_values": self.outcome_values.tolist(),
            "total_expectation_gap": self.total_expectation_gap,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def covariate_law(obs: ObservedLaw, names) -> JointTable:
    """P(covariates) from an observed law; a shadow covariate must be fully observed."""
    names = list(names)
    if "Z" in names and obs.shadow_missing_mass > 0:
        raise CoverageError("the shadow covariate has missing values")
    array = obs.table.array(names)
    if "Z" in names:
        array = np.take(array, range(obs.cards["Z"]), axis=names.index("Z"))
    return JointTable.from_array(names, array)


def _move_a_first(array: np.ndarray, names: list[str]) -> np.ndarray:
    return np.moveaxis(array, names.index("A"), 0)


def compute_estimands(
    p_x: JointTable, identified_M: CondTable, identified_Y: CondTable, outcome_values=None
) -> EstimandSet:
    """Nested finite sums over the identified densities.

    ``identified_M`` is P(M | covariates) and ``identified_Y`` is
    P(Y | covariates, M); the covariates must include A.  ``p_x`` is the
    law of the remaining covariates, e.g. P(X) or P(X, Z).
    """
    covariates = list(identified_M.given_names)
    if "A" not in covariates:
        raise ArgumentError("the identified densities must condition on A")
    if list(identified_Y.given_names) != covariates + ["M"]:
        raise ArgumentError("P(Y|...) must condition on the covariates of P(M|...) and then M")
    others = [n for n in covariates if n != "A"]
    if sorted(p_x.names) != sorted(others):
        raise ArgumentError(f"p_x must be a law over {others}, got {list(p_x.names)}")
    n_y = identified_Y.targets[0].cardinality
    values = np.arange(n_y, dtype=float) if outcome_values is None else np.asarray(outcome_values, dtype=float)
    if values.shape != (n_y,) or not np.all(np.isfinite(values)):
        raise ArgumentError(f"outcome_values must be {n_y} finite scores")

    weights = p_x.array(others) if others else np.array(1.0)
    n_a = identified_M.probabilities.shape[covariates.index("A")]
    needed_cov = np.broadcast_to(np.expand_dims(weights > 0, covariates.index("A")), identified_M.unsupported.shape)
    if np.any(identified_M.unsupported & needed_cov):
        raise CoverageError("P(M|covariates) is unsupported on a cell with positive covariate mass")
    p_m = identified_M.probabilities
    needed_y = needed_cov[..., None] & (p_m > 0)
    if np.any(identified_Y.unsupported & needed_y):
        raise CoverageError("P(Y|covariates,M) is unsupported on a needed cell")

    e_y = identified_Y.probabilities @ values  # (cov..., M)
    p_m_a = _move_a_first(p_m, covariates)  # (A, others..., M)
    e_y_a = _move_a_first(e_y, covariates)
    w = weights[..., None]
    # μ(a, a′) = Σ_x P(x) Σ_m P(m|x,a′) E[Y|x,a,m]
    crossed = np.empty((n_a, n_a))
    for a in range(n_a):
        for a2 in range(n_a):
            crossed[a, a2] = float((w * p_m_a[a2] * e_y_a[a]).sum())
    controlled = np.array([(w * e_y_a[a]).sum(axis=tuple(range(len(others)))) for a in range(n_a)])
    # Direct route: E{E[Y|X,A=a]} from the joint P(M,Y|x,a).
    joint_my = p_m[..., None] * identified_Y.probabilities
    e_y_direct = _move_a_first((joint_my * values).sum(axis=(-2, -1)), covariates)
    marginal = np.array([float((weights * e_y_direct[a]).sum()) for a in range(n_a)])
    gap = float(np.max(np.abs(np.diag(crossed) - marginal)))
    return EstimandSet(crossed, controlled, marginal, values, gap)


def estimands_from_full_law(full_law: JointTable, covariates, outcome_values=None) -> EstimandSet:
    """The same parameters computed from the full-data law."""
    covariates = list(covariates)
    others = [n for n in covariates if n != "A"]
    p_x = JointTable.from_array(others, full_law.array(others)) if others else JointTable.from_array([], np.array(1.0))
    return compute_estimands(
        p_x,
        condition(full_law, "M", covariates),
        condition(full_law, "Y", covariates + ["M"]),
        outcome_values,
    )
