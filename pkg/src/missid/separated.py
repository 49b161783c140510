"""Identification under self-separated missingness (models S1 to S6).

Each model yields closed-form tilting functions built from observed
response probabilities; no equation solving is involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, PositivityError
from .observed import ObservedLaw, Patterns
from .probability import JointTable
from .tilting import TiltingSet, assemble

__all__ = [
    "OddsTilt",
    "identify_S1",
    "identify_S2",
    "identify_S3",
    "identify_S4",
    "identify_S5",
    "identify_S6",
    "odds_tilt_density_ratio",
    "odds_tilt_response_ratio",
    "pattern_odds_identity",
    "s2_factorization",
    "s5_density_ratio_g",
]

XA = ("X", "A")


def _patterns(obs: ObservedLaw) -> Patterns:
    return Patterns(obs.masked(XA))


def _cards(obs: ObservedLaw) -> dict:
    return obs.cards


def _check_base_positivity(p: Patterns) -> None:
    p.rm1()
    p.ry1_given_m_rm1()
    p.m_given_r11()


def identify_S1(obs: ObservedLaw) -> TiltingSet:
    """Available-case identification: h = k = 1."""
    p = _patterns(obs)
    _check_base_positivity(p)
    ones_m = np.ones(p.cc_m.shape)
    ones_my = np.ones(p.p11.shape)
    return assemble(p, XA, _cards(obs), "S1", h=ones_m, k=ones_my)


def identify_S2(obs: ObservedLaw) -> TiltingSet:
    p = _patterns(obs)
    _check_base_positivity(p)
    g_b = p.rm1_given_ry1()[..., None] / p.rm1_given_y_ry1()
    g_b = np.broadcast_to(g_b[..., None, :], p.p11.shape)
    h_b = (p.y_given_m_r11() * g_b).sum(axis=-1)
    k = g_b / h_b[..., None]
    return assemble(p, XA, _cards(obs), "S2", h_b=h_b, k=k, g_b=g_b)


def s2_factorization(obs: ObservedLaw) -> tuple[np.ndarray, np.ndarray]:
    """P(M|X,A) and P(Y|X,A,M) rebuilt from P(Y|X,A,R_Y=1)·P(M|X,A,Y,R_MY=1)."""
    p = _patterns(obs)
    joint = p.y_given_ry1()[..., None, :] * p.m_given_y_r11()
    m_density = joint.sum(axis=-1)
    return m_density, joint / m_density[..., None]


def identify_S3(obs: ObservedLaw) -> TiltingSet:
    """Jointly MAR: same recovery as S1; falsifiable through T1 and T2."""
    result = identify_S1(obs)
    return TiltingSet(**{**result.__dict__, "model": "S3", "notes": ("audit: T1, T2",)})


def identify_S4(obs: ObservedLaw) -> TiltingSet:
    p = _patterns(obs)
    _check_base_positivity(p)
    g = p.rm1()[..., None] / p.rm1_given_y_ry1()
    g = np.broadcast_to(g[..., None, :], p.p11.shape)
    h = (p.y_given_m_r11() * g).sum(axis=-1)
    return assemble(p, XA, _cards(obs), "S4", h=h, k=g / h[..., None], g=g)


def _s5_positivity(p: Patterns) -> np.ndarray:
    try:
        return p.ry1_given_rm0()
    except PositivityError as exc:
        raise PositivityError(f"assumption S5-3 fails: {exc}") from None


def _s5_g_risk_ratio(p: Patterns) -> np.ndarray:
    ratio = p.ry1_given_rm1() / _s5_positivity(p)
    bracket = 1.0 + p.odds_rm0_given_y_ry1() * ratio[..., None]
    return p.rm1()[..., None] * bracket


def s5_density_ratio_g(obs: ObservedLaw) -> np.ndarray:
    """S5 product function via the density-ratio odds tilt (axes X, A, Y).

    odds(R_M=0|X,A,Y) = odds(R_M=0|X,A) · P(Y|X,A,R_M=0,R_Y=1) / P(Y|X,A,R_M=1,R_Y=1)
    """
    p = _patterns(obs)
    _s5_positivity(p)
    odds = p.odds_rm0()[..., None] * p.y_given_rm0_ry1() / p.y_given_rm1_ry1()
    return p.rm1()[..., None] * (1.0 + odds)


def identify_S5(obs: ObservedLaw, route: str = "risk_ratio") -> TiltingSet:
    p = _patterns(obs)
    _check_base_positivity(p)
    if route == "risk_ratio":
        g_y = _s5_g_risk_ratio(p)
    elif route == "density_ratio":
        g_y = s5_density_ratio_g(obs)
    else:
        raise ArgumentError(f"unknown S5 route {route!r}")
    g = np.broadcast_to(g_y[..., None, :], p.p11.shape)
    h = (p.y_given_m_r11() * g).sum(axis=-1)
    return assemble(p, XA, _cards(obs), "S5", h=h, k=g / h[..., None], g=g)


def identify_S6(obs: ObservedLaw) -> TiltingSet:
    p = _patterns(obs)
    _check_base_positivity(p)
    try:
        rm1_ry0 = p.rm1_given_ry0()
    except PositivityError as exc:
        raise PositivityError(f"assumption S6-3 fails: {exc}") from None
    ry1 = p.ry1_given_m_rm1()
    h = p.rm1()[..., None] * (ry1 / p.rm1_given_ry1()[..., None] + (1.0 - ry1) / rm1_ry0[..., None])
    return assemble(p, XA, _cards(obs), "S6", h=h, k=np.ones(p.p11.shape))


@dataclass(frozen=True)
class OddsTilt:
    """A tilting ratio with the odds ratio it must equal."""

    ratio: np.ndarray
    odds_ratio: np.ndarray

    @property
    def identity_gap(self) -> float:
        return float(np.max(np.abs(self.ratio - self.odds_ratio)))


def _names(value) -> list[str]:
    return [value] if isinstance(value, str) else list(value)


def _binary(table: JointTable, name: str) -> None:
    if table.spec(name).cardinality != 2:
        raise ArgumentError(f"{name} must be binary")


def _safe(num, den, what):
    if np.any(den <= 0):
        raise PositivityError(f"{what} has a zero denominator")
    return num / den


def odds_tilt_response_ratio(table: JointTable, target_indicator: str, w_vars, v_vars, w_indicator: str) -> OddsTilt:
    """P(R^W=1|W,V,R=1) / P(R^W=1|W,V,R=0) against odds(R=0|W,V) / odds(R=0|W,V,R^W=1).

    Axes of the result: W variables then V variables.
    """
    w_vars, v_vars = _names(w_vars), _names(v_vars)
    _binary(table, target_indicator)
    _binary(table, w_indicator)
    joint = table.array(w_vars + v_vars + [target_indicator, w_indicator])
    # joint[..., r, rw]
    rw1_given_r1 = _safe(joint[..., 1, 1], joint[..., 1, :].sum(-1), "P(R^W|W,V,R=1)")
    rw1_given_r0 = _safe(joint[..., 0, 1], joint[..., 0, :].sum(-1), "P(R^W|W,V,R=0)")
    ratio = _safe(rw1_given_r1, rw1_given_r0, "response ratio")
    odds = _safe(joint[..., 0, :].sum(-1), joint[..., 1, :].sum(-1), "odds(R=0|W,V)")
    odds_rw1 = _safe(joint[..., 0, 1], joint[..., 1, 1], "odds(R=0|W,V,R^W=1)")
    return OddsTilt(ratio, odds / odds_rw1)


def odds_tilt_density_ratio(table: JointTable, target_indicator: str, w_vars, v_vars) -> OddsTilt:
    """P(W|V,R=0) / P(W|V,R=1) against odds(R=0|W,V) / odds(R=0|V)."""
    w_vars, v_vars = _names(w_vars), _names(v_vars)
    _binary(table, target_indicator)
    joint = table.array(w_vars + v_vars + [target_indicator])
    w_axes = tuple(range(len(w_vars)))
    marg_v = joint.sum(axis=w_axes, keepdims=True)
    w_given_r0 = _safe(joint[..., 0], marg_v[..., 0], "P(W|V,R=0)")
    w_given_r1 = _safe(joint[..., 1], marg_v[..., 1], "P(W|V,R=1)")
    ratio = _safe(w_given_r0, w_given_r1, "density ratio")
    odds_wv = _safe(joint[..., 0], joint[..., 1], "odds(R=0|W,V)")
    odds_v = _safe(marg_v[..., 0], marg_v[..., 1], "odds(R=0|V)")
    return OddsTilt(ratio, odds_wv / odds_v)


def pattern_odds_identity(table: JointTable) -> float:
    """Largest gap in the response-pattern identity over all (r, s).

    For every pattern, P(r,s|X,A)/P(1,1|X,A) must equal the complete-case
    mean of P(r,s|X,A,M,Y)/P(1,1|X,A,M,Y).
    """
    joint = table.array(["X", "A", "M", "Y", "R_M", "R_Y"])
    cell = joint.sum(axis=(-2, -1), keepdims=True)
    pattern_given_all = _safe(joint, cell, "P(R_M,R_Y|X,A,M,Y)")
    complete = pattern_given_all[..., 1, 1]
    cc_mass = joint[..., 1, 1]
    cc_weights = _safe(cc_mass, cc_mass.sum(axis=(2, 3), keepdims=True), "P(M,Y|X,A,R_MY=1)")
    xa = joint.sum(axis=(2, 3))
    gap = 0.0
    for r in (0, 1):
        for s in (0, 1):
            lhs = _safe(xa[..., r, s], xa[..., 1, 1], "P(1,1|X,A)")
            rhs = (cc_weights * pattern_given_all[..., r, s] / complete).sum(axis=(2, 3))
            gap = max(gap, float(np.max(np.abs(lhs - rhs))))
    return gap
