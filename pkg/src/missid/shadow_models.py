"""Shadow-variable identification for mediation: models Z1 to Z5 and external shadows.

Every model is solved cell by cell.  ``model_systems`` builds all the
discrete shadow systems a model needs, so the same systems serve
identification, completeness screening during scenario generation and
audit trails.
"""

from __future__ import annotations

import numpy as np

from .catalog import ModelId, covariate_names
from .errors import ArgumentError, AssumptionError, CompletenessFailure
from .observed import ObservedLaw, Patterns
from .separated import (
    identify_S1,
    identify_S2,
    identify_S3,
    identify_S4,
    identify_S5,
    identify_S6,
)
from .shadow import SOLVE_TOL, ShadowSystem, shadow_system_from_masked, solve_shadow
from .tilting import QFunctions, TiltingSet, assemble, tilts_from_response

__all__ = [
    "identify",
    "identify_Z1",
    "identify_Z2",
    "identify_Z3",
    "identify_Z4",
    "identify_Z5",
    "identify_ext_combined",
    "identify_ext_parallel",
    "identify_ext_sequential",
    "identify_ext_with_missing_Z",
    "model_systems",
    "solve_systems",
    "z5_inverse_response",
]

XA = ("X", "A")

# A system key is (q-name, cell index); ext sub-systems append the m or y index.
SystemKey = tuple


def _internal_systems(obs: ObservedLaw, model: ModelId) -> list[tuple[SystemKey, ShadowSystem]]:
    masked = obs.masked(XA)
    out = []
    for cell in np.ndindex(masked.shape[:2]):
        d = masked[cell]

        def add(q_name, obs2d, variant, z_masked, cell=cell):
            name = f"{q_name} {model.label}"
            system = shadow_system_from_masked(obs2d, variant, z_masked=z_masked, name=name, cell=cell)
            out.append(((q_name, cell), system))

        family = model.family
        if family == "Z1":
            add("q_1a", d, "red", True)
            add("q_2a", d[:-1, :].T, "plain", False)
        elif family == "Z2":
            if model.mode == "strong":
                add("q_1a", d, "red", True)
            else:
                add("q_1b", d, "red_dagger", True)
        elif family == "Z3":
            if model.mode == "strong":
                add("q_2a", d[:-1, :].T, "plain", False)
            else:
                add("q_2b", d.T, "red_dagger", True)
        elif family == "Z4":
            add("q_1c", d, "blue", True)
        elif family == "Z5":
            add("q_2c", d.T, "blue", True)
    return out


def _shadow_variant(obs: ObservedLaw, model: ModelId) -> str:
    if obs.shadow_missing_mass <= 0:
        return "plain"
    if model.shadow_missingness is None:
        raise AssumptionError(
            f"{model.label}: the shadow variable has missing values; declare an mSVx branch (2i or 2ii)"
        )
    if model.placement == "upstream_covariate":
        raise AssumptionError("a covariate shadow variable must be fully observed")
    return "red" if model.shadow_missingness == "2i" else "blue"


def _external_systems(obs: ObservedLaw, model: ModelId) -> list[tuple[SystemKey, ShadowSystem]]:
    if not obs.has_shadow:
        raise ArgumentError(f"{model.label} needs an observed law with a shadow variable Z")
    variant = _shadow_variant(obs, model)
    z_masked = variant != "plain"
    masked = obs.masked(("X", "A", "Z"))
    out = []
    for cell in np.ndindex(masked.shape[:2]):
        e = masked[cell]  # (Z†, M†, Y†)

        def add(q_name, sub, obs2d, cell=cell):
            obs2d = obs2d if z_masked else obs2d[:, :-1]
            index = cell + sub
            name = f"{q_name} {model.label}"
            system = shadow_system_from_masked(obs2d, variant, z_masked=z_masked, name=name, cell=index)
            out.append(((q_name, index), system))

        family = model.family
        if family == "EXT_COMBINED":
            n_z = e.shape[0]
            complete = e[:, :-1, :-1].reshape(n_z, -1)
            missing = e.sum(axis=(1, 2)) - complete.sum(axis=1)
            add("q_VW", (), np.vstack([complete.T, missing[None]]))
        elif family == "EXT_PARALLEL":
            for y in range(e.shape[2] - 1):
                add("q_M", (y,), e[:, :, y].T)
            for m in range(e.shape[1] - 1):
                add("q_Y", (m,), e[:, m, :].T)
        elif family == "EXT_SEQ_MFIRST":
            add("q_first", (), e.sum(axis=2).T)
            for m in range(e.shape[1] - 1):
                add("q_Y", (m,), e[:, m, :].T)
        else:
            add("q_first", (), e.sum(axis=1).T)
            for y in range(e.shape[2] - 1):
                add("q_M", (y,), e[:, :, y].T)
    return out


def model_systems(obs: ObservedLaw, model: ModelId) -> list[tuple[SystemKey, ShadowSystem]]:
    """All shadow systems needed to identify ``model``; empty for S-models."""
    if model.family.startswith("S"):
        return []
    if model.external:
        return _external_systems(obs, model)
    return _internal_systems(obs, model)


def solve_systems(systems, tol: float = SOLVE_TOL, check_feasible: bool = True) -> dict[SystemKey, ShadowSystem]:
    return {key: solve_shadow(system, tol, check_feasible=check_feasible) for key, system in systems}


def _gather(solved: dict, q_name: str, cov_shape: tuple[int, ...], width: int) -> np.ndarray:
    """Stack per-cell solutions of ``q_name`` into an array over cov_shape + (width,)."""
    out = np.full(cov_shape + (width,), np.nan)
    for (name, cell), system in solved.items():
        if name == q_name:
            out[cell] = system.solution_q
    return out


def _gather_sub(solved: dict, q_name: str, shape: tuple[int, ...], sub_axis: str) -> np.ndarray:
    """Per-(cell, sub-index) solutions as an array over (X, A, M, Y).

    ``sub_axis`` names the variable indexing the sub-systems ("M" or "Y").
    """
    out = np.full(shape, np.nan)
    for (name, index), system in solved.items():
        if name != q_name:
            continue
        cell, sub = index[:2], index[2]
        if sub_axis == "Y":
            out[cell + (slice(None), sub)] = system.solution_q
        else:
            out[cell + (sub, slice(None))] = system.solution_q
    return out


def _internal_patterns(obs: ObservedLaw) -> Patterns:
    return Patterns(obs.masked(XA))


def _solve_internal(obs, model, tol, check_feasible, advise_weak=False):
    systems = model_systems(obs, model)
    try:
        solved = solve_systems(systems, tol, check_feasible)
    except CompletenessFailure as exc:
        if advise_weak:
            message = f"{exc}; strong completeness fails, consider weak mode"
            error = CompletenessFailure(message)
            error.system = getattr(exc, "system", None)
            raise error from None
        raise
    return solved


def identify_Z1(obs: ObservedLaw, tol: float = SOLVE_TOL, check_feasible: bool = True) -> TiltingSet:
    model = ModelId("Z1")
    p = _internal_patterns(obs)
    solved = _solve_internal(obs, model, tol, check_feasible)
    cov = p.total.shape
    q_1a = _gather(solved, "q_1a", cov, p.m_card)
    q_2a = _gather(solved, "q_2a", cov, p.y_card)
    h = p.rm1()[..., None] * q_1a
    k = p.ry1_given_m_rm1()[..., None] * q_2a[..., None, :]
    q = QFunctions(q_1a=q_1a, q_2a=q_2a)
    return assemble(p, XA, obs.cards, model.label, h=h, k=k, q=q, systems=solved.values(), notes=("audit: T4, T5",))


def identify_Z2(
    obs: ObservedLaw, mode: str = "strong", tol: float = SOLVE_TOL, check_feasible: bool = True
) -> TiltingSet:
    model = ModelId("Z2", mode=mode)
    p = _internal_patterns(obs)
    solved = _solve_internal(obs, model, tol, check_feasible, advise_weak=mode == "strong")
    name = "q_1a" if mode == "strong" else "q_1b"
    q_m = _gather(solved, name, p.total.shape, p.m_card)
    h = p.rm1()[..., None] * q_m
    q = QFunctions(**{name: q_m})
    notes = ("audit: T4, red-extra",) if mode == "strong" else ()
    return assemble(p, XA, obs.cards, model.label, h=h, k=1.0, q=q, systems=solved.values(), notes=notes)


def identify_Z3(
    obs: ObservedLaw, mode: str = "strong", tol: float = SOLVE_TOL, check_feasible: bool = True
) -> TiltingSet:
    model = ModelId("Z3", mode=mode)
    p = _internal_patterns(obs)
    solved = _solve_internal(obs, model, tol, check_feasible, advise_weak=mode == "strong")
    name = "q_2a" if mode == "strong" else "q_2b"
    q_y = _gather(solved, name, p.total.shape, p.y_card)
    g_b_y = p.r11()[..., None] / p.rm1_given_y_ry1() * q_y
    g_b = np.broadcast_to(g_b_y[..., None, :], p.p11.shape)
    h_b = (p.y_given_m_r11() * g_b).sum(axis=-1)
    q = QFunctions(**{name: q_y})
    notes = ("audit: T5",) if mode == "strong" else ()
    return assemble(
        p,
        XA,
        obs.cards,
        model.label,
        h_b=h_b,
        k=g_b / h_b[..., None],
        g_b=g_b,
        q=q,
        systems=solved.values(),
        notes=notes,
    )


def identify_Z4(obs: ObservedLaw, tol: float = SOLVE_TOL, check_feasible: bool = True) -> TiltingSet:
    model = ModelId("Z4")
    p = _internal_patterns(obs)
    p.ry1_given_rm0()
    solved = _solve_internal(obs, model, tol, check_feasible)
    q_1c = _gather(solved, "q_1c", p.total.shape, p.m_card)
    h = p.rm1()[..., None] * q_1c
    return assemble(
        p,
        XA,
        obs.cards,
        model.label,
        h=h,
        k=1.0,
        q=QFunctions(q_1c=q_1c),
        systems=solved.values(),
        notes=("audit: T1",),
    )


def z5_inverse_response(obs: ObservedLaw) -> np.ndarray:
    """1/P(R_Y=1|X,A,M) by odds tilting, over (X, A, M)."""
    p = _internal_patterns(obs)
    ratio = p.rm1_given_ry1() / p.rm1_given_ry0()
    return 1.0 + p.odds_ry0_given_m_rm1() * ratio[..., None]


def identify_Z5(obs: ObservedLaw, tol: float = SOLVE_TOL, check_feasible: bool = True) -> TiltingSet:
    model = ModelId("Z5")
    p = _internal_patterns(obs)
    inverse_m = z5_inverse_response(obs)
    solved = _solve_internal(obs, model, tol, check_feasible)
    q_2c = _gather(solved, "q_2c", p.total.shape, p.y_card)
    h_b = p.ry1()[..., None] * inverse_m
    k = q_2c[..., None, :] / inverse_m[..., None]
    return assemble(
        p,
        XA,
        obs.cards,
        model.label,
        h_b=h_b,
        k=k,
        q=QFunctions(q_2c=q_2c),
        systems=solved.values(),
        notes=("audit: T2",),
    )


def _external_patterns(obs: ObservedLaw, model: ModelId) -> Patterns:
    if model.placement == "upstream_covariate":
        return Patterns(obs.masked(("X", "A", "Z"))[:, :, :-1])
    return Patterns(obs.masked(XA))


def _external_response(solved: dict, model: ModelId, shape: tuple[int, ...]) -> tuple[np.ndarray, dict]:
    """P(R_MY=1 | X,A,M,Y) and the q tables behind it."""
    x, a, n_m, n_y = shape
    family = model.family
    tables = {}
    if family == "EXT_COMBINED":
        q_vw = _gather(solved, "q_VW", (x, a), n_m * n_y).reshape(shape)
        tables["q_VW"] = q_vw
        response = 1.0 / q_vw
    elif family == "EXT_PARALLEL":
        tables["q_M"] = _gather_sub(solved, "q_M", shape, "Y")
        tables["q_Y"] = _gather_sub(solved, "q_Y", shape, "M")
        response = 1.0 / (tables["q_M"] * tables["q_Y"])
    elif family == "EXT_SEQ_MFIRST":
        q_first = _gather(solved, "q_first", (x, a), n_m)
        tables["q_first"] = q_first
        tables["q_Y"] = _gather_sub(solved, "q_Y", shape, "M")
        response = 1.0 / (q_first[..., :, None] * tables["q_Y"])
    else:
        q_first = _gather(solved, "q_first", (x, a), n_y)
        tables["q_first"] = q_first
        tables["q_M"] = _gather_sub(solved, "q_M", shape, "Y")
        response = 1.0 / (q_first[..., None, :] * tables["q_M"])
    return response, tables


def _identify_external(obs: ObservedLaw, model: ModelId, tol: float, check_feasible: bool) -> TiltingSet:
    systems = model_systems(obs, model)
    solved = solve_systems(systems, tol, check_feasible)
    cards = obs.cards
    shape = (cards["X"], cards["A"], cards["M"], cards["Y"])
    response, tables = _external_response(solved, model, shape)
    p = _external_patterns(obs, model)
    covariates = covariate_names(model)
    if len(covariates) == 3:
        response = np.broadcast_to(response[:, :, None], p.p11.shape)
    tilts = tilts_from_response(p, response)
    notes = ("audit: T9",) if model.family == "EXT_PARALLEL" else ()
    return assemble(
        p,
        covariates,
        cards,
        model.label,
        **tilts,
        q=QFunctions(extra=tables),
        systems=solved.values(),
        notes=notes,
    )


def _placement_model(family, placement, shadow_missingness=None) -> ModelId:
    return ModelId(family, placement, shadow_missingness=shadow_missingness)


def identify_ext_combined(
    obs: ObservedLaw, placement: str, tol: float = SOLVE_TOL, check_feasible: bool = True
) -> TiltingSet:
    return _identify_external(obs, _placement_model("EXT_COMBINED", placement), tol, check_feasible)


def identify_ext_parallel(
    obs: ObservedLaw, placement: str, tol: float = SOLVE_TOL, check_feasible: bool = True
) -> TiltingSet:
    return _identify_external(obs, _placement_model("EXT_PARALLEL", placement), tol, check_feasible)


def identify_ext_sequential(
    obs: ObservedLaw, placement: str, first: str = "M", tol: float = SOLVE_TOL, check_feasible: bool = True
) -> TiltingSet:
    if first not in ("M", "Y"):
        raise ArgumentError("first must be 'M' or 'Y'")
    family = "EXT_SEQ_MFIRST" if first == "M" else "EXT_SEQ_YFIRST"
    return _identify_external(obs, _placement_model(family, placement), tol, check_feasible)


def identify_ext_with_missing_Z(
    obs: ObservedLaw,
    family: str,
    placement: str,
    branch,
    tol: float = SOLVE_TOL,
    check_feasible: bool = True,
) -> TiltingSet:
    """External shadow identification when Z itself may be missing.

    ``branch`` is the declared mSVx branch, "2i" or "2ii"; claiming both
    (a sequence with both, or "both") is refused.
    """
    if not isinstance(branch, str):
        branches = set(branch)
        if len(branches) != 1:
            raise AssumptionError("declare exactly one mSVx branch, not both")
        branch = branches.pop()
    if branch == "both":
        raise AssumptionError("declare exactly one mSVx branch, not both")
    model = ModelId(family, placement, shadow_missingness=branch)
    return _identify_external(obs, model, tol, check_feasible)


_SELF_SEPARATED = {
    "S1": identify_S1,
    "S2": identify_S2,
    "S3": identify_S3,
    "S4": identify_S4,
    "S5": identify_S5,
    "S6": identify_S6,
}


def identify(obs: ObservedLaw, model: ModelId, tol: float = SOLVE_TOL, check_feasible: bool = True) -> TiltingSet:
    """Dispatch to the identification routine for ``model``."""
    family = model.family
    if family in _SELF_SEPARATED:
        return _SELF_SEPARATED[family](obs)
    if family == "Z1":
        return identify_Z1(obs, tol, check_feasible)
    if family == "Z2":
        return identify_Z2(obs, model.mode, tol, check_feasible)
    if family == "Z3":
        return identify_Z3(obs, model.mode, tol, check_feasible)
    if family == "Z4":
        return identify_Z4(obs, tol, check_feasible)
    if family == "Z5":
        return identify_Z5(obs, tol, check_feasible)
    return _identify_external(obs, model, tol, check_feasible)
