"""Named missingness models: identifiers, assumption lists and canonical graphs."""

from __future__ import annotations

import re
import warnings
from collections.abc import Iterable
from dataclasses import dataclass, field

from .errors import ArgumentError, AssumptionError
from .graph import ORDERS, Dag, d_separated, order_rank

__all__ = [
    "EXTERNAL",
    "PLACEMENTS",
    "SELF_SEPARATED",
    "SHADOW_INTERNAL",
    "AssumptionSet",
    "CIStatement",
    "CompletenessStatement",
    "ModelId",
    "PositivityStatement",
    "SatisfiesResult",
    "acceptance_models",
    "applicable_models",
    "catalog_assumptions",
    "catalog_dag",
    "covariate_names",
    "dag_satisfies",
    "order_allows",
]

SELF_SEPARATED = ("S1", "S2", "S3", "S4", "S5", "S6")
SHADOW_INTERNAL = ("Z1", "Z2", "Z3", "Z4", "Z5")
EXTERNAL = ("EXT_COMBINED", "EXT_PARALLEL", "EXT_SEQ_MFIRST", "EXT_SEQ_YFIRST")
PLACEMENTS = ("downstream", "midstream", "upstream_covariate", "upstream_auxiliary")
MODES = ("strong", "weak")
SHADOW_MISSINGNESS = ("2i", "2ii")

_EXT_NUMBER = {"EXT_COMBINED": 1, "EXT_PARALLEL": 2, "EXT_SEQ_MFIRST": 3, "EXT_SEQ_YFIRST": 4}
_PLACEMENT_LETTER = {"downstream": "D", "midstream": "M", "upstream_covariate": "U", "upstream_auxiliary": "U'"}


@dataclass(frozen=True)
class ModelId:
    family: str
    placement: str | None = None
    mode: str | None = None
    shadow_missingness: str | None = None

    def __post_init__(self):
        families = SELF_SEPARATED + SHADOW_INTERNAL + EXTERNAL
        if self.family not in families:
            raise ArgumentError(f"unknown model family {self.family!r}")
        external = self.family in EXTERNAL
        if external and self.placement not in PLACEMENTS:
            raise ArgumentError(f"{self.family} needs a placement from {PLACEMENTS}")
        if not external and self.placement is not None:
            raise ArgumentError(f"{self.family} takes no shadow-variable placement")
        if self.family in ("Z2", "Z3"):
            if self.mode is None:
                object.__setattr__(self, "mode", "strong")
            if self.mode not in MODES:
                raise ArgumentError(f"completeness mode must be one of {MODES}")
        elif self.mode is not None:
            raise ArgumentError(f"{self.family} takes no completeness mode")
        if self.shadow_missingness is not None:
            if not external:
                raise ArgumentError("shadow missingness applies to external shadow models only")
            if self.shadow_missingness not in SHADOW_MISSINGNESS:
                raise AssumptionError(f"declare exactly one shadow-missingness branch from {SHADOW_MISSINGNESS}")
        if self.placement == "upstream_auxiliary" and self.family not in ("EXT_SEQ_MFIRST", "EXT_SEQ_YFIRST"):
            raise AssumptionError("an auxiliary upstream shadow variable is catalogued only for sequential models")

    @property
    def external(self) -> bool:
        return self.family in EXTERNAL

    @property
    def label(self) -> str:
        if self.external:
            text = f"{_PLACEMENT_LETTER[self.placement]}{_EXT_NUMBER[self.family]}"
            if self.placement == "upstream_auxiliary":
                text = f"U{_EXT_NUMBER[self.family]}'"
            if self.shadow_missingness:
                text += f"+{self.shadow_missingness}"
            return text
        if self.mode:
            return f"{self.family}-{self.mode}"
        return self.family

    def __str__(self):
        return self.label

    @classmethod
    def parse(cls, text: str) -> ModelId:
        """Parse labels such as ``S4``, ``Z2-weak``, ``D1``, ``U4'`` or ``M2+2ii``."""
        raw = text.strip()
        missing = None
        if "+" in raw:
            raw, missing = raw.split("+", 1)
        raw = raw.replace("′", "'")
        if raw.upper() in SELF_SEPARATED + SHADOW_INTERNAL:
            return cls(raw.upper(), shadow_missingness=missing)
        match = re.fullmatch(r"(Z[23])[-:(\[]?(strong|weak)[)\]]?", raw, flags=re.IGNORECASE)
        if match:
            return cls(match.group(1).upper(), mode=match.group(2).lower())
        match = re.fullmatch(r"([DMU])([1-4])(')?", raw, flags=re.IGNORECASE)
        if match:
            letter, number, prime = match.group(1).upper(), int(match.group(2)), match.group(3)
            family = {v: k for k, v in _EXT_NUMBER.items()}[number]
            placement = {"D": "downstream", "M": "midstream", "U": "upstream_covariate"}[letter]
            if prime:
                if letter != "U":
                    raise ArgumentError(f"primed labels exist only for the upstream family: {text!r}")
                placement = "upstream_auxiliary"
            return cls(family, placement, shadow_missingness=missing)
        if raw.upper() in EXTERNAL:
            raise ArgumentError(f"{raw} needs a placement; use a label such as D1 or U3'")
        raise ArgumentError(f"unrecognised model label {text!r}")


@dataclass(frozen=True)
class CIStatement:
    label: str
    a: tuple[str, ...]
    b: tuple[str, ...]
    c: tuple[str, ...]
    event: tuple[tuple[str, int], ...] = ()

    @property
    def text(self) -> str:
        def group(vars_):
            return vars_[0] if len(vars_) == 1 else "(" + ",".join(vars_) + ")"

        cond = list(self.c) + [f"{k}={v}" for k, v in self.event]
        return f"{group(self.a)} ⫫ {group(self.b)} | {','.join(cond)}"


@dataclass(frozen=True)
class PositivityStatement:
    """P(variable=value | givens, event) > 0 on every supported cell."""

    label: str
    variable: str
    value: int
    givens: tuple[str, ...]
    event: tuple[tuple[str, int], ...] = ()

    @property
    def text(self) -> str:
        cond = list(self.givens) + [f"{k}={v}" for k, v in self.event]
        return f"P({self.variable}={self.value} | {','.join(cond)}) > 0"


@dataclass(frozen=True)
class CompletenessStatement:
    """P(target, shadow | givens, event) is complete in ``shadow``."""

    label: str
    target: tuple[str, ...]
    shadow: tuple[str, ...]
    givens: tuple[str, ...]
    event: tuple[tuple[str, int], ...] = ()

    @property
    def text(self) -> str:
        cond = list(self.givens) + [f"{k}={v}" for k, v in self.event]
        joint = ",".join(self.target + self.shadow)
        return f"P({joint} | {','.join(cond)}) complete in {','.join(self.shadow)}"


@dataclass(frozen=True)
class AssumptionSet:
    model: ModelId
    ci_statements: tuple[CIStatement, ...]
    positivity_statements: tuple[PositivityStatement, ...]
    completeness_statements: tuple[CompletenessStatement, ...]
    weaker_versions: tuple[CIStatement, ...] = ()
    equivalent_statements: tuple[tuple[CIStatement, ...], ...] = ()

    @property
    def variables(self) -> set[str]:
        names = set()
        for s in self.ci_statements + self.weaker_versions:
            names |= set(s.a) | set(s.b) | set(s.c) | {k for k, _ in s.event}
        for p in self.positivity_statements:
            names |= {p.variable} | set(p.givens) | {k for k, _ in p.event}
        for c in self.completeness_statements:
            names |= set(c.target) | set(c.shadow) | set(c.givens) | {k for k, _ in c.event}
        return names


def _ci(label, a, b, c, event=()):
    as_tuple = lambda v: (v,) if isinstance(v, str) else tuple(v)
    return CIStatement(label, as_tuple(a), as_tuple(b), as_tuple(c), tuple(event))


XA = ("X", "A")
R11 = (("R_M", 1), ("R_Y", 1))

_RESPONSE_POSITIVITY = (
    PositivityStatement("R_M positivity", "R_M", 1, ("X", "A", "M")),
    PositivityStatement("R_Y positivity", "R_Y", 1, ("X", "A", "M", "Y"), (("R_M", 1),)),
)


def covariate_names(model: ModelId) -> tuple[str, ...]:
    """Variables the identified densities condition on besides M."""
    if model.external and model.placement == "upstream_covariate":
        return ("X", "A", "Z")
    return XA


def _self_separated(model: ModelId) -> AssumptionSet:
    f = model.family
    positivity = list(_RESPONSE_POSITIVITY)
    weaker, equivalent = [], []
    if f == "S1":
        ci = [_ci("S1-1", "R_M", ("M", "Y"), XA), _ci("S1-2", ("R_M", "R_Y"), "Y", XA + ("M",))]
        weaker = [_ci("S1-2w", "R_Y", "Y", XA + ("M",), (("R_M", 1),))]
        equivalent = [
            (_ci("S1-1", "R_M", ("M", "Y"), XA), _ci("S1-2", "R_Y", "Y", XA + ("M", "R_M"))),
            (_ci("S1-1b", "R_M", "M", XA), _ci("S1-2b", ("R_M", "R_Y"), "Y", XA + ("M",))),
        ]
    elif f == "S2":
        ci = [_ci("S2-1", "R_Y", ("M", "Y"), XA), _ci("S2-2", ("R_M", "R_Y"), "M", XA + ("Y",))]
        weaker = [_ci("S2-2w", "R_M", "M", XA + ("Y",), (("R_Y", 1),))]
        equivalent = [
            (_ci("S2-1", "R_Y", ("M", "Y"), XA), _ci("S2-2", "R_M", "M", XA + ("Y", "R_Y"))),
            (_ci("S2-1b", "R_Y", "Y", XA), _ci("S2-2b", ("R_M", "R_Y"), "M", XA + ("Y",))),
        ]
    elif f == "S3":
        ci = [_ci("S3", ("R_M", "R_Y"), ("M", "Y"), XA)]
    elif f == "S4":
        ci = [_ci("S4-1", "R_M", ("M", "R_Y"), XA + ("Y",)), _ci("S4-2", "R_Y", ("Y", "R_M"), XA + ("M",))]
    elif f == "S5":
        ci = [_ci("S5-1", ("R_M", "R_Y"), "M", XA + ("Y",)), _ci("S5-2", "R_Y", ("M", "Y"), XA + ("R_M",))]
        positivity.append(PositivityStatement("S5-3", "R_Y", 1, XA, (("R_M", 0),)))
    else:
        ci = [_ci("S6-1", ("R_M", "R_Y"), "Y", XA + ("M",)), _ci("S6-2", "R_M", ("M", "Y"), XA + ("R_Y",))]
        positivity.append(PositivityStatement("S6-3", "R_M", 1, XA, (("R_Y", 0),)))
    return AssumptionSet(model, tuple(ci), tuple(positivity), (), tuple(weaker), tuple(equivalent))


def _shadow_internal(model: ModelId) -> AssumptionSet:
    f = model.family
    positivity = list(_RESPONSE_POSITIVITY)
    complete = []
    if f == "Z1":
        ci = [_ci("Z1-1", "R_M", ("Y", "R_Y"), XA + ("M",)), _ci("Z1-2", "R_Y", ("M", "R_M"), XA + ("Y",))]
        complete = [
            CompletenessStatement("Z1-3 (in M)", ("Y",), ("M",), XA, R11),
            CompletenessStatement("Z1-3 (in Y)", ("M",), ("Y",), XA, R11),
        ]
    elif f == "Z2":
        ci = [_ci("Z2-1", "R_M", ("R_Y", "Y"), XA + ("M",)), _ci("Z2-1", "R_Y", "Y", XA + ("M",))]
        if model.mode == "strong":
            complete = [CompletenessStatement("Z2-2i", ("M",), ("Y",), XA, R11)]
        else:
            complete = [CompletenessStatement("Z2-2ii", ("M",), ("Y†",), XA, (("R_M", 1),))]
    elif f == "Z3":
        ci = [_ci("Z3-1", "R_Y", ("R_M", "M"), XA + ("Y",)), _ci("Z3-1", "R_M", "M", XA + ("Y",))]
        if model.mode == "strong":
            complete = [CompletenessStatement("Z3-2i", ("Y",), ("M",), XA, R11)]
        else:
            complete = [CompletenessStatement("Z3-2ii", ("Y",), ("M†",), XA, (("R_Y", 1),))]
    elif f == "Z4":
        ci = [_ci("Z4-1", ("R_M", "R_Y"), "Y", XA + ("M",)), _ci("Z4-2", "R_Y", "M", XA + ("R_M",))]
        positivity.append(PositivityStatement("Z4-3", "R_Y", 1, XA, (("R_M", 0),)))
        complete = [CompletenessStatement("Z4-4", ("M",), ("Y",), XA, R11)]
    else:
        ci = [_ci("Z5-1", ("R_M", "R_Y"), "M", XA + ("Y",)), _ci("Z5-2", "R_M", "Y", XA + ("R_Y",))]
        positivity.append(PositivityStatement("Z5-3", "R_M", 1, XA, (("R_Y", 0),)))
        complete = [CompletenessStatement("Z5-4", ("Y",), ("M",), XA, R11)]
    return AssumptionSet(model, tuple(ci), tuple(positivity), tuple(complete))


def _external(model: ModelId) -> AssumptionSet:
    number = _EXT_NUMBER[model.family]
    placement = model.placement
    if placement in ("downstream", "midstream"):
        prefix, cond, core = f"DM{number}", XA, XA
    elif placement == "upstream_covariate":
        prefix, cond, core = f"U{number}", XA, ("X", "A", "Z")
    else:
        prefix, cond, core = f"U{number}'", XA, XA

    def sv(label):
        return _ci(f"{prefix}-{label}", "Z", ("R_M", "R_Y"), cond + ("M", "Y"))

    positivity = list(_RESPONSE_POSITIVITY)
    if number == 1:
        ci = [sv(1)]
        complete = [CompletenessStatement(f"{prefix}-2", ("M", "Y"), ("Z",), cond, R11)]
    elif number == 2:
        ci = [_ci(f"{prefix}-1", "R_M", "R_Y", core + ("M", "Y")), sv(2)]
        complete = [
            CompletenessStatement(f"{prefix}-3", ("M",), ("Z",), cond + ("Y",), R11),
            CompletenessStatement(f"{prefix}-4", ("Y",), ("Z",), cond + ("M",), R11),
        ]
    elif number == 3:
        ci = [_ci(f"{prefix}-1", "R_M", "Y", core + ("M",)), sv(2)]
        complete = [
            CompletenessStatement(f"{prefix}-3", ("M",), ("Z",), cond, (("R_M", 1),)),
            CompletenessStatement(f"{prefix}-4", ("Y",), ("Z",), cond + ("M",), R11),
        ]
        if placement == "upstream_auxiliary":
            ci.append(_ci("U3'-5", "Z", "M", XA))
    else:
        ci = [_ci(f"{prefix}-1", "R_Y", "M", core + ("Y",)), sv(2)]
        complete = [
            CompletenessStatement(f"{prefix}-3", ("Y",), ("Z",), cond, (("R_Y", 1),)),
            CompletenessStatement(f"{prefix}-4", ("M",), ("Z",), cond + ("Y",), R11),
        ]
        if placement == "upstream_auxiliary":
            ci.append(_ci("U4'-5", "Z", "Y", XA + ("M",)))
    if model.shadow_missingness == "2i":
        ci.append(_ci("mSVx-2i", "R_Z", ("R_M", "R_Y"), XA + ("M", "Y", "Z")))
    elif model.shadow_missingness == "2ii":
        ci.append(_ci("mSVx-2ii", "R_Z", ("M", "Y", "Z"), XA + ("R_M", "R_Y")))
    if model.shadow_missingness:
        positivity.append(PositivityStatement("mSVx-1", "R_Z", 1, XA + ("M", "Y", "Z"), R11))
    return AssumptionSet(model, tuple(ci), tuple(positivity), tuple(complete))


def catalog_assumptions(model: ModelId) -> AssumptionSet:
    if model.family in SELF_SEPARATED:
        return _self_separated(model)
    if model.family in SHADOW_INTERNAL:
        return _shadow_internal(model)
    return _external(model)


_SETTINGS = {
    "S1": ("in_time", "delayed", "unordered"),
    "S2": ("unordered", "reverse"),
    "S3": ORDERS,
    "S4": ("delayed", "unordered", "reverse"),
    "S5": ("delayed",),
    "S6": ("reverse",),
    "Z1": ORDERS,
    "Z2": ORDERS,
    "Z3": ("unordered", "reverse"),
    "Z4": ("in_time", "delayed"),
    "Z5": ("reverse",),
}


def order_allows(model: ModelId, order: str) -> bool:
    order_rank(order)
    if model.external:
        return True
    return order in _SETTINGS[model.family]


def default_order(model: ModelId) -> str:
    if model.external:
        return "delayed"
    return _SETTINGS[model.family][0]


# Canonical graphs.  Every node set contains X, A, M, Y and the two response
# indicators; covariates point into everything that is generated after them.
_BASE_EDGES = [
    ("X", "A"),
    ("X", "M"),
    ("A", "M"),
    ("X", "Y"),
    ("A", "Y"),
    ("M", "Y"),
    ("X", "R_M"),
    ("A", "R_M"),
    ("X", "R_Y"),
    ("A", "R_Y"),
]

_CORE_EDGES = {
    "S1": [("M", "R_Y"), ("U_M", "M"), ("U_M", "R_Y"), ("U_R", "R_M"), ("U_R", "R_Y"), ("R_M", "R_Y")],
    "S2": [("Y", "R_M"), ("U_R", "R_M"), ("U_R", "R_Y"), ("R_Y", "R_M")],
    "S3": [("U_R", "R_M"), ("U_R", "R_Y"), ("R_M", "R_Y"), ("R_Y", "R_M")],
    "S4": [("Y", "R_M"), ("M", "R_Y")],
    "S5": [("Y", "R_M"), ("R_M", "R_Y")],
    "S6": [("M", "R_Y"), ("R_Y", "R_M"), ("U_M", "M"), ("U_M", "R_Y")],
    "Z1": [("M", "R_M"), ("Y", "R_Y"), ("U_M", "M"), ("U_M", "R_M")],
    "Z2": [("M", "R_M"), ("M", "R_Y"), ("U_M", "M"), ("U_M", "R_M")],
    "Z3": [("Y", "R_M"), ("Y", "R_Y")],
    "Z4": [("M", "R_M"), ("R_M", "R_Y"), ("U_M", "M"), ("U_M", "R_M")],
    "Z5": [("Y", "R_Y"), ("R_Y", "R_M")],
    "EXT_COMBINED": [
        ("M", "R_M"),
        ("M", "R_Y"),
        ("Y", "R_M"),
        ("Y", "R_Y"),
        ("R_M", "R_Y"),
        ("R_Y", "R_M"),
        ("U_R", "R_M"),
        ("U_R", "R_Y"),
        ("U_M", "M"),
        ("U_M", "R_M"),
        ("U_M", "R_Y"),
        ("U_Y", "Y"),
        ("U_Y", "R_M"),
        ("U_Y", "R_Y"),
    ],
    "EXT_PARALLEL": [
        ("M", "R_M"),
        ("M", "R_Y"),
        ("Y", "R_M"),
        ("Y", "R_Y"),
        ("U_M", "M"),
        ("U_M", "R_M"),
        ("U_Y", "Y"),
        ("U_Y", "R_Y"),
    ],
    "EXT_SEQ_MFIRST": [
        ("M", "R_M"),
        ("M", "R_Y"),
        ("Y", "R_Y"),
        ("R_M", "R_Y"),
        ("U_R", "R_M"),
        ("U_R", "R_Y"),
        ("U_M", "M"),
        ("U_M", "R_M"),
        ("U_M", "R_Y"),
        ("U_Y", "Y"),
        ("U_Y", "R_Y"),
    ],
    "EXT_SEQ_YFIRST": [
        ("Y", "R_Y"),
        ("Y", "R_M"),
        ("M", "R_M"),
        ("R_Y", "R_M"),
        ("U_R", "R_M"),
        ("U_R", "R_Y"),
        ("U_M", "M"),
        ("U_M", "R_M"),
    ],
}

_SHADOW_EDGES = {
    "downstream": [("M", "Z"), ("Y", "Z"), ("X", "Z"), ("A", "Z")],
    "midstream": [("M", "Z"), ("Z", "Y"), ("X", "Z"), ("A", "Z")],
    "upstream_covariate": [("X", "Z"), ("Z", "A"), ("Z", "M"), ("Z", "Y")],
}


def _order_ok(edge, ranks) -> bool:
    parent, child = edge
    if parent in ranks and child in ranks:
        return ranks[parent] < ranks[child]
    return True


def catalog_dag(model: ModelId, order: str | None = None, null_m_to_z: bool = False) -> Dag:
    """Canonical graph satisfying every CI statement of ``model`` in ``order``.

    Edges the temporal order forbids are dropped.  For placements that rule
    out arrows into M or Y from the core missingness model, the matching
    latent causes are removed.
    """
    order = order or default_order(model)
    if not order_allows(model, order):
        raise AssumptionError(f"{model.label} is not catalogued for the {order} setting")
    ranks = order_rank(order)
    core = [e for e in _CORE_EDGES[model.family] if _order_ok(e, ranks)]
    edges = list(_BASE_EDGES)
    if model.external:
        placement = model.placement
        if placement == "midstream":
            core = [e for e in core if e[0] != "U_Y"]
        elif placement in ("upstream_covariate", "upstream_auxiliary"):
            core = [e for e in core if e[0] not in ("U_Y", "U_M")]
        if placement == "upstream_auxiliary":
            shadow = [("X", "Z"), ("A", "Z")]
            shadow.append(("Z", "Y") if model.family == "EXT_SEQ_MFIRST" else ("Z", "M"))
        else:
            shadow = list(_SHADOW_EDGES[placement])
        if null_m_to_z:
            shadow = [e for e in shadow if e != ("M", "Z")]
        edges += shadow
        if model.shadow_missingness == "2i":
            edges += [("Z", "R_Z"), ("X", "R_Z"), ("A", "R_Z")]
        elif model.shadow_missingness == "2ii":
            if model.family == "EXT_SEQ_MFIRST":
                edges.append(("R_M", "R_Z"))
            elif model.family == "EXT_SEQ_YFIRST":
                edges.append(("R_Y", "R_Z"))
            else:
                edges += [("R_M", "R_Z"), ("R_Y", "R_Z")]
    edges += core
    names = ["X", "A", "M", "Y", "R_M", "R_Y"]
    if model.external:
        names.append("Z")
        if model.shadow_missingness:
            names.append("R_Z")
    latents = sorted({p for p, _ in core if p.startswith("U_")})
    nodes = [(n, False) for n in names] + [(u, True) for u in latents]
    return Dag(nodes, edges, order)


@dataclass(frozen=True)
class SatisfiesResult:
    ok: bool
    failing: tuple[str, ...]
    graph_implied: tuple[str, ...]
    not_graph_checkable: tuple[str, ...] = field(default=())
    warnings: tuple[str, ...] = field(default=())


def dag_satisfies(dag: Dag, model: ModelId) -> SatisfiesResult:
    """Check the model's CI statements by d-separation.

    Failing statements are parameterization-dependent rather than refuted:
    a particular parameterization may still satisfy them.  A mediator
    response indicator pointing into Y makes every self-separated and
    internal-shadow model inapplicable.
    """
    assumptions = catalog_assumptions(model)
    failing, implied, notes = [], [], []
    if not model.external and dag.has("R_M") and "R_M" in dag.parents("Y"):
        message = f"R_M -> Y edge: {model.label} is not identifying for this graph"
        warnings.warn(message, stacklevel=2)
        notes.append(message)
        failing.append("R_M->Y")
    for statement in assumptions.ci_statements:
        nodes = set(statement.a) | set(statement.b) | set(statement.c)
        if not all(dag.has(n) for n in nodes):
            failing.append(statement.label)
            continue
        cond = set(statement.c) | {k for k, _ in statement.event}
        if d_separated(dag, statement.a, statement.b, cond):
            implied.append(statement.label)
        else:
            failing.append(statement.label)
    unchecked = [p.label for p in assumptions.positivity_statements]
    unchecked += [c.label for c in assumptions.completeness_statements]
    return SatisfiesResult(not failing, tuple(failing), tuple(implied), tuple(unchecked), tuple(notes))


def all_models() -> list[ModelId]:
    models = [ModelId(f) for f in SELF_SEPARATED]
    for f in SHADOW_INTERNAL:
        if f in ("Z2", "Z3"):
            models += [ModelId(f, mode="strong"), ModelId(f, mode="weak")]
        else:
            models.append(ModelId(f))
    for f in EXTERNAL:
        for p in PLACEMENTS:
            if p == "upstream_auxiliary" and f not in ("EXT_SEQ_MFIRST", "EXT_SEQ_YFIRST"):
                continue
            models.append(ModelId(f, p))
    return models


def acceptance_models() -> list[ModelId]:
    """The model list exercised by the identification soundness criterion."""
    return all_models()


def applicable_models(dag: Dag, models: Iterable[ModelId] | None = None) -> list[ModelId]:
    """Catalog models whose setting admits the graph and whose CI statements it implies."""
    found = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for model in models if models is not None else all_models():
            if model.external and not dag.has("Z"):
                continue
            if not order_allows(model, dag.order):
                continue
            if dag_satisfies(dag, model).ok:
                found.append(model)
    return found
