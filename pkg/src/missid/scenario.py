"""Random scenarios consistent with a catalog model, masking and the enumeration oracle."""

from __future__ import annotations

import json
import string
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .catalog import ModelId, catalog_assumptions, catalog_dag, default_order, order_allows
from .errors import (
    ArgumentError,
    AssumptionError,
    CompletenessInfeasible,
    ConstructionError,
    CoverageError,
    ParseError,
    PositivityError,
)
from .graph import ORDERS, Dag, d_separated
from .observed import ObservedLaw, mask_joint
from .probability import CondTable, JointTable, MaskedValue, VariableSpec, check_ci, condition, sample
from .shadow import rank_summary
from .shadow_models import model_systems
from .tilting import TiltingSet

__all__ = [
    "CONDITION_LIMIT",
    "DEFAULT_EPS_POS",
    "MAX_RESAMPLES",
    "VIOLATIONS",
    "MissingnessMechanism",
    "OracleResult",
    "Scenario",
    "default_cards",
    "derive_observed",
    "disjoint_mar_dag",
    "disjoint_mar_pair",
    "empirical_law",
    "generate_adversarial",
    "generate_scenario",
    "oracle_compare",
    "read_records",
    "sample_records",
    "write_records",
]

DEFAULT_EPS_POS = 0.05
CONDITION_LIMIT = 1e6
MAX_RESAMPLES = 200
CI_TOL = 1e-10

SUBSTANTIVE = ("X", "A", "M", "Y", "Z")
INDICATORS = ("R_M", "R_Y", "R_Z")

# Edges each adversarial generator adds to the model's canonical graph.
_U_R_PAIR = (("U_R", "R_M"), ("U_R", "R_Y"))
VIOLATIONS = {
    "T1": (("M", "R_Y"),),
    "T2": (("Y", "R_M"),),
    "T3": _U_R_PAIR,
    "T4": (("R_M", "R_Y"),),
    "T5": (("R_Y", "R_M"),),
    "T9": _U_R_PAIR,
    "EXT_PAR_PRODUCT": _U_R_PAIR,
    "RED_EXTRA": (("R_M", "R_Z"), ("R_Y", "R_Z")),
}


class MissingnessMechanism:
    """P(response indicators | substantive variables) with response positivity."""

    __slots__ = ("cond",)

    def __init__(self, cond: CondTable):
        targets = cond.target_names
        if targets[:2] != ("R_M", "R_Y") or not set(targets) <= set(INDICATORS):
            raise ConstructionError(f"mechanism targets must start with R_M, R_Y; got {targets}")
        if any(v.cardinality != 2 for v in cond.targets):
            raise ConstructionError("response indicators must be binary")
        object.__setattr__(self, "cond", cond)

    def __setattr__(self, key, value):
        raise AttributeError("MissingnessMechanism is immutable")

    @property
    def indicators(self) -> tuple[str, ...]:
        return self.cond.target_names

    @property
    def givens(self) -> tuple[str, ...]:
        return self.cond.given_names

    def check_positivity(self, full_law: JointTable, eps_pos: float) -> None:
        """R_M positivity on (X,A,M) cells and R_MY positivity on (X,A,M,Y) cells."""
        joint = _combine(full_law, self)
        xam = joint.array(["X", "A", "M", "R_M"])
        supported = xam.sum(axis=-1) > 0
        rm1 = xam[..., 1] / np.where(supported, xam.sum(axis=-1), 1.0)
        if np.any(supported & (rm1 < eps_pos * (1 - 1e-9))):
            raise PositivityError(f"P(R_M=1|x,a,m) falls below {eps_pos}")
        xamy = joint.array(["X", "A", "M", "Y", "R_M", "R_Y"])
        mass = xamy.sum(axis=(-2, -1))
        r11 = xamy[..., 1, 1] / np.where(mass > 0, mass, 1.0)
        if np.any((mass > 0) & (r11 < eps_pos * (1 - 1e-9))):
            raise PositivityError(f"P(R_MY=1|x,a,m,y) falls below {eps_pos}")

    def to_json(self) -> dict:
        return self.cond.to_json()

    @classmethod
    def from_json(cls, data) -> MissingnessMechanism:
        return cls(CondTable.from_json(data))


def _combine(full_law: JointTable, mechanism: MissingnessMechanism) -> JointTable:
    givens = list(mechanism.givens)
    base = full_law.array(givens)
    probs = base[(...,) + (None,) * len(mechanism.indicators)] * mechanism.cond.probabilities
    specs = [full_law.spec(n) for n in givens] + list(mechanism.cond.targets)
    return JointTable(specs, probs)


@dataclass(frozen=True)
class Scenario:
    model: ModelId
    dag: Dag
    full_law: JointTable
    mechanism: MissingnessMechanism
    seed: int
    eps_pos: float = DEFAULT_EPS_POS
    violation: str | None = None

    def joint(self) -> JointTable:
        """Full law times mechanism: substantive variables then indicators."""
        return _combine(self.full_law, self.mechanism)

    def observed(self) -> ObservedLaw:
        return derive_observed(self)

    @property
    def cards(self) -> dict[str, int]:
        return self.full_law.cards

    def ci_report(self, tol: float = CI_TOL) -> dict[str, float]:
        """Deviation of every catalog CI statement on the induced joint."""
        joint = self.joint()
        out = {}
        for statement in catalog_assumptions(self.model).ci_statements:
            result = check_ci(joint, statement.a, statement.b, statement.c, tol, dict(statement.event) or None)
            out[f"{statement.label}: {statement.text}"] = result.max_deviation
        return out

    def to_json(self) -> dict:
        return {
            "model": self.model.label,
            "dag": self.dag.to_json(),
            "full_law": self.full_law.to_json(),
            "mechanism": self.mechanism.to_json(),
            "seed": self.seed,
            "eps_pos": self.eps_pos,
            "violation": self.violation,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, data: Mapping) -> Scenario:
        try:
            return cls(
                model=ModelId.parse(data["model"]),
                dag=Dag.from_json(data["dag"]),
                full_law=JointTable.from_json(data["full_law"]),
                mechanism=MissingnessMechanism.from_json(data["mechanism"]),
                seed=int(data["seed"]),
                eps_pos=float(data.get("eps_pos", DEFAULT_EPS_POS)),
                violation=data.get("violation"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed scenario: {exc}") from None


def _rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), *stream])


def default_cards(model: ModelId, seed: int) -> dict[str, int]:
    """Cardinalities meeting the model's dimension requirements, varied by seed."""
    rng = _rng(seed, 101)
    cards = {"X": int(rng.integers(1, 4)), "A": 2}
    m = int(rng.integers(2, 4))
    family, mode = model.family, model.mode
    if family == "Z1":
        y = m
    elif family == "Z2":
        y = int(rng.integers(m, 4)) if mode == "strong" else int(rng.integers(max(2, m - 1), 4))
    elif family == "Z3":
        y = int(rng.integers(2, m + 1)) if mode == "strong" else int(rng.integers(2, min(3, m + 1) + 1))
    elif family == "Z4":
        y = int(rng.integers(m, 4))
    elif family == "Z5":
        y = int(rng.integers(2, m + 1))
    elif family == "EXT_COMBINED":
        m, y = 2, 2
    elif model.placement == "upstream_auxiliary" and family == "EXT_SEQ_YFIRST":
        # Z reaches Y only through M, so P(Y|Z) has rank at most |M|.
        y = int(rng.integers(2, m + 1))
    else:
        y = int(rng.integers(2, 4))
    cards["M"], cards["Y"] = m, y
    if model.external:
        cards["Z"] = 4 if family == "EXT_COMBINED" else int(rng.integers(max(m, y), 5))
    return cards


def _cards_from(cards) -> dict[str, int]:
    if isinstance(cards, Mapping):
        return {str(k): int(v) for k, v in cards.items()}
    return {v.name: v.cardinality for v in cards}


def _indicator_cpt(
    rng, parents: Sequence[str], shape: tuple[int, ...], eps_pos: float, strong: Iterable[str], ties
) -> np.ndarray:
    """P(indicator=1 | parents) inside [√eps, 1-√eps] so any two-indicator pattern has mass ≥ eps."""
    floor = float(np.sqrt(eps_pos))
    p1 = rng.uniform(floor, 1.0 - floor, size=shape)
    strong = [i for i, p in enumerate(parents) if p in strong]
    if strong:
        low = rng.uniform(floor, max(floor, 0.3), size=shape)
        high = rng.uniform(min(1.0 - floor, 0.7), 1.0 - floor, size=shape)
        parity = np.zeros(shape, dtype=int)
        for i in strong:
            grid = np.arange(shape[i]).reshape([-1 if j == i else 1 for j in range(len(shape))])
            parity = parity + grid
        p1 = np.where(parity % 2 == 0, low, high)
    if ties:
        # Tie every non-complete (R_M, R_Y) pattern to one response probability.
        ordered = list(parents)
        im, iy = ordered.index("R_M"), ordered.index("R_Y")
        moved = np.moveaxis(p1, (im, iy), (0, 1)).copy()
        moved[0, 1] = moved[0, 0]
        moved[1, 0] = moved[0, 0]
        p1 = np.moveaxis(moved, (0, 1), (im, iy))
    return np.stack([1.0 - p1, p1], axis=-1)


def _draw_joint(dag: Dag, cards: Mapping[str, int], rng, eps_pos: float, strong_edges, tie_rz: bool) -> np.ndarray:
    """Joint over all graph nodes (in dag.names order) from random CPTs."""
    names = list(dag.names)
    letters = dict(zip(names, string.ascii_letters))
    operands, subscripts = [], []
    for node in dag.topological_order():
        parents = dag.parents(node)
        shape = tuple(cards[p] for p in parents)
        if node in INDICATORS:
            strong = {p for p, c in strong_edges if c == node}
            cpt = _indicator_cpt(rng, parents, shape, eps_pos, strong, tie_rz and node == "R_Z")
        else:
            size = shape if shape else None
            cpt = rng.dirichlet(np.ones(cards[node]), size=size)
        operands.append(cpt)
        subscripts.append("".join(letters[p] for p in parents) + letters[node])
    expr = ",".join(subscripts) + "->" + "".join(letters[n] for n in names)
    return np.einsum(expr, *operands)


def _scenario_from_joint(model, dag, joint, names, seed, eps_pos, violation) -> Scenario:
    subst = [n for n in SUBSTANTIVE if n in names]
    indicators = [n for n in INDICATORS if n in names]
    keep = subst + indicators
    axes = [names.index(n) for n in keep]
    dropped = tuple(i for i in range(len(names)) if i not in axes)
    reduced = joint.sum(axis=dropped) if dropped else joint
    kept_sorted = sorted(axes)
    reduced = np.transpose(reduced, [kept_sorted.index(a) for a in axes])
    full = reduced.sum(axis=tuple(range(len(subst), len(keep))))
    full_law = JointTable.from_array(subst, full)
    mech = reduced / full[(...,) + (None,) * len(indicators)]
    cond = CondTable([VariableSpec(n, 2) for n in indicators], [full_law.spec(n) for n in subst], mech)
    return Scenario(model, dag, full_law, MissingnessMechanism(cond), seed, eps_pos, violation)


def _structurally_incomplete(dag: Dag, model: ModelId) -> str | None:
    """A completeness statement the graph forces to fail, if any."""
    for statement in catalog_assumptions(model).completeness_statements:
        nodes = set(statement.target) | set(statement.shadow) | set(statement.givens)
        if not all(dag.has(n) for n in nodes):
            continue
        cond = set(statement.givens) | {k for k, _ in statement.event}
        if d_separated(dag, statement.target, statement.shadow, cond):
            return statement.label
    return None


def _screen_completeness(obs: ObservedLaw, model: ModelId) -> bool:
    """True when every shadow system has full column rank and a moderate condition number."""
    for _, system in model_systems(obs, model):
        rows, cols = system.design.shape
        if rows < cols and system.skipped_rows == 0:
            raise CompletenessInfeasible(
                f"{system.describe()}: {rows} shadow cells cannot identify {cols} target values"
            )
        summary = rank_summary(system.design)
        if not summary.full or summary.condition_number >= CONDITION_LIMIT:
            return False
    return True


def _build(
    model: ModelId,
    dag: Dag,
    cards: Mapping[str, int],
    seed: int,
    eps_pos: float,
    strong_edges=(),
    violation: str | None = None,
    screen: bool = True,
) -> Scenario:
    if not 0 < eps_pos < 0.25:
        raise ArgumentError("eps_pos must lie in (0, 0.25)")
    cards = dict(cards)
    for name in ("M", "Y"):
        if cards.get(name, 0) < 2:
            raise ArgumentError(f"{name} needs cardinality at least 2")
    for name in ("X", "A"):
        cards.setdefault(name, 1)
    if model.external and "Z" not in cards:
        raise ArgumentError(f"{model.label} needs a cardinality for Z")
    for node, latent in dag.nodes:
        if latent or node in INDICATORS:
            cards[node] = 2
    tie_rz = model.family == "EXT_COMBINED" and model.shadow_missingness == "2ii"
    if screen and model.family not in ("S1", "S2", "S3", "S4", "S5", "S6"):
        label = _structurally_incomplete(dag, model)
        if label:
            raise CompletenessInfeasible(f"{model.label}: the graph makes {label} fail for every parameterization")
    rng = _rng(seed, 0)
    names = list(dag.names)
    for _ in range(MAX_RESAMPLES):
        joint = _draw_joint(dag, cards, rng, eps_pos, strong_edges, tie_rz)
        scenario = _scenario_from_joint(model, dag, joint, names, seed, eps_pos, violation)
        if not screen or model.family.startswith("S"):
            return scenario
        if _screen_completeness(scenario.observed(), model):
            return scenario
    raise CompletenessInfeasible(f"{model.label}: no well-conditioned draw in {MAX_RESAMPLES} attempts")


def generate_scenario(
    model: ModelId,
    cards=None,
    seed: int = 0,
    eps_pos: float = DEFAULT_EPS_POS,
    order: str | None = None,
    null_m_to_z: bool = False,
    strong_edges: Iterable[tuple[str, str]] = (),
) -> Scenario:
    """Draw CPTs along the model's canonical graph so every catalog CI holds by construction.

    ``strong_edges`` lists indicator edges whose effect is forced to be large.
    """
    order = order or default_order(model)
    if not order_allows(model, order):
        raise AssumptionError(f"{model.label} is not catalogued for the {order} setting")
    cards = _cards_from(cards) if cards is not None else default_cards(model, seed)
    dag = catalog_dag(model, order, null_m_to_z=null_m_to_z)
    for parent, child in strong_edges:
        if (parent, child) not in dag.edges:
            raise ArgumentError(f"{parent}->{child} is not an edge of the {model.label} graph")
    return _build(model, dag, cards, seed, eps_pos, tuple(strong_edges))


def _adversarial_dag(model: ModelId, violation: str, order: str | None) -> Dag:
    extra = VIOLATIONS[violation]
    if violation == "RED_EXTRA" and not model.external:
        extra = (("R_M", "R_Y"),)
    orders = [order] if order else [o for o in ORDERS if order_allows(model, o)]
    errors = []
    for candidate in orders:
        try:
            base = catalog_dag(model, candidate)
            nodes = list(base.nodes)
            for parent in sorted({p for p, _ in extra if p.startswith("U_")}):
                if not base.has(parent):
                    nodes.append((parent, True))
            missing = [n for edge in extra for n in edge if n not in {name for name, _ in nodes}]
            if missing:
                raise AssumptionError(f"{model.label} graph lacks {sorted(set(missing))}")
            return Dag(nodes, list(base.edges) + list(extra), candidate)
        except (ConstructionError, AssumptionError) as exc:
            errors.append(f"{candidate}: {exc}")
    raise AssumptionError(f"cannot add the {violation} violation to {model.label}: {'; '.join(errors)}")


def generate_adversarial(
    model: ModelId,
    violation: str,
    cards=None,
    seed: int = 0,
    eps_pos: float = DEFAULT_EPS_POS,
    order: str | None = None,
) -> Scenario:
    """A scenario for ``model`` with edges that break exactly the named testable implication."""
    if violation not in VIOLATIONS:
        raise ArgumentError(f"unknown violation {violation!r}; expected one of {sorted(VIOLATIONS)}")
    cards = _cards_from(cards) if cards is not None else default_cards(model, seed)
    dag = _adversarial_dag(model, violation, order)
    strong = [e for e in dag.edges if e in VIOLATIONS[violation] or (violation == "RED_EXTRA" and e == ("R_M", "R_Y"))]
    return _build(model, dag, cards, seed, eps_pos, tuple(strong), violation, screen=False)


def derive_observed(scenario: Scenario) -> ObservedLaw:
    return mask_joint(scenario.joint())


@dataclass(frozen=True)
class OracleResult:
    max_abs_error_M: float
    max_abs_error_Y: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "max_abs_error_M": self.max_abs_error_M,
            "max_abs_error_Y": self.max_abs_error_Y,
            "pass": self.passed,
        }


def _truth(full_law: JointTable, target: str, givens: Sequence[str]) -> CondTable:
    return condition(full_law, target, list(givens))


def _max_error(recovered: CondTable, truth: CondTable) -> float:
    if recovered.probabilities.shape != truth.probabilities.shape:
        raise CoverageError(
            f"recovered table shape {recovered.probabilities.shape} does not match {truth.probabilities.shape}"
        )
    needed = ~truth.unsupported
    if np.any(recovered.unsupported & needed):
        raise CoverageError("recovered density is unsupported on a supported cell")
    gap = np.abs(recovered.probabilities - truth.probabilities)
    gap = np.where(needed[(...,) + (None,)], gap, 0.0)
    return float(gap.max()) if gap.size else 0.0


def oracle_compare(scenario: Scenario, recovered: TiltingSet, tol: float = 1e-9) -> OracleResult:
    """Compare recovered P(M|cov) and P(Y|cov,M) to the exact full-law conditionals."""
    covariates = list(recovered.covariates)
    truth_m = _truth(scenario.full_law, "M", covariates)
    truth_y = _truth(scenario.full_law, "Y", covariates + ["M"])
    err_m = _max_error(recovered.identified_M, truth_m)
    err_y = _max_error(recovered.identified_Y, truth_y)
    return OracleResult(err_m, err_y, err_m <= tol and err_y <= tol)


# Records: one dict per unit, {"X": int, "A": int, "M": [responded, value], ...}.
_MASKED = ("M", "Y", "Z")


def _masked_value(raw, cardinality: int, name: str) -> MaskedValue:
    if isinstance(raw, MaskedValue):
        value = raw
    elif isinstance(raw, Sequence) and not isinstance(raw, str) and len(raw) == 2:
        value = MaskedValue(int(raw[0]), int(raw[1]))
    elif raw is None:
        value = MaskedValue.missing(cardinality)
    else:
        raise ParseError(f"{name}: expected [responded, value], got {raw!r}")
    try:
        value.validate(cardinality)
    except ArgumentError as exc:
        raise ParseError(f"{name}: {exc}") from None
    return value


def empirical_law(samples: Iterable, cards: Mapping[str, int]) -> ObservedLaw:
    """Frequency table of masked records as an observed law."""
    cards = dict(cards)
    with_z = "Z" in cards
    shape = [cards["X"], cards["A"], 2, cards["M"] + 1, 2, cards["Y"] + 1]
    if with_z:
        shape += [2, cards["Z"] + 1]
    counts = np.zeros(shape)
    n = 0
    for i, record in enumerate(samples):
        if not isinstance(record, Mapping):
            raise ParseError(f"record {i}: expected an object, got {type(record).__name__}")
        try:
            x, a = int(record["X"]), int(record["A"])
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"record {i}: X and A must be integers") from None
        if not (0 <= x < cards["X"] and 0 <= a < cards["A"]):
            raise ParseError(f"record {i}: X or A outside its support")
        index = [x, a]
        for name in _MASKED:
            if name == "Z" and not with_z:
                if "Z" in record:
                    raise ParseError(f"record {i}: unexpected Z")
                continue
            if name not in record:
                raise ParseError(f"record {i}: missing field {name}")
            value = _masked_value(record[name], cards[name], f"record {i} {name}")
            index += [value.responded, value.value]
        counts[tuple(index)] += 1
        n += 1
    if n == 0:
        raise ParseError("no records")
    names = ["X", "A", "R_M", "M", "R_Y", "Y"] + (["R_Z", "Z"] if with_z else [])
    return ObservedLaw(JointTable.from_array(names, counts / n))


def sample_records(obs: ObservedLaw, n: int, seed: int) -> list[dict]:
    names = obs.table.names
    records = []
    for cell in sample(obs.table, n, seed):
        values = dict(zip(names, cell))
        record = {"X": values["X"], "A": values["A"]}
        for name in _MASKED:
            if name in values:
                record[name] = [values[f"R_{name}"], values[name]]
        records.append(record)
    return records


def write_records(path, records: Iterable[Mapping]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.writelines(json.dumps(record, sort_keys=True) + "\n" for record in records)


def read_records(path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for number, line in enumerate(handle, 1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ParseError(f"line {number}: {exc.msg}") from None
    return records


def disjoint_mar_dag() -> Dag:
    """M and Y each MAR, but R_M shares a latent cause with Y and also affects Y."""
    nodes = [(n, False) for n in ("X", "A", "M", "Y", "R_M", "R_Y")] + [("U_Y", True)]
    edges = [
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
        ("R_M", "Y"),
        ("U_Y", "R_M"),
        ("U_Y", "Y"),
        ("R_M", "R_Y"),
    ]
    return Dag(nodes, edges, "in_time")


def disjoint_mar_pair(cards=None, seed: int = 0) -> tuple[JointTable, JointTable]:
    """Two joints over (X, A, M, Y, R_M, R_Y) with one observed law and different P(Y|X,A,M).

    Both share P(X,A), P(R_M|X,A), P(M|X,A), P(R_Y|X,A,R_M) and
    P(Y|X,A,M,R_M=1).  They differ only in P(Y|X,A,M,R_M=0), moved along a
    direction that leaves its M-average unchanged, which is all the data
    reveal about the R_M=0 stratum.
    """
    cards = {"X": 2, "A": 2, "M": 2, "Y": 2, **(_cards_from(cards) if cards else {})}
    rng = _rng(seed, 7)
    nx, na, nm, ny = cards["X"], cards["A"], cards["M"], cards["Y"]
    p_xa = rng.dirichlet(np.ones(nx * na)).reshape(nx, na)
    rm1 = rng.uniform(0.4, 0.6, size=(nx, na))
    p_m = rng.dirichlet(np.ones(nm) * 5, size=(nx, na))
    ry1 = rng.uniform(0.3, 0.9, size=(nx, na, 2))
    y_r1 = rng.dirichlet(np.ones(ny) * 5, size=(nx, na, nm))
    y_r0 = np.full((nx, na, nm, ny), 1.0 / ny)
    # Direction d(m)·e(y) with Σ_m P(m|x,a) d(m) = 0 and Σ_y e(y) = 0.
    d = np.zeros((nx, na, nm))
    d[..., 0] = 1.0
    d[..., 1] = -p_m[..., 0] / p_m[..., 1]
    e = np.zeros(ny)
    e[0], e[1] = 1.0, -1.0
    direction = d[..., None] * e
    step = 0.9 * (1.0 / ny) / np.abs(direction).max()
    y_r0_alt = y_r0 + step * direction

    def joint(y_given_r0):
        out = np.zeros((nx, na, nm, ny, 2, 2))
        for r_m in (0, 1):
            p_rm = rm1 if r_m else 1 - rm1
            y_given = y_r1 if r_m else y_given_r0
            for r_y in (0, 1):
                p_ry = ry1[..., r_m] if r_y else 1 - ry1[..., r_m]
                out[..., r_m, r_y] = (p_xa * p_rm * p_ry)[..., None, None] * p_m[..., None] * y_given
        return JointTable.from_array(["X", "A", "M", "Y", "R_M", "R_Y"], out)

    return joint(y_r0), joint(y_r0_alt)
