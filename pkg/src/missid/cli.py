"""Command-line front end: ``missid <command> [flags]``.

Every command writes a machine report (JSON, one shared schema) to the
output path when one is given and prints a short summary to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .catalog import MODES, PLACEMENTS, ModelId, all_models
from .diagnostics import audit
from .errors import (
    ArgumentError,
    CompletenessFailure,
    CompletenessInfeasible,
    ConstructionError,
    MissidError,
    ParseError,
    UnknownNameError,
)
from .estimands import compute_estimands, covariate_law
from .graph import ORDERS
from .scenario import (
    DEFAULT_EPS_POS,
    VIOLATIONS,
    Scenario,
    default_cards,
    empirical_law,
    generate_adversarial,
    generate_scenario,
    oracle_compare,
    read_records,
    sample_records,
    write_records,
)
from .shadow import SOLVE_TOL
from .shadow_models import identify
from .tilting import TiltingSet

__all__ = ["COMMANDS", "EXIT_CODES", "SCHEMA_VERSION", "ConfigError", "RunConfig", "main", "run"]

SCHEMA_VERSION = 1
COMMANDS = ("synthesize", "identify", "audit", "oracle", "estimate", "sweep")
ORACLE_TOL = 1e-9
EXIT_CODES = {"ok": 0, "config": 1, "assumption": 2, "completeness": 3, "oracle": 4}
CARD_NAMES = ("X", "A", "M", "Y", "Z")


class ConfigError(MissidError):
    """A run configuration field is malformed; ``field`` names it."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str | None = None
    cards: dict | None = None
    seed: int = 0
    seeds: int = 1
    eps_pos: float = DEFAULT_EPS_POS
    tol: float = SOLVE_TOL
    oracle_tol: float = ORACLE_TOL
    mode: str | None = None
    placement: str | None = None
    order: str | None = None
    violation: str | None = None
    out: str | None = None
    scenario: str | None = None
    report: str | None = None
    records: str | None = None
    samples: int = 0
    empirical: bool = False
    threads: int | None = None
    quiet: bool = field(default=False, compare=False)

    def validate(self) -> RunConfig:
        if self.command not in COMMANDS:
            raise ConfigError("command", f"expected one of {COMMANDS}, got {self.command!r}")
        for name in ("seed", "seeds", "samples"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ConfigError(name, f"must be a non-negative integer, got {value!r}")
        if self.seeds < 1:
            raise ConfigError("seeds", "must be at least 1")
        for name in ("tol", "oracle_tol", "eps_pos"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
                raise ConfigError(name, f"must be a positive number, got {value!r}")
        if not self.eps_pos < 0.25:
            raise ConfigError("eps_pos", "must lie below 0.25")
        if self.mode is not None and self.mode not in MODES:
            raise ConfigError("mode", f"expected one of {MODES}")
        if self.placement is not None and self.placement not in PLACEMENTS:
            raise ConfigError("placement", f"expected one of {PLACEMENTS}")
        if self.order is not None and self.order not in ORDERS:
            raise ConfigError("order", f"expected one of {ORDERS}")
        if self.violation is not None and self.violation not in VIOLATIONS:
            raise ConfigError("violation", f"expected one of {sorted(VIOLATIONS)}")
        if self.threads is not None and (not isinstance(self.threads, int) or self.threads < 1):
            raise ConfigError("threads", "must be a positive integer")
        if self.cards is not None:
            _validate_cards(self.cards)
        for name in ("model", "out", "scenario", "report", "records"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, str):
                raise ConfigError(name, f"must be a string, got {value!r}")
        if not isinstance(self.empirical, bool):
            raise ConfigError("empirical", "must be true or false")
        paths = {name: getattr(self, name) for name in ("out", "scenario", "report", "records")}
        seen = {}
        for name, path in paths.items():
            if path is None:
                continue
            key = os.path.abspath(path)
            if key in seen:
                raise ConfigError(name, f"path equals the {seen[key]} path")
            seen[key] = name
        if self.model is not None and not (self.command == "sweep" and self.model == "all"):
            try:
                self.model_id()
            except MissidError as exc:
                raise ConfigError("model", str(exc)) from None
        self._check_inputs()
        return self

    def _check_inputs(self) -> None:
        cmd = self.command
        if cmd == "synthesize":
            if self.model is None:
                raise ConfigError("model", "synthesize needs a model")
            if self.samples and self.records is None:
                raise ConfigError("records", "--samples needs a records output path")
        elif cmd in ("identify", "audit", "estimate"):
            if self.scenario is None and self.records is None:
                raise ConfigError("scenario", f"{cmd} needs a scenario or a records file")
            if self.records is not None and (self.model is None or self.cards is None):
                raise ConfigError("records", "records input needs --model and --card")
        elif cmd == "oracle":
            if self.scenario is None:
                raise ConfigError("scenario", "oracle needs a scenario")
        elif cmd == "sweep" and self.model is None:
            raise ConfigError("model", "sweep needs a model label or 'all'")

    def model_id(self, fallback: ModelId | None = None) -> ModelId:
        """The configured model with --mode and --placement applied."""
        if self.model is None:
            if fallback is None:
                raise ConfigError("model", "no model given")
            base = fallback
        else:
            base = ModelId.parse(self.model)
        if self.mode is not None:
            if base.family not in ("Z2", "Z3"):
                raise ConfigError("mode", f"{base.label} takes no completeness mode")
            base = replace(base, mode=self.mode)
        if self.placement is not None:
            if not base.external:
                raise ConfigError("placement", f"{base.label} takes no shadow-variable placement")
            base = ModelId(base.family, self.placement, shadow_missingness=base.shadow_missingness)
        return base

    def output_path(self) -> str | None:
        """Where the machine report goes; ``oracle`` reads --report as input."""
        if self.command == "oracle":
            return self.out
        return self.out or self.report

    def to_json(self) -> dict:
        out = asdict(self)
        del out["quiet"]
        return out


def _validate_cards(cards) -> None:
    if not isinstance(cards, dict):
        raise ConfigError("cards", "must map variable names to cardinalities")
    for name, value in cards.items():
        if name not in CARD_NAMES:
            raise ConfigError("cards", f"unknown variable {name!r}; expected names from {CARD_NAMES}")
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError("cards", f"{name} must be a positive integer, got {value!r}")
    for name in ("M", "Y"):
        if name in cards and cards[name] < 2:
            raise ConfigError("cards", f"{name} needs at least two levels")


def parse_cards(text: str) -> dict[str, int]:
    """``"M=2,Y=2,X=1,A=2"`` to a dict."""
    cards = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError("cards", f"expected NAME=VALUE, got {item!r}")
        try:
            cards[name.strip()] = int(value)
        except ValueError:
            raise ConfigError("cards", f"{name.strip()} must be an integer, got {value!r}") from None
    _validate_cards(cards)
    return cards


def _full_cards(cards: dict | None, model: ModelId, seed: int) -> dict | None:
    """Fill unspecified cardinalities from the model defaults."""
    if cards is None:
        return None
    merged = default_cards(model, seed)
    merged.update(cards)
    if model.external and "Z" not in merged:
        raise ConfigError("cards", f"{model.label} needs a Z cardinality")
    if not model.external and "Z" in cards:
        raise ConfigError("cards", f"{model.label} has no shadow variable Z")
    return merged


def load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "the config file must hold a JSON object")
    known = {f.name for f in fields(RunConfig)} - {"command", "quiet"}
    out = {}
    for key, value in data.items():
        name = key.replace("-", "_")
        if name == "card":
            name = "cards"
        if name not in known:
            raise ConfigError(key, "unknown config field")
        if name == "cards" and isinstance(value, str):
            value = parse_cards(value)
        out[name] = value
    return out


# Reports ---------------------------------------------------------------


def envelope(config: RunConfig, status: str, exit_code: int, result: dict | None, error: str | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": config.command,
        "config": config.to_json(),
        "status": status,
        "exit_code": exit_code,
        "result": result,
        "error": error,
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write through a temporary file in the target directory and rename it into place."""
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_json(path: str, field_name: str) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise ConfigError(field_name, f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(field_name, f"{path} is not valid JSON: {exc.msg}") from None


def load_scenario(path: str) -> Scenario:
    """A scenario from a synthesize report or a bare scenario document."""
    data = _read_json(path, "scenario")
    if isinstance(data, dict) and "schema_version" in data:
        if data.get("command") != "synthesize":
            raise ConfigError("scenario", f"{path} is not a synthesize report")
        if not isinstance(data.get("result"), dict):
            raise ConfigError("scenario", f"{path} records a failed synthesize run: {data.get('error')}")
        data = data["result"].get("scenario")
    if not isinstance(data, dict):
        raise ConfigError("scenario", f"{path} holds no scenario")
    try:
        return Scenario.from_json(data)
    except ParseError as exc:
        raise ConfigError("scenario", str(exc)) from None


def load_identification(path: str) -> TiltingSet:
    data = _read_json(path, "report")
    if not (isinstance(data, dict) and data.get("command") == "identify" and isinstance(data.get("result"), dict)):
        raise ConfigError("report", f"{path} is not a successful identify report")
    try:
        return TiltingSet.from_json(data["result"]["tilting"])
    except (KeyError, TypeError, ValueError, MissidError) as exc:
        raise ConfigError("report", f"malformed identification in {path}: {exc}") from None


# Commands --------------------------------------------------------------


def _observed_input(config: RunConfig):
    """(observed law, model, scenario or None) for identify/audit/estimate."""
    if config.records is not None:
        model = config.model_id()
        cards = dict(config.cards)
        needed = ["X", "A", "M", "Y"] + (["Z"] if model.external else [])
        missing = [n for n in needed if n not in cards]
        if missing:
            raise ConfigError("cards", f"records input needs cardinalities for {missing}")
        if not model.external and "Z" in cards:
            raise ConfigError("cards", f"{model.label} has no shadow variable Z")
        try:
            obs = empirical_law(read_records(config.records), cards)
        except OSError as exc:
            raise ConfigError("records", f"cannot read {config.records}: {exc.strerror}") from None
        except ParseError as exc:
            raise ConfigError("records", str(exc)) from None
        return obs, model, None
    scenario = load_scenario(config.scenario)
    return scenario.observed(), config.model_id(scenario.model), scenario


def cmd_synthesize(config: RunConfig) -> tuple[dict, str]:
    model = config.model_id()
    cards = _full_cards(config.cards, model, config.seed)
    if config.violation is not None:
        scenario = generate_adversarial(model, config.violation, cards, config.seed, config.eps_pos, config.order)
    else:
        scenario = generate_scenario(model, cards, config.seed, config.eps_pos, config.order)
    result = {"scenario": scenario.to_json(), "ci_deviation": scenario.ci_report()}
    if config.samples:
        write_records(config.records, sample_records(scenario.observed(), config.samples, config.seed))
        result["records_written"] = config.samples
    summary = f"{model.label}: scenario seed {config.seed} cards {scenario.cards}"
    if config.violation:
        summary += f" violating {config.violation}"
    return result, summary


def cmd_identify(config: RunConfig) -> tuple[dict, str]:
    obs, model, _ = _observed_input(config)
    tilting = identify(obs, model, config.tol)
    result = {"model": model.label, "tilting": tilting.to_json()}
    summary = f"{model.label}: identified P(M|{','.join(tilting.covariates)}) and P(Y|...,M)"
    summary += f"; normalization drift {max(tilting.drift_M, tilting.drift_Y):.2e}"
    return result, summary


def cmd_audit(config: RunConfig) -> tuple[dict, str]:
    obs, model, _ = _observed_input(config)
    empirical = config.empirical or config.records is not None
    report = audit(obs, model, tol=config.tol, empirical=empirical)
    lines = [f"{model.label}: {len(report.checks)} check(s)"]
    for check in report.checks:
        verdict = {True: "pass", False: "FAIL", None: "n/a"}[check.passed]
        lines.append(f"  {check.id:<16} deviation {check.max_deviation:.3e}  {verdict}")
    lines += [f"  note: {note}" for note in report.notes]
    return {"audit": report.to_json(), "pass": report.passed}, "\n".join(lines)


def cmd_oracle(config: RunConfig) -> tuple[dict, str]:
    scenario = load_scenario(config.scenario)
    if config.report is not None:
        tilting = load_identification(config.report)
        model = ModelId.parse(tilting.model)
    else:
        model = config.model_id(scenario.model)
        tilting = identify(scenario.observed(), model, config.tol)
    outcome = oracle_compare(scenario, tilting, config.oracle_tol)
    result = {"model": model.label, "oracle": outcome.to_json(), "tolerance": config.oracle_tol}
    summary = (
        f"{model.label}: max |error| M {outcome.max_abs_error_M:.2e}, Y {outcome.max_abs_error_Y:.2e}"
        f" at tol {config.oracle_tol:g}: {'pass' if outcome.passed else 'FAIL'}"
    )
    return result, summary


def cmd_estimate(config: RunConfig) -> tuple[dict, str]:
    obs, model, _ = _observed_input(config)
    tilting = identify(obs, model, config.tol)
    others = [c for c in tilting.covariates if c != "A"]
    estimates = compute_estimands(covariate_law(obs, others), tilting.identified_M, tilting.identified_Y)
    result = {"model": model.label, "estimands": estimates.to_json(), "contrast_10_00": estimates.contrast()}
    summary = (
        f"{model.label}: mu(1,0)-mu(0,0) = {estimates.contrast():.6f}; "
        f"mu(a) = {np.round(estimates.mu_marginal, 6).tolist()}"
    )
    return result, summary


def _sweep_one(task: tuple) -> dict:
    """One (model, seed) oracle run; top-level so worker processes can import it."""
    label, seed, eps_pos, order, tol, oracle_tol = task
    model = ModelId.parse(label)
    try:
        scenario = generate_scenario(model, None, seed, eps_pos, order)
    except CompletenessInfeasible:
        return {"seed": seed, "status": "infeasible", "error": None}
    try:
        outcome = oracle_compare(scenario, identify(scenario.observed(), model, tol), oracle_tol)
    except MissidError as exc:
        return {"seed": seed, "status": "error", "error": f"{type(exc).__name__}: {exc}"}
    error = max(outcome.max_abs_error_M, outcome.max_abs_error_Y)
    return {"seed": seed, "status": "pass" if outcome.passed else "fail", "error": error}


def worker_count(config: RunConfig) -> int:
    if config.threads is not None:
        return config.threads
    env = os.environ.get("MISSID_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError("MISSID_THREADS", f"must be a positive integer, got {env!r}") from None
        if value < 1:
            raise ConfigError("MISSID_THREADS", f"must be a positive integer, got {env!r}")
        return value
    return os.cpu_count() or 1


def cmd_sweep(config: RunConfig) -> tuple[dict, str]:
    models = all_models() if config.model == "all" else [config.model_id()]
    seeds = range(config.seed, config.seed + config.seeds)
    tasks = [(m.label, s, config.eps_pos, config.order, config.tol, config.oracle_tol) for m in models for s in seeds]
    workers = min(worker_count(config), len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_sweep_one, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        outcomes = [_sweep_one(t) for t in tasks]
    rows = []
    for i, model in enumerate(models):
        chunk = outcomes[i * len(seeds) : (i + 1) * len(seeds)]
        counts = {k: sum(o["status"] == k for o in chunk) for k in ("pass", "fail", "error", "infeasible")}
        errors = [o["error"] for o in chunk if isinstance(o["error"], float)]
        compliant = len(chunk) - counts["infeasible"]
        rows.append(
            {
                "model": model.label,
                "seeds": len(chunk),
                **{f"n_{k}": v for k, v in counts.items()},
                "pass_rate": counts["pass"] / compliant if compliant else None,
                "max_error": max(errors) if errors else None,
                "failures": [o for o in chunk if o["status"] in ("fail", "error")],
            }
        )
    lines = [f"{'model':<12}{'pass':>6}{'fail':>6}{'error':>7}{'infeas':>8}{'rate':>8}{'max err':>11}"]
    for row in rows:
        rate = "-" if row["pass_rate"] is None else f"{100 * row['pass_rate']:.0f}%"
        err = "-" if row["max_error"] is None else f"{row['max_error']:.1e}"
        lines.append(
            f"{row['model']:<12}{row['n_pass']:>6}{row['n_fail']:>6}{row['n_error']:>7}"
            f"{row['n_infeasible']:>8}{rate:>8}{err:>11}"
        )
    result = {"seed_start": config.seed, "seeds": config.seeds, "rows": rows}
    return result, "\n".join(lines)


_HANDLERS = {
    "synthesize": cmd_synthesize,
    "identify": cmd_identify,
    "audit": cmd_audit,
    "oracle": cmd_oracle,
    "estimate": cmd_estimate,
    "sweep": cmd_sweep,
}


def _classify(exc: Exception) -> int:
    """Assumption, positivity, coverage, misfit and infeasibility failures all map to 2."""
    if isinstance(exc, (ConfigError, ParseError, ArgumentError, UnknownNameError, ConstructionError)):
        return EXIT_CODES["config"]
    if isinstance(exc, (CompletenessFailure, CompletenessInfeasible)):
        return EXIT_CODES["completeness"]
    return EXIT_CODES["assumption"]


def _oracle_failed(command: str, result: dict) -> bool:
    if command == "oracle":
        return not result["oracle"]["pass"]
    if command == "sweep":
        return any(row["n_fail"] or row["n_error"] for row in result["rows"])
    return False


def run(config: RunConfig, stdout=None) -> int:
    """Execute one command; returns the exit code and writes the report if requested."""
    stdout = stdout or sys.stdout
    try:
        config.validate()
        result, summary = _HANDLERS[config.command](config)
    except MissidError as exc:
        code = _classify(exc)
        print(f"error: {exc}", file=sys.stderr)
        if code != EXIT_CODES["config"] and config.output_path() is not None:
            message = f"{type(exc).__name__}: {exc}"
            write_atomic(config.output_path(), dumps_report(envelope(config, "error", code, None, message)))
        return code
    code = EXIT_CODES["oracle"] if _oracle_failed(config.command, result) else EXIT_CODES["ok"]
    if config.output_path() is not None:
        status = "ok" if code == 0 else "mismatch"
        write_atomic(config.output_path(), dumps_report(envelope(config, status, code, result)))
    _say(stdout, config, summary)
    return code


def _say(stdout, config: RunConfig, text: str) -> None:
    if not config.quiet:
        print(text, file=stdout)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit through the malformed-config code."""

    def error(self, message):
        raise ConfigError("arguments", message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="missid", description="Exact identification of mediation densities under missingness.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config; its fields override flags")
        p.add_argument("--model", help="model label such as S4, Z2-weak, D1, U4' or M2+2i; 'all' for sweep")
        p.add_argument("--card", dest="cards", type=str, help="cardinalities, e.g. M=2,Y=2,X=1,A=2")
        p.add_argument("--seed", type=int)
        p.add_argument("--eps-pos", type=float)
        p.add_argument("--tol", type=float, help="shadow-solve and audit tolerance")
        p.add_argument("--oracle-tol", type=float)
        p.add_argument("--mode", choices=MODES)
        p.add_argument("--placement", choices=PLACEMENTS)
        p.add_argument("--order", choices=ORDERS)
        p.add_argument("-o", "--out")
        p.add_argument("--scenario")
        p.add_argument("--report", help="report output; for oracle, the identify report to check")
        p.add_argument("--records", help="JSON-lines records (input, or output of synthesize --samples)")
        p.add_argument("-q", "--quiet", action="store_true")
        if name == "synthesize":
            p.add_argument("--violation", choices=sorted(VIOLATIONS))
            p.add_argument("--samples", type=int)
        if name == "audit":
            p.add_argument("--empirical", action="store_true", default=None)
        if name == "sweep":
            p.add_argument("--seeds", type=int, help="number of consecutive seeds from --seed")
            p.add_argument("--threads", type=int)
    return parser


def config_from_args(argv) -> RunConfig:
    """Defaults, then flags, then the config file."""
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config")
    quiet = args.pop("quiet")
    values = {k: v for k, v in args.items() if v is not None}
    if isinstance(values.get("cards"), str):
        values["cards"] = parse_cards(values["cards"])
    if config_path is not None:
        values.update(load_config_file(config_path))
    return RunConfig(command=command, quiet=quiet, **values)


def main(argv=None) -> int:
    try:
        config = config_from_args(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES["config"]
    except TypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES["config"]
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
