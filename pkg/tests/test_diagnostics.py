import json

import numpy as np
import pytest
from helpers import seeds
from hypothesis import given, settings

from missid.catalog import ModelId, all_models
from missid.diagnostics import (
    assigned_checks,
    audit,
    check_T1_T2,
    check_T3,
    check_T4_T5,
    check_T9,
)
from missid.errors import ArgumentError
from missid.observed import Patterns
from missid.probability import condition
from missid.scenario import generate_adversarial, generate_scenario
from missid.shadow_models import identify
from missid.tilting import QFunctions

AUDITED = [m for m in all_models() if assigned_checks(m)]
PAIRS = [(m, check) for m in AUDITED for check in assigned_checks(m)]


@pytest.mark.parametrize("model", AUDITED, ids=lambda m: m.label)
def test_catalog_scenarios_pass(model):
    for seed in range(3):
        report = audit(generate_scenario(model, seed=seed).observed(), model)
        assert report.passed, (seed, report.to_json())
        assert {c.id for c in report.checks} == set(assigned_checks(model))
        assert all(c.max_deviation <= 1e-8 for c in report.checks)


@pytest.mark.parametrize("model, check_id", PAIRS, ids=lambda v: getattr(v, "label", v))
def test_violations_are_detected(model, check_id):
    for seed in range(3):
        scenario = generate_adversarial(model, check_id, seed=seed)
        record = audit(scenario.observed(), model).check(check_id)
        assert record.passed is False, seed
        assert record.max_deviation > 1e-6


def test_assignment_table():
    assert assigned_checks(ModelId("S3")) == ("T1", "T2")
    assert assigned_checks(ModelId("Z1")) == ("T4", "T5")
    assert assigned_checks(ModelId.parse("U2")) == ("EXT_PAR_PRODUCT",)
    assert assigned_checks(ModelId.parse("M2+2i")) == ("T9", "RED_EXTRA")
    assert assigned_checks(ModelId.parse("M2+2ii")) == ("T9",)


@pytest.mark.parametrize("label", ["S1", "S2", "Z2-weak", "Z3-weak", "D1"])
def test_models_without_checks_report_a_note(label):
    model = ModelId.parse(label)
    report = audit(generate_scenario(model, seed=0).observed(), model)
    assert report.checks == ()
    assert len(report.notes) == 1
    assert report.passed


class TestChecks:
    def test_jointly_mar_passes_both_ci_checks(self):
        obs = generate_scenario(ModelId("S3"), seed=1).observed()
        t1, t2 = check_T1_T2(obs)
        assert t1.passed and t2.passed
        assert t1.cells_evaluated == obs.cards["X"] * obs.cards["A"]

    def test_pattern_odds_check_is_the_general_check_with_observed_odds(self):
        for violation, model in (("T3", "S4"), (None, "S4"), ("T1", "S3")):
            scenario = (
                generate_adversarial(ModelId(model), violation, seed=2)
                if violation
                else generate_scenario(ModelId(model), seed=2)
            )
            obs = scenario.observed()
            p = Patterns(obs.masked(("X", "A")))
            general = check_T9(obs, p.odds_rm0_given_y_ry1()[..., None, :], p.odds_ry0_given_m_rm1()[..., :, None])
            assert general.max_deviation == pytest.approx(check_T3(obs).max_deviation, abs=1e-15)

    @given(seeds)
    @settings(max_examples=15)
    def test_true_odds_satisfy_general_check(self, seed):
        scenario = generate_scenario(ModelId("S4"), seed=seed % 997)
        joint = scenario.joint()
        rm = condition(joint, "R_M", ["X", "A", "M", "Y"]).probabilities
        ry = condition(joint, "R_Y", ["X", "A", "M", "Y"]).probabilities
        record = check_T9(scenario.observed(), rm[..., 0] / rm[..., 1], ry[..., 0] / ry[..., 1])
        assert record.max_deviation <= 1e-10

    def test_t4_t5_need_q(self):
        obs = generate_scenario(ModelId("Z1"), seed=0).observed()
        with pytest.raises(ArgumentError):
            check_T4_T5(obs, QFunctions())

    def test_artifacts_give_the_same_deviations(self):
        model = ModelId("Z1")
        obs = generate_scenario(model, seed=3).observed()
        fresh = audit(obs, model)
        reused = audit(obs, model, artifacts=identify(obs, model))
        for a, b in zip(fresh.checks, reused.checks):
            assert a.max_deviation == pytest.approx(b.max_deviation, abs=1e-12)

    def test_empirical_mode_has_no_verdict(self):
        scenario = generate_adversarial(ModelId("S3"), "T1", seed=0)
        report = audit(scenario.observed(), ModelId("S3"), empirical=True)
        assert all(c.passed is None for c in report.checks)
        assert report.passed
        assert report.check("T1").max_deviation > 1e-6

    def test_report_json(self):
        report = audit(generate_scenario(ModelId("S3"), seed=0).observed(), ModelId("S3"))
        data = json.loads(report.dumps())
        assert [c["id"] for c in data["checks"]] == ["T1", "T2"]
        assert set(data["checks"][0]) == {
            "id",
            "max_deviation",
            "tolerance",
            "pass",
            "cells_evaluated",
            "cells_skipped",
        }
        with pytest.raises(KeyError):
            report.check("T9")

    def test_unusable_cells_are_skipped(self):
        scenario = generate_scenario(ModelId("Z1"), seed=0)
        obs = scenario.observed()
        q = identify(obs, ModelId("Z1")).q
        t4, _ = check_T4_T5(obs, q)
        assert t4.cells_evaluated + t4.cells_skipped == int(np.prod(q.q_1a.shape[:2]))
