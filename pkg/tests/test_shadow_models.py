import numpy as np
import pytest
from helpers import mcar_scenario, scenario_with_mechanism, seeds
from hypothesis import given

from missid.catalog import ModelId, all_models
from missid.errors import ArgumentError, AssumptionError, CompletenessFailure, PositivityError
from missid.observed import Patterns
from missid.probability import JointTable, condition
from missid.scenario import generate_scenario, oracle_compare
from missid.shadow_models import (
    identify,
    identify_ext_parallel,
    identify_ext_sequential,
    identify_ext_with_missing_Z,
    identify_Z1,
    identify_Z2,
    identify_Z4,
    model_systems,
    solve_systems,
    z5_inverse_response,
)

SHADOW_MODELS = [m for m in all_models() if not m.family.startswith("S") and m != ModelId.parse("U3′")]
INTERNAL = [m for m in SHADOW_MODELS if not m.external]
MISSING_SHADOW = ["D1+2i", "D1+2ii", "M2+2i", "M2+2ii", "D3+2ii", "M4+2i"]


def joint_response(joint, givens):
    return condition(joint, ["R_M", "R_Y"], givens).probabilities[..., 1, 1]


@pytest.mark.parametrize("model", SHADOW_MODELS, ids=lambda m: m.label)
def test_oracle_recovers_full_law(model):
    for seed in range(3):
        scenario = generate_scenario(model, seed=seed)
        result = identify(scenario.observed(), model)
        assert oracle_compare(scenario, result, 1e-9).passed, seed


@pytest.mark.parametrize("label", MISSING_SHADOW)
def test_oracle_with_missing_shadow(label):
    model = ModelId.parse(label)
    scenario = generate_scenario(model, seed=2)
    obs = scenario.observed()
    assert obs.shadow_missing_mass > 0.1
    assert oracle_compare(scenario, identify(obs, model), 1e-9).passed


@given(seeds)
def test_implied_response_matches_mechanism(seed):
    model = INTERNAL[seed % len(INTERNAL)]
    scenario = generate_scenario(model, seed=seed % 991)
    obs = scenario.observed()
    implied = identify(obs, model).response_probability(Patterns(obs.masked(("X", "A"))))
    truth = joint_response(scenario.joint(), ["X", "A", "M", "Y"])
    np.testing.assert_allclose(implied, truth, atol=1e-9)


class TestInternal:
    def test_z1_inverse_responses(self):
        scenario = generate_scenario(ModelId("Z1"), seed=4)
        joint = scenario.joint()
        result = identify_Z1(scenario.observed())
        rm1 = condition(joint, "R_M", ["X", "A", "M"]).probabilities[..., 1]
        ry1 = condition(joint, "R_Y", ["X", "A", "Y", "R_M"]).probabilities[..., 1, 1]
        np.testing.assert_allclose(result.q.q_1a, 1 / rm1, rtol=1e-9)
        np.testing.assert_allclose(result.q.q_2a, 1 / ry1, rtol=1e-9)

    def test_z1_solve_order_is_irrelevant(self):
        obs = generate_scenario(ModelId("Z1"), seed=6).observed()
        systems = model_systems(obs, ModelId("Z1"))
        forward = solve_systems(systems)
        backward = solve_systems(systems[::-1])
        for key, system in forward.items():
            np.testing.assert_array_equal(system.solution_q, backward[key].solution_q)

    def test_z2_needs_dependence_between_mediator_and_outcome(self):
        p_m, p_y = np.array([0.3, 0.7]), np.array([0.4, 0.6])
        law = JointTable.from_array(["X", "A", "M", "Y"], np.outer(p_m, p_y)[None, None])
        obs = mcar_scenario(law, 0.7, 0.8, "Z2").observed()
        with pytest.raises(CompletenessFailure, match="weak mode"):
            identify_Z2(obs)

    def test_z4_needs_outcome_response_without_mediator(self):
        law = generate_scenario(ModelId("Z4"), seed=0).full_law
        response = np.array([[0.3, 0.0], [0.2, 0.5]])
        with pytest.raises(PositivityError):
            identify_Z4(scenario_with_mechanism(law, response, "Z4").observed())

    def test_z5_odds_tilt(self):
        scenario = generate_scenario(ModelId("Z5"), seed=3)
        ry1 = condition(scenario.joint(), "R_Y", ["X", "A", "M"]).probabilities[..., 1]
        np.testing.assert_allclose(z5_inverse_response(scenario.observed()), 1 / ry1, rtol=1e-9)

    def test_self_separated_models_have_no_systems(self):
        obs = generate_scenario(ModelId("S1"), seed=0).observed()
        assert model_systems(obs, ModelId("S1")) == []


class TestExternal:
    def test_parallel_response_factorizes(self):
        model = ModelId.parse("D2")
        scenario = generate_scenario(model, seed=5)
        result = identify_ext_parallel(scenario.observed(), "downstream")
        tables = result.q.extra
        truth = joint_response(scenario.joint(), ["X", "A", "M", "Y"])
        np.testing.assert_allclose(1 / (tables["q_M"] * tables["q_Y"]), truth, rtol=1e-9)
        joint = scenario.joint()
        rm1 = condition(joint, "R_M", ["X", "A", "M", "Y"]).probabilities[..., 1]
        np.testing.assert_allclose(tables["q_M"], 1 / rm1, rtol=1e-9)

    def test_sequential_first_argument(self):
        obs = generate_scenario(ModelId.parse("D3"), seed=0).observed()
        with pytest.raises(ArgumentError):
            identify_ext_sequential(obs, "downstream", first="Z")

    def test_needs_a_shadow_variable(self):
        obs = generate_scenario(ModelId("Z1"), seed=0).observed()
        with pytest.raises(ArgumentError):
            identify(obs, ModelId.parse("D2"))

    def test_missing_shadow_needs_a_declared_branch(self):
        obs = generate_scenario(ModelId.parse("M2+2i"), seed=0).observed()
        with pytest.raises(AssumptionError, match="mSVx"):
            identify(obs, ModelId.parse("M2"))

    @pytest.mark.parametrize("branch", [("2i", "2ii"), "both"])
    def test_both_branches_refused(self, branch):
        obs = generate_scenario(ModelId.parse("M2+2i"), seed=0).observed()
        with pytest.raises(AssumptionError):
            identify_ext_with_missing_Z(obs, "EXT_PARALLEL", "midstream", branch)

    def test_declared_branch_recovers(self):
        scenario = generate_scenario(ModelId.parse("M2+2ii"), seed=0)
        result = identify_ext_with_missing_Z(scenario.observed(), "EXT_PARALLEL", "midstream", ["2ii"])
        assert oracle_compare(scenario, result).passed

    def test_covariate_shadow_must_be_observed(self):
        obs = generate_scenario(ModelId.parse("M2+2i"), seed=0).observed()
        with pytest.raises(AssumptionError, match="covariate"):
            identify(obs, ModelId.parse("U2+2i"))
        with pytest.raises(AssumptionError, match="covariate"):
            generate_scenario(ModelId.parse("U2+2i"), seed=0)

    def test_covariate_placement_conditions_on_the_shadow(self):
        model = ModelId.parse("U2")
        scenario = generate_scenario(model, seed=1)
        result = identify(scenario.observed(), model)
        assert result.covariates == ("X", "A", "Z")
        assert oracle_compare(scenario, result).passed
