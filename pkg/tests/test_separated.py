import numpy as np
import pytest
from helpers import mcar_scenario, random_table, scenario_with_mechanism, seeds
from hypothesis import given

from missid.catalog import ModelId, catalog_assumptions
from missid.errors import ArgumentError, PositivityError
from missid.observed import Patterns
from missid.probability import check_ci, condition
from missid.scenario import generate_scenario, oracle_compare
from missid.separated import (
    identify_S1,
    identify_S2,
    identify_S3,
    identify_S4,
    identify_S5,
    identify_S6,
    odds_tilt_density_ratio,
    odds_tilt_response_ratio,
    pattern_odds_identity,
    s2_factorization,
    s5_density_ratio_g,
)

IDENTIFIERS = {
    "S1": identify_S1,
    "S2": identify_S2,
    "S3": identify_S3,
    "S4": identify_S4,
    "S5": identify_S5,
    "S6": identify_S6,
}
FAMILIES = sorted(IDENTIFIERS)
CARDS = {"X": 2, "A": 2, "M": 3, "Y": 2}


def true_response(scenario):
    joint = scenario.joint()
    return condition(joint, ["R_M", "R_Y"], ["X", "A", "M", "Y"]).probabilities[..., 1, 1]


class TestMcar:
    @pytest.mark.parametrize("family", FAMILIES)
    def test_tilts_are_flat_and_recovery_exact(self, family):
        law = random_table(8, ["X", "A", "M", "Y"], [2, 2, 3, 2])
        scenario = mcar_scenario(law, 0.8, 0.7, family)
        result = IDENTIFIERS[family](scenario.observed())
        for tilt in (result.h, result.h_b, result.k, result.g / result.g.mean(), result.g_b / result.g_b.mean()):
            np.testing.assert_allclose(tilt, 1.0, atol=1e-12)
        assert oracle_compare(scenario, result, 1e-12).passed


class TestRecovery:
    @pytest.mark.parametrize("family", FAMILIES)
    def test_oracle_on_catalog_scenarios(self, family):
        for seed in range(3):
            scenario = generate_scenario(ModelId(family), CARDS, seed=seed)
            result = IDENTIFIERS[family](scenario.observed())
            assert oracle_compare(scenario, result, 1e-10).passed, seed
            assert result.drift_M <= 1e-10 and result.drift_Y <= 1e-10

    @given(seeds)
    def test_implied_response_matches_mechanism(self, seed):
        family = FAMILIES[seed % len(FAMILIES)]
        scenario = generate_scenario(ModelId(family), seed=seed % 997)
        obs = scenario.observed()
        result = IDENTIFIERS[family](obs)
        implied = result.response_probability(Patterns(obs.masked(("X", "A"))))
        np.testing.assert_allclose(implied, true_response(scenario), atol=1e-10)

    @given(seeds)
    def test_identified_densities_are_normalized(self, seed):
        scenario = generate_scenario(ModelId("S5"), seed=seed % 997)
        result = identify_S5(scenario.observed())
        np.testing.assert_allclose(result.identified_M.probabilities.sum(-1), 1.0, atol=1e-14)
        np.testing.assert_allclose(result.identified_Y.probabilities.sum(-1), 1.0, atol=1e-14)

    def test_available_case_fails_when_response_tracks_the_outcome(self):
        scenario = generate_scenario(ModelId("S2"), CARDS, seed=1, strong_edges=[("Y", "R_M")])
        assert not oracle_compare(scenario, identify_S1(scenario.observed())).passed


class TestModelSpecific:
    def test_s2_factorization_matches_identification(self):
        scenario = generate_scenario(ModelId("S2"), CARDS, seed=4)
        obs = scenario.observed()
        m_density, y_density = s2_factorization(obs)
        result = identify_S2(obs)
        np.testing.assert_allclose(m_density, result.identified_M.probabilities, atol=1e-12)
        np.testing.assert_allclose(y_density, result.identified_Y.probabilities, atol=1e-12)
        np.testing.assert_allclose(m_density, condition(scenario.full_law, "M", ["X", "A"]).probabilities, atol=1e-12)

    def test_s4_response_is_a_product(self):
        scenario = generate_scenario(ModelId("S4"), CARDS, seed=2)
        joint = scenario.joint()
        rm1_given_y = condition(joint, "R_M", ["X", "A", "Y"]).probabilities[..., 1]
        ry1_given_m = condition(joint, "R_Y", ["X", "A", "M"]).probabilities[..., 1]
        product = rm1_given_y[:, :, None, :] * ry1_given_m[..., None]
        np.testing.assert_allclose(true_response(scenario), product, atol=1e-12)

    @given(seeds)
    def test_s5_routes_agree(self, seed):
        scenario = generate_scenario(ModelId("S5"), seed=seed % 997)
        obs = scenario.observed()
        risk = identify_S5(obs)
        density = identify_S5(obs, route="density_ratio")
        np.testing.assert_allclose(risk.identified_Y.probabilities, density.identified_Y.probabilities, atol=1e-12)
        np.testing.assert_allclose(risk.g[..., 0, :], s5_density_ratio_g(obs), atol=1e-12)

    def test_s5_unknown_route(self):
        obs = generate_scenario(ModelId("S5"), seed=0).observed()
        with pytest.raises(ArgumentError):
            identify_S5(obs, route="guess")

    def test_s5_needs_outcome_response_without_mediator(self):
        law = random_table(1, ["X", "A", "M", "Y"], [1, 2, 2, 2])
        # R_M = 0 forces R_Y = 0.
        response = np.array([[0.3, 0.0], [0.2, 0.5]])
        with pytest.raises(PositivityError, match="S5-3"):
            identify_S5(scenario_with_mechanism(law, response, "S5").observed())

    def test_s6_outcome_tilt_is_one(self):
        result = identify_S6(generate_scenario(ModelId("S6"), CARDS, seed=3).observed())
        np.testing.assert_array_equal(result.k, 1.0)

    def test_s6_needs_mediator_response_without_outcome(self):
        law = random_table(1, ["X", "A", "M", "Y"], [1, 2, 2, 2])
        # R_Y = 0 forces R_M = 0.
        response = np.array([[0.3, 0.2], [0.0, 0.5]])
        with pytest.raises(PositivityError, match="S6-3"):
            identify_S6(scenario_with_mechanism(law, response, "S6").observed())

    def test_s1_equivalent_statements_agree(self):
        block = catalog_assumptions(ModelId("S1"))
        for seed in range(3):
            joint = generate_scenario(ModelId("S1"), CARDS, seed=seed).joint()
            for group in (block.ci_statements, *block.equivalent_statements):
                assert all(check_ci(joint, s.a, s.b, s.c, 1e-10).holds for s in group)


class TestOddsIdentities:
    @given(seeds)
    def test_response_ratio_equals_odds_ratio(self, seed):
        law = random_table(seed, ["W", "V", "R", "Q"], [3, 2, 2, 2], floor=1e-3)
        assert odds_tilt_response_ratio(law, "R", "W", "V", "Q").identity_gap <= 1e-9

    @given(seeds)
    def test_density_ratio_equals_odds_ratio(self, seed):
        law = random_table(seed, ["W", "V", "R"], [3, 2, 2], floor=1e-3)
        assert odds_tilt_density_ratio(law, "R", "W", "V").identity_gap <= 1e-9

    def test_binary_indicator_required(self):
        law = random_table(0, ["W", "R"], [2, 3])
        with pytest.raises(ArgumentError):
            odds_tilt_density_ratio(law, "R", "W", [])

    @given(seeds)
    def test_pattern_odds_identity(self, seed):
        law = random_table(seed, ["X", "A", "M", "Y", "R_M", "R_Y"], [2, 2, 2, 3, 2, 2], floor=1e-3)
        assert pattern_odds_identity(law) <= 1e-10
