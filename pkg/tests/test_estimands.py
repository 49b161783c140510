import itertools

import numpy as np
import pytest
from helpers import random_table, seeds
from hypothesis import given
from hypothesis import strategies as st

from missid.catalog import ModelId
from missid.errors import ArgumentError, CoverageError
from missid.estimands import compute_estimands, covariate_law, estimands_from_full_law
from missid.probability import JointTable, condition
from missid.scenario import generate_scenario
from missid.shadow_models import identify


def brute_crossed(probs, values):
    """μ(a, a′) = Σ_x P(x) Σ_m P(m|x,a′) E[Y|x,a,m] by explicit loops over a dense (X, A, M, Y) array."""
    n_x, n_a, n_m, n_y = probs.shape
    out = np.zeros((n_a, n_a))
    for a, a2 in itertools.product(range(n_a), repeat=2):
        for x in range(n_x):
            p_x = probs[x].sum()
            for m in range(n_m):
                p_m = probs[x, a2, m].sum() / probs[x, a2].sum()
                e_y = sum(probs[x, a, m, y] * values[y] for y in range(n_y)) / probs[x, a, m].sum()
                out[a, a2] += p_x * p_m * e_y
    return out


def law(seed, cards=(2, 2, 2, 2)):
    return random_table(seed, ["X", "A", "M", "Y"], cards, floor=1e-3)


class TestExamples:
    def test_constant_outcome(self):
        result = estimands_from_full_law(law(0), ["X", "A"], outcome_values=[2.5, 2.5])
        for array in (result.mu_crossed, result.mu_controlled, result.mu_marginal):
            np.testing.assert_allclose(array, 2.5, atol=1e-14)

    def test_degenerate_mediator(self):
        result = estimands_from_full_law(law(1, (2, 2, 1, 3)), ["X", "A"])
        np.testing.assert_allclose(result.mu_crossed[:, 0], result.mu_crossed[:, 1], atol=1e-14)
        np.testing.assert_allclose(result.mu_crossed[:, 0], result.mu_marginal, atol=1e-14)

    def test_binary_triple_sum(self):
        table = law(2)
        expected = brute_crossed(table.probabilities, [0.0, 1.0])
        result = estimands_from_full_law(table, ["X", "A"])
        np.testing.assert_allclose(result.mu_crossed, expected, atol=1e-14)
        assert result.contrast() == pytest.approx(expected[1, 0] - expected[0, 0], abs=1e-14)

    def test_controlled_mediator(self):
        table = law(3)
        probs = table.probabilities
        p_x = probs.sum(axis=(1, 2, 3))
        e_y = probs[..., 1] / probs.sum(axis=-1)
        expected = np.einsum("x,xam->am", p_x, e_y)
        np.testing.assert_allclose(estimands_from_full_law(table, ["X", "A"]).mu_controlled, expected, atol=1e-14)

    def test_no_baseline_covariates(self):
        table = JointTable.from_array(["A", "M", "Y"], law(4).array(["A", "M", "Y"]))
        result = estimands_from_full_law(table, ["A"])
        assert result.total_expectation_gap <= 1e-14

    def test_json(self):
        data = estimands_from_full_law(law(5), ["X", "A"]).to_json()
        assert set(data) == {"mu_crossed", "mu_controlled", "mu_marginal", "outcome_values", "total_expectation_gap"}
        assert data["outcome_values"] == [0.0, 1.0]


class TestErrors:
    def test_unsupported_cell_with_covariate_mass(self):
        probs = np.array(law(6).probabilities)
        probs[0, 1] = 0.0
        table = JointTable.from_array(["X", "A", "M", "Y"], probs / probs.sum())
        with pytest.raises(CoverageError):
            estimands_from_full_law(table, ["X", "A"])

    def test_outcome_values_length(self):
        with pytest.raises(ArgumentError):
            estimands_from_full_law(law(0), ["X", "A"], outcome_values=[1.0, 2.0, 3.0])

    def test_densities_must_condition_on_treatment(self):
        table = law(0)
        p_x = JointTable.from_array(["A"], table.array(["A"]))
        with pytest.raises(ArgumentError):
            compute_estimands(p_x, condition(table, "M", ["X"]), condition(table, "Y", ["X", "M"]))

    def test_missing_shadow_covariate(self):
        obs = generate_scenario(ModelId.parse("M2+2i"), seed=0).observed()
        with pytest.raises(CoverageError):
            covariate_law(obs, ["X", "Z"])


class TestProperties:
    @given(seeds)
    def test_diagonal_is_total_effect(self, seed):
        result = estimands_from_full_law(law(seed, (3, 2, 3, 3)), ["X", "A"])
        assert result.total_expectation_gap <= 1e-12

    @given(seeds, st.floats(-5, 5), st.floats(0.1, 5))
    def test_linear_in_outcome_scores(self, seed, shift, scale):
        table = law(seed, (2, 2, 2, 3))
        base = estimands_from_full_law(table, ["X", "A"], outcome_values=[0.0, 1.0, 4.0])
        moved = estimands_from_full_law(table, ["X", "A"], outcome_values=[shift, shift + scale, shift + 4 * scale])
        np.testing.assert_allclose(moved.mu_crossed, shift + scale * base.mu_crossed, atol=1e-9)

    @given(seeds)
    def test_within_outcome_range(self, seed):
        values = np.random.default_rng(seed).normal(size=3)
        result = estimands_from_full_law(law(seed, (2, 2, 2, 3)), ["X", "A"], outcome_values=values)
        for array in (result.mu_crossed, result.mu_controlled, result.mu_marginal):
            assert np.all(array >= values.min() - 1e-12) and np.all(array <= values.max() + 1e-12)

    @pytest.mark.parametrize("label", ["S4", "Z1", "Z3-strong", "D2", "U2"])
    def test_identified_matches_full_law(self, label):
        model = ModelId.parse(label)
        scenario = generate_scenario(model, seed=7)
        obs = scenario.observed()
        result = identify(obs, model)
        others = [n for n in result.covariates if n != "A"]
        identified = compute_estimands(covariate_law(obs, others), result.identified_M, result.identified_Y)
        truth = estimands_from_full_law(scenario.full_law, result.covariates)
        np.testing.assert_allclose(identified.mu_crossed, truth.mu_crossed, atol=1e-10)
