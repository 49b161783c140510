import json

import numpy as np
import pytest
from helpers import brute_marginal, random_table, seeds
from hypothesis import given
from hypothesis import strategies as st

from missid.errors import (
    ArgumentError,
    ConstructionError,
    PositivityError,
    UnknownNameError,
)
from missid.probability import (
    CondTable,
    JointTable,
    MaskedValue,
    VariableSpec,
    check_ci,
    condition,
    marginalize,
    missingness_odds,
    sample,
)

FOUR_CELL = JointTable.from_array(["M", "Y"], [[0.1, 0.2], [0.3, 0.4]])


class TestConstruction:
    def test_cardinality_must_be_positive(self):
        with pytest.raises(ConstructionError):
            VariableSpec("M", 0)

    def test_duplicate_names_rejected(self):
        with pytest.raises(ConstructionError):
            JointTable([VariableSpec("M", 2), VariableSpec("M", 2)], [0.25] * 4)

    def test_negative_entries_rejected(self):
        with pytest.raises(ConstructionError):
            JointTable.from_array(["M"], [1.5, -0.5])

    def test_small_drift_is_renormalized(self):
        table = JointTable.from_array(["M"], [0.5, 0.5 + 1e-11])
        assert table.probabilities.sum() == pytest.approx(1.0, abs=1e-15)

    def test_large_drift_is_refused(self):
        with pytest.raises(ConstructionError):
            JointTable.from_array(["M"], [0.5, 0.6])

    def test_tables_are_immutable(self):
        with pytest.raises((AttributeError, ValueError)):
            FOUR_CELL.probabilities[0, 0] = 1.0
        with pytest.raises(AttributeError):
            FOUR_CELL.variables = ()

    def test_json_is_row_major_last_fastest(self):
        data = FOUR_CELL.to_json()
        assert data["probabilities"] == [0.1, 0.2, 0.3, 0.4]
        assert data["variables"] == [{"name": "M", "cardinality": 2}, {"name": "Y", "cardinality": 2}]
        again = JointTable.from_json(json.loads(json.dumps(data)))
        np.testing.assert_array_equal(again.probabilities, FOUR_CELL.probabilities)

    def test_conditional_rows_must_sum_to_one(self):
        with pytest.raises(ConstructionError):
            CondTable([VariableSpec("Y", 2)], [VariableSpec("M", 2)], [[0.5, 0.5], [0.9, 0.3]])

    def test_masked_value_sentinel(self):
        MaskedValue.missing(3).validate(3)
        MaskedValue.observed(2).validate(3)
        with pytest.raises(ArgumentError):
            MaskedValue(0, 1).validate(3)
        with pytest.raises(ArgumentError):
            MaskedValue(1, 3).validate(3)


class TestMarginalize:
    def test_uniform_keeps_uniform(self):
        uniform = JointTable.from_array(["M", "Y"], np.full((2, 2), 0.25))
        np.testing.assert_allclose(marginalize(uniform, {"M"}).probabilities, [0.5, 0.5])

    def test_keep_all_is_identity(self):
        kept = marginalize(FOUR_CELL, {"M", "Y"})
        np.testing.assert_array_equal(kept.probabilities, FOUR_CELL.probabilities)
        assert kept.names == FOUR_CELL.names

    def test_four_cell_outcome_margin(self):
        oracle = brute_marginal([[0.1, 0.2], [0.3, 0.4]], [1])
        np.testing.assert_allclose(oracle, [0.4, 0.6])
        np.testing.assert_allclose(marginalize(FOUR_CELL, {"Y"}).probabilities, [0.4, 0.6], atol=1e-15)

    def test_unknown_name(self):
        with pytest.raises(UnknownNameError):
            marginalize(FOUR_CELL, {"Z"})
        assert issubclass(UnknownNameError, NameError)


class TestCondition:
    def test_independent_law_gives_marginal(self):
        law = JointTable.from_array(["M", "Y"], np.outer([0.3, 0.7], [0.2, 0.5, 0.3]))
        cond = condition(law, "Y", ["M"])
        np.testing.assert_allclose(cond.probabilities, [[0.2, 0.5, 0.3]] * 2, atol=1e-15)

    def test_empty_givens_is_marginal(self):
        cond = condition(FOUR_CELL, "Y", [])
        np.testing.assert_allclose(cond.probabilities, [0.4, 0.6])

    def test_four_cell_bayes(self):
        cond = condition(FOUR_CELL, "Y", ["M"])
        assert cond.probabilities[0, 1] == pytest.approx(0.2 / 0.3, abs=1e-15)

    def test_overlap_rejected(self):
        with pytest.raises(ArgumentError):
            condition(FOUR_CELL, ["M"], ["M", "Y"])

    def test_zero_mass_rows_flagged(self):
        law = JointTable.from_array(["M", "Y"], [[0.5, 0.5], [0.0, 0.0]])
        cond = condition(law, "Y", ["M"])
        assert cond.unsupported.tolist() == [False, True]
        np.testing.assert_array_equal(cond.probabilities[1], [0.0, 0.0])


class TestOdds:
    def test_unconditional(self):
        law = JointTable.from_array(["R"], [0.2, 0.8])
        assert missingness_odds(law, "R") == pytest.approx(0.25)

    def test_independent_indicator_gives_constant_odds(self):
        law = JointTable.from_array(["Y", "R"], np.outer([0.3, 0.7], [0.4, 0.6]))
        odds = missingness_odds(law, "R", ["Y"])
        assert odds[0] == pytest.approx(odds[1], abs=1e-15)

    def test_outcome_dependent_response(self):
        # Oracle: odds = (1 - p) / p per cell.
        expected = [(1 - 0.9) / 0.9, (1 - 0.6) / 0.6]
        np.testing.assert_allclose(expected, [1 / 9, 2 / 3])
        law = JointTable.from_array(["Y", "R"], [[0.5 * 0.1, 0.5 * 0.9], [0.5 * 0.4, 0.5 * 0.6]])
        np.testing.assert_allclose(missingness_odds(law, "R", ["Y"]), [1 / 9, 2 / 3], rtol=1e-14)

    def test_zero_response_names_the_cell(self):
        law = JointTable.from_array(["Y", "R"], [[0.5, 0.0], [0.25, 0.25]])
        with pytest.raises(PositivityError, match="Y"):
            missingness_odds(law, "R", ["Y"])

    @given(seeds)
    def test_odds_invert_to_response_probability(self, seed):
        law = random_table(seed, ["X", "Y", "R"], [2, 3, 2], floor=1e-3)
        odds = missingness_odds(law, "R", ["X", "Y"])
        response = condition(law, "R", ["X", "Y"]).probabilities[..., 1]
        np.testing.assert_allclose(1.0 / (1.0 + odds), response, atol=1e-14)


class TestCheckCI:
    def test_product_law_holds_exactly(self):
        law = JointTable.from_array(["A", "B"], np.outer([0.3, 0.7], [0.6, 0.4]))
        result = check_ci(law, "A", "B", (), 1e-12)
        assert result.holds
        assert result.max_deviation <= 1e-16

    def test_sets_must_be_disjoint(self):
        with pytest.raises(ArgumentError):
            check_ci(FOUR_CELL, "M", "M")

    def test_perfect_correlation(self):
        # Oracle: P(0,0) - P(A=0)P(B=0) = 0.5 - 0.25.
        law = JointTable.from_array(["A", "B"], [[0.5, 0.0], [0.0, 0.5]])
        result = check_ci(law, "A", "B", (), 1e-9)
        assert result.max_deviation == pytest.approx(0.25, abs=1e-15)
        assert not result.holds

    def test_unsupported_conditioning_cells_skipped(self):
        probs = np.zeros((2, 2, 2))
        probs[0] = np.outer([0.5, 0.5], [0.5, 0.5])
        law = JointTable.from_array(["C", "A", "B"], probs)
        assert check_ci(law, "A", "B", "C", 1e-12).holds

    @given(seeds)
    def test_weak_union_lemma(self, seed):
        rng = np.random.default_rng(seed)
        p_a = rng.dirichlet(np.ones(2))
        p_bc = rng.dirichlet(np.ones(6)).reshape(2, 3)
        law = JointTable.from_array(["A", "B", "C"], p_a[:, None, None] * p_bc[None])
        assert check_ci(law, "A", ["B", "C"], (), 1e-12).holds
        assert check_ci(law, "A", "B", "C", 1e-9).holds


class TestSample:
    def test_zero_draws(self):
        assert sample(FOUR_CELL, 0, 1) == []

    def test_point_mass(self):
        law = JointTable.from_array(["M", "Y"], [[0.0, 0.0], [1.0, 0.0]])
        assert set(sample(law, 50, 3)) == {(1, 0)}

    def test_frequencies_match(self):
        draws = sample(FOUR_CELL, 100_000, 11)
        freq = np.zeros((2, 2))
        for cell in draws:
            freq[cell] += 1
        np.testing.assert_allclose(freq.ravel() / len(draws), [0.1, 0.2, 0.3, 0.4], atol=0.01)

    def test_deterministic_given_seed(self):
        assert sample(FOUR_CELL, 200, 5) == sample(FOUR_CELL, 200, 5)

    def test_negative_count(self):
        with pytest.raises(ArgumentError):
            sample(FOUR_CELL, -1, 0)


@given(seeds, st.lists(st.integers(1, 3), min_size=2, max_size=4))
def test_chain_rule_reconstructs_joint(seed, cards):
    names = [f"V{i}" for i in range(len(cards))]
    law = random_table(seed, names, cards)
    cond = condition(law, names[-1], names[:-1])
    head = marginalize(law, names[:-1]).probabilities
    rebuilt = head[..., None] * cond.probabilities
    np.testing.assert_allclose(rebuilt, law.probabilities, atol=1e-12)


@given(seeds)
def test_total_expectation(seed):
    law = random_table(seed, ["X", "A", "M", "Y"], [3, 2, 3, 4])
    values = np.arange(4.0)
    p_x = law.array(["X"])
    p_m = condition(law, "M", ["X", "A"]).probabilities
    e_y = condition(law, "Y", ["X", "A", "M"]).probabilities @ values
    nested = np.einsum("x,xam,xam->a", p_x, p_m, e_y)
    e_y_xa = condition(law, "Y", ["X", "A"]).probabilities @ values
    direct = np.einsum("x,xa->a", p_x, e_y_xa)
    np.testing.assert_allclose(nested, direct, atol=1e-12)
