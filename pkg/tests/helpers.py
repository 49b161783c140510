"""Shared builders and brute-force oracles for the test suite.

The oracles loop over cells explicitly and never call the engine, so they
serve as independent references for frozen expected values.
"""

import itertools

import numpy as np
from hypothesis import strategies as st

from missid.probability import JointTable

seeds = st.integers(min_value=0, max_value=2**31 - 1)


def random_table(seed, names, cards, floor=0.0):
    rng = np.random.default_rng(seed)
    shape = tuple(cards)
    probs = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape) + floor
    return JointTable.from_array(list(names), probs / probs.sum())


def brute_marginal(probs, axes_kept):
    """Sum a dense array onto ``axes_kept`` by enumerating every cell."""
    probs = np.asarray(probs)
    out = np.zeros(tuple(probs.shape[a] for a in axes_kept))
    for cell in itertools.product(*(range(n) for n in probs.shape)):
        out[tuple(cell[a] for a in axes_kept)] += probs[cell]
    return out


def brute_response_joint(p_w, p_z_given_w, p_r_given_w):
    """Joint over (W, R_W, Z) when Z and R_W are independent given W."""
    n_w, n_z = len(p_w), len(p_z_given_w[0])
    joint = np.zeros((n_w, 2, n_z))
    for w in range(n_w):
        for z in range(n_z):
            joint[w, 1, z] = p_w[w] * p_r_given_w[w] * p_z_given_w[w][z]
            joint[w, 0, z] = p_w[w] * (1 - p_r_given_w[w]) * p_z_given_w[w][z]
    return joint


def mcar_observed_array(full_my, p_rm, p_ry):
    """Observed mass over (R_M, M†, R_Y, Y†) under independent MCAR response."""
    n_m, n_y = full_my.shape
    out = np.zeros((2, n_m + 1, 2, n_y + 1))
    for m in range(n_m):
        for y in range(n_y):
            p = full_my[m, y]
            out[1, m, 1, y] += p * p_rm * p_ry
            out[1, m, 0, n_y] += p * p_rm * (1 - p_ry)
            out[0, n_m, 1, y] += p * (1 - p_rm) * p_ry
            out[0, n_m, 0, n_y] += p * (1 - p_rm) * (1 - p_ry)
    return out


def scenario_with_mechanism(full_law, response, model_label="S3"):
    """Scenario with P(R_M, R_Y | substantive) given as an array (..., 2, 2)."""
    from missid.catalog import ModelId, catalog_dag
    from missid.probability import CondTable, VariableSpec
    from missid.scenario import MissingnessMechanism, Scenario

    model = ModelId.parse(model_label)
    shape = tuple(v.cardinality for v in full_law.variables)
    probs = np.broadcast_to(response, shape + (2, 2))
    cond = CondTable([VariableSpec("R_M", 2), VariableSpec("R_Y", 2)], list(full_law.variables), probs)
    return Scenario(model, catalog_dag(model), full_law, MissingnessMechanism(cond), seed=0)


def mcar_scenario(full_law, p_rm, p_ry, model_label="S3"):
    """Scenario whose indicators are independent coins, whatever the full law."""
    return scenario_with_mechanism(full_law, np.outer([1 - p_rm, p_rm], [1 - p_ry, p_ry]), model_label)
