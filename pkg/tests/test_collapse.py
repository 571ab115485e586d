import numpy as np
import pytest
from numpy.testing import assert_allclose

from premeasure.collapse import (
    Evolve,
    Measure,
    collapse_branches,
    oracle_sequence_distribution,
    unknown_result_mixture,
)
from premeasure.model import make_degenerate_observable, make_observable


def _z_obs():
    return make_observable("Z", "S", [1.0, -1.0], np.eye(2, dtype=complex))


def test_collapse_branches_pure():
    branches = collapse_branches(np.array([0.6, 0.8], dtype=complex), _z_obs())
    assert [b.outcome_index for b in branches] == [1, 2]
    assert_allclose(branches[0].probability, 0.36, atol=1e-12)
    assert_allclose(branches[1].probability, 0.64, atol=1e-12)
    assert_allclose(branches[0].post_state, [1, 0], atol=1e-12)
    assert_allclose(branches[1].post_state, [0, 1], atol=1e-12)


def test_collapse_branches_skip_zero_probability():
    branches = collapse_branches(np.array([1.0, 0.0], dtype=complex), _z_obs())
    assert [b.outcome_index for b in branches] == [1]


def test_degenerate_branch_keeps_superposition():
    p1 = np.array([[0.5, 0.5, 0], [0.5, 0.5, 0], [0, 0, 0]], dtype=complex)
    p2 = np.eye(3, dtype=complex) - p1
    obs = make_degenerate_observable("D", "S", [1.0, 2.0], [p1, p2])
    psi = np.ones(3, dtype=complex) / np.sqrt(3)
    branches = collapse_branches(psi, obs)
    first = branches[0]
    assert first.outcome_index == 1
    assert_allclose(first.probability, 2 / 3, atol=1e-12)
    assert_allclose(first.post_state, np.array([1, 1, 0]) / np.sqrt(2), atol=1e-12)


def test_collapse_branches_density():
    rho = np.diag([0.25, 0.75]).astype(complex)
    branches = collapse_branches(rho, _z_obs())
    assert_allclose(branches[0].probability, 0.25, atol=1e-12)
    assert_allclose(branches[0].post_state, np.diag([1.0, 0.0]), atol=1e-12)


def test_unknown_result_mixture():
    v = np.array([1.0, np.sqrt(2.0)], dtype=complex) / np.sqrt(3.0)
    mix = unknown_result_mixture(v, _z_obs())
    assert_allclose(mix.matrix, np.diag([1 / 3, 2 / 3]).astype(complex), atol=1e-12)


def test_oracle_sequence_with_evolution():
    # measure, flip, measure: the second record is the opposite of the first
    flip = np.array([[0, -1j], [-1j, 0]])
    dist = oracle_sequence_distribution(
        np.array([1.0, 0.0], dtype=complex),
        [Measure(_z_obs()), Evolve(flip), Measure(_z_obs())],
        labels=["M1", "M2"],
    )
    assert_allclose(dist.probability((1, 2)), 1.0, atol=1e-12)
    assert dist.probability((1, 1)) <= 1e-14
    assert dist.probability((2, 1)) <= 1e-14


def test_oracle_sequence_weights_sum_to_one():
    rng = np.random.default_rng(8)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    q, _ = np.linalg.qr(g)
    obs_a = make_observable("A", "S", [1.0, 2.0, 3.0, 4.0], [q[:, k] for k in range(4)])
    g2 = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    q2, _ = np.linalg.qr(g2)
    obs_b = make_observable("B", "S", [1.0, 2.0, 3.0, 4.0], [q2[:, k] for k in range(4)])
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi = psi / np.linalg.norm(psi)
    dist = oracle_sequence_distribution(psi, [Measure(obs_a), Measure(obs_b)])
    assert_allclose(sum(p for _, p in dist.entries), 1.0, atol=1e-10)
    # default labels are m1, m2, ...
    assert dist.devices == ("m1", "m2")


def test_oracle_repeated_measurement_is_diagonal():
    psi = np.array([0.6, 0.8j], dtype=complex)
    dist = oracle_sequence_distribution(psi, [Measure(_z_obs()), Measure(_z_obs())])
    assert_allclose(dist.probability((1, 1)), 0.36, atol=1e-12)
    assert_allclose(dist.probability((2, 2)), 0.64, atol=1e-12)
    assert dist.probability((1, 2)) <= 1e-14


def test_oracle_requires_a_measurement():
    with pytest.raises(ValueError):
        oracle_sequence_distribution(
            np.array([1.0, 0.0], dtype=complex), [Evolve(np.eye(2, dtype=complex))]
        )


def test_evolve_rejects_nonunitary():
    with pytest.raises(ValueError):
        oracle_sequence_distribution(
            np.array([1.0, 0.0], dtype=complex),
            [Measure(_z_obs()), Evolve(np.array([[1, 1], [0, 1]], dtype=complex))],
        )
