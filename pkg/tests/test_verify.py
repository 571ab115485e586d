import numpy as np
import pytest
from numpy.testing import assert_allclose

from premeasure import dsl, engine
from premeasure.born import OutcomeEvent, conditional_probability
from premeasure.chain import Disturbance, attach_device, init_chain, make_reader_device
from premeasure.model import make_device, make_observable
from premeasure.sampling import random_scenario
from premeasure.verify import (
    WeakDeviceError,
    collapse_equivalence_report,
    partial_trace_check,
    repeatability_matrix,
)

SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def _z_obs():
    return make_observable("Z", "S", [1.0, -1.0], np.eye(2, dtype=complex))


def _ideal_pair(state):
    chain = init_chain(np.asarray(state, dtype=complex))
    chain = attach_device(chain, make_device("M1", _z_obs()))
    chain = attach_device(chain, make_device("M2", _z_obs()))
    return chain


def test_repeatability_identity_for_ideal_pair():
    rep = repeatability_matrix(_ideal_pair([0.6, 0.8]), "M1", "M2")
    assert rep.passed
    assert rep.max_identity_deviation <= 1e-12
    assert_allclose(rep.rows[0], [1.0, 0.0], atol=1e-12)
    assert_allclose(rep.rows[1], [0.0, 1.0], atol=1e-12)


def test_repeatability_marks_zero_probability_rows():
    rep = repeatability_matrix(_ideal_pair([1.0, 0.0]), "M1", "M2")
    assert rep.rows[1] is None
    assert rep.passed


def test_repeatability_breaks_for_weak_flip():
    chain = init_chain(np.array([0.6, 0.8], dtype=complex))
    dist = Disturbance((np.eye(2, dtype=complex), SX))
    chain = attach_device(
        chain, make_device("MW", _z_obs()), mode="weak", disturbance=dist
    )
    chain = attach_device(chain, make_device("M2", _z_obs()))
    rep = repeatability_matrix(chain, "MW", "M2")
    assert not rep.passed
    assert_allclose(rep.rows[0], [1.0, 0.0], atol=1e-12)
    assert_allclose(rep.rows[1], [1.0, 0.0], atol=1e-12)
    assert_allclose(rep.max_identity_deviation, 1.0, atol=1e-12)


def test_repeatability_rejects_same_device():
    with pytest.raises(ValueError, match="distinct"):
        repeatability_matrix(_ideal_pair([0.6, 0.8]), "M1", "M1")


def test_equivalence_report_on_simple_scenario():
    s = dsl.parse_scenario(
        "system dim 2\nstate pure [0.6, 0.8]\n"
        "observable Z eigen [1, -1] basis [[1,0],[0,1]]\n"
        "observable X eigen [1, -1] basis "
        "[[0.70710678,0.70710678],[0.70710678,-0.70710678]]\n"
        "device M1 measures Z\ndevice M2 measures X\n"
    )
    rep = collapse_equivalence_report(s)
    assert rep.passed
    assert rep.max_deviation <= 1e-12
    kinds = {r.query.split()[0] for r in rep.records}
    assert kinds == {"joint", "marginal", "conditional"}


def test_equivalence_report_random_scenarios():
    for trial in range(15):
        rng = np.random.default_rng([123, trial])
        s = random_scenario(rng, max_dim=4, max_depth=3)
        rep = collapse_equivalence_report(s, tol=1e-9)
        assert rep.passed, (trial, rep.max_deviation)


def test_equivalence_rejects_weak_devices():
    s = dsl.parse_scenario(
        "system dim 2\nstate pure [0.6, 0.8]\n"
        "observable Z eigen [1, -1] basis [[1,0],[0,1]]\n"
        "device MW measures Z weak [[1,0],[0,1]] [[0,1],[1,0]]\n"
    )
    with pytest.raises(WeakDeviceError):
        collapse_equivalence_report(s)


def test_partial_trace_check_single_device():
    chain = init_chain(np.array([1.0, np.sqrt(2.0)], dtype=complex) / np.sqrt(3.0))
    chain = attach_device(chain, make_device("M1", _z_obs()))
    rep = partial_trace_check(chain)
    assert rep.passed
    assert rep.max_deviation <= 1e-12


def test_partial_trace_check_needs_one_device():
    rep_chain = _ideal_pair([0.6, 0.8])
    with pytest.raises(ValueError, match="exactly one"):
        partial_trace_check(rep_chain)


def test_reader_leaves_system_conditionals_unchanged():
    rng = np.random.default_rng(31)
    for _ in range(10):
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        q, _r = np.linalg.qr(g)
        obs_a = make_observable("A", "S", [1.0, 2.0, 3.0], [q[:, k] for k in range(3)])
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        q, _r = np.linalg.qr(g)
        obs_b = make_observable("B", "S", [1.0, 2.0, 3.0], [q[:, k] for k in range(3)])
        psi = rng.normal(size=3) + 1j * rng.normal(size=3)
        psi = psi / np.linalg.norm(psi)

        bare = init_chain(psi)
        bare = attach_device(bare, make_device("M1", obs_a))
        bare = attach_device(bare, make_device("MB", obs_b))

        read = init_chain(psi)
        read = attach_device(read, make_device("M1", obs_a))
        rdev = make_reader_device("R", read.device("M1").spec)
        read = attach_device(read, rdev, mode="reader", target="M1")
        read = attach_device(read, make_device("MB", obs_b))

        for j in range(1, 4):
            pj = conditional_probability(
                bare, OutcomeEvent("MB", j), [OutcomeEvent("M1", 1)]
            )
            qj = conditional_probability(
                read, OutcomeEvent("MB", j), [OutcomeEvent("M1", 1)]
            )
            assert abs(pj - qj) <= 1e-12
