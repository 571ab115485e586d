"""Checks that the collapse-free chain reproduces collapse-postulate numbers.

Three kinds of report:

* repeatability: the conditional-outcome matrix between two devices in one
  chain, with its deviation from the identity.  The matrix itself is the
  finding; a weak first device shows exactly where repeatability breaks.
* collapse equivalence: every joint, marginal and pairwise conditional of the
  chain's ideal system devices, compared against the branch-tree oracle.
* partial trace: the system marginal of a one-device chain compared against
  the unknown-result mixture of the projected branches.

Conditionals on events of probability <= 1e-12 are excluded from reports
rather than counted as failures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import engine
from .born import (
    PROB_SLACK,
    OutcomeEvent,
    conditional_probability,
    joint_distribution,
    reduced_system_state,
)
from .chain import ChainState
from .collapse import oracle_sequence_distribution, unknown_result_mixture
from .dsl import Scenario


class WeakDeviceError(ValueError):
    """Raised when an equivalence claim is requested for a weak device."""


@dataclass(frozen=True)
class QueryRecord:
    """One compared quantity; values are floats or complex matrix entries."""

    query: str
    chain_value: complex
    oracle_value: complex
    abs_deviation: float


@dataclass(frozen=True)
class EquivalenceReport:
    scenario_id: str
    records: tuple[QueryRecord, ...]
    max_deviation: float
    tol: float
    passed: bool

    def __post_init__(self):
        if self.passed != (self.max_deviation <= self.tol):
            raise ValueError("passed flag contradicts max_deviation vs tol")


def _make_report(scenario_id: str, records, tol: float) -> EquivalenceReport:
    records = tuple(records)
    max_dev = max((r.abs_deviation for r in records), default=0.0)
    return EquivalenceReport(scenario_id, records, max_dev, tol, max_dev <= tol)


@dataclass(frozen=True)
class RepeatabilityReport:
    """Rows are conditional distributions of the second device given the
    first; a ``None`` row marks a conditioning outcome of zero probability."""

    scenario_id: str
    first_device: str
    second_device: str
    rows: tuple[tuple[float, ...] | None, ...]
    max_identity_deviation: float
    tol: float
    passed: bool


def repeatability_matrix(
    chain: ChainState,
    first_device: str,
    second_device: str,
    *,
    tol: float = 1e-10,
    scenario_id: str = "chain",
) -> RepeatabilityReport:
    """Conditional matrix C[j][k] = p(second=k | first=j) and its deviation
    from the identity over the rows that are defined."""
    if first_device == second_device:
        raise ValueError("repeatability needs two distinct devices")
    n1 = chain.outcome_count(first_device)
    n2 = chain.outcome_count(second_device)
    if n1 != n2:
        raise ValueError(
            f"devices {first_device!r} and {second_device!r} have different "
            f"outcome counts ({n1} vs {n2})"
        )
    first_marginal = joint_distribution(chain, [first_device])
    rows: list[tuple[float, ...] | None] = []
    max_dev = 0.0
    for j in range(1, n1 + 1):
        if first_marginal.probability((j,)) <= PROB_SLACK:
            rows.append(None)
            continue
        row = tuple(
            conditional_probability(
                chain,
                OutcomeEvent(second_device, k),
                [OutcomeEvent(first_device, j)],
            )
            for k in range(1, n2 + 1)
        )
        rows.append(row)
        for k, p in enumerate(row, start=1):
            max_dev = max(max_dev, abs(p - (1.0 if k == j else 0.0)))
    return RepeatabilityReport(
        scenario_id,
        first_device,
        second_device,
        tuple(rows),
        max_dev,
        tol,
        max_dev <= tol,
    )


def collapse_equivalence_report(
    scenario: Scenario,
    *,
    tol: float = 1e-10,
    scenario_id: str = "scenario",
) -> EquivalenceReport:
    """Compare the chain against the collapse oracle on every joint, marginal
    and pairwise conditional of the scenario's ideal system devices."""
    if scenario.has_weak_device():
        raise WeakDeviceError(
            "equivalence with the collapse postulate is only claimed for ideal "
            "premeasurements; this scenario attaches a weak device"
        )
    chain = engine.build_chain(scenario)
    initial, steps, labels = engine.oracle_plan(scenario)
    if not labels:
        raise ValueError("scenario attaches no system devices; nothing to compare")
    oracle = oracle_sequence_distribution(initial, steps, labels=labels)
    chain_joint = joint_distribution(chain, labels)

    records = []
    for key, p_chain in chain_joint.entries:
        p_oracle = oracle.probability(key)
        label = "joint " + " ".join(f"{d}={k}" for d, k in zip(labels, key))
        records.append(QueryRecord(label, p_chain, p_oracle, abs(p_chain - p_oracle)))

    for dev in labels:
        cm = chain_joint.marginal(dev)
        om = oracle.marginal(dev)
        for (k,), p_chain in cm.entries:
            p_oracle = om.probability((k,))
            records.append(
                QueryRecord(f"marginal {dev}={k}", p_chain, p_oracle, abs(p_chain - p_oracle))
            )

    for i, earlier in enumerate(labels):
        for later in labels[i + 1:]:
            pair_chain = joint_distribution(chain, [earlier, later])
            pair_oracle = _pair_marginal(oracle, labels, earlier, later)
            n_e = chain.outcome_count(earlier)
            n_l = chain.outcome_count(later)
            for j in range(1, n_e + 1):
                pg_chain = sum(pair_chain.probability((j, k)) for k in range(1, n_l + 1))
                pg_oracle = sum(pair_oracle.get((j, k), 0.0) for k in range(1, n_l + 1))
                if pg_chain <= PROB_SLACK or pg_oracle <= PROB_SLACK:
                    continue
                for k in range(1, n_l + 1):
                    c_chain = pair_chain.probability((j, k)) / pg_chain
                    c_oracle = pair_oracle.get((j, k), 0.0) / pg_oracle
                    records.append(
                        QueryRecord(
                            f"conditional {later}={k} given {earlier}={j}",
                            c_chain,
                            c_oracle,
                            abs(c_chain - c_oracle),
                        )
                    )
    return _make_report(scenario_id, records, tol)


def _pair_marginal(dist, labels, first: str, second: str) -> dict[tuple[int, int], float]:
    i, j = labels.index(first), labels.index(second)
    out: dict[tuple[int, int], float] = {}
    for key, p in dist.entries:
        sub = (key[i], key[j])
        out[sub] = out.get(sub, 0.0) + p
    return out


def partial_trace_check(
    chain: ChainState,
    *,
    tol: float = 1e-10,
    scenario_id: str = "chain",
) -> EquivalenceReport:
    """Entrywise comparison of the traced-out system state of a one-device
    chain with the collapse oracle's unknown-result mixture."""
    if len(chain.devices) != 1:
        raise ValueError("partial-trace check needs a chain with exactly one device")
    attached = chain.devices[0]
    if attached.mode != "ideal":
        raise ValueError("partial-trace check needs an ideal device")
    lhs = reduced_system_state(chain).matrix
    rhs = unknown_result_mixture(chain.initial_system_state, attached.spec.observable).matrix
    records = []
    d = lhs.shape[0]
    for j in range(d):
        for k in range(d):
            dev = abs(lhs[j, k] - rhs[j, k])
            records.append(
                QueryRecord(f"reduced[{j}][{k}]", lhs[j, k], rhs[j, k], float(dev))
            )
    return _make_report(scenario_id, records, tol)
