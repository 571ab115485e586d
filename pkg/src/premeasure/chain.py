"""Measurement chains: one system factor plus any number of pointer devices.

A chain starts as the bare system and grows one tensor factor per attached
device.  Devices always attach in their ready state and interact through a
unitary built from the measured observable:

* ideal interaction: ``U = sum_k P_k (x) Shift^k`` with ``Shift`` the cyclic
  add-1 shift on the pointer basis, so an eigenstate of outcome ``k`` drives
  the pointer from ready straight to pointer state ``k`` while the system
  component is left untouched;
* weak interaction: the ideal unitary followed by a pointer-controlled
  disturbance ``V = sum_k R_k (x) |k><k| + 1 (x) |0><0|`` that may rotate the
  system inside each recorded branch (``R_k`` unitary);
* reader: an ideal interaction whose "system" is the pointer factor of an
  earlier device, copying that device's record into a fresh pointer.

No state is ever collapsed; chains only grow and evolve unitarily.  ChainState
values are immutable, every operation returns a new one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    CompositeSpace,
    apply_operator,
    as_complex_matrix,
    as_state_vector,
    is_unitary,
    readonly,
    unitarity_residual,
)
from .model import DensityState, DeviceSpec, Observable, make_device, make_observable

SYSTEM_TARGET = "system"


@dataclass(frozen=True, eq=False)
class Disturbance:
    """Per-outcome unitaries applied to the system inside recorded branches."""

    unitaries: tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = tuple(as_complex_matrix(u, "disturbance") for u in self.unitaries)
        if not mats:
            raise ValueError("disturbance needs at least one unitary")
        d = mats[0].shape[0]
        for i, u in enumerate(mats, start=1):
            if u.shape != (d, d):
                raise ValueError(f"disturbance {i} has shape {u.shape}, expected {(d, d)}")
            res = unitarity_residual(u)
            if res > DEFAULT_TOL:
                raise ValueError(f"disturbance {i} is not unitary (residual {res:.3e})")
        object.__setattr__(self, "unitaries", tuple(readonly(u) for u in mats))

    def __len__(self) -> int:
        return len(self.unitaries)


@dataclass(frozen=True, eq=False)
class AttachedDevice:
    spec: DeviceSpec
    factor_index: int
    target: str  # SYSTEM_TARGET or the label of an earlier device
    mode: str  # "ideal" | "weak" | "reader"
    disturbance: Disturbance | None = None


@dataclass(frozen=True, eq=False)
class ChainState:
    """Immutable snapshot of system + devices.

    ``state`` is a vector for pure chains, a square matrix for mixed ones.
    ``initial_system_state`` keeps the system state the chain was started
    from, which downstream checks replay against the projection postulate.
    """

    space: CompositeSpace
    state: np.ndarray
    devices: tuple[AttachedDevice, ...]
    initial_system_state: np.ndarray
    system_label: str = field(default="S")

    def __post_init__(self):
        state = np.asarray(self.state, dtype=np.complex128)
        if state.ndim == 1:
            if state.size != self.space.dim:
                raise ValueError(
                    f"state size {state.size} does not match space dimension {self.space.dim}"
                )
        elif state.ndim == 2:
            if state.shape != (self.space.dim, self.space.dim):
                raise ValueError(
                    f"state shape {state.shape} does not match space dimension {self.space.dim}"
                )
        else:
            raise ValueError("state must be a vector or a square matrix")
        if self.space.labels[0] != self.system_label:
            raise ValueError("first factor must be the system")
        for ad in self.devices:
            if self.space.dim_of(ad.spec.label) != ad.spec.pointer_dim:
                raise ValueError(f"factor of device {ad.spec.label!r} has wrong dimension")
        object.__setattr__(self, "state", readonly(state))
        object.__setattr__(self, "initial_system_state", readonly(self.initial_system_state))

    @property
    def is_pure(self) -> bool:
        return self.state.ndim == 1

    @property
    def system_dim(self) -> int:
        return self.space.dims[0]

    @property
    def device_labels(self) -> tuple[str, ...]:
        return tuple(ad.spec.label for ad in self.devices)

    def device(self, label: str) -> AttachedDevice:
        for ad in self.devices:
            if ad.spec.label == label:
                return ad
        raise ValueError(f"no device labelled {label!r} in this chain")

    def has_device(self, label: str) -> bool:
        return any(ad.spec.label == label for ad in self.devices)

    def outcome_count(self, label: str) -> int:
        return self.device(label).spec.observable.outcome_count


def pointer_shift(dim: int) -> np.ndarray:
    """Cyclic add-1 shift on a ``dim``-dimensional pointer basis."""
    if dim < 1:
        raise ValueError("pointer dimension must be positive")
    return np.roll(np.eye(dim, dtype=np.complex128), 1, axis=0)


def build_ideal_unitary(obs: Observable, dev: DeviceSpec) -> np.ndarray:
    """Premeasurement unitary on (measured factor) x (pointer factor)."""
    if dev.observable is not obs:
        raise ValueError(f"device {dev.label!r} does not measure observable {obs.label!r}")
    shift = pointer_shift(dev.pointer_dim)
    u = np.zeros((obs.dim * dev.pointer_dim,) * 2, dtype=np.complex128)
    step = np.eye(dev.pointer_dim, dtype=np.complex128)
    for p in obs.projectors:
        step = step @ shift
        u += np.kron(p, step)
    return u


def build_weak_unitary(obs: Observable, dev: DeviceSpec, dist: Disturbance) -> np.ndarray:
    """Ideal premeasurement followed by the pointer-controlled disturbance."""
    if len(dist) != obs.outcome_count:
        raise ValueError(
            f"need {obs.outcome_count} disturbance unitaries, got {len(dist)}"
        )
    for u in dist.unitaries:
        if u.shape[0] != obs.dim:
            raise ValueError(
                f"disturbance dimension {u.shape[0]} does not match system dimension {obs.dim}"
            )
    d_p = dev.pointer_dim
    v = np.zeros((obs.dim * d_p,) * 2, dtype=np.complex128)
    for k, r in enumerate(dist.unitaries, start=1):
        e = np.zeros((d_p, d_p), dtype=np.complex128)
        e[k, k] = 1.0
        v += np.kron(r, e)
    ready = np.zeros((d_p, d_p), dtype=np.complex128)
    ready[0, 0] = 1.0
    v += np.kron(np.eye(obs.dim, dtype=np.complex128), ready)
    return v @ build_ideal_unitary(obs, dev)


def pointer_basis_observable(label: str, target_spec: DeviceSpec) -> Observable:
    """Pointer-basis observable of a device's factor, for reader devices.

    Outcome ``k`` matches pointer state ``k`` of the target for
    ``k = 1..n``; the ready state gets the final outcome index ``n+1``.
    """
    d = target_spec.pointer_dim
    order = list(range(1, d)) + [0]
    basis = [np.eye(d, dtype=np.complex128)[i] for i in order]
    eigenvalues = [float(i) for i in order]
    return make_observable(label, target_spec.label, eigenvalues, basis)


def make_reader_device(label: str, target_spec: DeviceSpec) -> DeviceSpec:
    """Device that records the pointer value of an earlier device."""
    obs = pointer_basis_observable(f"pointer[{target_spec.label}]", target_spec)
    return make_device(label, obs)


def init_chain(state, system_label: str | None = None) -> ChainState:
    """Chain holding only the system, no devices attached yet.

    ``state`` may be a vector, a density matrix, or a DensityState.
    """
    if isinstance(state, DensityState):
        label = system_label if system_label is not None else state.space_label
        mat = state.matrix
        space = CompositeSpace(((label, mat.shape[0]),))
        return ChainState(space, mat, (), mat, label)
    arr = np.asarray(state, dtype=np.complex128)
    label = system_label if system_label is not None else "S"
    if arr.ndim == 2:
        ds = DensityState(label, arr)
        space = CompositeSpace(((label, ds.dim),))
        return ChainState(space, ds.matrix, (), ds.matrix, label)
    vec = as_state_vector(arr)
    space = CompositeSpace(((label, vec.size),))
    return ChainState(space, vec, (), vec, label)


def _ready_vector(dim: int) -> np.ndarray:
    e0 = np.zeros(dim, dtype=np.complex128)
    e0[0] = 1.0
    return e0


def attach_device(
    chain: ChainState,
    dev: DeviceSpec,
    mode: str = "ideal",
    *,
    disturbance: Disturbance | None = None,
    target: str | None = None,
) -> ChainState:
    """Extend the chain by one device in its ready state and apply its
    premeasurement interaction.

    ``mode`` selects the interaction: "ideal" and "weak" couple the device to
    the system, "reader" couples it to the pointer of the earlier device named
    by ``target``.  A label already present in the chain is rejected: a fired
    device keeps its record and cannot be reused.
    """
    if dev.label == chain.system_label or chain.has_device(dev.label):
        raise ValueError(f"device label {dev.label!r} already used in this chain")
    obs = dev.observable

    if mode in ("ideal", "weak"):
        if target is not None:
            raise ValueError("target is only meaningful for reader devices")
        if obs.space_label != chain.system_label:
            raise ValueError(
                f"observable {obs.label!r} lives on {obs.space_label!r}, "
                f"not on the system {chain.system_label!r}"
            )
        if obs.dim != chain.system_dim:
            raise ValueError(
                f"observable dimension {obs.dim} does not match system dimension "
                f"{chain.system_dim}"
            )
        if mode == "ideal":
            if disturbance is not None:
                raise ValueError("ideal attachment takes no disturbance")
            u = build_ideal_unitary(obs, dev)
        else:
            if disturbance is None:
                raise ValueError("weak attachment needs a disturbance")
            u = build_weak_unitary(obs, dev, disturbance)
        anchor = chain.system_label
        recorded_target = SYSTEM_TARGET
    elif mode == "reader":
        if target is None:
            raise ValueError("reader attachment needs a target device label")
        if disturbance is not None:
            raise ValueError("reader attachment takes no disturbance")
        target_ad = chain.device(target)
        if obs.space_label != target:
            raise ValueError(
                f"reader observable lives on {obs.space_label!r}, expected {target!r}"
            )
        if obs.dim != target_ad.spec.pointer_dim:
            raise ValueError(
                f"reader dimension {obs.dim} does not match pointer dimension "
                f"{target_ad.spec.pointer_dim}"
            )
        for p in obs.projectors:
            offdiag = p - np.diag(np.diag(p))
            if float(np.max(np.abs(offdiag))) > DEFAULT_TOL:
                raise ValueError("reader devices must measure the pointer basis")
        u = build_ideal_unitary(obs, dev)
        anchor = target
        recorded_target = target
    else:
        raise ValueError(f"unknown attachment mode {mode!r}")

    if not is_unitary(u, DEFAULT_TOL):
        raise ValueError("constructed interaction is not unitary")

    new_space = chain.space.extended(dev.label, dev.pointer_dim)
    e0 = _ready_vector(dev.pointer_dim)
    if chain.is_pure:
        grown = np.kron(chain.state, e0)
    else:
        grown = np.kron(chain.state, np.outer(e0, e0))
    new_state = apply_operator(u, (anchor, dev.label), new_space, grown)
    attached = AttachedDevice(
        spec=dev,
        factor_index=len(chain.space.factors),
        target=recorded_target,
        mode=mode,
        disturbance=disturbance,
    )
    return ChainState(
        new_space,
        new_state,
        chain.devices + (attached,),
        chain.initial_system_state,
        chain.system_label,
    )


def apply_evolution(chain: ChainState, u_system) -> ChainState:
    """Evolve the system factor by a unitary; devices are stationary."""
    u = as_complex_matrix(u_system, "evolution")
    if u.shape != (chain.system_dim, chain.system_dim):
        raise ValueError(
            f"evolution has shape {u.shape}, system dimension is {chain.system_dim}"
        )
    if not is_unitary(u, DEFAULT_TOL):
        raise ValueError("evolution operator is not unitary")
    new_state = apply_operator(u, (chain.system_label,), chain.space, chain.state)
    return ChainState(
        chain.space,
        new_state,
        chain.devices,
        chain.initial_system_state,
        chain.system_label,
    )
