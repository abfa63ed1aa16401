"""Core trajectory types.

A trajectory is a uniformly sampled sequence of d-dimensional state vectors.
The canonical car-following state is ``[v0, v1, gap]`` (leader speed,
follower speed, inter-vehicle distance) with the follower acceleration as an
optional action series, but every operation in the package is generic in the
state dimension.

All types here are immutable value objects: arrays are copied on construction
and marked read-only, so trajectories can be shared freely between workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateDimensionError,
    DimensionMismatchError,
    LengthMismatchError,
    NonFiniteValueError,
    NonPositiveDtError,
)

__all__ = ["Trajectory", "ScalingParams", "make_trajectory", "standardize", "unstandardize"]


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Trajectory:
    """Immutable, validated state sequence.

    Parameters
    ----------
    states : (T, d) array
        One row per time step; T >= 2, constant dimension, all finite.
    dt : float
        Sampling interval in seconds, > 0.
    actions : (T,) array or None
        Optional scalar action per step (canonically follower acceleration).
    id : str
        Stable identifier; drives deterministic per-trajectory seeding.
    metadata : mapping of str to str
        Free-form labels (cohort, scenario, source, ground-truth order, ...).
    """

    states: np.ndarray
    dt: float
    actions: np.ndarray | None = None
    id: str = ""
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2:
            # ragged input ends up as an object array or a 1-d array
            raise DimensionMismatchError(
                f"states must be a (T, d) array of constant dimension, got shape {states.shape}"
            )
        if states.shape[0] < 2:
            raise LengthMismatchError(f"need at least 2 states, got {states.shape[0]}")
        if states.shape[1] < 1:
            raise DimensionMismatchError("state dimension must be >= 1")
        if not np.isfinite(states).all():
            raise NonFiniteValueError("states contain NaN or infinity")
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise NonPositiveDtError(f"dt must be > 0, got {self.dt}")
        object.__setattr__(self, "states", _frozen_array(states))

        if self.actions is not None:
            actions = np.asarray(self.actions, dtype=float)
            if actions.ndim != 1 or actions.shape[0] != states.shape[0]:
                raise LengthMismatchError(
                    f"actions length {actions.shape} does not match T={states.shape[0]}"
                )
            if not np.isfinite(actions).all():
                raise NonFiniteValueError("actions contain NaN or infinity")
            object.__setattr__(self, "actions", _frozen_array(actions))

        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))

    def __reduce__(self):
        # MappingProxyType does not pickle; rebuild through the constructor
        # so workers get a validated, frozen copy
        actions = None if self.actions is None else np.asarray(self.actions)
        return (Trajectory, (np.asarray(self.states), self.dt, actions,
                             self.id, dict(self.metadata)))

    @property
    def length(self) -> int:
        """Number of samples T."""
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        """State dimension d."""
        return self.states.shape[1]

    @property
    def duration(self) -> float:
        """Covered time in seconds, counted as T * dt."""
        return self.length * self.dt

    def with_states(self, states: np.ndarray) -> "Trajectory":
        """Copy of this trajectory with replaced states (same id/metadata)."""
        return Trajectory(states=states, dt=self.dt, actions=self.actions,
                          id=self.id, metadata=dict(self.metadata))


@dataclass(frozen=True)
class ScalingParams:
    """Per-dimension affine map recorded by :func:`standardize`.

    ``original = standardized * std + mean`` inverts the transform exactly.
    """

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        std = np.asarray(self.std, dtype=float)
        if mean.shape != std.shape or mean.ndim != 1:
            raise DimensionMismatchError("mean and std must be 1-d arrays of equal length")
        if not (np.isfinite(mean).all() and np.isfinite(std).all()):
            raise NonFiniteValueError("scaling parameters must be finite")
        if (std <= 0).any():
            raise DegenerateDimensionError("standard deviations must be > 0")
        object.__setattr__(self, "mean", _frozen_array(mean))
        object.__setattr__(self, "std", _frozen_array(std))


def make_trajectory(
    states: Sequence[Sequence[float]] | np.ndarray,
    dt: float,
    actions: Sequence[float] | np.ndarray | None = None,
    id: str = "",
    metadata: Mapping[str, str] | None = None,
) -> Trajectory:
    """Validate and freeze a trajectory.

    Raises
    ------
    DimensionMismatchError
        Ragged state vectors or zero dimension.
    NonFiniteValueError
        NaN/Inf anywhere in states or actions.
    LengthMismatchError
        Fewer than 2 states, or actions not matching T.
    NonPositiveDtError
        dt <= 0 or non-finite.
    """
    if not isinstance(states, np.ndarray):
        rows = [np.atleast_1d(np.asarray(row, dtype=float)) for row in states]
        if not rows:
            raise LengthMismatchError("need at least 2 states, got 0")
        dims = {row.shape for row in rows}
        if len(dims) != 1:
            raise DimensionMismatchError(f"ragged state vectors with shapes {sorted(dims)}")
        states = np.stack(rows)
    return Trajectory(states=states, dt=dt, actions=actions, id=id,
                      metadata=dict(metadata) if metadata else {})


def standardize(traj: Trajectory, min_std: float = 1e-10) -> tuple[Trajectory, ScalingParams]:
    """Shift/scale each state dimension to sample mean 0 and sample std 1.

    The sample standard deviation uses the n-1 divisor, so three points
    ``[1, 2, 3]`` standardize to exactly ``[-1, 0, 1]``.

    Raises
    ------
    DegenerateDimensionError
        If any dimension has sample std <= ``min_std``.
    """
    mean = traj.states.mean(axis=0)
    std = traj.states.std(axis=0, ddof=1)
    if (std <= min_std).any():
        bad = np.nonzero(std <= min_std)[0].tolist()
        raise DegenerateDimensionError(f"constant state dimension(s) {bad}")
    params = ScalingParams(mean=mean, std=std)
    return traj.with_states((traj.states - mean) / std), params


def unstandardize(traj: Trajectory, params: ScalingParams) -> Trajectory:
    """Invert :func:`standardize`; exact round trip up to float rounding."""
    if params.mean.shape[0] != traj.dim:
        raise DimensionMismatchError(
            f"params dimension {params.mean.shape[0]} != trajectory dimension {traj.dim}"
        )
    return traj.with_states(traj.states * params.std + params.mean)
