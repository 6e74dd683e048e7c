"""Pydantic models for the core synergy model.

Two stacking conventions are used throughout the package:

- velocities are stacked time-major, ``[v(1); v(2); ...; v(T)]`` with each
  ``v(t)`` an n-vector, so entry ``t * n + i`` holds joint ``i`` at time ``t``;
- templates are stacked joint-major, ``s_1(1..T_s), s_2(1..T_s), ...``, so
  entry ``i * T_s + tau`` holds joint ``i`` at template time ``tau``.
"""

from typing import Any

from typing_extensions import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def as_float_array(value: Any, ndim: int) -> np.ndarray:
    """Convert a nested sequence (or array) to a float array of a given rank.

    Args:
        value: Anything accepted by numpy.asarray.
        ndim: Expected number of dimensions.

    Raises:
        ValueError: Raised when the rank differs or the entries are not finite.

    Returns:
        A float64 numpy array.
    """
    array = np.array(value, dtype=float)
    if array.ndim != ndim:
        raise ValueError(f"expected a {ndim}-dimensional array, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError("array contains non-finite values")
    return array


class ShiftPlan(BaseModel):
    """Enumeration of the allowed time shifts of every synergy.

    Attributes:
        T: Length of the observation window (samples).
        T_s: Length of a synergy template (samples).
        shifts: Per synergy, the strictly increasing shifts t_jk, each in
            the range [0, T - T_s].
    """

    model_config = ConfigDict(frozen=True)

    T: int = Field(ge=1)
    T_s: int = Field(ge=1)
    shifts: tuple[tuple[int, ...], ...]

    @model_validator(mode="after")
    def check_shifts(self) -> Self:
        if self.T_s > self.T:
            raise ValueError(f"template length T_s={self.T_s} exceeds window length T={self.T}")
        if not self.shifts:
            raise ValueError("a shift plan needs at least one synergy")
        for j, synergy_shifts in enumerate(self.shifts):
            if not synergy_shifts:
                raise ValueError(f"synergy {j} has no shifts")
            if min(synergy_shifts) < 0 or max(synergy_shifts) > self.T - self.T_s:
                raise ValueError(
                    f"synergy {j} has shifts outside [0, {self.T - self.T_s}]: {synergy_shifts}"
                )
            if any(b <= a for a, b in zip(synergy_shifts, synergy_shifts[1:])):
                raise ValueError(f"shifts of synergy {j} are not strictly increasing")
        return self

    @classmethod
    def uniform(cls, T: int, T_s: int, m: int, stride: int = 1) -> "ShiftPlan":
        """Build the plan with the same shift grid 0, stride, 2*stride, ... for every synergy.

        With the default stride the grid has K_j = T - T_s + 1 shifts.
        """
        if T_s > T:
            raise ValueError(f"template length T_s={T_s} exceeds window length T={T}")
        grid = tuple(range(0, T - T_s + 1, stride))
        return cls(T=T, T_s=T_s, shifts=(grid,) * m)

    @property
    def m(self) -> int:
        return len(self.shifts)

    def K(self, j: int) -> int:
        """Number of shifts of synergy j."""
        return len(self.shifts[j])

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.shifts)

    @property
    def offsets(self) -> np.ndarray:
        """Start index of every synergy block in a concatenated coefficient vector (length m+1)."""
        return np.concatenate([[0], np.cumsum(self.sizes)]).astype(int)

    @property
    def total(self) -> int:
        return int(sum(self.sizes))

    def with_window(self, T: int) -> "ShiftPlan":
        """Return the uniform plan with the same stride for a different window length."""
        first = self.shifts[0]
        stride = first[1] - first[0] if len(first) > 1 else 1
        return ShiftPlan.uniform(T, self.T_s, self.m, stride=stride)


class SynergyBank(BaseModel):
    """Bank of m synergy templates, each of length n * T_s (joint-major).

    Attributes:
        n: Number of joints.
        T_s: Template duration (samples).
        templates: Array of shape (m, n * T_s).
        active_flags: Whether each synergy still takes part in the model.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=1)
    T_s: int = Field(ge=1)
    templates: np.ndarray
    active_flags: tuple[bool, ...] = ()

    @field_validator("templates", mode="before")
    @classmethod
    def convert_templates(cls, value: Any) -> np.ndarray:
        return as_float_array(value, ndim=2)

    @model_validator(mode="after")
    def check_shapes(self) -> Self:
        if self.templates.shape[1] != self.n * self.T_s:
            raise ValueError(
                f"templates must have length n*T_s={self.n * self.T_s}, "
                f"got {self.templates.shape[1]}"
            )
        if not self.active_flags:
            object.__setattr__(self, "active_flags", (True,) * self.templates.shape[0])
        elif len(self.active_flags) != self.templates.shape[0]:
            raise ValueError("one active flag per template is required")
        return self

    @property
    def m(self) -> int:
        return self.templates.shape[0]

    @property
    def active_indices(self) -> list[int]:
        return [j for j, flag in enumerate(self.active_flags) if flag]

    @property
    def m_active(self) -> int:
        return sum(self.active_flags)

    def template(self, j: int) -> np.ndarray:
        return self.templates[j]

    def template_matrix(self, j: int) -> np.ndarray:
        """Template j as a (T_s, n) array, one column per joint."""
        return self.templates[j].reshape(self.n, self.T_s).T

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.templates, axis=1)

    def replace(self, **changes: Any) -> "SynergyBank":
        """Return a validated copy with some fields replaced."""
        fields = {
            "n": self.n,
            "T_s": self.T_s,
            "templates": self.templates,
            "active_flags": self.active_flags,
        }
        fields.update(changes)
        return SynergyBank(**fields)


class VelocityDataset(BaseModel):
    """Joint angular velocities of G tasks, each stacked time-major.

    Attributes:
        n: Number of joints.
        T: Trajectory length (samples).
        velocities: Array of shape (G, n * T).
        sample_rate: Sampling rate in Hz.
        task_ids: Identifiers of the tasks (defaults to 1..G).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=1)
    T: int = Field(ge=1)
    velocities: np.ndarray
    sample_rate: float = Field(default=1.0, gt=0)
    task_ids: tuple[int, ...] = ()

    @field_validator("velocities", mode="before")
    @classmethod
    def convert_velocities(cls, value: Any) -> np.ndarray:
        return as_float_array(value, ndim=2)

    @model_validator(mode="after")
    def check_shapes(self) -> Self:
        if self.velocities.shape[1] != self.n * self.T:
            raise ValueError(
                f"every task vector must have length n*T={self.n * self.T}, "
                f"got {self.velocities.shape[1]}"
            )
        if not self.task_ids:
            object.__setattr__(self, "task_ids", tuple(range(1, self.G + 1)))
        elif len(self.task_ids) != self.G:
            raise ValueError("one task id per task is required")
        return self

    @property
    def G(self) -> int:
        return self.velocities.shape[0]

    def task(self, g: int) -> np.ndarray:
        return self.velocities[g]

    def select(self, indices: list[int]) -> "VelocityDataset":
        """Return the dataset restricted to the given task indices (0-based)."""
        return VelocityDataset(
            n=self.n,
            T=self.T,
            velocities=self.velocities[indices].reshape(len(indices), self.n * self.T),
            sample_rate=self.sample_rate,
            task_ids=tuple(self.task_ids[g] for g in indices),
        )


class CoefficientSet(BaseModel):
    """Activation coefficients c_j^g of every task and synergy.

    The coefficients of one task are kept as one concatenated vector whose
    synergy blocks have the sizes K_j of the shift plan.

    Attributes:
        sizes: Block size K_j of each synergy.
        values: Array of shape (G, sum(K_j)).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    sizes: tuple[int, ...]
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def convert_values(cls, value: Any) -> np.ndarray:
        return as_float_array(value, ndim=2)

    @model_validator(mode="after")
    def check_shapes(self) -> Self:
        if self.values.shape[1] != sum(self.sizes):
            raise ValueError(
                f"coefficient vectors must have length {sum(self.sizes)}, "
                f"got {self.values.shape[1]}"
            )
        return self

    @classmethod
    def zeros(cls, G: int, plan: ShiftPlan) -> "CoefficientSet":
        return cls(sizes=plan.sizes, values=np.zeros((G, plan.total)))

    @property
    def G(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return len(self.sizes)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.sizes)]).astype(int)

    def block(self, g: int, j: int) -> np.ndarray:
        """Coefficient vector c_j^g."""
        offsets = self.offsets
        return self.values[g, offsets[j] : offsets[j + 1]]

    def task_blocks(self, g: int) -> list[np.ndarray]:
        offsets = self.offsets
        return [self.values[g, offsets[j] : offsets[j + 1]] for j in range(self.m)]

    def synergy_values(self, j: int) -> np.ndarray:
        """All c_j^g as a (G, K_j) array."""
        offsets = self.offsets
        return self.values[:, offsets[j] : offsets[j + 1]]

    def group_norms(self) -> np.ndarray:
        """Euclidean norms ||c_j^g||_2 as a (G, m) array."""
        if self.values.shape[0] == 0:
            return np.zeros((0, self.m))
        return np.sqrt(np.add.reduceat(self.values**2, self.offsets[:-1], axis=1))

    def nnz(self) -> int:
        return int(np.count_nonzero(self.values))
