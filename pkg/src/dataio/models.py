"""Pydantic models for the dataio package."""

import math
from pathlib import Path
from typing import Any

from typing_extensions import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.model import CoefficientSet, ShiftPlan, SynergyBank
from src.model.models import as_float_array


class AngleTrajectory(BaseModel):
    """Joint angles of one recorded movement.

    Attributes:
        angles: Array of shape (n, T), degrees.
        sample_rate: Sampling rate in Hz.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    angles: np.ndarray
    sample_rate: float = Field(default=1.0, gt=0)

    @field_validator("angles", mode="before")
    @classmethod
    def convert_angles(cls, value: Any) -> np.ndarray:
        array = as_float_array(value, ndim=2)
        if array.shape[0] < 1 or array.shape[1] < 1:
            raise ValueError("an angle trajectory needs at least one joint and one sample")
        return array

    @property
    def n(self) -> int:
        return self.angles.shape[0]

    @property
    def T(self) -> int:
        return self.angles.shape[1]


class SyntheticSpec(BaseModel):
    """Parameters of the planted-synergy data generator.

    Attributes:
        m_true: Number of planted synergies.
        active_shifts_per_task: Number of (synergy, shift) activations per task.
        snr_db: Signal-to-noise ratio in dB; None or +inf means noiseless.
        amplitude_range: Bounds [low, high] of the positive activation amplitudes.
        seed: Seed of the generator.
        smooth_window: Savitzky-Golay window used to smooth the templates.
        smooth_polyorder: Savitzky-Golay polynomial order.
    """

    model_config = ConfigDict(frozen=True)

    m_true: int = Field(ge=1)
    active_shifts_per_task: int = Field(ge=0)
    snr_db: float | None = 20.0
    amplitude_range: tuple[float, float] = (1.0, 2.0)
    seed: int
    smooth_window: int = Field(default=11, ge=1)
    smooth_polyorder: int = Field(default=3, ge=0)

    @field_validator("snr_db")
    @classmethod
    def check_snr(cls, value: float | None) -> float | None:
        if value is not None and (math.isnan(value) or value == -math.inf):
            raise ValueError("snr_db must be a number or +inf")
        return value

    @field_validator("amplitude_range")
    @classmethod
    def check_amplitudes(cls, value: tuple[float, float]) -> tuple[float, float]:
        low, high = value
        if not 0 < low <= high:
            raise ValueError("amplitude_range must satisfy 0 < low <= high")
        return value

    @property
    def noiseless(self) -> bool:
        return self.snr_db is None or self.snr_db == math.inf


class AmplitudeRecord(BaseModel):
    """One planted activation: task, synergy and shift are 0-based indices."""

    task: int
    synergy: int
    shift: int
    amplitude: float


class SyntheticTruth(BaseModel):
    """Ground truth of a synthetic dataset, serialized as JSON.

    Attributes:
        n: Number of joints.
        T: Window length.
        T_s: Template length.
        sample_rate: Sampling rate in Hz.
        templates: Planted unit-norm templates, joint-major.
        shifts: Shift grid of every planted synergy.
        amplitudes: Nonzero activations of every task.
        seed: Generator seed.
        spec: Generator parameters.
    """

    schema_version: int = 1
    n: int
    T: int
    T_s: int
    sample_rate: float = 1.0
    templates: list[list[float]]
    shifts: list[list[int]]
    amplitudes: list[AmplitudeRecord]
    seed: int
    spec: SyntheticSpec

    @model_validator(mode="after")
    def check_templates(self) -> Self:
        if any(len(t) != self.n * self.T_s for t in self.templates):
            raise ValueError("every template must have length n*T_s")
        return self

    def to_bank(self) -> SynergyBank:
        return SynergyBank(n=self.n, T_s=self.T_s, templates=self.templates)

    def to_plan(self) -> ShiftPlan:
        return ShiftPlan(T=self.T, T_s=self.T_s, shifts=tuple(tuple(s) for s in self.shifts))

    def to_coefficients(self, G: int) -> CoefficientSet:
        """Coefficient set of the first G tasks built from the amplitude records."""
        plan = self.to_plan()
        coeffs = np.zeros((G, plan.total))
        offsets = plan.offsets
        for record in self.amplitudes:
            if record.task < G:
                k = plan.shifts[record.synergy].index(record.shift)
                coeffs[record.task, offsets[record.synergy] + k] = record.amplitude
        return CoefficientSet(sizes=plan.sizes, values=coeffs)

    def save(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "SyntheticTruth":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))
