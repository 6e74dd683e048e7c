"""Configuration-related utilites."""

import json
import os
from pathlib import Path
from typing import Literal

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

from src.amm import AmmConfig, GridConfig
from src.dataio import SyntheticSpec
from src.exceptions import ConfigurationError
from src.recon import ReconParams

load_dotenv()

CONFIG_ENV_VAR = "SYNERGY_CONFIG"


class LoggingConfigView(BaseModel):
    """Model for storing logging configuration.

    Attributes:
        file_path: Path to a file where the logs will be saved, stderr when
            not given.
        level: Logging level.
        filemode: Whether new logs overwrite the file ('w') or are appended ('a').
        format: Format of the logging message.
    """

    file_path: Path | None = None
    level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"
    filemode: Literal["a", "w"] = "a"
    format: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class PathsConfig(BaseModel):
    """Input and output locations of a run.

    Attributes:
        dataset: Training dataset CSV (written by synth, read by train).
        truth: Ground-truth JSON of a synthetic dataset.
        test_dataset: Testing dataset CSV.
        bank: Trained bank JSON (written by train, read by test and postures).
        output_dir: Directory receiving every other artifact.
    """

    dataset: Path = Path("data/train.csv")
    truth: Path = Path("data/truth.json")
    test_dataset: Path = Path("data/test.csv")
    bank: Path = Path("output/bank.json")
    output_dir: Path = Path("output")

    def resolved(self, base: Path) -> "PathsConfig":
        """Copy with every relative path made absolute against base."""
        return PathsConfig(
            **{name: (base / path).resolve() for name, path in self.model_dump().items()}
        )


class SyntheticConfig(BaseModel):
    """Shape of a synthetic dataset and the generator parameters.

    Attributes:
        n: Joint count.
        T: Window length.
        T_s: Length of the planted templates.
        G: Training task count.
        test_G: Held-out task count drawn from the same truth (0: none).
        sample_rate: Sampling rate written to the dataset, Hz.
        spec: Generator parameters.
    """

    n: int = Field(ge=1)
    T: int = Field(ge=1)
    T_s: int = Field(ge=1)
    G: int = Field(ge=0)
    test_G: int = Field(default=0, ge=0)
    sample_rate: float = Field(default=1.0, gt=0)
    spec: SyntheticSpec


class PreprocessingConfig(BaseModel):
    """Handling of recorded angle datasets before training."""

    smooth_raw: bool = False
    window: int = Field(default=11, ge=1)
    polyorder: int = Field(default=3, ge=0)


class PosturesConfig(BaseModel):
    """Postures integrated from the trained synergies.

    Attributes:
        fractions: Snapshot positions as fractions of the synergy duration.
        initial_angles: Starting angle of every joint, zeros when not given.
    """

    fractions: list[float] = [0.0, 0.25, 0.5, 0.75, 1.0]
    initial_angles: list[float] | None = None

    @field_validator("fractions")
    @classmethod
    def check_fractions(cls, values: list[float]) -> list[float]:
        if not values or any(not 0.0 <= v <= 1.0 for v in values):
            raise ValueError("fractions must be a non-empty list of numbers in [0, 1]")
        return values


class RunConfig(BaseModel):
    """Model of the JSON run configuration.

    Attributes:
        schema_version: Version of the configuration layout, must be 1.
        logging_config: Logging setup.
        paths: File locations.
        synthetic: Synthetic data generation, required by the synth command.
        amm: Alternating minimization settings.
        grid: Hyper-parameter grid; when given, train selects the penalties.
        recon: Testing-phase settings.
        preprocessing: Handling of angle datasets.
        postures: Posture extraction settings.
        threads: Worker threads (None: all cores).
    """

    schema_version: Literal[1]
    logging_config: LoggingConfigView = LoggingConfigView()
    paths: PathsConfig = PathsConfig()
    synthetic: SyntheticConfig | None = None
    amm: AmmConfig = AmmConfig()
    grid: GridConfig | None = None
    recon: ReconParams = ReconParams()
    preprocessing: PreprocessingConfig = PreprocessingConfig()
    postures: PosturesConfig = PosturesConfig()
    threads: int | None = Field(default=None, ge=1)


class ConfigManager:
    """Configuration parser."""

    _instance: RunConfig | None = None
    _config_file_path: Path | None = None

    @classmethod
    def load_from_file(cls, config_file_path: Path | None = None) -> RunConfig:
        """Load given config file.

        Relative paths inside the file are resolved against the directory
        of the file.

        Args:
            config_file_path: Config file path, defaults to the path in the
                SYNERGY_CONFIG environment variable.

        Raises:
            ConfigurationError: Raised when no path is given or the file is
                not valid JSON.
            pydantic.ValidationError: Raised when a field is missing or invalid.
            OSError: Raised when the file cannot be read.

        Returns:
            The loaded configuration.
        """
        path = config_file_path or os.getenv(CONFIG_ENV_VAR)
        if not path:
            raise ConfigurationError(
                f"no configuration file given: pass --config or set {CONFIG_ENV_VAR}"
            )
        path = Path(path)
        with open(path, encoding="utf-8") as f:
            try:
                config_file = json.load(f)
            except json.JSONDecodeError as error:
                raise ConfigurationError(f"{path} is not valid JSON: {error}") from error
        config = RunConfig.model_validate(config_file)
        base = path.resolve().parent
        logging_config = config.logging_config
        if logging_config.file_path is not None:
            logging_config = logging_config.model_copy(
                update={"file_path": (base / logging_config.file_path).resolve()}
            )
        config = config.model_copy(
            update={"paths": config.paths.resolved(base), "logging_config": logging_config}
        )
        cls._config_file_path = path
        cls._instance = config
        return config

    @classmethod
    def get_config(cls) -> RunConfig:
        """Get current configuration.

        Returns:
            Current configuration.
        """
        if not cls._instance:
            cls.load_from_file(cls._config_file_path)
        return cls._instance
