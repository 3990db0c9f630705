"""Pipeline settings and the YAML configuration loader.

Settings come from three layers, later ones winning: built-in model
defaults, a YAML file (``config/segslam.yaml`` when present), then
command-line flags. A dataset's ``camera.cfg`` may carry tracking
thresholds; those sit between the built-in defaults and the YAML file.

Example usage:
    >>> config = SegSlamConfig(config_data={"pipeline": {"mode": "baseline"}})
    >>> config.pipeline_config().mode
    <Mode.BASELINE: 'baseline'>
"""

from __future__ import annotations

import logging
import os
import re
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic import ValidationError as PydanticValidationError

from ..exceptions import ConfigurationError
from ..mapping import MappingConfig
from ..segmentation import CorruptionConfig, SimilarityWeights
from ..tracking import TrackingConfig

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path("config/segslam.yaml")


class Mode(str, Enum):
    """Which parts of the pipeline run.

    ``full`` refines masks and gates tracking with them, ``track_only`` gates
    with the coarse masks, ``baseline`` tracks with every feature, and
    ``second_pass`` tracks against a stored map without updating it.
    """

    FULL = "full"
    BASELINE = "baseline"
    TRACK_ONLY = "track_only"
    SECOND_PASS = "second_pass"


class PipelineConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dataset: Optional[Path] = None
    mode: Mode = Mode.FULL
    tracking: TrackingConfig = Field(default_factory=TrackingConfig)
    similarity: SimilarityWeights = Field(default_factory=SimilarityWeights)
    corruption: CorruptionConfig = Field(default_factory=CorruptionConfig)
    mapping: MappingConfig = Field(default_factory=MappingConfig)
    runs: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)
    map_path: Optional[Path] = None
    mask_dir: Optional[Path] = None
    class_table: Optional[Path] = None
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_paths(self) -> PipelineConfig:
        if self.dataset is not None and not self.dataset.exists():
            raise ValueError(f"dataset path does not exist: {self.dataset}")
        return self

    def with_seed(self, seed: int) -> PipelineConfig:
        return self.model_copy(update={"seed": seed})

    def effective_tracking(self, dataset_overrides: Mapping[str, Any]) -> TrackingConfig:
        """Tracking thresholds with dataset values under explicitly set ones."""

        explicit = self.tracking.model_dump(exclude_unset=True)
        try:
            return TrackingConfig.model_validate({**dataset_overrides, **explicit})
        except PydanticValidationError as exc:
            raise ConfigurationError(f"invalid tracking settings: {exc}") from exc


class ExperimentConfig(BaseModel):
    """Repeated runs over simulated scenes."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    runs: int = Field(default=10, ge=1)
    modes: tuple[Mode, ...] = (Mode.FULL, Mode.TRACK_ONLY, Mode.BASELINE)
    relocalization: bool = False
    output_dir: Path = Path("results")
    scene: Optional[Path] = None

    @model_validator(mode="after")
    def _check_modes(self) -> ExperimentConfig:
        if not self.modes:
            raise ValueError("experiment needs at least one mode")
        if Mode.SECOND_PASS in self.modes:
            raise ValueError("second_pass runs through the relocalization experiment")
        return self


class SegSlamConfig:
    """Load and validate pipeline configuration from YAML or defaults."""

    DEFAULT_CONFIG: Dict[str, Any] = {
        "pipeline": {
            "mode": "full",
            "seed": 0,
            "runs": 1,
            "workers": 1,
        },
        "tracking": {},
        "similarity": {},
        "corruption": {},
        "mapping": {},
        "experiment": {
            "runs": 10,
            "relocalization": False,
            "output_dir": "results",
        },
    }
    SECTIONS = ("pipeline", "tracking", "similarity", "corruption", "mapping", "experiment")

    def __init__(
        self,
        config_path: Optional[Path] = None,
        *,
        config_data: Optional[Mapping[str, Any]] = None,
    ) -> None:
        """Load configuration.

        Args:
            config_path: Optional YAML file. Defaults to ``config/segslam.yaml``
                when present.
            config_data: Optional mapping used instead of reading from disk.

        Raises:
            ConfigurationError: If the configuration is invalid or unreadable.
        """

        if config_data is not None and config_path is not None:
            raise ConfigurationError("Provide either config_data or config_path, not both")

        if config_data is not None:
            raw_config = dict(config_data)
        else:
            resolved_path = self._resolve_config_path(config_path)
            if resolved_path and resolved_path.exists():
                try:
                    with resolved_path.open("r", encoding="utf-8") as fh:
                        raw_config = yaml.safe_load(fh) or {}
                    logger.info("Loaded configuration from %s", resolved_path)
                except yaml.YAMLError as exc:
                    raise ConfigurationError(f"Invalid YAML in config file: {exc}") from exc
            else:
                raw_config = {}
                if resolved_path:
                    logger.warning(
                        "Config path %s not found. Falling back to defaults.", resolved_path
                    )
                else:
                    logger.info("Using default configuration")

        if not isinstance(raw_config, Mapping):
            raise ConfigurationError("Configuration root must be a mapping")
        self._config = self._merge_with_defaults(raw_config)
        self._substitute_env_vars()
        self._validate_schema()

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    @property
    def raw(self) -> Dict[str, Any]:
        return self._config

    def pipeline_config(self, overrides: Optional[Mapping[str, Any]] = None) -> PipelineConfig:
        """Build a :class:`PipelineConfig`, applying flag ``overrides`` last.

        ``overrides`` uses the layout of the YAML file; ``None`` values are
        ignored so unset flags keep the configured value.

        Raises:
            ConfigurationError: If the merged settings are invalid.
        """

        merged = self._deep_merge(self._config, _drop_none(overrides or {}))
        data = dict(merged["pipeline"])
        for section in ("tracking", "similarity", "corruption", "mapping"):
            if merged[section]:
                data[section] = merged[section]
        try:
            return PipelineConfig.model_validate(data)
        except PydanticValidationError as exc:
            raise ConfigurationError(f"Invalid pipeline configuration: {exc}") from exc

    def experiment_config(self, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
        merged = self._deep_merge(
            self._config["experiment"], _drop_none(overrides or {})
        )
        try:
            return ExperimentConfig.model_validate(merged)
        except PydanticValidationError as exc:
            raise ConfigurationError(f"Invalid experiment configuration: {exc}") from exc

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------
    def _resolve_config_path(self, provided: Optional[Path]) -> Optional[Path]:
        if provided is not None:
            return provided
        return DEFAULT_CONFIG_PATH if DEFAULT_CONFIG_PATH.exists() else None

    @staticmethod
    def _deep_merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
        merged: Dict[str, Any] = dict(base)
        for key, value in override.items():
            if isinstance(value, Mapping) and isinstance(base.get(key), Mapping):
                merged[key] = SegSlamConfig._deep_merge(base[key], value)
            else:
                merged[key] = value
        return merged

    def _merge_with_defaults(self, config: Mapping[str, Any]) -> Dict[str, Any]:
        return self._deep_merge(self.DEFAULT_CONFIG, config or {})

    def _substitute_env_vars(self) -> None:
        """Recursively substitute ${VAR} with environment values."""

        pattern = re.compile(r"\$\{([^}]+)\}")

        def substitute(value: Any) -> Any:
            if isinstance(value, str):
                for var_name in pattern.findall(value):
                    env_value = os.environ.get(var_name)
                    if env_value is None:
                        logger.debug("Environment variable %s not set", var_name)
                        continue
                    value = value.replace(f"${{{var_name}}}", env_value)
                return value
            if isinstance(value, Mapping):
                return {k: substitute(v) for k, v in value.items()}
            if isinstance(value, list):
                return [substitute(item) for item in value]
            return value

        self._config = substitute(self._config)

    def _validate_schema(self) -> None:
        unknown = set(self._config) - set(self.SECTIONS)
        if unknown:
            raise ConfigurationError(f"Unknown configuration sections: {sorted(unknown)}")
        for section in self.SECTIONS:
            if not isinstance(self._config[section], Mapping):
                raise ConfigurationError(f"Configuration section '{section}' must be a mapping")
        mode = self._config["pipeline"].get("mode")
        if mode not in {m.value for m in Mode}:
            raise ConfigurationError(f"pipeline.mode must be one of {[m.value for m in Mode]}")


def _drop_none(values: Mapping[str, Any]) -> Dict[str, Any]:
    cleaned: Dict[str, Any] = {}
    for key, value in values.items():
        if isinstance(value, Mapping):
            nested = _drop_none(value)
            if nested:
                cleaned[key] = nested
        elif value is not None:
            cleaned[key] = value
    return cleaned
