"""Tests for the layered pipeline configuration."""

import pytest

from segslam.exceptions import ConfigurationError
from segslam.pipeline import ExperimentConfig, Mode, PipelineConfig, SegSlamConfig
from segslam.tracking import TrackingConfig


class TestSegSlamConfig:
    """Test YAML loading, defaults and overrides."""

    def test_defaults(self) -> None:
        cfg = SegSlamConfig(config_data={}).pipeline_config()
        assert cfg.mode is Mode.FULL
        assert cfg.runs == 1 and cfg.seed == 0
        assert cfg.tracking == TrackingConfig()

    def test_yaml_file(self, tmp_path) -> None:
        path = tmp_path / "segslam.yaml"
        path.write_text(
            "pipeline:\n  mode: baseline\n  seed: 3\ntracking:\n  huber_delta: 1.5\n"
            "experiment:\n  runs: 4\n"
        )
        config = SegSlamConfig(path)
        cfg = config.pipeline_config()
        assert cfg.mode is Mode.BASELINE
        assert cfg.seed == 3
        assert cfg.tracking.huber_delta == 1.5
        assert config.experiment_config().runs == 4

    def test_missing_file_falls_back_to_defaults(self, tmp_path) -> None:
        cfg = SegSlamConfig(tmp_path / "absent.yaml").pipeline_config()
        assert cfg.mode is Mode.FULL

    def test_flags_override_yaml(self) -> None:
        config = SegSlamConfig(config_data={"pipeline": {"mode": "baseline", "seed": 3}})
        cfg = config.pipeline_config({"pipeline": {"mode": "track_only", "seed": None}})
        assert cfg.mode is Mode.TRACK_ONLY
        assert cfg.seed == 3

    def test_environment_substitution(self, monkeypatch) -> None:
        monkeypatch.setenv("SEGSLAM_TEST_SEED", "11")
        config = SegSlamConfig(config_data={"pipeline": {"seed": "${SEGSLAM_TEST_SEED}"}})
        assert config.pipeline_config().seed == 11

    @pytest.mark.parametrize(
        "data",
        [
            {"plotting": {}},
            {"tracking": [1, 2]},
            {"pipeline": {"mode": "turbo"}},
        ],
    )
    def test_invalid_layout(self, data) -> None:
        with pytest.raises(ConfigurationError):
            SegSlamConfig(config_data=data)

    def test_invalid_values(self, tmp_path) -> None:
        config = SegSlamConfig(config_data={"tracking": {"min_correspondences": 3}})
        with pytest.raises(ConfigurationError):
            config.pipeline_config()
        with pytest.raises(ConfigurationError):
            SegSlamConfig(config_data={}).pipeline_config(
                {"pipeline": {"dataset": str(tmp_path / "missing")}}
            )

    def test_broken_yaml(self, tmp_path) -> None:
        path = tmp_path / "broken.yaml"
        path.write_text("pipeline: [mode\n")
        with pytest.raises(ConfigurationError):
            SegSlamConfig(path)

    def test_path_and_data_are_exclusive(self, tmp_path) -> None:
        with pytest.raises(ConfigurationError):
            SegSlamConfig(tmp_path / "a.yaml", config_data={})


class TestTrackingPrecedence:
    """Dataset thresholds sit between model defaults and explicit settings."""

    def test_dataset_overrides_defaults(self) -> None:
        tracking = PipelineConfig().effective_tracking({"huber_delta": "3.0", "max_iterations": "7"})
        assert tracking.huber_delta == 3.0
        assert tracking.max_iterations == 7

    def test_explicit_settings_win(self) -> None:
        cfg = SegSlamConfig(config_data={"tracking": {"huber_delta": 1.5}}).pipeline_config()
        tracking = cfg.effective_tracking({"huber_delta": "3.0", "max_iterations": "7"})
        assert tracking.huber_delta == 1.5
        assert tracking.max_iterations == 7

    def test_invalid_dataset_value(self) -> None:
        with pytest.raises(ConfigurationError):
            PipelineConfig().effective_tracking({"min_correspondences": "2"})


class TestExperimentConfig:
    def test_defaults(self) -> None:
        cfg = ExperimentConfig()
        assert cfg.runs == 10
        assert cfg.modes == (Mode.FULL, Mode.TRACK_ONLY, Mode.BASELINE)

    def test_rejects_bad_modes(self) -> None:
        with pytest.raises(ValueError):
            ExperimentConfig(modes=())
        with pytest.raises(ValueError):
            ExperimentConfig(modes=(Mode.SECOND_PASS,))
