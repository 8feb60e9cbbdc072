"""Tests for run configuration loading."""

import shutil

import pytest

from clinproj.settings import (
    DEFAULT_CONFIG_PATH,
    DEFAULT_REGISTRY_PATH,
    DEFAULT_SCORES_PATH,
    RunConfig,
    config_hash,
    get_log_level,
    load_config,
    parse_config,
)


class TestLoadConfig:
    """YAML run configuration."""

    def test_bundled_config(self):
        config = load_config(DEFAULT_CONFIG_PATH)
        assert config.preprocess.window == 6
        assert config.preprocess.stride == 3
        assert config.ml.clusters == 25
        assert config.datagen.corruption["missing"] == {"*": 0.3}

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "nope.yaml")

    def test_env_variable_selects_file(self, tmp_path, monkeypatch):
        path = tmp_path / "run.yaml"
        path.write_text("seed: 99\nworkers: 1\n")
        monkeypatch.setenv("CLINPROJ_CONFIG", str(path))
        assert load_config().seed == 99

    def test_defaults_fill_gaps(self):
        config = parse_config({"workers": 1})
        assert config.ml.gbt.n_rounds == 200
        assert config.io.output == "runs/latest"

    def test_window_must_exceed_stride(self):
        with pytest.raises(ValueError):
            parse_config({"workers": 1, "preprocess": {"window": 3, "stride": 3}})

    def test_missing_registry(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            parse_config({"workers": 1, "registry_path": str(tmp_path / "v.yaml")})


class TestOverrides:
    """CLI flag overrides."""

    def test_routes_values(self):
        config = RunConfig(workers=1).with_overrides(window=12, stride=6, clusters=4, seed=3,
                                                     node_budget=10, output="out", input=None)
        assert config.preprocess.window == 12 and config.preprocess.stride == 6
        assert config.ml.clusters == 4 and config.seed == 3
        assert config.solver.node_budget == 10
        assert config.io.output == "out"
        assert config.io.input == "data/psv"

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            RunConfig(workers=1).with_overrides(colour="red")

    def test_overrides_revalidate(self):
        with pytest.raises(ValueError):
            RunConfig(workers=1).with_overrides(stride=6)

    def test_hash_tracks_content(self):
        base = RunConfig(workers=1)
        assert config_hash(base) == config_hash(RunConfig(workers=1))
        assert config_hash(base) != config_hash(base.with_overrides(seed=8))

    @staticmethod
    def _checkout(root, seed=7):
        config_dir = root / "config"
        config_dir.mkdir(parents=True)
        shutil.copy(DEFAULT_REGISTRY_PATH, config_dir / "vitals.yaml")
        shutil.copy(DEFAULT_SCORES_PATH, config_dir / "scores.yaml")
        path = config_dir / "run.yaml"
        path.write_text(
            f"seed: {seed}\nworkers: 1\n"
            f"registry_path: {config_dir / 'vitals.yaml'}\n"
            f"scores_path: {config_dir / 'scores.yaml'}\n"
            f"io:\n  input: {root / 'psv'}\n  output: {root / 'run'}\n"
        )
        return load_config(path)

    def test_hash_ignores_checkout_location(self, tmp_path):
        """Two copies of the same config tree in different directories hash alike."""
        a = self._checkout(tmp_path / "one")
        b = self._checkout(tmp_path / "elsewhere" / "two")
        assert a.registry_path != b.registry_path
        assert config_hash(a) == config_hash(b)
        assert config_hash(a) != config_hash(self._checkout(tmp_path / "three", seed=8))


def test_log_level(monkeypatch):
    monkeypatch.delenv("CLINPROJ_LOG_LEVEL", raising=False)
    assert get_log_level(debug=True) == "DEBUG"
    assert get_log_level() == "INFO"
    monkeypatch.setenv("CLINPROJ_LOG_LEVEL", "warning")
    assert get_log_level() == "WARNING"
