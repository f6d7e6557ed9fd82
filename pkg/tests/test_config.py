import pytest

from config.config_manager import (
    DEFAULT_CONFIG,
    ConfigManager,
    ConfigValidationError,
    get_config_manager,
    reset_config_manager,
)


def write_config(tmp_path, text):
    path = tmp_path / "config.json"
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestConfigManager:
    def test_missing_file_uses_defaults(self, tmp_path):
        manager = ConfigManager(str(tmp_path / "absent.json"))
        assert manager.config == DEFAULT_CONFIG
        assert manager.get_thread_count() == 1
        assert manager.is_loaded

    def test_json5_with_comments_and_partial_sections(self, tmp_path):
        path = write_config(tmp_path, """
        {
            // только часть ключей
            simulation: {threads: 4,},
            bayes: {tol: 1e-8},
        }
        """)
        manager = ConfigManager(path)
        assert manager.get_thread_count() == 4
        assert manager["simulation"]["shard_size"] == 100_000
        assert manager["bayes"]["tol"] == 1e-8
        assert manager.get_bayes_limits() == {
            "initial_truncation": 1024, "max_truncation": 50_000_000, "chunk_size": 1_000_000,
        }

    def test_repository_config_is_valid(self):
        from pathlib import Path

        manager = ConfigManager(str(Path(__file__).parent.parent / "config.json"))
        assert set(manager.config) == set(DEFAULT_CONFIG)

    @pytest.mark.parametrize("text", [
        '{"simulation": {"threads": 0}}',
        '{"unknown": {}}',
        '{"bayes": {"tol": 0}}',
        '{"bayes": {"extra_key": 1}}',
        '{"benchmark": {"kilosort_repetitions": 10}}',
        '{"logging": {"level": "TRACE"}}',
    ])
    def test_schema_errors(self, tmp_path, text):
        with pytest.raises(ConfigValidationError) as info:
            ConfigManager(write_config(tmp_path, text))
        assert info.value.exit_code == 2

    def test_semantic_errors(self, tmp_path):
        with pytest.raises(ConfigValidationError):
            ConfigManager(write_config(tmp_path, '{"normal_approx": {"clt_rank_exponent": 1.5}}'))
        with pytest.raises(ConfigValidationError):
            ConfigManager(write_config(tmp_path, '{"bayes": {"initial_truncation": 100, "max_truncation": 10}}'))

    def test_empty_and_broken_files(self, tmp_path):
        with pytest.raises(ConfigValidationError):
            ConfigManager(write_config(tmp_path, "   "))
        with pytest.raises(ConfigValidationError):
            ConfigManager(write_config(tmp_path, "{simulation: "))

    def test_get_section_is_copy(self, tmp_path):
        manager = ConfigManager(str(tmp_path / "absent.json"))
        section = manager.get_section("oracle")
        section["max_subsets"] = 1
        assert manager["oracle"]["max_subsets"] == 10_000_000
        assert manager.get("missing", "fallback") == "fallback"


class TestSingleton:
    def test_singleton_and_reset(self, tmp_path):
        reset_config_manager()
        first = get_config_manager(str(tmp_path / "absent.json"))
        assert get_config_manager() is first
        reset_config_manager()
        assert get_config_manager(str(tmp_path / "absent.json")) is not first
        reset_config_manager()
