"""
Менеджер конфигурации с валидацией схемы и значениями по умолчанию
"""

import copy
import logging
import os
from typing import Any, Dict, Optional

import json5
from jsonschema import SchemaError, ValidationError, validate

from core.errors import FposError


class ConfigValidationError(FposError):
    """Ошибка валидации конфигурации"""

    exit_code = 2


def _section(properties: Dict[str, Any]) -> Dict[str, Any]:
    return {"type": "object", "additionalProperties": False, "properties": properties}


DEFAULT_CONFIG: Dict[str, Dict[str, Any]] = {
    "numerics": {"exact_max_population": 64},
    "oracle": {"max_subsets": 10_000_000},
    "bayes": {
        "tol": 1e-10,
        "initial_truncation": 1024,
        "max_truncation": 50_000_000,
        "chunk_size": 1_000_000,
    },
    "normal_approx": {
        "max_heatmap_population": 2000,
        "clt_sample_exponent": 0.8,
        "clt_rank_exponent": 0.5,
    },
    "simulation": {"threads": 1, "shard_size": 100_000},
    "benchmark": {"kilosort_repetitions": 25, "warmup_rounds": 1},
    "logging": {"level": "INFO", "file": None},
}


class ConfigManager:
    """
    Менеджер конфигурации: JSON5-файл, проверка по JSON Schema,
    значения по умолчанию и семантические правила
    """

    # JSON Schema для валидации конфигурации
    CONFIG_SCHEMA = {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "numerics": _section({
                "exact_max_population": {"type": "integer", "minimum": 1, "maximum": 1000},
            }),
            "oracle": _section({
                "max_subsets": {"type": "integer", "minimum": 1},
            }),
            "bayes": _section({
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "initial_truncation": {"type": "integer", "minimum": 1},
                "max_truncation": {"type": "integer", "minimum": 1},
                "chunk_size": {"type": "integer", "minimum": 1},
            }),
            "normal_approx": _section({
                "max_heatmap_population": {"type": "integer", "minimum": 3},
                "clt_sample_exponent": {"type": "number"},
                "clt_rank_exponent": {"type": "number"},
            }),
            "simulation": _section({
                "threads": {"type": "integer", "minimum": 1, "maximum": 256},
                "shard_size": {"type": "integer", "minimum": 1},
            }),
            "benchmark": _section({
                "kilosort_repetitions": {"type": "integer", "minimum": 25},
                "warmup_rounds": {"type": "integer", "minimum": 0},
            }),
            "logging": _section({
                "level": {"type": "string", "enum": ["DEBUG", "INFO", "WARNING", "ERROR"]},
                "file": {"type": ["string", "null"]},
            }),
        },
    }

    def __init__(self, config_path: Optional[str] = "config.json"):
        """
        Инициализация менеджера конфигурации

        Args:
            config_path: Путь к файлу конфигурации; если файла нет,
                используются значения по умолчанию

        Raises:
            ConfigValidationError: При ошибках разбора или валидации
        """
        self.config_path = config_path
        self.config: Dict[str, Any] = {}
        self._original_config: Dict[str, Any] = {}
        self._is_loaded = False

        self.load_config()

    def load_config(self) -> None:
        """
        Загрузка и валидация конфигурации

        Raises:
            ConfigValidationError: При ошибках валидации
        """
        if self.config_path and os.path.exists(self.config_path):
            with open(self.config_path, 'r', encoding='utf-8') as f:
                file_content = f.read().strip()
            if not file_content:
                raise ConfigValidationError("Файл конфигурации пуст", details={"path": self.config_path})
            try:
                self._original_config = json5.loads(file_content)
            except ValueError as e:
                raise ConfigValidationError(f"Ошибка парсинга JSON5: {e}", details={"path": self.config_path})
            source = self.config_path
        else:
            self._original_config = {}
            source = "значения по умолчанию"

        self._validate_schema()
        self._normalize_config()
        self._semantic_validation()

        self._is_loaded = True
        logging.debug(f"✅ Конфигурация загружена: {source}")

    def _validate_schema(self) -> None:
        """Валидация конфигурации по JSON Schema"""
        try:
            validate(instance=self._original_config, schema=self.CONFIG_SCHEMA)
        except ValidationError as e:
            raise ConfigValidationError(
                f"Ошибка валидации конфигурации: {e.message}",
                details={
                    "path": " → ".join(str(p) for p in e.path),
                    "validator": e.validator,
                }
            )
        except SchemaError as e:
            raise ConfigValidationError(f"Ошибка схемы валидации: {e}")

    def _normalize_config(self) -> None:
        """Установка значений по умолчанию для отсутствующих ключей"""
        self.config = copy.deepcopy(self._original_config)
        for section, defaults in DEFAULT_CONFIG.items():
            target = self.config.setdefault(section, {})
            for key, value in defaults.items():
                target.setdefault(key, value)

    def _semantic_validation(self) -> None:
        """Семантическая валидация логических правил"""
        approx = self.config["normal_approx"]
        for key in ("clt_sample_exponent", "clt_rank_exponent"):
            if not 0 < approx[key] < 1:
                raise ConfigValidationError(
                    "Показатель пути должен лежать в (0, 1)",
                    details={"key": key, "value": approx[key], "section": "normal_approx"}
                )

        bayes = self.config["bayes"]
        if bayes["initial_truncation"] > bayes["max_truncation"]:
            raise ConfigValidationError(
                "initial_truncation не может быть больше max_truncation",
                details={
                    "initial_truncation": bayes["initial_truncation"],
                    "max_truncation": bayes["max_truncation"],
                    "section": "bayes"
                }
            )

    def get_section(self, name: str) -> Dict[str, Any]:
        """Копия раздела конфигурации"""
        return dict(self.config.get(name, {}))

    def get_bayes_limits(self) -> Dict[str, int]:
        """Параметры усечения H для функций модуля bayes"""
        bayes = self.config["bayes"]
        return {key: bayes[key] for key in ("initial_truncation", "max_truncation", "chunk_size")}

    def get_thread_count(self) -> int:
        """Получение количества потоков"""
        return self.config["simulation"]["threads"]

    @property
    def is_loaded(self) -> bool:
        """Проверка загружена ли конфигурация"""
        return self._is_loaded

    def __getitem__(self, key: str) -> Any:
        """Доступ к конфигурации через квадратные скобки"""
        if not self._is_loaded:
            raise RuntimeError("Конфигурация не загружена")
        return self.config[key]

    def get(self, key: str, default: Any = None) -> Any:
        """Безопасный доступ к конфигурации"""
        if not self._is_loaded:
            return default
        return self.config.get(key, default)


# Синглтон экземпляр для глобального доступа
_config_instance: Optional[ConfigManager] = None


def get_config_manager(config_path: Optional[str] = "config.json") -> ConfigManager:
    """
    Получение глобального экземпляра менеджера конфигурации

    Args:
        config_path: Путь к файлу конфигурации

    Returns:
        Экземпляр ConfigManager
    """
    global _config_instance
    if _config_instance is None:
        _config_instance = ConfigManager(config_path)
    return _config_instance


def reset_config_manager() -> None:
    """Сброс глобального экземпляра (для повторной загрузки)"""
    global _config_instance
    _config_instance = None
