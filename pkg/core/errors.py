"""
Иерархия исключений библиотеки FPOS с деталями и кодами завершения CLI
"""

from typing import Dict, Any, Optional


class FposError(Exception):
    """Базовое исключение для всех ошибок библиотеки"""

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        """
        Инициализация исключения

        Args:
            message: Человеко-читаемое сообщение об ошибке
            details: Дополнительные детали ошибки (параметры, границы и т.д.)
        """
        self.message = message
        self.details = details or {}
        super().__init__(self.message)

    def __str__(self) -> str:
        """Строковое представление с деталями"""
        if self.details:
            details_str = ", ".join(f"{k}={v}" for k, v in self.details.items())
            return f"{self.message} [{details_str}]"
        return self.message

    def to_dict(self) -> Dict[str, Any]:
        """Представление исключения в виде словаря"""
        return {
            "error": self.message,
            "type": type(self).__name__,
            "details": self.details
        }


class ParameterError(FposError):
    """Структурно некорректные параметры (k, n, N, ранги, вероятности)"""

    exit_code = 2


class ImpossibleObservationError(ParameterError):
    """Наблюдение вне носителя любого допустимого распределения"""


class DegenerateDistributionError(ParameterError):
    """Запрошена характеристика, не определенная при нулевой дисперсии (n = N)"""


class InconsistentPriorError(ParameterError):
    """Априорное распределение не совместимо с наблюдением (H = 0)"""


class ResourceError(FposError):
    """Превышен бюджет вычислений (перебор, размер сетки, точная арифметика)"""

    exit_code = 3


class CertificationError(ResourceError):
    """Погрешность усечения H не удается гарантировать ниже заданного tol"""
