"""
Оценка размера популяции по порядковым статистикам (задача о немецких танках)
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence

import numpy as np

from core.errors import ImpossibleObservationError, ParameterError
from core.fpos import OrderStatSpec, _require_int, sample
from core.normal_approx import AsymptoticRegime, round_half_up
from workers.thread_pool import ThreadPoolManager, spawn_generators


@dataclass(frozen=True)
class EstimateResult:
    """Несмещенная оценка N по k-й порядковой статистике"""

    estimate: float
    k: int
    n: int
    standard_error: Optional[float] = None
    variance_at: Optional[float] = None

    @property
    def rounded(self) -> int:
        """Оценка, округленная для отображения (половины вверх)"""
        return round_half_up(self.estimate)

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {"estimate": self.estimate, "k": self.k, "n": self.n}
        if self.standard_error is not None:
            result["standard_error"] = self.standard_error
            result["variance_at"] = self.variance_at
        return result


class ConsistencyRow(NamedTuple):
    N: int
    n: int
    k: int
    mean_ratio: float
    sd_ratio: float
    standard_error: float


def _variance_formula(N: float, n: int, k: int) -> float:
    return (N + 1) * (N - n) / (n + 2) * (n - k + 1) / k


def estimator_variance(N: int, n: int, k: int) -> float:
    """
    Точная дисперсия оценки (n + 1)/k * X(k) - 1

    Returns:
        (N + 1)(N - n)/(n + 2) * (n - k + 1)/k
    """
    spec = OrderStatSpec(k, n, N)
    return _variance_formula(spec.N, spec.n, spec.k)


def asymptotic_variance_from_max(lam: float) -> float:
    """Предел дисперсии оценки по максимуму при n/N -> lam: (1 - lam)/lam^2"""
    if not 0 < lam <= 1:
        raise ParameterError("Параметр lambda должен лежать в (0, 1]", details={"lambda": lam})
    return (1 - lam) / lam ** 2


def estimate_from_kth(n: int, k: int, x_k: int,
                      N: Optional[int] = None,
                      plug_in: bool = False) -> EstimateResult:
    """
    Оценка (n + 1)/k * x_k - 1

    Args:
        n: Объем выборки
        k: Ранг наблюдения
        x_k: Наблюденное значение k-й порядковой статистики
        N: Гипотетический размер популяции для стандартной ошибки
        plug_in: Считать стандартную ошибку при N, равном самой оценке

    Returns:
        EstimateResult

    Raises:
        ImpossibleObservationError: Если x_k < k или x_k вне носителя при заданном N
    """
    n, k, x_k = _require_int("n", n), _require_int("k", k), _require_int("x", x_k)
    if not 1 <= k <= n:
        raise ParameterError("Требуется 1 <= k <= n", details={"k": k, "n": n})
    if x_k < k:
        raise ImpossibleObservationError(
            "Наблюдение меньше ранга: такая выборка невозможна",
            details={"k": k, "x": x_k}
        )

    estimate = (n + 1) / k * x_k - 1
    variance_at: Optional[float] = None
    if N is not None:
        spec = OrderStatSpec(k, n, N)
        if x_k > spec.upper:
            raise ImpossibleObservationError(
                "Наблюдение вне носителя при заданном N",
                details={"k": k, "n": n, "N": N, "x": x_k}
            )
        variance_at = float(spec.N)
    elif plug_in:
        variance_at = max(estimate, float(n))

    standard_error = None
    if variance_at is not None:
        standard_error = math.sqrt(_variance_formula(variance_at, n, k))

    logging.debug(f"🎯 Оценка N по X({k})={x_k} при n={n}: {estimate}")
    return EstimateResult(estimate=estimate, k=k, n=n,
                          standard_error=standard_error, variance_at=variance_at)


def estimate_from_max(n: int, x_max: int, N: Optional[int] = None,
                      plug_in: bool = False) -> EstimateResult:
    """
    Оценка по максимуму выборки: (n + 1)/n * x_max - 1

    Raises:
        ImpossibleObservationError: Если x_max < n
    """
    return estimate_from_kth(n, n, x_max, N=N, plug_in=plug_in)


def estimate_from_sample(values: Sequence[int]) -> EstimateResult:
    """Оценка по наблюденным серийным номерам (без повторов)"""
    observed = [_require_int("value", v) for v in values]
    if not observed:
        raise ParameterError("Выборка не может быть пустой")
    if len(set(observed)) != len(observed):
        raise ParameterError("Серийные номера в выборке не должны повторяться")
    if min(observed) < 1:
        raise ImpossibleObservationError("Серийные номера начинаются с 1", details={"min": min(observed)})
    return estimate_from_max(len(observed), max(observed))


def _study_one(lam: float, phi: float, N: int, sims: int,
               rng: np.random.Generator) -> ConsistencyRow:
    spec = AsymptoticRegime(lam, phi, N).spec()
    draws = sample(spec, rng, sims)
    ratios = ((spec.n + 1) / spec.k * draws - 1) / N
    sd = float(np.std(ratios, ddof=1)) if sims > 1 else 0.0
    return ConsistencyRow(N=N, n=spec.n, k=spec.k, mean_ratio=float(np.mean(ratios)),
                          sd_ratio=sd, standard_error=sd / math.sqrt(sims))


def consistency_study(lam: float, phi: float, N_values: Iterable[int], sims: int,
                      seed: Optional[int] = None, threads: int = 1) -> List[ConsistencyRow]:
    """
    Монте-Карло исследование состоятельности: эмпирические среднее и
    стандартное отклонение отношения оценки к N

    Каждое N получает собственный поток случайности.

    Returns:
        Таблица по одной строке на N; пустая при sims = 0
    """
    sims = _require_int("sims", sims)
    if sims < 0:
        raise ParameterError("Число симуляций не может быть отрицательным", details={"sims": sims})
    N_values = [_require_int("N", N) for N in N_values]
    if sims == 0 or not N_values:
        return []

    generators = spawn_generators(seed, len(N_values))
    tasks = [(lambda N=N, g=g: _study_one(lam, phi, N, sims, g))
             for N, g in zip(N_values, generators)]

    logging.info(f"🔄 Исследование состоятельности: {len(N_values)} значений N, {sims} симуляций")
    with ThreadPoolManager(threads) as pool:
        return pool.run_tasks(tasks)
