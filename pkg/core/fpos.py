"""
Точное одномерное распределение порядковой статистики конечной популяции (FPOS):
функция масс, функция распределения, моменты и смесевое генерирование
"""

import logging
import math
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import stats

from core.errors import DegenerateDistributionError, ParameterError, ResourceError
from core.special import (
    beta_binomial_logpmf,
    exact_binom,
    log_binom,
    rising,
)

# Граница точной рациональной арифметики по умолчанию
EXACT_MAX_POPULATION = 64

Scalar = Union[int, np.integer]


def _require_int(name: str, value) -> int:
    """Проверка что значение целое (bool не считается целым)"""
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ParameterError(f"Параметр {name} должен быть целым", details={name: value})
    return int(value)


@dataclass(frozen=True)
class OrderStatSpec:
    """
    Тройка (k, n, N): k-я порядковая статистика выборки объема n без возвращения
    из популяции 1..N
    """

    k: int
    n: int
    N: int

    def __post_init__(self):
        k = _require_int("k", self.k)
        n = _require_int("n", self.n)
        N = _require_int("N", self.N)
        if not 1 <= k <= n <= N:
            raise ParameterError(
                "Требуется 1 <= k <= n <= N",
                details={"k": k, "n": n, "N": N}
            )
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "N", N)

    @property
    def lower(self) -> int:
        """Нижняя граница носителя"""
        return self.k

    @property
    def upper(self) -> int:
        """Верхняя граница носителя"""
        return self.N - self.n + self.k

    @property
    def is_degenerate(self) -> bool:
        """Перепись (n = N): распределение вырождено в точке k"""
        return self.n == self.N

    def reflected(self) -> "OrderStatSpec":
        """Зеркальная спецификация (n - k + 1, n, N)"""
        return OrderStatSpec(self.n - self.k + 1, self.n, self.N)


@dataclass(frozen=True)
class MomentSet:
    """Среднее, дисперсия, асимметрия и куртозис; None для неопределенных значений"""

    mean: float
    variance: float
    skewness: Optional[float] = None
    kurtosis: Optional[float] = None

    @property
    def is_degenerate(self) -> bool:
        return self.variance == 0

    def to_dict(self) -> Dict[str, Optional[float]]:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
        }


@dataclass(frozen=True)
class MixtureDraw:
    """Латентные бета-величины u и соответствующие значения порядковой статистики x"""

    u: np.ndarray
    x: np.ndarray


@dataclass(frozen=True)
class ScaledMoments:
    """Моменты масштабированной статистики X(k) / (N + 1)"""

    mean: float
    variance: float


def support(spec: OrderStatSpec) -> Tuple[int, int]:
    """
    Носитель распределения

    Returns:
        Замкнутый целочисленный интервал (k, N - n + k)
    """
    return spec.lower, spec.upper


def log_pmf(spec: OrderStatSpec, x):
    """
    Натуральный логарифм функции масс

    Args:
        spec: Параметры распределения
        x: Точка (целое) или массив точек

    Returns:
        log FPOS(x | k, n, N); -inf вне носителя
    """
    x_arr = np.asarray(x)
    inside = (x_arr >= spec.lower) & (x_arr <= spec.upper)
    x_safe = np.where(inside, x_arr, spec.lower)
    value = (log_binom(x_safe - 1, spec.k - 1)
             + log_binom(spec.N - x_safe, spec.n - spec.k)
             - log_binom(spec.N, spec.n))
    result = np.where(inside, value, -np.inf)
    return float(result) if result.ndim == 0 else result


def pmf(spec: OrderStatSpec, x):
    """
    Функция масс C(x-1, k-1) C(N-x, n-k) / C(N, n)

    Args:
        spec: Параметры распределения
        x: Точка (целое) или массив точек

    Returns:
        Вероятность; ровно 0 вне носителя
    """
    result = np.exp(log_pmf(spec, x))
    return float(result) if np.ndim(result) == 0 else result


def pmf_table(spec: OrderStatSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Таблица функции масс на всем носителе

    Returns:
        Пара массивов (точки носителя, вероятности)
    """
    xs = np.arange(spec.lower, spec.upper + 1)
    return xs, pmf(spec, xs)


def cdf_table(spec: OrderStatSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Накопленные вероятности на носителе

    Последнее значение принудительно равно 1, таблица неубывающая.
    """
    xs, masses = pmf_table(spec)
    cumulative = np.minimum(np.cumsum(masses), 1.0)
    cumulative[-1] = 1.0
    return xs, cumulative


def cdf(spec: OrderStatSpec, x: int) -> float:
    """
    Функция распределения P(X(k) <= x)

    Returns:
        0 ниже носителя, 1 начиная с верхней границы
    """
    x = _require_int("x", x)
    if x < spec.lower:
        return 0.0
    if x >= spec.upper:
        return 1.0
    _, cumulative = cdf_table(spec)
    return float(cumulative[x - spec.lower])


def quantile(spec: OrderStatSpec, p: float) -> int:
    """
    Левонепрерывная обратная функция распределения

    Args:
        spec: Параметры распределения
        p: Уровень в (0, 1]

    Returns:
        Наименьшее x носителя с cdf(x) >= p
    """
    if not isinstance(p, numbers.Real) or not (0 < p <= 1):
        raise ParameterError("Уровень квантили должен лежать в (0, 1]", details={"p": p})
    xs, cumulative = cdf_table(spec)
    index = int(np.searchsorted(cumulative, p, side="left"))
    return int(xs[min(index, len(xs) - 1)])


def exact_factorial_moment(spec: OrderStatSpec, r: int) -> Fraction:
    """Точный возрастающий факториальный момент (N+1)^(r) k^(r) / (n+1)^(r)"""
    r = _require_int("r", r)
    if r < 0:
        raise ParameterError("Порядок момента r должен быть неотрицательным", details={"r": r})
    return Fraction(rising(spec.N + 1, r) * rising(spec.k, r), rising(spec.n + 1, r))


def factorial_moment(spec: OrderStatSpec, r: int) -> float:
    """
    Возрастающий факториальный момент E[X(X+1)...(X+r-1)]

    Args:
        spec: Параметры распределения
        r: Порядок, r >= 0 (r = 0 дает 1)

    Returns:
        Значение момента
    """
    return float(exact_factorial_moment(spec, r))


def _mean_variance(spec: OrderStatSpec) -> Tuple[float, float]:
    k, n, N = spec.k, spec.n, spec.N
    mean = (N + 1) * k / (n + 1)
    variance = (N + 1) * (N - n) * k * (n - k + 1) / ((n + 1) ** 2 * (n + 2))
    return mean, variance


def skewness(spec: OrderStatSpec) -> float:
    """
    Коэффициент асимметрии

    Raises:
        DegenerateDistributionError: При n = N
    """
    if spec.is_degenerate:
        raise DegenerateDistributionError(
            "Асимметрия не определена при нулевой дисперсии",
            details={"k": spec.k, "n": spec.n, "N": spec.N}
        )
    k, n, N = spec.k, spec.n, spec.N
    return ((n - 2 * k + 1)
            * (1 + 2 * (N - n - 1) / (n + 3))
            * math.sqrt((n + 2) / ((N + 1) * (N - n) * k * (n - k + 1))))


def _kurtosis_bracket(k, n, N):
    """Скобка формулы куртозиса; работает и с int, и с Fraction"""
    kk = k * (n - k + 1)
    d = (n + 3) * (n + 4)
    return (Fraction(n * (n + 1) ** 3 * (n + 2), (N - n) * d * kk)
            - Fraction(6 * (n + 1) ** 2 * (n + 2), (N - n) * d)
            + Fraction(6 * (N + 1) * (n + 1) ** 2 * (n + 2), d * kk)
            - Fraction(6 * (N + 1) * (5 * n + 11), d))


def kurtosis(spec: OrderStatSpec) -> float:
    """
    Куртозис (не избыточный: нормальное распределение дает 3)

    Raises:
        DegenerateDistributionError: При n = N
    """
    if spec.is_degenerate:
        raise DegenerateDistributionError(
            "Куртозис не определен при нулевой дисперсии",
            details={"k": spec.k, "n": spec.n, "N": spec.N}
        )
    return float(3 + _kurtosis_bracket(spec.k, spec.n, spec.N) / (spec.N + 1))


def moments(spec: OrderStatSpec) -> MomentSet:
    """
    Среднее, дисперсия, асимметрия и куртозис в замкнутой форме

    При n = N возвращается mean = k, variance = 0, а асимметрия и куртозис
    помечаются как неопределенные (None).
    """
    mean, variance = _mean_variance(spec)
    if spec.is_degenerate:
        return MomentSet(mean=float(spec.k), variance=0.0)
    return MomentSet(
        mean=mean,
        variance=variance,
        skewness=skewness(spec),
        kurtosis=kurtosis(spec)
    )


def exact_moments(spec: OrderStatSpec) -> Dict[str, Union[Fraction, float, None]]:
    """
    Моменты в рациональной арифметике

    Returns:
        Словарь mean, variance, kurtosis (Fraction) и skewness (float, иррациональна)
    """
    k, n, N = spec.k, spec.n, spec.N
    mean = Fraction((N + 1) * k, n + 1)
    variance = Fraction((N + 1) * (N - n) * k * (n - k + 1), (n + 1) ** 2 * (n + 2))
    if spec.is_degenerate:
        return {"mean": Fraction(k), "variance": Fraction(0), "skewness": None, "kurtosis": None}
    return {
        "mean": mean,
        "variance": variance,
        "skewness": skewness(spec),
        "kurtosis": 3 + _kurtosis_bracket(k, n, N) / (N + 1),
    }


def scaled_moments(spec: OrderStatSpec) -> ScaledMoments:
    """
    Моменты масштабированной статистики X(k) / (N + 1)

    Среднее совпадает со средним Beta(k, n - k + 1), дисперсия меньше
    в (N - n) / (N + 1) раз.
    """
    k, n, N = spec.k, spec.n, spec.N
    beta_variance = k * (n - k + 1) / ((n + 1) ** 2 * (n + 2))
    return ScaledMoments(mean=k / (n + 1), variance=(N - n) / (N + 1) * beta_variance)


def check_exact_size(spec: OrderStatSpec, max_population: int) -> None:
    if spec.N > max_population:
        raise ResourceError(
            "Точная рациональная арифметика ограничена размером популяции",
            details={"N": spec.N, "max_population": max_population}
        )


def exact_pmf(spec: OrderStatSpec, x: int,
              max_population: int = EXACT_MAX_POPULATION) -> Fraction:
    """
    Функция масс в рациональной арифметике

    Raises:
        ResourceError: Если N превышает max_population
    """
    check_exact_size(spec, max_population)
    x = _require_int("x", x)
    if x < spec.lower or x > spec.upper:
        return Fraction(0)
    return Fraction(
        exact_binom(x - 1, spec.k - 1) * exact_binom(spec.N - x, spec.n - spec.k),
        exact_binom(spec.N, spec.n)
    )


def exact_pmf_table(spec: OrderStatSpec,
                    max_population: int = EXACT_MAX_POPULATION) -> Dict[int, Fraction]:
    """Точная таблица масс на носителе"""
    check_exact_size(spec, max_population)
    return {x: exact_pmf(spec, x, max_population) for x in range(spec.lower, spec.upper + 1)}


def beta_binomial_pmf(spec: OrderStatSpec, x):
    """
    Масса через тождество со сдвинутым бета-биномиальным распределением
    BetaBin(x - k | N - n, k, n - k + 1)
    """
    c = np.asarray(x) - spec.k
    result = np.exp(beta_binomial_logpmf(c, spec.N - spec.n, spec.k, spec.n - spec.k + 1))
    return float(result) if result.ndim == 0 else result


def negative_hypergeometric_pmf(spec: OrderStatSpec, x):
    """
    Масса через сдвинутое отрицательное гипергеометрическое распределение
    NegHyper(x - k | N, N - n, k): успехи до k-й неудачи
    """
    y = np.asarray(x) - spec.k
    result = stats.nhypergeom.pmf(y, spec.N, spec.N - spec.n, spec.k)
    return float(result) if np.ndim(result) == 0 else result


def sample_mixture(spec: OrderStatSpec, rng: np.random.Generator, count: int) -> MixtureDraw:
    """
    Смесевое генерирование X(k) = k + Bin(N - n, U), U ~ Beta(k, n - k + 1)

    Бета-величина строится как G1 / (G1 + G2) из двух гамма-величин.

    Args:
        spec: Параметры распределения
        rng: Генератор случайных чисел (изменяется)
        count: Количество значений, count >= 0

    Returns:
        MixtureDraw с латентными u и значениями x
    """
    count = _require_int("count", count)
    if count < 0:
        raise ParameterError("Количество значений не может быть отрицательным", details={"count": count})

    g1 = rng.gamma(spec.k, 1.0, size=count)
    g2 = rng.gamma(spec.n - spec.k + 1, 1.0, size=count)
    u = g1 / (g1 + g2)
    x = spec.k + rng.binomial(spec.N - spec.n, u)

    logging.debug(f"🎲 FPOS({spec.k}, {spec.n}, {spec.N}): сгенерировано {count} значений")
    return MixtureDraw(u=u, x=np.asarray(x, dtype=np.int64))


def sample(spec: OrderStatSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    """
    Генерирование значений порядковой статистики

    Одинаковое зерно генератора дает одинаковую последовательность.

    Returns:
        Целочисленный массив длины count
    """
    return sample_mixture(spec, rng, count).x
