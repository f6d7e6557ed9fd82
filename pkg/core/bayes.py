"""
Байесовская апостериорная оценка размера популяции по одной порядковой статистике:
функция правдоподобия, функция H с гарантированной погрешностью усечения,
апостериорные вероятности и моменты
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, NamedTuple, Optional

import numpy as np
from scipy import special

from core.errors import (
    CertificationError,
    ImpossibleObservationError,
    InconsistentPriorError,
    ParameterError,
)
from core.fpos import _require_int
from core.special import log_falling

DEFAULT_TOL = 1e-10
INITIAL_TRUNCATION = 1024
MAX_TRUNCATION = 50_000_000
CHUNK_SIZE = 1_000_000

# Проверка нормировки выполняется только для носителя не длиннее этого
_NORMALIZATION_CHECK_LIMIT = 10 ** 7

MassFunction = Callable[[np.ndarray], np.ndarray]
TailFunction = Callable[[int], float]


@dataclass(frozen=True)
class PriorSpec:
    """
    Априорное распределение N

    mass: векторизованная функция масс на положительных целых;
    tail: гарантированная верхняя оценка суммы масс правее N*;
    support_hint: конечная верхняя граница носителя
    """

    mass: MassFunction
    tail: Optional[TailFunction] = None
    support_hint: Optional[int] = None
    name: str = "custom"
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if self.support_hint is not None and self.check and self.support_hint <= _NORMALIZATION_CHECK_LIMIT:
            masses = self.masses(np.arange(1, self.support_hint + 1))
            if np.any(masses < 0):
                raise ParameterError("Априорные массы должны быть неотрицательными", details={"prior": self.name})
            total = float(np.sum(masses))
            if abs(total - 1) > 1e-12:
                raise ParameterError(
                    "Априорное распределение с конечным носителем должно быть нормировано",
                    details={"prior": self.name, "total": total}
                )

    def masses(self, ns: np.ndarray) -> np.ndarray:
        """Массы в точках ns; 0 правее support_hint"""
        ns = np.asarray(ns)
        values = np.asarray(self.mass(ns), dtype=np.float64)
        values = np.broadcast_to(values, ns.shape)
        if self.support_hint is not None:
            values = np.where(ns <= self.support_hint, values, 0.0)
        return values

    def tail_bound(self, truncation: int) -> Optional[float]:
        """Верхняя оценка суммы масс правее truncation, если известна"""
        if self.support_hint is not None and truncation >= self.support_hint:
            return 0.0
        if self.tail is None:
            return None
        return float(self.tail(truncation))

    def shifted(self, r: int) -> "PriorSpec":
        """Сдвинутое распределение pi_r(j) = pi_0(j + r) (не нормировано)"""
        base = self
        tail = None if self.tail is None else (lambda t: base.tail(t + r))
        hint = None if self.support_hint is None else self.support_hint - r
        return PriorSpec(
            mass=lambda ns: base.masses(np.asarray(ns) + r),
            tail=tail,
            support_hint=hint,
            name=f"{self.name}>>{r}",
            check=False,
        )

    @classmethod
    def uniform(cls, a: int, b: int) -> "PriorSpec":
        """Равномерное распределение на {a, ..., b}"""
        a, b = _require_int("a", a), _require_int("b", b)
        if not 1 <= a <= b:
            raise ParameterError("Требуется 1 <= a <= b", details={"a": a, "b": b})
        weight = 1.0 / (b - a + 1)
        return cls(
            mass=lambda ns: np.where((np.asarray(ns) >= a) & (np.asarray(ns) <= b), weight, 0.0),
            tail=lambda t: max(0, b - max(t, a - 1)) * weight,
            support_hint=b,
            name=f"uniform:{a},{b}",
        )

    @classmethod
    def point_mass(cls, N0: int) -> "PriorSpec":
        """Вырожденное распределение в N0"""
        N0 = _require_int("N0", N0)
        if N0 < 1:
            raise ParameterError("Точка N0 должна быть положительной", details={"N0": N0})
        return cls(
            mass=lambda ns: np.where(np.asarray(ns) == N0, 1.0, 0.0),
            support_hint=N0,
            name=f"pointmass:{N0}",
        )

    @classmethod
    def power_law(cls, alpha: float, n_min: int) -> "PriorSpec":
        """
        Степенное распределение pi(N) = N^(-alpha) / zeta(alpha, n_min) при N >= n_min

        Хвост оценивается интегралом: sum_{N > N*} N^(-alpha) <= N*^(1 - alpha) / (alpha - 1).
        """
        n_min = _require_int("n_min", n_min)
        if not alpha > 1:
            raise ParameterError("Степенное распределение нормируемо только при alpha > 1", details={"alpha": alpha})
        if n_min < 1:
            raise ParameterError("Нижняя граница должна быть положительной", details={"n_min": n_min})
        norm = float(special.zeta(alpha, n_min))

        def mass(ns):
            ns = np.asarray(ns, dtype=np.float64)
            safe = np.maximum(ns, 1.0)
            return np.where(ns >= n_min, safe ** (-alpha) / norm, 0.0)

        def tail(t):
            if t < n_min:
                return 1.0
            return min(1.0, t ** (1 - alpha) / ((alpha - 1) * norm))

        return cls(mass=mass, tail=tail, name=f"powerlaw:{alpha},{n_min}")


def parse_prior(text: str) -> PriorSpec:
    """
    Разбор описания априорного распределения

    Форматы: 'uniform:a,b', 'pointmass:N0', 'powerlaw:alpha,Nmin'
    """
    kind, _, args = text.partition(":")
    parts = [p.strip() for p in args.split(",") if p.strip()]
    try:
        if kind == "uniform" and len(parts) == 2:
            return PriorSpec.uniform(int(parts[0]), int(parts[1]))
        if kind == "pointmass" and len(parts) == 1:
            return PriorSpec.point_mass(int(parts[0]))
        if kind == "powerlaw" and len(parts) == 2:
            return PriorSpec.power_law(float(parts[0]), int(parts[1]))
    except ValueError:
        pass
    raise ParameterError(
        "Некорректное описание априорного распределения",
        details={"prior": text, "expected": "uniform:a,b | pointmass:N0 | powerlaw:alpha,Nmin"}
    )


class HValue(NamedTuple):
    """Частичная сумма H до N*: истинное H лежит в [value, value + error_bound]"""

    value: float
    truncation_point: int
    error_bound: float


class PosteriorMoment(NamedTuple):
    """Факториальный момент как середина интервала и его полуширина"""

    value: float
    error_bound: float
    lower: float
    upper: float


@dataclass
class Posterior:
    """Апостериорное распределение N"""

    support_min: int
    masses: np.ndarray
    mean: Optional[float]
    variance: Optional[float]
    error_bound: float
    h: HValue

    @property
    def truncation_point(self) -> int:
        return self.h.truncation_point

    def to_dict(self) -> Dict[str, Any]:
        return {
            "support_min": self.support_min,
            "masses": [float(m) for m in self.masses],
            "mean": self.mean,
            "variance": self.variance,
            "error_bound": self.error_bound,
            "h": self.h.value,
            "truncation_point": self.h.truncation_point,
        }


def _log_likelihood(ns: np.ndarray, n: int, k: int, x: int) -> np.ndarray:
    """
    log L_x(N) = log[(N - n)! (N - x)! / (N! (N - n - x + k)!)]

    Допускает n = k = 0 (сдвинутые параметры); -inf при N < n + x - k.
    """
    ns = np.asarray(ns, dtype=np.float64)
    valid = (ns >= n) & (ns >= x) & (ns >= n + x - k)
    safe = np.where(valid, ns, float(max(n, x, n + x - k)))
    value = (special.gammaln(safe - n + 1) + special.gammaln(safe - x + 1)
             - special.gammaln(safe + 1) - special.gammaln(safe - n - x + k + 1))
    return np.where(valid, value, -np.inf)


def _check_observation(n: int, k: int, x: int):
    n, k, x = _require_int("n", n), _require_int("k", k), _require_int("x", x)
    if not 1 <= k <= n:
        raise ParameterError("Требуется 1 <= k <= n", details={"k": k, "n": n})
    if x < k:
        raise ImpossibleObservationError("Наблюдение меньше ранга", details={"k": k, "x": x})
    return n, k, x


def likelihood(N, n: int, k: int, x: int):
    """
    Ненормированная функция правдоподобия L_x(N)

    Пропорциональна FPOS(x | k, n, N) как функция N.

    Returns:
        Значение (или массив); 0 при N < n + x - k
    """
    n, k, x = _check_observation(n, k, x)
    result = np.exp(_log_likelihood(N, n, k, x))
    return float(result) if np.ndim(result) == 0 else result


def _truncation_bound(truncation: int, k: int, prior: PriorSpec) -> Optional[float]:
    """
    Верхняя оценка хвоста sum_{N > N*} pi(N) L(N)

    Используется L(N) <= 1/(N)_k: при k >= 2 телескопическая сумма
    1/((k - 1)(N*)_{k-1}), при известном хвосте априорного распределения
    tail(N*)/(N* + 1)_k. Возвращается меньшая из доступных оценок.
    """
    candidates = []
    tail = prior.tail_bound(truncation)
    if tail is not None:
        if tail == 0:
            return 0.0
        candidates.append(float(np.exp(np.log(tail) - log_falling(truncation + 1, k))))
    if k >= 2 and truncation >= k - 1:
        candidates.append(float(np.exp(-math.log(k - 1) - log_falling(truncation, k - 1))))
    return min(candidates) if candidates else None


def _partial_sum(n: int, k: int, x: int, prior: PriorSpec,
                 lo: int, hi: int, chunk_size: int) -> float:
    total = 0.0
    for start in range(lo, hi + 1, chunk_size):
        ns = np.arange(start, min(hi, start + chunk_size - 1) + 1)
        total += float(np.sum(prior.masses(ns) * np.exp(_log_likelihood(ns, n, k, x))))
    return total


def _h(n: int, k: int, x: int, prior: PriorSpec, tol: float,
       truncation: Optional[int] = None,
       initial_truncation: int = INITIAL_TRUNCATION,
       max_truncation: int = MAX_TRUNCATION,
       chunk_size: int = CHUNK_SIZE,
       relative: bool = False) -> HValue:
    """
    H для (возможно сдвинутых) параметров

    При relative=True усечение останавливается, когда оценка хвоста
    не превосходит tol * H (пока частичная сумма нулевая - tol).
    """
    start = max(n + x - k, 0)

    if truncation is not None:
        bound = _truncation_bound(truncation, k, prior)
        value = _partial_sum(n, k, x, prior, start, truncation, chunk_size)
        return HValue(value, truncation, math.inf if bound is None else bound)

    if prior.support_hint is not None:
        end = max(prior.support_hint, start - 1)
        return HValue(_partial_sum(n, k, x, prior, start, end, chunk_size), end, 0.0)

    point = max(initial_truncation, start)
    value = _partial_sum(n, k, x, prior, start, point, chunk_size)
    while True:
        bound = _truncation_bound(point, k, prior)
        if bound is None:
            raise CertificationError(
                "Погрешность усечения H не оценивается: нужен k >= 2, конечный носитель или хвост априорного распределения",
                details={"k": k, "prior": prior.name}
            )
        limit = tol * value if relative and value > 0 else tol
        if bound <= limit:
            break
        if point * 2 > max_truncation:
            raise CertificationError(
                "Не удалось гарантировать погрешность усечения H",
                details={"tol": tol, "relative": relative, "bound": bound,
                         "truncation": point, "max_truncation": max_truncation}
            )
        value += _partial_sum(n, k, x, prior, point + 1, point * 2, chunk_size)
        point *= 2
        logging.debug(f"🔄 Усечение H: N*={point}, оценка хвоста={bound:.3e}")

    return HValue(value, point, bound)


def h_function(n: int, k: int, x: int, prior: PriorSpec, tol: float = DEFAULT_TOL,
               truncation: Optional[int] = None, **limits) -> HValue:
    """
    Нормирующая функция H(n, k, x, pi) = sum_N pi(N) L_x(N)

    Args:
        n, k, x: Объем выборки, ранг и наблюдение
        prior: Априорное распределение
        tol: Допустимая погрешность усечения (> 0)
        truncation: Принудительная точка усечения N*
        limits: initial_truncation, max_truncation, chunk_size

    Returns:
        HValue с частичной суммой, точкой усечения и оценкой погрешности

    Raises:
        CertificationError: Если погрешность не удается гарантировать ниже tol
    """
    n, k, x = _check_observation(n, k, x)
    if not tol > 0:
        raise ParameterError("Погрешность tol должна быть положительной", details={"tol": tol})
    return _h(n, k, x, prior, tol, truncation, **limits)


def _nonzero_h(n: int, k: int, x: int, prior: PriorSpec, tol: float, **limits) -> HValue:
    """Знаменатель апостериорных величин с относительной погрешностью tol / 2"""
    n, k, x = _check_observation(n, k, x)
    if not tol > 0:
        raise ParameterError("Погрешность tol должна быть положительной", details={"tol": tol})
    h = _h(n, k, x, prior, tol / 2, relative=True, **limits)
    if h.value == 0:
        raise InconsistentPriorError(
            "Априорное распределение не дает массы ни одному N, совместимому с наблюдением",
            details={"n": n, "k": k, "x": x, "prior": prior.name, "min_N": n + x - k}
        )
    return h


def posterior_pmf(i: int, n: int, k: int, x: int, prior: PriorSpec,
                  tol: float = DEFAULT_TOL, **limits) -> float:
    """
    Апостериорная вероятность P(N = i | X(k) = x) = L_x(i) pi(i) / H

    Raises:
        InconsistentPriorError: Если H = 0
    """
    h = _nonzero_h(n, k, x, prior, tol, **limits)
    weight = float(prior.masses(np.asarray([i]))[0]) * likelihood(i, n, k, x)
    return weight / h.value


def posterior_factorial_moment(r: int, n: int, k: int, x: int, prior: PriorSpec,
                               tol: float = DEFAULT_TOL, **limits) -> PosteriorMoment:
    """
    Апостериорный убывающий факториальный момент E[(N)_r | X(k) = x]
    как отношение H(n - r, k - r, x - r, pi_r) / H(n, k, x, pi_0)

    Обе суммы гарантируются с относительной погрешностью tol / 2, поэтому
    относительная полуширина интервала момента не превосходит tol.
    При конечном носителе суммы точные и допускается r > k.

    Raises:
        ParameterError: Если r < 0 или r > k при бесконечном носителе
        CertificationError: Если сдвинутую H не удается гарантировать
    """
    r = _require_int("r", r)
    if r < 0 or (r > k and prior.support_hint is None):
        raise ParameterError(
            "Порядок момента должен лежать в 0..k (r > k только при конечном носителе)",
            details={"r": r, "k": k, "prior": prior.name}
        )
    denominator = _nonzero_h(n, k, x, prior, tol, **limits)
    if r == 0:
        return PosteriorMoment(1.0, 0.0, 1.0, 1.0)

    numerator = _h(n - r, k - r, x - r, prior.shifted(r), tol / 2, relative=True, **limits)
    lower = numerator.value / (denominator.value + denominator.error_bound)
    upper = (numerator.value + numerator.error_bound) / denominator.value
    return PosteriorMoment((lower + upper) / 2, (upper - lower) / 2, lower, upper)


class MeanVariance(NamedTuple):
    mean: float
    variance: float
    error_bound: float


def posterior_mean_variance(n: int, k: int, x: int, prior: PriorSpec,
                            tol: float = DEFAULT_TOL, **limits) -> MeanVariance:
    """
    Апостериорные среднее и дисперсия:
    mean = E[(N)_1], variance = E[(N)_2] + mean - mean^2

    Returns:
        MeanVariance; error_bound - наибольшая из полуширин интервалов
    """
    first = posterior_factorial_moment(1, n, k, x, prior, tol, **limits)
    second = posterior_factorial_moment(2, n, k, x, prior, tol, **limits)

    # m - m^2 убывает при m >= 1, а апостериорное среднее не меньше n
    var_lower = second.lower + first.upper - first.upper ** 2
    var_upper = second.upper + first.lower - first.lower ** 2
    variance = max((var_lower + var_upper) / 2, 0.0)
    return MeanVariance(first.value, variance,
                        max(first.error_bound, (var_upper - var_lower) / 2))


def posterior(n: int, k: int, x: int, prior: PriorSpec,
              tol: float = DEFAULT_TOL, **limits) -> Posterior:
    """
    Полное апостериорное распределение для вывода

    Массы перечисляются от n + x - k до точки усечения, хвостовые массы
    меньше tol отбрасываются. При k = 1 и бесконечном носителе
    дисперсия не вычисляется.
    """
    h = _nonzero_h(n, k, x, prior, tol, **limits)
    support_min = n + x - k
    ns = np.arange(support_min, max(h.truncation_point, support_min - 1) + 1)
    masses = prior.masses(ns) * np.exp(_log_likelihood(ns, n, k, x)) / h.value

    keep = np.nonzero(masses >= tol)[0]
    masses = masses[:keep[-1] + 1] if keep.size else masses[:0]

    if k >= 2 or prior.support_hint is not None:
        summary = posterior_mean_variance(n, k, x, prior, tol, **limits)
        mean, variance, error = summary.mean, summary.variance, summary.error_bound
    else:
        moment = posterior_factorial_moment(1, n, k, x, prior, tol, **limits)
        mean, variance, error = moment.value, None, moment.error_bound
        logging.warning("⚠️ При k = 1 и бесконечном носителе апостериорная дисперсия не вычисляется")

    return Posterior(support_min=support_min, masses=masses, mean=mean, variance=variance,
                     error_bound=max(error, h.error_bound), h=h)
