"""
Совместное распределение набора порядковых статистик, его
Дирихле-мультиномиальная форма и не зависящее от N условное распределение
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Tuple

import numpy as np

from core.errors import ParameterError
from core.fpos import OrderStatSpec, _require_int, pmf
from core.special import dirichlet_multinomial_logpmf, exact_binom, log_binom


@dataclass(frozen=True)
class RankSet:
    """Строго возрастающие ранги k1 < ... < kr в 1..n вместе с n и N"""

    ranks: Tuple[int, ...]
    n: int
    N: int

    def __post_init__(self):
        ranks = tuple(_require_int("rank", k) for k in self.ranks)
        n = _require_int("n", self.n)
        N = _require_int("N", self.N)
        if not ranks:
            raise ParameterError("Набор рангов не может быть пустым")
        if any(b <= a for a, b in zip(ranks, ranks[1:])):
            raise ParameterError("Ранги должны строго возрастать", details={"ranks": ranks})
        if not (1 <= ranks[0] and ranks[-1] <= n <= N):
            raise ParameterError(
                "Требуется 1 <= k1 и kr <= n <= N",
                details={"ranks": ranks, "n": n, "N": N}
            )
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "N", N)

    @property
    def r(self) -> int:
        return len(self.ranks)

    def with_population(self, N: int) -> "RankSet":
        """Тот же набор рангов для другого размера популяции"""
        return RankSet(self.ranks, self.n, N)


@dataclass(frozen=True)
class DeltaVectors:
    """Разности наблюдений dx и рангов dk длины r + 1"""

    dx: np.ndarray
    dk: np.ndarray

    @property
    def is_supported(self) -> bool:
        return bool(np.all(self.dx >= self.dk))


@dataclass(frozen=True)
class SummationMatrix:
    """Нижнетреугольная 0/1 матрица r x (r + 1): строка i содержит единицы в столбцах 1..i"""

    matrix: np.ndarray

    @property
    def r(self) -> int:
        return self.matrix.shape[0]


def summation_matrix(r: int) -> SummationMatrix:
    """Матрица частичных сумм для r рангов"""
    r = _require_int("r", r)
    if r < 1:
        raise ParameterError("Число рангов r должно быть положительным", details={"r": r})
    return SummationMatrix(np.tril(np.ones((r, r + 1), dtype=np.int64)))


def _as_point(ranks: RankSet, x_star: Sequence[int]) -> np.ndarray:
    point = np.asarray([_require_int("x", x) for x in x_star], dtype=np.int64)
    if point.shape != (ranks.r,):
        raise ParameterError(
            "Длина вектора наблюдений не совпадает с числом рангов",
            details={"r": ranks.r, "length": len(point)}
        )
    return point


def _differences(values: np.ndarray, last: int) -> np.ndarray:
    return np.diff(np.concatenate(([0], values, [last])))


def delta_vectors(x_star: Sequence[int], ranks: RankSet) -> DeltaVectors:
    """
    Векторы разностей для наблюдения и рангов

    Args:
        x_star: Строго возрастающие значения длины r
        ranks: Набор рангов

    Returns:
        DeltaVectors с суммами N + 1 и n + 1

    Raises:
        ParameterError: Если значения не возрастают строго
    """
    point = _as_point(ranks, x_star)
    if np.any(np.diff(point) <= 0):
        raise ParameterError("Значения должны строго возрастать", details={"x": tuple(point.tolist())})
    return DeltaVectors(
        dx=_differences(point, ranks.N + 1),
        dk=_differences(np.asarray(ranks.ranks, dtype=np.int64), ranks.n + 1),
    )


def _supported_deltas(ranks: RankSet, x_star: Sequence[int]):
    """Векторы разностей либо None, если точка вне носителя"""
    point = _as_point(ranks, x_star)
    if np.any(np.diff(point) <= 0) or point[0] < 1 or point[-1] > ranks.N:
        return None
    deltas = delta_vectors(point, ranks)
    return deltas if deltas.is_supported else None


def joint_pmf(ranks: RankSet, x_star: Sequence[int]) -> float:
    """
    Совместная функция масс через произведение биномиальных коэффициентов

    P = prod_i C(dx_i - 1, dk_i - 1) / C(N, n)

    Returns:
        Вероятность; 0 вне носителя (включая совпадающие значения)
    """
    deltas = _supported_deltas(ranks, x_star)
    if deltas is None:
        return 0.0
    log_value = np.sum(log_binom(deltas.dx - 1, deltas.dk - 1)) - log_binom(ranks.N, ranks.n)
    return float(np.exp(log_value))


def exact_joint_pmf(ranks: RankSet, x_star: Sequence[int]) -> Fraction:
    """Совместная функция масс в рациональной арифметике"""
    deltas = _supported_deltas(ranks, x_star)
    if deltas is None:
        return Fraction(0)
    numerator = 1
    for dx, dk in zip(deltas.dx.tolist(), deltas.dk.tolist()):
        numerator *= exact_binom(dx - 1, dk - 1)
    return Fraction(numerator, exact_binom(ranks.N, ranks.n))


def dm_pmf(ranks: RankSet, x_star: Sequence[int]) -> float:
    """
    Совместная масса как сдвинутое Дирихле-мультиномиальное распределение
    DirMu(dx - dk | N - n, dk), вычисленное через log-gamma
    """
    deltas = _supported_deltas(ranks, x_star)
    if deltas is None:
        return 0.0
    counts = deltas.dx - deltas.dk
    return float(np.exp(dirichlet_multinomial_logpmf(counts, ranks.N - ranks.n, deltas.dk)))


def conditional_next_pmf(k_i: int, x_i: int, k_next: int, n: int, N: int, x: int) -> float:
    """
    P(X(k_next) = x | X(k_i) = x_i)

    Условное распределение совпадает с FPOS(k_next - k_i, n - k_i, N - x_i),
    сдвинутым на x_i.

    Raises:
        ParameterError: При нарушении вложенности рангов или x_i вне носителя
    """
    k_i, x_i, k_next, n, N, x = (_require_int(name, v) for name, v in
                                 (("k_i", k_i), ("x_i", x_i), ("k_next", k_next),
                                  ("n", n), ("N", N), ("x", x)))
    if not (1 <= k_i < k_next <= n <= N):
        raise ParameterError(
            "Требуется 1 <= k_i < k_next <= n <= N",
            details={"k_i": k_i, "k_next": k_next, "n": n, "N": N}
        )
    if not (k_i <= x_i <= N - n + k_i):
        raise ParameterError(
            "Условие x_i вне носителя X(k_i)",
            details={"x_i": x_i, "k_i": k_i, "n": n, "N": N}
        )
    spec = OrderStatSpec(k_next - k_i, n - k_i, N - x_i)
    return pmf(spec, x - x_i)


def conditional_lower_pmf(ranks: RankSet, x_star: Sequence[int]) -> float:
    """
    Вероятность первых r - 1 координат при условии последней

    Формула не содержит N: prod_{i<=r} C(dx_i - 1, dk_i - 1) / C(x_r - 1, k_r - 1).

    Raises:
        ParameterError: Если r < 2
    """
    if ranks.r < 2:
        raise ParameterError("Условное распределение требует r >= 2", details={"r": ranks.r})
    deltas = _supported_deltas(ranks, x_star)
    if deltas is None:
        return 0.0
    x_r, k_r = int(x_star[-1]), ranks.ranks[-1]
    log_value = (np.sum(log_binom(deltas.dx[:-1] - 1, deltas.dk[:-1] - 1))
                 - log_binom(x_r - 1, k_r - 1))
    return float(np.exp(log_value))


def factorization_check(ranks: RankSet, x_star: Sequence[int]) -> Tuple[float, float]:
    """
    Разложение совместной массы на условную часть и массу максимума набора

    Returns:
        Пара (FPOS(x** | k**, k_r - 1, x_r - 1), FPOS(x_r | k_r, n, N));
        (0, 0) если x_r вне носителя
    """
    if ranks.r < 2:
        raise ParameterError("Разложение требует r >= 2", details={"r": ranks.r})
    point = _as_point(ranks, x_star)
    k_r, x_r = ranks.ranks[-1], int(point[-1])
    last = OrderStatSpec(k_r, ranks.n, ranks.N)
    if not (last.lower <= x_r <= last.upper):
        return 0.0, 0.0

    lower_ranks = RankSet(ranks.ranks[:-1], k_r - 1, x_r - 1)
    return joint_pmf(lower_ranks, point[:-1]), pmf(last, x_r)


def support_lattice(ranks: RankSet) -> Iterator[Tuple[int, ...]]:
    """
    Перебор всех точек носителя совместного распределения

    Координаты удовлетворяют k_i <= x_i <= N - n + k_i и
    x_{i+1} - x_i >= k_{i+1} - k_i.
    """
    slack = ranks.N - ranks.n

    def extend(prefix: Tuple[int, ...], index: int):
        if index == ranks.r:
            yield prefix
            return
        k = ranks.ranks[index]
        low = k if index == 0 else prefix[-1] + k - ranks.ranks[index - 1]
        for x in range(low, slack + k + 1):
            yield from extend(prefix + (x,), index + 1)

    yield from extend((), 0)


def sample_joint(ranks: RankSet, rng: np.random.Generator, sims: int) -> np.ndarray:
    """
    Генерирование векторов порядковых статистик популяции 1..N

    X* = k* + L * Mu(N - n, S), S ~ Dirichlet(dk), где L - матрица частичных сумм.

    Args:
        ranks: Набор рангов
        rng: Генератор случайных чисел (изменяется)
        sims: Число векторов

    Returns:
        Целочисленная матрица sims x r
    """
    sims = _require_int("sims", sims)
    if sims < 0:
        raise ParameterError("Число симуляций не может быть отрицательным", details={"sims": sims})
    if sims == 0:
        return np.empty((0, ranks.r), dtype=np.int64)

    ks = np.asarray(ranks.ranks, dtype=np.int64)
    dk = _differences(ks, ranks.n + 1)
    gammas = rng.gamma(dk, 1.0, size=(sims, ranks.r + 1))
    shares = gammas / gammas.sum(axis=1, keepdims=True)

    # Mu(N - n, S) последовательными условными биномиальными по ячейкам
    counts = np.empty((sims, ranks.r + 1), dtype=np.int64)
    remaining = np.full(sims, ranks.N - ranks.n, dtype=np.int64)
    rest = np.ones(sims)
    for i in range(ranks.r):
        share = shares[:, i]
        p = np.divide(share, rest, out=np.ones(sims), where=rest > 0)
        counts[:, i] = rng.binomial(remaining, np.clip(p, 0.0, 1.0))
        remaining -= counts[:, i]
        rest -= share
    counts[:, ranks.r] = remaining

    logging.debug(f"🎲 Совместная выборка: {sims} векторов для рангов {ranks.ranks}")
    return ks + counts @ summation_matrix(ranks.r).matrix.T
