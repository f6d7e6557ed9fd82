"""
Комбинаторика в лог-пространстве и эталонные массы смежных распределений
"""

import math
from typing import Sequence, Union

import numpy as np
from scipy import special

ArrayLike = Union[int, float, Sequence[int], np.ndarray]


def log_binom(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    """
    Логарифм биномиального коэффициента C(a, b) через log-gamma

    Args:
        a: Верхний аргумент (целый, скаляр или массив)
        b: Нижний аргумент (целый, скаляр или массив)

    Returns:
        log C(a, b); -inf там, где коэффициент структурно равен нулю
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    valid = (a >= 0) & (b >= 0) & (b <= a)

    # Безопасные аргументы для маскированных позиций
    a_safe = np.where(valid, a, 0.0)
    b_safe = np.where(valid, b, 0.0)
    value = (special.gammaln(a_safe + 1)
             - special.gammaln(b_safe + 1)
             - special.gammaln(a_safe - b_safe + 1))
    return np.where(valid, value, -np.inf)


def log_falling(a: ArrayLike, r: int) -> np.ndarray:
    """Логарифм убывающего факториала (a)_r = a(a-1)...(a-r+1) при a >= r"""
    a = np.asarray(a, dtype=np.float64)
    return special.gammaln(a + 1) - special.gammaln(a - r + 1)


def rising(a: int, r: int) -> int:
    """Точный возрастающий факториал a^(r) = a(a+1)...(a+r-1)"""
    return math.prod(range(a, a + r))


def exact_binom(a: int, b: int) -> int:
    """C(a, b) в целых числах; 0 вне треугольника Паскаля"""
    if a < 0 or b < 0 or b > a:
        return 0
    return math.comb(a, b)


def beta_binomial_logpmf(c: ArrayLike, m: int, alpha: float, beta: float) -> np.ndarray:
    """
    Логарифм массы BetaBin(c | m, alpha, beta)

    Вычисляется через бета-функцию, независимо от комбинаторной формы FPOS.

    Args:
        c: Число успехов (скаляр или массив)
        m: Число испытаний
        alpha: Первый параметр бета-распределения
        beta: Второй параметр бета-распределения

    Returns:
        log-масса; -inf вне 0..m
    """
    c = np.asarray(c, dtype=np.float64)
    inside = (c >= 0) & (c <= m)
    c_safe = np.where(inside, c, 0.0)
    value = (log_binom(m, c_safe)
             + special.betaln(c_safe + alpha, m - c_safe + beta)
             - special.betaln(alpha, beta))
    return np.where(inside, value, -np.inf)


def dirichlet_multinomial_logpmf(counts: Sequence[int], m: int,
                                 alphas: Sequence[float]) -> float:
    """
    Логарифм массы DirichletMultinomial(counts | m, alphas)

    Args:
        counts: Вектор счетчиков длины K
        m: Число испытаний
        alphas: Параметры Дирихле длины K

    Returns:
        log-масса; -inf если счетчики отрицательны или не суммируются в m
    """
    counts = np.asarray(counts, dtype=np.float64)
    alphas = np.asarray(alphas, dtype=np.float64)
    if counts.shape != alphas.shape:
        raise ValueError("counts и alphas должны иметь одинаковую длину")
    if np.any(counts < 0) or counts.sum() != m:
        return -math.inf

    total = alphas.sum()
    value = (special.gammaln(total) + special.gammaln(m + 1) - special.gammaln(m + total)
             + np.sum(special.gammaln(counts + alphas)
                      - special.gammaln(alphas)
                      - special.gammaln(counts + 1)))
    return float(value)
