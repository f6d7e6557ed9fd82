"""
Эталон полным перебором: все C(N, n) подмножеств популяции 1..N
в рациональной арифметике
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Dict, Tuple

from core.errors import ResourceError
from core.fpos import OrderStatSpec
from core.joint import RankSet


@dataclass(frozen=True)
class EnumerationBudget:
    """Максимальное число перебираемых подмножеств"""

    max_subsets: int = 10 ** 7

    def check(self, N: int, n: int) -> int:
        """
        Проверка бюджета перед перебором

        Returns:
            Число подмножеств C(N, n)

        Raises:
            ResourceError: Если C(N, n) превышает бюджет
        """
        total = math.comb(N, n)
        if total > self.max_subsets:
            raise ResourceError(
                "Полный перебор превышает бюджет подмножеств",
                details={"N": N, "n": n, "subsets": total, "max_subsets": self.max_subsets}
            )
        return total


DEFAULT_BUDGET = EnumerationBudget()


def _subsets(N: int, n: int, budget: EnumerationBudget):
    total = budget.check(N, n)
    logging.debug(f"🔄 Перебор {total} подмножеств размера {n} из {N}")
    return total, combinations(range(1, N + 1), n)


def enumerate_pmf(spec: OrderStatSpec,
                  budget: EnumerationBudget = DEFAULT_BUDGET) -> Dict[int, Fraction]:
    """
    Эмпирическое распределение k-го наименьшего элемента по всем подмножествам

    Подмножества перебираются в лексикографическом порядке, каждое
    отсортировано по возрастанию.

    Returns:
        Словарь x -> точная вероятность (только точки с ненулевой массой)
    """
    total, subsets = _subsets(spec.N, spec.n, budget)
    counts: Dict[int, int] = {}
    for subset in subsets:
        x = subset[spec.k - 1]
        counts[x] = counts.get(x, 0) + 1
    return {x: Fraction(c, total) for x, c in sorted(counts.items())}


def enumerate_joint_pmf(ranks: RankSet,
                        budget: EnumerationBudget = DEFAULT_BUDGET) -> Dict[Tuple[int, ...], Fraction]:
    """
    Совместное распределение набора порядковых статистик перебором

    Args:
        ranks: Набор рангов с объемом выборки и размером популяции

    Returns:
        Словарь кортеж значений -> точная вероятность
    """
    total, subsets = _subsets(ranks.N, ranks.n, budget)
    counts: Dict[Tuple[int, ...], int] = {}
    for subset in subsets:
        key = tuple(subset[r - 1] for r in ranks.ranks)
        counts[key] = counts.get(key, 0) + 1
    return {key: Fraction(c, total) for key, c in sorted(counts.items())}


def enumerate_expectation(spec: OrderStatSpec, g: Callable[[int], Fraction],
                          budget: EnumerationBudget = DEFAULT_BUDGET) -> Fraction:
    """Точное математическое ожидание g(X(k)) перебором"""
    table = enumerate_pmf(spec, budget)
    return sum((Fraction(g(x)) * p for x, p in table.items()), Fraction(0))
