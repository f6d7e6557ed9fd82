"""
Генерирование порядковых статистик произвольной конечной популяции через ранги
и обобщенное распределение FPOS
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import ParameterError
from core.fpos import OrderStatSpec, _require_int, pmf, pmf_table
from core.joint import RankSet, sample_joint
from workers.thread_pool import ThreadPoolManager, shard_sizes, spawn_generators


@dataclass(frozen=True)
class Population:
    """
    Конечная популяция значений, отсортированная по неубыванию
    (повторы допускаются)
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.sort(np.asarray(self.values, dtype=np.float64).ravel())
        if values.size == 0:
            raise ParameterError("Популяция не может быть пустой")
        if not np.all(np.isfinite(values)):
            raise ParameterError("Значения популяции должны быть конечными числами")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "Population":
        """
        Загрузка популяции из текстового файла: одно значение на строку

        Raises:
            ParameterError: Если строку не удается разобрать как число
        """
        path = Path(path)
        values = []
        with path.open("r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, 1):
                text = line.strip()
                if not text:
                    continue
                try:
                    values.append(float(text))
                except ValueError:
                    raise ParameterError(
                        "Некорректное значение в файле популяции",
                        details={"file": str(path), "line": line_number, "value": text}
                    )
        logging.debug(f"📂 Загружена популяция из {path}: {len(values)} значений")
        return cls(np.asarray(values))

    @classmethod
    def identity(cls, N: int) -> "Population":
        """Популяция 1..N"""
        return cls(np.arange(1, N + 1))

    @property
    def N(self) -> int:
        return int(self.values.size)

    def omega(self, x):
        """Значение z(x) для ранга x (скаляр или массив рангов 1..N)"""
        return self.values[np.asarray(x) - 1]

    def omega_inverse(self, z: float) -> Tuple[int, int]:
        """
        Прообраз значения: непрерывный отрезок рангов

        Returns:
            Пара (первый, последний) ранг; (0, -1) если значение не достигается
        """
        lo = int(np.searchsorted(self.values, z, side="left"))
        hi = int(np.searchsorted(self.values, z, side="right"))
        if lo == hi:
            return 0, -1
        return lo + 1, hi


@dataclass(frozen=True)
class SimulationRequest:
    """Запрос на генерирование: популяция, объем выборки, ранги в порядке вызывающего и число симуляций"""

    population: Population
    size: int
    ranks: Tuple[int, ...]
    sims: int

    def __post_init__(self):
        size = _require_int("size", self.size)
        sims = _require_int("sims", self.sims)
        ranks = tuple(_require_int("rank", k) for k in self.ranks)
        if not 1 <= size <= self.population.N:
            raise ParameterError(
                "Объем выборки должен лежать в 1..N",
                details={"size": size, "N": self.population.N}
            )
        if not ranks:
            raise ParameterError("Набор рангов не может быть пустым")
        if len(set(ranks)) != len(ranks):
            raise ParameterError("Ранги не должны повторяться", details={"ranks": ranks})
        if min(ranks) < 1 or max(ranks) > size:
            raise ParameterError("Ранги должны лежать в 1..n", details={"ranks": ranks, "n": size})
        if sims < 0:
            raise ParameterError("Число симуляций не может быть отрицательным", details={"sims": sims})
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "sims", sims)
        object.__setattr__(self, "ranks", ranks)

    @property
    def rank_set(self) -> RankSet:
        return RankSet(tuple(sorted(self.ranks)), self.size, self.population.N)

    @property
    def caller_order(self) -> np.ndarray:
        """Позиции рангов вызывающего в отсортированном наборе"""
        ordered = sorted(self.ranks)
        return np.asarray([ordered.index(k) for k in self.ranks])

    def with_sims(self, sims: int) -> "SimulationRequest":
        return SimulationRequest(self.population, self.size, self.ranks, sims)


def sample_order_stats(req: SimulationRequest, rng: np.random.Generator) -> np.ndarray:
    """
    Генерирование порядковых статистик через ранги:
    гамма -> Дирихле -> мультиномиальное -> накопленная сумма -> z

    Args:
        req: Запрос на генерирование
        rng: Генератор случайных чисел (изменяется)

    Returns:
        Матрица sims x r значений популяции, столбцы в порядке рангов вызывающего
    """
    rank_values = sample_joint(req.rank_set, rng, req.sims)
    return req.population.omega(rank_values[:, req.caller_order])


def naive_sample_order_stats(req: SimulationRequest, rng: np.random.Generator) -> np.ndarray:
    """
    Эталонный способ: выборка всех n индексов частичной перестановкой
    Фишера-Йетса, сортировка и извлечение нужных рангов

    Returns:
        Матрица той же формы, что и у sample_order_stats
    """
    N, n, sims = req.population.N, req.size, req.sims
    index = np.tile(np.arange(N), (sims, 1))
    rows = np.arange(sims)
    for i in range(n):
        j = rng.integers(i, N, size=sims)
        current = index[rows, i].copy()
        index[rows, i] = index[rows, j]
        index[rows, j] = current

    # Популяция отсортирована, поэтому порядок индексов совпадает с порядком значений
    chosen = np.sort(index[:, :n], axis=1)
    columns = np.asarray(req.ranks) - 1
    return req.population.values[chosen[:, columns]]


def sample_order_stats_sharded(req: SimulationRequest,
                               seed: Optional[int],
                               shard_size: int = 100_000,
                               threads: int = 1) -> np.ndarray:
    """
    Генерирование большими партиями на пуле потоков

    Каждый шард получает собственный поток случайности из SeedSequence(seed);
    результат не зависит от числа потоков.
    """
    sizes = shard_sizes(req.sims, shard_size)
    if not sizes:
        return np.empty((0, len(req.ranks)), dtype=np.float64)

    generators = spawn_generators(seed, len(sizes))
    tasks = [
        (lambda sub=req.with_sims(size), g=g: sample_order_stats(sub, g))
        for size, g in zip(sizes, generators)
    ]
    logging.info(f"🔄 Генерирование {req.sims} симуляций: {len(sizes)} шардов, {threads} потоков")

    with ThreadPoolManager(threads) as pool:
        parts = pool.run_tasks(tasks)
    return np.vstack(parts)


def _spec(population: Population, k: int, n: int) -> OrderStatSpec:
    return OrderStatSpec(k, n, population.N)


def generalized_pmf(population: Population, k: int, n: int, z: float) -> float:
    """
    P(Z(k) = z) для произвольной популяции

    Сумма FPOS(x | k, n, N) по рангам x из прообраза значения z.

    Returns:
        Вероятность; 0 если значение не достигается
    """
    spec = _spec(population, k, n)
    first, last = population.omega_inverse(z)
    if first > last:
        return 0.0
    return float(np.sum(pmf(spec, np.arange(first, last + 1))))


def generalized_distribution(population: Population, k: int, n: int) -> Dict[float, float]:
    """
    Распределение Z(k) по различным достижимым значениям

    Returns:
        Словарь значение -> вероятность в порядке возрастания значений
    """
    xs, masses = pmf_table(_spec(population, k, n))
    values, inverse = np.unique(population.omega(xs), return_inverse=True)
    totals = np.bincount(inverse, weights=masses, minlength=values.size)
    return {float(v): float(p) for v, p in zip(values, totals)}


def generalized_expectation(population: Population, k: int, n: int,
                            f: Callable[[float], float]) -> float:
    """E[f(Z(k))] через обобщенное распределение"""
    xs, masses = pmf_table(_spec(population, k, n))
    return float(sum(f(float(v)) * m for v, m in zip(population.omega(xs), masses)))


def parse_ranks(text: Union[str, Sequence[int]]) -> Tuple[int, ...]:
    """Разбор списка рангов вида '1,5,3'"""
    if not isinstance(text, str):
        return tuple(int(k) for k in text)
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ParameterError("Некорректный список рангов", details={"ranks": text})
