"""
Асимптотические моменты, нормальная аппроксимация функции масс FPOS,
ее LRMSE, тепловые карты точности и диагностика сходимости к нормальному закону
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from core.errors import DegenerateDistributionError, ParameterError, ResourceError
from core.fpos import MomentSet, OrderStatSpec, _mean_variance, _require_int, cdf_table, pmf_table
from core.special import log_binom
from workers.thread_pool import ThreadPoolManager

# Нижняя граница LRMSE, чтобы CSV оставался числовым
LRMSE_FLOOR = math.log(1e-300)

MAX_HEATMAP_POPULATION = 2000


def round_half_up(value: float) -> int:
    """Округление к ближайшему целому, половины вверх"""
    return int(math.floor(value + 0.5))


@dataclass(frozen=True)
class AsymptoticRegime:
    """Предельный режим n/N -> lam, k/n -> phi при фиксированном N"""

    lam: float
    phi: float
    N: int

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise ParameterError("Параметр lambda должен лежать в (0, 1)", details={"lambda": self.lam})
        if not 0 < self.phi < 1:
            raise ParameterError("Параметр phi должен лежать в (0, 1)", details={"phi": self.phi})
        N = _require_int("N", self.N)
        if N < 1:
            raise ParameterError("Размер популяции должен быть положительным", details={"N": N})
        object.__setattr__(self, "N", N)

    def spec(self) -> OrderStatSpec:
        """Ближайшая целочисленная тройка: n = round(lam N), k = round(phi n), с зажатием в допустимую область"""
        n = min(max(round_half_up(self.lam * self.N), 1), self.N)
        k = min(max(round_half_up(self.phi * n), 1), n)
        return OrderStatSpec(k, n, self.N)


class HeatmapCell(NamedTuple):
    n: int
    k: int
    lrmse: float


@dataclass
class HeatmapGrid:
    """LRMSE нормальной аппроксимации для всех 1 <= k <= n <= N - 1"""

    N: int
    cells: List[HeatmapCell]

    def csv_rows(self) -> List[Tuple[int, int, int, float]]:
        """Строки CSV с заголовком N,n,k,lrmse"""
        return [(self.N, c.n, c.k, c.lrmse) for c in self.cells]


@dataclass(frozen=True)
class HeatmapSummary:
    """Сводка по тепловой карте"""

    N: int
    median_lrmse: float
    best_cell: HeatmapCell
    best_offset: float
    row_minima: Dict[int, int]

    def to_dict(self) -> Dict[str, object]:
        return {
            "N": self.N,
            "median_lrmse": self.median_lrmse,
            "best_n": self.best_cell.n,
            "best_k": self.best_cell.k,
            "best_lrmse": self.best_cell.lrmse,
            "best_offset": self.best_offset,
        }


def asymptotic_moments(regime: AsymptoticRegime) -> MomentSet:
    """
    Асимптотические среднее, дисперсия, асимметрия и куртозис

    Асимметрия: 2(1/2 - phi)(2 - lam) / sqrt(lam (1 - lam) phi (1 - phi)) / sqrt(N).
    """
    lam, phi, N = regime.lam, regime.phi, regime.N
    pq = phi * (1 - phi)
    skew = 2 * (0.5 - phi) * (2 - lam) / math.sqrt(lam * (1 - lam) * pq) / math.sqrt(N)
    kurt = 3 + (lam / (1 - lam) * (1 / pq - 6) + 6 / lam * (1 / pq - 5)) / N
    return MomentSet(
        mean=phi * N,
        variance=(1 - lam) / lam * pq * N,
        skewness=skew,
        kurtosis=kurt,
    )


def _require_nondegenerate(spec: OrderStatSpec) -> None:
    if spec.is_degenerate:
        raise DegenerateDistributionError(
            "Нормальная аппроксимация не определена при n = N",
            details={"k": spec.k, "n": spec.n, "N": spec.N}
        )


def normal_approx_pmf(spec: OrderStatSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Нормированная поточечная нормальная аппроксимация

    Плотность нормального закона с точными средним и дисперсией в точках
    носителя, перенормированная к единичной сумме.

    Returns:
        Пара (точки носителя, приближенные массы)
    """
    _require_nondegenerate(spec)
    mean, variance = _mean_variance(spec)
    xs = np.arange(spec.lower, spec.upper + 1)
    log_density = -((xs - mean) ** 2) / (2 * variance)
    return xs, np.exp(log_density - special.logsumexp(log_density))


def lrmse_from_tables(exact: np.ndarray, approx: np.ndarray, axis: Optional[int] = None):
    """Логарифм среднеквадратичной поточечной ошибки с нижней границей LRMSE_FLOOR"""
    rmse = np.sqrt(np.mean((np.asarray(approx) - np.asarray(exact)) ** 2, axis=axis))
    with np.errstate(divide="ignore"):
        value = np.maximum(np.log(rmse), LRMSE_FLOOR)
    return float(value) if np.ndim(value) == 0 else value


def lrmse(spec: OrderStatSpec) -> float:
    """
    LRMSE нормальной аппроксимации на N - n + 1 точках носителя

    Raises:
        DegenerateDistributionError: При n = N
    """
    _, approx = normal_approx_pmf(spec)
    _, exact = pmf_table(spec)
    return lrmse_from_tables(exact, approx)


def _row_lrmse(n: int, N: int) -> List[HeatmapCell]:
    """LRMSE для всех k = 1..n при фиксированных n и N одной матричной операцией"""
    k = np.arange(1, n + 1)[:, None]
    x = k + np.arange(N - n + 1)[None, :]

    exact = np.exp(log_binom(x - 1, k - 1) + log_binom(N - x, n - k) - log_binom(N, n))
    mean = (N + 1) * k / (n + 1)
    variance = (N + 1) * (N - n) * k * (n - k + 1) / ((n + 1) ** 2 * (n + 2))
    log_density = -((x - mean) ** 2) / (2 * variance)
    approx = np.exp(log_density - special.logsumexp(log_density, axis=1, keepdims=True))

    values = lrmse_from_tables(exact, approx, axis=1)
    return [HeatmapCell(n, int(kk), float(v)) for kk, v in zip(k[:, 0], np.atleast_1d(values))]


def heatmap(N: int, threads: int = 1,
            max_population: int = MAX_HEATMAP_POPULATION) -> HeatmapGrid:
    """
    Тепловая карта LRMSE для всех допустимых (k, n) с n < N

    Строки n считаются независимо (возможно параллельно), порядок вывода:
    n по возрастанию, затем k по возрастанию.

    Raises:
        ParameterError: Если N < 3
        ResourceError: Если N больше max_population
    """
    N = _require_int("N", N)
    if N < 3:
        raise ParameterError("Тепловая карта требует N >= 3", details={"N": N})
    if N > max_population:
        raise ResourceError(
            "Размер популяции превышает предел тепловой карты",
            details={"N": N, "max_population": max_population}
        )

    logging.info(f"🗺️ Тепловая карта LRMSE для N={N}: {N - 1} строк, {threads} потоков")
    tasks = [(lambda n=n: _row_lrmse(n, N)) for n in range(1, N)]
    with ThreadPoolManager(threads) as pool:
        rows = pool.run_tasks(tasks)

    cells = [cell for row in rows for cell in row]
    logging.info(f"✅ Тепловая карта N={N}: {len(cells)} ячеек")
    return HeatmapGrid(N=N, cells=cells)


def summarize_heatmap(grid: HeatmapGrid) -> HeatmapSummary:
    """Медиана LRMSE, лучшая ячейка и ее отклонение от линии k = (n + 1)/2, минимумы по строкам"""
    values = np.asarray([c.lrmse for c in grid.cells])
    best = grid.cells[int(np.argmin(values))]

    row_minima: Dict[int, int] = {}
    best_by_row: Dict[int, float] = {}
    for cell in grid.cells:
        if cell.n not in best_by_row or cell.lrmse < best_by_row[cell.n]:
            best_by_row[cell.n] = cell.lrmse
            row_minima[cell.n] = cell.k

    return HeatmapSummary(
        N=grid.N,
        median_lrmse=float(np.median(values)),
        best_cell=best,
        best_offset=abs(best.k - (best.n + 1) / 2),
        row_minima=row_minima,
    )


def matched_grid_lrmse(N: int, lambdas: Sequence[float],
                       phis: Sequence[float]) -> List[Dict[str, float]]:
    """LRMSE в точках с одинаковыми lam и phi для заданного N"""
    rows = []
    for lam in lambdas:
        for phi in phis:
            spec = AsymptoticRegime(lam, phi, N).spec()
            if spec.is_degenerate:
                continue
            rows.append({"lambda": lam, "phi": phi, "k": spec.k, "n": spec.n, "N": N,
                         "lrmse": lrmse(spec)})
    return rows


def near_census_path(N: int, sample_exponent: float = 0.8,
                     rank_exponent: float = 0.5) -> OrderStatSpec:
    """
    Точка пути n/N -> 1, k/N -> 0, k(N - n)/N -> бесконечность:
    n = N - ceil(N^a), k = ceil(N^b)
    """
    n = N - math.ceil(N ** sample_exponent)
    k = math.ceil(N ** rank_exponent)
    return OrderStatSpec(k, n, N)


def standardized_cdf_distance(spec: OrderStatSpec) -> float:
    """
    Расстояние Колмогорова между стандартизованной X(k) и стандартным нормальным законом

    В каждой точке носителя с Phi сравниваются и значение функции
    распределения, и ее левый предел.
    """
    _require_nondegenerate(spec)
    mean, variance = _mean_variance(spec)
    xs, cumulative = cdf_table(spec)
    phi = special.ndtr((xs - mean) / math.sqrt(variance))
    left = np.concatenate(([0.0], cumulative[:-1]))
    return float(max(np.max(np.abs(cumulative - phi)), np.max(np.abs(left - phi))))


def convergence_table(N_values: Iterable[int], lam: float = 0.5, phi: float = 0.5,
                      sample_exponent: float = 0.8,
                      rank_exponent: float = 0.5) -> List[Dict[str, object]]:
    """
    Расстояние до нормального закона вдоль двух путей:
    фиксированные lam и phi, а также путь n/N -> 1
    """
    rows = []
    for N in N_values:
        paths = (("fixed_ratio", AsymptoticRegime(lam, phi, N).spec()),
                 ("near_census", near_census_path(N, sample_exponent, rank_exponent)))
        for name, spec in paths:
            distance = standardized_cdf_distance(spec)
            logging.debug(f"📈 {name}: N={N}, k={spec.k}, n={spec.n}, расстояние={distance:.3e}")
            rows.append({"path": name, "N": N, "n": spec.n, "k": spec.k, "distance": distance})
    return rows
