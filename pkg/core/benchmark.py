"""
Калибровка единицы времени "килосорт" и сравнение двух способов генерирования
"""

import logging
import statistics
import timeit
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from core.errors import ParameterError
from core.sampler import SimulationRequest, naive_sample_order_stats, sample_order_stats

KILOSORT_SIZE = 1000


@dataclass(frozen=True)
class KilosortCalibration:
    """Медианное время сортировки 1000..1 по возрастанию"""

    seconds: float
    samples: List[float]

    @property
    def nanoseconds(self) -> float:
        return self.seconds * 1e9

    @property
    def cv(self) -> float:
        """Коэффициент вариации измерений"""
        if len(self.samples) < 2:
            return 0.0
        return statistics.stdev(self.samples) / statistics.mean(self.samples)


@dataclass
class BenchReport:
    """Результат сравнения способов генерирования во времени килосортов"""

    method_time_kilosorts: Optional[float]
    baseline_time_kilosorts: Optional[float]
    method_median_kilosorts: Optional[float] = None
    baseline_median_kilosorts: Optional[float] = None
    kilosort_seconds: float = 0.0
    calibration_before_ns: float = 0.0
    calibration_after_ns: float = 0.0
    method_raw_seconds: List[float] = field(default_factory=list)
    baseline_raw_seconds: List[float] = field(default_factory=list)
    empty: bool = False

    @property
    def ratio(self) -> Optional[float]:
        """Отношение времени метода к эталонному; < 1 означает выигрыш"""
        if self.empty or not self.baseline_time_kilosorts:
            return None
        return self.method_time_kilosorts / self.baseline_time_kilosorts

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method_time_kilosorts": self.method_time_kilosorts,
            "baseline_time_kilosorts": self.baseline_time_kilosorts,
            "method_median_kilosorts": self.method_median_kilosorts,
            "baseline_median_kilosorts": self.baseline_median_kilosorts,
            "ratio": self.ratio,
            "kilosort_ns": self.kilosort_seconds * 1e9,
            "calibration_before_ns": self.calibration_before_ns,
            "calibration_after_ns": self.calibration_after_ns,
            "method_raw_seconds": self.method_raw_seconds,
            "baseline_raw_seconds": self.baseline_raw_seconds,
            "empty": self.empty,
        }


def calibrate_kilosort(repetitions: int = 25) -> KilosortCalibration:
    """
    Измерение килосорта

    Args:
        repetitions: Количество повторов (не меньше 25)

    Returns:
        KilosortCalibration с медианой и всеми замерами
    """
    if repetitions < 25:
        raise ParameterError("Калибровка требует не менее 25 повторов", details={"repetitions": repetitions})

    descending = np.arange(KILOSORT_SIZE, 0, -1)
    sink: List[int] = []

    def kilosort() -> None:
        # Результат используется, чтобы сортировка не была выброшена
        sink.append(int(np.sort(descending)[0]))

    timer = timeit.Timer(kilosort)
    samples = timer.repeat(repeat=repetitions, number=1)
    if sum(sink) != repetitions:
        raise RuntimeError("Контрольная сумма калибровки не совпала")

    calibration = KilosortCalibration(seconds=statistics.median(samples), samples=samples)
    logging.debug(f"⏱️ Килосорт: {calibration.nanoseconds:.0f} нс (cv={calibration.cv:.3f})")
    return calibration


def kilosort_unit(repetitions: int = 25) -> float:
    """Длительность одного килосорта в секундах"""
    return calibrate_kilosort(repetitions).seconds


def _time_once(run: Callable[[], np.ndarray], sink: List[int]) -> float:
    start = timeit.default_timer()
    result = run()
    elapsed = timeit.default_timer() - start
    sink.append(result.shape[0])
    return elapsed


def benchmark(req: SimulationRequest,
              repetitions: int,
              seed: Optional[int] = None,
              warmup_rounds: int = 1,
              kilosort_repetitions: int = 25) -> BenchReport:
    """
    Сравнение генерирования через ранги с выборкой и сортировкой

    Оба способа получают одинаковый запрос и по очереди измеряются
    repetitions раз после прогрева. Килосорт калибруется до и после
    измерений, единицей служит среднее двух калибровок.

    Args:
        req: Запрос на генерирование
        repetitions: Количество замеров каждого способа
        seed: Зерно генератора
        warmup_rounds: Количество прогревочных прогонов
        kilosort_repetitions: Повторы калибровки

    Returns:
        BenchReport; при sims = 0 отчет помечен как пустой
    """
    if repetitions < 1:
        raise ParameterError("Количество замеров должно быть положительным", details={"repetitions": repetitions})

    if req.sims == 0:
        logging.warning("⚠️ Число симуляций равно нулю: замеры не выполняются")
        return BenchReport(method_time_kilosorts=None, baseline_time_kilosorts=None, empty=True)

    rng_method = np.random.default_rng(seed)
    rng_baseline = np.random.default_rng(seed)

    def run_method():
        return sample_order_stats(req, rng_method)

    def run_baseline():
        return naive_sample_order_stats(req, rng_baseline)

    before = calibrate_kilosort(kilosort_repetitions)

    for _ in range(warmup_rounds):
        run_method()
        run_baseline()

    method_raw, baseline_raw = [], []
    produced: List[int] = []
    for _ in range(repetitions):
        method_raw.append(_time_once(run_method, produced))
        baseline_raw.append(_time_once(run_baseline, produced))
    if sum(produced) != 2 * repetitions * req.sims:
        raise RuntimeError("Число сгенерированных строк не совпало с запросом")

    after = calibrate_kilosort(kilosort_repetitions)
    unit = (before.seconds + after.seconds) / 2
    if after.seconds > 2 * before.seconds or before.seconds > 2 * after.seconds:
        logging.warning(
            f"⚠️ Калибровка нестабильна: {before.nanoseconds:.0f} нс до, {after.nanoseconds:.0f} нс после"
        )

    report = BenchReport(
        method_time_kilosorts=statistics.mean(method_raw) / unit,
        baseline_time_kilosorts=statistics.mean(baseline_raw) / unit,
        method_median_kilosorts=statistics.median(method_raw) / unit,
        baseline_median_kilosorts=statistics.median(baseline_raw) / unit,
        kilosort_seconds=unit,
        calibration_before_ns=before.nanoseconds,
        calibration_after_ns=after.nanoseconds,
        method_raw_seconds=method_raw,
        baseline_raw_seconds=baseline_raw,
    )
    logging.info(
        f"📊 Через ранги: {report.method_time_kilosorts:.2f} килосортов, "
        f"сортировкой: {report.baseline_time_kilosorts:.2f} килосортов"
    )
    return report
