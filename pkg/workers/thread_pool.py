"""
Менеджер пула потоков: выполнение независимых задач с результатами в порядке задач
"""

import logging
import queue
import threading
import time
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from workers.worker_thread import WorkerThread


class ThreadPoolManager:
    """
    Управление пулом рабочих потоков с мониторингом и остановкой

    Результаты возвращаются в порядке задач независимо от числа потоков
    и порядка завершения.
    """

    def __init__(self, threads: int = 1):
        """
        Инициализация менеджера пула потоков

        Args:
            threads: Количество рабочих потоков (>= 1)
        """
        if threads <= 0:
            raise ValueError(f"Некорректное количество потоков: {threads}")

        self.threads = threads
        self.workers: List[WorkerThread] = []

        # Примитивы синхронизации
        self._pool_lock = threading.RLock()
        self._stats_lock = threading.Lock()

        self._is_running = False

        # Статистика
        self._total_tasks = 0
        self._successful_tasks = 0
        self._failed_tasks = 0
        self._start_time: Optional[float] = None

        logging.debug(f"🔄 ThreadPoolManager инициализирован ({threads} потоков)")

    def update_stats(self, success: bool) -> None:
        """
        Обновление статистики выполнения

        Args:
            success: True если задача завершилась без исключения
        """
        with self._stats_lock:
            self._total_tasks += 1
            if success:
                self._successful_tasks += 1
            else:
                self._failed_tasks += 1

    def run_tasks(self, tasks: Sequence[Callable[[], Any]]) -> List[Any]:
        """
        Выполнение задач и сбор результатов

        Args:
            tasks: Вызываемые объекты без аргументов

        Returns:
            Список результатов в порядке задач

        Raises:
            Exception: Исключение задачи с наименьшим номером, если какие-то задачи упали
        """
        with self._pool_lock:
            if self._is_running:
                raise RuntimeError("Пул потоков уже выполняет задачи")
            self._is_running = True
            self._start_time = time.time()

        try:
            if self.threads == 1 or len(tasks) <= 1:
                return self._run_inline(tasks)
            return self._run_threaded(tasks)
        finally:
            with self._pool_lock:
                self._is_running = False

    def _run_inline(self, tasks: Sequence[Callable[[], Any]]) -> List[Any]:
        results = []
        for task in tasks:
            try:
                results.append(task())
            except Exception:
                self.update_stats(False)
                raise
            self.update_stats(True)
        return results

    def _run_threaded(self, tasks: Sequence[Callable[[], Any]]) -> List[Any]:
        task_queue: "queue.Queue" = queue.Queue()
        for index, task in enumerate(tasks):
            task_queue.put((index, task))

        results: Dict[int, Any] = {}
        errors: Dict[int, BaseException] = {}
        results_lock = threading.Lock()

        thread_count = min(self.threads, len(tasks))
        for i in range(thread_count):
            worker = WorkerThread(
                worker_id=i + 1,
                tasks=task_queue,
                results=results,
                errors=errors,
                results_lock=results_lock,
                stats_callback=self.update_stats
            )
            worker.start()
            self.workers.append(worker)

        logging.debug(f"🚀 Запущено {thread_count} рабочих потоков для {len(tasks)} задач")

        for worker in self.workers:
            worker.join()
        self.workers.clear()

        if errors:
            first = min(errors)
            logging.error(f"❌ Упало задач: {len(errors)}, первая ошибка в задаче #{first}")
            raise errors[first]

        return [results[i] for i in range(len(tasks))]

    def stop(self, timeout: float = 30.0) -> bool:
        """
        Остановка рабочих потоков после текущих задач

        Args:
            timeout: Таймаут ожидания завершения потоков в секундах

        Returns:
            True если все потоки остановлены
        """
        with self._pool_lock:
            for worker in self.workers:
                worker.request_stop()
            deadline = time.time() + timeout
            for worker in self.workers:
                worker.join(max(0.0, deadline - time.time()))
            alive = [w for w in self.workers if w.is_alive()]
            if alive:
                logging.warning(f"⚠️ Не остановились вовремя: {len(alive)} потоков")
            return not alive

    def get_stats(self) -> Dict[str, Any]:
        """
        Получение текущей статистики пула

        Returns:
            Словарь со статистикой
        """
        with self._stats_lock:
            stats = {
                'total_tasks': self._total_tasks,
                'successful_tasks': self._successful_tasks,
                'failed_tasks': self._failed_tasks,
                'threads': self.threads,
                'is_running': self._is_running,
            }
            if self._start_time:
                stats['uptime_seconds'] = time.time() - self._start_time
            return stats

    def __enter__(self):
        """Поддержка context manager"""
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        """Гарантированная остановка пула"""
        self.stop()


def spawn_generators(seed: Optional[int], count: int) -> List[np.random.Generator]:
    """
    Независимые генераторы для count шардов из одного зерна

    Раскладка потоков случайности зависит только от числа шардов.
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def shard_sizes(total: int, shard_size: int) -> List[int]:
    """Разбиение total симуляций на шарды размера не более shard_size"""
    if shard_size <= 0:
        raise ValueError(f"Некорректный размер шарда: {shard_size}")
    full, rest = divmod(total, shard_size)
    return [shard_size] * full + ([rest] if rest else [])
