"""
Рабочий поток: выполняет независимые вычислительные задачи из общей очереди
"""

import logging
import queue
import threading
from typing import Any, Callable, Dict, Optional, Tuple

Task = Tuple[int, Callable[[], Any]]


class WorkerThread(threading.Thread):
    """
    Рабочий поток для параллельного выполнения задач пула
    """

    def __init__(self,
                 worker_id: int,
                 tasks: "queue.Queue[Task]",
                 results: Dict[int, Any],
                 errors: Dict[int, BaseException],
                 results_lock: threading.Lock,
                 stats_callback: Optional[Callable[[bool], None]] = None):
        """
        Инициализация рабочего потока

        Args:
            worker_id: Уникальный идентификатор потока
            tasks: Очередь пар (номер задачи, вызываемый объект)
            results: Общий словарь результатов по номеру задачи
            errors: Общий словарь исключений по номеру задачи
            results_lock: Блокировка для записи результатов
            stats_callback: Callback для обновления статистики
        """
        super().__init__(name=f"Worker-{worker_id}", daemon=True)

        self.worker_id = worker_id
        self.tasks = tasks
        self.results = results
        self.errors = errors
        self.results_lock = results_lock
        self.stats_callback = stats_callback

        # Состояние потока
        self._stop_requested = False
        self.is_working = False
        self.completed_count = 0
        self.error_count = 0

        logging.debug(f"🔧 Worker {worker_id} инициализирован")

    def run(self) -> None:
        """
        Главный цикл: забирать задачи, пока очередь не опустеет
        """
        logging.debug(f"🚀 Worker {self.worker_id} запущен")

        while not self._stop_requested:
            try:
                index, task = self.tasks.get_nowait()
            except queue.Empty:
                break

            self.is_working = True
            success = self._execute(index, task)
            self.tasks.task_done()

            if self.stats_callback:
                self.stats_callback(success)

        self.is_working = False
        if self._stop_requested:
            logging.debug(f"🔚 Worker {self.worker_id}: Остановлен по запросу")
        else:
            logging.debug(f"🔚 Worker {self.worker_id}: Очередь пуста, завершение")

    def _execute(self, index: int, task: Callable[[], Any]) -> bool:
        """
        Выполнение одной задачи с сохранением результата или исключения

        Returns:
            True если задача завершилась без исключения
        """
        try:
            value = task()
        except Exception as e:
            self.error_count += 1
            logging.error(f"❌ Worker {self.worker_id}: Ошибка в задаче #{index}: {e}")
            with self.results_lock:
                self.errors[index] = e
            return False

        self.completed_count += 1
        with self.results_lock:
            self.results[index] = value
        return True

    def request_stop(self) -> None:
        """Запрос на остановку потока после текущей задачи"""
        self._stop_requested = True
        logging.debug(f"🛑 Worker {self.worker_id}: Получен запрос на остановку")

    def get_stats(self) -> Dict[str, Any]:
        """
        Получение статистики потока

        Returns:
            Словарь со статистикой
        """
        return {
            'worker_id': self.worker_id,
            'is_alive': self.is_alive(),
            'is_working': self.is_working,
            'completed_count': self.completed_count,
            'error_count': self.error_count,
            'stop_requested': self._stop_requested
        }

    def __repr__(self) -> str:
        return f"WorkerThread(id={self.worker_id}, alive={self.is_alive()}, working={self.is_working})"
