"""
Потокобезопасный вывод результатов в JSON/CSV: stdout или файл под эксклюзивной блокировкой
"""

import csv
import errno
import io
import json
import logging
import os
import platform
import sys
import threading
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, TextIO, Union

import numpy as np

if platform.system().lower() != "windows":
    import fcntl  # Для Linux/MacOS файловых блокировок


class FileLockException(Exception):
    """Исключение для ошибок блокировки файлов"""

    def __init__(self, message: str, filename: Optional[str] = None,
                 error_code: Optional[int] = None):
        """
        Args:
            message: Сообщение об ошибке
            filename: Имя файла, для которого не удалось получить блокировку
            error_code: Код ошибки ОС (errno)
        """
        self.message = message
        self.filename = filename
        self.error_code = error_code
        self.system = platform.system()

        details = [f"{name}: {value}" for name, value in
                   (("file", filename), ("error_code", error_code)) if value]
        super().__init__(f"{message} [{', '.join(details)}]" if details else message)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": self.message,
            "filename": self.filename,
            "error_code": self.error_code,
            "system": self.system
        }


class CrossPlatformFileLock:
    """
    Эксклюзивная блокировка через файл <имя>.lock:
    flock на Unix, эксклюзивное создание на Windows
    """

    def __init__(self, filename: str):
        self.filename = filename
        self.lockfile = f"{filename}.lock"
        self._handle = None
        self._is_windows = platform.system().lower() == "windows"

    def acquire(self, timeout: float = 10.0) -> None:
        """
        Получение блокировки с ожиданием

        Raises:
            FileLockException: При системной ошибке или по таймауту
        """
        deadline = time.time() + timeout
        while time.time() < deadline:
            if self._try_acquire():
                return
            time.sleep(0.05)
        raise FileLockException("Таймаут получения блокировки", filename=self.filename)

    def _try_acquire(self) -> bool:
        try:
            if self._is_windows:
                self._handle = os.open(self.lockfile, os.O_CREAT | os.O_EXCL | os.O_RDWR)
                return True
            handle = open(self.lockfile, "w")
            try:
                fcntl.flock(handle.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
            except OSError:
                handle.close()
                raise
            self._handle = handle
            return True
        except OSError as e:
            if e.errno in (errno.EAGAIN, errno.EACCES, errno.EEXIST):
                return False
            raise FileLockException("Ошибка системной блокировки файла",
                                    filename=self.filename, error_code=e.errno)

    def release(self) -> None:
        """Освобождение блокировки"""
        if self._handle is None:
            return
        try:
            if self._is_windows:
                os.close(self._handle)
            else:
                fcntl.flock(self._handle.fileno(), fcntl.LOCK_UN)
                self._handle.close()
            if os.path.exists(self.lockfile):
                os.unlink(self.lockfile)
        except OSError as e:
            logging.warning(f"⚠️ Ошибка при освобождении блокировки: {e}")
        finally:
            self._handle = None

    def __enter__(self):
        self.acquire()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.release()


def format_number(value: Any) -> Any:
    """
    Приведение значения к виду для вывода

    Fraction -> строка 'p/q' (целые дроби как 'p'), скаляры numpy -> Python,
    остальное без изменений.
    """
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def to_jsonable(obj: Any) -> Any:
    """Рекурсивное приведение структуры к типам, которые сериализует json"""
    if isinstance(obj, dict):
        return {str(format_number(k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    return format_number(obj)


def _csv_cell(value: Any) -> str:
    value = format_number(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


class ThreadSafeWriter:
    """
    Потокобезопасный writer документов JSON и таблиц CSV

    Без имени файла пишет в поток (по умолчанию stdout); с именем файла
    перезаписывает файл целиком под эксклюзивной блокировкой с fsync.
    """

    def __init__(self,
                 filename: Optional[Union[str, Path]] = None,
                 stream: Optional[TextIO] = None,
                 encoding: str = 'utf-8'):
        self.filename = Path(filename) if filename else None
        self.stream = stream
        self.encoding = encoding

        self._write_lock = threading.RLock()
        self._file_lock = CrossPlatformFileLock(str(self.filename)) if self.filename else None
        self._written_count = 0
        self._is_closed = False

        if self.filename:
            self.filename.parent.mkdir(parents=True, exist_ok=True)
            logging.debug(f"📝 ThreadSafeWriter инициализирован для {self.filename}")

    def write_text(self, text: str) -> None:
        """
        Запись готового текста

        Raises:
            FileLockException: Если не удалось заблокировать файл
            RuntimeError: Если writer закрыт
        """
        if self._is_closed:
            raise RuntimeError("Попытка записи в закрытый writer")

        with self._write_lock:
            if self.filename is None:
                target = self.stream or sys.stdout
                target.write(text)
                target.flush()
            else:
                with self._file_lock:
                    with open(self.filename, 'w', encoding=self.encoding, newline='') as f:
                        f.write(text)
                        f.flush()
                        os.fsync(f.fileno())
                logging.info(f"📝 Результат записан в {self.filename}")
            self._written_count += 1

    def write_json(self, document: Any) -> None:
        """Запись одного JSON-документа с переводом строки в конце"""
        self.write_text(json.dumps(to_jsonable(document), ensure_ascii=False, allow_nan=False) + "\n")

    def write_csv(self, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
        """Запись таблицы CSV: LF в конце строк, числа в кратчайшем точном виде"""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(v) for v in row])
        self.write_text(buffer.getvalue())

    def get_stats(self) -> Dict[str, Any]:
        return {
            "filename": str(self.filename) if self.filename else None,
            "written_count": self._written_count,
            "is_closed": self._is_closed,
        }

    def close(self) -> None:
        """Закрытие writer'а"""
        with self._write_lock:
            self._is_closed = True
            if self._file_lock:
                self._file_lock.release()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()
