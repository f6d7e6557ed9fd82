#!/usr/bin/env python3
"""
Скрипт для пакетного расчета тепловых карт LRMSE нормальной аппроксимации
и сводки по ним
"""

import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Sequence

# Добавляем путь к корневой директории для импортов
sys.path.append(str(Path(__file__).parent.parent))

from config.config_manager import ConfigManager
from core.errors import FposError
from core.normal_approx import heatmap, summarize_heatmap
from storage.thread_safe_writer import ThreadSafeWriter

DEFAULT_POPULATIONS = (100, 200, 500, 1000)


class HeatmapReport:
    """
    Расчет тепловых карт для нескольких N, запись CSV и сводка
    """

    def __init__(self, output_dir: str, config_path: str = "config.json", threads: int = 0):
        """
        Args:
            output_dir: Каталог для файлов heatmap_N<N>.csv
            config_path: Путь к конфигурационному файлу
            threads: Количество потоков (0 - из конфигурации)
        """
        self.config_manager = ConfigManager(config_path)
        self.output_dir = Path(output_dir)
        self.threads = threads or self.config_manager.get_thread_count()
        self.max_population = self.config_manager["normal_approx"]["max_heatmap_population"]

        logging.info(f"🗺️ HeatmapReport: вывод в {self.output_dir}, {self.threads} потоков")

    def build(self, populations: Sequence[int]) -> List[Dict[str, Any]]:
        """
        Расчет и запись тепловых карт

        Returns:
            Сводки по каждому N в порядке populations
        """
        summaries = []
        for N in populations:
            grid = heatmap(N, threads=self.threads, max_population=self.max_population)
            with ThreadSafeWriter(self.output_dir / f"heatmap_N{N}.csv") as writer:
                writer.write_csv(("N", "n", "k", "lrmse"), grid.csv_rows())

            summary = summarize_heatmap(grid)
            summaries.append(summary.to_dict())
            logging.info(
                f"📊 N={N}: медиана LRMSE {summary.median_lrmse:.3f}, "
                f"минимум в (n={summary.best_cell.n}, k={summary.best_cell.k}), "
                f"отклонение от (n+1)/2: {summary.best_offset}"
            )

        medians = [s["median_lrmse"] for s in summaries]
        if any(b >= a for a, b in zip(medians, medians[1:])):
            logging.warning("⚠️ Медиана LRMSE не убывает с ростом N")
        return summaries


def main():
    """
    Главная функция скрипта
    """
    import argparse

    parser = argparse.ArgumentParser(description='Тепловые карты LRMSE нормальной аппроксимации')
    parser.add_argument('--output-dir', '-o', default='heatmaps', help='Каталог для CSV')
    parser.add_argument('--populations', '-N', type=int, nargs='+', default=list(DEFAULT_POPULATIONS),
                        help='Размеры популяции')
    parser.add_argument('--config', '-c', default='config.json', help='Файл конфигурации')
    parser.add_argument('--threads', '-t', type=int, default=0, help='Количество потоков')

    args = parser.parse_args()

    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=[logging.StreamHandler()]
    )

    try:
        report = HeatmapReport(args.output_dir, args.config, args.threads)
        summaries = report.build(args.populations)
        print(json.dumps(summaries, ensure_ascii=False, indent=2))
        sys.exit(0)
    except FposError as e:
        logging.error(f"❌ {e}")
        sys.exit(e.exit_code)
    except Exception as e:
        logging.error(f"💥 Критическая ошибка: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
