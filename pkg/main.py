#!/usr/bin/env python3
"""
FPOS Toolkit
Порядковые статистики выборки без возвращения из конечной популяции:
точные распределения, генерирование, оценка размера популяции
"""

import argparse
import logging
import secrets
import sys
import traceback
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from config.config_manager import ConfigManager
from core import bayes, fpos, joint, normal_approx, oracle, sampler, tank
from core.benchmark import benchmark
from core.errors import FposError, ParameterError
from storage.thread_safe_writer import FileLockException, ThreadSafeWriter

# Значения глобальных флагов, если они не заданы ни до, ни после подкоманды
GLOBAL_DEFAULTS = {
    "config": "config.json",
    "format": None,
    "output": None,
    "log_level": None,
    "threads": None,
    "seed": None,
}

TABULAR_COMMANDS = {"simulate", "heatmap", "consistency"}


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"ожидался список целых через запятую: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    """Парсер командной строки со всеми подкомандами"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="путь к config.json (JSON5)")
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    common.add_argument("--output", default=argparse.SUPPRESS, help="файл результата вместо stdout")
    common.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR"), default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="зерно генератора (64 бита)")

    parser = argparse.ArgumentParser(prog="fpos", parents=[common],
                                     description="Порядковые статистики конечной популяции")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help_text)

    def spec_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--N", type=int, required=True)

    p = command("pmf", "функция масс FPOS")
    spec_args(p)
    p.add_argument("--exact", action="store_true", help="рациональная арифметика (N <= 64)")

    p = command("cdf", "функция распределения и квантили")
    spec_args(p)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--x", type=int)
    group.add_argument("--p", type=float, help="уровень квантили в (0, 1]")

    p = command("moments", "среднее, дисперсия, асимметрия, куртозис")
    spec_args(p)
    p.add_argument("--exact", action="store_true")

    p = command("sample", "генерирование значений X(k)")
    spec_args(p)
    p.add_argument("--count", type=int, required=True)

    p = command("joint-pmf", "совместная функция масс набора порядковых статистик")
    p.add_argument("--ranks", type=_int_list, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--x", type=_int_list, required=True)
    p.add_argument("--exact", action="store_true")

    p = command("simulate", "генерирование порядковых статистик произвольной популяции")
    p.add_argument("--population", required=True, help="файл: одно значение на строку")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--ranks", type=_int_list, required=True)
    p.add_argument("--sims", type=int, required=True)
    p.add_argument("--method", choices=("rank", "naive"), default="rank")

    p = command("estimate", "несмещенная оценка размера популяции")
    p.add_argument("--n", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--max", type=int, dest="x_max")
    group.add_argument("--rank", type=int)
    p.add_argument("--x", type=int)
    p.add_argument("--N", type=int, help="гипотетический N для стандартной ошибки")
    p.add_argument("--plug-in", action="store_true", help="стандартная ошибка при N = оценке")

    p = command("posterior", "апостериорное распределение N")
    p.add_argument("--prior", required=True, help="uniform:a,b | pointmass:N0 | powerlaw:alpha,Nmin")
    p.add_argument("--tol", type=float)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--x", type=int, required=True)

    p = command("heatmap", "LRMSE нормальной аппроксимации")
    p.add_argument("--N", type=int, required=True)

    p = command("bench", "сравнение способов генерирования в килосортах")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ranks", type=_int_list, required=True)
    p.add_argument("--sims", type=int, required=True)
    p.add_argument("--reps", type=int, default=10)

    p = command("oracle", "эталон полным перебором")
    p.add_argument("--k", type=int)
    p.add_argument("--ranks", type=_int_list)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)

    p = command("consistency", "Монте-Карло состоятельность оценки N")
    p.add_argument("--lambda", type=float, dest="lam", default=0.5)
    p.add_argument("--phi", type=float, default=0.5)
    p.add_argument("--N-list", type=_int_list, default=[100, 1000, 10000])
    p.add_argument("--sims", type=int, required=True)

    p = command("clt", "расстояние до нормального закона вдоль предельных путей")
    p.add_argument("--lambda", type=float, dest="lam", default=0.5)
    p.add_argument("--phi", type=float, default=0.5)
    p.add_argument("--N-list", type=_int_list, default=[100, 1000, 10000])

    return parser


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """
    Настройка системы логирования

    Диагностика идет в stderr, stdout занят результатами.
    """
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(
        level=getattr(logging, level),
        format='%(asctime)s - %(levelname)s - [%(threadName)s] %(message)s',
        datefmt='%H:%M:%S',
        handlers=handlers,
        force=True
    )


class FposCommandLine:
    """
    Приложение командной строки: конфигурация, логирование, вывод и
    диспетчеризация подкоманд
    """

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config_manager: Optional[ConfigManager] = None
        self.writer: Optional[ThreadSafeWriter] = None
        self._seed: Optional[int] = None

        self.handlers: Dict[str, Callable[[], None]] = {
            "pmf": self._cmd_pmf,
            "cdf": self._cmd_cdf,
            "moments": self._cmd_moments,
            "sample": self._cmd_sample,
            "joint-pmf": self._cmd_joint_pmf,
            "simulate": self._cmd_simulate,
            "estimate": self._cmd_estimate,
            "posterior": self._cmd_posterior,
            "heatmap": self._cmd_heatmap,
            "bench": self._cmd_bench,
            "oracle": self._cmd_oracle,
            "consistency": self._cmd_consistency,
            "clt": self._cmd_clt,
        }

    def initialize(self) -> None:
        """
        Загрузка конфигурации, настройка логирования и вывода

        Raises:
            ConfigValidationError: При некорректной конфигурации
        """
        self.config_manager = ConfigManager(self.args.config)
        log_config = self.config_manager["logging"]
        setup_logging(self.args.log_level or log_config["level"], log_config["file"])
        self.writer = ThreadSafeWriter(self.args.output)

    @property
    def config(self) -> ConfigManager:
        return self.config_manager

    @property
    def threads(self) -> int:
        threads = self.args.threads or self.config.get_thread_count()
        if threads < 1:
            raise ParameterError("Количество потоков должно быть положительным", details={"threads": threads})
        return threads

    @property
    def output_format(self) -> str:
        if self.args.format:
            return self.args.format
        return "csv" if self.args.command in TABULAR_COMMANDS else "json"

    def seed(self) -> int:
        """Зерно из --seed либо из энтропии ОС (выводится в диагностику)"""
        if self._seed is None:
            if self.args.seed is not None:
                self._seed = self.args.seed
            else:
                self._seed = secrets.randbits(64)
                logging.info(f"🎲 Зерно не задано, используется {self._seed}")
        return self._seed

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed())

    def run(self) -> int:
        """
        Выполнение подкоманды

        Returns:
            Код завершения: 0 - успех, 2 - ошибка параметров, 3 - ресурсы
        """
        try:
            self.initialize()
            self.handlers[self.args.command]()
            return 0
        except FposError as e:
            logging.error(f"❌ {e}")
            return e.exit_code
        except FileNotFoundError as e:
            logging.error(f"❌ Файл не найден: {e.filename}")
            return 2
        except FileLockException as e:
            logging.error(f"🔒 {e}")
            return 1
        except Exception as e:
            logging.error(f"💥 Непредвиденная ошибка: {e}")
            logging.debug(traceback.format_exc())
            return 1
        finally:
            self.stop()

    def stop(self) -> None:
        if self.writer:
            self.writer.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.stop()

    # Вывод

    def _emit_table(self, header: Sequence[str], rows: List[Sequence[Any]]) -> None:
        if self.output_format == "csv":
            self.writer.write_csv(header, rows)
        else:
            self.writer.write_json([dict(zip(header, row)) for row in rows])

    def _emit(self, document: Dict[str, Any], header: Sequence[str] = (),
              rows: Optional[List[Sequence[Any]]] = None) -> None:
        if self.output_format == "csv" and rows is not None:
            self.writer.write_csv(header, rows)
        else:
            self.writer.write_json(document)

    # Подкоманды

    def _spec(self) -> fpos.OrderStatSpec:
        return fpos.OrderStatSpec(self.args.k, self.args.n, self.args.N)

    def _exact_limit(self) -> int:
        return self.config["numerics"]["exact_max_population"]

    def _cmd_pmf(self) -> None:
        spec = self._spec()
        if self.args.exact:
            table = fpos.exact_pmf_table(spec, self._exact_limit())
            support, mass = list(table), list(table.values())
        else:
            xs, masses = fpos.pmf_table(spec)
            support, mass = xs.tolist(), masses.tolist()
        self._emit({"support": support, "mass": mass}, ("x", "mass"), list(zip(support, mass)))

    def _cmd_cdf(self) -> None:
        spec = self._spec()
        if self.args.p is not None:
            self._emit({"p": self.args.p, "quantile": fpos.quantile(spec, self.args.p)})
        elif self.args.x is not None:
            self._emit({"x": self.args.x, "cdf": fpos.cdf(spec, self.args.x)})
        else:
            xs, cumulative = fpos.cdf_table(spec)
            support, values = xs.tolist(), cumulative.tolist()
            self._emit({"support": support, "cdf": values}, ("x", "cdf"), list(zip(support, values)))

    def _cmd_moments(self) -> None:
        spec = self._spec()
        if self.args.exact:
            fpos.check_exact_size(spec, self._exact_limit())
            document = fpos.exact_moments(spec)
        else:
            document = fpos.moments(spec).to_dict()
        scaled = fpos.scaled_moments(spec)
        document.update({"scaled_mean": scaled.mean, "scaled_variance": scaled.variance})
        self._emit(document)

    def _cmd_sample(self) -> None:
        values = fpos.sample(self._spec(), self.rng(), self.args.count).tolist()
        self._emit({"values": values}, ("x",), [(v,) for v in values])

    def _cmd_joint_pmf(self) -> None:
        ranks = joint.RankSet(tuple(self.args.ranks), self.args.n, self.args.N)
        x_star = self.args.x
        if self.args.exact:
            fpos.check_exact_size(fpos.OrderStatSpec(1, ranks.n, ranks.N), self._exact_limit())
            value: Any = joint.exact_joint_pmf(ranks, x_star)
        else:
            value = joint.joint_pmf(ranks, x_star)
        document = {
            "ranks": list(ranks.ranks),
            "x": x_star,
            "joint_pmf": value,
            "dm_pmf": joint.dm_pmf(ranks, x_star),
        }
        if ranks.r >= 2:
            document["conditional_lower_pmf"] = joint.conditional_lower_pmf(ranks, x_star)
            document["factorization"] = list(joint.factorization_check(ranks, x_star))
        self._emit(document)

    def _cmd_simulate(self) -> None:
        population = sampler.Population.from_file(self.args.population)
        req = sampler.SimulationRequest(population, self.args.size, tuple(self.args.ranks), self.args.sims)
        if self.args.method == "naive":
            matrix = sampler.naive_sample_order_stats(req, self.rng())
        else:
            matrix = sampler.sample_order_stats_sharded(
                req, self.seed(),
                shard_size=self.config["simulation"]["shard_size"],
                threads=self.threads
            )
        header = [f"rank_{k}" for k in req.ranks]
        self._emit_table(header, matrix.tolist())

    def _cmd_estimate(self) -> None:
        args = self.args
        if args.x_max is not None:
            result = tank.estimate_from_max(args.n, args.x_max, N=args.N, plug_in=args.plug_in)
        else:
            if args.x is None:
                raise ParameterError("Для --rank требуется --x")
            result = tank.estimate_from_kth(args.n, args.rank, args.x, N=args.N, plug_in=args.plug_in)
        document = result.to_dict()
        document["rounded"] = result.rounded
        self._emit(document)

    def _cmd_posterior(self) -> None:
        prior = bayes.parse_prior(self.args.prior)
        tol = self.args.tol if self.args.tol is not None else self.config["bayes"]["tol"]
        result = bayes.posterior(self.args.n, self.args.k, self.args.x, prior, tol,
                                 **self.config.get_bayes_limits())
        self._emit(result.to_dict())

    def _cmd_heatmap(self) -> None:
        grid = normal_approx.heatmap(
            self.args.N, threads=self.threads,
            max_population=self.config["normal_approx"]["max_heatmap_population"]
        )
        self._emit_table(("N", "n", "k", "lrmse"), grid.csv_rows())

    def _cmd_bench(self) -> None:
        req = sampler.SimulationRequest(sampler.Population.identity(self.args.N),
                                        self.args.n, tuple(self.args.ranks), self.args.sims)
        settings = self.config["benchmark"]
        report = benchmark(req, self.args.reps, seed=self.seed(),
                           warmup_rounds=settings["warmup_rounds"],
                           kilosort_repetitions=settings["kilosort_repetitions"])
        self._emit(report.to_dict())

    def _cmd_oracle(self) -> None:
        budget = oracle.EnumerationBudget(self.config["oracle"]["max_subsets"])
        if self.args.ranks:
            ranks = joint.RankSet(tuple(self.args.ranks), self.args.n, self.args.N)
            table = oracle.enumerate_joint_pmf(ranks, budget)
            self._emit({"support": [list(key) for key in table], "mass": list(table.values())})
        elif self.args.k is not None:
            table = oracle.enumerate_pmf(self._spec(), budget)
            self._emit({"support": list(table), "mass": list(table.values())})
        else:
            raise ParameterError("Нужен --k или --ranks")

    def _cmd_consistency(self) -> None:
        rows = tank.consistency_study(self.args.lam, self.args.phi, self.args.N_list,
                                      self.args.sims, seed=self.seed(), threads=self.threads)
        self._emit_table(tank.ConsistencyRow._fields, [tuple(row) for row in rows])

    def _cmd_clt(self) -> None:
        settings = self.config["normal_approx"]
        rows = normal_approx.convergence_table(
            self.args.N_list, self.args.lam, self.args.phi,
            sample_exponent=settings["clt_sample_exponent"],
            rank_exponent=settings["clt_rank_exponent"]
        )
        header = ("path", "N", "n", "k", "distance")
        self._emit({"rows": rows}, header, [tuple(row[h] for h in header) for row in rows])


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Разбор аргументов и выполнение подкоманды

    Returns:
        Код завершения
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    for name, default in GLOBAL_DEFAULTS.items():
        if not hasattr(args, name):
            setattr(args, name, default)

    with FposCommandLine(args) as app:
        return app.run()


def main() -> int:
    """
    Точка входа в приложение

    Returns:
        Код завершения
    """
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
