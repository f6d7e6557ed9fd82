import csv

from scripts.heatmap_report import HeatmapReport


class TestHeatmapReport:
    def test_build_writes_one_csv_per_population(self, tmp_path):
        report = HeatmapReport(str(tmp_path / "maps"), config_path=str(tmp_path / "absent.json"), threads=2)
        summaries = report.build([20, 40])

        assert [s["N"] for s in summaries] == [20, 40]
        for N in (20, 40):
            with open(tmp_path / "maps" / f"heatmap_N{N}.csv", encoding="utf-8") as f:
                rows = list(csv.reader(f))
            assert rows[0] == ["N", "n", "k", "lrmse"]
            assert len(rows) == 1 + N * (N - 1) // 2
        assert summaries[1]["median_lrmse"] < summaries[0]["median_lrmse"]
