"""
SVG 評估報告產生器
"""
import io
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

from ..exceptions import DataFormatError  # noqa: E402
from ..models import MetricsReport  # noqa: E402
from .manifest_io import load_json  # noqa: E402

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
BAR_GID = "accuracy-bar-{}"
STRIP_COLORS = ["#d9d9d9", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def load_metrics(path: PathLike) -> MetricsReport:
    """讀取 eval 輸出的 metrics JSON"""
    report = load_json(path, MetricsReport)
    if not report.runs:
        raise DataFormatError(f"{path}: 報告中沒有任何 run")
    names = report.runs[0].condition_names
    for run in report.runs:
        if len(run.recall) != len(names) or len(run.confusion) != len(names):
            raise DataFormatError(f"{path}: run {run.run_id} 的類別數與狀態名稱不一致")
    return report


class ReportRenderer:
    """把 MetricsReport（與可選的峰值序列）畫成單一 SVG"""

    def __init__(self, report: MetricsReport, series: Optional[Sequence[Tuple[str, pd.DataFrame]]] = None,
                 title: str = "VolDecode", width_in: float = 11.0, dpi: int = 72,
                 hash_salt: str = "vwdecode"):
        self.report = report
        self.series = list(series or [])
        self.title = title
        self.width_in = width_in
        self.dpi = dpi
        self.hash_salt = hash_salt
        self.names = report.runs[0].condition_names

    def _class_recall(self) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        """單一 run 用該 run 的 recall；多個 run 用彙總平均與標準差"""
        if len(self.report.runs) > 1 and "recall" in self.report.aggregate:
            agg = self.report.aggregate["recall"]
            mean = np.array([v if v is not None else 0.0 for v in agg["mean"]])
            sd = np.array([v if v is not None else 0.0 for v in agg["sd"]])
            return mean, sd
        return np.asarray(self.report.runs[0].recall, dtype=np.float64), None

    def _draw_bars(self, ax):
        recall, sd = self._class_recall()
        positions = np.arange(len(self.names))
        bars = ax.bar(positions, recall, yerr=sd, color="#4472C4", capsize=3)
        for k, patch in enumerate(bars.patches):
            patch.set_gid(BAR_GID.format(k))
        ax.set_xticks(positions)
        ax.set_xticklabels(self.names, rotation=30, ha="right")
        ax.set_ylim(0.0, 1.05)
        ax.set_ylabel("recall")
        ax.set_title("Per-state accuracy")

    def _draw_confusion(self, ax):
        counts = np.sum([np.asarray(run.confusion) for run in self.report.runs], axis=0)
        rows = counts.sum(axis=1, keepdims=True)
        normalized = np.divide(counts, rows, out=np.zeros(counts.shape), where=rows > 0)
        k = len(self.names)
        ax.pcolormesh(np.arange(k + 1), np.arange(k + 1), normalized, cmap="Blues", vmin=0.0, vmax=1.0)
        for i in range(k):
            for j in range(k):
                ax.text(j + 0.5, i + 0.5, str(int(counts[i, j])), ha="center", va="center", fontsize=7,
                        color="white" if normalized[i, j] > 0.5 else "black")
        ax.set_xticks(np.arange(k) + 0.5)
        ax.set_xticklabels(self.names, rotation=30, ha="right")
        ax.set_yticks(np.arange(k) + 0.5)
        ax.set_yticklabels(self.names)
        ax.invert_yaxis()
        ax.set_xlabel("predicted")
        ax.set_ylabel("true")
        ax.set_title("Confusion matrix")

    def _draw_strip(self, ax):
        run = self.report.runs[0]
        strip = np.vstack([run.truth, run.pred])
        k = len(self.names)
        cmap = ListedColormap([STRIP_COLORS[i % len(STRIP_COLORS)] for i in range(k)])
        ax.pcolormesh(np.arange(strip.shape[1] + 1), np.arange(3), strip, cmap=cmap, vmin=-0.5, vmax=k - 0.5)
        ax.set_yticks([0.5, 1.5])
        ax.set_yticklabels(["true", "decoded"])
        ax.set_xlabel("frame")
        ax.set_title(f"Decoded vs true states ({run.run_id}, accuracy {run.accuracy:.3f})")

    def _draw_series(self, ax, label: str, df: pd.DataFrame):
        frames = df["frame"].to_numpy()
        value = df["value"].to_numpy(dtype=np.float64)
        ideal = df["ideal"].to_numpy(dtype=np.float64)
        scale = np.max(np.abs(value)) or 1.0
        ideal_scale = np.max(np.abs(ideal)) or 1.0
        ax.fill_between(frames, 0.0, df["stimulus"].to_numpy(dtype=np.float64), step="mid",
                        color="#ffd966", alpha=0.6, label="stimulus")
        ax.plot(frames, value / scale, color="#1f77b4", linewidth=1.0, label="decoded")
        ax.plot(frames, ideal / ideal_scale, color="#d62728", linewidth=1.0, label="ideal")
        ax.set_title(label)
        ax.set_xlabel("frame")
        ax.legend(loc="upper right", fontsize=7)

    def render(self) -> str:
        """
        產生 SVG 文字

        Returns:
            完整 SVG 文件
        """
        n_series = len(self.series)
        n_rows = 2 + n_series
        fig = plt.figure(figsize=(self.width_in, 3.2 * n_rows), dpi=self.dpi)
        grid = fig.add_gridspec(n_rows, 2)
        self._draw_bars(fig.add_subplot(grid[0, 0]))
        self._draw_confusion(fig.add_subplot(grid[0, 1]))
        self._draw_strip(fig.add_subplot(grid[1, :]))
        for i, (label, df) in enumerate(self.series):
            self._draw_series(fig.add_subplot(grid[2 + i, :]), label, df)
        fig.suptitle(self.title)
        fig.tight_layout()

        buffer = io.StringIO()
        with matplotlib.rc_context({"svg.hashsalt": self.hash_salt, "svg.fonttype": "none"}):
            fig.savefig(buffer, format="svg", metadata={"Date": None})
        plt.close(fig)
        return buffer.getvalue()

    def save(self, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(), encoding="utf-8")
        logger.debug("報告寫出至 %s", path)
        return path


def render_report(metrics: Union[MetricsReport, PathLike],
                  series: Optional[Dict[str, pd.DataFrame]] = None,
                  title: str = "VolDecode", **options) -> str:
    """由 MetricsReport 或其 JSON 路徑產生 SVG 文字"""
    report = metrics if isinstance(metrics, MetricsReport) else load_metrics(metrics)
    items: List[Tuple[str, pd.DataFrame]] = sorted((series or {}).items())
    return ReportRenderer(report, items, title=title, **options).render()
