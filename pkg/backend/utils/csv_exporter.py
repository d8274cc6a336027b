"""
CSV 匯出：逐幀預測、峰值體素序列、訓練歷程
"""
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..exceptions import DataFormatError
from ..models import PeakSeries, Prediction, TrainHistory

PathLike = Union[str, Path]
FLOAT_FORMAT = "%.17g"
PREDICTION_COLUMNS = ["frame_index", "true_label", "pred_label"]
SERIES_COLUMNS = ["frame", "value", "ideal", "stimulus"]


def predictions_frame(prediction: Prediction, truth: np.ndarray,
                      condition_names: Sequence[str]) -> pd.DataFrame:
    """
    逐幀預測表：frame_index, true_label, pred_label, 以及 K 欄平均機率 prob_<狀態>
    """
    truth = np.asarray(truth, dtype=np.int64)
    if truth.shape != prediction.labels.shape:
        raise DataFormatError(f"真實標籤長度 {truth.shape} 與預測長度 {prediction.labels.shape} 不符")
    df = pd.DataFrame({
        "frame_index": np.arange(prediction.n_frames),
        "true_label": truth,
        "pred_label": prediction.labels,
    })
    for k, name in enumerate(condition_names):
        df[f"prob_{name}"] = prediction.mean_probs[:, k]
    return df


def write_predictions_csv(path: PathLike, prediction: Prediction, truth: np.ndarray,
                          condition_names: Sequence[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    predictions_frame(prediction, truth, condition_names).to_csv(
        path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_predictions_csv(path: PathLike) -> Tuple[Prediction, np.ndarray, List[str]]:
    """
    讀取逐幀預測表

    Returns:
        (Prediction（票數為 0）, 真實標籤, 狀態名稱)
    """
    path = Path(path)
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataFormatError(f"{path}: 無法解析 CSV（{exc}）") from exc
    missing = [c for c in PREDICTION_COLUMNS if c not in df.columns]
    prob_columns = [c for c in df.columns if c.startswith("prob_")]
    if missing or not prob_columns:
        raise DataFormatError(f"{path}: 缺少欄位 {missing or ['prob_*']}")
    if df[PREDICTION_COLUMNS + prob_columns].isna().any().any():
        raise DataFormatError(f"{path}: 含有空值")
    if not np.array_equal(df["frame_index"].to_numpy(), np.arange(len(df))):
        raise DataFormatError(f"{path}: frame_index 必須由 0 連續遞增")

    probs = df[prob_columns].to_numpy(dtype=np.float64)
    labels = df["pred_label"].to_numpy(dtype=np.int64)
    prediction = Prediction(labels=labels, mean_probs=probs,
                            tallies=np.zeros(probs.shape, dtype=np.int64))
    names = [c[len("prob_"):] for c in prob_columns]
    return prediction, df["true_label"].to_numpy(dtype=np.int64), names


def write_series_csv(path: PathLike, peak: PeakSeries) -> Path:
    """峰值體素序列：frame, value, ideal, stimulus"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame({"frame": peak.frame_indices, "value": peak.series,
                       "ideal": peak.ideal, "stimulus": peak.stimulus})
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_series_csv(path: PathLike) -> pd.DataFrame:
    path = Path(path)
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataFormatError(f"{path}: 無法解析 CSV（{exc}）") from exc
    missing = [c for c in SERIES_COLUMNS if c not in df.columns]
    if missing:
        raise DataFormatError(f"{path}: 缺少欄位 {missing}")
    return df


def write_history_csv(path: PathLike, history: TrainHistory) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    history.to_dataframe().to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path
