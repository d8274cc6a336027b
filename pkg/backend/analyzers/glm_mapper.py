"""
逐體素 GLM、狀態對比、Benjamini–Hochberg FDR 與峰值體素序列
"""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy import stats

from ..exceptions import ConfigError, DegenerateInputError, LabelError, ShapeError, VolDecodeError
from ..models import ContrastMap, GlmResult, PeakSeries, SaliencyMap, TaskDesign
from ..simulation.hrf import ideal_response
from .sequence_metrics import pcc

logger = logging.getLogger(__name__)

POLARITIES = ("positive", "negative")


def lag_series(series: np.ndarray, shift: int) -> np.ndarray:
    """序列整體延後 shift 幀，前段補 0"""
    if shift <= 0:
        return np.asarray(series, dtype=np.float64).copy()
    lagged = np.zeros(len(series))
    lagged[shift:] = series[:len(series) - shift]
    return lagged


def design_matrix(design: TaskDesign, hrf: np.ndarray, frame_indices: np.ndarray,
                  shift: int = 0) -> np.ndarray:
    """
    [截距 | 各非 rest 狀態的 HRF 卷積指示序列]，取 frame_indices 對應的列

    Args:
        shift: 迴歸量在 HRF 之外額外延後的幀數

    Returns:
        n×(1 + 狀態數)
    """
    columns = [np.ones(design.n_frames)]
    for condition in range(1, design.n_conditions):
        columns.append(lag_series(ideal_response(design, condition, hrf), shift))
    return np.stack(columns, axis=1)[frame_indices]


def _t_and_p(effect: np.ndarray, variance: np.ndarray, df: int) -> Tuple[np.ndarray, np.ndarray]:
    """t = effect / se；se 為 0 時 t 為 ±inf（effect ≠ 0）或 0"""
    se = np.sqrt(np.maximum(variance, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_stat = np.where(se > 0, effect / np.where(se > 0, se, 1.0),
                          np.sign(effect) * np.inf)
    t_stat = np.where((se == 0) & (effect == 0), 0.0, t_stat)
    p_value = np.clip(2.0 * stats.t.sf(np.abs(t_stat), df), 0.0, 1.0)
    return t_stat, p_value


def glm_map(saliency: SaliencyMap, design: TaskDesign, hrf: np.ndarray, shift: int = 0) -> GlmResult:
    """
    逐體素 OLS：y = Xβ + ε

    Args:
        saliency: 組平均（或單一 run）的梯度圖
        design: 刺激時序
        hrf: canonical_hrf 的輸出
        shift: 迴歸量額外延後的幀數（預設 0）

    Returns:
        GlmResult（β、t、雙尾 p，df = n − rank(X)）
    """
    frame_indices = saliency.frame_indices
    if frame_indices[-1] >= design.n_frames:
        raise ShapeError(f"梯度圖涵蓋到第 {frame_indices[-1]} 幀，超過設計幀數 {design.n_frames}")
    x = design_matrix(design, hrf, frame_indices, shift)
    n, p = x.shape
    rank = int(np.linalg.matrix_rank(x))
    if rank < p:
        raise DegenerateInputError(f"GLM 設計矩陣秩不足（rank {rank} < {p}）")
    df = n - rank
    if df < 1:
        raise DegenerateInputError(f"GLM 自由度不足（{n} 幀，{p} 個迴歸量）")

    y = saliency.frames.reshape(n, -1)
    xtx_inv = np.linalg.inv(x.T @ x)
    beta = xtx_inv @ (x.T @ y)
    residual = y - x @ beta
    sigma2 = np.sum(residual ** 2, axis=0) / df
    t_stat, p_value = _t_and_p(beta, np.outer(np.diag(xtx_inv), sigma2), df)

    grid = saliency.grid
    names = [design.conditions[c] for c in range(1, design.n_conditions)]
    logger.debug("GLM：%d 幀，%d 個迴歸量，%d 個體素", n, p, y.shape[1])
    return GlmResult(
        conditions=names,
        condition_indices=list(range(1, design.n_conditions)),
        beta=beta[1:].reshape((p - 1,) + grid),
        t_stat=t_stat[1:].reshape((p - 1,) + grid),
        p_value=p_value[1:].reshape((p - 1,) + grid),
        df=df,
        intercept=beta[0].reshape(grid),
        sigma2=sigma2.reshape(grid),
        xtx_inv=xtx_inv,
        design_matrix=x,
        frame_indices=frame_indices,
    )


def glm_contrast(glm: GlmResult, cond_a: str, cond_b: str) -> ContrastMap:
    """
    狀態對比 β_a − β_b，變異數 σ²·cᵀ(XᵀX)⁻¹c

    Returns:
        ContrastMap
    """
    if cond_a == cond_b:
        raise ConfigError(f"對比需要兩個不同的狀態，收到 {cond_a}")
    try:
        ia, ib = glm.index_of(cond_a), glm.index_of(cond_b)
    except KeyError as exc:
        raise LabelError(str(exc)) from exc
    c = np.zeros(glm.xtx_inv.shape[0])
    c[1 + ia] = 1.0
    c[1 + ib] = -1.0
    effect = glm.beta[ia] - glm.beta[ib]
    t_stat, p_value = _t_and_p(effect, glm.sigma2 * float(c @ glm.xtx_inv @ c), glm.df)
    return ContrastMap(name=f"{cond_a}-{cond_b}", effect=effect, t_stat=t_stat,
                       p_value=p_value, df=glm.df)


def bh_cutoff(pvals: np.ndarray, q: float) -> Optional[float]:
    """
    Benjamini–Hochberg 門檻：排序後最大的 i 使 p(i) ≤ i·q/m，回傳該 p(i)

    Returns:
        門檻 p 值；沒有任何拒絕時為 None
    """
    flat = np.sort(np.asarray(pvals, dtype=np.float64).ravel())
    if flat.size == 0:
        raise VolDecodeError("FDR 需要至少一個 p 值")
    if not 0 < q < 1:
        raise ConfigError(f"FDR q 必須介於 (0, 1)，收到 {q}")
    m = flat.size
    passed = np.flatnonzero(flat <= np.arange(1, m + 1) * q / m)
    if passed.size == 0:
        return None
    return float(flat[passed[-1]])


def fdr_threshold(pvals: np.ndarray, q: float) -> np.ndarray:
    """BH-FDR 拒絕遮罩（形狀同 pvals）"""
    pvals = np.asarray(pvals, dtype=np.float64)
    cutoff = bh_cutoff(pvals, q)
    if cutoff is None:
        return np.zeros(pvals.shape, dtype=bool)
    return pvals <= cutoff


def peak_series(saliency: SaliencyMap, glm: GlmResult, condition: str, design: TaskDesign,
                hrf: np.ndarray, polarity: str = "positive", shift: int = 0) -> PeakSeries:
    """
    取 β 最大（positive）或最小（negative）的體素，平手取列優先順序最小者

    Returns:
        PeakSeries：座標、解碼序列、對齊的理想反應與刺激時序、兩者的 PCC
    """
    if polarity not in POLARITIES:
        raise ConfigError(f"未知的極性: {polarity}（可用: positive, negative）")
    try:
        beta = glm.beta_map(condition)
    except KeyError as exc:
        raise LabelError(str(exc)) from exc
    if np.ptp(beta) == 0:
        raise DegenerateInputError(f"狀態 {condition} 的 β 圖為常數，無峰值體素")

    flat_index = int(np.argmax(beta) if polarity == "positive" else np.argmin(beta))
    coords = tuple(int(i) for i in np.unravel_index(flat_index, beta.shape))
    series = saliency.frames[(slice(None),) + coords]

    frames = saliency.frame_indices
    cond_index = design.condition_index(condition)
    ideal = lag_series(ideal_response(design, cond_index, hrf), shift)[frames]
    stimulus = design.indicator(cond_index)[frames]
    try:
        r = pcc(series, ideal)
    except DegenerateInputError:
        logger.warning("狀態 %s 的峰值序列或理想反應為常數，PCC 無定義", condition)
        r = None
    return PeakSeries(condition=condition, polarity=polarity, coords=coords,
                      frame_indices=frames, series=series.copy(), ideal=ideal,
                      stimulus=stimulus, pcc=r)
