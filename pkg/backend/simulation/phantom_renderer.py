"""
合成體模與 BOLD 掃描渲染
"""
import itertools
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ConfigError
from ..models import Phantom, RoiSpec, RunData, TaskDesign
from ..utils.validation import validate_phantom
from .hrf import canonical_hrf, ideal_response

logger = logging.getLogger(__name__)


def default_radius(grid: Sequence[int]) -> int:
    return max(1, min(grid) // 8)


def roi_shapes(radius: int, count: int) -> List[Tuple[int, int, int]]:
    """
    count 組各軸半徑介於 radius 與 radius + 1 之間的橢球

    前八組兩兩形狀不同（體積或方向），超過時循環使用。
    """
    r, s = radius, radius + 1
    shapes = [(r, r, r), (s, s, s), (s, r, r), (r, s, r), (r, r, s), (s, s, r), (s, r, s), (r, s, s)]
    return [shapes[i % len(shapes)] for i in range(count)]


def _lattice(grid: Sequence[int], reach: int) -> List[Tuple[int, ...]]:
    """間距 2·reach + 2 的格點，離邊界至少 reach"""
    axes = [range(reach, extent - reach, 2 * reach + 2) for extent in grid]
    return list(itertools.product(*axes))


def default_phantom(grid: Sequence[int], n_conditions: int, baseline: float = 100.0,
                    amplitude: float = 3.0, noise_sd: float = 1.0,
                    radius: Optional[int] = None) -> Phantom:
    """
    每個非休息狀態一個互不重疊的橢球 ROI

    各狀態的半徑取自 roi_shapes(r)，讓全域池化後仍能以大小與方向區分狀態；
    網格放不下 r + 1 的格點時退回全部使用半徑 r 的球。
    中心取自格點，依列優先順序平均挑選。

    Args:
        grid: D×H×W
        n_conditions: K（含 rest）
        radius: 最小 ROI 半徑，預設 max(1, min(grid) // 8)

    Returns:
        Phantom
    """
    r = default_radius(grid) if radius is None else int(radius)
    needed = n_conditions - 1
    lattice = _lattice(grid, r + 1)
    shapes = roi_shapes(r, needed)
    if len(lattice) < needed:
        lattice = _lattice(grid, r)
        shapes = [(r, r, r)] * needed
        logger.debug("網格 %s 放不下半徑 %d 的格點，ROI 一律使用半徑 %d", tuple(grid), r + 1, r)
    if len(lattice) < needed:
        raise ConfigError(f"網格 {tuple(grid)} 放不下 {needed} 個半徑 {r} 的 ROI")
    picks = np.linspace(0, len(lattice) - 1, needed).round().astype(int)
    rois = [RoiSpec(condition=cond, center=lattice[i], radii=shape, amplitude=amplitude)
            for cond, i, shape in zip(range(1, n_conditions), picks, shapes)]
    return Phantom(grid=tuple(grid), rois=rois, baseline=baseline, noise_sd=noise_sd)


def render_run(design: TaskDesign, phantom: Phantom, seed: int,
               run_id: str = "run", hrf: Optional[np.ndarray] = None) -> RunData:
    """
    渲染一次掃描

    每個體素 = baseline + Σ_c amplitude_c · [體素 ∈ ROI_c] · ideal_response_c + N(0, noise_sd)

    Args:
        design: 刺激時序
        phantom: 體模
        seed: 雜訊種子
        hrf: 預設為 canonical_hrf(design.tr_s)

    Returns:
        RunData
    """
    ok, errors = validate_phantom(phantom)
    if not ok:
        raise ConfigError("; ".join(errors))
    kernel = canonical_hrf(design.tr_s) if hrf is None else hrf

    volume = np.full((design.n_frames,) + phantom.grid, phantom.baseline, dtype=np.float64)
    for roi in phantom.rois:
        mask = Phantom(grid=phantom.grid, rois=[roi]).roi_mask(roi.condition)
        response = ideal_response(design, roi.condition, kernel)
        volume[:, mask] += roi.amplitude * response[:, None]

    rng = np.random.default_rng(seed)
    if phantom.noise_sd > 0:
        volume += rng.normal(0.0, phantom.noise_sd, size=volume.shape)

    logger.debug("渲染 %s：%d 幀，網格 %s", run_id, design.n_frames, phantom.grid)
    return RunData(volume=volume, labels=design.frame_labels(), design=design, run_id=run_id)
