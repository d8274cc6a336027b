"""
任務設計產生器：區塊設計（運動類）與事件設計（賭局類）
"""
import logging
from typing import List

import numpy as np

from ..exceptions import ConfigError
from ..models import TaskDesign, TaskEvent

logger = logging.getLogger(__name__)

BLOCK_CONDITIONS = ["rest", "left_hand", "right_hand", "left_foot", "right_foot", "tongue", "cue"]
EVENT_CONDITIONS = ["rest", "win", "loss", "neutral"]

# 區塊設計時序（幀）
BLOCK_LEAD_IN = 11
CUE_FRAMES = 4
TASK_FRAMES = 17
REST_BLOCK_FRAMES = 21
BLOCK_GROUPS = [3, 2, 3, 2]  # 每組連續的任務區塊數，組間插入休息區塊

# 事件設計時序（幀）
EVENT_LEAD_IN = 9
EVENT_FRAMES = 5
EVENTS_PER_BLOCK = 8
PRIMARY_PER_BLOCK = 6
REST_GAP_FRAMES = 21

MAX_SHUFFLE_TRIES = 1000


def build_design(kind: str, seed: int, tr_s: float = 0.72) -> TaskDesign:
    """
    依種類產生刺激時序

    Args:
        kind: "block"（284 幀）或 "event"（253 幀）
        seed: 決定區塊順序
        tr_s: 每幀秒數

    Returns:
        TaskDesign
    """
    rng = np.random.default_rng(seed)
    if kind == "block":
        return _block_design(rng, tr_s)
    if kind == "event":
        return _event_design(rng, tr_s)
    raise ConfigError(f"未知的設計種類: {kind}（可用: block, event）")


def _shuffle_without_repeats(items: List[int], rng: np.random.Generator) -> List[int]:
    """重排直到沒有相鄰重複（拒絕取樣）"""
    for _ in range(MAX_SHUFFLE_TRIES):
        order = [int(i) for i in rng.permutation(items)]
        if all(a != b for a, b in zip(order, order[1:])):
            return order
    raise ConfigError("無法產生無相鄰重複的區塊順序")


def _block_design(rng: np.random.Generator, tr_s: float) -> TaskDesign:
    cue = BLOCK_CONDITIONS.index("cue")
    motor = [i for i, name in enumerate(BLOCK_CONDITIONS) if name not in ("rest", "cue")]
    order = _shuffle_without_repeats(motor * 2, rng)

    events: List[TaskEvent] = []
    frame = BLOCK_LEAD_IN
    position = 0
    for group_index, group_size in enumerate(BLOCK_GROUPS):
        if group_index > 0:
            frame += REST_BLOCK_FRAMES
        for condition in order[position:position + group_size]:
            events.append(TaskEvent(cue, frame, CUE_FRAMES))
            frame += CUE_FRAMES
            events.append(TaskEvent(condition, frame, TASK_FRAMES))
            frame += TASK_FRAMES
        position += group_size

    design = TaskDesign(tr_s=tr_s, n_frames=frame, conditions=list(BLOCK_CONDITIONS),
                        events=events, kind="block")
    logger.debug("區塊設計順序: %s", [BLOCK_CONDITIONS[c] for c in order])
    return design


def _event_design(rng: np.random.Generator, tr_s: float) -> TaskDesign:
    win = EVENT_CONDITIONS.index("win")
    loss = EVENT_CONDITIONS.index("loss")
    neutral = EVENT_CONDITIONS.index("neutral")
    block_kinds = [int(k) for k in rng.permutation([win, win, loss, loss])]

    events: List[TaskEvent] = []
    frame = EVENT_LEAD_IN
    for primary in block_kinds:
        other = loss if primary == win else win
        trials = [primary] * PRIMARY_PER_BLOCK + [other, neutral]
        for condition in rng.permutation(trials):
            events.append(TaskEvent(int(condition), frame, EVENT_FRAMES))
            frame += EVENT_FRAMES
        frame += REST_GAP_FRAMES

    return TaskDesign(tr_s=tr_s, n_frames=frame, conditions=list(EVENT_CONDITIONS),
                      events=events, kind="event")
