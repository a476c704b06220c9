"""
Synergy module - 力协同选择与运动动力学指令合成

  选择:  arg max_i { F_h · c_iᵀ }  → w_{F_h}, c_{F_h}
  力指令: F̂ = α · c_{F_h}
  位置指令: 平滑后的食指轨迹直接透传
"""

from dataclasses import dataclass, replace
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import ParameterError, StructuralError
from .nmf import SynergySet
from .signal_model import Condition, ForceTrace, PositionTrace


@dataclass(frozen=True)
class ForceSynergySelection:
    """力相关协同的选择结果 (index 从 1 开始)"""
    index: int
    score: float
    all_scores: Tuple[float, ...]
    method: str = "projection"


@dataclass(frozen=True, eq=False)
class CommandStream:
    """时间对齐的 (力幅值, 平面位置) 指令流"""
    force: ForceTrace
    position: PositionTrace
    alpha: float
    condition: Condition = Condition.UNLABELED
    trial_lengths: Tuple[int, ...] = ()     # 为空时整条指令视为一个试次

    def __len__(self) -> int:
        return self.force.k

    @property
    def segments(self) -> List[Tuple[int, int]]:
        """各试次在指令流中的 [start, stop) 区间"""
        lengths = self.trial_lengths or (self.force.k,)
        bounds = np.cumsum((0,) + tuple(lengths))
        return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def normalize_interchannel(s: SynergySet) -> SynergySet:
    """每个协同列除以其最大值, 对应激活行乘以同一因子; W·C 不变

    全零列保持不变并记录在 zero_columns 中
    """
    W = np.array(s.W)
    C = np.array(s.C)
    peaks = W.max(axis=0)
    zero_columns = tuple(int(i) for i in np.flatnonzero(peaks <= 0))
    for i in range(s.n):
        if i in zero_columns or peaks[i] == 1.0:
            continue
        W[:, i] /= peaks[i]
        C[i, :] *= peaks[i]
    return replace(s, W=W, C=C, zero_columns=zero_columns)


def _scores(F_h: np.ndarray, C: np.ndarray, method: str) -> np.ndarray:
    if method == "projection":
        return C @ F_h
    if method == "normalized":
        norms = np.linalg.norm(C, axis=1)
        raw = C @ F_h
        return np.divide(raw, norms, out=np.zeros_like(raw), where=norms > 0)
    if method == "correlation":
        f = F_h - F_h.mean()
        centered = C - C.mean(axis=1, keepdims=True)
        denom = np.linalg.norm(centered, axis=1) * np.linalg.norm(f)
        raw = centered @ f
        return np.divide(raw, denom, out=np.zeros_like(raw), where=denom > 0)
    raise ParameterError(f"未知的选择方法: {method}")


def select_force_synergy(
    F_h: ForceTrace,
    s: SynergySet,
    method: str = "projection",
) -> ForceSynergySelection:
    """找出与人手力 F_h 最相关的协同

    Args:
        F_h: 人手产生的力 (1×k)
        s: 协同集合, C 的长度必须等于 k
        method: projection (F_h·c_iᵀ), normalized (除以 ‖c_i‖), correlation (皮尔逊)

    Returns:
        分数最大的协同; 并列时取最小序号
    """
    if F_h.k != s.k:
        raise StructuralError(f"F_h 长度 {F_h.k} 与激活曲线长度 {s.k} 不一致")
    if s.n < 1:
        raise StructuralError("协同集合为空")
    scores = _scores(F_h.values, s.C, method)
    best = int(np.argmax(scores))  # argmax 并列时返回第一个
    return ForceSynergySelection(
        index=best + 1,
        score=float(scores[best]),
        all_scores=tuple(float(v) for v in scores),
        method=method,
    )


def force_command(
    selection: ForceSynergySelection,
    s: SynergySet,
    alpha: float,
    label: str = "F_hat",
) -> ForceTrace:
    """F̂ = α · c_{F_h}"""
    if not alpha > 0:
        raise ParameterError(f"alpha 必须 > 0: {alpha}")
    if not 1 <= selection.index <= s.n:
        raise StructuralError(f"选择序号 {selection.index} 超出 1..{s.n}")
    return ForceTrace(alpha * s.C[selection.index - 1], label)


def position_command(p: PositionTrace) -> PositionTrace:
    """位置指令: 平滑后的轨迹直接透传"""
    return p


def build_command_stream(
    force: ForceTrace,
    position: PositionTrace,
    alpha: float,
    condition: Condition = Condition.UNLABELED,
    trial_lengths: Sequence[int] = (),
) -> CommandStream:
    """把力指令和位置指令配对为指令流"""
    if force.k != position.k:
        raise StructuralError(f"力指令长度 {force.k} 与位置指令长度 {position.k} 不一致")
    if not alpha > 0:
        raise ParameterError(f"alpha 必须 > 0: {alpha}")
    trial_lengths = tuple(int(n) for n in trial_lengths)
    if trial_lengths and (sum(trial_lengths) != force.k or min(trial_lengths) < 1):
        raise StructuralError(f"试次长度 {list(trial_lengths)} 与指令长度 {force.k} 不一致")
    return CommandStream(force, position, alpha, condition, trial_lengths)


def condition_indices(
    lengths: Sequence[int],
    conditions: Sequence[Condition],
) -> Dict[Condition, List[np.ndarray]]:
    """按条件收集拼接序列中每个试次的采样下标 (保持试次顺序)"""
    if len(lengths) != len(conditions):
        raise StructuralError("试次长度数量与条件标签数量不一致")
    bounds = np.cumsum([0] + list(lengths))
    out: Dict[Condition, List[np.ndarray]] = {}
    for start, stop, condition in zip(bounds[:-1], bounds[1:], conditions):
        out.setdefault(condition, []).append(np.arange(start, stop))
    return out


def split_by_condition(
    force: ForceTrace,
    position: PositionTrace,
    alpha: float,
    lengths: Sequence[int],
    conditions: Sequence[Condition],
) -> Dict[Condition, CommandStream]:
    """把拼接后的指令按试次标签切分为各条件的指令流"""
    if sum(lengths) != force.k:
        raise StructuralError(f"试次长度之和 {sum(lengths)} 与指令长度 {force.k} 不一致")
    streams = {}
    for condition, parts in condition_indices(lengths, conditions).items():
        idx = np.concatenate(parts)
        streams[condition] = build_command_stream(
            ForceTrace(force.values[idx], f"{force.label}_{condition.value}"),
            PositionTrace(position.points[:, idx]),
            alpha,
            condition,
            [len(p) for p in parts],
        )
    return streams
