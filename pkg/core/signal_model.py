"""
Signal model - 共享数据容器

所有容器构造后不可变 (numpy 数组设为只读)。
构造函数只检查结构 (形状、标签数量)，数值合法性由 validate 报告。
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import singledispatch
from typing import List, Optional, Tuple

import numpy as np

from .errors import NonFiniteInputError, StructuralError


def _frozen(values, ndim: int, what: str) -> np.ndarray:
    """复制为只读 float 数组并检查维度"""
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise StructuralError(f"{what} 需要 {ndim} 维数组, 实际为 {arr.ndim} 维")
    arr.setflags(write=False)
    return arr


class Condition(str, Enum):
    """试次条件"""
    WEAK = "weak"
    STRONG = "strong"
    UNLABELED = "unlabeled"

    @classmethod
    def parse(cls, text: str) -> "Condition":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise StructuralError(f"未知条件标签: {text!r}") from None


class Segment(str, Enum):
    UPPER_ARM = "UpperArm"
    FOREARM = "Forearm"


class MuscleGroup(str, Enum):
    BICEP_AREA = "BicepArea"
    TRICEP_AREA = "TricepArea"
    RADIUS_SIDE = "RadiusSide"
    ULNA_SIDE = "UlnaSide"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class ChannelLayout:
    """两条 8 通道臂环的通道部署"""
    segment: Segment
    group: MuscleGroup
    channel_index: int  # 臂环内通道号 1..8

    @classmethod
    def for_channel(cls, global_index: int) -> "ChannelLayout":
        """全局通道号 (1..16) → 部署信息; 1-8 为上臂, 9-16 为前臂"""
        if not 1 <= global_index <= 16:
            raise StructuralError(f"通道号超出 1..16: {global_index}")
        segment = Segment.UPPER_ARM if global_index <= 8 else Segment.FOREARM
        local = (global_index - 1) % 8 + 1
        if local in (4, 8):
            group = MuscleGroup.BOUNDARY
        elif local <= 3:
            group = MuscleGroup.BICEP_AREA if segment is Segment.UPPER_ARM else MuscleGroup.RADIUS_SIDE
        else:
            group = MuscleGroup.TRICEP_AREA if segment is Segment.UPPER_ARM else MuscleGroup.ULNA_SIDE
        return cls(segment, group, local)

    @property
    def label(self) -> str:
        return f"{self.segment.value}/{self.group.value}/{self.channel_index}"


def describe_channels(d: int) -> List[str]:
    """d ≤ 16 时返回部署描述, 否则返回通用标签"""
    if d <= 16:
        return [ChannelLayout.for_channel(i).label for i in range(1, d + 1)]
    return default_channel_labels(d)


def require_finite(arr: np.ndarray, what: str) -> None:
    """遇到第一个 NaN/Inf 时抛出 NonFiniteInputError"""
    bad = np.argwhere(~np.isfinite(arr))
    if len(bad):
        index = tuple(int(i) for i in bad[0])
        raise NonFiniteInputError(f"{what} 在 {index} 处非有限: {arr[index]}", index)


def default_channel_labels(d: int) -> List[str]:
    return [f"ch{i}" for i in range(1, d + 1)]


@dataclass(frozen=True, eq=False)
class EmgMatrix:
    """d×k 通道-时间活动矩阵"""
    data: np.ndarray
    channel_labels: Tuple[str, ...] = ()
    sample_rate_hz: float = 200.0

    def __post_init__(self):
        data = _frozen(self.data, 2, "EmgMatrix")
        object.__setattr__(self, "data", data)
        labels = tuple(self.channel_labels) or tuple(default_channel_labels(data.shape[0]))
        if len(labels) != data.shape[0]:
            raise StructuralError(
                f"通道标签数 {len(labels)} 与通道数 {data.shape[0]} 不一致"
            )
        object.__setattr__(self, "channel_labels", labels)

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @property
    def k(self) -> int:
        return self.data.shape[1]

    def with_data(self, data: np.ndarray) -> "EmgMatrix":
        return EmgMatrix(data, self.channel_labels, self.sample_rate_hz)


@dataclass(frozen=True, eq=False)
class ForceTrace:
    """1×k 非负力幅值序列 (F_h, F̂ 或 F_r)"""
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.ravel(self.values), 1, "ForceTrace"))

    @property
    def k(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.k


@dataclass(frozen=True, eq=False)
class PositionTrace:
    """2×k 平面轨迹, 米"""
    points: np.ndarray

    def __post_init__(self):
        points = _frozen(self.points, 2, "PositionTrace")
        if points.shape[0] != 2:
            raise StructuralError(f"PositionTrace 需要 2 行 (x, y), 实际为 {points.shape[0]}")
        object.__setattr__(self, "points", points)

    @property
    def k(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.k

    @property
    def x(self) -> np.ndarray:
        return self.points[0]

    @property
    def y(self) -> np.ndarray:
        return self.points[1]


@dataclass(frozen=True, eq=False)
class PressureFrameSequence:
    """k 帧 r×c 压力垫读数 (默认 16×10)"""
    frames: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "frames", _frozen(self.frames, 3, "PressureFrameSequence"))

    @property
    def k(self) -> int:
        return self.frames.shape[0]

    @property
    def grid_shape(self) -> Tuple[int, int]:
        return self.frames.shape[1], self.frames.shape[2]


@dataclass(frozen=True, eq=False)
class Trial:
    """单个试次: EMG、力、位置"""
    emg: EmgMatrix
    force: ForceTrace
    position: PositionTrace
    condition: Condition = Condition.UNLABELED


@dataclass(frozen=True, eq=False)
class TrialSet:
    """按顺序排列的试次集合"""
    trials: Tuple[Trial, ...]

    def __post_init__(self):
        object.__setattr__(self, "trials", tuple(self.trials))

    def __len__(self) -> int:
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)

    @property
    def condition_labels(self) -> List[Condition]:
        return [t.condition for t in self.trials]

    @property
    def lengths(self) -> List[int]:
        return [t.emg.k for t in self.trials]


# ----------------------- 验证 -----------------------

@dataclass(frozen=True)
class Violation:
    """单条不变量违例; index 为 0 起始的 (通道, 时间) 或 (时间,)"""
    kind: str
    message: str
    index: Optional[Tuple[int, ...]] = None


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def add(self, kind: str, message: str, index: Optional[Tuple[int, ...]] = None) -> None:
        self.violations.append(Violation(kind, message, index))

    def kinds(self) -> List[str]:
        return [v.kind for v in self.violations]

    def extend(self, other: "ValidationReport", prefix: str = "") -> None:
        for v in other.violations:
            self.violations.append(Violation(v.kind, prefix + v.message, v.index))


def _check_values(report: ValidationReport, arr: np.ndarray, what: str, non_negative: bool) -> None:
    """逐元素记录非有限值和负值"""
    finite = np.isfinite(arr)
    for idx in zip(*np.nonzero(~finite)):
        index = tuple(int(i) for i in idx)
        report.add("non_finite", f"{what} 在 {index} 处非有限: {arr[idx]}", index)
    if non_negative:
        negative = finite & (arr < 0)
        for idx in zip(*np.nonzero(negative)):
            index = tuple(int(i) for i in idx)
            report.add("negative", f"{what} 在 {index} 处为负: {arr[idx]}", index)


@singledispatch
def validate(obj) -> ValidationReport:
    """检查容器的全部不变量, 报告为空当且仅当合法"""
    raise TypeError(f"不支持验证的类型: {type(obj).__name__}")


@validate.register
def _(matrix: EmgMatrix) -> ValidationReport:
    report = ValidationReport()
    d, k = matrix.data.shape
    if d < 1 or k < 1:
        report.add("shape", f"EmgMatrix 形状必须至少 1×1: {d}×{k}")
    if len(matrix.channel_labels) != d:
        report.add("labels", f"通道标签数 {len(matrix.channel_labels)} ≠ {d}")
    if not (np.isfinite(matrix.sample_rate_hz) and matrix.sample_rate_hz > 0):
        report.add("sample_rate", f"采样率必须为正数: {matrix.sample_rate_hz}")
    _check_values(report, matrix.data, "EmgMatrix", non_negative=True)
    return report


@validate.register
def _(trace: ForceTrace) -> ValidationReport:
    report = ValidationReport()
    _check_values(report, trace.values, f"ForceTrace[{trace.label}]", non_negative=True)
    return report


@validate.register
def _(trace: PositionTrace) -> ValidationReport:
    report = ValidationReport()
    _check_values(report, trace.points, "PositionTrace", non_negative=False)
    return report


@validate.register
def _(frames: PressureFrameSequence) -> ValidationReport:
    report = ValidationReport()
    if frames.k < 1:
        report.add("shape", "压力帧序列为空")
    _check_values(report, frames.frames, "PressureFrameSequence", non_negative=True)
    return report


@validate.register
def _(trial_set: TrialSet) -> ValidationReport:
    report = ValidationReport()
    if not trial_set.trials:
        report.add("shape", "TrialSet 为空")
        return report
    first = trial_set.trials[0].emg
    for i, trial in enumerate(trial_set.trials):
        prefix = f"试次 {i + 1}: "
        report.extend(validate(trial.emg), prefix)
        report.extend(validate(trial.force), prefix)
        report.extend(validate(trial.position), prefix)
        if not trial.emg.k == trial.force.k == trial.position.k:
            report.add(
                "length",
                f"{prefix}长度不一致 emg={trial.emg.k} force={trial.force.k} "
                f"position={trial.position.k}",
            )
        if trial.emg.d != first.d or trial.emg.channel_labels != first.channel_labels:
            report.add("channels", f"{prefix}通道数或通道标签与第 1 个试次不一致")
    return report
