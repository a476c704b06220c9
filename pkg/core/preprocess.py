"""
Preprocessing module - 传感器原始数据 → 对齐拼接后的 M, F_h, p

处理链:
  EMG:  整流 → 因果滑动平均 → 线性重采样
  力:   压力垫 16×10 单元求和 → 线性重采样
  位置: 匀速模型卡尔曼滤波 → 线性重采样
最后按试次顺序沿时间轴拼接。
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from filterpy.common import Q_discrete_white_noise
from filterpy.kalman import KalmanFilter

from .config import PreprocessConfig, ensure_valid
from .errors import ParameterError, StructuralError
from .signal_model import (
    Condition,
    EmgMatrix,
    ForceTrace,
    PositionTrace,
    PressureFrameSequence,
    Trial,
    TrialSet,
    require_finite,
)


@dataclass(frozen=True, eq=False)
class RawTrial:
    """未经处理的单个试次 (EMG 可为有符号原始值)"""
    emg: EmgMatrix
    force: Union[ForceTrace, PressureFrameSequence]
    position: PositionTrace
    condition: Condition = Condition.UNLABELED


def rectify(signal: EmgMatrix) -> EmgMatrix:
    """全波整流: 逐元素取绝对值"""
    require_finite(signal.data, "EMG")
    return signal.with_data(np.abs(signal.data))


def moving_average(signal: EmgMatrix, window: int) -> EmgMatrix:
    """逐通道因果滑动平均, 起始处窗口不足时取已有样本的均值"""
    if window < 1 or window > signal.k:
        raise ParameterError(f"滑动平均窗口必须在 1..{signal.k} 内: {window}")
    if window == 1:
        return signal.with_data(signal.data)

    frame = pd.DataFrame(signal.data.T)
    out = frame.rolling(window, min_periods=1).mean().to_numpy().T
    if np.all(signal.data >= 0):
        # 滚动求和的浮点残差可能产生 -1e-17 之类的值
        out = np.maximum(out, 0.0)
    return signal.with_data(out)


def sum_pressure(frames: PressureFrameSequence, label: str = "F_h") -> ForceTrace:
    """每帧所有压力单元求和得到力幅值"""
    if frames.k == 0:
        raise ParameterError("压力帧序列为空")
    require_finite(frames.frames, "压力帧")
    return ForceTrace(frames.frames.sum(axis=(1, 2)), label)


def _kalman_axis(z: np.ndarray, q: float, r: float, rts: bool) -> np.ndarray:
    """单轴匀速模型卡尔曼滤波; 状态 [位置, 速度], 单位时间步长"""
    kf = KalmanFilter(dim_x=2, dim_z=1)
    kf.F = np.array([[1.0, 1.0],
                     [0.0, 1.0]])
    kf.H = np.array([[1.0, 0.0]])
    kf.Q = Q_discrete_white_noise(dim=2, dt=1.0, var=q)
    kf.R = np.array([[r]])
    kf.P = np.eye(2)
    kf.x = np.array([[z[0]], [0.0]])

    means, covs, _, _ = kf.batch_filter(z)
    if rts:
        means, _, _, _ = kf.rts_smoother(means, covs)
    return np.asarray(means).reshape(len(z), -1)[:, 0]


def kalman_smooth(raw: PositionTrace, q: float, r: float, rts: bool = False) -> PositionTrace:
    """对 x、y 分别运行卡尔曼滤波, 输出滤波后的位置分量

    Args:
        raw: 原始食指轨迹
        q: 过程噪声方差
        r: 观测噪声方差
        rts: 是否追加 Rauch-Tung-Striebel 反向平滑
    """
    if not (q > 0 and r > 0):
        raise ParameterError(f"卡尔曼噪声参数必须为正: q={q}, r={r}")
    require_finite(raw.points, "位置")
    if raw.k == 0:
        return raw
    return PositionTrace(np.vstack([_kalman_axis(axis, q, r, rts) for axis in raw.points]))


def resample_array(values: np.ndarray, target_len: int) -> np.ndarray:
    """沿最后一维在归一化时间 [0, 1] 上线性插值"""
    values = np.asarray(values, dtype=float)
    k = values.shape[-1]
    if k < 2:
        raise ParameterError(f"重采样需要至少 2 个采样: {k}")
    if target_len < 2:
        raise ParameterError(f"目标长度必须 ≥ 2: {target_len}")

    src = np.linspace(0.0, 1.0, k)
    dst = np.linspace(0.0, 1.0, target_len)
    if values.ndim == 1:
        return np.interp(dst, src, values)
    return np.vstack([np.interp(dst, src, row) for row in values.reshape(-1, k)]).reshape(
        values.shape[:-1] + (target_len,)
    )


def resample(signal, target_len: int):
    """将 EmgMatrix / ForceTrace / PositionTrace / 数组重采样到 target_len"""
    if isinstance(signal, EmgMatrix):
        return signal.with_data(resample_array(signal.data, target_len))
    if isinstance(signal, ForceTrace):
        return ForceTrace(resample_array(signal.values, target_len), signal.label)
    if isinstance(signal, PositionTrace):
        return PositionTrace(resample_array(signal.points, target_len))
    return resample_array(signal, target_len)


def concatenate_trials(trials: TrialSet) -> Tuple[EmgMatrix, ForceTrace, PositionTrace]:
    """按试次顺序沿时间轴拼接"""
    if len(trials) == 0:
        raise StructuralError("没有可拼接的试次")

    first = trials.trials[0].emg
    for i, trial in enumerate(trials, 1):
        if trial.emg.d != first.d or trial.emg.channel_labels != first.channel_labels:
            raise StructuralError(f"试次 {i} 的通道与第 1 个试次不一致")
        if not trial.emg.k == trial.force.k == trial.position.k:
            raise StructuralError(
                f"试次 {i} 未对齐: emg={trial.emg.k}, force={trial.force.k}, "
                f"position={trial.position.k}"
            )

    emg = first.with_data(np.concatenate([t.emg.data for t in trials], axis=1))
    force = ForceTrace(
        np.concatenate([t.force.values for t in trials]),
        trials.trials[0].force.label,
    )
    position = PositionTrace(np.concatenate([t.position.points for t in trials], axis=1))
    return emg, force, position


def split_trials(
    emg: EmgMatrix,
    force: ForceTrace,
    position: PositionTrace,
    lengths: Sequence[int],
    conditions: Optional[Sequence[Condition]] = None,
) -> TrialSet:
    """concatenate_trials 的逆操作"""
    if sum(lengths) != emg.k or not emg.k == force.k == position.k:
        raise StructuralError(
            f"试次长度之和 {sum(lengths)} 与数据长度 emg={emg.k}, force={force.k}, "
            f"position={position.k} 不一致"
        )
    if conditions is None:
        conditions = [Condition.UNLABELED] * len(lengths)
    if len(conditions) != len(lengths):
        raise StructuralError("条件标签数量与试次数量不一致")

    bounds = np.cumsum([0] + list(lengths))
    trials = []
    for (start, stop), condition in zip(zip(bounds[:-1], bounds[1:]), conditions):
        trials.append(Trial(
            emg=emg.with_data(emg.data[:, start:stop]),
            force=ForceTrace(force.values[start:stop], force.label),
            position=PositionTrace(position.points[:, start:stop]),
            condition=condition,
        ))
    return TrialSet(trials)


def trial_lengths(total: int, trials: int) -> List[int]:
    """把拼接总长度分配到各试次, 余数分给前面的试次"""
    if trials < 1:
        raise ParameterError(f"试次数必须 ≥ 1: {trials}")
    base, extra = divmod(total, trials)
    if base < 2:
        raise ParameterError(f"总长度 {total} 不足以分配到 {trials} 个试次")
    return [base + 1] * extra + [base] * (trials - extra)


def preprocess_trial(raw: RawTrial, config: PreprocessConfig, target_len: int) -> Trial:
    """单个试次的完整预处理链"""
    emg = rectify(raw.emg) if config.rectify else raw.emg
    emg = moving_average(emg, config.ma_window)
    emg = resample(emg, target_len)

    force = raw.force
    if isinstance(force, PressureFrameSequence):
        force = sum_pressure(force)
    force = resample(force, target_len)

    position = kalman_smooth(raw.position, config.kalman_q, config.kalman_r, config.kalman_rts)
    position = resample(position, target_len)

    return Trial(emg, force, position, raw.condition)


def preprocess_trial_set(raw_trials: Sequence[RawTrial], config: PreprocessConfig) -> TrialSet:
    """预处理全部试次, 得到长度对齐的 TrialSet"""
    ensure_valid(config.validate(), "预处理配置")
    if not raw_trials:
        raise StructuralError("没有输入试次")

    if config.total_len is not None:
        lengths = trial_lengths(config.total_len, len(raw_trials))
    else:
        lengths = [config.target_len] * len(raw_trials)

    return TrialSet(
        preprocess_trial(raw, config, length) for raw, length in zip(raw_trials, lengths)
    )
