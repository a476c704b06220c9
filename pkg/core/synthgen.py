"""
Synthetic data generator - 已知真值的合成数据

生成已知 W、C、F_h、轨迹和试次结构的数据集, 用于验证分解恢复、
力协同选择和端到端流水线。前一半试次为弱按压, 后一半为强按压。
"""

import itertools
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import ParameterError, StructuralError
from .signal_model import (
    Condition,
    EmgMatrix,
    ForceTrace,
    PositionTrace,
    PressureFrameSequence,
    Trial,
    TrialSet,
    default_channel_labels,
)

MAX_MATCH_SYNERGIES = 8


@dataclass(frozen=True)
class SynthSpec:
    """合成数据参数"""
    d: int = 16
    n: int = 3
    trials: int = 10
    trial_len: int = 94
    noise_snr_db: float = 20.0                          # inf 表示无噪声
    seed: int = 0
    force_synergy_index: int = 1                        # 1 起始
    weak_strong_scale: Tuple[float, float] = (0.1, 1.0)
    force_scale: float = 100.0                          # F_h = force_scale · c_force
    force_noise: float = 0.01                           # 相对 F_h 峰值的噪声标准差
    position_jitter: float = 0.002                      # 米
    line_length: float = 0.3                            # 米
    sample_rate_hz: float = 200.0

    def validate(self) -> List[str]:
        errors = []
        if self.d < 1:
            errors.append(f"d 必须 ≥ 1: {self.d}")
        if not 1 <= self.n <= self.d:
            errors.append(f"n 必须在 1..d 内: n={self.n}, d={self.d}")
        if self.trials < 1:
            errors.append(f"trials 必须 ≥ 1: {self.trials}")
        if self.trial_len < 2:
            errors.append(f"trial_len 必须 ≥ 2: {self.trial_len}")
        if not 1 <= self.force_synergy_index <= self.n:
            errors.append(f"force_synergy_index 必须在 1..n 内: {self.force_synergy_index}")
        if len(self.weak_strong_scale) != 2 or min(self.weak_strong_scale) <= 0:
            errors.append(f"weak_strong_scale 必须是两个正数: {self.weak_strong_scale}")
        if math.isnan(self.noise_snr_db) or self.noise_snr_db == -math.inf:
            errors.append(f"noise_snr_db 无效: {self.noise_snr_db}")
        for name in ("force_scale", "sample_rate_hz"):
            if not getattr(self, name) > 0:
                errors.append(f"{name} 必须 > 0: {getattr(self, name)}")
        for name in ("force_noise", "position_jitter", "line_length"):
            if getattr(self, name) < 0:
                errors.append(f"{name} 必须 ≥ 0: {getattr(self, name)}")
        return errors


@dataclass(frozen=True, eq=False)
class SynthDataset:
    spec: SynthSpec
    trial_set: TrialSet
    W_true: np.ndarray
    C_true: np.ndarray
    F_h_true: ForceTrace
    selection_true: int

    @property
    def conditions(self) -> List[Condition]:
        return self.trial_set.condition_labels


@dataclass(frozen=True)
class SynergyMatch:
    """permutation[i] 为与真值第 i 列匹配的估计列下标"""
    permutation: Tuple[int, ...]
    cosine_sims: Tuple[float, ...]


def _synergy_profiles(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    """每个协同在一段互不重叠的连续通道上占主导, 其余通道为稀疏小权重"""
    W = np.zeros((spec.d, spec.n))
    blocks = np.array_split(np.arange(spec.d), spec.n)
    for i, block in enumerate(blocks):
        W[:, i] = rng.uniform(0.0, 0.1, spec.d) * (rng.random(spec.d) < 0.5)
        W[block, i] = rng.uniform(0.6, 1.0, len(block))
        W[:, i] /= W[:, i].max()
    return W


def _bump(t: np.ndarray, center: float, width: float, amplitude: float) -> np.ndarray:
    return amplitude * np.exp(-0.5 * ((t - center) / width) ** 2)


def _trial_activations(
    spec: SynthSpec,
    condition: Condition,
    rng: np.random.Generator,
) -> np.ndarray:
    """力协同: 每个试次一次宽幅按压; 其它协同: 两个窄峰"""
    L = spec.trial_len
    t = np.arange(L, dtype=float)
    weak, strong = spec.weak_strong_scale
    press = weak if condition is Condition.WEAK else strong

    C = np.zeros((spec.n, L))
    for i in range(spec.n):
        if i == spec.force_synergy_index - 1:
            C[i] = _bump(t, (L - 1) / 2.0, L / 5.0, press)
            continue
        for _ in range(2):
            C[i] += _bump(t, rng.uniform(0.1 * L, 0.9 * L), L / 16.0, rng.uniform(0.3, 0.7))
    return C


def generate(spec: SynthSpec) -> SynthDataset:
    """按 SynthSpec 生成合成数据集 (同一 seed 结果逐位一致)"""
    errors = spec.validate()
    if errors:
        raise ParameterError("合成参数无效: " + "; ".join(errors))

    rng = np.random.default_rng(spec.seed)
    W = _synergy_profiles(spec, rng)
    n_weak = spec.trials // 2
    conditions = [Condition.WEAK] * n_weak + [Condition.STRONG] * (spec.trials - n_weak)

    blocks = [_trial_activations(spec, c, rng) for c in conditions]
    C = np.concatenate(blocks, axis=1)

    clean = W @ C
    if math.isinf(spec.noise_snr_db) and spec.noise_snr_db > 0:
        emg = clean
    else:
        power = float(np.mean(clean ** 2))
        sigma = math.sqrt(power / 10.0 ** (spec.noise_snr_db / 10.0))
        emg = np.clip(clean + rng.normal(0.0, sigma, clean.shape), 0.0, None)

    force_row = C[spec.force_synergy_index - 1]
    F_h = spec.force_scale * force_row
    if spec.force_noise > 0:
        F_h = F_h + rng.normal(0.0, spec.force_noise * F_h.max(), F_h.shape)
        F_h = np.clip(F_h, 0.0, None)

    L = spec.trial_len
    labels = tuple(default_channel_labels(spec.d))
    trials = []
    for i, condition in enumerate(conditions):
        window = slice(i * L, (i + 1) * L)
        x = np.linspace(0.0, spec.line_length, L)
        y = np.zeros(L)
        if spec.position_jitter > 0:
            x = x + rng.normal(0.0, spec.position_jitter, L)
            y = y + rng.normal(0.0, spec.position_jitter, L)
        trials.append(Trial(
            emg=EmgMatrix(emg[:, window], labels, spec.sample_rate_hz),
            force=ForceTrace(F_h[window], "F_h"),
            position=PositionTrace(np.vstack([x, y])),
            condition=condition,
        ))

    return SynthDataset(
        spec=spec,
        trial_set=TrialSet(trials),
        W_true=W,
        C_true=C,
        F_h_true=ForceTrace(F_h, "F_h"),
        selection_true=spec.force_synergy_index,
    )


def pressure_frames(force: ForceTrace, shape: Tuple[int, int] = (16, 10)) -> PressureFrameSequence:
    """把力幅值铺到固定的压力垫足印上, 每帧单元之和等于该时刻的力"""
    rows, cols = shape
    r = np.arange(rows) - (rows - 1) / 2.0
    c = np.arange(cols) - (cols - 1) / 2.0
    footprint = np.exp(-0.5 * ((r[:, None] / (rows / 6.0)) ** 2 + (c[None, :] / (cols / 6.0)) ** 2))
    footprint /= footprint.sum()
    return PressureFrameSequence(force.values[:, None, None] * footprint[None, :, :])


def _cosine_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    norms = np.outer(np.linalg.norm(A, axis=0), np.linalg.norm(B, axis=0))
    dots = A.T @ B
    return np.divide(dots, norms, out=np.zeros_like(dots), where=norms > 0)


def match_synergies(W_true: np.ndarray, W_est: np.ndarray) -> SynergyMatch:
    """穷举列置换, 最大化余弦相似度之和"""
    W_true = np.asarray(W_true, dtype=float)
    W_est = np.asarray(W_est, dtype=float)
    if W_true.shape != W_est.shape or W_true.ndim != 2:
        raise StructuralError(f"形状不一致: {W_true.shape} vs {W_est.shape}")
    n = W_true.shape[1]
    if n > MAX_MATCH_SYNERGIES:
        raise ParameterError(f"穷举匹配最多支持 {MAX_MATCH_SYNERGIES} 个协同: {n}")

    sims = _cosine_matrix(W_true, W_est)
    best_perm: Tuple[int, ...] = tuple(range(n))
    best_total = -np.inf
    for perm in itertools.permutations(range(n)):
        total = sum(sims[i, j] for i, j in enumerate(perm))
        if total > best_total:
            best_total = total
            best_perm = perm
    return SynergyMatch(
        permutation=tuple(best_perm),
        cosine_sims=tuple(float(sims[i, j]) for i, j in enumerate(best_perm)),
    )
