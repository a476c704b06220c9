"""
NMF module - 肌肉协同提取

M ≈ W·C, W (d×n) 为协同, C (n×k) 为激活曲线。
Lee-Seung 乘法更新最小化 ‖M − W·C‖_F², 多次随机重启取目标值最小者。
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .config import NmfOptions, ensure_valid
from .errors import DegenerateInputError, ParameterError, StructuralError
from .signal_model import EmgMatrix, require_finite


@dataclass(frozen=True, eq=False)
class SynergySet:
    """协同矩阵 W 与激活矩阵 C 及拟合元数据"""
    W: np.ndarray
    C: np.ndarray
    vaf: float
    seed: int = 0
    iterations_run: int = 0
    final_objective: float = 0.0
    objective_trace: Tuple[float, ...] = ()
    zero_columns: Tuple[int, ...] = ()     # 归一化时跳过的全零协同 (0 起始)

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        C = np.array(self.C, dtype=float)
        if W.ndim != 2 or C.ndim != 2 or W.shape[1] != C.shape[0]:
            raise StructuralError(f"W {W.shape} 与 C {C.shape} 形状不匹配")
        W.setflags(write=False)
        C.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "C", C)

    @property
    def n(self) -> int:
        return self.W.shape[1]

    @property
    def d(self) -> int:
        return self.W.shape[0]

    @property
    def k(self) -> int:
        return self.C.shape[1]

    def reconstruct(self) -> np.ndarray:
        return self.W @ self.C


@dataclass(frozen=True, eq=False)
class OrderSelection:
    """VAF 阶数选择结果"""
    n: int
    synergies: SynergySet
    vaf_by_order: Tuple[Tuple[int, float], ...]
    reached: bool
    threshold: float


def _as_array(M) -> np.ndarray:
    return M.data if isinstance(M, EmgMatrix) else np.asarray(M, dtype=float)


def objective(M: np.ndarray, W: np.ndarray, C: np.ndarray) -> float:
    """平方 Frobenius 残差"""
    residual = M - W @ C
    return float(np.vdot(residual, residual))


def vaf(M, W: np.ndarray, C: np.ndarray) -> float:
    """VAF = 1 − ‖M − WC‖_F² / ‖M‖_F²"""
    data = _as_array(M)
    W = np.asarray(W, dtype=float)
    C = np.asarray(C, dtype=float)
    if W.shape[0] != data.shape[0] or C.shape[1] != data.shape[1] or W.shape[1] != C.shape[0]:
        raise StructuralError(f"形状不匹配: M {data.shape}, W {W.shape}, C {C.shape}")
    total = float(np.vdot(data, data))
    if total == 0.0:
        raise DegenerateInputError("‖M‖_F = 0, VAF 无定义")
    return 1.0 - objective(data, W, C) / total


def _check_input(data: np.ndarray, n: int) -> None:
    require_finite(data, "M")
    if np.any(data < 0):
        raise ParameterError("M 含负值, 无法进行非负分解")
    if not np.any(data > 0):
        raise DegenerateInputError("M 全为零, 无法分解")
    if not 1 <= n <= data.shape[0]:
        raise ParameterError(f"协同数 n 必须在 1..{data.shape[0]} 内: {n}")


def _fit_once(
    data: np.ndarray,
    n: int,
    opts: NmfOptions,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray, List[float]]:
    """单次乘法更新拟合, 返回 (W, C, 目标值轨迹)"""
    d, k = data.shape
    scale = np.sqrt(data.mean() / n)
    # 1 - U[0, 1) 落在 (0, 1]
    W = (1.0 - rng.random((d, n))) * scale
    C = (1.0 - rng.random((n, k))) * scale
    eps = opts.epsilon

    trace = [objective(data, W, C)]
    for _ in range(opts.max_iters):
        C *= (W.T @ data) / (W.T @ W @ C + eps)
        W *= (data @ C.T) / (W @ (C @ C.T) + eps)

        current = objective(data, W, C)
        previous = trace[-1]
        trace.append(current)
        if previous == 0.0 or (previous - current) / previous < opts.tol:
            break
    return W, C, trace


def factorize(
    M,
    n: int,
    opts: Optional[NmfOptions] = None,
    on_restart: Optional[Callable[[int, float, int], None]] = None,
) -> SynergySet:
    """对 M 做 n 阶非负分解

    Args:
        M: EmgMatrix 或 d×k 非负数组
        n: 协同数 (1 ≤ n ≤ d)
        opts: NMF 参数; 每次重启使用由 opts.seed 派生的独立随机流
        on_restart: 每次重启完成后的回调 (重启序号, 目标值, 迭代次数)

    Returns:
        目标值最小的 SynergySet; 目标值相同时取序号最小的重启
    """
    opts = opts or NmfOptions()
    ensure_valid(opts.validate(), "NMF 参数")
    data = _as_array(M)
    if data.ndim != 2:
        raise StructuralError(f"M 必须是二维矩阵: {data.shape}")
    _check_input(data, n)

    streams = np.random.SeedSequence(opts.seed).spawn(opts.restarts)

    def run(stream):
        return _fit_once(data, n, opts, np.random.default_rng(stream))

    if opts.workers > 1 and opts.restarts > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            results = list(pool.map(run, streams))
    else:
        results = [run(stream) for stream in streams]

    best_index = 0
    for index, (_, _, trace) in enumerate(results):
        if on_restart is not None:
            on_restart(index, trace[-1], len(trace) - 1)
        if trace[-1] < results[best_index][2][-1]:
            best_index = index

    W, C, trace = results[best_index]
    return SynergySet(
        W=W,
        C=C,
        vaf=vaf(data, W, C),
        seed=opts.seed,
        iterations_run=len(trace) - 1,
        final_objective=trace[-1],
        objective_trace=tuple(trace),
    )


def select_order(
    M,
    threshold: float = 0.9,
    opts: Optional[NmfOptions] = None,
    on_order: Optional[Callable[[int, float], None]] = None,
    on_restart: Optional[Callable[[int, float, int], None]] = None,
) -> OrderSelection:
    """返回 VAF ≥ threshold 的最小协同数及其拟合结果

    所有阶数都达不到阈值时返回 n = d, reached = False
    """
    if not 0 < threshold < 1:
        raise ParameterError(f"VAF 阈值必须在 (0, 1) 内: {threshold}")
    data = _as_array(M)

    table = []
    fit = None
    for n in range(1, data.shape[0] + 1):
        fit = factorize(data, n, opts, on_restart=on_restart)
        table.append((n, fit.vaf))
        if on_order is not None:
            on_order(n, fit.vaf)
        if fit.vaf >= threshold:
            return OrderSelection(n, fit, tuple(table), True, threshold)
    return OrderSelection(data.shape[0], fit, tuple(table), False, threshold)
