"""
Simulator - 平面末端执行器仿真

力: 一阶滞后跟踪 f' = f + (dt/τ)(gain·F̂ − f) + 噪声, 下限为 0
位置: 朝指令点移动, 每步位移不超过 position_max_step
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .config import ActuatorModel, ensure_valid
from .errors import ParameterError, StructuralError
from .signal_model import ForceTrace, PositionTrace
from .synergy import CommandStream


@dataclass(frozen=True)
class SimState:
    force: float
    x: float
    y: float


@dataclass(frozen=True)
class TraceComparison:
    """两条力曲线的比较; 分母为零时比值为 None"""
    rmse: float
    gain_ratio: Optional[float]
    peak_ratio: Optional[float]


@dataclass(frozen=True, eq=False)
class SimResult:
    F_r: ForceTrace
    executed: PositionTrace
    metrics: Dict[str, Optional[float]]


def step(
    state: SimState,
    command_force: float,
    command_point,
    model: ActuatorModel,
    rng: Optional[np.random.Generator] = None,
) -> SimState:
    """推进一个仿真步"""
    noise = 0.0
    if model.noise_sigma > 0 and rng is not None:
        noise = float(rng.normal(0.0, model.noise_sigma))

    force = state.force + (model.dt / model.force_time_constant) * (
        model.force_gain * command_force - state.force
    ) + noise
    force = max(force, 0.0)

    dx = float(command_point[0]) - state.x
    dy = float(command_point[1]) - state.y
    distance = float(np.hypot(dx, dy))
    if distance > model.position_max_step:
        ratio = model.position_max_step / distance
        dx *= ratio
        dy *= ratio
    return SimState(force, state.x + dx, state.y + dy)


def run(stream: CommandStream, model: Optional[ActuatorModel] = None, seed: int = 0) -> SimResult:
    """运行整条指令流

    每个试次开始时力复位为 0, 位置复位到该试次的第一个指令点;
    噪声随机流在整条指令流上连续
    """
    model = model or ActuatorModel()
    ensure_valid(model.validate(), "执行器模型")
    k = len(stream)
    if k == 0:
        raise ParameterError("指令流为空")

    rng = np.random.default_rng(seed)
    commanded = stream.position.points
    forces = np.empty(k)
    executed = np.empty((2, k))
    for start, stop in stream.segments:
        state = SimState(0.0, float(commanded[0, start]), float(commanded[1, start]))
        for j in range(start, stop):
            state = step(state, float(stream.force.values[j]), commanded[:, j], model, rng)
            forces[j] = state.force
            executed[:, j] = (state.x, state.y)

    F_r = ForceTrace(forces, f"F_r_{stream.condition.value}")
    command = stream.force.values
    active = command > 0
    gain_ratio = None
    if np.any(active) and command[active].mean() > 0:
        gain_ratio = float(forces[active].mean() / command[active].mean())

    metrics = {
        "force_rmse_vs_command": float(np.sqrt(np.mean((forces - command) ** 2))),
        "gain_ratio": gain_ratio,
        "path_deviation_max": float(np.max(np.hypot(*(executed - commanded)))),
        "mean_force": float(forces.mean()),
    }
    return SimResult(F_r, PositionTrace(executed), metrics)


def compare_traces(a: ForceTrace, b: ForceTrace) -> TraceComparison:
    """以 a 为参考比较 b: RMSE、均值比、峰值比"""
    if a.k != b.k:
        raise StructuralError(f"曲线长度不一致: {a.k} vs {b.k}")
    if a.k == 0:
        raise StructuralError("曲线为空")
    rmse = float(np.sqrt(np.mean((b.values - a.values) ** 2)))
    mean_a = float(a.values.mean())
    peak_a = float(a.values.max())
    return TraceComparison(
        rmse=rmse,
        gain_ratio=float(b.values.mean()) / mean_a if mean_a > 0 else None,
        peak_ratio=float(b.values.max()) / peak_a if peak_a > 0 else None,
    )
