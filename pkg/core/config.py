"""
Configuration module for Synkin

集中管理预处理、NMF、执行器模型和流水线参数。
优先级 (低 → 高): 默认值 → 配置文件 → 命令行参数
"""

import math
import os
import typing
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional

from .errors import DataParseError, ParameterError

CONFIG_ENV = "SYNKIN_CONFIG"

SELECTION_METHODS = ("projection", "normalized", "correlation")


def ensure_valid(errors: List[str], what: str) -> None:
    """错误列表非空时抛出 ParameterError"""
    if errors:
        raise ParameterError(f"{what} 无效: " + "; ".join(errors))


@dataclass(frozen=True)
class PreprocessConfig:
    """预处理参数"""
    ma_window: int = 10               # 滑动平均窗口 (采样点)
    kalman_q: float = 1e-3            # 过程噪声方差
    kalman_r: float = 1e-2            # 观测噪声方差
    target_len: int = 94              # 每个试次重采样后的长度 (⌈939/10⌉)
    total_len: Optional[int] = None   # 拼接后总长度, 设置时覆盖 target_len
    rectify: bool = True              # 是否先整流
    kalman_rts: bool = False          # 是否追加 RTS 反向平滑

    def validate(self) -> List[str]:
        errors = []
        if self.ma_window < 1:
            errors.append(f"ma_window 必须 ≥ 1: {self.ma_window}")
        if not self.kalman_q > 0:
            errors.append(f"kalman_q 必须 > 0: {self.kalman_q}")
        if not self.kalman_r > 0:
            errors.append(f"kalman_r 必须 > 0: {self.kalman_r}")
        if self.target_len < 2:
            errors.append(f"target_len 必须 ≥ 2: {self.target_len}")
        if self.total_len is not None and self.total_len < 2:
            errors.append(f"total_len 必须 ≥ 2: {self.total_len}")
        return errors


@dataclass(frozen=True)
class NmfOptions:
    """NMF 乘法更新参数"""
    max_iters: int = 2000
    tol: float = 1e-6                 # 目标函数相对下降阈值
    restarts: int = 10
    seed: int = 0
    epsilon: float = 1e-12            # 分母保护项
    workers: int = 1                  # 并行重启线程数

    def validate(self) -> List[str]:
        errors = []
        if self.max_iters < 1:
            errors.append(f"max_iters 必须 ≥ 1: {self.max_iters}")
        if not self.tol > 0:
            errors.append(f"tol 必须 > 0: {self.tol}")
        if self.restarts < 1:
            errors.append(f"restarts 必须 ≥ 1: {self.restarts}")
        if not self.epsilon > 0:
            errors.append(f"epsilon 必须 > 0: {self.epsilon}")
        if self.workers < 1:
            errors.append(f"workers 必须 ≥ 1: {self.workers}")
        return errors


@dataclass(frozen=True)
class ActuatorModel:
    """仿真末端执行器模型 (一阶力跟踪 + 限幅位置跟踪)"""
    force_time_constant: float = 0.1  # τ, 秒
    force_gain: float = 1.0
    position_max_step: float = 0.01   # 每步最大位移, 米
    noise_sigma: float = 0.0
    dt: float = 0.02                  # 仿真步长, 秒

    def validate(self) -> List[str]:
        errors = []
        for name in ("force_time_constant", "force_gain", "position_max_step", "dt"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                errors.append(f"{name} 必须为正数: {value}")
        if not (self.noise_sigma >= 0 and math.isfinite(self.noise_sigma)):
            errors.append(f"noise_sigma 必须 ≥ 0: {self.noise_sigma}")
        return errors


# 命令行参数名 → 配置键
_FLAG_KEYS = {
    "alpha": "alpha",
    "vaf_threshold": "vaf_threshold",
    "seed": "seed",
    "selection_method": "selection_method",
    "ma_window": "preprocess.ma_window",
    "kalman_q": "preprocess.kalman_q",
    "kalman_r": "preprocess.kalman_r",
    "target_len": "preprocess.target_len",
    "total_len": "preprocess.total_len",
    "max_iters": "nmf.max_iters",
    "tol": "nmf.tol",
    "restarts": "nmf.restarts",
    "nmf_seed": "nmf.seed",
    "workers": "nmf.workers",
    "tau": "actuator.force_time_constant",
    "force_gain": "actuator.force_gain",
    "max_step": "actuator.position_max_step",
    "noise_sigma": "actuator.noise_sigma",
    "dt": "actuator.dt",
}

_SECTIONS = {
    "preprocess": "preprocess",
    "nmf": "nmf",
    "actuator": "actuator",
}


@dataclass(frozen=True)
class PipelineConfig:
    """流水线配置类 - 所有参数的集中管理"""
    alpha: float = 20.0
    vaf_threshold: float = 0.9
    seed: int = 0
    selection_method: str = "projection"
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    nmf: NmfOptions = field(default_factory=NmfOptions)
    actuator: ActuatorModel = field(default_factory=ActuatorModel)

    @classmethod
    def from_mapping(cls, values: Dict[str, Any]) -> "PipelineConfig":
        """从扁平的命名空间键值创建配置"""
        top: Dict[str, Any] = {}
        nested: Dict[str, Dict[str, Any]] = {name: {} for name in _SECTIONS}

        top_fields = {f.name: f for f in fields(cls) if f.name not in _SECTIONS}
        for key, raw in values.items():
            # 来自配置文件的值带有文件与行号
            label = key
            if isinstance(raw, ConfigEntry):
                label = f"{key} ({raw.path} 行 {raw.line})"
                raw = raw.value
            if "." in key:
                section, name = key.split(".", 1)
                if section not in _SECTIONS:
                    raise ParameterError(f"未知配置键: {label}")
                section_fields = {f.name: f for f in fields(_section_type(section))}
                if name not in section_fields:
                    raise ParameterError(f"未知配置键: {label}")
                nested[section][name] = _convert(raw, section_fields[name].type, label)
            else:
                if key not in top_fields:
                    raise ParameterError(f"未知配置键: {label}")
                top[key] = _convert(raw, top_fields[key].type, label)

        return cls(
            preprocess=replace(PreprocessConfig(), **nested["preprocess"]),
            nmf=replace(NmfOptions(), **nested["nmf"]),
            actuator=replace(ActuatorModel(), **nested["actuator"]),
            **top,
        )

    @classmethod
    def from_args(cls, args) -> "PipelineConfig":
        """从 argparse 参数创建配置 (命令行覆盖配置文件)"""
        values: Dict[str, Any] = {}

        config_path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
        if config_path:
            values.update(load_config_file(Path(config_path)))

        for attr, key in _FLAG_KEYS.items():
            value = getattr(args, attr, None)
            if value is not None:
                values[key] = value
        if getattr(args, "no_rectify", False):
            values["preprocess.rectify"] = False
        if getattr(args, "kalman_rts", False):
            values["preprocess.kalman_rts"] = True

        return cls.from_mapping(values)

    def validate(self) -> List[str]:
        """验证配置，返回错误列表"""
        errors = []
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            errors.append(f"alpha 必须为正数: {self.alpha}")
        if not 0 < self.vaf_threshold < 1:
            errors.append(f"vaf_threshold 必须在 (0, 1) 内: {self.vaf_threshold}")
        if self.selection_method not in SELECTION_METHODS:
            errors.append(
                f"selection_method 必须是 {'/'.join(SELECTION_METHODS)}: {self.selection_method}"
            )
        errors += [f"preprocess.{e}" for e in self.preprocess.validate()]
        errors += [f"nmf.{e}" for e in self.nmf.validate()]
        errors += [f"actuator.{e}" for e in self.actuator.validate()]
        return errors

    def as_mapping(self) -> Dict[str, Any]:
        """展开为扁平键值 (用于报告输出)"""
        out: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in _SECTIONS:
                for sub in fields(value):
                    out[f"{f.name}.{sub.name}"] = getattr(value, sub.name)
            else:
                out[f.name] = value
        return out


def _section_type(section: str):
    return {"preprocess": PreprocessConfig, "nmf": NmfOptions, "actuator": ActuatorModel}[section]


class ConfigEntry(NamedTuple):
    """配置文件中的一个值及其出处"""
    value: str
    path: Path
    line: int


def load_config_file(path: Path) -> Dict[str, ConfigEntry]:
    """读取扁平 key = value 配置文件

    支持 # 注释和空行; 键名可带命名空间 (nmf.max_iters)。
    文件无法读取时 OSError 原样抛出
    """
    text = path.read_text(encoding="utf-8")

    values: Dict[str, ConfigEntry] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataParseError("配置行缺少 '='", path=path, row=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise DataParseError("配置键为空", path=path, row=lineno)
        values[key] = ConfigEntry(value, path, lineno)
    return values


def _convert(raw: Any, tp: Any, key: str) -> Any:
    """按字段类型转换配置值"""
    if typing.get_origin(tp) is typing.Union:
        inner = [a for a in typing.get_args(tp) if a is not type(None)][0]
        if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("", "none")):
            return None
        return _convert(raw, inner, key)

    try:
        if tp is bool:
            if isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if tp is int:
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError(raw)
            return int(raw)
        if tp is float:
            return float(raw)
        return str(raw)
    except (TypeError, ValueError) as e:
        raise ParameterError(f"配置键 {key} 的值无法解析: {raw!r}") from e
