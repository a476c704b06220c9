"""
Error types for Synkin

每个异常携带对应的 CLI 退出码
"""

from pathlib import Path
from typing import Optional


class SynkinError(Exception):
    """所有 Synkin 错误的基类"""
    exit_code = 1


class ParameterError(SynkinError, ValueError):
    """参数错误 (窗口长度、alpha、配置项等)"""
    exit_code = 1


class StructuralError(SynkinError, ValueError):
    """结构错误: 形状、长度或通道标签不一致"""
    exit_code = 2


class NonFiniteInputError(StructuralError):
    """输入包含 NaN/Inf"""

    def __init__(self, message: str, index: Optional[tuple] = None):
        super().__init__(message)
        self.index = index


class DataParseError(SynkinError):
    """数据文件解析失败"""
    exit_code = 2

    def __init__(
        self,
        message: str,
        path: Optional[Path] = None,
        row: Optional[int] = None,
        column: Optional[str] = None,
    ):
        location = []
        if path is not None:
            location.append(str(path))
        if row is not None:
            location.append(f"行 {row}")
        if column is not None:
            location.append(f"列 {column}")
        prefix = f"[{', '.join(location)}] " if location else ""
        super().__init__(f"{prefix}{message}")
        self.path = path
        self.row = row
        self.column = column


class DegenerateInputError(SynkinError, ArithmeticError):
    """数值退化: 全零矩阵、零范数等"""
    exit_code = 3
