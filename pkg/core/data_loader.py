"""
Data loading module - 读取试次 CSV、协同文件和指令文件
"""

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .csv_exporter import SYNERGY_FILE_MAGIC, trial_stem
from .errors import DataParseError, StructuralError
from .nmf import SynergySet
from .preprocess import RawTrial
from .signal_model import (
    Condition,
    EmgMatrix,
    ForceTrace,
    PositionTrace,
    PressureFrameSequence,
    Trial,
    TrialSet,
)

_CELL = re.compile(r"^cell_(\d+)_(\d+)$")


@dataclass(frozen=True)
class TrialSegment:
    trial: int
    condition: Condition
    start: int
    stop: int

    @property
    def length(self) -> int:
        return self.stop - self.start


class DataLoader:
    """数据文件读取器"""

    @staticmethod
    def read_table(path: Path, expected: Optional[Sequence[str]] = None) -> pd.DataFrame:
        """读取 CSV 并检查数值单元格

        Args:
            path: CSV 文件路径
            expected: 必须按顺序出现的列名 (可选)
        """
        if not path.exists():
            raise FileNotFoundError(f"文件不存在: {path}")
        try:
            df = pd.read_csv(path, float_precision="round_trip")
        except pd.errors.EmptyDataError:
            raise StructuralError(f"文件为空: {path}") from None
        except pd.errors.ParserError as e:
            raise DataParseError(f"CSV 格式错误: {e}", path=path) from e

        if expected is not None and list(df.columns[: len(expected)]) != list(expected):
            raise DataParseError(
                f"表头应为 {','.join(expected)}, 实际为 {','.join(map(str, df.columns))}",
                path=path, row=1,
            )
        return df

    @staticmethod
    def numeric(
        df: pd.DataFrame, columns: Sequence[str], path: Path, non_negative: bool = False
    ) -> np.ndarray:
        """取出数值列; 非数值、缺失、非有限或 (要求非负时) 负值单元格报告行列位置"""
        out = np.empty((len(df), len(columns)))
        for j, column in enumerate(columns):
            if column not in df.columns:
                raise DataParseError("缺少列", path=path, row=1, column=column)
            values = pd.to_numeric(df[column], errors="coerce").to_numpy(dtype=float)
            checks = [(np.isnan(values), "无法解析数值"), (np.isinf(values), "数值非有限")]
            if non_negative:
                checks.append((values < 0, "数值必须 ≥ 0"))
            for bad, message in checks:
                if bad.any():
                    row = int(np.flatnonzero(bad)[0])
                    # 表头占第 1 行
                    raise DataParseError(
                        f"{message}: {df[column].iloc[row]!r}", path=path, row=row + 2, column=column
                    )
            out[:, j] = values
        return out

    @classmethod
    def integers(cls, df: pd.DataFrame, column: str, path: Path) -> np.ndarray:
        """整数列; 带小数部分的值报告行位置"""
        values = cls.numeric(df, [column], path)[:, 0]
        fractional = values != np.round(values)
        if fractional.any():
            row = int(np.flatnonzero(fractional)[0])
            raise DataParseError(f"应为整数: {values[row]!r}", path=path, row=row + 2, column=column)
        return values.astype(int)

    # === 单个文件 ===

    @classmethod
    def load_emg(cls, path: Path, sample_rate_hz: float = 200.0) -> EmgMatrix:
        """表头 t,ch1..chd"""
        df = cls.read_table(path, ["t"])
        channels = [c for c in df.columns[1:]]
        if not channels or channels != [f"ch{i}" for i in range(1, len(channels) + 1)]:
            raise DataParseError("EMG 通道列应为 ch1..chd", path=path, row=1)
        if len(df) == 0:
            raise StructuralError(f"EMG 文件没有采样: {path}")
        data = cls.numeric(df, channels, path).T
        return EmgMatrix(data, tuple(channels), sample_rate_hz)

    @classmethod
    def load_pressure(cls, path: Path) -> PressureFrameSequence:
        """表头 t,cell_1_1..cell_r_c (行优先)"""
        df = cls.read_table(path, ["t"])
        cells = list(df.columns[1:])
        coords = []
        for name in cells:
            m = _CELL.match(str(name))
            if not m:
                raise DataParseError("压力单元列名应为 cell_r_c", path=path, row=1, column=str(name))
            coords.append((int(m.group(1)), int(m.group(2))))
        if not coords:
            raise DataParseError("没有压力单元列", path=path, row=1)
        rows = max(r for r, _ in coords)
        cols = max(c for _, c in coords)
        if coords != [(r, c) for r in range(1, rows + 1) for c in range(1, cols + 1)]:
            raise DataParseError("压力单元列不是完整的行优先网格", path=path, row=1)
        if len(df) == 0:
            raise StructuralError(f"压力文件没有帧: {path}")
        values = cls.numeric(df, cells, path, non_negative=True)
        return PressureFrameSequence(values.reshape(len(df), rows, cols))

    @classmethod
    def load_force(cls, path: Path, column: str = "force", label: str = "F_h") -> ForceTrace:
        df = cls.read_table(path, ["t"])
        return ForceTrace(cls.numeric(df, [column], path, non_negative=True)[:, 0], label)

    @classmethod
    def load_position(cls, path: Path) -> PositionTrace:
        df = cls.read_table(path, ["t", "x", "y"])
        return PositionTrace(cls.numeric(df, ["x", "y"], path).T)

    # === 试次目录 ===

    @classmethod
    def load_manifest(cls, indir: Path) -> List[Tuple[int, Condition, float]]:
        """trials.csv: trial,condition[,sample_rate_hz]"""
        path = indir / "trials.csv"
        df = cls.read_table(path, ["trial", "condition"])
        if len(df) == 0:
            raise StructuralError(f"试次清单为空: {path}")
        rates = (
            cls.numeric(df, ["sample_rate_hz"], path)[:, 0]
            if "sample_rate_hz" in df.columns else np.full(len(df), 200.0)
        )
        trials = cls.integers(df, "trial", path)
        duplicated = pd.Series(trials).duplicated().to_numpy()
        if duplicated.any():
            row = int(np.flatnonzero(duplicated)[0])
            raise DataParseError(f"试次号重复: {trials[row]}", path=path, row=row + 2, column="trial")
        return [
            (int(t), Condition.parse(str(c)), float(r))
            for t, c, r in zip(trials, df["condition"], rates)
        ]

    @classmethod
    def load_raw_trials(cls, indir: Path) -> List[RawTrial]:
        """读取目录中的全部原始试次; 力优先读取压力帧文件"""
        raw = []
        for index, condition, rate in cls.load_manifest(indir):
            stem = trial_stem(index)
            emg = cls.load_emg(indir / f"{stem}_emg.csv", rate)
            pressure_path = indir / f"{stem}_pressure.csv"
            if pressure_path.exists():
                force = cls.load_pressure(pressure_path)
            else:
                force = cls.load_force(indir / f"{stem}_force.csv")
            position = cls.load_position(indir / f"{stem}_position.csv")
            raw.append(RawTrial(emg, force, position, condition))
        return raw

    @classmethod
    def load_trial_set(cls, indir: Path) -> TrialSet:
        """不经预处理直接读回 TrialSet (压力帧求和为力)"""
        from .preprocess import sum_pressure

        trials = []
        for raw in cls.load_raw_trials(indir):
            force = raw.force
            if isinstance(force, PressureFrameSequence):
                force = sum_pressure(force)
            trials.append(Trial(raw.emg, force, raw.position, raw.condition))
        return TrialSet(trials)

    # === 流水线中间文件 ===

    @staticmethod
    def load_synergies(path: Path) -> SynergySet:
        """读取 export_synergies 写出的协同文件"""
        if not path.exists():
            raise FileNotFoundError(f"文件不存在: {path}")
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines or lines[0].strip() != SYNERGY_FILE_MAGIC:
            raise DataParseError("不是协同文件", path=path, row=1)

        header: Dict[str, str] = {}
        row = 1
        while row < len(lines) and lines[row].strip() != "W":
            key, sep, value = lines[row].partition("=")
            if not sep:
                raise DataParseError(f"无法解析头部: {lines[row]!r}", path=path, row=row + 1)
            header[key.strip()] = value.strip()
            row += 1
        try:
            d, n, k = int(header["d"]), int(header["n"]), int(header["k"])
        except (KeyError, ValueError) as e:
            raise DataParseError(f"头部缺少 d/n/k: {e}", path=path) from e

        def block(start: int, rows: int, cols: int) -> np.ndarray:
            out = np.empty((rows, cols))
            for i in range(rows):
                lineno = start + i
                if lineno >= len(lines):
                    raise DataParseError("矩阵行数不足", path=path, row=lineno + 1)
                cells = lines[lineno].split(",")
                if len(cells) != cols:
                    raise DataParseError(
                        f"应有 {cols} 列, 实际 {len(cells)} 列", path=path, row=lineno + 1
                    )
                for j, cell in enumerate(cells):
                    try:
                        value = float(cell)
                    except ValueError:
                        raise DataParseError(
                            f"无法解析数值: {cell!r}", path=path, row=lineno + 1, column=str(j + 1)
                        ) from None
                    # W、C 必须有限且非负
                    if not (math.isfinite(value) and value >= 0):
                        raise DataParseError(
                            f"协同元素必须为有限非负数: {cell!r}",
                            path=path, row=lineno + 1, column=str(j + 1),
                        )
                    out[i, j] = value
            return out

        W = block(row + 1, d, n)
        c_marker = row + 1 + d
        if c_marker >= len(lines) or lines[c_marker].strip() != "C":
            raise DataParseError("缺少 C 块", path=path, row=c_marker + 1)
        C = block(c_marker + 1, n, k)

        zero_columns = tuple(int(c) for c in header.get("zero_columns", "").split(";") if c)
        return SynergySet(
            W=W,
            C=C,
            vaf=float(header.get("vaf", "nan")),
            seed=int(header.get("seed", 0)),
            iterations_run=int(header.get("iterations_run", 0)),
            final_objective=float(header.get("final_objective", "nan")),
            zero_columns=zero_columns,
        )

    @classmethod
    def load_segments(cls, path: Path) -> List[TrialSegment]:
        df = cls.read_table(path, ["trial", "condition", "start", "stop"])
        columns = [cls.integers(df, name, path) for name in ("trial", "start", "stop")]
        segments = [
            TrialSegment(int(t), Condition.parse(str(c)), int(a), int(b))
            for t, a, b, c in zip(*columns, df["condition"])
        ]
        expected = 0
        for seg in segments:
            if seg.start != expected or seg.stop <= seg.start:
                raise StructuralError(f"试次区间不连续: {path} 试次 {seg.trial}")
            expected = seg.stop
        return segments

    @classmethod
    def load_command(cls, path: Path) -> Tuple[ForceTrace, PositionTrace, Optional[ForceTrace], List[int]]:
        """读取指令文件 t,force,x,y[,f_h][,trial]

        Returns:
            (F̂, 位置指令, F_h 或 None, 各试次长度)
        """
        df = cls.read_table(path, ["t", "force", "x", "y"])
        if len(df) == 0:
            raise StructuralError(f"指令文件为空: {path}")
        force = cls.numeric(df, ["force"], path, non_negative=True)[:, 0]
        points = cls.numeric(df, ["x", "y"], path)
        f_h = None
        if "f_h" in df.columns:
            f_h = ForceTrace(cls.numeric(df, ["f_h"], path, non_negative=True)[:, 0], "F_h")
        lengths = [len(df)]
        if "trial" in df.columns:
            trial = cls.integers(df, "trial", path)
            # 相邻行试次号变化处即为试次边界
            bounds = np.flatnonzero(np.diff(trial) != 0) + 1
            lengths = np.diff(np.concatenate([[0], bounds, [len(df)]])).astype(int).tolist()
        return ForceTrace(force, "F_hat"), PositionTrace(points.T), f_h, lengths
