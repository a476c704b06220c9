"""
CSV Export module

所有输出文件均为 CSV/纯文本; 浮点数以完整精度写出 (repr), 可逐位复现
"""

import json
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .logger import ProcessLogger
from .nmf import OrderSelection, SynergySet
from .signal_model import Condition, EmgMatrix, ForceTrace, PositionTrace, PressureFrameSequence
from .synergy import CommandStream, ForceSynergySelection
from .simulator import SimResult
from .synthgen import SynthDataset, pressure_frames

SYNERGY_FILE_MAGIC = "# synkin synergy set"


def trial_stem(index: int) -> str:
    """试次文件名前缀 (1 起始)"""
    return f"trial_{index:02d}"


def _fmt(value: float) -> str:
    return repr(float(value))


class CSVExporter:
    """CSV 导出器"""

    def __init__(self, logger: Optional[ProcessLogger] = None):
        self.logger = logger or ProcessLogger(verbose=False, quiet=True)

    def _write_frame(self, df: pd.DataFrame, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
        self.logger.log_file_written(path)
        return path

    def _write_text(self, text: str, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
        self.logger.log_file_written(path)
        return path

    # === 数据集 ===

    def export_emg(self, emg: EmgMatrix, path: Path) -> Path:
        """表头 t,ch1..chd; 每行一个采样"""
        df = pd.DataFrame(emg.data.T, columns=[f"ch{i}" for i in range(1, emg.d + 1)])
        df.insert(0, "t", np.arange(emg.k) / emg.sample_rate_hz)
        return self._write_frame(df, path)

    def export_pressure(self, frames: PressureFrameSequence, sample_rate_hz: float, path: Path) -> Path:
        """表头 t,cell_1_1..cell_r_c (行优先)"""
        rows, cols = frames.grid_shape
        names = [f"cell_{r}_{c}" for r in range(1, rows + 1) for c in range(1, cols + 1)]
        df = pd.DataFrame(frames.frames.reshape(frames.k, rows * cols), columns=names)
        df.insert(0, "t", np.arange(frames.k) / sample_rate_hz)
        return self._write_frame(df, path)

    def export_force(self, force: ForceTrace, path: Path, t: Optional[np.ndarray] = None) -> Path:
        t = np.arange(force.k) if t is None else t
        return self._write_frame(pd.DataFrame({"t": t, "force": force.values}), path)

    def export_position(self, position: PositionTrace, path: Path, t: Optional[np.ndarray] = None) -> Path:
        t = np.arange(position.k) if t is None else t
        return self._write_frame(pd.DataFrame({"t": t, "x": position.x, "y": position.y}), path)

    def export_dataset(self, dataset: SynthDataset, outdir: Path, force_format: str = "pressure") -> List[Path]:
        """写出每个试次的 EMG/力(或压力帧)/位置文件、试次清单和真值文件"""
        written = []
        manifest = []
        for i, trial in enumerate(dataset.trial_set, 1):
            stem = trial_stem(i)
            rate = trial.emg.sample_rate_hz
            t = np.arange(trial.emg.k) / rate
            written.append(self.export_emg(trial.emg, outdir / f"{stem}_emg.csv"))
            if force_format == "pressure":
                written.append(self.export_pressure(
                    pressure_frames(trial.force), rate, outdir / f"{stem}_pressure.csv"
                ))
            else:
                written.append(self.export_force(trial.force, outdir / f"{stem}_force.csv", t))
            written.append(self.export_position(trial.position, outdir / f"{stem}_position.csv", t))
            manifest.append({"trial": i, "condition": trial.condition.value, "sample_rate_hz": rate})

        written.append(self._write_frame(pd.DataFrame(manifest), outdir / "trials.csv"))
        written.append(self.export_truth(dataset, outdir / "truth.json"))
        return written

    def export_truth(self, dataset: SynthDataset, path: Path) -> Path:
        """真值旁路文件"""
        spec = dataset.spec
        truth = {
            "spec": {
                "d": spec.d,
                "n": spec.n,
                "trials": spec.trials,
                "trial_len": spec.trial_len,
                "noise_snr_db": spec.noise_snr_db if np.isfinite(spec.noise_snr_db) else "inf",
                "seed": spec.seed,
                "force_synergy_index": spec.force_synergy_index,
                "weak_strong_scale": list(spec.weak_strong_scale),
            },
            "selection_true": dataset.selection_true,
            "W_true": dataset.W_true.tolist(),
            "C_true": dataset.C_true.tolist(),
            "F_h_true": dataset.F_h_true.values.tolist(),
        }
        return self._write_text(json.dumps(truth, indent=1) + "\n", path)

    # === 协同提取 ===

    def export_synergies(self, s: SynergySet, path: Path) -> Path:
        """文本头 (d, n, k, vaf, seed ...) 之后依次是 W 和 C 的行优先 CSV 块"""
        lines = [
            SYNERGY_FILE_MAGIC,
            f"d={s.d}",
            f"n={s.n}",
            f"k={s.k}",
            f"vaf={_fmt(s.vaf)}",
            f"seed={s.seed}",
            f"iterations_run={s.iterations_run}",
            f"final_objective={_fmt(s.final_objective)}",
            f"zero_columns={';'.join(str(c) for c in s.zero_columns)}",
            "W",
        ]
        lines += [",".join(_fmt(v) for v in row) for row in s.W]
        lines.append("C")
        lines += [",".join(_fmt(v) for v in row) for row in s.C]
        return self._write_text("\n".join(lines) + "\n", path)

    def export_weights(self, s: SynergySet, channel_labels: Sequence[str], path: Path) -> Path:
        """归一化协同权重表, 每行一个通道并附带部署描述"""
        df = pd.DataFrame(s.W, columns=[f"w{i}" for i in range(1, s.n + 1)])
        df.insert(0, "location", list(channel_labels))
        df.insert(0, "channel", np.arange(1, s.d + 1))
        return self._write_frame(df, path)

    def export_vaf_table(self, selection: OrderSelection, path: Path) -> Path:
        df = pd.DataFrame(selection.vaf_by_order, columns=["n", "vaf"])
        df["selected"] = (df["n"] == selection.n).astype(int)
        return self._write_frame(df, path)

    def export_segments(self, lengths: Sequence[int], conditions: Sequence[Condition], path: Path) -> Path:
        """试次在拼接序列中的区间 [start, stop)"""
        bounds = np.cumsum([0] + list(lengths))
        df = pd.DataFrame({
            "trial": np.arange(1, len(lengths) + 1),
            "condition": [c.value for c in conditions],
            "start": bounds[:-1],
            "stop": bounds[1:],
        })
        return self._write_frame(df, path)

    # === 指令 ===

    def export_selection(self, selection: ForceSynergySelection, path: Path) -> Path:
        df = pd.DataFrame({
            "synergy": np.arange(1, len(selection.all_scores) + 1),
            "score": selection.all_scores,
        })
        df["selected"] = (df["synergy"] == selection.index).astype(int)
        df["method"] = selection.method
        return self._write_frame(df, path)

    def export_command(self, stream: CommandStream, path: Path, f_h: Optional[ForceTrace] = None) -> Path:
        """表头 t,force,x,y[,f_h],trial; t 为采样序号, trial 为流内试次序号 (1 起始)"""
        df = pd.DataFrame({
            "t": np.arange(len(stream)),
            "force": stream.force.values,
            "x": stream.position.x,
            "y": stream.position.y,
        })
        if f_h is not None:
            df["f_h"] = f_h.values
        df["trial"] = np.concatenate(
            [np.full(stop - start, i) for i, (start, stop) in enumerate(stream.segments, 1)]
        )
        return self._write_frame(df, path)

    def export_records(self, records: Iterable[Dict], path: Path) -> Path:
        """写出指标记录; None 写为空单元格"""
        return self._write_frame(pd.DataFrame(list(records)), path)

    # === 仿真 ===

    def export_sim_result(self, stream: CommandStream, result: SimResult, path: Path) -> Path:
        df = pd.DataFrame({
            "t": np.arange(len(stream)),
            "command": stream.force.values,
            "f_r": result.F_r.values,
            "cmd_x": stream.position.x,
            "cmd_y": stream.position.y,
            "x": result.executed.x,
            "y": result.executed.y,
        })
        return self._write_frame(df, path)

    # === 绘图导出 ===

    def export_plot_long(self, series: Sequence[Tuple[str, np.ndarray]], path: Path) -> Path:
        """长格式 series,t,value, 任意绘图工具可直接读取"""
        frames = []
        for name, values in series:
            values = np.asarray(values, dtype=float)
            frames.append(pd.DataFrame({
                "series": name,
                "t": np.arange(values.shape[0]),
                "value": values,
            }))
        df = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=["series", "t", "value"])
        return self._write_frame(df, path)
