"""
Main processing module - 核心处理逻辑

  synth:    合成数据集 → 试次文件
  extract:  预处理 → 拼接 → VAF 阶数选择 → 通道间归一化
  command:  力协同选择 → F̂ = α·c → 按弱/强条件切分
  simulate: 指令流 → 仿真执行器 → F_r、执行轨迹和指标
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .config import PipelineConfig
from .csv_exporter import CSVExporter
from .data_loader import DataLoader, TrialSegment
from .errors import StructuralError
from .logger import ProcessLogger
from .nmf import OrderSelection, SynergySet, select_order
from .preprocess import concatenate_trials, preprocess_trial_set
from .signal_model import Condition, ForceTrace, PositionTrace, describe_channels
from .simulator import SimResult, compare_traces, run as run_simulation
from .synergy import (
    CommandStream,
    ForceSynergySelection,
    build_command_stream,
    force_command,
    normalize_interchannel,
    position_command,
    select_force_synergy,
    split_by_condition,
)
from .synthgen import SynthDataset, SynthSpec, generate

SYNERGY_FILE = "synergies.txt"
FORCE_FILE = "force.csv"
POSITION_FILE = "position.csv"
SEGMENTS_FILE = "segments.csv"
COMMAND_PREFIX = "command_"


@dataclass(frozen=True, eq=False)
class ExtractResult:
    selection: OrderSelection
    synergies: SynergySet               # 归一化后的协同
    force: ForceTrace
    position: PositionTrace
    lengths: List[int]
    conditions: List[Condition]


@dataclass(frozen=True, eq=False)
class CommandResult:
    selection: ForceSynergySelection
    streams: Dict[Condition, CommandStream]


def command_path(outdir: Path, condition: Condition) -> Path:
    return outdir / f"{COMMAND_PREFIX}{condition.value}.csv"


def condition_from_path(path: Path) -> Condition:
    """command_weak.csv → WEAK; 无法识别的文件名视为未标注"""
    stem = path.stem
    if stem.startswith(COMMAND_PREFIX):
        try:
            return Condition(stem[len(COMMAND_PREFIX):])
        except ValueError:
            pass
    return Condition.UNLABELED


class PipelineProcessor:
    """主处理器 - 协调各模块完成提取、指令合成和仿真"""

    def __init__(self, config: PipelineConfig, logger: Optional[ProcessLogger] = None):
        self.config = config
        self.logger = logger or ProcessLogger()
        self.exporter = CSVExporter(self.logger)

    def initialize(self) -> bool:
        """验证配置"""
        self.logger.section("Synkin - 肌肉协同运动动力学指令")

        errors = self.config.validate()
        if errors:
            self.logger.error("配置错误:")
            for err in errors:
                self.logger.info(f"- {err}", indent=1)
            return False

        for key, value in self.config.as_mapping().items():
            self.logger.verbose_info(f"{key} = {value}", indent=1)
        return True

    # === synth ===

    def synthesize(self, spec: SynthSpec, outdir: Path, force_format: str = "pressure") -> SynthDataset:
        """生成合成数据集并写出试次文件"""
        self.logger.info(f"\n🧪 生成合成数据: {spec.trials} 个试次, d = {spec.d}, n = {spec.n}")
        dataset = generate(spec)
        written = self.exporter.export_dataset(dataset, outdir, force_format)
        self.logger.success(f"写出 {len(written)} 个文件 → {outdir}", indent=1)
        return dataset

    # === extract ===

    def extract(self, indir: Path, outdir: Path) -> ExtractResult:
        """读取试次 → 预处理 → 拼接 → 阶数选择 → 归一化, 写出协同文件和对齐后的力/位置"""
        if not indir.is_dir():
            raise FileNotFoundError(f"输入目录不存在: {indir}")
        if not (indir / "trials.csv").exists():
            raise StructuralError(f"输入目录中没有 trials.csv: {indir}")

        self.logger.info(f"\n📂 加载试次: {indir}")
        raw = DataLoader.load_raw_trials(indir)
        self.logger.log_trials_loaded(len(raw), raw[0].emg.d, [r.emg.k for r in raw])

        self.logger.info("\n🧹 预处理...")
        trial_set = preprocess_trial_set(raw, self.config.preprocess)
        emg, force, position = concatenate_trials(trial_set)
        self.logger.log_concatenated(emg.d, emg.k)

        self.logger.info("\n🧮 提取肌肉协同...")
        selection = select_order(
            emg,
            self.config.vaf_threshold,
            self.config.nmf,
            on_order=lambda n, v: self.logger.log_order_vaf(n, v, self.config.vaf_threshold),
            on_restart=self.logger.log_restart,
        )
        self.logger.log_order_selected(
            selection.n, selection.synergies.vaf, selection.reached, selection.threshold
        )
        synergies = normalize_interchannel(selection.synergies)
        self.logger.log_zero_columns(synergies.zero_columns)

        lengths = trial_set.lengths
        conditions = trial_set.condition_labels
        self.exporter.export_synergies(synergies, outdir / SYNERGY_FILE)
        self.exporter.export_weights(synergies, describe_channels(synergies.d), outdir / "synergy_weights.csv")
        self.exporter.export_vaf_table(selection, outdir / "vaf_by_order.csv")
        self.exporter.export_force(force, outdir / FORCE_FILE)
        self.exporter.export_position(position, outdir / POSITION_FILE)
        self.exporter.export_segments(lengths, conditions, outdir / SEGMENTS_FILE)

        series = [(f"w{i + 1}", synergies.W[:, i]) for i in range(synergies.n)]
        series += [(f"c{i + 1}", synergies.C[i]) for i in range(synergies.n)]
        series += [("F_h", force.values), ("x", position.x), ("y", position.y)]
        self.exporter.export_plot_long(series, outdir / "plot_extract.csv")

        self.logger.success(f"协同文件 → {outdir / SYNERGY_FILE}")
        return ExtractResult(selection, synergies, force, position, lengths, conditions)

    # === command ===

    def command(
        self,
        synergy_file: Path,
        force_file: Path,
        position_file: Path,
        outdir: Path,
        segments_file: Optional[Path] = None,
    ) -> CommandResult:
        """选择力协同并合成各条件的运动动力学指令"""
        self.logger.info(f"\n📥 加载协同: {synergy_file}")
        synergies = DataLoader.load_synergies(synergy_file)
        f_h = DataLoader.load_force(force_file)
        position = DataLoader.load_position(position_file)
        if not synergies.k == f_h.k == position.k:
            raise StructuralError(
                f"长度不一致: 激活曲线 {synergies.k}, 力 {f_h.k}, 位置 {position.k}"
            )

        segments: List[TrialSegment] = (
            DataLoader.load_segments(segments_file) if segments_file is not None else []
        )
        if segments:
            lengths = [s.length for s in segments]
            conditions = [s.condition for s in segments]
        else:
            lengths, conditions = [f_h.k], [Condition.UNLABELED]

        self.logger.info("\n🎯 选择力相关协同...")
        selection = select_force_synergy(f_h, synergies, self.config.selection_method)
        self.logger.log_selection(selection.index, selection.all_scores, selection.method)

        alpha = self.config.alpha
        f_hat = force_command(selection, synergies, alpha)
        p_cmd = position_command(position)
        streams = split_by_condition(f_hat, p_cmd, alpha, lengths, conditions)
        human = split_by_condition(f_h, p_cmd, alpha, lengths, conditions)

        self.exporter.export_selection(selection, outdir / "selection.csv")
        summary = []
        for condition, stream in streams.items():
            f_h_part = human[condition].force
            self.exporter.export_command(stream, command_path(outdir, condition), f_h_part)
            self.logger.log_command(condition.value, len(stream), float(stream.force.values.max()))
            comparison = compare_traces(f_h_part, stream.force)
            summary.append({
                "condition": condition.value,
                "samples": len(stream),
                "alpha": alpha,
                "peak_force": float(stream.force.values.max()),
                "mean_force": float(stream.force.values.mean()),
                "fh_rmse": comparison.rmse,
                "fh_gain_ratio": comparison.gain_ratio,
                "fh_peak_ratio": comparison.peak_ratio,
            })
        self.exporter.export_records(summary, outdir / "summary.csv")
        if Condition.WEAK in streams and Condition.STRONG in streams:
            ratio = peak_ratio(streams[Condition.STRONG], streams[Condition.WEAK])
            self.logger.info(f"📈 peak(F̂_strong) / peak(F̂_weak) = {ratio:.3g}", indent=1)

        self.logger.success(f"指令文件 → {outdir}")
        return CommandResult(selection, streams)

    # === simulate ===

    def simulate(self, command_files: Sequence[Path], outdir: Path) -> Dict[Condition, SimResult]:
        """逐条件运行仿真执行器"""
        if not command_files:
            raise StructuralError("没有指令文件")

        self.logger.info("\n🤖 仿真末端执行器...")
        results: Dict[Condition, SimResult] = {}
        records = []
        series = []
        for path in command_files:
            condition = condition_from_path(path)
            force, position, f_h, lengths = DataLoader.load_command(path)
            stream = build_command_stream(force, position, self.config.alpha, condition, lengths)
            result = run_simulation(stream, self.config.actuator, self.config.seed)
            results[condition] = result

            record = {"condition": condition.value, "samples": len(stream)}
            record.update(result.metrics)
            if f_h is not None:
                comparison = compare_traces(f_h, result.F_r)
                record["fr_vs_fh_rmse"] = comparison.rmse
                record["fr_vs_fh_gain_ratio"] = comparison.gain_ratio
                record["fr_vs_fh_peak_ratio"] = comparison.peak_ratio
            records.append(record)
            self.logger.log_sim_metrics(condition.value, result.metrics)

            self.exporter.export_sim_result(stream, result, outdir / f"sim_{condition.value}.csv")
            tag = condition.value
            series += [(f"F_hat_{tag}", force.values), (f"F_r_{tag}", result.F_r.values)]
            if f_h is not None:
                series.append((f"F_h_{tag}", f_h.values))
            series += [
                (f"cmd_x_{tag}", position.x), (f"cmd_y_{tag}", position.y),
                (f"x_{tag}", result.executed.x), (f"y_{tag}", result.executed.y),
            ]

        self.exporter.export_records(records, outdir / "metrics.csv")
        self.exporter.export_plot_long(series, outdir / "plot_simulate.csv")
        self._report_ordering(results)
        return results

    def _report_ordering(self, results: Dict[Condition, SimResult]):
        weak = results.get(Condition.WEAK)
        strong = results.get(Condition.STRONG)
        if weak is None or strong is None:
            return
        if strong.metrics["mean_force"] > weak.metrics["mean_force"]:
            self.logger.success("mean(F_r_strong) > mean(F_r_weak)", indent=1)
        else:
            self.logger.warning("强按压条件的平均输出力没有超过弱按压条件", indent=1)

    # === run ===

    def run(self, indir: Path, outdir: Path) -> Dict[Condition, SimResult]:
        """extract → command → simulate"""
        extract_dir = outdir / "extract"
        command_dir = outdir / "command"
        self.extract(indir, extract_dir)
        result = self.command(
            extract_dir / SYNERGY_FILE,
            extract_dir / FORCE_FILE,
            extract_dir / POSITION_FILE,
            command_dir,
            extract_dir / SEGMENTS_FILE,
        )
        files = [command_path(command_dir, c) for c in result.streams]
        return self.simulate(files, outdir / "simulate")


def find_command_files(indir: Path) -> List[Path]:
    """目录中的 command_<condition>.csv, 按文件名排序"""
    if not indir.is_dir():
        raise FileNotFoundError(f"指令目录不存在: {indir}")
    files = sorted(indir.glob(f"{COMMAND_PREFIX}*.csv"))
    if not files:
        raise StructuralError(f"目录中没有指令文件: {indir}")
    return files


def peak_ratio(strong: CommandStream, weak: CommandStream) -> float:
    """peak(F̂_strong) / peak(F̂_weak)"""
    weak_peak = float(np.max(weak.force.values))
    if weak_peak <= 0:
        raise StructuralError("弱按压指令峰值为零")
    return float(np.max(strong.force.values)) / weak_peak
