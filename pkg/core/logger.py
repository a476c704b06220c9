"""
Logger - 日志输出模块

提供统一的日志输出接口，支持详细模式和安静模式
"""

from pathlib import Path
from typing import Dict, Optional, Sequence


class ProcessLogger:
    """处理过程日志记录器"""

    def __init__(self, verbose: bool = True, quiet: bool = False):
        """
        初始化日志记录器

        Args:
            verbose: 是否显示详细信息
            quiet: 是否安静模式（不输出任何信息）
        """
        self.verbose = verbose
        self.quiet = quiet

    def info(self, message: str, indent: int = 0):
        """输出普通信息"""
        if not self.quiet:
            prefix = "   " * indent
            print(f"{prefix}{message}")

    def verbose_info(self, message: str, indent: int = 0):
        """输出详细信息（仅在 verbose 模式下）"""
        if self.verbose and not self.quiet:
            prefix = "   " * indent
            print(f"{prefix}{message}")

    def warning(self, message: str, indent: int = 0):
        """输出警告信息"""
        if not self.quiet:
            prefix = "   " * indent
            print(f"{prefix}⚠️  {message}")

    def error(self, message: str, indent: int = 0):
        """输出错误信息"""
        if not self.quiet:
            prefix = "   " * indent
            print(f"{prefix}❌ {message}")

    def success(self, message: str, indent: int = 0):
        """输出成功信息"""
        if not self.quiet:
            prefix = "   " * indent
            print(f"{prefix}✅ {message}")

    def section(self, title: str):
        if not self.quiet:
            print("\n" + "=" * 60)
            print(title)
            print("=" * 60)

    # === 专门的处理日志方法 ===

    def log_trials_loaded(self, count: int, d: int, lengths: Sequence[int]):
        """记录试次加载"""
        self.success(f"加载 {count} 个试次, {d} 通道", indent=1)
        self.verbose_info(f"📏 原始长度: {list(lengths)}", indent=2)

    def log_concatenated(self, d: int, k: int):
        self.info(f"🔗 拼接后 M ∈ R^{d}×{k}", indent=1)

    def log_order_vaf(self, n: int, vaf: float, threshold: float):
        """记录每个阶数的 VAF"""
        mark = "✅" if vaf >= threshold else "  "
        self.verbose_info(f"{mark} n = {n}: VAF = {vaf:.4f}", indent=2)

    def log_order_selected(self, n: int, vaf: float, reached: bool, threshold: float):
        if reached:
            self.success(f"选定协同数 n = {n} (VAF = {vaf:.4f} ≥ {threshold})", indent=1)
        else:
            self.warning(f"没有阶数达到 VAF {threshold}, 使用 n = {n} (VAF = {vaf:.4f})", indent=1)

    def log_restart(self, index: int, objective: float, iterations: int):
        self.verbose_info(f"🎲 重启 {index}: 目标值 {objective:.6g} ({iterations} 次迭代)", indent=2)

    def log_zero_columns(self, columns: Sequence[int]):
        if columns:
            self.warning(f"协同列全为零, 未归一化: {[c + 1 for c in columns]}", indent=1)

    def log_selection(self, index: int, scores: Sequence[float], method: str):
        """记录力协同选择"""
        self.success(f"力相关协同: w{index} (方法: {method})", indent=1)
        for i, score in enumerate(scores, 1):
            self.verbose_info(f"📊 w{i}: {score:.6g}", indent=2)

    def log_command(self, condition: str, length: int, peak: float):
        self.info(f"🎯 {condition}: {length} 个采样, F̂ 峰值 {peak:.4g}", indent=1)

    def log_sim_metrics(self, condition: str, metrics: Dict[str, Optional[float]]):
        """记录仿真指标"""
        parts = []
        for key, value in metrics.items():
            parts.append(f"{key}={'—' if value is None else f'{value:.4g}'}")
        self.info(f"🤖 {condition}: " + ", ".join(parts), indent=1)

    def log_file_written(self, path: Path):
        self.verbose_info(f"💾 {path}", indent=2)
