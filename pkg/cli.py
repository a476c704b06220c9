#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Synkin CLI Tool - 命令行工具入口

sEMG 肌肉协同 → 力协同选择 → 运动动力学指令 → 仿真末端执行器

  python cli.py synth --seed 7 --trials 10 --outdir data/
  python cli.py extract --indir data/ --outdir out/extract
  python cli.py command --synergies out/extract/synergies.txt \\
      --force out/extract/force.csv --position out/extract/position.csv \\
      --segments out/extract/segments.csv --outdir out/command
  python cli.py simulate --indir out/command --outdir out/simulate
  python cli.py run --indir data/ --outdir out/
"""

import argparse
import math
import sys
import traceback
from pathlib import Path
from typing import List, Optional

# 添加当前目录到路径
sys.path.insert(0, str(Path(__file__).parent))

from core.config import SELECTION_METHODS, PipelineConfig
from core.errors import SynkinError
from core.logger import ProcessLogger
from core.processor import PipelineProcessor, find_command_files
from core.synthgen import SynthSpec


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    """用法错误以退出码 1 结束"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _snr(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise argparse.ArgumentTypeError(f"无效的 SNR: {text}")
    return value


def _add_common(ap: argparse.ArgumentParser):
    """日志与配置文件选项"""
    ap.add_argument('--config', type=Path, help='配置文件 (key = value); 默认读取 $SYNKIN_CONFIG')
    ap.add_argument('--seed', type=int, help='仿真随机种子')
    ap.add_argument('--quiet', action='store_true', help='安静模式')
    ap.add_argument('--verbose', action='store_true', help='显示每个阶数 / 重启的细节')


def _add_extract_options(ap: argparse.ArgumentParser):
    # 预处理
    ap.add_argument('--ma-window', type=int, help='滑动平均窗口 (采样点)')
    ap.add_argument('--kalman-q', type=float, help='卡尔曼过程噪声方差')
    ap.add_argument('--kalman-r', type=float, help='卡尔曼观测噪声方差')
    ap.add_argument('--kalman-rts', action='store_true', help='位置追加 RTS 反向平滑')
    ap.add_argument('--target-len', type=int, help='每个试次重采样后的长度')
    ap.add_argument('--total-len', type=int, help='拼接后总长度 (覆盖 --target-len)')
    ap.add_argument('--no-rectify', action='store_true', help='EMG 已整流, 跳过整流')

    # NMF
    ap.add_argument('--vaf-threshold', type=float, help='VAF 阈值 (默认 0.9)')
    ap.add_argument('--max-iters', type=int, help='每次拟合的最大迭代次数')
    ap.add_argument('--tol', type=float, help='目标函数相对下降阈值')
    ap.add_argument('--restarts', type=int, help='随机重启次数')
    ap.add_argument('--nmf-seed', type=int, help='NMF 初始化种子')
    ap.add_argument('--workers', type=int, help='并行重启线程数')


def _add_command_options(ap: argparse.ArgumentParser):
    ap.add_argument('--alpha', type=float, help='力指令增益 α (默认 20)')
    ap.add_argument('--selection-method', choices=SELECTION_METHODS, help='力协同选择分数')


def _add_actuator_options(ap: argparse.ArgumentParser):
    ap.add_argument('--tau', type=float, help='力跟踪时间常数 (秒)')
    ap.add_argument('--force-gain', type=float, help='力跟踪增益')
    ap.add_argument('--max-step', type=float, help='每步最大位移 (米)')
    ap.add_argument('--noise-sigma', type=float, help='力噪声标准差')
    ap.add_argument('--dt', type=float, help='仿真步长 (秒)')


def create_parser() -> argparse.ArgumentParser:
    """创建命令行参数解析器"""
    ap = _ArgumentParser(
        prog='synkin',
        description='sEMG 肌肉协同 → 运动动力学指令 → 仿真末端执行器',
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = ap.add_subparsers(dest='command', required=True, parser_class=_ArgumentParser)

    # synth
    p = sub.add_parser('synth', help='生成已知真值的合成数据集')
    p.add_argument('--outdir', required=True, type=Path, help='输出目录')
    p.add_argument('--trials', type=int, default=10, help='试次数 (前一半为弱按压)')
    p.add_argument('--d', type=int, default=16, help='EMG 通道数')
    p.add_argument('--n', type=int, default=3, help='真实协同数')
    p.add_argument('--trial-len', type=int, default=94, help='每个试次的采样数')
    p.add_argument('--snr-db', type=_snr, default=20.0, help='信噪比 dB (inf 表示无噪声)')
    p.add_argument('--force-synergy', type=int, default=1, help='力相关协同序号 (1 起始)')
    p.add_argument('--weak-scale', type=float, default=0.1, help='弱按压幅值')
    p.add_argument('--strong-scale', type=float, default=1.0, help='强按压幅值')
    p.add_argument('--force-format', choices=('pressure', 'force'), default='pressure',
                   help='力文件格式: 压力帧或力幅值')
    p.add_argument('--quiet', action='store_true', help='安静模式')
    p.add_argument('--verbose', action='store_true', help='显示写出的文件')
    p.add_argument('--seed', type=int, default=0, help='随机种子')

    # extract
    p = sub.add_parser('extract', help='预处理并提取肌肉协同')
    p.add_argument('--indir', required=True, type=Path, help='试次目录 (含 trials.csv)')
    p.add_argument('--outdir', required=True, type=Path, help='输出目录')
    _add_common(p)
    _add_extract_options(p)

    # command
    p = sub.add_parser('command', help='选择力协同并合成指令')
    p.add_argument('--synergies', required=True, type=Path, help='协同文件')
    p.add_argument('--force', required=True, type=Path, help='对齐后的 F_h (t,force)')
    p.add_argument('--position', required=True, type=Path, help='对齐后的轨迹 (t,x,y)')
    p.add_argument('--segments', type=Path, help='试次区间 (trial,condition,start,stop)')
    p.add_argument('--outdir', required=True, type=Path, help='输出目录')
    _add_common(p)
    _add_command_options(p)

    # simulate
    p = sub.add_parser('simulate', help='在仿真执行器上运行指令')
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument('--indir', type=Path, help='含 command_<condition>.csv 的目录')
    src.add_argument('--commands', type=Path, nargs='+', help='指令文件')
    p.add_argument('--outdir', required=True, type=Path, help='输出目录')
    _add_common(p)
    _add_actuator_options(p)

    # run
    p = sub.add_parser('run', help='extract → command → simulate')
    p.add_argument('--indir', required=True, type=Path, help='试次目录')
    p.add_argument('--outdir', required=True, type=Path, help='输出目录')
    _add_common(p)
    _add_extract_options(p)
    _add_command_options(p)
    _add_actuator_options(p)

    return ap


def _run(args, logger: ProcessLogger) -> int:
    if args.command == 'synth':
        spec = SynthSpec(
            d=args.d,
            n=args.n,
            trials=args.trials,
            trial_len=args.trial_len,
            noise_snr_db=args.snr_db,
            seed=args.seed,
            force_synergy_index=args.force_synergy,
            weak_strong_scale=(args.weak_scale, args.strong_scale),
        )
        processor = PipelineProcessor(PipelineConfig(seed=args.seed), logger)
        processor.synthesize(spec, args.outdir, args.force_format)
        return 0

    # 创建配置
    config = PipelineConfig.from_args(args)

    # 创建处理器
    processor = PipelineProcessor(config, logger)
    if not processor.initialize():
        return 1

    if args.command == 'extract':
        processor.extract(args.indir, args.outdir)
    elif args.command == 'command':
        processor.command(args.synergies, args.force, args.position, args.outdir, args.segments)
    elif args.command == 'simulate':
        files = args.commands or find_command_files(args.indir)
        processor.simulate(files, args.outdir)
    else:
        processor.run(args.indir, args.outdir)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """主函数, 返回退出码"""
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return 1

    logger = ProcessLogger(verbose=args.verbose, quiet=args.quiet)

    try:
        code = _run(args, logger)
        if code == 0:
            logger.section("✅ 全部完成!")
        return code

    except KeyboardInterrupt:
        print("\n\n⚠️  用户中断", file=sys.stderr)
        return 130
    except SynkinError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        name = getattr(e, "filename", None)
        print(f"❌ 文件错误{f' ({name})' if name else ''}: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        print(f"\n❌ 错误: {e}", file=sys.stderr)
        traceback.print_exc()
        return 1


if __name__ == '__main__':
    sys.exit(main())
