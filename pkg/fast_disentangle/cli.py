"""Console entry point for the disentangling benchmarks.

Subcommands:
  table1         fast vs minimal-entropy vs random unitaries, per trial
  trunc-curve    truncation error at every bond dimension
  wave           layered disentangling of random qubit states
  run            one tensor, one disentangler, both spectra

--seed, --workers, --format and --log-level fall back to env:
FASTDIS_SEED, FASTDIS_WORKERS, FASTDIS_FORMAT, FASTDIS_LOG_LEVEL.

Exit codes: 0 success, 2 invalid configuration or unwritable output,
1 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable
from pathlib import Path

from numpy.linalg import LinAlgError
from pydantic import BaseModel, ValidationError

from fast_disentangle import bench
from fast_disentangle.context import Settings, get_settings
from fast_disentangle.errors import DisentangleError
from fast_disentangle.generators import SpectrumKind
from fast_disentangle.serialization import render, write_text
from fast_disentangle.wavefunction import Method

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


# ---- small I/O seams (monkeypatched in tests) ----------------------------


def _emit(text: str) -> None:
    sys.stdout.write(text)


def _fail(message: str) -> None:
    print(f"x {message}", file=sys.stderr)


# ---- config --------------------------------------------------------------


def build_config(args: argparse.Namespace) -> bench.CliConfig:
    """Merge flags over FASTDIS_* settings over defaults and validate."""
    settings = get_settings()
    values = {
        "command": args.command,
        "seed": args.seed if args.seed is not None else settings.seed,
        "workers": args.workers if args.workers is not None else settings.workers,
        "fmt": args.format or settings.output_format,
        "out": args.out,
        "bits": args.bits,
        "timing": args.timing,
    }
    # only the flags this subcommand defines
    for name in bench.CliConfig.model_fields:
        if name not in values and hasattr(args, name):
            values[name] = getattr(args, name)
    return bench.CliConfig.model_validate(values)


def _execute(
    args: argparse.Namespace,
    protocol: Callable[[bench.CliConfig], BaseModel],
    rows: Callable[[BaseModel], list],
    summary: Callable[[BaseModel], str],
) -> int:
    try:
        cfg = build_config(args)
    except (ValidationError, DisentangleError) as exc:
        _fail(f"Configuration error: {exc}")
        return EXIT_CONFIG
    try:
        report = protocol(cfg)
    except (DisentangleError, LinAlgError) as exc:
        _fail(f"Numerical failure: {exc}")
        return EXIT_NUMERICAL
    text = render(report, [r.model_dump() for r in rows(report)], cfg.fmt)
    if cfg.out is None:
        _emit(text)
        return EXIT_OK
    try:
        written = write_text(cfg.out, text)
    except OSError as exc:
        _fail(f"Cannot write {cfg.out}: {exc}")
        return EXIT_CONFIG
    logging.getLogger(__name__).info("wrote %s", written)
    _emit(summary(report) + f"\nWrote {written}\n")
    return EXIT_OK


def _stat_line(label: str, stat: bench.Stat | None, scale: float = 1.0, unit: str = "") -> str:
    if stat is None:
        return f"  {label:<14} (undefined)"
    return (
        f"  {label:<14} mean {stat.mean * scale:.4g}{unit}"
        f"  [q16 {stat.q16 * scale:.4g}, q84 {stat.q84 * scale:.4g}]"
    )


# ---- table1 --------------------------------------------------------------


def _table1_summary(report: bench.Table1Report) -> str:
    s = report.summary
    lines = [f"{report.kind.value} {report.dims}, {report.trials} trials ({report.unit})"]
    lines.append(_stat_line("S_fast/S_min-1", s["fast_excess"], 100, "%"))
    lines.append(_stat_line("S_rand/S_min-1", s["rand_excess"], 100, "%"))
    lines.append(_stat_line("eps_fast", s["eps_fast"], 100, "%"))
    lines.append(_stat_line("eps_min", s["eps_min"], 100, "%"))
    if "speedup" in s:
        lines.append(_stat_line("speedup", s["speedup"]))
    return "\n".join(lines)


def cmd_table1(args: argparse.Namespace) -> int:
    return _execute(args, bench.run_table1, lambda r: r.rows, _table1_summary)


# ---- trunc-curve ---------------------------------------------------------


def _trunc_summary(report: bench.TruncCurveReport) -> str:
    lines = [f"{report.kind.value} {report.dims}, {report.trials} trials; median eps_chi"]
    lines.append(f"  {'chi':>4} {'fast':>11} {'min-S':>11} {'identity':>11}")
    for entry in report.summary:
        lines.append(
            f"  {entry.chi:>4} {entry.fast.median:>11.3e} {entry.min.median:>11.3e} "
            f"{entry.identity.median:>11.3e}"
        )
    return "\n".join(lines)


def cmd_trunc_curve(args: argparse.Namespace) -> int:
    return _execute(args, bench.run_trunc_curve, lambda r: r.rows, _trunc_summary)


# ---- wave ----------------------------------------------------------------


def _wave_summary(report: bench.WaveReport) -> str:
    s = report.summary
    lines = [
        f"{report.qubits} qubits, {report.layers} {report.method.value} layers, "
        f"{report.trials} states ({report.unit})"
    ]
    lines.append(_stat_line("initial", s["initial_residual"]))
    lines.append(_stat_line("final", s["final_residual"]))
    return "\n".join(lines)


def cmd_wave(args: argparse.Namespace) -> int:
    return _execute(args, bench.run_wave, lambda r: r.rows, _wave_summary)


# ---- run -----------------------------------------------------------------


def _single_summary(report: bench.SingleReport) -> str:
    return "\n".join(
        [
            f"{report.kind.value} {report.dims} via {report.regime} regime",
            f"  entropy        {report.entropy_before:.6g} -> {report.entropy_after:.6g} {report.unit}",
            f"  zero values    {report.zeros_before} -> {report.zeros_after} "
            f"(guaranteed >= {report.zero_lower_bound})",
            f"  unitarity err  {report.unitarity_error:.2e}",
        ]
    )


def cmd_run(args: argparse.Namespace) -> int:
    return _execute(args, bench.run_single, lambda r: r.spectrum_rows(), _single_summary)


# ---- parser / main -------------------------------------------------------


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="root seed (env FASTDIS_SEED, default 0)")
    p.add_argument("--workers", type=int, default=None, help="worker processes for trials")
    p.add_argument("--format", choices=["csv", "json"], default=None)
    p.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    p.add_argument("--bits", action="store_true", help="report entropies in bits")
    p.add_argument("--timing", action="store_true", help="record wall-clock columns")
    p.add_argument("--log-level", default=None)


def _add_tensor_flags(p: argparse.ArgumentParser, *, chi: int, trials: int) -> None:
    for name in ("chi1", "chi2", "chi3", "chi4"):
        p.add_argument(f"--{name}", type=int, default=chi)
    p.add_argument(
        "--kind", choices=[k.value for k in SpectrumKind], default=SpectrumKind.GAUSSIAN.value
    )
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--restarts", type=int, default=8, help="descent restarts for S_min")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fast-disentangle", description="Fast tensor disentangling benchmarks"
    )
    sub = parser.add_subparsers(dest="command")

    p_table1 = sub.add_parser("table1", help="compare fast, minimal and random unitaries")
    _add_tensor_flags(p_table1, chi=2, trials=100)
    p_table1.add_argument("--speedup", action="store_true", help="time descent to reach S_fast")
    p_table1.add_argument("--rank1", action="store_true", help="rank-1 middle factor (ansatz)")
    _add_output_flags(p_table1)
    p_table1.set_defaults(func=cmd_table1)

    p_trunc = sub.add_parser("trunc-curve", help="truncation error versus bond dimension")
    _add_tensor_flags(p_trunc, chi=4, trials=100)
    _add_output_flags(p_trunc)
    p_trunc.set_defaults(func=cmd_trunc_curve)

    p_wave = sub.add_parser("wave", help="disentangle random qubit states layer by layer")
    p_wave.add_argument("--qubits", type=int, default=10)
    p_wave.add_argument("--layers", type=int, default=500)
    p_wave.add_argument("--method", choices=[m.value for m in Method], default=Method.FAST.value)
    p_wave.add_argument("--trials", type=int, default=3)
    _add_output_flags(p_wave)
    p_wave.set_defaults(func=cmd_wave)

    p_run = sub.add_parser("run", help="disentangle one tensor and dump its spectra")
    _add_tensor_flags(p_run, chi=2, trials=1)
    p_run.add_argument("--rank1", action="store_true", help="rank-1 middle factor (ansatz)")
    _add_output_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    return parser


def _log_level(flag: str | None) -> str:
    """--log-level over FASTDIS_LOG_LEVEL over WARNING, validated by Settings."""
    if flag is not None:
        return Settings(log_level=flag).log_level
    return get_settings().log_level


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_help(sys.stderr)
        return EXIT_CONFIG
    try:
        level = _log_level(args.log_level)
    except ValidationError as exc:
        _fail(f"Configuration error: {exc}")
        return EXIT_CONFIG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    return args.func(args) or EXIT_OK
