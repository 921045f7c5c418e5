"""Command-line driver for the full pipeline.

Subcommands: synth, render, fuse, entropy, eval, sweep, bench.  Exit codes:
0 success, 1 validation/config error, 2 I/O error.  Every config key is
available as a flag; a key=value config file can set defaults which flags
then override.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from . import bench as bench_mod
from . import kernels, pipeline
from .config import PipelineConfig, apply_overrides, config_hash, load_config_file
from .errors import ConfigError, ParsegaitError
from .synth import CONDITIONS, generate_dataset


class _Parser(argparse.ArgumentParser):
    # Usage mistakes are validation errors: exit 1, not argparse's default 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="key=value config file")
    for f in fields(PipelineConfig):
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f"cfg_{f.name}", metavar="V", default=None)


def _build_config(args) -> PipelineConfig:
    cfg = PipelineConfig()
    if getattr(args, "config", None):
        cfg = load_config_file(args.config, cfg)
    overrides = []
    for f in fields(PipelineConfig):
        value = getattr(args, f"cfg_{f.name}", None)
        if value is not None:
            overrides.append(f"{f.name}={value}")
    return apply_overrides(cfg, overrides)


def _cmd_synth(args) -> int:
    cfg = _build_config(args)
    conditions = tuple(c for c in args.conditions.split(",") if c)
    unknown = [c for c in conditions if c not in CONDITIONS]
    if unknown:
        raise ConfigError(
            f"unknown conditions {', '.join(unknown)}; valid: {', '.join(CONDITIONS)}"
        )
    manifest = generate_dataset(
        args.root,
        seed=cfg.seed,
        identities=args.identities,
        clips_per_condition=args.clips,
        conditions=conditions,
        frames=args.frames,
    )
    total = sum(rec.frames for rec in manifest)
    print(f"wrote {len(manifest)} sequences ({total} frames) under {args.root}")
    return 0


def _cmd_render(args) -> int:
    cfg = _build_config(args)
    stats = pipeline.render_dataset(args.root, cfg, workers=args.workers, force=args.force)
    print(
        f"rendered {stats.frames} frames across {stats.sequences} sequences "
        f"({stats.empty_frames} with no valid joints)"
    )
    if args.bench:
        print(f"render stage: {stats.ms_per_frame:.3f} ms/frame")
    return 0


def _cmd_fuse(args) -> int:
    cfg = _build_config(args)
    stats = pipeline.fuse_dataset(args.root, cfg, workers=args.workers, force=args.force)
    print(
        f"fused {stats.frames} frames across {stats.sequences} sequences "
        f"(strategy {cfg.strategy}, config {config_hash(cfg)})"
    )
    if args.bench:
        print(f"fuse stage: {stats.ms_per_frame:.3f} ms/frame")
    return 0


def _cmd_entropy(args) -> int:
    cfg = _build_config(args)
    strategies = tuple(s for s in args.strategies.split(",") if s) if args.strategies else None
    report = pipeline.entropy_report(args.root, cfg, strategies=strategies, force=args.force)
    for name, row in report["rows"].items():
        print(f"{name}: {row['entropy_bits']:.6f} bits")
    for strategy, delta in report["delta_vs_sil"].items():
        print(f"delta {strategy} - sil: {delta:+.6f} bits")
    print(f"reports written under {args.root}/out")
    return 0


def _cmd_eval(args) -> int:
    cfg = _build_config(args)
    report = pipeline.eval_report(args.root, cfg, force=args.force)
    for group in report["groups"]:
        fused, sil = group["fused"], group["sil"]
        print(
            f"{group['scope']}: fused rank1 {fused['rank1']:.4f} "
            f"(sil {sil['rank1']:.4f}, gap {group['gap_rank1']:+.4f}), "
            f"fused mAP {fused['mAP']:.4f}, mINP {fused['mINP']:.4f}"
        )
    print(f"reports written under {args.root}/out")
    return 0


def _parse_pairs(text: str):
    pairs = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        radius, sep, width = token.partition("x")
        if not sep:
            raise ParsegaitError(f"expected RADIUSxWIDTH, got {token!r}")
        pairs.append((float(radius), float(width)))
    if not pairs:
        raise ParsegaitError("no sweep pairs given")
    return tuple(pairs)


def _cmd_sweep(args) -> int:
    cfg = _build_config(args)
    pairs = _parse_pairs(args.pairs) if args.pairs else pipeline.SWEEP_PAIRS
    rows = pipeline.sweep_dataset(args.root, cfg, pairs=pairs, force=args.force)
    for row in rows:
        marker = " (default)" if row["default"] else ""
        print(
            f"radius {row['radius']:.1f} width {row['line_width']:.1f}: "
            f"fused rank1 {row['rank1_fused']:.4f}, sil rank1 {row['rank1_sil']:.4f}{marker}"
        )
    print(f"report written under {args.root}/out")
    return 0


def _cmd_bench(args) -> int:
    cfg = _build_config(args)
    if args.backend == "all":
        results = bench_mod.compare_backends(cfg, frames=args.frames, repeats=args.repeats)
    else:
        results = [
            bench_mod.measure_throughput(
                cfg, frames=args.frames, backend=args.backend, repeats=args.repeats
            )
        ]
    for result in results:
        print(
            f"{result.backend}: {result.ms_per_frame:.3f} ms/frame "
            f"({result.frames_per_second:.0f} frames/s over {result.frames} frames)"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="parsegait", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[], help="generate a synthetic benchmark dataset")
    p.add_argument("root", help="dataset directory to create")
    p.add_argument("--identities", type=int, default=10)
    p.add_argument("--clips", type=int, default=4, help="clips per identity per condition")
    p.add_argument("--conditions", default="nm,bg")
    p.add_argument("--frames", type=int, default=30)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_synth)

    for name, func, help_text in (
        ("render", _cmd_render, "render parsing rasters for every sequence"),
        ("fuse", _cmd_fuse, "fuse rendered rasters with silhouettes"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("root", help="dataset directory")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--force", action="store_true", help="overwrite mismatched outputs")
        p.add_argument("--bench", action="store_true", help="report ms/frame")
        _add_config_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("entropy", help="write per-representation entropy reports")
    p.add_argument("root")
    p.add_argument("--strategies", default=None, help="comma-separated, default: config strategy")
    p.add_argument("--force", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_entropy)

    p = sub.add_parser("eval", help="write retrieval reports (silhouette vs fused)")
    p.add_argument("root")
    p.add_argument("--force", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="radius/line-width sweep over the dataset")
    p.add_argument("root")
    p.add_argument("--pairs", default=None, help='comma-separated RADIUSxWIDTH, e.g. "3x3,10x12"')
    p.add_argument("--force", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("bench", help="kernel backend throughput comparison")
    p.add_argument("--frames", type=int, default=300)
    p.add_argument(
        "--backend", default="all", choices=["all"] + kernels.available_backends()
    )
    p.add_argument("--repeats", type=int, default=2)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParsegaitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ImportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
