import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, NoReturn

from rotrack import __version__
from rotrack.benchmark.compare import compare
from rotrack.benchmark.evaluation import run_ope, run_tre
from rotrack.benchmark.metrics import EvalResult
from rotrack.benchmark.sequence import load_sequence
from rotrack.benchmark.synth import PARAMS_BY_PRESET, preset_params, synth_sequence
from rotrack.config import FLAGS_BY_VARIANT, TrackerConfig
from rotrack.exceptions import ConfigError, RotrackError
from rotrack.utils import dumps_json, write_atomic

logger = logging.getLogger(__name__)

RESULT_FILE = "result.json"
CURVES_FILE = "curves.csv"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors with exit code 1, leaving 2 for data errors."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="rotrack", description="Rotation-adaptive single object tracking benchmark.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log tracker decisions")
    subparsers = parser.add_subparsers(dest="verb", required=True, metavar="{track,eval,synth,compare}")

    track = subparsers.add_parser("track", help="track a sequence once and write the result")
    _add_tracking_arguments(track)
    track.add_argument("--out", required=True, type=Path, help="result JSON file")

    evaluate = subparsers.add_parser("eval", help="evaluate a sequence and write result and curves")
    _add_tracking_arguments(evaluate)
    evaluate.add_argument("--mode", choices=["ope", "tre"], default="ope")
    evaluate.add_argument("--segments", type=int, default=3, help="TRE start frames")
    evaluate.add_argument("--out", required=True, type=Path, help="output directory")

    synth = subparsers.add_parser("synth", help="render a synthetic sequence")
    synth.add_argument("--preset", required=True, choices=list(PARAMS_BY_PRESET))
    synth.add_argument("--frames", type=int)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True, type=Path, help="sequence directory")
    synth.add_argument("--omega", type=float, help="rotation per frame in degrees")
    synth.add_argument("--velocity", type=_velocity, help="displacement per frame as VX,VY")
    synth.add_argument("--scale-rate", type=float, help="relative size change per frame")
    synth.add_argument("--noise", type=float, help="pixel noise standard deviation")
    synth.add_argument("--jitter", type=float, help="sprite center jitter standard deviation")

    comparison = subparsers.add_parser("compare", help="compare baseline and variant results")
    comparison.add_argument("--baseline", required=True, nargs="+", type=Path, help="baseline result directories")
    comparison.add_argument("--variant", required=True, nargs="+", type=Path, help="variant result directories")
    comparison.add_argument("--baseline-name", default="baseline")
    comparison.add_argument("--variant-name", default="variant")
    comparison.add_argument("--out", required=True, type=Path, help="report JSON file")
    return parser


def _add_tracking_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seq", required=True, type=Path, help="sequence directory")
    parser.add_argument("--config", type=Path, help="tracker config JSON, or a result.json to rerun")
    parser.add_argument("--variant", choices=list(FLAGS_BY_VARIANT), help="ablation variant overriding the flags")
    parser.add_argument("--zeta", type=float, help="per-frame rotation of the updating tracker")
    parser.add_argument("--no-progress", action="store_true", help="hide progress bars")


def _velocity(text: str) -> tuple[float, float]:
    try:
        vx, vy = (float(value) for value in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected VX,VY. Got: {text!r}") from None
    return (vx, vy)


def load_config(path: Path | None, *, variant: str | None = None, zeta: float | None = None) -> TrackerConfig:
    """Effective tracker config: defaults, then the config file, then command-line overrides.

    A result document is accepted in place of a config file; its echoed ``config`` is used.
    """
    document: dict[str, Any] = {}
    if path is not None:
        with open(path, encoding="utf-8") as f:
            try:
                document = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
        if isinstance(document, dict) and isinstance(document.get("config"), dict):
            document = document["config"]
    if zeta is not None:
        document = {**document, "zeta": zeta}
    config = TrackerConfig.from_dict(document)
    return config.with_variant(variant) if variant is not None else config


def _track(args: argparse.Namespace) -> tuple[dict[str, Any], EvalResult]:
    config = load_config(args.config, variant=args.variant, zeta=args.zeta)
    sequence = load_sequence(args.seq)
    enable_progress_bar = not args.no_progress
    if getattr(args, "mode", "ope") == "tre":
        result = run_tre(sequence, config, args.segments, enable_progress_bar=enable_progress_bar)
    else:
        result = run_ope(sequence, config, enable_progress_bar=enable_progress_bar)
    return {"config": config.to_dict(), **result.to_dict()}, result


def run_track(args: argparse.Namespace) -> None:
    document, _ = _track(args)
    write_atomic(args.out, dumps_json(document))


def run_eval(args: argparse.Namespace) -> None:
    document, result = _track(args)
    write_atomic(args.out / RESULT_FILE, dumps_json(document))
    write_atomic(args.out / CURVES_FILE, result.curves_csv())
    print(f"{result.sequence_name}: AUC {result.auc:.4f}, precision@20 {result.precision_at_20:.4f}")


def run_synth(args: argparse.Namespace) -> None:
    overrides = {
        "frames": args.frames,
        "omega": args.omega,
        "velocity": args.velocity,
        "scale_rate": args.scale_rate,
        "noise": args.noise,
        "jitter": args.jitter,
    }
    params = preset_params(args.preset, **{name: value for name, value in overrides.items() if value is not None})
    sequence = synth_sequence(args.preset, params, args.seed, args.out)
    print(f"{sequence.name}: {len(sequence)} frames in {args.out}")


def run_compare(args: argparse.Namespace) -> None:
    baseline = [_read_result(directory) for directory in args.baseline]
    variant = [_read_result(directory) for directory in args.variant]
    report = compare(baseline, variant, baseline_name=args.baseline_name, variant_name=args.variant_name)
    write_atomic(args.out, dumps_json(report.to_dict()))
    print(report.to_table(), end="")


def _read_result(directory: Path) -> EvalResult:
    path = directory / RESULT_FILE if directory.is_dir() else directory
    with open(path, encoding="utf-8") as f:
        try:
            return EvalResult.from_dict(json.load(f))
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e


COMMAND_BY_VERB = {
    "track": run_track,
    "eval": run_eval,
    "synth": run_synth,
    "compare": run_compare,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Runs the command line and returns its exit code: 0 on success, 1 on usage errors, 2 on data errors."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        COMMAND_BY_VERB[args.verb](args)
    except (RotrackError, ValueError, OSError) as e:
        logger.debug("Command %s failed", args.verb, exc_info=True)
        print(f"rotrack: error: {e}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
