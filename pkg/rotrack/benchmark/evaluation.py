import logging
import time

from tqdm.auto import tqdm

from rotrack.benchmark.metrics import EvalResult, RuntimeStats, evaluate_predictions
from rotrack.benchmark.sequence import Sequence
from rotrack.config import TrackerConfig
from rotrack.exceptions import SequenceError
from rotrack.geometry.types import RotatedBBox
from rotrack.tracker import create_tracker

logger = logging.getLogger(__name__)

MIN_SEGMENT_FRAMES = 2


def run_ope(sequence: Sequence, config: TrackerConfig, *, enable_progress_bar: bool = False) -> EvalResult:
    """One-pass evaluation: initialize on the first frame and track to the end."""
    return _evaluate(sequence, config, [0], enable_progress_bar)


def run_tre(
    sequence: Sequence, config: TrackerConfig, segments: int, *, enable_progress_bar: bool = False
) -> EvalResult:
    """Temporal robustness evaluation: one run from each of ``segments`` evenly spaced start frames.

    Frames of every run are pooled before the curves are computed. ``segments=1`` is the
    one-pass evaluation.

    Raises:
        ValueError: If ``segments`` is less than 1.
        SequenceError: If some run would cover fewer than 2 frames.
    """
    return _evaluate(sequence, config, tre_start_frames(len(sequence), segments), enable_progress_bar)


def tre_start_frames(length: int, segments: int) -> list[int]:
    """0-based start frames of a temporal robustness evaluation.

    Example:
        >>> tre_start_frames(30, 3)
        [0, 10, 20]
    """
    if segments < 1:
        raise ValueError(f"segments must be at least 1. Got: {segments}")
    starts = [index * length // segments for index in range(segments)]
    if length - starts[-1] < MIN_SEGMENT_FRAMES:
        raise SequenceError(
            f"A {length}-frame sequence is too short for {segments} segments of at least {MIN_SEGMENT_FRAMES} frames"
        )
    return starts


def _evaluate(sequence: Sequence, config: TrackerConfig, starts: list[int], enable_progress_bar: bool) -> EvalResult:
    tracker = create_tracker(config)
    predictions: list[RotatedBBox] = []
    ground_truth: list[RotatedBBox] = []
    started = time.perf_counter()
    for start in starts:
        state = tracker.init(sequence.read_frame(start), sequence.ground_truth[start])
        predictions.append(sequence.ground_truth[start])
        frames = tqdm(
            range(start + 1, len(sequence)),
            desc=f"{sequence.name}@{start + 1}",
            disable=not enable_progress_bar,
            leave=False,
        )
        for index in frames:
            box, state = tracker.track_frame(state, sequence.read_frame(index))
            predictions.append(box)
        ground_truth.extend(sequence.ground_truth[start:])
        logger.info("Tracked %s from frame %d over %d frames", sequence.name, start + 1, len(sequence) - start)
    runtime = RuntimeStats(frames=len(predictions), seconds=time.perf_counter() - started)
    result = evaluate_predictions(
        sequence.name, predictions, ground_truth, rotated=sequence.rotated, start_frames=starts, runtime=runtime
    )
    logger.info(
        "%s: AUC %.4f, precision@20 %.4f, %.1f fps", sequence.name, result.auc, result.precision_at_20, runtime.fps
    )
    return result
