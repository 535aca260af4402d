from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from rotrack.geometry.types import RotatedBBox
from rotrack.geometry.utils import axis_aligned_envelope, center_error, iou_axis_aligned, iou_rotated

SUCCESS_THRESHOLDS = np.linspace(0.0, 1.0, 101)
PRECISION_THRESHOLDS = np.arange(51, dtype=np.float64)
HEADLINE_PRECISION_THRESHOLD = 20
CSV_HEADER = "threshold,success,precision"


@dataclass(frozen=True)
class RuntimeStats:
    frames: int
    seconds: float

    @property
    def fps(self) -> float:
        return self.frames / self.seconds if self.seconds > 0 else float("inf")


@dataclass(frozen=True, eq=False)
class EvalResult:
    """Scores of one tracker run on one sequence, frames of every start pooled together.

    Attributes:
        sequence_name: Name of the evaluated sequence.
        start_frames: 0-based frames the tracker was initialized on.
        boxes: Predicted box on every pooled frame, the ground truth on initialization frames.
        ious: Overlap with the ground truth on every pooled frame.
        center_errors: Center distance to the ground truth on every pooled frame, in pixels.
        success: Fraction of frames with IoU strictly above each of ``SUCCESS_THRESHOLDS``.
        precision: Fraction of frames with center error at most each of ``PRECISION_THRESHOLDS``.
        auc: Area under the success curve.
        precision_at_20: Precision at 20 pixels.
        runtime: Wall clock statistics. Kept out of serialized results.
    """

    sequence_name: str
    start_frames: tuple[int, ...]
    boxes: tuple[RotatedBBox, ...]
    ious: np.ndarray
    center_errors: np.ndarray
    success: np.ndarray
    precision: np.ndarray
    auc: float
    precision_at_20: float
    runtime: RuntimeStats | None = field(default=None, compare=False)

    @property
    def mean_iou(self) -> float:
        return float(np.mean(self.ious))

    @property
    def mean_center_error(self) -> float:
        return float(np.mean(self.center_errors))

    def to_dict(self) -> dict[str, Any]:
        return {
            "sequence": self.sequence_name,
            "start_frames": list(self.start_frames),
            "boxes": [box.to_list() for box in self.boxes],
            "ious": [float(value) for value in self.ious],
            "center_errors": [float(value) for value in self.center_errors],
            "success_curve": [float(value) for value in self.success],
            "precision_curve": [float(value) for value in self.precision],
            "auc": self.auc,
            "precision_at_20": self.precision_at_20,
        }

    @classmethod
    def from_dict(cls, document: dict[str, Any]) -> "EvalResult":
        try:
            return cls(
                sequence_name=str(document["sequence"]),
                start_frames=tuple(int(start) for start in document["start_frames"]),
                boxes=tuple(RotatedBBox.from_list(values) for values in document["boxes"]),
                ious=np.asarray(document["ious"], dtype=np.float64),
                center_errors=np.asarray(document["center_errors"], dtype=np.float64),
                success=np.asarray(document["success_curve"], dtype=np.float64),
                precision=np.asarray(document["precision_curve"], dtype=np.float64),
                auc=float(document["auc"]),
                precision_at_20=float(document["precision_at_20"]),
            )
        except KeyError as e:
            raise ValueError(f"Result document is missing key {e}") from None

    def curves_csv(self) -> str:
        """Stored success and precision curves on a shared normalized axis.

        Row t holds the success rate at IoU threshold t. Its precision cell holds the stored
        precision at ``50 * t`` pixels and is empty where that is not a whole pixel.
        """
        rows = [CSV_HEADER]
        pixels_per_step = len(SUCCESS_THRESHOLDS) // (len(PRECISION_THRESHOLDS) - 1)
        for index, (threshold, success) in enumerate(zip(SUCCESS_THRESHOLDS, self.success)):
            pixel, remainder = divmod(index, pixels_per_step)
            precision = f"{self.precision[pixel]:.6f}" if remainder == 0 else ""
            rows.append(f"{threshold:.2f},{success:.6f},{precision}")
        return "\n".join(rows) + "\n"


def success_curve(ious: np.ndarray) -> np.ndarray:
    """Fraction of frames whose IoU is strictly above each threshold.

    Example:
        >>> round(float(success_curve(np.array([1.0, 0.5, 0.0]))[25]), 4)
        0.6667
    """
    ious = np.asarray(ious, dtype=np.float64)
    return (ious[np.newaxis, :] > SUCCESS_THRESHOLDS[:, np.newaxis]).mean(axis=1)


def precision_curve(center_errors: np.ndarray) -> np.ndarray:
    """Fraction of frames whose center error is at most each pixel threshold."""
    center_errors = np.asarray(center_errors, dtype=np.float64)
    return (center_errors[np.newaxis, :] <= PRECISION_THRESHOLDS[:, np.newaxis]).mean(axis=1)


def area_under_curve(success: np.ndarray) -> float:
    """Left Riemann sum of the success curve, 1.0 when every IoU is 1."""
    return float(np.mean(success[:-1]))


def frame_iou(prediction: RotatedBBox, ground_truth: RotatedBBox, *, rotated: bool) -> float:
    """Overlap used for scoring.

    Rotated ground truth is compared polygon to polygon. Axis-aligned ground truth is compared
    with the axis-aligned envelope of the prediction.
    """
    if rotated:
        return iou_rotated(prediction, ground_truth)
    return iou_axis_aligned(axis_aligned_envelope(prediction), ground_truth)


def evaluate_predictions(
    sequence_name: str,
    predictions: Sequence[RotatedBBox],
    ground_truth: Sequence[RotatedBBox],
    *,
    rotated: bool,
    start_frames: Sequence[int] = (0,),
    runtime: RuntimeStats | None = None,
) -> EvalResult:
    """Scores predicted boxes against the ground truth frame by frame.

    Raises:
        ValueError: If the box lists are empty or differ in length.
    """
    if len(predictions) != len(ground_truth) or not predictions:
        raise ValueError(
            f"Expected as many predictions as ground truth boxes. Got: {len(predictions)}, {len(ground_truth)}"
        )
    ious = np.array([frame_iou(p, g, rotated=rotated) for p, g in zip(predictions, ground_truth)])
    center_errors = np.array([center_error(p, g) for p, g in zip(predictions, ground_truth)])
    success, precision = success_curve(ious), precision_curve(center_errors)
    return EvalResult(
        sequence_name=sequence_name,
        start_frames=tuple(start_frames),
        boxes=tuple(predictions),
        ious=ious,
        center_errors=center_errors,
        success=success,
        precision=precision,
        auc=area_under_curve(success),
        precision_at_20=float(precision[HEADLINE_PRECISION_THRESHOLD]),
        runtime=runtime,
    )
