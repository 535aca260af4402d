import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Generic, TypeVar

from rotrack.consistency import fuse_response_maps, gaussian_scale_weights
from rotrack.correlation import ResponseMap
from rotrack.geometry.angles import Angle, circular_distance, shortest_arc
from rotrack.geometry.types import Point2
from rotrack.imaging.types import Patch
from rotrack.imaging.utils import warp_rotate_scale

Template = TypeVar("Template")

MAX_ZETA = 45.0


@dataclass(frozen=True)
class TemplateBank(Generic[Template]):
    """Templates of one exemplar rotated at evenly spaced angles from -180 to 180 inclusive.

    Both -180 and 180 are kept even though they describe the same orientation.

    Attributes:
        angles: Strictly increasing rotation angles, in degrees.
        templates: One template per angle.
        step: Spacing between consecutive angles.
    """

    angles: tuple[float, ...]
    templates: tuple[Template, ...]
    step: float

    def __post_init__(self) -> None:
        if len(self.angles) != len(self.templates):
            raise ValueError(f"Expected one template per angle. Got: {len(self.angles)} and {len(self.templates)}")
        if any(b <= a for a, b in zip(self.angles, self.angles[1:])):
            raise ValueError(f"Bank angles must be strictly increasing. Got: {self.angles}")

    def __len__(self) -> int:
        return len(self.angles)


@dataclass(frozen=True)
class RotationCandidate:
    """A possible target position proposed by one rotation hypothesis.

    Attributes:
        centroid: Target center in image coordinates.
        score: Peak value of the fused response.
        angle: Bank angle the fused response is centered on.
        displacement: Distance from the previous centroid, in pixels.
        map_index: Index of the center map among the fused maps.
        response: The fused response the candidate was read from.
    """

    centroid: Point2
    score: float
    angle: Angle
    displacement: float
    map_index: int
    response: ResponseMap

    def __post_init__(self) -> None:
        if self.displacement < 0:
            raise ValueError(f"displacement must be non-negative. Got: {self.displacement}")


def build_bank(exemplar: Patch, step: float, backend: Callable[[Patch], Template]) -> TemplateBank[Template]:
    """Builds a template for every rotation of the exemplar from -180 to 180 in ``step`` increments.

    Args:
        exemplar: The unrotated exemplar patch.
        step: Angular spacing in degrees. 360 must be an integer multiple of it.
        backend: Turns a rotated patch into a template, e.g. a feature transform.

    Returns:
        A bank with ``360 / step + 1`` entries.

    Raises:
        ValueError: If 360 is not an integer multiple of ``step``.

    Example:
        >>> import numpy as np
        >>> patch = Patch(np.arange(16.0).reshape(4, 4), center=Point2(2, 2), source_size=4.0)
        >>> build_bank(patch, 90.0, backend=lambda p: p.rotation).angles
        (-180.0, -90.0, 0.0, 90.0, 180.0)
    """
    num_steps = round(360.0 / step) if step > 0 else 0
    if num_steps < 1 or not math.isclose(num_steps * step, 360.0, abs_tol=1e-9):
        raise ValueError(f"step must divide 360 evenly. Got: {step}")
    angles = tuple(-180.0 + index * 360.0 / num_steps for index in range(num_steps + 1))
    templates = tuple(
        backend(exemplar if angle == 0.0 else warp_rotate_scale(exemplar, angle, 1.0)) for angle in angles
    )
    return TemplateBank(angles, templates, float(step))


def nearest_neighbors(bank: TemplateBank, current: Angle, k: int) -> list[int]:
    """Indices of the ``k`` bank entries closest to ``current`` on the circle.

    Ties prefer the smaller absolute angle, then the negative one. The -180 entry aliases 180
    and is only picked once every other entry is taken. Indices are returned in circular order
    around ``current``, from the most clockwise-negative offset to the most positive.

    Raises:
        ValueError: If ``k`` is not in [1, len(bank)].

    Example:
        >>> bank = TemplateBank(tuple(range(-180, 181, 20)), tuple(range(19)), 20.0)
        >>> [bank.angles[i] for i in nearest_neighbors(bank, 175.0, 5)]
        [140, 160, 180, -160, -140]
    """
    if not 1 <= k <= len(bank):
        raise ValueError(f"k must be in [1, {len(bank)}]. Got: {k}")
    has_alias = 180.0 in bank.angles

    def rank(index: int) -> tuple[bool, float, float, float]:
        angle = bank.angles[index]
        is_alias = has_alias and angle == -180.0
        return (is_alias, circular_distance(angle, current), abs(angle), angle)

    chosen = sorted(range(len(bank)), key=rank)[:k]
    return sorted(chosen, key=lambda index: (shortest_arc(bank.angles[index] - current), index))


def rotation_gwa(maps: Sequence[ResponseMap], center_index: int, sigma: float) -> ResponseMap:
    """Gaussian weighted average of neighbouring rotation responses, centered at a 1-based index."""
    return fuse_response_maps(maps, gaussian_scale_weights(len(maps), center_index, sigma))


def top3_candidates(
    maps: Sequence[ResponseMap],
    angles: Sequence[Angle],
    prev_centroid: Point2,
    sigma: float,
    locate: Callable[[ResponseMap], Point2],
    num_candidates: int = 3,
) -> list[RotationCandidate]:
    """Builds candidates from Gaussian averages centered on the best-scoring rotation responses.

    Responses are ranked by peak value, ties broken by position. For each of the best
    ``num_candidates`` a rotation average centered on it is computed and its peak is turned
    into a centroid with ``locate``.

    Args:
        maps: One response per neighbouring rotation, in circular order.
        angles: The bank angle of each response.
        prev_centroid: Centroid of the previous frame.
        sigma: Width of the Gaussian over rotation bins.
        locate: Maps a response peak to image coordinates.
        num_candidates: How many candidates to build at most.

    Returns:
        Candidates ordered by the peak value of their center response.
    """
    if not maps:
        raise ValueError("At least one response map is required.")
    if len(angles) != len(maps):
        raise ValueError(f"Expected {len(maps)} angles. Got: {len(angles)}")
    ranked = sorted(range(len(maps)), key=lambda index: (-maps[index].peak_value, index))
    candidates = []
    for index in ranked[:num_candidates]:
        fused = rotation_gwa(maps, index + 1, sigma)
        centroid = locate(fused)
        candidates.append(
            RotationCandidate(
                centroid=centroid,
                score=fused.peak_value,
                angle=angles[index],
                displacement=prev_centroid.distance_to(centroid),
                map_index=index,
                response=fused,
            )
        )
    return candidates


def best_by_ratio(candidates: Sequence[RotationCandidate], eps: float) -> RotationCandidate:
    """Candidate with the highest ``score / (displacement + eps)``, the first one on ties.

    Raises:
        ValueError: If there are no candidates or ``eps`` is not positive.
    """
    if not candidates:
        raise ValueError("At least one candidate is required.")
    if not eps > 0:
        raise ValueError(f"eps must be positive. Got: {eps}")
    return max(candidates, key=lambda candidate: candidate.score / (candidate.displacement + eps))


def select_by_ratio(candidates: Sequence[RotationCandidate], eps: float) -> tuple[Point2, Angle]:
    winner = best_by_ratio(candidates, eps)
    return winner.centroid, winner.angle


def per_frame_rotations(exemplar: Patch, zeta: float) -> list[Patch]:
    """The exemplar rotated by ``-zeta``, unchanged and rotated by ``+zeta``.

    Raises:
        ValueError: If ``zeta`` is outside (0, 45].
    """
    if not 0 < zeta <= MAX_ZETA:
        raise ValueError(f"zeta must be in (0, {MAX_ZETA}]. Got: {zeta}")
    return [warp_rotate_scale(exemplar, -zeta, 1.0), exemplar, warp_rotate_scale(exemplar, zeta, 1.0)]
