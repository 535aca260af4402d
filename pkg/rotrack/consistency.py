import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from rotrack.correlation import ResponseMap
from rotrack.geometry.angles import Angle, shortest_arc, wrap_angle
from rotrack.geometry.types import Point2

_WEIGHT_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ConsistencyParams:
    """Weights of the motion smoothing and the scale fusion.

    Attributes:
        centroid_weight: Weight of the previous centroid in the conventional damping step.
        angle_weight: Weight of the previous motion direction.
        distance_weight: Weight of the previous motion distance.
        scale_sigma: Width of the Gaussian over scale bins.
        scale_step: Ratio between neighbouring scales of the search pyramid.
        num_scales: Number of scales in the search pyramid.
        scale_damping: Fraction of the winning scale change applied to the box size.
    """

    centroid_weight: float = 0.0
    angle_weight: float = 0.01
    distance_weight: float = 0.01
    scale_sigma: float = 1.0
    scale_step: float = 1.0375
    num_scales: int = 3
    scale_damping: float = 0.59

    def __post_init__(self) -> None:
        for name in ("centroid_weight", "angle_weight", "distance_weight", "scale_damping"):
            _check_unit_interval(name, getattr(self, name))
        if not self.scale_sigma > 0:
            raise ValueError(f"scale_sigma must be positive. Got: {self.scale_sigma}")
        if not self.scale_step > 1:
            raise ValueError(f"scale_step must be greater than 1. Got: {self.scale_step}")
        if self.num_scales < 1:
            raise ValueError(f"num_scales must be at least 1. Got: {self.num_scales}")


@dataclass(frozen=True)
class MotionState:
    """Memory of the last accepted centroid and the motion that led to it.

    Attributes:
        prev_centroid: Last accepted centroid.
        prev_distance: Length of the last accepted displacement, in pixels.
        prev_angle: Direction of the last accepted displacement.
        initialized: False until a first displacement has been observed.
    """

    prev_centroid: Point2
    prev_distance: float = 0.0
    prev_angle: Angle = 0.0
    initialized: bool = False

    def __post_init__(self) -> None:
        if self.prev_distance < 0:
            raise ValueError(f"prev_distance must be non-negative. Got: {self.prev_distance}")
        object.__setattr__(self, "prev_angle", wrap_angle(self.prev_angle))


def _check_unit_interval(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1]. Got: {value}")


def conventional_update(prev: Point2, predicted: Point2, w: float) -> Point2:
    """Damps a predicted centroid toward the previous one.

    Example:
        >>> conventional_update(Point2(0, 0), Point2(10, 10), 0.5)
        Point2(x=5.0, y=5.0)
    """
    _check_unit_interval("w", w)
    return Point2(w * prev.x + (1 - w) * predicted.x, w * prev.y + (1 - w) * predicted.y)


def angle_consistency(theta0: Angle, theta1: Angle, w_theta: float) -> Angle:
    """Blends the new motion direction toward the previous one along the shorter arc.

    Examples:
        >>> round(angle_consistency(0.0, 100.0, 0.01), 6)
        99.0

        >>> round(angle_consistency(179.0, -179.0, 0.01), 6)
        -179.02
    """
    _check_unit_interval("w_theta", w_theta)
    return wrap_angle(theta1 + w_theta * shortest_arc(theta0 - theta1))


def distance_consistency(d0: float, d1: float, w_d: float) -> float:
    """Blends the new motion distance toward the previous one.

    Example:
        >>> round(distance_consistency(0.0, 5.0, 0.01), 6)
        4.95
    """
    if d0 < 0 or d1 < 0:
        raise ValueError(f"Distances must be non-negative. Got: {d0}, {d1}")
    _check_unit_interval("w_d", w_d)
    return w_d * d0 + (1 - w_d) * d1


def apply_displacement(anchor: Point2, d: float, theta: Angle) -> Point2:
    """Moves an anchor by distance ``d`` in direction ``theta``. With y pointing down, 90 moves down."""
    if d < 0:
        raise ValueError(f"d must be non-negative. Got: {d}")
    radians = math.radians(theta)
    return Point2(anchor.x + d * math.cos(radians), anchor.y + d * math.sin(radians))


def displacement_consistency(
    state: MotionState, predicted: Point2, params: ConsistencyParams
) -> tuple[Point2, MotionState]:
    """Smooths a predicted centroid using the direction and length of the previous motion.

    The first observed displacement passes through unchanged and seeds the memory. Afterwards
    the prediction is damped toward the previous centroid, its direction and distance are
    blended with the remembered ones and the blended displacement is applied to the previous
    centroid. A zero displacement has no direction, so the remembered one is kept.

    Args:
        state: Motion memory from the previous frame.
        predicted: Centroid proposed by the detector for this frame.
        params: Blend weights.

    Returns:
        The corrected centroid and the updated motion memory.
    """
    prev = state.prev_centroid
    if not state.initialized:
        distance, direction = _displacement(prev, predicted, fallback=state.prev_angle)
        return predicted, MotionState(predicted, distance, direction, initialized=True)
    damped = conventional_update(prev, predicted, params.centroid_weight)
    distance, direction = _displacement(prev, damped, fallback=state.prev_angle)
    if distance > 0:
        direction = angle_consistency(state.prev_angle, direction, params.angle_weight)
    distance = distance_consistency(state.prev_distance, distance, params.distance_weight)
    if params.centroid_weight == params.angle_weight == params.distance_weight == 0.0:
        corrected = predicted
    else:
        corrected = apply_displacement(prev, distance, direction)
    return corrected, MotionState(corrected, distance, direction, initialized=True)


def _displacement(start: Point2, end: Point2, fallback: Angle) -> tuple[float, Angle]:
    dx, dy = end.x - start.x, end.y - start.y
    distance = math.hypot(dx, dy)
    if distance == 0:
        return 0.0, fallback
    return distance, wrap_angle(math.degrees(math.atan2(dy, dx)))


def gaussian_scale_weights(num_bins: int, mu: int, sigma: float) -> np.ndarray:
    """Gaussian weights over bins 1..num_bins centered at bin ``mu``, normalized to sum 1.

    The exponent is ``-((bin - mu) / sigma) ** 2`` without the usual factor 1/2, so ``sigma``
    is sqrt(2) times the standard deviation of the resulting bell.

    Examples:
        >>> gaussian_scale_weights(1, 1, 1.0).tolist()
        [1.0]

        >>> np.round(gaussian_scale_weights(3, 2, 1.0), 4).tolist()
        [0.2119, 0.5761, 0.2119]
    """
    if num_bins < 1:
        raise ValueError(f"num_bins must be at least 1. Got: {num_bins}")
    if not 1 <= mu <= num_bins:
        raise ValueError(f"mu must be in [1, {num_bins}]. Got: {mu}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive. Got: {sigma}")
    bins = np.arange(1, num_bins + 1, dtype=np.float64)
    weights = np.exp(-(((bins - mu) / sigma) ** 2)) / (math.sqrt(2 * math.pi) * sigma)
    return weights / weights.sum()


def fuse_response_maps(maps: Sequence[ResponseMap], weights: Sequence[float] | np.ndarray) -> ResponseMap:
    """Pointwise weighted sum of equally sized response maps.

    The fused map inherits scale and rotation indices from the map with the largest weight.

    Raises:
        ValueError: If the maps are empty or differ in shape, or the weights do not match them
            in number or do not sum to 1.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if not maps:
        raise ValueError("At least one response map is required.")
    if len(weights) != len(maps):
        raise ValueError(f"Expected {len(maps)} weights. Got: {len(weights)}")
    if abs(weights.sum() - 1.0) > _WEIGHT_SUM_TOLERANCE:
        raise ValueError(f"Weights must sum to 1. Got: {weights.sum()}")
    shapes = {response.shape for response in maps}
    if len(shapes) != 1:
        raise ValueError(f"Response maps must share one shape. Got: {sorted(shapes)}")
    fused = weights[0] * maps[0].scores
    for weight, response in zip(weights[1:], maps[1:]):
        fused = fused + weight * response.scores
    leader = maps[int(np.argmax(weights))]
    return ResponseMap(fused, scale_index=leader.scale_index, rotation_index=leader.rotation_index)


def scale_factors(num_scales: int, step: float) -> list[float]:
    """Scale factors of a pyramid centered on 1.

    Example:
        >>> scale_factors(3, 2.0)
        [0.5, 1.0, 2.0]
    """
    return [step ** (index - (num_scales - 1) / 2) for index in range(num_scales)]


def scale_consistency(
    maps: Sequence[ResponseMap],
    current_size: tuple[float, float],
    *,
    sigma: float,
    damping: float,
    step: float,
) -> tuple[ResponseMap, tuple[float, float]]:
    """Fuses a scale pyramid of responses around the winning scale and updates the box size.

    Args:
        maps: Responses ordered from the smallest to the largest search scale.
        current_size: Box (width, height).
        sigma: Width of the Gaussian over scale bins.
        damping: Fraction of the winning scale change applied to the size.
        step: Ratio between neighbouring scales.

    Returns:
        The fused response and the new (width, height).

    Raises:
        ValueError: If ``maps`` is empty.
    """
    if not maps:
        raise ValueError("Scale pyramid must not be empty.")
    _check_unit_interval("damping", damping)
    mu = int(np.argmax([response.peak_value for response in maps])) + 1
    fused = fuse_response_maps(maps, gaussian_scale_weights(len(maps), mu, sigma))
    factor = step ** (mu - (len(maps) + 1) / 2)
    ratio = 1.0 + damping * (factor - 1.0)
    width, height = current_size
    return fused, (width * ratio, height * ratio)
