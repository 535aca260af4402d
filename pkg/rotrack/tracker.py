import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence
from dataclasses import dataclass, replace
from typing import Any

from rotrack.config import TrackerConfig, TrackerMode
from rotrack.consistency import MotionState, displacement_consistency, scale_consistency
from rotrack.correlation import (
    FeatureMap,
    ResponseMap,
    feature_transform,
    filter_respond,
    gaussian_label,
    train_filter,
    update_model,
    xcorr_fft,
)
from rotrack.geometry.angles import Angle, wrap_angle
from rotrack.geometry.types import Point2, RotatedBBox
from rotrack.imaging.types import Image, Patch
from rotrack.imaging.utils import crop_and_resize
from rotrack.rotation_bank import (
    TemplateBank,
    best_by_ratio,
    build_bank,
    nearest_neighbors,
    per_frame_rotations,
    top3_candidates,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FrameDiagnostics:
    """What the tracker saw on one frame. Recorded, never used to abort.

    Attributes:
        confidence: Peak score of the winning response.
        path_angle: Direction of the centroid motion on this frame, None if it did not move.
        rotation_index: Index of the winning rotation hypothesis.
        scale_index: Index of the winning search scale.
    """

    confidence: float
    path_angle: Angle | None
    rotation_index: int
    scale_index: int


@dataclass(frozen=True, eq=False)
class TrackerState:
    """Everything carried from one frame to the next.

    Attributes:
        config: Configuration the state was initialized with.
        box: Current target box.
        angle: Current angle estimate.
        reference_angle: Angle of the first-frame box, the zero of the rotation bank.
        model: Template, template bank or appearance patch, depending on the mode.
        motion: Memory of the centroid motion.
        frame_index: Index of the last processed frame, 0 for the initialization frame.
        frame_shape: (height, width) every frame must have.
        diagnostics: Diagnostics of the last tracked frame.
    """

    config: TrackerConfig
    box: RotatedBBox
    angle: Angle
    reference_angle: Angle
    model: Any
    motion: MotionState
    frame_index: int
    frame_shape: tuple[int, int]
    diagnostics: FrameDiagnostics | None = None


@dataclass(frozen=True)
class CropGeometry:
    """Sizes of the exemplar and search crops for a target box.

    The exemplar crop covers ``context_factor * sqrt(width * height)`` source pixels and the
    search crop keeps the same pixel pitch over ``search_size`` pixels.
    """

    exemplar_side: float
    search_side: float
    search_size: int

    @classmethod
    def from_box(cls, config: TrackerConfig, box: RotatedBBox) -> "CropGeometry":
        exemplar_side = config.context_factor * math.sqrt(box.width * box.height)
        search_side = exemplar_side * config.search_size / config.exemplar_size
        return cls(exemplar_side, search_side, config.search_size)

    def to_image(self, center: Point2, peak: Point2, factor: float, zero: float) -> Point2:
        """Maps a response peak to image coordinates, ``zero`` being the peak of an unmoved target."""
        ratio = self.search_side * factor / self.search_size
        return Point2(center.x + (peak.x - zero) * ratio, center.y + (peak.y - zero) * ratio)


@dataclass(frozen=True)
class _Decision:
    centroid: Point2
    size: tuple[float, float]
    angle: Angle
    confidence: float
    rotation_index: int
    scale_index: int


class Tracker(ABC):
    """Abstract base class for single-target trackers.

    A tracker holds no per-sequence data. Everything a sequence needs is threaded through
    ``TrackerState`` values, so one tracker can serve any number of sequences at once.
    """

    def __init__(self, config: TrackerConfig) -> None:
        self.config = config

    def init(self, frame: Image, gt_box: RotatedBBox) -> TrackerState:
        """Builds the target model from the first frame.

        Args:
            frame: The first frame.
            gt_box: The target box on that frame.

        Returns:
            The initial state. Its angle is the box angle, 0 without an angle annotation.

        Raises:
            ValueError: If the box center lies outside the frame.
        """
        center = gt_box.center
        if not (0 <= center.x <= frame.width and 0 <= center.y <= frame.height):
            raise ValueError(f"Box center must lie inside the {frame.width}x{frame.height} frame. Got: {center}")
        model = self._build_model(frame, gt_box, CropGeometry.from_box(self.config, gt_box))
        logger.debug("Initialized %s tracker at %s", self.config.mode, gt_box)
        return TrackerState(
            config=self.config,
            box=gt_box,
            angle=gt_box.angle,
            reference_angle=gt_box.angle,
            model=model,
            motion=MotionState(center),
            frame_index=0,
            frame_shape=frame.shape,
        )

    def track_frame(self, state: TrackerState, frame: Image) -> tuple[RotatedBBox, TrackerState]:
        """Locates the target on the next frame.

        Returns:
            The new box and the state for the following frame.

        Raises:
            ValueError: If the frame size differs from the initialization frame.
        """
        if frame.shape != state.frame_shape:
            raise ValueError(f"Frame shape must be {state.frame_shape}. Got: {frame.shape}")
        geometry = CropGeometry.from_box(self.config, state.box)
        decision = self._decide(state, frame, geometry)
        centroid, motion = decision.centroid, replace(state.motion, prev_centroid=decision.centroid)
        if self.config.displacement:
            centroid, motion = displacement_consistency(state.motion, decision.centroid, self.config.consistency)
        width, height = decision.size
        box = RotatedBBox(centroid, width, height, decision.angle)
        diagnostics = FrameDiagnostics(
            confidence=decision.confidence,
            path_angle=_direction(state.box.center, centroid),
            rotation_index=decision.rotation_index,
            scale_index=decision.scale_index,
        )
        logger.debug(
            "Frame %d: center=(%.2f, %.2f) angle=%.1f confidence=%.4f rotation=%d scale=%d",
            state.frame_index + 1,
            centroid.x,
            centroid.y,
            decision.angle,
            decision.confidence,
            decision.rotation_index,
            decision.scale_index,
        )
        new_state = replace(
            state,
            box=box,
            angle=decision.angle,
            model=self._update_model(state.model, frame, box),
            motion=motion,
            frame_index=state.frame_index + 1,
            diagnostics=diagnostics,
        )
        return box, new_state

    @abstractmethod
    def _build_model(self, frame: Image, box: RotatedBBox, geometry: CropGeometry) -> Any:
        """Builds the target model from the first frame."""

    @abstractmethod
    def _decide(self, state: TrackerState, frame: Image, geometry: CropGeometry) -> _Decision:
        """Finds the raw centroid, size and angle on a frame, before displacement smoothing."""

    def _update_model(self, model: Any, frame: Image, box: RotatedBBox) -> Any:
        return model

    def _peak(self, response: ResponseMap) -> Point2:
        return response.subpixel_peak() if self.config.subpixel else response.peak_location

    def _search_crops(self, frame: Image, center: Point2, geometry: CropGeometry) -> list[Patch]:
        return [
            crop_and_resize(frame, center, geometry.search_side * factor, self.config.search_size)
            for factor in self.config.scale_factors()
        ]

    def _fuse_scales(self, maps: Sequence[ResponseMap], box: RotatedBBox) -> tuple[ResponseMap, tuple[float, float]]:
        if not self.config.scale:
            return maps[0], (box.width, box.height)
        return scale_consistency(
            maps,
            (box.width, box.height),
            sigma=self.config.scale_sigma,
            damping=self.config.scale_damping,
            step=self.config.scale_step,
        )


class FixedTemplateTracker(Tracker):
    """Tracker matching every frame against the first-frame exemplar, never updated.

    With rotation enabled the exemplar is expanded into a bank of rotated templates. Each frame
    correlates the bank entries nearest to the current angle, averages neighbouring rotations
    around the three best responses and keeps the candidate with the best score to
    displacement ratio.
    """

    def _build_model(self, frame: Image, box: RotatedBBox, geometry: CropGeometry) -> FeatureMap | TemplateBank:
        exemplar = crop_and_resize(frame, box.center, geometry.exemplar_side, self.config.exemplar_size)
        if self.config.rotation:
            return build_bank(exemplar, self.config.bank_step, backend=self._template)
        return self._template(exemplar)

    def _template(self, patch: Patch) -> FeatureMap:
        return feature_transform(patch, windowed=self.config.windowed)

    def _decide(self, state: TrackerState, frame: Image, geometry: CropGeometry) -> _Decision:
        center = state.box.center
        factors = self.config.scale_factors()
        searches = [feature_transform(patch) for patch in self._search_crops(frame, center, geometry)]
        zero = (self.config.search_size - self.config.exemplar_size) / 2

        def locate(response: ResponseMap) -> Point2:
            return geometry.to_image(center, self._peak(response), factors[response.scale_index], zero)

        if not self.config.rotation:
            maps = [xcorr_fft(state.model, search, scale_index=i) for i, search in enumerate(searches)]
            fused, size = self._fuse_scales(maps, state.box)
            return _Decision(locate(fused), size, state.angle, fused.peak_value, 0, fused.scale_index)

        bank: TemplateBank = state.model
        relative_angle = wrap_angle(state.angle - state.reference_angle)
        indices = nearest_neighbors(bank, relative_angle, self.config.num_neighbors)
        fused_maps, sizes = [], []
        for index in indices:
            maps = [
                xcorr_fft(bank.templates[index], search, scale_index=i, rotation_index=index)
                for i, search in enumerate(searches)
            ]
            fused, size = self._fuse_scales(maps, state.box)
            fused_maps.append(fused)
            sizes.append(size)
        candidates = top3_candidates(
            fused_maps,
            [bank.angles[index] for index in indices],
            center,
            self.config.rotation_sigma,
            locate,
            num_candidates=self.config.num_candidates,
        )
        winner = best_by_ratio(candidates, self.config.ratio_epsilon)
        return _Decision(
            centroid=winner.centroid,
            size=sizes[winner.map_index],
            angle=wrap_angle(state.reference_angle + winner.angle),
            confidence=winner.score,
            rotation_index=indices[winner.map_index],
            scale_index=winner.response.scale_index,
        )


class UpdatingTemplateTracker(Tracker):
    """Correlation filter tracker whose appearance model is rolled forward every frame.

    With rotation enabled three filters are trained per frame, on the model rotated by
    ``-zeta``, unrotated and rotated by ``+zeta``, and the one with the highest peak wins. The
    angle estimate accumulates the winning rotations.
    """

    def _build_model(self, frame: Image, box: RotatedBBox, geometry: CropGeometry) -> Patch:
        return crop_and_resize(frame, box.center, geometry.search_side, self.config.search_size)

    def _decide(self, state: TrackerState, frame: Image, geometry: CropGeometry) -> _Decision:
        config = self.config
        center = state.box.center
        factors = config.scale_factors()
        if config.rotation:
            rotations, offsets = per_frame_rotations(state.model, config.zeta), [-config.zeta, 0.0, config.zeta]
        else:
            rotations, offsets = [state.model], [0.0]
        label = gaussian_label(config.search_size, config.label_sigma)
        filters = [
            train_filter(feature_transform(patch, windowed=config.windowed), label, config.regularization)
            for patch in rotations
        ]
        searches = [
            feature_transform(patch, windowed=config.windowed) for patch in self._search_crops(frame, center, geometry)
        ]
        entries = []
        for rotation_index, correlation_filter in enumerate(filters):
            maps = [
                filter_respond(correlation_filter, search, scale_index=i, rotation_index=rotation_index)
                for i, search in enumerate(searches)
            ]
            entries.append(self._fuse_scales(maps, state.box))
        middle = len(entries) // 2
        best = max(range(len(entries)), key=lambda index: (entries[index][0].peak_value, index == middle))
        fused, size = entries[best]
        zero = float(config.search_size // 2)
        centroid = geometry.to_image(center, self._peak(fused), factors[fused.scale_index], zero)
        return _Decision(
            centroid=centroid,
            size=size,
            angle=wrap_angle(state.angle + offsets[best]),
            confidence=fused.peak_value,
            rotation_index=best,
            scale_index=fused.scale_index,
        )

    def _update_model(self, model: Patch, frame: Image, box: RotatedBBox) -> Patch:
        geometry = CropGeometry.from_box(self.config, box)
        observed = crop_and_resize(frame, box.center, geometry.search_side, self.config.search_size)
        return update_model(model, observed, self.config.model_update_rate)


def _direction(start: Point2, end: Point2) -> Angle | None:
    if start == end:
        return None
    return wrap_angle(math.degrees(math.atan2(end.y - start.y, end.x - start.x)))


TRACKER_BY_MODE: dict[TrackerMode, Callable[[TrackerConfig], Tracker]] = {
    "fixed_template": FixedTemplateTracker,
    "updating_template": UpdatingTemplateTracker,
}


def create_tracker(config: TrackerConfig) -> Tracker:
    return TRACKER_BY_MODE[config.mode](config)


def init(frame: Image, gt_box: RotatedBBox, config: TrackerConfig) -> TrackerState:
    """Initializes a tracker state for the mode named in ``config``."""
    return create_tracker(config).init(frame, gt_box)


def track_frame(state: TrackerState, frame: Image) -> tuple[RotatedBBox, TrackerState]:
    """Advances a tracker state by one frame."""
    return create_tracker(state.config).track_frame(state, frame)
