import logging
import math
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Literal

import numpy as np
from scipy import ndimage

from rotrack.benchmark.sequence import FRAME_DIRECTORY, FRAME_SUFFIX, POLY_FILE, RECT_FILE, Sequence
from rotrack.exceptions import SpriteOutOfBoundsError
from rotrack.geometry.angles import wrap_angle
from rotrack.geometry.types import Point2, RotatedBBox
from rotrack.geometry.utils import axis_aligned_envelope
from rotrack.imaging.pgm import write_pgm_file
from rotrack.imaging.types import Image
from rotrack.utils import write_atomic

logger = logging.getLogger(__name__)

Preset = Literal["translate", "rotate", "scale", "combined"]

_BACKGROUND_SMOOTHING = 3.0
_SPRITE_SMOOTHING = 1.0


@dataclass(frozen=True)
class SynthParams:
    """Parameters of a synthetic sequence: a textured sprite moving over a textured background.

    The sprite starts so that its path is centered in the frame. On frame k it is displaced
    by ``k * velocity``, rotated by ``k * omega`` degrees and scaled by ``(1 + scale_rate) ** k``.

    Attributes:
        frames: Number of frames.
        frame_width: Frame width in pixels.
        frame_height: Frame height in pixels.
        sprite_width: Unscaled sprite width in pixels.
        sprite_height: Unscaled sprite height in pixels.
        velocity: Displacement per frame, (vx, vy) in pixels.
        omega: Rotation per frame in degrees.
        scale_rate: Relative size change per frame.
        noise: Standard deviation of additive pixel noise, in gray levels.
        jitter: Standard deviation of the rendered sprite center around its ground truth, in pixels.
            The first frame is always rendered exactly at its ground truth.
        background_level: Mean gray level of the background.
        background_contrast: Standard deviation of the background texture.
        sprite_level: Mean gray level of the sprite.
        sprite_contrast: Standard deviation of the sprite texture.
    """

    frames: int = 60
    frame_width: int = 256
    frame_height: int = 160
    sprite_width: int = 48
    sprite_height: int = 32
    velocity: tuple[float, float] = (0.0, 0.0)
    omega: float = 0.0
    scale_rate: float = 0.0
    noise: float = 2.0
    jitter: float = 0.0
    background_level: float = 100.0
    background_contrast: float = 20.0
    sprite_level: float = 150.0
    sprite_contrast: float = 60.0

    def __post_init__(self) -> None:
        if self.frames < 2:
            raise ValueError(f"frames must be at least 2. Got: {self.frames}")
        if self.sprite_width < 32 or self.sprite_height < 32:
            raise ValueError(f"Sprite must be at least 32x32. Got: {self.sprite_width}x{self.sprite_height}")
        if self.frame_width <= self.sprite_width or self.frame_height <= self.sprite_height:
            raise ValueError(f"Frame must be larger than the sprite. Got: {self.frame_width}x{self.frame_height}")
        if self.noise < 0 or self.jitter < 0:
            raise ValueError(f"noise and jitter must be non-negative. Got: {self.noise}, {self.jitter}")
        if not self.scale_rate > -1:
            raise ValueError(f"scale_rate must be greater than -1. Got: {self.scale_rate}")


PARAMS_BY_PRESET: dict[Preset, SynthParams] = {
    "translate": SynthParams(velocity=(3.0, 0.0)),
    "rotate": SynthParams(omega=4.0),
    "scale": SynthParams(scale_rate=0.005),
    "combined": SynthParams(velocity=(1.5, 0.5), omega=2.0, scale_rate=0.003),
}


def preset_params(preset: str, **overrides: object) -> SynthParams:
    """Parameters of a preset with some fields replaced.

    Example:
        >>> preset_params("rotate", frames=10).omega
        4.0
    """
    if preset not in PARAMS_BY_PRESET:
        raise ValueError(f"preset must be one of {list(PARAMS_BY_PRESET)}. Got: {preset}")
    return replace(PARAMS_BY_PRESET[preset], **overrides)  # type: ignore[arg-type]


def ground_truth_box(params: SynthParams, k: int) -> RotatedBBox:
    """Exact sprite pose on frame ``k`` (0-based)."""
    vx, vy = params.velocity
    span = params.frames - 1
    center_x = (params.frame_width - 1) / 2 + (k - span / 2) * vx
    center_y = (params.frame_height - 1) / 2 + (k - span / 2) * vy
    scale = (1 + params.scale_rate) ** k
    angle = wrap_angle(k * params.omega)
    return RotatedBBox(Point2(center_x, center_y), params.sprite_width * scale, params.sprite_height * scale, angle)


def render_frames(params: SynthParams, seed: int) -> tuple[list[Image], list[RotatedBBox]]:
    """Renders every frame of a synthetic sequence in memory.

    Frames are integer valued in [0, 255] so they survive a PGM round trip unchanged.

    Returns:
        The frames and the analytic ground truth box of each frame.

    Raises:
        SpriteOutOfBoundsError: If the sprite does not fit inside some frame.
    """
    rng = np.random.default_rng(seed)
    background = _texture(rng, (params.frame_height, params.frame_width), _BACKGROUND_SMOOTHING)
    background = params.background_level + params.background_contrast * background
    sprite = _texture(rng, (params.sprite_height, params.sprite_width), _SPRITE_SMOOTHING)
    sprite = params.sprite_level + params.sprite_contrast * sprite
    rows, cols = np.mgrid[0 : params.frame_height, 0 : params.frame_width].astype(np.float64)
    frames, boxes = [], []
    for k in range(params.frames):
        box = ground_truth_box(params, k)
        offset = rng.normal(0.0, params.jitter, size=2) if params.jitter > 0 and k > 0 else np.zeros(2)
        center = Point2(box.center.x + offset[0], box.center.y + offset[1])
        rendered = RotatedBBox(center, box.width, box.height, box.angle)
        _check_inside(rendered, params, k)
        pixels = _paint(background, sprite, rendered, rows, cols)
        if params.noise > 0:
            pixels = pixels + rng.normal(0.0, params.noise, size=pixels.shape)
        frames.append(Image(np.clip(np.rint(pixels), 0, 255)))
        boxes.append(box)
    return frames, boxes


def _texture(rng: np.random.Generator, shape: tuple[int, int], smoothing: float) -> np.ndarray:
    texture = ndimage.gaussian_filter(rng.standard_normal(shape), smoothing, mode="wrap")
    return (texture - texture.mean()) / texture.std()


def _check_inside(box: RotatedBBox, params: SynthParams, k: int) -> None:
    corners = box.corners()
    lower, upper = corners.min(axis=0), corners.max(axis=0)
    limits = (params.frame_width - 0.5, params.frame_height - 0.5)
    if lower.min() < -0.5 or upper[0] > limits[0] or upper[1] > limits[1]:
        raise SpriteOutOfBoundsError(f"Sprite leaves the {params.frame_width}x{params.frame_height} frame at frame {k}")


def _paint(
    background: np.ndarray, sprite: np.ndarray, box: RotatedBBox, rows: np.ndarray, cols: np.ndarray
) -> np.ndarray:
    scale = box.width / sprite.shape[1]
    theta = math.radians(box.angle)
    cos, sin = math.cos(theta), math.sin(theta)
    dx, dy = cols - box.center.x, rows - box.center.y
    local_x = (cos * dx + sin * dy) / scale
    local_y = (-sin * dx + cos * dy) / scale
    inside = (np.abs(local_x) <= sprite.shape[1] / 2) & (np.abs(local_y) <= sprite.shape[0] / 2)
    coordinates = np.stack([local_y + (sprite.shape[0] - 1) / 2, local_x + (sprite.shape[1] - 1) / 2])
    sampled = ndimage.map_coordinates(sprite, coordinates, order=1, mode="nearest")
    return np.where(inside, sampled, background)


def synth_sequence(preset: str, params: SynthParams | None, seed: int, out_dir: str | os.PathLike) -> Sequence:
    """Renders a synthetic sequence and writes it in the OTB layout.

    Writes ``img/0001.pgm`` onward, ``groundtruth_rect.txt`` with the 1-based axis-aligned
    envelope of every box and ``groundtruth_poly.txt`` with its 1-based corners.

    Args:
        preset: Name of the motion preset, only used for naming when ``params`` is given.
        params: Parameters to render with, the preset's defaults when None.
        seed: Seed of every random draw, same seed gives identical files.
        out_dir: Directory to write into, created if missing.

    Returns:
        The sequence, carrying the analytic ground truth rather than the rounded file contents.
    """
    if preset not in PARAMS_BY_PRESET:
        raise ValueError(f"preset must be one of {list(PARAMS_BY_PRESET)}. Got: {preset}")
    params = PARAMS_BY_PRESET[preset] if params is None else params
    frames, boxes = render_frames(params, seed)
    out_dir = Path(out_dir)
    frame_directory = out_dir / FRAME_DIRECTORY
    frame_directory.mkdir(parents=True, exist_ok=True)
    for stale in frame_directory.glob(f"*{FRAME_SUFFIX}"):
        stale.unlink()
    frame_paths = []
    for index, frame in enumerate(frames, start=1):
        path = frame_directory / f"{index:04d}{FRAME_SUFFIX}"
        write_pgm_file(path, frame)
        frame_paths.append(path)
    write_atomic(out_dir / RECT_FILE, "".join(_rect_line(box) for box in boxes))
    write_atomic(out_dir / POLY_FILE, "".join(_poly_line(box) for box in boxes))
    logger.info("Wrote %d %s frames to %s", len(frames), preset, out_dir)
    return Sequence(f"{preset}-{seed}", tuple(frame_paths), tuple(boxes), rotated=True)


def _rect_line(box: RotatedBBox) -> str:
    envelope = axis_aligned_envelope(box)
    x = envelope.center.x + 1 - (envelope.width - 1) / 2
    y = envelope.center.y + 1 - (envelope.height - 1) / 2
    return f"{x:.6f},{y:.6f},{envelope.width:.6f},{envelope.height:.6f}\n"


def _poly_line(box: RotatedBBox) -> str:
    return ",".join(f"{value:.6f}" for value in (box.corners() + 1).ravel()) + "\n"
