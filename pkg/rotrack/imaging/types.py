from dataclasses import dataclass

import numpy as np

from rotrack.geometry.angles import Angle
from rotrack.geometry.types import Point2


@dataclass(frozen=True, eq=False)
class Image:
    """A grayscale image stored row-major as a read-only float64 array of shape (height, width)."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        pixels = np.array(self.pixels, dtype=np.float64)
        if pixels.ndim != 2 or pixels.size == 0:
            raise ValueError(f"Image must be a non-empty 2D grid. Got shape: {pixels.shape}")
        if not np.all(np.isfinite(pixels)):
            raise ValueError("Image pixels must be finite.")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @property
    def mean(self) -> float:
        return float(self.pixels.mean())


@dataclass(frozen=True, eq=False)
class Patch(Image):
    """An image cut out of a larger one, remembering where it came from.

    Attributes:
        center: Center of the sampled region in source image coordinates.
        source_size: Side of the sampled region in source pixels.
        rotation: Rotation applied to the content, in degrees.
        scale: Scale applied to the content.
    """

    center: Point2
    source_size: float
    rotation: Angle = 0.0
    scale: float = 1.0
