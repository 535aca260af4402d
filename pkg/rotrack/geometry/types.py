import math
from dataclasses import dataclass

import numpy as np

from rotrack.geometry.angles import Angle, wrap_angle


@dataclass(frozen=True)
class Point2:
    """A point in image coordinates. x grows to the right, y grows downward."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Point coordinates must be finite. Got: ({self.x}, {self.y})")

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class RotatedBBox:
    """An oriented box given by its center, size and angle.

    The angle rotates the box counter-clockwise in the math convention applied to the image grid,
    so with y pointing downward a positive angle turns the box clockwise on screen.
    An axis-aligned box is the special case ``angle == 0``.

    Attributes:
        center: Center of the box in pixels.
        width: Extent along the box's own x axis, in pixels.
        height: Extent along the box's own y axis, in pixels.
        angle: Orientation in degrees, wrapped into (-180, 180].
    """

    center: Point2
    width: float
    height: float
    angle: Angle = 0.0

    def __post_init__(self) -> None:
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"Box size must be positive. Got: {self.width}x{self.height}")
        if not (math.isfinite(self.width) and math.isfinite(self.height)):
            raise ValueError(f"Box size must be finite. Got: {self.width}x{self.height}")
        object.__setattr__(self, "angle", wrap_angle(self.angle))

    @classmethod
    def from_xywh(cls, x: float, y: float, width: float, height: float) -> "RotatedBBox":
        """Builds an axis-aligned box from its continuous top-left corner and size.

        Example:
            >>> RotatedBBox.from_xywh(0, 0, 2, 2).center
            Point2(x=1.0, y=1.0)
        """
        return cls(Point2(x + width / 2, y + height / 2), width, height)

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def is_axis_aligned(self) -> bool:
        return self.angle == 0.0

    def corners(self) -> np.ndarray:
        """Returns the four corners as a (4, 2) array of (x, y), positively oriented."""
        half_w, half_h = self.width / 2, self.height / 2
        offsets = np.array([[-half_w, -half_h], [half_w, -half_h], [half_w, half_h], [-half_w, half_h]])
        theta = math.radians(self.angle)
        cos, sin = math.cos(theta), math.sin(theta)
        rotation = np.array([[cos, -sin], [sin, cos]])
        return offsets @ rotation.T + np.array([self.center.x, self.center.y])

    def to_list(self) -> list[float]:
        """Serializes the box as [cx, cy, w, h, angle]."""
        return [self.center.x, self.center.y, self.width, self.height, self.angle]

    @classmethod
    def from_list(cls, values: list[float]) -> "RotatedBBox":
        cx, cy, width, height, angle = values
        return cls(Point2(cx, cy), width, height, angle)
