import math

import numpy as np

from rotrack.exceptions import DegenerateBoxError
from rotrack.geometry.angles import wrap_angle
from rotrack.geometry.types import Point2, RotatedBBox

_AREA_TIE_TOLERANCE = 1e-9


def iou_axis_aligned(a: RotatedBBox, b: RotatedBBox) -> float:
    """Computes the intersection over union of two axis-aligned boxes.

    Args:
        a: First box, angle must be exactly 0.
        b: Second box, angle must be exactly 0.

    Returns:
        Intersection area over union area, 0 for disjoint boxes.

    Raises:
        ValueError: If either box is rotated. Use ``iou_rotated`` for those.

    Examples:
        >>> a = RotatedBBox.from_xywh(0, 0, 2, 2)
        >>> b = RotatedBBox.from_xywh(1, 1, 2, 2)
        >>> round(iou_axis_aligned(a, b), 6)
        0.142857
    """
    if not (a.is_axis_aligned and b.is_axis_aligned):
        raise ValueError(f"Boxes must be axis-aligned, use iou_rotated instead. Got angles: {a.angle}, {b.angle}")
    left = max(a.center.x - a.width / 2, b.center.x - b.width / 2)
    right = min(a.center.x + a.width / 2, b.center.x + b.width / 2)
    top = max(a.center.y - a.height / 2, b.center.y - b.height / 2)
    bottom = min(a.center.y + a.height / 2, b.center.y + b.height / 2)
    intersection = max(0.0, right - left) * max(0.0, bottom - top)
    union = a.area + b.area - intersection
    return intersection / union


def iou_rotated(a: RotatedBBox, b: RotatedBBox) -> float:
    """Computes the intersection over union of two oriented boxes by convex polygon clipping.

    The result is symmetric in its arguments bit for bit: the pair is put in a canonical
    order before clipping.

    Raises:
        DegenerateBoxError: If either corner polygon has zero area.
    """
    if a == b:
        return 1.0
    first, second = sorted((a, b), key=lambda box: box.to_list())
    subject, clipper = first.corners(), second.corners()
    area_first, area_second = polygon_area(subject), polygon_area(clipper)
    if area_first <= 0 or area_second <= 0:
        raise DegenerateBoxError(f"Boxes must have positive area. Got: {area_first}, {area_second}")
    intersection = clip_convex_polygon(subject, clipper)
    intersection_area = polygon_area(intersection) if len(intersection) >= 3 else 0.0
    union = area_first + area_second - intersection_area
    return min(1.0, max(0.0, intersection_area / union))


def clip_convex_polygon(subject: np.ndarray, clipper: np.ndarray) -> np.ndarray:
    """Clips ``subject`` against the positively oriented convex polygon ``clipper`` (Sutherland-Hodgman)."""
    output = [tuple(point) for point in subject]
    for p, q in zip(clipper, np.roll(clipper, -1, axis=0)):
        if not output:
            break
        vertices, output = output, []
        sides = [_side(p, q, vertex) for vertex in vertices]
        for index, (vertex, side) in enumerate(zip(vertices, sides)):
            previous, previous_side = vertices[index - 1], sides[index - 1]
            if side >= 0:
                if previous_side < 0:
                    output.append(_crossing(previous, vertex, previous_side, side))
                output.append(vertex)
            elif previous_side >= 0:
                output.append(_crossing(previous, vertex, previous_side, side))
    return np.array(output, dtype=np.float64).reshape(-1, 2)


def _side(p: np.ndarray, q: np.ndarray, point: tuple[float, float]) -> float:
    return (q[0] - p[0]) * (point[1] - p[1]) - (q[1] - p[1]) * (point[0] - p[0])


def _crossing(
    start: tuple[float, float], end: tuple[float, float], start_side: float, end_side: float
) -> tuple[float, float]:
    t = start_side / (start_side - end_side)
    return (start[0] + t * (end[0] - start[0]), start[1] + t * (end[1] - start[1]))


def polygon_area(points: np.ndarray) -> float:
    """Signed shoelace area, positive for positively oriented polygons."""
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def center_error(a: RotatedBBox, b: RotatedBBox) -> float:
    """Euclidean distance between box centers, in pixels.

    Example:
        >>> center_error(RotatedBBox(Point2(0, 0), 1, 1), RotatedBBox(Point2(3, 4), 1, 1))
        5.0
    """
    return a.center.distance_to(b.center)


def axis_aligned_envelope(box: RotatedBBox) -> RotatedBBox:
    """Smallest axis-aligned box containing the given box."""
    if box.is_axis_aligned:
        return box
    corners = box.corners()
    lower, upper = corners.min(axis=0), corners.max(axis=0)
    center = (lower + upper) / 2
    width, height = float(upper[0] - lower[0]), float(upper[1] - lower[1])
    return RotatedBBox(Point2(float(center[0]), float(center[1])), width, height)


def min_area_rect(points: np.ndarray) -> RotatedBBox:
    """Minimal-area enclosing rotated box of a point set, by rotating calipers over the convex hull.

    Among equal-area candidates the one with the smallest absolute angle is returned, and the
    angle is normalized into (-90, 90].

    Raises:
        DegenerateBoxError: If the points are collinear.
    """
    hull = convex_hull(np.asarray(points, dtype=np.float64))
    if len(hull) < 3:
        raise DegenerateBoxError(f"Points must span a positive area. Got: {points.tolist()}")
    best: tuple[float, float, RotatedBBox] | None = None
    for p, q in zip(hull, np.roll(hull, -1, axis=0)):
        edge = q - p
        theta = math.atan2(edge[1], edge[0])
        angle = _half_turn(math.degrees(theta))
        theta = math.radians(angle)
        axis_u = np.array([math.cos(theta), math.sin(theta)])
        axis_v = np.array([-math.sin(theta), math.cos(theta)])
        u, v = hull @ axis_u, hull @ axis_v
        width, height = float(u.max() - u.min()), float(v.max() - v.min())
        area = width * height
        if best is not None and area > best[0] * (1 + _AREA_TIE_TOLERANCE):
            continue
        if best is not None and area >= best[0] * (1 - _AREA_TIE_TOLERANCE) and abs(angle) >= abs(best[1]):
            continue
        middle = axis_u * (u.max() + u.min()) / 2 + axis_v * (v.max() + v.min()) / 2
        best = (area, angle, RotatedBBox(Point2(float(middle[0]), float(middle[1])), width, height, angle))
    assert best is not None
    return best[2]


def _half_turn(degrees: float) -> float:
    angle = wrap_angle(degrees)
    if angle > 90.0:
        angle -= 180.0
    elif angle <= -90.0:
        angle += 180.0
    return angle


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull, positively oriented, without repeated end point."""
    ordered = sorted(map(tuple, points))
    if len(ordered) <= 2:
        return np.array(ordered, dtype=np.float64).reshape(-1, 2)

    def build(sequence: list[tuple[float, float]]) -> list[tuple[float, float]]:
        chain: list[tuple[float, float]] = []
        for point in sequence:
            while len(chain) >= 2 and _turn(chain[-2], chain[-1], point) <= 0:
                chain.pop()
            chain.append(point)
        return chain

    lower, upper = build(ordered), build(ordered[::-1])
    return np.array(lower[:-1] + upper[:-1], dtype=np.float64)


def _turn(o: tuple[float, float], a: tuple[float, float], b: tuple[float, float]) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
