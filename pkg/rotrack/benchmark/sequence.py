import math
import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from rotrack.exceptions import (
    DegenerateBoxError,
    FrameCountMismatchError,
    GroundTruthParseError,
    MissingGroundTruthError,
    SequenceError,
)
from rotrack.geometry.types import Point2, RotatedBBox
from rotrack.geometry.utils import min_area_rect
from rotrack.imaging.pgm import read_pgm_file
from rotrack.imaging.types import Image

FRAME_DIRECTORY = "img"
FRAME_SUFFIX = ".pgm"
RECT_FILE = "groundtruth_rect.txt"
POLY_FILE = "groundtruth_poly.txt"

_SEPARATOR = re.compile(r"[,\s]+")
_DIGITS = re.compile(r"\d+")


@dataclass(frozen=True)
class Sequence:
    """A tracking sequence: frames on disk with one ground truth box per frame.

    Attributes:
        name: Sequence name, the directory name when loaded from disk.
        frame_paths: Frame files in playback order.
        ground_truth: Target box on every frame.
        rotated: True when the ground truth carries orientations.
    """

    name: str
    frame_paths: tuple[Path, ...]
    ground_truth: tuple[RotatedBBox, ...]
    rotated: bool = False

    def __post_init__(self) -> None:
        if len(self.frame_paths) != len(self.ground_truth):
            raise FrameCountMismatchError(
                f"{self.name}: {len(self.frame_paths)} frames but {len(self.ground_truth)} ground truth boxes"
            )
        if len(self.frame_paths) < 2:
            raise SequenceError(f"{self.name}: a sequence needs at least 2 frames. Got: {len(self.frame_paths)}")

    def __len__(self) -> int:
        return len(self.frame_paths)

    def read_frame(self, index: int) -> Image:
        return read_pgm_file(self.frame_paths[index])


def load_sequence(directory: str | os.PathLike) -> Sequence:
    """Loads a sequence stored in the OTB layout.

    Frames are the ``img/*.pgm`` files sorted by the number in their name. Ground truth comes
    from ``groundtruth_poly.txt`` when present (8 numbers per line, 1-based corner coordinates,
    converted to the minimal-area enclosing rotated box) and from ``groundtruth_rect.txt``
    otherwise (4 numbers per line, 1-based top-left corner with width and height). Numbers may
    be separated by commas, tabs or spaces.

    Raises:
        MissingGroundTruthError: If no ground truth file exists or it has no entries.
        GroundTruthParseError: If a line cannot be parsed, naming the line.
        FrameCountMismatchError: If frames and ground truth entries differ in number.
    """
    directory = Path(directory)
    frame_paths = sorted((directory / FRAME_DIRECTORY).glob(f"*{FRAME_SUFFIX}"), key=_frame_order)
    poly_path, rect_path = directory / POLY_FILE, directory / RECT_FILE
    rotated = poly_path.is_file()
    gt_path = poly_path if rotated else rect_path
    if not gt_path.is_file():
        raise MissingGroundTruthError(f"{directory}: missing {RECT_FILE}")
    ground_truth = _read_ground_truth(gt_path)
    if not ground_truth:
        raise MissingGroundTruthError(f"{gt_path}: no ground truth entries")
    if len(frame_paths) != len(ground_truth):
        raise FrameCountMismatchError(
            f"{directory}: {len(frame_paths)} frames in {FRAME_DIRECTORY}/ "
            f"but {len(ground_truth)} lines in {gt_path.name}"
        )
    return Sequence(directory.name, tuple(frame_paths), tuple(ground_truth), rotated)


def _frame_order(path: Path) -> tuple[int, str]:
    digits = _DIGITS.findall(path.stem)
    return (int(digits[-1]) if digits else -1, path.name)


def _read_ground_truth(path: Path) -> list[RotatedBBox]:
    boxes = []
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if line.strip():
                boxes.append(parse_ground_truth_line(line, path=path, line_number=line_number))
    return boxes


def parse_ground_truth_line(line: str, *, path: str | os.PathLike = "<string>", line_number: int = 1) -> RotatedBBox:
    """Parses one OTB ground truth line.

    Examples:
        >>> parse_ground_truth_line("10,20,30,40").to_list()
        [23.5, 38.5, 30.0, 40.0, 0.0]

        >>> parse_ground_truth_line("1\\t1\\t2\\t2").center
        Point2(x=0.5, y=0.5)
    """
    try:
        numbers = [float(token) for token in _SEPARATOR.split(line.strip())]
    except ValueError:
        raise GroundTruthParseError(path, line_number, f"expected numbers, got {line.strip()!r}") from None
    if not all(math.isfinite(number) for number in numbers):
        raise GroundTruthParseError(path, line_number, "numbers must be finite")
    if len(numbers) == 4:
        x, y, width, height = numbers
        if width <= 0 or height <= 0:
            raise GroundTruthParseError(path, line_number, f"width and height must be positive, got {width}x{height}")
        return RotatedBBox(Point2(x - 1 + (width - 1) / 2, y - 1 + (height - 1) / 2), width, height)
    if len(numbers) == 8:
        corners = np.array(numbers).reshape(4, 2) - 1
        try:
            return min_area_rect(corners)
        except DegenerateBoxError:
            raise GroundTruthParseError(path, line_number, "polygon has zero area") from None
    raise GroundTruthParseError(path, line_number, f"expected 4 or 8 numbers, got {len(numbers)}")
