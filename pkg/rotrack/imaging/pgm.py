import os

import numpy as np

from rotrack.exceptions import (
    MalformedHeaderError,
    TruncatedPayloadError,
    UnsupportedFormatError,
    UnsupportedMaxvalError,
)
from rotrack.imaging.constants import PGM_COMMENT, PGM_MAGIC, PGM_MAXVAL, PGM_WHITESPACE
from rotrack.imaging.types import Image
from rotrack.utils import write_atomic


def read_pgm(data: bytes) -> Image:
    """Decodes a binary (P5) PGM image with maxval 255.

    Comment lines are accepted between header fields.

    Args:
        data: The raw file contents.

    Returns:
        The decoded image.

    Raises:
        UnsupportedFormatError: If the magic number is not P5.
        MalformedHeaderError: If width, height or maxval are missing or not positive integers.
        UnsupportedMaxvalError: If maxval is not 255.
        TruncatedPayloadError: If fewer than width * height payload bytes follow the header.

    Examples:
        >>> read_pgm(b"P5\\n1 1\\n255\\n\\x00").pixels.tolist()
        [[0.0]]
    """
    if data[:2] != PGM_MAGIC:
        raise UnsupportedFormatError(f"Only binary PGM (P5) is supported. Got magic: {data[:2]!r}")
    position = 2
    fields: list[int] = []
    while len(fields) < 3:
        position = _skip_whitespace_and_comments(data, position)
        start = position
        while position < len(data) and data[position : position + 1] not in PGM_WHITESPACE + PGM_COMMENT:
            position += 1
        token = data[start:position]
        if not token.isdigit():
            raise MalformedHeaderError(f"Header field must be a positive integer. Got: {token!r}")
        fields.append(int(token))
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise MalformedHeaderError(f"Image size must be positive. Got: {width}x{height}")
    if maxval != PGM_MAXVAL:
        raise UnsupportedMaxvalError(f"maxval must be {PGM_MAXVAL}. Got: {maxval}")
    if position >= len(data) or data[position : position + 1] not in PGM_WHITESPACE:
        raise MalformedHeaderError("Header must end with a single whitespace byte.")
    payload = data[position + 1 :]
    if len(payload) < width * height:
        raise TruncatedPayloadError(f"Expected {width * height} payload bytes. Got: {len(payload)}")
    pixels = np.frombuffer(payload[: width * height], dtype=np.uint8).reshape(height, width)
    return Image(pixels)


def _skip_whitespace_and_comments(data: bytes, position: int) -> int:
    while position < len(data):
        byte = data[position : position + 1]
        if byte in PGM_WHITESPACE:
            position += 1
        elif byte == PGM_COMMENT:
            newline = data.find(b"\n", position)
            position = len(data) if newline < 0 else newline + 1
        else:
            break
    return position


def write_pgm(image: Image) -> bytes:
    """Encodes an image as binary PGM without comments.

    Pixels are rounded to the nearest integer and clipped to [0, 255], so integer-valued images
    round-trip bit-exactly through ``read_pgm``.

    Example:
        >>> write_pgm(Image([[0.0]]))
        b'P5\\n1 1\\n255\\n\\x00'
    """
    payload = np.clip(np.rint(image.pixels), 0, PGM_MAXVAL).astype(np.uint8)
    header = b"%s\n%d %d\n%d\n" % (PGM_MAGIC, image.width, image.height, PGM_MAXVAL)
    return header + payload.tobytes()


def read_pgm_file(path: str | os.PathLike) -> Image:
    with open(path, "rb") as f:
        return read_pgm(f.read())


def write_pgm_file(path: str | os.PathLike, image: Image) -> None:
    write_atomic(path, write_pgm(image))
