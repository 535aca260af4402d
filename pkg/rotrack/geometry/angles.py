import math

Angle = float


def wrap_angle(degrees: float) -> Angle:
    """Wraps an angle into the half-open range (-180, 180].

    Args:
        degrees: Any finite angle in degrees.

    Returns:
        The equivalent angle in (-180, 180].

    Raises:
        ValueError: If the input is not finite.

    Examples:
        >>> wrap_angle(190.0)
        -170.0

        >>> wrap_angle(-180.0)
        180.0
    """
    if not math.isfinite(degrees):
        raise ValueError(f"Angle must be finite. Got: {degrees}")
    wrapped = math.fmod(degrees, 360.0)
    if wrapped <= -180.0:
        wrapped += 360.0
    elif wrapped > 180.0:
        wrapped -= 360.0
    return wrapped


def shortest_arc(degrees: float) -> Angle:
    """Signed shortest rotation equivalent to the given difference of angles."""
    return wrap_angle(degrees)


def circular_distance(a: float, b: float) -> float:
    """Unsigned angular distance between two directions, in [0, 180]."""
    return abs(wrap_angle(a - b))
