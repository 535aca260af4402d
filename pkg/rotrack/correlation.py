from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import TypeVar

import numpy as np
from scipy import signal

from rotrack.geometry.types import Point2
from rotrack.imaging.types import Image, Patch
from rotrack.imaging.utils import cosine_window

_STD_EPSILON = 1e-6

Model = TypeVar("Model", "FeatureMap", "Filter", Image)


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Features of a patch as a (channels, height, width) grid.

    A 2D input is treated as a single channel.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 2:
            values = values[np.newaxis]
        if values.ndim != 3 or 0 in values.shape:
            raise ValueError(f"FeatureMap must have shape (channels, height, width). Got: {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("FeatureMap values must be finite.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def channels(self) -> int:
        return int(self.values.shape[0])

    @property
    def height(self) -> int:
        return int(self.values.shape[1])

    @property
    def width(self) -> int:
        return int(self.values.shape[2])

    @property
    def size(self) -> tuple[int, int]:
        return (self.height, self.width)


@dataclass(frozen=True, eq=False)
class Filter:
    """A correlation filter held in the frequency domain.

    Attributes:
        spectrum: Complex (channels, height, width) grid, already conjugated so that the response
            to a search spectrum X is ``ifft2(sum_c spectrum_c * X_c)``.
        size: Spatial (height, width) of the filter.
        lam: Regularizer the filter was trained with.
        scale: Multiplier applied to the response.
        bias: Offset added to the response.
    """

    spectrum: np.ndarray
    size: tuple[int, int]
    lam: float
    scale: float = 1.0
    bias: float = 0.0

    def __post_init__(self) -> None:
        spectrum = np.array(self.spectrum, dtype=np.complex128)
        if spectrum.ndim != 3 or spectrum.shape[1:] != tuple(self.size):
            raise ValueError(f"Filter spectrum shape {spectrum.shape} does not match size {self.size}")
        spectrum.setflags(write=False)
        object.__setattr__(self, "spectrum", spectrum)
        object.__setattr__(self, "size", (int(self.size[0]), int(self.size[1])))

    @property
    def channels(self) -> int:
        return int(self.spectrum.shape[0])


@dataclass(frozen=True, eq=False)
class ResponseMap:
    """Correlation scores over candidate shifts.

    The peak is derived from the scores on construction: the maximum value and its first
    row-major location, reported as ``Point2(column, row)``.
    """

    scores: np.ndarray
    scale_index: int = 0
    rotation_index: int = 0
    peak_location: Point2 = field(init=False)
    peak_value: float = field(init=False)

    def __post_init__(self) -> None:
        scores = np.array(self.scores, dtype=np.float64)
        if scores.ndim != 2 or scores.size == 0:
            raise ValueError(f"Scores must be a non-empty 2D grid. Got shape: {scores.shape}")
        scores.setflags(write=False)
        row, col = np.unravel_index(int(np.argmax(scores)), scores.shape)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "peak_location", Point2(float(col), float(row)))
        object.__setattr__(self, "peak_value", float(scores[row, col]))

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.scores.shape[0]), int(self.scores.shape[1]))

    def subpixel_peak(self) -> Point2:
        """Peak location refined per axis by a parabola through the peak and its two neighbours.

        An axis is left unrefined when the peak sits on its border or its neighbourhood is flat.

        Examples:
            >>> ResponseMap(np.array([[0.0, 1.0, 0.5]])).subpixel_peak().x
            1.1666666666666667

            >>> ResponseMap(np.array([[1.0, 0.5]])).subpixel_peak()
            Point2(x=0.0, y=0.0)
        """
        col, row = int(self.peak_location.x), int(self.peak_location.y)
        dx = _parabola_offset(self.scores[row, :], col)
        dy = _parabola_offset(self.scores[:, col], row)
        return Point2(col + dx, row + dy)


def _parabola_offset(scores: np.ndarray, index: int) -> float:
    if not 0 < index < len(scores) - 1:
        return 0.0
    left, center, right = scores[index - 1], scores[index], scores[index + 1]
    curvature = left - 2 * center + right
    if curvature >= 0:
        return 0.0
    return float(0.5 * (left - right) / curvature)


def feature_transform(patch: Image, windowed: bool = False) -> FeatureMap:
    """Normalizes a patch to zero mean and unit deviation, optionally tapered by a cosine window.

    Example:
        >>> float(feature_transform(Image(np.full((4, 4), 9.0))).values.max())
        0.0
    """
    pixels = patch.pixels
    values = (pixels - pixels.mean()) / (pixels.std() + _STD_EPSILON)
    if windowed:
        values = values * cosine_window(patch.width, patch.height)
    return FeatureMap(values)


def xcorr_fft(template: FeatureMap, search: FeatureMap, scale_index: int = 0, rotation_index: int = 0) -> ResponseMap:
    """Cross-correlates a template over every position where it fits inside the search map.

    Score (i, j) is ``sum_c sum_uv template[c, u, v] * search[c, i + u, j + v]``, so the
    result has shape ``search - template + 1`` per axis.

    Raises:
        ValueError: If channel counts differ or the template is larger than the search map.
    """
    if template.channels != search.channels:
        raise ValueError(f"Channel counts must match. Got: {template.channels} and {search.channels}")
    if template.height > search.height or template.width > search.width:
        raise ValueError(f"Template {template.size} must fit inside search {search.size}")
    scores = sum(
        signal.fftconvolve(search_channel, template_channel[::-1, ::-1], mode="valid")
        for template_channel, search_channel in zip(template.values, search.values)
    )
    return ResponseMap(np.asarray(scores), scale_index=scale_index, rotation_index=rotation_index)


def gaussian_label(size: int, sigma: float) -> np.ndarray:
    """Gaussian training target peaking at 1.0 on the center index ``size // 2``.

    Examples:
        >>> round(float(gaussian_label(3, 1.0)[0, 0]), 4)
        0.3679

        >>> float(gaussian_label(4, 2.0)[2, 2])
        1.0
    """
    if size < 1:
        raise ValueError(f"size must be at least 1. Got: {size}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive. Got: {sigma}")
    return _gaussian_label(size, float(sigma)).copy()


@lru_cache(maxsize=32)
def _gaussian_label(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size) - size // 2
    squared = offsets[:, np.newaxis] ** 2 + offsets[np.newaxis, :] ** 2
    return np.exp(-squared / (2 * sigma**2))


def train_filter(exemplar: FeatureMap, label: np.ndarray, lam: float) -> Filter:
    """Solves the Fourier-domain ridge regression mapping the exemplar onto the label.

    Per frequency bin the filter is ``conj(Z_c) * Y / (sum_c |Z_c|^2 + lam)``. Bins whose
    denominator vanishes get a zero filter.

    Args:
        exemplar: Training features.
        label: Desired response with the exemplar's spatial size.
        lam: Non-negative regularizer.

    Returns:
        The trained filter with scale 1 and bias 0.

    Raises:
        ValueError: If lam is negative or the label size differs from the exemplar.
    """
    if lam < 0:
        raise ValueError(f"lam must be non-negative. Got: {lam}")
    label = np.asarray(label, dtype=np.float64)
    if label.shape != exemplar.size:
        raise ValueError(f"Label shape {label.shape} must match exemplar size {exemplar.size}")
    exemplar_spectrum = np.fft.fft2(exemplar.values, axes=(-2, -1))
    label_spectrum = np.fft.fft2(label)
    denominator = np.sum(np.abs(exemplar_spectrum) ** 2, axis=0) + lam
    numerator = np.conj(exemplar_spectrum) * label_spectrum
    spectrum = np.zeros_like(numerator)
    np.divide(numerator, denominator, out=spectrum, where=denominator > 0)
    return Filter(spectrum, size=exemplar.size, lam=float(lam))


def filter_respond(
    correlation_filter: Filter, search: FeatureMap, scale_index: int = 0, rotation_index: int = 0
) -> ResponseMap:
    """Applies a filter to search features of the same size, as a circular response.

    Raises:
        ValueError: If the search size or channel count differs from the filter's.
    """
    if search.size != correlation_filter.size or search.channels != correlation_filter.channels:
        raise ValueError(
            f"Search {search.channels}x{search.size} must match filter "
            f"{correlation_filter.channels}x{correlation_filter.size}"
        )
    search_spectrum = np.fft.fft2(search.values, axes=(-2, -1))
    response = np.real(np.fft.ifft2(np.sum(correlation_filter.spectrum * search_spectrum, axis=0)))
    scores = correlation_filter.scale * response + correlation_filter.bias
    return ResponseMap(scores, scale_index=scale_index, rotation_index=rotation_index)


def update_model(old: Model, new: Model, rate: float) -> Model:
    """Rolling average ``(1 - rate) * old + rate * new`` of two models of the same kind.

    Works for feature maps, filters and image patches. Metadata such as a patch's provenance
    is taken from ``new``.

    Raises:
        ValueError: If rate is outside [0, 1], the kinds differ or the dimensions differ.

    Example:
        >>> blended = update_model(Image(np.zeros((2, 2))), Image(np.full((2, 2), 10.0)), 0.01)
        >>> blended.pixels.tolist()
        [[0.1, 0.1], [0.1, 0.1]]
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be in [0, 1]. Got: {rate}")
    if type(old) is not type(new):
        raise ValueError(f"Models must be of the same kind. Got: {type(old).__name__}, {type(new).__name__}")
    attribute = _BLENDED_ATTRIBUTE_BY_TYPE.get(type(new))
    if attribute is None:
        raise ValueError(f"Unsupported model type: {type(new).__name__}")
    old_values, new_values = getattr(old, attribute), getattr(new, attribute)
    if old_values.shape != new_values.shape:
        raise ValueError(f"Model dimensions must match. Got: {old_values.shape} and {new_values.shape}")
    return replace(new, **{attribute: (1.0 - rate) * old_values + rate * new_values})


_BLENDED_ATTRIBUTE_BY_TYPE: dict[type, str] = {
    FeatureMap: "values",
    Filter: "spectrum",
    Image: "pixels",
    Patch: "pixels",
}
