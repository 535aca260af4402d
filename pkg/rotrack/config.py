import json
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Literal

from rotrack.consistency import ConsistencyParams, scale_factors
from rotrack.exceptions import ConfigError
from rotrack.rotation_bank import MAX_ZETA

TrackerMode = Literal["fixed_template", "updating_template"]
VariantName = Literal["baseline", "D", "DS", "DSR"]

FLAGS_BY_VARIANT: dict[str, dict[str, bool]] = {
    "baseline": {"displacement": False, "scale": False, "rotation": False},
    "D": {"displacement": True, "scale": False, "rotation": False},
    "DS": {"displacement": True, "scale": True, "rotation": False},
    "DSR": {"displacement": True, "scale": True, "rotation": True},
}


@dataclass(frozen=True)
class TrackerConfig:
    """Every knob of a tracker, one flat field per key of the JSON config document.

    Attributes:
        mode: ``fixed_template`` keeps the first-frame exemplar, ``updating_template`` rolls it.
        displacement: Smooth the centroid with the previous motion.
        scale: Search over a scale pyramid and fuse it around the winning scale.
        rotation: Search over rotated exemplars.
        centroid_weight: Weight of the previous centroid in conventional damping.
        angle_weight: Weight of the previous motion direction.
        distance_weight: Weight of the previous motion distance.
        scale_sigma: Width of the Gaussian over scale bins.
        scale_step: Ratio between neighbouring pyramid scales.
        num_scales: Number of pyramid scales.
        scale_damping: Fraction of the winning scale change applied to the box.
        bank_step: Angular spacing of the rotated exemplar bank (fixed mode).
        zeta: Per-frame rotation tried on each side of the model (updating mode).
        rotation_sigma: Width of the Gaussian over rotation bins.
        ratio_epsilon: Added to the displacement in the score-to-displacement ratio, in pixels.
        num_neighbors: Bank entries correlated per frame around the current angle.
        num_candidates: Rotation averages compared by the ratio test.
        exemplar_size: Side of the exemplar patch in pixels.
        search_size: Side of the search patch in pixels.
        context_factor: Exemplar crop side over the geometric mean of the target size.
        windowed: Taper features with a cosine window.
        subpixel: Refine response peaks to subpixel positions before mapping them into the frame.
        model_update_rate: Rolling-average rate of the updating model.
        regularization: Ridge regularizer of the correlation filter.
        label_sigma: Width of the Gaussian training label, in pixels.
    """

    mode: TrackerMode = "fixed_template"
    displacement: bool = False
    scale: bool = False
    rotation: bool = False
    centroid_weight: float = 0.0
    angle_weight: float = 0.01
    distance_weight: float = 0.01
    scale_sigma: float = 1.0
    scale_step: float = 1.0375
    num_scales: int = 3
    scale_damping: float = 0.59
    bank_step: float = 20.0
    zeta: float = 8.0
    rotation_sigma: float = 1.0
    ratio_epsilon: float = 1.0
    num_neighbors: int = 5
    num_candidates: int = 3
    exemplar_size: int = 64
    search_size: int = 128
    context_factor: float = 2.0
    windowed: bool = True
    subpixel: bool = True
    model_update_rate: float = 0.01
    regularization: float = 1e-2
    label_sigma: float = 2.0

    def __post_init__(self) -> None:
        try:
            self.consistency
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if self.mode not in ("fixed_template", "updating_template"):
            raise ConfigError(f"mode must be fixed_template or updating_template. Got: {self.mode}")
        num_bank_steps = round(360.0 / self.bank_step) if self.bank_step > 0 else 0
        if num_bank_steps < 1 or abs(num_bank_steps * self.bank_step - 360.0) > 1e-9:
            raise ConfigError(f"bank_step must divide 360 evenly. Got: {self.bank_step}")
        if not 0 < self.zeta <= MAX_ZETA:
            raise ConfigError(f"zeta must be in (0, {MAX_ZETA}]. Got: {self.zeta}")
        if not 1 <= self.num_neighbors <= num_bank_steps + 1:
            raise ConfigError(f"num_neighbors must be in [1, {num_bank_steps + 1}]. Got: {self.num_neighbors}")
        if self.num_candidates < 1:
            raise ConfigError(f"num_candidates must be at least 1. Got: {self.num_candidates}")
        for name in ("rotation_sigma", "ratio_epsilon", "context_factor", "label_sigma"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive. Got: {getattr(self, name)}")
        if self.exemplar_size < 1:
            raise ConfigError(f"exemplar_size must be at least 1. Got: {self.exemplar_size}")
        if self.search_size <= self.exemplar_size:
            raise ConfigError(f"search_size must exceed exemplar_size. Got: {self.search_size} <= {self.exemplar_size}")
        if not 0.0 <= self.model_update_rate <= 1.0:
            raise ConfigError(f"model_update_rate must be in [0, 1]. Got: {self.model_update_rate}")
        if self.regularization < 0:
            raise ConfigError(f"regularization must be non-negative. Got: {self.regularization}")

    @property
    def consistency(self) -> ConsistencyParams:
        return ConsistencyParams(
            centroid_weight=self.centroid_weight,
            angle_weight=self.angle_weight,
            distance_weight=self.distance_weight,
            scale_sigma=self.scale_sigma,
            scale_step=self.scale_step,
            num_scales=self.num_scales,
            scale_damping=self.scale_damping,
        )

    @property
    def variant(self) -> str:
        """Name of the ablation variant matching the flags, or ``custom``."""
        flags = {"displacement": self.displacement, "scale": self.scale, "rotation": self.rotation}
        return next((name for name, preset in FLAGS_BY_VARIANT.items() if preset == flags), "custom")

    def scale_factors(self) -> list[float]:
        """Search scales used per frame, a single 1.0 when scale search is off."""
        if not self.scale:
            return [1.0]
        return scale_factors(self.num_scales, self.scale_step)

    def with_variant(self, name: str) -> "TrackerConfig":
        """Returns a copy with the flags of an ablation variant.

        Example:
            >>> TrackerConfig().with_variant("DS").variant
            'DS'
        """
        if name not in FLAGS_BY_VARIANT:
            raise ConfigError(f"variant must be one of {list(FLAGS_BY_VARIANT)}. Got: {name}")
        return replace(self, **FLAGS_BY_VARIANT[name])

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, document: dict[str, Any]) -> "TrackerConfig":
        """Builds a config from a flat mapping, missing keys taking their defaults.

        Raises:
            ConfigError: If a key is unknown or a value has the wrong type.
        """
        if not isinstance(document, dict):
            raise ConfigError(f"Config must be a JSON object. Got: {type(document).__name__}")
        types_by_name = {field.name: field.type for field in fields(cls)}
        unknown = sorted(set(document) - set(types_by_name))
        if unknown:
            raise ConfigError(f"Unknown config keys: {unknown}")
        values = {name: _coerce(name, value, types_by_name[name]) for name, value in document.items()}
        return cls(**values)

    @classmethod
    def from_json(cls, path: str | os.PathLike) -> "TrackerConfig":
        try:
            with open(path, encoding="utf-8") as f:
                document = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
        return cls.from_dict(document)


def _coerce(name: str, value: Any, annotation: Any) -> Any:
    if annotation in (bool, "bool"):
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be a boolean. Got: {value!r}")
        return value
    if annotation in (int, "int"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer. Got: {value!r}")
        return value
    if annotation in (float, "float"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number. Got: {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{name} must be a string. Got: {value!r}")
    return value
