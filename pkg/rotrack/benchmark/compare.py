from collections.abc import Sequence
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np
from scipy import stats

from rotrack.benchmark.metrics import EvalResult


@dataclass(frozen=True)
class SequenceDelta:
    name: str
    baseline_auc: float
    variant_auc: float
    baseline_precision: float
    variant_precision: float

    @property
    def delta_auc(self) -> float:
        return self.variant_auc - self.baseline_auc

    @property
    def delta_precision(self) -> float:
        return self.variant_precision - self.baseline_precision


@dataclass(frozen=True)
class SignTest:
    """Two-sided sign test of per-sequence differences, ties dropped.

    Attributes:
        positive: Sequences where the variant scored higher.
        negative: Sequences where the baseline scored higher.
        ties: Sequences with equal scores.
        p_value: Binomial test p-value, 1.0 when every sequence ties.
    """

    positive: int
    negative: int
    ties: int
    p_value: float

    @classmethod
    def from_deltas(cls, deltas: Sequence[float]) -> "SignTest":
        positive = sum(delta > 0 for delta in deltas)
        negative = sum(delta < 0 for delta in deltas)
        trials = positive + negative
        p_value = float(stats.binomtest(positive, trials, 0.5).pvalue) if trials else 1.0
        return cls(positive, negative, len(deltas) - trials, p_value)


@dataclass(frozen=True)
class ComparisonReport:
    """Per-sequence and mean differences between a baseline and a variant run."""

    baseline_name: str
    variant_name: str
    rows: tuple[SequenceDelta, ...]
    auc_sign_test: SignTest
    precision_sign_test: SignTest

    @property
    def mean_baseline_auc(self) -> float:
        return float(np.mean([row.baseline_auc for row in self.rows]))

    @property
    def mean_variant_auc(self) -> float:
        return float(np.mean([row.variant_auc for row in self.rows]))

    @property
    def mean_baseline_precision(self) -> float:
        return float(np.mean([row.baseline_precision for row in self.rows]))

    @property
    def mean_variant_precision(self) -> float:
        return float(np.mean([row.variant_precision for row in self.rows]))

    @property
    def mean_delta_auc(self) -> float:
        return float(np.mean([row.delta_auc for row in self.rows]))

    @property
    def mean_delta_precision(self) -> float:
        return float(np.mean([row.delta_precision for row in self.rows]))

    def to_dict(self) -> dict[str, Any]:
        return {
            "baseline": self.baseline_name,
            "variant": self.variant_name,
            "sequences": [
                {**asdict(row), "delta_auc": row.delta_auc, "delta_precision": row.delta_precision}
                for row in self.rows
            ],
            "mean": {
                "baseline_auc": self.mean_baseline_auc,
                "variant_auc": self.mean_variant_auc,
                "baseline_precision": self.mean_baseline_precision,
                "variant_precision": self.mean_variant_precision,
                "delta_auc": self.mean_delta_auc,
                "delta_precision": self.mean_delta_precision,
            },
            "sign_test": {"auc": asdict(self.auc_sign_test), "precision": asdict(self.precision_sign_test)},
        }

    def to_table(self) -> str:
        """Markdown table with one row per tracker and the mean success AUC and precision as columns.

        Example:
            | Tracker  | Success (AUC) | Precision |
            |----------|---------------|-----------|
            | baseline | 0.5120        | 0.6509    |
            | D        | 0.5301        | 0.6931    |
        """
        width = max(len("Tracker"), len(self.baseline_name), len(self.variant_name))
        lines = [
            f"| {'Tracker':<{width}} | Success (AUC) | Precision |",
            f"|{'-' * (width + 2)}|---------------|-----------|",
        ]
        for name, auc, precision in (
            (self.baseline_name, self.mean_baseline_auc, self.mean_baseline_precision),
            (self.variant_name, self.mean_variant_auc, self.mean_variant_precision),
        ):
            lines.append(f"| {name:<{width}} | {auc:<13.4f} | {precision:<9.4f} |")
        return "\n".join(lines) + "\n"


def compare(
    baseline: Sequence[EvalResult],
    variant: Sequence[EvalResult],
    *,
    baseline_name: str = "baseline",
    variant_name: str = "variant",
) -> ComparisonReport:
    """Pairs results by sequence name and summarizes how the variant differs from the baseline.

    Raises:
        ValueError: If either side is empty, repeats a sequence, or the two cover different sequences.
    """
    baseline_by_name = _index_by_name(baseline, "baseline")
    variant_by_name = _index_by_name(variant, "variant")
    if set(baseline_by_name) != set(variant_by_name):
        missing = sorted(set(baseline_by_name) ^ set(variant_by_name))
        raise ValueError(f"Baseline and variant must cover the same sequences. Unmatched: {missing}")
    rows = tuple(
        SequenceDelta(
            name=name,
            baseline_auc=baseline_by_name[name].auc,
            variant_auc=variant_by_name[name].auc,
            baseline_precision=baseline_by_name[name].precision_at_20,
            variant_precision=variant_by_name[name].precision_at_20,
        )
        for name in sorted(baseline_by_name)
    )
    return ComparisonReport(
        baseline_name=baseline_name,
        variant_name=variant_name,
        rows=rows,
        auc_sign_test=SignTest.from_deltas([row.delta_auc for row in rows]),
        precision_sign_test=SignTest.from_deltas([row.delta_precision for row in rows]),
    )


def _index_by_name(results: Sequence[EvalResult], side: str) -> dict[str, EvalResult]:
    if not results:
        raise ValueError(f"{side} results must not be empty.")
    by_name = {result.sequence_name: result for result in results}
    if len(by_name) != len(results):
        raise ValueError(f"{side} results repeat a sequence name.")
    return by_name
