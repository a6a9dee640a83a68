"""
Boundary-aware semantic bottleneck: phoneme-span mean pooling followed by a
global scaling factor.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict

import numpy as np

from src.models.annotations import PhonemeAlignment, segment_map
from src.models.errors import ConfigurationError, LengthMismatchError
from src.models.frame_grid import FrameGrid
from src.models.signals import FeatureMatrix

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA = 0.1

# Rounding of the final boundary may add one frame.
ALIGNMENT_SLACK_FRAMES = 1


@dataclass(frozen=True)
class BottleneckConfig:
    """
    Bottleneck settings.

    lambda_ scales the pooled features; pooling can be switched off to
    reproduce the ablation settings.
    """
    lambda_: float = DEFAULT_LAMBDA
    pooling: bool = True

    def __post_init__(self):
        """Validate settings after initialization."""
        if not isinstance(self.lambda_, (int, float)) or isinstance(self.lambda_, bool):
            raise ConfigurationError(f"lambda must be a real number, got {self.lambda_!r}")
        if not math.isfinite(self.lambda_) or self.lambda_ < 0:
            raise ConfigurationError(f"lambda must be finite and >= 0, got {self.lambda_}")
        object.__setattr__(self, "lambda_", float(self.lambda_))

    @classmethod
    def preset(cls, name: str) -> "BottleneckConfig":
        """
        Named ablation setting.

        Args:
            name: One of proposed, strong, disabled, no-pooling, raw

        Raises:
            ConfigurationError: On an unknown preset name
        """
        try:
            lambda_, pooling = BOTTLENECK_PRESETS[name]
        except KeyError:
            raise ConfigurationError(
                f"unknown bottleneck preset '{name}'; choose from {', '.join(BOTTLENECK_PRESETS)}"
            ) from None
        return cls(lambda_=lambda_, pooling=pooling)


BOTTLENECK_PRESETS: Dict[str, tuple] = {
    "proposed": (0.1, True),
    "strong": (1.0, True),
    "disabled": (0.0, True),
    "no-pooling": (0.1, False),
    "raw": (1.0, False),
}


@dataclass(frozen=True, eq=False)
class BottleneckResult:
    """Bottleneck output plus diagnostics for reporting."""
    features: FeatureMatrix
    segment_ids: np.ndarray
    segment_count: int
    pooling_residual: float


class BottleneckService:
    """
    Service applying the semantic bottleneck to frame-level features.

    Single Responsibility: Pools and scales feature rows; no file access.
    """

    def pool_by_segments(self, features: FeatureMatrix, segment_ids) -> FeatureMatrix:
        """
        Replace every row by the mean of the rows sharing its segment id.

        Means are accumulated in float64 with numpy's pairwise summation over
        each segment's contiguous column block.

        Args:
            features: Input rows
            segment_ids: One integer id per row

        Returns:
            Pooled matrix of the same shape

        Raises:
            LengthMismatchError: If the id count differs from the row count
        """
        ids = np.asarray(segment_ids).reshape(-1)
        if ids.shape[0] != features.n_frames:
            raise LengthMismatchError(
                f"{ids.shape[0]} segment ids for {features.n_frames} feature frames"
            )
        data = features.data
        pooled = np.empty_like(data)
        if features.n_frames == 0:
            return FeatureMatrix(pooled)

        order = np.argsort(ids, kind="stable")
        sorted_ids = ids[order]
        starts = np.flatnonzero(np.r_[True, sorted_ids[1:] != sorted_ids[:-1]])
        stops = np.r_[starts[1:], sorted_ids.shape[0]]
        for start, stop in zip(starts, stops):
            rows = order[start:stop]
            block = np.ascontiguousarray(data[rows].T)
            pooled[rows] = block.sum(axis=1) / block.shape[1]
        return FeatureMatrix(pooled)

    def apply_scaling(self, features: FeatureMatrix, config: BottleneckConfig) -> FeatureMatrix:
        """Multiply every element by lambda."""
        return FeatureMatrix(features.data * config.lambda_)

    def bottleneck(
        self,
        features: FeatureMatrix,
        alignment: PhonemeAlignment,
        grid: FrameGrid,
        config: BottleneckConfig,
    ) -> FeatureMatrix:
        """
        Segment map, then pooling, then scaling.

        Frames beyond the alignment form a trailing segment of their own.
        """
        return self.run(features, alignment, grid, config).features

    def run(
        self,
        features: FeatureMatrix,
        alignment: PhonemeAlignment,
        grid: FrameGrid,
        config: BottleneckConfig,
    ) -> BottleneckResult:
        """
        Bottleneck with diagnostics.

        Returns:
            BottleneckResult with the output matrix, the per-frame segment ids,
            the segment count and the mean squared deviation removed by pooling
        """
        ids = segment_map(alignment, features.n_frames, grid)
        covered = grid.frame_count(alignment.end)
        if covered > features.n_frames + ALIGNMENT_SLACK_FRAMES:
            raise LengthMismatchError(
                f"alignment covers {covered} frames but features hold {features.n_frames}"
            )
        if covered < features.n_frames:
            logger.info("%d frames past the alignment pooled as a trailing segment", features.n_frames - covered)

        if config.pooling:
            pooled = self.pool_by_segments(features, ids)
            residual = float(np.mean((features.data - pooled.data) ** 2)) if features.n_frames else 0.0
        else:
            pooled, residual = features, 0.0

        segment_count = int(ids[-1]) + 1 if ids.shape[0] else 0
        return BottleneckResult(self.apply_scaling(pooled, config), ids, segment_count, residual)
