"""
Service building and querying frame-level technique matrices.
"""

import logging
from typing import Optional

import numpy as np

from src.models.annotations import LabelVocabulary, TechniqueSegmentFile
from src.models.errors import ValidationError
from src.models.frame_grid import FrameGrid, seconds_to_frame_span
from src.models.technique_matrix import TechniqueMatrix

logger = logging.getLogger(__name__)


class TechniqueService:
    """
    Service for the technique control signal.

    Single Responsibility: Aligns technique segments to the frame grid.
    """

    def build_matrix(
        self,
        segments: TechniqueSegmentFile,
        vocab: Optional[LabelVocabulary],
        n_frames: int,
        grid: FrameGrid,
    ) -> TechniqueMatrix:
        """
        Rasterize technique segments onto the frame grid.

        bits[k][n] is 1 iff frame n lies in the frame span of some segment of
        technique k; spans reaching past n_frames are clipped.

        Args:
            segments: Parsed technique segments
            vocab: Row order of the matrix, the segments' vocabulary when None
            n_frames: Number of frames N
            grid: Frame grid

        Returns:
            K x N technique matrix

        Raises:
            UnknownLabelError: If a segment technique is missing from vocab
        """
        if n_frames < 0:
            raise ValidationError(f"n_frames must be >= 0, got {n_frames}")
        vocab = vocab or segments.vocab
        bits = np.zeros((len(vocab), n_frames), dtype=np.uint8)
        for technique, rows in segments.by_technique().items():
            if not rows:
                continue
            k = vocab.index(technique)
            logger.debug("rasterizing %d '%s' segment(s) into row %d", len(rows), technique, k)
            for row in rows:
                a, b = seconds_to_frame_span(row.start, row.end, grid)
                if a >= n_frames:
                    logger.debug("'%s' segment at %.6f s lies past frame %d", technique, row.start, n_frames)
                    continue
                bits[k, a:min(b, n_frames)] = 1
        return TechniqueMatrix(vocab, bits)

    def mask(self, matrix: TechniqueMatrix, technique: str) -> np.ndarray:
        """
        Frame mask of one technique.

        Raises:
            UnknownLabelError: If the technique is not in the matrix vocabulary
        """
        return matrix.mask(technique)
