"""Multi-view merging of rendered images.

Per-view accumulated alpha weights act as confidence maps: low-confidence
areas in one view (disocclusions, off-canvas samples) are overlaid by
high-confidence content from the others.
"""

import numpy as np

from .core import ImageBuffer
from .errors import DimensionMismatch, EmptyInput

EPS = 1e-6


def merge_views(renders):
    """Confidence-weighted average of T >= 1 rendered views.

    Returns (ImageBuffer, holes): color is the per-pixel average weighted
    by each view's confidence, the merged confidence is the per-pixel max,
    and `holes` flags pixels where total confidence <= eps.
    """
    if len(renders) == 0:
        raise EmptyInput("no renders to merge")
    shape = renders[0].pixels.shape
    for r in renders:
        if r.pixels.shape != shape:
            raise DimensionMismatch(f"{r.pixels.shape} vs {shape}")

    conf = np.stack([r.confidence for r in renders], axis=0)
    colors = np.stack([r.pixels for r in renders], axis=0)
    total = conf.sum(axis=0)
    merged = (conf[..., None] * colors).sum(axis=0) / np.maximum(total[..., None], EPS)
    holes = total <= EPS
    return ImageBuffer(pixels=merged, confidence=conf.max(axis=0)), holes
