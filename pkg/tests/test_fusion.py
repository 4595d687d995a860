import numpy as np
import pytest

from smpi import builder
from smpi.core import Camera, ImageBuffer
from smpi.errors import DimensionMismatch, EmptyInput
from smpi.fusion import merge_views
from smpi.render import render_novel_view


def buf(pixels, conf):
    return ImageBuffer(pixels=pixels, confidence=conf)


def test_single_input_passthrough():
    rng = np.random.default_rng(40)
    b = buf(rng.uniform(size=(8, 8, 3)), rng.uniform(0.1, 1.0, size=(8, 8)))
    merged, holes = merge_views([b])
    assert np.abs(merged.pixels - b.pixels).max() <= 1e-12
    assert (merged.confidence == b.confidence).all()
    assert not holes.any()


def test_two_identical_inputs():
    rng = np.random.default_rng(41)
    b = buf(rng.uniform(size=(8, 8, 3)), np.full((8, 8), 0.5))
    merged, _ = merge_views([b, b])
    assert np.abs(merged.pixels - b.pixels).max() <= 1e-12


def test_zero_confidence_view_is_ignored():
    c = np.full((4, 4, 3), 0.3)
    junk = buf(np.ones((4, 4, 3)), np.zeros((4, 4)))
    good = buf(c, np.full((4, 4), 0.8))
    merged, holes = merge_views([junk, good])
    assert np.abs(merged.pixels - c).max() <= 1e-9
    assert not holes.any()


def test_holes_flagged():
    a = buf(np.ones((4, 4, 3)), np.zeros((4, 4)))
    merged, holes = merge_views([a, a])
    assert holes.all()
    assert (merged.confidence == 0).all()


def test_errors():
    with pytest.raises(EmptyInput):
        merge_views([])
    with pytest.raises(DimensionMismatch):
        merge_views([buf(np.zeros((4, 4, 3)), np.zeros((4, 4))),
                     buf(np.zeros((4, 5, 3)), np.zeros((4, 5)))])


def test_convexity():
    rng = np.random.default_rng(42)
    views = [buf(rng.uniform(size=(8, 8, 3)), rng.uniform(size=(8, 8))) for _ in range(4)]
    merged, holes = merge_views(views)
    stack = np.stack([v.pixels for v in views])
    lo = stack.min(axis=0)
    hi = stack.max(axis=0)
    sel = ~holes
    assert (merged.pixels[sel] >= lo[sel] - 1e-9).all()
    assert (merged.pixels[sel] <= hi[sel] + 1e-9).all()


def test_permutation_invariance():
    rng = np.random.default_rng(43)
    views = [buf(rng.uniform(size=(6, 6, 3)), rng.uniform(size=(6, 6))) for _ in range(3)]
    a, _ = merge_views(views)
    b, _ = merge_views(views[::-1])
    assert np.abs(a.pixels - b.pixels).max() <= 1e-12
    assert (a.confidence == b.confidence).all()


def two_view_box_renders(resolution=(48, 64), shift=0.35):
    """Two source S-MPIs flanking the target pose, both rendered into it."""
    H, W = resolution
    model = builder.scene_model("box", seed=6)
    target = Camera.identity(float(W), float(W), (W - 1) / 2, (H - 1) / 2, resolution)
    views = []
    for tx in (-shift, shift):
        src = Camera(target.fx, target.fy, target.cx, target.cy, np.eye(3),
                     np.array([tx, 0.0, 0.0]), resolution)
        image, depth, masks = builder.rasterize_scene(model, src)
        smpi = builder.build_smpi(builder.SceneGT(image, depth, masks, src))
        img, _ = render_novel_view(smpi, target)
        views.append(img)
    return views


def test_hole_reduction_on_box():
    views = two_view_box_renders()
    holes = [int((v.confidence <= 1e-6).sum()) for v in views]
    assert min(holes) > 0
    _, merged_holes = merge_views(views)
    assert int(merged_holes.sum()) < min(holes)
