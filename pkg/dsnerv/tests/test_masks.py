import pytest
import torch

from dsnerv.errors import ConfigMismatch, MaskTooLarge
from dsnerv.io.masks import (
    MaskKind,
    MaskSpec,
    apply_mask,
    build_masks,
    central_box,
    mask_boxes,
)


def test_central_box_is_centered_quarter():
    assert central_box(640, 1280) == (240, 480, 160, 320)


def test_central_mask_hides_one_box():
    masks = build_masks(MaskSpec(MaskKind.CENTRAL), 3, 32, 64, seed=0)
    assert masks.shape == (3, 32, 64)
    assert float((masks == 0).sum()) == 3 * 8 * 16
    assert torch.equal(masks[0], masks[2])


def test_disperse_boxes_are_disjoint_and_seeded():
    spec = MaskSpec(MaskKind.DISPERSE, box_count=5, box_size=8)
    boxes = mask_boxes(spec, 2, 64, 96, seed=4)[0]
    assert len(boxes) == 5
    masks = build_masks(spec, 2, 64, 96, seed=4)
    assert float((masks[0] == 0).sum()) == 5 * 8 * 8
    assert torch.equal(masks, build_masks(spec, 2, 64, 96, seed=4))
    assert not torch.equal(masks, build_masks(spec, 2, 64, 96, seed=5))


def test_vary_per_frame_changes_boxes():
    spec = MaskSpec(MaskKind.DISPERSE, box_count=3, box_size=6, vary_per_frame=True)
    masks = build_masks(spec, 4, 48, 48, seed=1)
    assert any(not torch.equal(masks[0], masks[t]) for t in range(1, 4))


def test_mask_too_large():
    with pytest.raises(MaskTooLarge):
        build_masks(MaskSpec(box_count=1, box_size=50), 2, 32, 64, seed=0)
    with pytest.raises(MaskTooLarge):
        build_masks(MaskSpec(box_count=9, box_size=16), 2, 32, 32, seed=0)
    with pytest.raises(ConfigMismatch):
        MaskSpec(box_count=0)


def test_apply_mask_keeps_clean_reference(tiny_video):
    spec = MaskSpec(MaskKind.DISPERSE, box_count=2, box_size=8)
    masked = apply_mask(tiny_video, spec, seed=0)
    assert torch.equal(masked.reference, tiny_video.frames)
    hidden = masked.masks == 0
    assert float(masked.frames[hidden].abs().max()) == 0.0
    visible = masked.masks == 1
    torch.testing.assert_close(masked.frames[visible], tiny_video.frames[visible])


def test_mask_spec_mapping():
    spec = MaskSpec.from_mapping({"kind": "central", "vary_per_frame": True})
    assert spec.kind is MaskKind.CENTRAL
    assert MaskSpec.from_mapping(spec.to_mapping()) == spec
