import pytest
import torch

from dsnerv.errors import EmptyMask, ShapeMismatch, TooSmall
from dsnerv.metrics.quality import (
    MS_SSIM_WEIGHTS,
    PSNR_CAP,
    bpp,
    format_report,
    masked_psnr,
    ms_ssim,
    ms_ssim_scales,
    ms_ssim_weights,
    ms_ssim_window,
    mse_to_psnr,
    psnr,
    quality_report,
)


def _frame(seed: int, height: int = 64, width: int = 96) -> torch.Tensor:
    return torch.rand(height, width, 3, generator=torch.Generator().manual_seed(seed))


def test_psnr_of_known_error():
    a = torch.zeros(8, 8, 3)
    b = torch.full((8, 8, 3), 0.1)
    assert psnr(a, b) == pytest.approx(20.0)
    assert mse_to_psnr(1e-4) == pytest.approx(40.0)


def test_identical_frames_hit_the_caps():
    frame = _frame(0)
    assert psnr(frame, frame) == PSNR_CAP
    assert ms_ssim(frame, frame) == pytest.approx(1.0)


def test_masked_psnr_ignores_hidden_pixels():
    a = torch.zeros(4, 4, 3)
    b = torch.zeros(4, 4, 3)
    b[0, 0] = 1.0
    mask = torch.ones(4, 4)
    mask[0, 0] = 0.0
    assert masked_psnr(a, b, mask) == PSNR_CAP
    with pytest.raises(EmptyMask):
        masked_psnr(a, b, torch.zeros(4, 4))


def test_ms_ssim_orders_distortions():
    clean = _frame(1)
    noise = torch.randn(clean.shape, generator=torch.Generator().manual_seed(2))
    mild = (clean + 0.02 * noise).clamp(0, 1)
    strong = (clean + 0.2 * noise).clamp(0, 1)
    assert 1.0 >= ms_ssim(clean, mild) > ms_ssim(clean, strong) >= 0.0


def test_ms_ssim_is_symmetric():
    a, b = _frame(3), _frame(4)
    assert ms_ssim(a, b) == pytest.approx(ms_ssim(b, a))


def test_ms_ssim_scale_fallback():
    assert ms_ssim_scales(640, 1280) == 5
    assert ms_ssim_scales(100, 200) == 4
    assert ms_ssim_scales(64, 96) == 3
    assert ms_ssim_scales(33, 64) == 2
    assert ms_ssim_scales(32, 64) == 1
    assert ms_ssim_scales(10, 10) == 1
    with pytest.raises(TooSmall):
        ms_ssim_scales(9, 64)
    small = _frame(5, 16, 32)
    assert 0.0 <= ms_ssim(small, _frame(6, 16, 32)) <= 1.0


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        psnr(torch.zeros(4, 4, 3), torch.zeros(4, 5, 3))


def test_bpp_formula():
    assert bpp(1000, 10, 10, 10) == pytest.approx(8.0)
    with pytest.raises(ValueError):
        bpp(10, 0, 10, 10)


def test_quality_report_averages_per_frame():
    ref = torch.zeros(2, 16, 16, 3)
    pred = ref.clone()
    pred[1] += 0.1
    report = quality_report(pred, ref, indices=[4, 9], bpp=0.25)
    assert report.indices == (4, 9)
    assert report.psnr[0] == PSNR_CAP
    assert report.psnr[1] == pytest.approx(20.0)
    assert report.mean_psnr == pytest.approx(60.0)
    text = format_report(report, title="eval")
    assert text.startswith("eval: 2 frames")
    assert "bpp" in text


def test_black_versus_white_is_zero_db():
    assert psnr(torch.zeros(4, 4, 3), torch.ones(4, 4, 3)) == pytest.approx(0.0)


def _single_scale_ssim(x: torch.Tensor, y: torch.Tensor) -> float:
    # plain global-statistics form of the SSIM formula
    c1, c2 = 0.01**2, 0.03**2
    mx, my = x.mean(), y.mean()
    vx, vy = x.var(unbiased=False), y.var(unbiased=False)
    cov = ((x - mx) * (y - my)).mean()
    return float(((2 * mx * my + c1) * (2 * cov + c2)) / ((mx**2 + my**2 + c1) * (vx + vy + c2)))


def test_constant_image_with_tiny_noise():
    clean = torch.full((64, 64, 3), 0.4, dtype=torch.float64)
    gen = torch.Generator().manual_seed(7)
    noise = torch.randn(clean.shape, generator=gen, dtype=torch.float64)
    noisy = clean + 1e-4 * noise
    assert ms_ssim(clean, noisy) >= 0.99
    assert _single_scale_ssim(clean, noisy) >= 0.99


def test_ms_ssim_window_fits_every_scale():
    assert ms_ssim_window(640, 1280) == 11
    assert ms_ssim_window(64, 96) == 3
    assert ms_ssim_window(16, 32) == 11
    assert ms_ssim_window(10, 10) == 9
    for side in (33, 48, 100, 160, 161, 400):
        window = ms_ssim_window(side, side)
        assert window % 2 == 1
        assert (window - 1) * 16 < side


def test_ms_ssim_weights_are_renormalised():
    assert ms_ssim_weights(5) == pytest.approx(list(MS_SSIM_WEIGHTS), rel=1e-3)
    three = ms_ssim_weights(3)
    assert sum(three) == pytest.approx(1.0)
    assert three[1] / three[0] == pytest.approx(0.2856 / 0.0448)
    assert ms_ssim_weights(1) == [1.0]


def test_ms_ssim_five_scales_on_full_size_frames():
    clean = _frame(8, 176, 192)
    noise = torch.randn(clean.shape, generator=torch.Generator().manual_seed(9))
    noisy = (clean + 0.05 * noise).clamp(0, 1)
    assert ms_ssim_scales(176, 192) == 5
    assert ms_ssim(clean, clean) == pytest.approx(1.0)
    assert 0.0 < ms_ssim(clean, noisy) < 1.0


def test_psnr_drops_as_noise_grows():
    clean = torch.full((32, 32, 3), 0.5, dtype=torch.float64)
    gen = torch.Generator().manual_seed(11)
    pattern = torch.rand(clean.shape, generator=gen, dtype=torch.float64) * 2.0 - 1.0
    amplitudes = (0.01, 0.02, 0.05, 0.1, 0.2)
    scores = [psnr(clean, clean + amplitude * pattern) for amplitude in amplitudes]
    assert all(a > b for a, b in zip(scores, scores[1:]))
