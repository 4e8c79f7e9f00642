import numpy as np
import pytest
import torch

from guigen.config import OracleConfig
from guigen.data import Element, ElementClass, Wireframe
from guigen.scanpath import (
    flow_from_order,
    predict_scanpath,
    predict_scanpath_np,
    saliency_map,
)
from guigen.softdtw import soft_dtw_batch

from oracles import central_difference_gradient


def _constant_image(value=0.2, size=16):
    return np.full((size, size, 3), value, dtype=np.float32)


def _square_image(size=16, lo=-0.8, hi=0.9, r0=2, r1=6, c0=9, c1=13):
    img = np.full((size, size, 3), lo, dtype=np.float32)
    img[r0:r1, c0:c1] = hi
    return img


def test_saliency_normalized_and_finite():
    rng = np.random.default_rng(0)
    img = rng.uniform(-1, 1, (16, 16, 3)).astype(np.float32)
    s = saliency_map(img)
    assert s.shape == (16, 16)
    assert torch.isfinite(s).all()
    assert (s >= 0).all()
    assert s.sum().item() == pytest.approx(1.0, abs=1e-6)


def test_constant_image_saliency_is_pure_center_bias():
    cfg = OracleConfig()
    s = saliency_map(_constant_image(), cfg).numpy()
    h, w = s.shape
    xs = (np.arange(w) + 0.5) / w
    ys = (np.arange(h) + 0.5) / h
    center = np.exp(
        -((xs[None, :] - 0.5) ** 2 + (ys[:, None] - 0.5) ** 2) / (2 * cfg.center_sigma**2)
    )
    expected = cfg.w_center * center
    expected /= expected.sum()
    assert np.allclose(s, expected, atol=1e-7)
    peak = np.unravel_index(s.argmax(), s.shape)
    assert peak in {(7, 7), (7, 8), (8, 7), (8, 8)}  # central pixels of 16x16


def test_bright_square_attracts_argmax():
    img = _square_image()
    s = saliency_map(img).numpy()
    i, j = np.unravel_index(s.argmax(), s.shape)
    # peak within the square's boundary region (edges included, 1px halo)
    assert 1 <= i <= 6 and 8 <= j <= 13


def test_nonfinite_input_rejected():
    img = _constant_image()
    img[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        saliency_map(img)


def test_constant_image_first_fixation_center():
    path = predict_scanpath_np(_constant_image(), OracleConfig(k_fixations=1))
    assert path.shape == (1, 2)
    assert path[0] == pytest.approx([0.5, 0.5], abs=1e-6)


def test_single_element_low_tau_fixates_peak():
    img = _square_image()
    cfg = OracleConfig(k_fixations=1, tau=0.005)
    s = saliency_map(img).numpy()
    i, j = np.unravel_index(s.argmax(), s.shape)
    px, py = predict_scanpath_np(img, cfg)[0]
    assert px == pytest.approx((j + 0.5) / 16, abs=0.08)
    assert py == pytest.approx((i + 0.5) / 16, abs=0.08)


def test_stronger_element_fixated_first():
    # Elements sized near the inhibition radius (4 px = 0.125 at 32x32): the
    # first fixation suppresses the whole left element so the right wins next.
    img = np.full((32, 32, 3), -0.9, dtype=np.float32)
    img[14:18, 6:10] = 0.9  # left: full-range contrast
    img[14:18, 22:26] = 0.0  # right: half-range contrast
    path = predict_scanpath_np(img, OracleConfig(k_fixations=2))
    assert path[0, 0] < 0.4  # first fixation on the left element
    assert path[1, 0] > 0.6  # second on the right element


def test_inhibition_separates_first_two_fixations():
    # Two unequal peaks, tau <= 0.05: consecutive fixations at least r/2 apart.
    img = np.full((32, 32, 3), -1.0, dtype=np.float32)
    img[12:20, 4:10] = 1.0
    img[12:20, 24:30] = 0.0
    for tau in (0.05, 0.02):
        path = predict_scanpath_np(img, OracleConfig(k_fixations=2, tau=tau))
        sep = float(np.linalg.norm(path[0] - path[1]))
        assert sep >= OracleConfig().inhibition_radius / 2


def test_scanpath_shape_bounds_and_determinism():
    rng = np.random.default_rng(1)
    img = rng.uniform(-1, 1, (16, 16, 3)).astype(np.float32)
    p1 = predict_scanpath_np(img)
    p2 = predict_scanpath_np(img)
    assert p1.shape == (6, 2)
    assert np.array_equal(p1, p2)
    assert (p1 >= 0).all() and (p1 <= 1).all()


def test_batched_matches_single():
    rng = np.random.default_rng(2)
    imgs = rng.uniform(-1, 1, (3, 16, 16, 3)).astype(np.float32)
    batch = predict_scanpath(imgs).numpy()
    for b in range(3):
        single = predict_scanpath(imgs[b]).numpy()
        assert np.allclose(batch[b], single, atol=1e-6)


def test_gradient_through_oracle_matches_finite_differences():
    # d softDTW(predict_scanpath(img), target) / d img on an 8x8 image
    rng = np.random.default_rng(5)
    img0 = rng.uniform(-0.5, 0.5, (3, 8, 8)).astype(np.float64)
    target = torch.tensor(rng.random((1, 6, 2)))
    cfg = OracleConfig()

    def objective(arr):
        t = torch.tensor(arr, dtype=torch.float64)[None]
        path = predict_scanpath(t, cfg)
        return soft_dtw_batch(path.double(), target, 0.1)[0].item()

    x = torch.tensor(img0, requires_grad=True)
    path = predict_scanpath(x[None], cfg)
    soft_dtw_batch(path.double(), target, 0.1).sum().backward()
    analytic = x.grad.numpy()

    numeric = central_difference_gradient(objective, img0, eps=1e-5)
    denom = max(np.abs(numeric).max(), 1e-12)
    rel = np.abs(analytic - numeric).max() / denom
    assert rel < 1e-3


def test_oracle_config_validation():
    with pytest.raises(ValueError):
        predict_scanpath(_constant_image(), OracleConfig(k_fixations=0))
    with pytest.raises(ValueError):
        predict_scanpath(_constant_image(), OracleConfig(tau=0.0))


# -- flow_from_order ------------------------------------------------------------

def _wireframe():
    return Wireframe(
        elements=[
            Element(ElementClass.BUTTON, (0.1, 0.1, 0.3, 0.2), 0),
            Element(ElementClass.TEXT, (0.4, 0.4, 0.8, 0.6), 1),
            Element(ElementClass.IMAGE, (0.2, 0.7, 0.6, 0.9), 2),
        ],
        device="mobile",
    )


def test_flow_from_order_centers_and_padding():
    wf = _wireframe()
    path = flow_from_order(wf, [2, 0], k=6)
    assert path.shape == (6, 2)
    assert path[0] == pytest.approx([0.4, 0.8])
    assert path[1] == pytest.approx([0.2, 0.15])
    for i in range(2, 6):
        assert np.array_equal(path[i], path[1])


def test_flow_from_order_validation():
    wf = _wireframe()
    with pytest.raises(ValueError):
        flow_from_order(wf, [])
    with pytest.raises(ValueError):
        flow_from_order(wf, [0, 0])
    with pytest.raises(ValueError):
        flow_from_order(wf, [3])
    with pytest.raises(ValueError):
        flow_from_order(wf, [-1])
    with pytest.raises(ValueError):
        flow_from_order(wf, [0, 1, 2, 0, 1, 2, 0])
