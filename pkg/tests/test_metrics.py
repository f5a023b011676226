import numpy as np
import pytest

from fringebos.errors import DegenerateRange, DimensionMismatch
from fringebos.metrics import (
    evaluate,
    rmse_phase,
    ssim_phase,
    sweep_csv,
    sweep_eval,
)
from fringebos.raster import RealField


def _naive_ssim(e, t, L):
    """Double-loop reference: 11x11 Gaussian window, valid positions only."""
    size, sigma = 11, 1.5
    ax = np.arange(size) - 5.0
    g = np.exp(-ax ** 2 / (2 * sigma ** 2))
    k = np.outer(g, g)
    k /= k.sum()
    c1 = (0.01 * L) ** 2
    c2 = (0.03 * L) ** 2
    h, w = e.shape
    vals = []
    for y in range(h - size + 1):
        for x in range(w - size + 1):
            we = e[y:y + size, x:x + size]
            wt = t[y:y + size, x:x + size]
            mu1 = (we * k).sum()
            mu2 = (wt * k).sum()
            s11 = (we * we * k).sum() - mu1 ** 2
            s22 = (wt * wt * k).sum() - mu2 ** 2
            s12 = (we * wt * k).sum() - mu1 * mu2
            vals.append(((2 * mu1 * mu2 + c1) * (2 * s12 + c2))
                        / ((mu1 ** 2 + mu2 ** 2 + c1) * (s11 + s22 + c2)))
    return float(np.mean(vals))


def test_rmse_direct_formula():
    rng = np.random.default_rng(0)
    for _ in range(10):
        e = rng.normal(size=(32, 32))
        t = rng.normal(size=(32, 32))
        got = rmse_phase(RealField(e), RealField(t), margin=0)
        d = e - t
        want = np.sqrt(np.mean((d - d.mean()) ** 2))
        assert abs(got - want) < 1e-12


def test_rmse_piston_invariance():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(24, 24))
    a = RealField(x)
    b = RealField(x + 3.7)  # pure piston
    assert rmse_phase(b, a) < 1e-12


def test_ssim_identity():
    rng = np.random.default_rng(2)
    x = RealField(rng.normal(size=(40, 40)))
    assert ssim_phase(x, x, margin=0) == pytest.approx(1.0, abs=1e-12)


def test_ssim_matches_naive_reference():
    rng = np.random.default_rng(3)
    for trial in range(20):
        t = rng.normal(size=(64, 64)).cumsum(axis=1) * 0.1
        e = t + rng.normal(scale=0.3, size=(64, 64))
        got = ssim_phase(RealField(e), RealField(t), margin=0)
        ep = e - np.mean(e - t)
        L = t.max() - t.min()
        want = _naive_ssim(ep, t, L)
        assert abs(got - want) < 1e-6


def test_ssim_decreases_with_noise():
    rng = np.random.default_rng(4)
    t = rng.normal(size=(64, 64)).cumsum(axis=0) * 0.2
    small = ssim_phase(RealField(t + rng.normal(scale=0.05, size=t.shape)), RealField(t), margin=0)
    large = ssim_phase(RealField(t + rng.normal(scale=1.0, size=t.shape)), RealField(t), margin=0)
    assert large < small <= 1.0


def test_ssim_pair_range_symmetric():
    rng = np.random.default_rng(6)
    a = RealField(rng.normal(size=(48, 48)).cumsum(axis=1) * 0.1)
    b = RealField(a.data + rng.normal(scale=0.2, size=(48, 48)))
    fwd = ssim_phase(a, b, margin=0, range_mode="pair")
    rev = ssim_phase(b, a, margin=0, range_mode="pair")
    assert abs(fwd - rev) < 1e-12
    # default truth-range mode is documented as asymmetric
    assert ssim_phase(a, b, margin=0) != ssim_phase(b, a, margin=0)


def test_metric_shape_mismatch():
    a = RealField(np.zeros((16, 16)))
    b = RealField(np.zeros((16, 17)))
    with pytest.raises(DimensionMismatch):
        rmse_phase(a, b)
    with pytest.raises(DimensionMismatch):
        ssim_phase(a, b)


def test_ssim_flat_truth_rejected():
    a = RealField(np.zeros((32, 32)))
    with pytest.raises(DegenerateRange):
        ssim_phase(a, a, margin=0)


def test_evaluate_reports_piston():
    rng = np.random.default_rng(5)
    t = rng.normal(size=(40, 40)).cumsum(axis=1) * 0.1
    rep = evaluate(RealField(t + 2.0), RealField(t), margin=0)
    assert rep.piston_removed == pytest.approx(2.0, abs=1e-9)
    assert rep.rmse < 1e-9
    assert rep.ssim == pytest.approx(1.0, abs=1e-9)


def test_sweep_csv_shape():
    rows = sweep_eval("ft", "snr_db", [30.0], trials=1, seed=0,
                      mod_kind="uniform", size=128)
    text = sweep_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0].startswith("axis_value,method,rmse_mean")
    assert len(lines) == 2
    assert ",ft," in lines[1]


def test_sweep_reproducible():
    a = sweep_eval("ft", "snr_db", [20.0], trials=2, seed=5,
                   mod_kind="uniform", size=128)
    b = sweep_eval("ft", "snr_db", [20.0], trials=2, seed=5,
                   mod_kind="uniform", size=128)
    assert a == b


def test_sweep_empty_values_rejected():
    with pytest.raises(DegenerateRange):
        sweep_eval("ft", "snr_db", [], trials=1, seed=0)
