import math

import numpy as np
import pytest

import fracdiff as fd


def test_grid_normalizes_terminal_variance():
    g = fd.space_grid(0.25)
    assert g.m == 40
    assert len(g.x) == len(g.q) == 40
    assert fd.approx_covariance(g, 1.0, 1.0) == pytest.approx(1.0, abs=1e-9)
    assert fd.fbm_covariance(0.25, 1.0, 1.0) == pytest.approx(1.0)


def test_noise_paths_shape():
    g = fd.space_grid(0.75)
    times, w = fd.simulate_noise(g, K=2000, n_paths=8, seed=3, record_stride=500)
    assert list(times) == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
    assert w.shape == (8, 5)
    assert np.all(w[:, 0] == 0.0)


def test_brownian_tables_match_closed_form():
    tb = fd.kernel_tables(0.5, "FVP")
    t = np.asarray(tb.times)
    beta_int = 0.1 * t + 0.5 * (20 - 0.1) * t**2
    assert np.max(np.abs(np.asarray(tb.sigma2) - (1 - np.exp(-beta_int)))) < 1e-3


def test_marginal_reparameterization():
    tb = fd.kernel_tables(0.25, "SubFVP", K=2000)
    x0 = np.array([[1.0, -2.0], [0.5, 0.0]])
    xt, xi = fd.sample_marginal(tb, x0, np.array([0.3, 0.9]), seed=1)
    for r, t in enumerate([0.3, 0.9]):
        np.testing.assert_allclose(xt[r], tb.c(t) * x0[r] + math.sqrt(tb.var(t)) * xi[r], rtol=1e-12)


def test_brownian_analytic_sampling():
    s = fd.sample_gaussian_reference(0.5, n=2000, steps=500, seed=2)
    assert s.shape == (2000, 1)
    assert abs(s.mean()) < 0.1
    assert abs(s.var() - 1.0) < 0.15


def test_unsupported_method():
    with pytest.raises(fd.UnsupportedError):
        fd.sample_gaussian_reference(0.5, method="gSDE", n=4, steps=2)
    assert issubclass(fd.UnsupportedError, fd.FracdiffError)


def test_metrics_on_identical_sets():
    pts = fd.half_moons(300, seed=4)
    m = fd.evaluate(pts, pts)
    assert m["wsd"] == 0.0
    assert m["ip"] == 1.0 and m["ir"] == 1.0
    assert 1.7 < m["vs"] < 2.0


def test_train_and_sample(tmp_path):
    cfg = f"H = 0.5\nsteps = 20\nbatch_size = 32\nn_train = 200\nK = 1000\nout = {tmp_path}\n"
    ckpt = fd.train(cfg)
    s = fd.sample(ckpt, method="ODE", n=16, steps=20, seed=1)
    assert s.shape == (16, 2)
    assert np.all(np.isfinite(s))
    with pytest.raises(fd.ConfigError):
        fd.train("kind = FVP\n")
    with pytest.raises(fd.UnsupportedError):
        fd.train("H = 0.6\n")
