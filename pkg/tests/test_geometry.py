import math

import numpy as np
import pytest

from steinsense import min_samples, width_descent_cone_sparse_proxy, width_sparse_sphere

CHI8_MEAN = math.sqrt(2.0) * math.gamma(4.5) / math.gamma(4.0)


def test_full_support_is_chi_mean():
    """s = d turns the sup into the norm of the whole gaussian vector."""
    est = width_sparse_sphere(8, 8, n_samples=200_000, seed=3)
    assert abs(est.mean - CHI8_MEAN) < 4 * est.stderr


def test_one_sparse_one_dim():
    est = width_sparse_sphere(1, 1, n_samples=200_000, seed=5)
    assert abs(est.mean - math.sqrt(2.0 / math.pi)) < 4 * est.stderr


def test_monotone_in_sparsity():
    means = [width_sparse_sphere(32, s, n_samples=4000, seed=11).mean for s in (1, 2, 4, 8, 32)]
    assert all(a < b for a, b in zip(means, means[1:]))


def test_deterministic():
    a = width_sparse_sphere(16, 3, n_samples=5000, seed=7)
    b = width_sparse_sphere(16, 3, n_samples=5000, seed=7)
    assert a.mean == b.mean and a.stderr == b.stderr
    c = width_sparse_sphere(16, 3, n_samples=5000, seed=8)
    assert a.mean != c.mean


def test_stderr_shrinks_with_samples():
    small = width_sparse_sphere(16, 3, n_samples=2000, seed=1)
    large = width_sparse_sphere(16, 3, n_samples=32_000, seed=1)
    assert large.stderr < small.stderr
    assert large.n_samples == 32_000


def test_proxy_doubles_sparsity():
    prox = width_descent_cone_sparse_proxy(16, 3, n_samples=4000, seed=9)
    same = width_sparse_sphere(16, 6, n_samples=4000, seed=9)
    assert prox.mean == same.mean
    assert "descent_cone_proxy" in prox.set_descriptor
    assert "6-sparse" in prox.set_descriptor


def test_proxy_caps_at_dimension():
    prox = width_descent_cone_sparse_proxy(8, 6, n_samples=3000, seed=2)
    full = width_sparse_sphere(8, 8, n_samples=3000, seed=2)
    assert prox.mean == full.mean


def test_min_samples_rounds_up():
    est = width_sparse_sphere(64, 4, n_samples=6000, seed=4)
    assert min_samples(est) == math.ceil(est.mean**2)
    assert min_samples(est) >= est.mean**2


def test_sparsity_bounds_checked():
    with pytest.raises(ValueError):
        width_sparse_sphere(8, 0)
    with pytest.raises(ValueError):
        width_sparse_sphere(8, 9)


def test_to_dict_keys():
    est = width_sparse_sphere(8, 2, n_samples=1000, seed=0)
    d = est.to_dict()
    assert set(d) == {"mean", "stderr", "n", "set"}
