"""Gaussian mean width of sparse-sphere sets and the sample-size gate.

The mean width of a set T is E sup_{t in T} <g, t> for a standard gaussian
g. For T = {s-sparse unit vectors} the per-draw supremum has a closed form:
the l2 norm of the s largest-magnitude entries of g. The width of the
descent-cone set is upper bounded through the 2s-sparse superset (a
difference of two s-sparse vectors is 2s-sparse), which keeps the direction
of the sample-size requirement valid.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from ._util import make_rng

__all__ = [
    "WidthEstimate",
    "width_sparse_sphere",
    "width_descent_cone_sparse_proxy",
    "min_samples",
]

DEFAULT_WIDTH_SAMPLES = 10_000
_CHUNK_ROWS = 8192


@dataclasses.dataclass(frozen=True)
class WidthEstimate:
    """Monte Carlo mean width with its standard error."""

    mean: float
    stderr: float
    n_samples: int
    set_descriptor: str

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "n": self.n_samples,
            "set": self.set_descriptor,
        }


def _sparse_sup_norms(d: int, s: int, n_samples: int, seed: int) -> tuple:
    """Mean and stderr of the per-draw sup over the s-sparse unit sphere."""
    rng = make_rng(seed)
    total = 0.0
    total_sq = 0.0
    left = n_samples
    while left > 0:
        take = min(_CHUNK_ROWS, left)
        g = rng.standard_normal((take, d))
        np.abs(g, out=g)
        if s < d:
            top = np.partition(g, d - s, axis=1)[:, d - s :]
        else:
            top = g
        sups = np.sqrt(np.sum(top * top, axis=1))
        total += float(np.sum(sups))
        total_sq += float(np.sum(sups * sups))
        left -= take
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    return mean, math.sqrt(var / n_samples)


def width_sparse_sphere(d: int, s: int, n_samples: int = DEFAULT_WIDTH_SAMPLES,
                        seed: int = 0) -> WidthEstimate:
    """Width of {s-sparse unit vectors} in dimension d.

    Each draw contributes its exact supremum (l2 norm of the s
    largest-magnitude gaussian entries), so the only error is Monte Carlo.
    """
    if not 1 <= s <= d:
        raise ValueError("need 1 <= s <= d")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    mean, stderr = _sparse_sup_norms(d, s, n_samples, seed)
    return WidthEstimate(
        mean=mean,
        stderr=stderr,
        n_samples=n_samples,
        set_descriptor=f"sparse_sphere(d={d}, s={s})",
    )


def width_descent_cone_sparse_proxy(d: int, s: int,
                                    n_samples: int = DEFAULT_WIDTH_SAMPLES,
                                    seed: int = 0) -> WidthEstimate:
    """Upper proxy for the descent-cone width of the s-sparse constraint.

    Uses the 2s-sparse unit sphere (full sphere when 2s exceeds d). This
    over-counts the cone but never under-counts, which is the safe direction
    for the minimum-sample condition.
    """
    if not 1 <= s <= d:
        raise ValueError("need 1 <= s <= d")
    k = min(2 * s, d)
    mean, stderr = _sparse_sup_norms(d, k, n_samples, seed)
    return WidthEstimate(
        mean=mean,
        stderr=stderr,
        n_samples=n_samples,
        set_descriptor=f"descent_cone_proxy(d={d}, s={s}, as {k}-sparse sphere)",
    )


def min_samples(width: WidthEstimate) -> int:
    """Smallest m satisfying m >= width^2."""
    if width.mean < 0:
        raise ValueError("width mean must be nonnegative")
    return math.ceil(width.mean * width.mean)
