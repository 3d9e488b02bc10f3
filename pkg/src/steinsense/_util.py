"""Shared plumbing: seed derivation, deterministic reductions, quadrature helpers.

Randomness contract
-------------------
Every sampling entry point takes an explicit ``seed`` and builds its own
``numpy.random.Generator`` on top of the counter-based Philox bit generator,
so results are bit-for-bit reproducible and independent of scheduling.
Substreams are derived with :func:`derive_seed`, a stable 64-bit blake2b hash
of the parent seed plus string/int/float labels. The derivation is part of
the public determinism contract: the same (seed, labels) always yields the
same substream on every platform.
"""

from __future__ import annotations

import hashlib
import struct
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

__all__ = [
    "derive_seed",
    "make_rng",
    "uniform_open",
    "pairwise_dot",
    "row_dots",
    "norm2",
    "quad_with_breaks",
    "PreconditionError",
    "ConfigError",
]

_U64 = (1 << 64) - 1


class PreconditionError(ValueError):
    """A documented precondition of an operation failed.

    ``condition`` names the failed check so callers (and the CLI strict
    mode) can react to it without parsing the message.
    """

    def __init__(self, condition: str, message: str):
        super().__init__(f"{condition}: {message}")
        self.condition = condition


class ConfigError(ValueError):
    """Invalid experiment or CLI configuration."""


def derive_seed(*parts: int | float | str) -> int:
    """Stable 64-bit seed from a tuple of ints, floats, and string labels.

    Ints are packed as little-endian u64 (mod 2^64), floats as little-endian
    IEEE doubles, strings as UTF-8 with a length prefix. The digest is the
    low 64 bits of blake2b, so the mapping is identical across platforms and
    process invocations.
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, bool):
            raise TypeError("bool is ambiguous in seed derivation")
        if isinstance(part, (int, np.integer)):
            h.update(b"i")
            h.update(struct.pack("<Q", int(part) & _U64))
        elif isinstance(part, (float, np.floating)):
            h.update(b"f")
            h.update(struct.pack("<d", float(part)))
        elif isinstance(part, str):
            raw = part.encode("utf-8")
            h.update(b"s")
            h.update(struct.pack("<I", len(raw)))
            h.update(raw)
        else:
            raise TypeError(f"unsupported seed part type: {type(part)!r}")
    return int.from_bytes(h.digest(), "little")


def make_rng(seed: int) -> np.random.Generator:
    """Philox generator for ``seed``; the package-wide RNG construction."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def uniform_open(rng: np.random.Generator, n: int) -> np.ndarray:
    """n uniforms in the open interval (0, 1), safe for quantile transforms."""
    u = rng.random(n)
    # rng.random() lands on exact 0.0 with probability 2^-53 per draw; nudge
    # it off the endpoint so inverse CDFs stay finite.
    return np.maximum(u, 2.0**-53)


def pairwise_dot(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product via numpy's pairwise summation instead of BLAS.

    BLAS kernels may change reduction order with their internal thread pool,
    which would break the byte-identical CSV guarantee of the bench harness.
    """
    return float(np.sum(a * b))


def row_dots(matrix: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Row-wise inner products <matrix[i], vec>, BLAS-free (see pairwise_dot)."""
    return np.sum(matrix * vec, axis=1)


def norm2(v: np.ndarray) -> float:
    """Euclidean norm with a fixed reduction order."""
    return float(np.sqrt(np.sum(v * v)))


def quad_with_breaks(
    func,
    lo: float,
    hi: float,
    breaks: Iterable[float] = (),
    epsabs: float = 1e-11,
    limit: int = 200,
) -> float:
    """Adaptive quadrature of ``func`` over [lo, hi] split at ``breaks``.

    scipy.integrate.quad does not accept interior break points together with
    infinite limits, so the integral is summed over the segments between
    consecutive finite break points, plus the two unbounded tails when
    applicable. Breaks outside (lo, hi) are ignored.
    """
    pts = sorted({float(b) for b in breaks if lo < b < hi and np.isfinite(b)})
    edges = [lo, *pts, hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if a == b:
            continue
        val, _ = integrate.quad(func, a, b, epsabs=epsabs, epsrel=1e-11, limit=limit)
        total += val
    return total


def cumulative_trapezoid_from(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Trapezoid cumulative integral of samples ``y`` on grid ``x``, from x[0]."""
    out = integrate.cumulative_trapezoid(y, x, initial=0.0)
    return np.asarray(out)


def sorted_breaks(*groups: Sequence[float]) -> list[float]:
    """Merge break-point groups into a sorted, finite, deduplicated list."""
    vals: set[float] = set()
    for g in groups:
        for v in g:
            v = float(v)
            if np.isfinite(v):
                vals.add(v)
    return sorted(vals)
