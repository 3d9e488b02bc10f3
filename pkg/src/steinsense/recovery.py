"""Data generation, the correlation loss, and projection-based recovery.

The m-sample loss sum ||t||^2 - (2/m) sum y_i <a_i, t> completes the square
as ||t - v_hat||^2 - ||v_hat||^2 with v_hat = (1/m) sum y_i a_i, so the
constrained least-squares estimator over a closed set K is exactly the
Euclidean projection of v_hat onto K. Everything here is deterministic given
a seed, and reductions stay BLAS-free so results are identical whether
trials run serially or in a thread pool.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import struct
from typing import NamedTuple

import numpy as np

from ._util import ConfigError, derive_seed, make_rng, norm2, row_dots
from .link_model import SensingModel

__all__ = [
    "ConstraintSet",
    "Dataset",
    "RecoveryError",
    "generate",
    "empirical_loss",
    "correlation_vector",
    "estimate",
    "project",
    "normalize",
    "recovery_error",
    "save_dataset",
    "load_dataset",
]

_VARIANTS = ("sparse", "l1_ball", "l2_ball", "full_space")
_MAGIC = b"SSNS1"
_HEADER = struct.Struct("<5sIIQ")


@dataclasses.dataclass(frozen=True)
class ConstraintSet:
    """A closed constraint set K with an exact Euclidean projection.

    Variants: sparse(s) (s-sparse vectors), l1_ball(R), l2_ball(R), and
    full_space.
    """

    variant: str
    dim: int
    s: int | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ConfigError(f"variant must be one of {_VARIANTS}")
        if self.dim < 1:
            raise ConfigError("dim must be positive")
        if self.variant == "sparse":
            if self.s is None or not 1 <= self.s <= self.dim:
                raise ConfigError("sparse constraint needs 1 <= s <= dim")
        if self.variant in ("l1_ball", "l2_ball"):
            if self.radius is None or self.radius <= 0:
                raise ConfigError(f"{self.variant} needs a radius > 0")

    def to_dict(self) -> dict:
        out = {"variant": self.variant, "dim": self.dim}
        if self.s is not None:
            out["s"] = self.s
        if self.radius is not None:
            out["radius"] = self.radius
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "ConstraintSet":
        return cls(
            variant=obj["variant"],
            dim=int(obj["dim"]),
            s=int(obj["s"]) if "s" in obj else None,
            radius=float(obj["radius"]) if "radius" in obj else None,
        )


@dataclasses.dataclass(frozen=True)
class Dataset:
    """Observations y, sensing rows A, and how they were produced."""

    y: np.ndarray
    A: np.ndarray
    model_fingerprint: str
    seed: int

    @property
    def m(self) -> int:
        return self.y.size

    @property
    def dim(self) -> int:
        return self.A.shape[1]


def model_fingerprint(model: SensingModel) -> str:
    blob = json.dumps(model.to_dict(), sort_keys=True).encode("utf-8")
    return hashlib.blake2b(blob, digest_size=8).hexdigest()


def generate(model: SensingModel, m: int, seed: int) -> Dataset:
    """m i.i.d. observation pairs, deterministic in (model, m, seed).

    Rows, channel noise, and bit flips each draw from their own substream
    derived from the seed, so changing the channel does not disturb the
    sensing rows.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    d = model.dim
    rows = model.dist.sample(m * d, derive_seed(seed, "rows")).reshape(m, d)
    s = row_dots(rows, model.x)
    y = np.asarray(model.link(s), dtype=float)
    ch = model.channel
    if ch.kind == "additive_noise" and ch.sigma_z > 0.0:
        y = y + ch.sigma_z * make_rng(derive_seed(seed, "noise")).standard_normal(m)
    elif ch.kind == "bit_flip" and ch.q > 0.0:
        flips = make_rng(derive_seed(seed, "flip")).random(m) < ch.q
        y = np.where(flips, -y, y)
    return Dataset(y=y, A=rows, model_fingerprint=model_fingerprint(model), seed=seed)


def empirical_loss(dataset: Dataset, t) -> float:
    """||t||^2 - (2/m) sum y_i <a_i, t>, the sample correlation loss."""
    t = np.asarray(t, dtype=float)
    if t.shape != (dataset.dim,):
        raise ValueError(f"t has shape {t.shape}, expected ({dataset.dim},)")
    inner = row_dots(dataset.A, t)
    return float(np.sum(t * t)) - 2.0 / dataset.m * float(np.sum(dataset.y * inner))


def correlation_vector(dataset: Dataset) -> np.ndarray:
    """v_hat = (1/m) sum y_i a_i, the unconstrained loss minimizer."""
    return np.sum(dataset.A * dataset.y[:, None], axis=0) / dataset.m


def estimate(dataset: Dataset, constraint: ConstraintSet) -> np.ndarray:
    """argmin of the empirical loss over K, via projection of v_hat."""
    if constraint.dim != dataset.dim:
        raise ValueError("constraint dimension does not match the dataset")
    return project(correlation_vector(dataset), constraint)


def project(v, constraint: ConstraintSet) -> np.ndarray:
    """Euclidean projection onto the constraint set.

    sparse keeps the s largest-magnitude entries (ties broken toward the
    lowest index, for reproducibility); l1_ball soft-thresholds at the exact
    sorted-cumsum pivot; l2_ball rescales radially.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (constraint.dim,):
        raise ValueError(f"v has shape {v.shape}, expected ({constraint.dim},)")
    if constraint.variant == "full_space":
        return v.copy()
    if constraint.variant == "sparse":
        order = np.argsort(-np.abs(v), kind="stable")
        out = np.zeros_like(v)
        keep = order[: constraint.s]
        out[keep] = v[keep]
        return out
    if constraint.variant == "l2_ball":
        nrm = norm2(v)
        if nrm <= constraint.radius:
            return v.copy()
        return v * (constraint.radius / nrm)
    # l1_ball
    radius = constraint.radius
    mags = np.abs(v)
    if float(np.sum(mags)) <= radius:
        return v.copy()
    u = np.sort(mags)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, v.size + 1)
    rho = int(np.max(np.nonzero(u * j > css - radius)[0]))
    tau = (css[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(mags - tau, 0.0)


def normalize(x_hat) -> np.ndarray:
    """x_hat / ||x_hat||, or the zero vector when x_hat = 0."""
    x_hat = np.asarray(x_hat, dtype=float)
    nrm = norm2(x_hat)
    if nrm == 0.0:
        return np.zeros_like(x_hat)
    return x_hat / nrm


class RecoveryError(NamedTuple):
    err_scaled: float
    err_normalized: float


def recovery_error(x_hat, model: SensingModel, lam: float) -> RecoveryError:
    """(||x_hat - lambda x||, ||normalize(x_hat) - x||) against the truth.

    The normalized comparison assumes lambda > 0; otherwise it is reported
    as nan.
    """
    x_hat = np.asarray(x_hat, dtype=float)
    err_scaled = norm2(x_hat - lam * model.x)
    if lam > 0.0:
        err_normalized = norm2(normalize(x_hat) - model.x)
    else:
        err_normalized = float("nan")
    return RecoveryError(err_scaled=err_scaled, err_normalized=err_normalized)


def save_dataset(path, dataset: Dataset) -> None:
    """Write the binary dataset format: SSNS1 header, then A row-major, then y.

    Header layout, little endian: magic "SSNS1", d as u32, m as u32, seed as
    u64. All floats are 64-bit. The model fingerprint is not persisted.
    """
    a = np.ascontiguousarray(dataset.A, dtype="<f8")
    y = np.ascontiguousarray(dataset.y, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, dataset.dim, dataset.m, dataset.seed))
        fh.write(a.tobytes())
        fh.write(y.tobytes())


def load_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError("truncated dataset header")
        magic, d, m, seed = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}; not a SSNS1 dataset")
        body = fh.read()
    need = (m * d + m) * 8
    if len(body) != need:
        raise ValueError(f"dataset body has {len(body)} bytes, expected {need}")
    a = np.frombuffer(body[: m * d * 8], dtype="<f8").reshape(m, d).copy()
    y = np.frombuffer(body[m * d * 8 :], dtype="<f8").copy()
    return Dataset(y=y, A=a, model_fingerprint="", seed=seed)
