"""Registry of standardized (mean-0, variance-1) probability laws.

Each law carries exact-where-possible density/CDF/quantile callables plus the
partial-expectation hooks that the zero-bias machinery needs:

* ``partial_mean_above(y)``   = E[a 1(a > y)]
* ``partial_square_below(y)`` = E[a^2 1(a <= y)]

Built-in kinds
--------------
``gaussian``            standard normal
``rademacher``          uniform on {-1, +1}
``uniform``             uniform on [-sqrt(3), sqrt(3)]
``laplace``             density (1/sqrt(2)) exp(-sqrt(2)|y|)
``scaled_bernoulli(p)`` standardized Bernoulli(p)
``two_point(w)``        atoms {w, -1/w}, the mean-zero unit-variance pair
``tabulated(grid,pdf)`` piecewise-linear density; renormalized and affinely
                        standardized at construction

A law may also be a finite *mixture* of standardized laws (used for the
mixture contamination model); mixtures may carry both a density part and
atoms, i.e. a mixed measure.

All laws are immutable after construction and safe for concurrent reads.
Sampling is a pure function of (dist, n, seed); see ``_util`` for the seed
derivation contract.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from typing import Callable, Sequence

import numpy as np
from scipy import special

from ._util import (
    ConfigError,
    cumulative_trapezoid_from,
    make_rng,
    quad_with_breaks,
    uniform_open,
)

__all__ = [
    "StandardizedDistribution",
    "MomentReport",
    "PsiNormBoundaryWarning",
    "make_distribution",
    "from_spec",
    "mixture",
    "sample",
    "abs_moment",
    "psi_norm",
    "moment_report",
    "DEFAULT_PSI_GRID",
]

_SQRT3 = math.sqrt(3.0)
_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

DEFAULT_PSI_GRID = np.geomspace(1.0, 200.0, 64)


class PsiNormBoundaryWarning(UserWarning):
    """The psi-norm grid maximum sits at the grid boundary and is still
    growing, so the returned value is a lower approximation of a possibly
    infinite supremum (subexponential but not subgaussian laws trigger this
    for q=2)."""


def _phi(y):
    y = np.asarray(y, dtype=float)
    return np.exp(-0.5 * y * y) / np.sqrt(2.0 * np.pi)


class StandardizedDistribution:
    """A mean-zero unit-variance law with density part and/or atoms.

    Parameters are supplied by :func:`make_distribution`; this class is a
    passive container plus generic numeric fallbacks. ``density_part``
    integrates to ``density_weight`` (1 for purely continuous kinds, 0 for
    purely discrete ones); ``atoms``/``atom_probs`` carry the rest of the
    mass.
    """

    def __init__(
        self,
        kind: str,
        params: dict,
        lo: float,
        hi: float,
        is_symmetric: bool,
        atoms: np.ndarray | None = None,
        atom_probs: np.ndarray | None = None,
        density_part: Callable | None = None,
        cdf_fn: Callable | None = None,
        quantile_fn: Callable | None = None,
        log_abs_moment_fn: Callable | None = None,
        pma_fn: Callable | None = None,
        psb_fn: Callable | None = None,
        sample_fn: Callable | None = None,
        components: tuple | None = None,
    ):
        self.kind = kind
        self.params = dict(params)
        self.lo = float(lo)
        self.hi = float(hi)
        self.is_symmetric = bool(is_symmetric)
        self.atoms = np.array([] if atoms is None else atoms, dtype=float)
        self.atom_probs = np.array([] if atom_probs is None else atom_probs, dtype=float)
        self.density_part = density_part
        self.density_weight = float(1.0 - self.atom_probs.sum())
        self._cdf = cdf_fn
        self._quantile = quantile_fn
        self._lam = log_abs_moment_fn
        self._pma = pma_fn
        self._psb = psb_fn
        self._sample = sample_fn
        self.components = components
        self._validate_standardized()

    # -- basic probability interface ------------------------------------

    @property
    def has_density_on_interval(self) -> bool:
        return self.atoms.size == 0 and self.density_part is not None

    @property
    def is_discrete(self) -> bool:
        return self.density_part is None

    def pdf(self, y):
        """Density of the absolutely continuous part (0 where there is none)."""
        y = np.asarray(y, dtype=float)
        if self.density_part is None:
            return np.zeros_like(y)
        return np.asarray(self.density_part(y), dtype=float)

    def cdf(self, x):
        """Right-continuous CDF P[a <= x]."""
        x = np.asarray(x, dtype=float)
        if self._cdf is not None:
            return np.clip(np.asarray(self._cdf(x), dtype=float), 0.0, 1.0)
        raise NotImplementedError(f"no cdf for kind {self.kind}")

    def quantile(self, u):
        """Generalized inverse CDF, defined for u in (0, 1)."""
        u = np.asarray(u, dtype=float)
        if self._quantile is not None:
            return np.asarray(self._quantile(u), dtype=float)
        return self._quantile_by_bisection(u)

    def sample(self, n: int, seed: int) -> np.ndarray:
        """n i.i.d. draws, bit-for-bit deterministic in (self, n, seed)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = make_rng(seed)
        if self._sample is not None:
            return self._sample(rng, n)
        return self.quantile(uniform_open(rng, n))

    # -- moments ----------------------------------------------------------

    def log_abs_moment(self, p: float) -> float:
        """log E|a|^p for real p >= 1 (exact sums / closed forms / grid)."""
        if self._lam is not None:
            return float(self._lam(p))
        # generic quadrature fallback over the density part plus atom sums
        parts = []
        if self.density_part is not None:
            val = quad_with_breaks(
                lambda t: abs(t) ** p * float(self.pdf(t)), self.lo, self.hi, breaks=[0.0]
            )
            parts.append(math.log(val) if val > 0 else -math.inf)
        if self.atoms.size:
            mask = self.atoms != 0.0
            if mask.any():
                parts.append(
                    special.logsumexp(
                        p * np.log(np.abs(self.atoms[mask])) + np.log(self.atom_probs[mask])
                    )
                )
        return float(special.logsumexp(parts)) if parts else -math.inf

    def abs_moment(self, k: float) -> float:
        if k <= 0:
            raise ValueError("moment order must be positive")
        return float(math.exp(self.log_abs_moment(k)))

    # -- partial expectations (zero-bias building blocks) -----------------

    def partial_mean_above(self, y):
        """E[a 1(a > y)], the zero-bias density of this law."""
        y = np.asarray(y, dtype=float)
        if self._pma is not None:
            return np.asarray(self._pma(y), dtype=float)
        return self._generic_pma(y)

    def partial_square_below(self, y):
        """E[a^2 1(a <= y)]."""
        y = np.asarray(y, dtype=float)
        if self._psb is not None:
            return np.asarray(self._psb(y), dtype=float)
        return self._generic_psb(y)

    def _generic_pma(self, y):
        scalar = np.isscalar(y) or np.asarray(y).ndim == 0
        ys = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty_like(ys)
        for i, yi in enumerate(ys):
            val = 0.0
            if self.density_part is not None and yi < self.hi:
                val += quad_with_breaks(
                    lambda t: t * float(self.pdf(t)), max(yi, self.lo), self.hi, breaks=[0.0]
                )
            if self.atoms.size:
                sel = self.atoms > yi
                val += float(np.sum(self.atoms[sel] * self.atom_probs[sel]))
            out[i] = val
        return out[0] if scalar else out

    def _generic_psb(self, y):
        scalar = np.isscalar(y) or np.asarray(y).ndim == 0
        ys = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty_like(ys)
        for i, yi in enumerate(ys):
            val = 0.0
            if self.density_part is not None and yi > self.lo:
                val += quad_with_breaks(
                    lambda t: t * t * float(self.pdf(t)), self.lo, min(yi, self.hi), breaks=[0.0]
                )
            if self.atoms.size:
                sel = self.atoms <= yi
                val += float(np.sum(self.atoms[sel] ** 2 * self.atom_probs[sel]))
            out[i] = val
        return out[0] if scalar else out

    # -- numeric helpers ---------------------------------------------------

    def _quantile_by_bisection(self, u, tol: float = 1e-12):
        scalar = np.isscalar(u) or np.asarray(u).ndim == 0
        u = np.atleast_1d(np.asarray(u, dtype=float))
        lo = self.lo if np.isfinite(self.lo) else -1.0
        hi = self.hi if np.isfinite(self.hi) else 1.0
        # expand brackets until they cover all requested levels
        lo_arr = np.full_like(u, lo)
        hi_arr = np.full_like(u, hi)
        for _ in range(200):
            bad = self.cdf(lo_arr) >= u
            if not bad.any():
                break
            lo_arr[bad] = lo_arr[bad] * 2.0 - 1.0
        for _ in range(200):
            bad = self.cdf(hi_arr) < u
            if not bad.any():
                break
            hi_arr[bad] = hi_arr[bad] * 2.0 + 1.0
        for _ in range(100):
            mid = 0.5 * (lo_arr + hi_arr)
            below = self.cdf(mid) < u
            lo_arr = np.where(below, mid, lo_arr)
            hi_arr = np.where(below, hi_arr, mid)
            if np.max(hi_arr - lo_arr) < tol:
                break
        out = 0.5 * (lo_arr + hi_arr)
        return out[0] if scalar else out

    def mean_var(self) -> tuple[float, float]:
        """(mean, variance) via exact sums, trapezoid, or quadrature."""
        if self.components is not None:
            return 0.0, float(sum(w for w, _ in self.components))
        mean = 0.0
        second = 0.0
        if self.atoms.size:
            mean += float(np.sum(self.atoms * self.atom_probs))
            second += float(np.sum(self.atoms**2 * self.atom_probs))
        if self.density_part is not None:
            if self.kind == "tabulated":
                grid = self.params["_grid"]
                pdf = self.params["_pdf"]
                mean += float(np.trapezoid(grid * pdf, grid))
                second += float(np.trapezoid(grid**2 * pdf, grid))
            else:
                mean += quad_with_breaks(
                    lambda t: t * float(self.pdf(t)), self.lo, self.hi, breaks=[0.0]
                )
                second += quad_with_breaks(
                    lambda t: t * t * float(self.pdf(t)), self.lo, self.hi, breaks=[0.0]
                )
        return mean, second - mean**2

    def _validate_standardized(self, tol: float = 1e-10):
        mean, var = self.mean_var()
        if abs(mean) > tol or abs(var - 1.0) > tol:
            raise ValueError(
                f"law {self.kind} is not standardized: mean={mean:.3e}, var={var:.6f}"
            )

    # -- serialization ------------------------------------------------------

    def to_spec(self) -> dict:
        params = {k: v for k, v in self.params.items() if not k.startswith("_")}
        if self.kind == "tabulated":
            params = {
                "grid": self.params["_grid"].tolist(),
                "pdf": self.params["_pdf"].tolist(),
            }
        if self.kind == "mixture":
            params = {
                "components": [
                    {"weight": w, "dist": d.to_spec()} for w, d in self.components
                ]
            }
        return {"kind": self.kind, "params": params}

    def __repr__(self):
        shown = {k: v for k, v in self.params.items() if not k.startswith("_")}
        return f"StandardizedDistribution(kind={self.kind!r}, params={shown!r})"


# ---------------------------------------------------------------------------
# constructors per kind
# ---------------------------------------------------------------------------


def _make_gaussian() -> StandardizedDistribution:
    def lam(p):
        return (p / 2.0) * math.log(2.0) + special.gammaln((p + 1.0) / 2.0) - 0.5 * math.log(
            math.pi
        )

    return StandardizedDistribution(
        kind="gaussian",
        params={},
        lo=-math.inf,
        hi=math.inf,
        is_symmetric=True,
        density_part=_phi,
        cdf_fn=special.ndtr,
        quantile_fn=special.ndtri,
        log_abs_moment_fn=lam,
        pma_fn=_phi,
        psb_fn=lambda y: special.ndtr(y) - y * _phi(y),
    )


def _make_atomic(kind: str, params: dict, atoms, probs) -> StandardizedDistribution:
    atoms = np.asarray(atoms, dtype=float)
    probs = np.asarray(probs, dtype=float)
    order = np.argsort(atoms)
    atoms, probs = atoms[order], probs[order]
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    suffix_mean = np.concatenate([np.cumsum((atoms * probs)[::-1])[::-1], [0.0]])
    prefix_sq = np.concatenate([[0.0], np.cumsum(atoms**2 * probs)])

    def cdf_fn(x):
        idx = np.searchsorted(atoms, x, side="right")
        return np.concatenate([[0.0], cum])[idx]

    def quantile_fn(u):
        idx = np.minimum(np.searchsorted(cum, u, side="left"), atoms.size - 1)
        return atoms[idx]

    def lam(p):
        mask = atoms != 0.0
        if not mask.any():
            return -math.inf
        return float(special.logsumexp(p * np.log(np.abs(atoms[mask])) + np.log(probs[mask])))

    def pma_fn(y):
        idx = np.searchsorted(atoms, y, side="right")
        return suffix_mean[idx]

    def psb_fn(y):
        idx = np.searchsorted(atoms, y, side="right")
        return prefix_sq[idx]

    # atoms are sorted ascending, so symmetry means the reversed negation
    # reproduces both atoms and probabilities
    sym = bool(
        np.allclose(atoms, -atoms[::-1], atol=1e-12) and np.allclose(probs, probs[::-1])
    )
    return StandardizedDistribution(
        kind=kind,
        params=params,
        lo=float(atoms[0]),
        hi=float(atoms[-1]),
        is_symmetric=sym,
        atoms=atoms,
        atom_probs=probs,
        cdf_fn=cdf_fn,
        quantile_fn=quantile_fn,
        log_abs_moment_fn=lam,
        pma_fn=pma_fn,
        psb_fn=psb_fn,
    )


def _make_uniform() -> StandardizedDistribution:
    b = _SQRT3

    def pdf(y):
        y = np.asarray(y, dtype=float)
        return np.where(np.abs(y) <= b, 1.0 / (2.0 * b), 0.0)

    def cdf_fn(x):
        return np.clip((np.asarray(x, dtype=float) + b) / (2.0 * b), 0.0, 1.0)

    def quantile_fn(u):
        return -b + 2.0 * b * np.asarray(u, dtype=float)

    def lam(p):
        return p * math.log(b) - math.log(p + 1.0)

    def pma_fn(y):
        y = np.clip(np.asarray(y, dtype=float), -b, b)
        return (b * b - y * y) / (4.0 * b)

    def psb_fn(y):
        y = np.clip(np.asarray(y, dtype=float), -b, b)
        return (y**3 + b**3) / (6.0 * b)

    return StandardizedDistribution(
        kind="uniform",
        params={},
        lo=-b,
        hi=b,
        is_symmetric=True,
        density_part=pdf,
        cdf_fn=cdf_fn,
        quantile_fn=quantile_fn,
        log_abs_moment_fn=lam,
        pma_fn=pma_fn,
        psb_fn=psb_fn,
    )


def _make_laplace() -> StandardizedDistribution:
    c = _SQRT2  # rate; scale is 1/sqrt(2) so the variance is 1

    def pdf(y):
        y = np.asarray(y, dtype=float)
        return (1.0 / _SQRT2) * np.exp(-c * np.abs(y))

    def cdf_fn(x):
        x = np.asarray(x, dtype=float)
        tail = 0.5 * np.exp(-c * np.abs(x))
        return np.where(x < 0, tail, 1.0 - tail)

    def quantile_fn(u):
        u = np.asarray(u, dtype=float)
        return np.where(u < 0.5, np.log(2.0 * u) / c, -np.log(2.0 * (1.0 - u)) / c)

    def lam(p):
        return special.gammaln(p + 1.0) - (p / 2.0) * math.log(2.0)

    def pma_fn(y):
        z = np.abs(np.asarray(y, dtype=float))
        return np.exp(-c * z) * (z / 2.0 + 1.0 / (2.0 * _SQRT2))

    def psb_fn(y):
        y = np.asarray(y, dtype=float)
        z = np.abs(y)
        tail = np.exp(-c * z) * (z * z / 2.0 + z / _SQRT2 + 0.5)
        return np.where(y >= 0, 1.0 - tail, tail)

    return StandardizedDistribution(
        kind="laplace",
        params={},
        lo=-math.inf,
        hi=math.inf,
        is_symmetric=True,
        density_part=pdf,
        cdf_fn=cdf_fn,
        quantile_fn=quantile_fn,
        log_abs_moment_fn=lam,
        pma_fn=pma_fn,
        psb_fn=psb_fn,
    )


def _make_tabulated(grid, pdf) -> StandardizedDistribution:
    grid = np.asarray(grid, dtype=float)
    pdf = np.asarray(pdf, dtype=float)
    if grid.ndim != 1 or grid.size < 8:
        raise ConfigError("tabulated grid needs at least 8 points")
    if pdf.shape != grid.shape:
        raise ConfigError("grid and pdf must have matching shapes")
    if not np.all(np.diff(grid) > 0):
        raise ConfigError("tabulated grid must be strictly increasing")
    if np.any(pdf < 0) or not np.all(np.isfinite(pdf)):
        raise ConfigError("tabulated pdf must be finite and nonnegative")
    mass = float(np.trapezoid(pdf, grid))
    if mass <= 0:
        raise ConfigError("tabulated pdf has zero mass")
    pdf = pdf / mass
    mean = float(np.trapezoid(grid * pdf, grid))
    var = float(np.trapezoid((grid - mean) ** 2 * pdf, grid))
    if var < 1e-12:
        raise ConfigError("tabulated law is degenerate (zero variance)")
    sigma = math.sqrt(var)
    grid = (grid - mean) / sigma
    pdf = pdf * sigma

    cdfv = cumulative_trapezoid_from(grid, pdf)
    total = cdfv[-1]
    pdf = pdf / total
    cdfv = cdfv / total
    cdfv[-1] = 1.0

    t_mean = cumulative_trapezoid_from(grid, grid * pdf)  # int_{lo}^{y} t p(t) dt
    pma_grid = t_mean[-1] - t_mean  # equals E[a 1(a>y)] since the full mean is ~0
    psb_grid = cumulative_trapezoid_from(grid, grid * grid * pdf)

    sym = bool(
        np.allclose(grid, -grid[::-1], atol=1e-12) and np.allclose(pdf, pdf[::-1], rtol=1e-9, atol=1e-12)
    )

    def pdf_fn(y):
        return np.interp(np.asarray(y, dtype=float), grid, pdf, left=0.0, right=0.0)

    def cdf_fn(x):
        return np.interp(np.asarray(x, dtype=float), grid, cdfv, left=0.0, right=1.0)

    def quantile_fn(u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        idx = np.clip(np.searchsorted(cdfv, u, side="left"), 1, grid.size - 1)
        f0, f1 = cdfv[idx - 1], cdfv[idx]
        x0, x1 = grid[idx - 1], grid[idx]
        denom = np.where(f1 > f0, f1 - f0, 1.0)
        frac = np.clip((u - f0) / denom, 0.0, 1.0)
        out = x0 + frac * (x1 - x0)
        return out if out.size > 1 else out[0]

    def lam(p):
        with np.errstate(divide="ignore"):
            lg = p * np.log(np.abs(grid)) + np.log(pdf)
        lg[~np.isfinite(lg)] = -np.inf
        seg = np.logaddexp(lg[:-1], lg[1:]) + np.log(np.diff(grid) / 2.0)
        return float(special.logsumexp(seg))

    def pma_fn(y):
        return np.interp(np.asarray(y, dtype=float), grid, pma_grid)

    def psb_fn(y):
        return np.interp(np.asarray(y, dtype=float), grid, psb_grid)

    return StandardizedDistribution(
        kind="tabulated",
        params={"_grid": grid, "_pdf": pdf},
        lo=float(grid[0]),
        hi=float(grid[-1]),
        is_symmetric=sym,
        density_part=pdf_fn,
        cdf_fn=cdf_fn,
        quantile_fn=quantile_fn,
        log_abs_moment_fn=lam,
        pma_fn=pma_fn,
        psb_fn=psb_fn,
    )


def mixture(components: Sequence[tuple[float, StandardizedDistribution]]) -> StandardizedDistribution:
    """Finite mixture of standardized laws (itself standardized).

    ``components`` is a sequence of (weight, law) pairs with positive weights
    summing to 1. The result may be a mixed measure when any component is
    discrete; its gamma computation then runs through the CDF-difference
    formula, which handles atoms naturally.
    """
    comps = [(float(w), d) for w, d in components if w > 0.0]
    wsum = sum(w for w, _ in comps)
    if abs(wsum - 1.0) > 1e-12:
        raise ConfigError("mixture weights must sum to 1")
    atom_map: dict[float, float] = {}
    for w, d in comps:
        for a, p in zip(d.atoms, d.atom_probs):
            atom_map[float(a)] = atom_map.get(float(a), 0.0) + w * float(p)
    atoms = np.array(sorted(atom_map)) if atom_map else None
    probs = np.array([atom_map[a] for a in sorted(atom_map)]) if atom_map else None
    has_density = any(d.density_part is not None for _, d in comps)

    def pdf_fn(y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        for w, d in comps:
            if d.density_part is not None:
                out = out + w * d.pdf(y)
        return out

    def cdf_fn(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for w, d in comps:
            out = out + w * d.cdf(x)
        return out

    def lam(p):
        vals = [math.log(w) + d.log_abs_moment(p) for w, d in comps]
        return float(special.logsumexp(vals))

    def pma_fn(y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        for w, d in comps:
            out = out + w * d.partial_mean_above(y)
        return out

    def psb_fn(y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        for w, d in comps:
            out = out + w * d.partial_square_below(y)
        return out

    weights = np.array([w for w, _ in comps])
    cumw = np.cumsum(weights)
    cumw[-1] = 1.0

    def sample_fn(rng, n):
        # compositional sampling; draw order (selector, then values) is part
        # of the determinism contract
        sel = np.searchsorted(cumw, uniform_open(rng, n), side="left")
        u = uniform_open(rng, n)
        out = np.empty(n)
        for i, (_, d) in enumerate(comps):
            mask = sel == i
            if mask.any():
                out[mask] = d.quantile(u[mask])
        return out

    return StandardizedDistribution(
        kind="mixture",
        params={},
        lo=min(d.lo for _, d in comps),
        hi=max(d.hi for _, d in comps),
        is_symmetric=all(d.is_symmetric for _, d in comps),
        atoms=atoms,
        atom_probs=probs,
        density_part=pdf_fn if has_density else None,
        cdf_fn=cdf_fn,
        quantile_fn=None,  # numeric bisection fallback
        log_abs_moment_fn=lam,
        pma_fn=pma_fn,
        psb_fn=psb_fn,
        sample_fn=sample_fn,
        components=tuple(comps),
    )


def make_distribution(kind: str, **params) -> StandardizedDistribution:
    """Factory for the built-in kinds; see the module docstring for the list."""
    if kind == "gaussian":
        return _make_gaussian()
    if kind == "rademacher":
        return _make_atomic("rademacher", {}, [-1.0, 1.0], [0.5, 0.5])
    if kind == "uniform":
        return _make_uniform()
    if kind == "laplace":
        return _make_laplace()
    if kind == "scaled_bernoulli":
        p = float(params["p"])
        if not 0.0 < p < 1.0:
            raise ConfigError("scaled_bernoulli requires p in (0, 1)")
        s = math.sqrt(p * (1.0 - p))
        return _make_atomic(
            "scaled_bernoulli", {"p": p}, [-p / s, (1.0 - p) / s], [1.0 - p, p]
        )
    if kind == "two_point":
        w = float(params["w"])
        if w <= 0.0 or not math.isfinite(w):
            raise ConfigError("two_point requires a finite w > 0")
        return _make_atomic(
            "two_point",
            {"w": w},
            [-1.0 / w, w],
            [w * w / (1.0 + w * w), 1.0 / (1.0 + w * w)],
        )
    if kind == "tabulated":
        return _make_tabulated(params["grid"], params["pdf"])
    if kind == "mixture":
        comps = [
            (c["weight"], from_spec(c["dist"])) for c in params["components"]
        ]
        return mixture(comps)
    raise ConfigError(f"unknown distribution kind: {kind!r}")


def from_spec(spec: dict) -> StandardizedDistribution:
    """Build a law from its JSON object {"kind": ..., "params": {...}}."""
    return make_distribution(spec["kind"], **spec.get("params", {}))


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------


def sample(dist: StandardizedDistribution, n: int, seed: int) -> np.ndarray:
    return dist.sample(n, seed)


def abs_moment(dist: StandardizedDistribution, k: float) -> float:
    """E|a|^k; exact enumeration for discrete kinds, quadrature-grade otherwise."""
    return dist.abs_moment(k)


def psi_norm(dist: StandardizedDistribution, q: int, p_grid=None) -> float:
    """Grid lower approximation of sup_p p^(-1/q) (E|a|^p)^(1/p).

    The supremum is taken over the supplied grid (default: 64 log-spaced
    points on [1, 200]). If the maximum sits at the grid boundary and has
    grown by more than 2% over the top half of the grid, the value is only a
    lower bound of a growing (possibly infinite) supremum and a
    :class:`PsiNormBoundaryWarning` is issued.
    """
    grid = DEFAULT_PSI_GRID if p_grid is None else np.asarray(p_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("p_grid must be nonempty")
    if np.any(grid < 1.0):
        raise ValueError("psi-norm grid requires p >= 1")
    vals = np.array(
        [math.exp(dist.log_abs_moment(p) / p - math.log(p) / q) for p in grid]
    )
    imax = int(np.argmax(vals))
    if imax == grid.size - 1 and grid.size >= 4:
        half = int(np.searchsorted(grid, grid[-1] / 2.0))
        half = min(max(half, 0), grid.size - 2)
        if vals[-1] > 1.02 * vals[half]:
            warnings.warn(
                f"psi_{q} grid maximum of {dist.kind} sits at the grid end and is "
                "still growing; value is a lower approximation",
                PsiNormBoundaryWarning,
                stacklevel=2,
            )
    return float(vals[imax])


@dataclasses.dataclass(frozen=True)
class MomentReport:
    """Absolute moments and psi-norm grid estimates of one law."""

    abs_moment_3: float
    abs_moment_4: float
    abs_moment_6: float
    psi2: float
    psi1: float

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def moment_report(dist: StandardizedDistribution) -> MomentReport:
    return MomentReport(
        abs_moment_3=abs_moment(dist, 3),
        abs_moment_4=abs_moment(dist, 4),
        abs_moment_6=abs_moment(dist, 6),
        psi2=psi_norm(dist, 2),
        psi1=psi_norm(dist, 1),
    )
