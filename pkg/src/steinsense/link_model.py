"""Link functions, sensing models, and the population quantities they induce.

A sensing model pairs an i.i.d. standardized entry law with a measurable link
theta and a unit signal x. Observations satisfy E[y | a] = theta(<a, x>).
Three population quantities drive the recovery analysis:

* lambda = E[y <a, x>]            the signal gain picked up by correlation
* v_x    = E[a theta(<a, x>)]     the population correlation vector
* alpha  = || v_x - lambda x ||_2 the nonlinearity-plus-nongaussianity drift

alpha admits closed-form upper bounds depending on the link class: the
Stein-kernel discrepancy E|1-T| for 1-Lipschitz links, ||theta''|| gamma_a
for twice-differentiable links, and a square-root small-signal bound for the
sign link. Monte Carlo estimators here are seed-deterministic, chunked, and
avoid BLAS reductions so results do not depend on thread count.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable

import numpy as np
from scipy import optimize

from ._util import (
    ConfigError,
    PreconditionError,
    derive_seed,
    make_rng,
    norm2,
    pairwise_dot,
    quad_with_breaks,
    row_dots,
    sorted_breaks,
)
from .distributions import StandardizedDistribution, from_spec
from .zero_bias import e_one_minus_t, gamma, stein_coefficient

__all__ = [
    "LinkFunction",
    "Channel",
    "SensingModel",
    "PopulationSummary",
    "LambdaEstimate",
    "VxEstimate",
    "LemmaCheck",
    "make_link",
    "validate_link",
    "second_deriv_bound_by_search",
    "lambda_of",
    "v_x_of",
    "alpha_of",
    "population_summary",
    "enumerate_population",
    "alpha_bound_lipschitz",
    "alpha_bound_c2",
    "alpha_bound_sign",
    "v_x_lemma_checks",
]

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_C1 = _SQRT_2_OVER_PI - 0.5
_MC_CHUNK = 1 << 16
_ENUM_LIMIT = 1 << 21

TANH_SECOND_DERIV_BOUND = 4.0 / (3.0 * math.sqrt(3.0))


@dataclasses.dataclass(frozen=True)
class LinkFunction:
    """A measurable link with the metadata the alpha bounds consume.

    ``lipschitz_const`` and ``second_deriv_bound`` are None when the link
    does not have them (the sign link has neither).
    """

    name: str
    fn: Callable
    lipschitz_const: float | None
    second_deriv_bound: float | None
    is_sign: bool = False
    params: dict = dataclasses.field(default_factory=dict)

    def __call__(self, w):
        return self.fn(np.asarray(w, dtype=float))

    def to_dict(self) -> dict:
        return {"name": self.name, **self.params}


def make_link(name: str, **params) -> LinkFunction:
    """Registry of built-in links: linear (slope mu), tanh, sign."""
    if name == "linear":
        mu = float(params.get("mu", 1.0))

        def fn(w):
            return mu * w

        return LinkFunction(
            name="linear",
            fn=fn,
            lipschitz_const=abs(mu),
            second_deriv_bound=0.0,
            params={"mu": mu},
        )
    if name == "tanh":
        return LinkFunction(
            name="tanh",
            fn=np.tanh,
            lipschitz_const=1.0,
            second_deriv_bound=TANH_SECOND_DERIV_BOUND,
        )
    if name == "sign":
        def fn(w):
            return np.where(w >= 0, 1.0, -1.0)

        return LinkFunction(
            name="sign",
            fn=fn,
            lipschitz_const=None,
            second_deriv_bound=None,
            is_sign=True,
        )
    raise ConfigError(f"unknown link {name!r}")


def link_from_dict(obj: dict) -> LinkFunction:
    obj = dict(obj)
    return make_link(obj.pop("name"), **obj)


def validate_link(link: LinkFunction, grid=None) -> list:
    """Check the declared metadata against the function; return violations.

    Slope checks use finite differences on a test grid with a 1e-6 relative
    allowance; sign links must map to {-1, +1} with the boundary at 0
    belonging to +1.
    """
    if grid is None:
        grid = np.linspace(-8.0, 8.0, 1601)
    problems = []
    vals = link(grid)
    if link.is_sign:
        if not np.all(np.isin(vals, (-1.0, 1.0))):
            problems.append("sign link takes values outside {-1, 1}")
        if link(0.0) != 1.0:
            problems.append("sign link must map 0 to +1")
    if link.lipschitz_const is not None:
        slopes = np.abs(np.diff(vals) / np.diff(grid))
        if np.max(slopes) > link.lipschitz_const * (1.0 + 1e-6):
            problems.append(
                f"observed slope {np.max(slopes):.6g} exceeds the declared "
                f"Lipschitz constant {link.lipschitz_const:.6g}"
            )
    return problems


def second_deriv_bound_by_search(fn, lo=-8.0, hi=8.0, step=1e-4) -> float:
    """sup |fn''| by a coarse grid followed by bounded scalar refinement."""
    grid = np.linspace(lo, hi, 4001)

    def neg_abs_second(w):
        return -abs((fn(w + step) - 2.0 * fn(w) + fn(w - step)) / (step * step))

    coarse = -np.array([neg_abs_second(w) for w in grid])
    order = np.argsort(coarse)[::-1][:5]
    best = float(np.max(coarse))
    span = grid[1] - grid[0]
    for idx in order:
        a = max(lo, grid[idx] - 2 * span)
        b = min(hi, grid[idx] + 2 * span)
        res = optimize.minimize_scalar(
            neg_abs_second, bounds=(a, b), method="bounded",
            options={"xatol": 1e-10},
        )
        best = max(best, -res.fun)
    return best


@dataclasses.dataclass(frozen=True)
class Channel:
    """How observations leave the link: exactly, with noise, or sign-flipped.

    The model only constrains the conditional mean, so the channel is free:
    additive N(0, sigma_z^2) noise preserves E[y|a]; flipping a sign link
    with probability q scales the effective link (and lambda) by 1 - 2q.
    """

    kind: str = "exact"
    sigma_z: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        if self.kind not in ("exact", "additive_noise", "bit_flip"):
            raise ConfigError(f"unknown channel kind {self.kind!r}")
        if self.sigma_z < 0.0:
            raise ConfigError("sigma_z must be nonnegative")
        if not 0.0 <= self.q < 0.5:
            raise ConfigError("bit-flip probability must lie in [0, 1/2)")

    @property
    def mean_scale(self) -> float:
        return 1.0 - 2.0 * self.q if self.kind == "bit_flip" else 1.0

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "additive_noise":
            out["sigma_z"] = self.sigma_z
        if self.kind == "bit_flip":
            out["q"] = self.q
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "Channel":
        return cls(**obj)


@dataclasses.dataclass(frozen=True)
class SensingModel:
    """Entry law + link + unit signal + observation channel."""

    dist: StandardizedDistribution
    link: LinkFunction
    x: np.ndarray
    channel: Channel = Channel()

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        object.__setattr__(self, "x", x)
        if x.ndim != 1 or x.size == 0:
            raise ConfigError("x must be a nonempty vector")
        if abs(norm2(x) - 1.0) > 1e-12:
            raise ConfigError("x must be a unit vector (within 1e-12)")
        if self.channel.kind == "bit_flip" and not self.link.is_sign:
            raise ConfigError("bit_flip channel requires a sign link")

    @property
    def dim(self) -> int:
        return self.x.size

    def to_dict(self) -> dict:
        return {
            "dist": self.dist.to_spec(),
            "link": self.link.to_dict(),
            "x": self.x.tolist(),
            "channel": self.channel.to_dict(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SensingModel":
        return cls(
            dist=from_spec(obj["dist"]),
            link=link_from_dict(obj["link"]),
            x=np.asarray(obj["x"], dtype=float),
            channel=Channel.from_dict(obj.get("channel", {"kind": "exact"})),
        )


@dataclasses.dataclass(frozen=True)
class PopulationSummary:
    """lambda, v_x, and alpha from one Monte Carlo sample.

    lambda is <v_x, x> of the same sample, which keeps the identity
    lambda = E[y <a, x>] exact at the estimator level; mc_stderr is the
    Euclidean norm of the per-coordinate standard errors of v_x.
    """

    lam: float
    v_x: np.ndarray
    alpha: float
    mc_stderr: float

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "v_x": self.v_x.tolist(),
            "alpha": self.alpha,
            "mc_stderr": self.mc_stderr,
        }


@dataclasses.dataclass(frozen=True)
class LambdaEstimate:
    value: float
    stderr: float
    method: str
    low_sample_warning: bool = False


@dataclasses.dataclass(frozen=True)
class VxEstimate:
    value: np.ndarray
    stderr: np.ndarray


def _observe(model: SensingModel, s: np.ndarray, seed: int, chunk_index: int):
    y = np.asarray(model.link(s), dtype=float)
    ch = model.channel
    if ch.kind == "additive_noise" and ch.sigma_z > 0.0:
        rng = make_rng(derive_seed(seed, "noise", chunk_index))
        y = y + ch.sigma_z * rng.standard_normal(s.size)
    elif ch.kind == "bit_flip" and ch.q > 0.0:
        rng = make_rng(derive_seed(seed, "flip", chunk_index))
        y = np.where(rng.random(s.size) < ch.q, -y, y)
    return y


def _mc_accumulate(model: SensingModel, n: int, seed: int):
    """One pass over n rows; returns sums for v_x and for y*s moments."""
    d = model.dim
    sum_v = np.zeros(d)
    sum_v2 = np.zeros(d)
    sum_ys = 0.0
    sum_ys2 = 0.0
    done = 0
    chunk_index = 0
    while done < n:
        take = min(_MC_CHUNK, n - done)
        rows_seed = derive_seed(seed, "rows", chunk_index)
        rows = model.dist.sample(take * d, rows_seed).reshape(take, d)
        s = row_dots(rows, model.x)
        y = _observe(model, s, seed, chunk_index)
        contrib = rows * y[:, None]
        sum_v += np.sum(contrib, axis=0)
        sum_v2 += np.sum(contrib * contrib, axis=0)
        ys = y * s
        sum_ys += float(np.sum(ys))
        sum_ys2 += float(np.sum(ys * ys))
        done += take
        chunk_index += 1
    return sum_v, sum_v2, sum_ys, sum_ys2


def v_x_of(model: SensingModel, n: int, seed: int) -> VxEstimate:
    """Monte Carlo estimate of v_x = E[a theta(<a, x>)] with stderr."""
    if n < 10_000:
        raise PreconditionError("n", "v_x_of needs at least 10^4 samples")
    sum_v, sum_v2, _, _ = _mc_accumulate(model, n, seed)
    mean = sum_v / n
    var = np.maximum(sum_v2 / n - mean * mean, 0.0)
    return VxEstimate(value=mean, stderr=np.sqrt(var / n))


def population_summary(model: SensingModel, n: int, seed: int) -> PopulationSummary:
    if n < 10_000:
        raise PreconditionError("n", "population_summary needs at least 10^4 samples")
    sum_v, sum_v2, _, _ = _mc_accumulate(model, n, seed)
    mean = sum_v / n
    var = np.maximum(sum_v2 / n - mean * mean, 0.0)
    lam = pairwise_dot(mean, model.x)
    alpha = norm2(mean - lam * model.x)
    return PopulationSummary(
        lam=lam, v_x=mean, alpha=alpha, mc_stderr=norm2(np.sqrt(var / n))
    )


def alpha_of(model: SensingModel, n: int, seed: int) -> float:
    """||v_x - lambda x||_2 with both factors from the same sample.

    The defining supremum of |<v_x - lambda x, t>| over the unit ball is
    attained at the normalized difference vector, so the norm is the exact
    value, no search involved.
    """
    return population_summary(model, n, seed).alpha


def _expect_scalar(dist: StandardizedDistribution, fn) -> float:
    """E[fn(a)] for a standardized law, mixing atoms and density exactly."""
    total = 0.0
    for atom, prob in zip(dist.atoms, dist.atom_probs):
        total += prob * float(fn(atom))
    if dist.density_part is not None:
        total += quad_with_breaks(
            lambda t: float(fn(t)) * float(dist.pdf(t)),
            dist.lo,
            dist.hi,
            breaks=sorted_breaks(dist.atoms, [0.0, dist.lo, dist.hi]),
        )
    return total


def lambda_of(model: SensingModel, method: str = "quadrature",
              n: int = 100_000, seed: int = 0) -> LambdaEstimate:
    """lambda = E[<a, x> theta(<a, x>)], by quadrature or Monte Carlo.

    Quadrature needs the projection <a, x> to have a known law: gaussian
    entries (standard normal projection) or d = 1. Bit-flip channels scale
    the result by 1 - 2q; additive noise leaves it unchanged.
    """
    scale = model.channel.mean_scale
    if method == "quadrature":
        if model.dist.kind == "gaussian":
            from .distributions import make_distribution

            proj = make_distribution("gaussian")
            value = _expect_scalar(proj, lambda s: s * float(model.link(s)))
        elif model.dim == 1:
            x1 = model.x[0]
            value = _expect_scalar(
                model.dist, lambda a: x1 * a * float(model.link(x1 * a))
            )
        else:
            raise PreconditionError(
                "method",
                "quadrature lambda needs gaussian entries or d = 1; use mc",
            )
        return LambdaEstimate(value=scale * value, stderr=0.0, method="quadrature")
    if method == "mc":
        _, _, sum_ys, sum_ys2 = _mc_accumulate(model, n, seed)
        mean = sum_ys / n
        var = max(sum_ys2 / n - mean * mean, 0.0)
        return LambdaEstimate(
            value=mean,
            stderr=math.sqrt(var / n),
            method="mc",
            low_sample_warning=n < 10_000,
        )
    raise ValueError(f"unknown method {method!r}")


def enumerate_population(model: SensingModel):
    """Exact (lambda, v_x, alpha) for discrete entry laws by full enumeration.

    Feasible when (number of atoms)^d stays below about 2 million; used as
    the Monte Carlo oracle and for small discrete lemma checks. Channel
    noise does not move v_x (mean zero, independent); bit flips scale it.
    """
    dist = model.dist
    if not dist.is_discrete:
        raise PreconditionError("dist", "enumeration needs a purely discrete law")
    d = model.dim
    k = dist.atoms.size
    if k**d > _ENUM_LIMIT:
        raise PreconditionError("size", f"enumeration over {k}^{d} outcomes is too large")
    shape = (k,) * d
    axes = np.meshgrid(*([dist.atoms] * d), indexing="ij", sparse=True)
    rows = np.empty((k**d, d))
    for j, g in enumerate(axes):
        rows[:, j] = np.broadcast_to(g, shape).ravel()
    probs_nd = np.ones((1,) * d)
    for g in np.meshgrid(*([dist.atom_probs] * d), indexing="ij", sparse=True):
        probs_nd = probs_nd * g
    probs = probs_nd.ravel()
    s = row_dots(rows, model.x)
    y = np.asarray(model.link(s), dtype=float) * model.channel.mean_scale
    v = (rows * (probs * y)[:, None]).sum(axis=0)
    lam = pairwise_dot(v, model.x)
    alpha = norm2(v - lam * model.x)
    return lam, v, alpha


def alpha_bound_lipschitz(dist: StandardizedDistribution) -> float:
    """alpha bound E|1-T| for 1-Lipschitz links (rescale first otherwise)."""
    if stein_coefficient(dist) is None:
        raise PreconditionError(
            "stein_coefficient", f"law {dist.kind!r} has no Stein coefficient"
        )
    return e_one_minus_t(dist)


def alpha_bound_c2(dist: StandardizedDistribution, link: LinkFunction) -> float:
    """alpha bound ||theta''|| * gamma_a for twice-differentiable links."""
    if link.second_deriv_bound is None:
        raise PreconditionError(
            "second_deriv_bound", f"link {link.name!r} declares no ||theta''||"
        )
    return link.second_deriv_bound * gamma(dist)


def alpha_bound_sign(dist: StandardizedDistribution, x) -> float:
    """Small-signal alpha bound sqrt(10 gamma_a E|a|^3 ||x||_inf) for sign links.

    Preconditions (each reported by name on violation): the law is
    symmetric, sum |x_i|^3 <= c1 / gamma_a with c1 = sqrt(2/pi) - 1/2, and
    ||x||_inf <= 1/2.
    """
    x = np.asarray(x, dtype=float)
    if not dist.is_symmetric:
        raise PreconditionError("symmetry", f"law {dist.kind!r} is not symmetric")
    x_inf = float(np.max(np.abs(x)))
    if x_inf > 0.5:
        raise PreconditionError("max_coordinate", f"||x||_inf = {x_inf} exceeds 1/2")
    gamma_a = gamma(dist)
    cube = float(np.sum(np.abs(x) ** 3))
    if gamma_a > 0.0 and cube > _C1 / gamma_a:
        raise PreconditionError(
            "cube_norm",
            f"sum|x_i|^3 = {cube:.6g} exceeds c1/gamma_a = {_C1 / gamma_a:.6g}",
        )
    return math.sqrt(10.0 * gamma_a * dist.abs_moment(3) * x_inf)


@dataclasses.dataclass(frozen=True)
class LemmaCheck:
    name: str
    applicable: bool
    reason: str
    lhs: float
    rhs: float
    slack: float

    @property
    def passed(self) -> bool:
        return (not self.applicable) or self.lhs <= self.rhs + self.slack

    def to_dict(self) -> dict:
        return {**dataclasses.asdict(self), "passed": self.passed}


def v_x_lemma_checks(dist: StandardizedDistribution, x, n: int, seed: int) -> list:
    """Numeric checks of the three v_x lemmas for the sign link.

    Returns a list of LemmaCheck entries: the inner-product pinch
    |<v_x, x> - sqrt(2/pi)| <= gamma_a sum|x_i|^3, the norm sandwich
    1/2 <= ||v_x||_2 <= 1 (lower half needs the cube-norm condition), and
    the coordinate bound ||v_x||_inf <= 2 E|a|^3 ||x||_inf (needs symmetry
    and ||x||_inf <= 1/2). Small discrete laws are enumerated exactly;
    otherwise Monte Carlo with a 4-stderr allowance.
    """
    x = np.asarray(x, dtype=float)
    model = SensingModel(dist=dist, link=make_link("sign"), x=x)
    exact = False
    if dist.is_discrete and dist.atoms.size ** x.size <= _ENUM_LIMIT:
        lam, v, _ = enumerate_population(model)
        stderr_scalar = 0.0
        stderr_vec = np.zeros(x.size)
        exact = True
    else:
        summary = population_summary(model, n, seed)
        lam, v = summary.lam, summary.v_x
        stderr_scalar = summary.mc_stderr
        stderr_vec = v_x_of(model, n, seed).stderr

    gamma_a = gamma(dist)
    cube = float(np.sum(np.abs(x) ** 3))
    x_inf = float(np.max(np.abs(x)))
    tol = 0.0 if exact else 4.0 * stderr_scalar
    checks = [
        LemmaCheck(
            name="inner_product_pinch",
            applicable=True,
            reason="",
            lhs=abs(lam - _SQRT_2_OVER_PI),
            rhs=gamma_a * cube,
            slack=tol + 1e-12,
        ),
        LemmaCheck(
            name="norm_upper",
            applicable=True,
            reason="",
            lhs=norm2(v),
            rhs=1.0,
            slack=tol + 1e-12,
        ),
    ]
    if gamma_a == 0.0 or cube <= _C1 / gamma_a:
        checks.append(
            LemmaCheck(
                name="norm_lower",
                applicable=True,
                reason="",
                lhs=0.5,
                rhs=norm2(v),
                slack=tol + 1e-12,
            )
        )
    else:
        checks.append(
            LemmaCheck("norm_lower", False, "cube-norm condition fails", 0.0, 0.0, 0.0)
        )
    if dist.is_symmetric and x_inf <= 0.5:
        inf_tol = 0.0 if exact else 4.0 * float(np.max(stderr_vec))
        checks.append(
            LemmaCheck(
                name="coordinate_bound",
                applicable=True,
                reason="",
                lhs=float(np.max(np.abs(v))),
                rhs=2.0 * dist.abs_moment(3) * x_inf,
                slack=inf_tol + 1e-12,
            )
        )
    else:
        checks.append(
            LemmaCheck(
                "coordinate_bound", False,
                "needs a symmetric law and ||x||_inf <= 1/2", 0.0, 0.0, 0.0,
            )
        )
    return checks
