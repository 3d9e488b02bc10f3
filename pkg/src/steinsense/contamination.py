"""Epsilon-contaminated gaussian sensing laws and their propagated bounds.

Two contamination mechanisms around a standard normal g with contaminant a:

* additive   sqrt(1-eps) g + sqrt(eps) a   (independent components)
* mixture    g with probability 1-eps, a with probability eps

Both keep mean 0 and variance 1. The distance to normality degrades
gracefully: the zero-bias discrepancy gamma of the contaminated law is at
most eps^{3/2} gamma_a for the additive form and eps gamma_a for the
mixture, and the mixture Stein-kernel discrepancy is exactly eps E|1-T_a|.
Those factors propagate into the closed-form alpha bounds per link type.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from ._util import ConfigError, PreconditionError
from .distributions import StandardizedDistribution, from_spec, make_distribution, mixture
from .zero_bias import e_one_minus_t, gamma, stein_coefficient

__all__ = [
    "ContaminationModel",
    "BoundSet",
    "contaminated_law",
    "contaminated_gamma",
    "contaminated_alpha_bounds",
]

_MODES = ("additive", "mixture")
_SQRT_8_OVER_PI = math.sqrt(8.0 / math.pi)
# margin from the sign-link lemma: E|g| - 1/2 = sqrt(2/pi) - 1/2
_C1 = math.sqrt(2.0 / math.pi) - 0.5

_CONV_GRID_HALF_WIDTH = 12.0
_CONV_GRID_POINTS = 2**14
# inner trapezoid rule for a continuous contaminant; odd count puts a node
# at 0 where laplace-type densities have their kink
_INNER_NODES = 8193
_INNER_CUTOFF = 45.0


@dataclasses.dataclass(frozen=True)
class ContaminationModel:
    """Contamination mechanism, level, and contaminant law."""

    mode: str
    eps: float
    contaminant: StandardizedDistribution

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ConfigError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if not 0.0 <= self.eps <= 1.0:
            raise ConfigError(f"eps must lie in [0, 1], got {self.eps}")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "eps": self.eps,
            "contaminant": self.contaminant.to_spec(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ContaminationModel":
        return cls(
            mode=obj["mode"],
            eps=float(obj["eps"]),
            contaminant=from_spec(obj["contaminant"]),
        )


def contaminated_law(model: ContaminationModel) -> StandardizedDistribution:
    """The law of the contaminated sensing entry as a standardized law.

    eps = 0 returns the exact gaussian and eps = 1 the contaminant itself
    (for the additive form too: the gaussian part has zero weight, so no
    convolution is involved). The additive interior case is tabulated on a
    uniform grid by direct quadrature of the smoothing integral; the
    gaussian factor keeps that well conditioned.
    """
    if model.eps == 0.0:
        return make_distribution("gaussian")
    if model.eps == 1.0:
        return model.contaminant
    if model.mode == "mixture":
        return mixture(
            [(1.0 - model.eps, make_distribution("gaussian")), (model.eps, model.contaminant)]
        )
    grid = np.linspace(-_CONV_GRID_HALF_WIDTH, _CONV_GRID_HALF_WIDTH, _CONV_GRID_POINTS)
    dens = _additive_density(model.eps, model.contaminant, grid)
    return make_distribution("tabulated", grid=grid, pdf=dens)


def _additive_density(eps: float, contaminant: StandardizedDistribution, grid: np.ndarray):
    """Density of sqrt(1-eps) g + sqrt(eps) a evaluated on ``grid``.

    Atom locations contribute exact gaussian bumps; any continuous part is
    integrated by a fixed trapezoid rule on the (truncated) support.
    """
    sigma = math.sqrt(1.0 - eps)
    shift = math.sqrt(eps)
    out = np.zeros_like(grid)

    for atom, prob in zip(contaminant.atoms, contaminant.atom_probs):
        out += prob * _norm_pdf(grid - shift * atom, sigma)

    if contaminant.density_part is not None:
        lo = max(contaminant.lo, -_INNER_CUTOFF)
        hi = min(contaminant.hi, _INNER_CUTOFF)
        nodes = np.linspace(lo, hi, _INNER_NODES)
        weights = np.full(_INNER_NODES, (hi - lo) / (_INNER_NODES - 1))
        weights[0] *= 0.5
        weights[-1] *= 0.5
        mass = weights * np.asarray(contaminant.pdf(nodes), dtype=float)
        # chunk the outer variable; np.sum keeps the reduction BLAS-free
        for start in range(0, grid.size, 1024):
            block = grid[start : start + 1024, None] - shift * nodes[None, :]
            out[start : start + 1024] += np.sum(_norm_pdf(block, sigma) * mass, axis=1)
    return out


def _norm_pdf(x, sigma):
    z = x / sigma
    return np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))


def contaminated_gamma(model: ContaminationModel) -> float:
    """Zero-bias discrepancy gamma of the contaminated law.

    Runs the usual CDF-difference integral on the constructed law. The
    closed-form upper bounds are eps^{3/2} gamma_a (additive) and
    eps gamma_a (mixture); the mixture value meets its bound exactly
    because the gaussian parts of F and F* cancel in the difference.
    """
    return gamma(contaminated_law(model))


def contaminated_gamma_bound(model: ContaminationModel) -> float:
    """The propagated closed-form bound on gamma of the contaminated law."""
    factor = model.eps**1.5 if model.mode == "additive" else model.eps
    return factor * gamma(model.contaminant)


@dataclasses.dataclass(frozen=True)
class BoundSet:
    """Closed-form alpha bounds for one contamination model and link.

    Entries are None when the corresponding formula does not apply to the
    link or contaminant; ``reasons`` says why.
    """

    lipschitz: float | None
    c2: float | None
    sign: float | None
    reasons: dict
    gamma_contaminant: float
    gamma_bound: float

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def contaminated_alpha_bounds(
    model: ContaminationModel,
    link_meta,
    x_infnorm: float,
    formulas=None,
) -> BoundSet:
    """Evaluate the closed-form alpha bounds that survive contamination.

    ``link_meta`` needs attributes ``name``, ``lipschitz_const``,
    ``second_deriv_bound`` and ``is_sign`` (link_model.LinkFunction). With
    ``formulas=None`` every applicable formula is evaluated and skipped ones
    are explained in ``reasons``; passing an explicit tuple such as
    ``("lipschitz",)`` turns an inapplicable request into an error.

    The three formulas, with gamma_a and E|a|^3 of the contaminant:

    * lipschitz:  L * eps * E|1-T_a|          (needs a Stein kernel)
    * c2:         ||link''|| * eps^{3/2} * gamma_a   (additive)
                  ||link''|| * eps * gamma_a         (mixture)
    * sign:       sqrt(10) shape described below; requires a symmetric
                  contaminant and the small-signal preconditions checked
                  against the contaminated law
    """
    strict = formulas is not None
    wanted = tuple(formulas) if strict else ("lipschitz", "c2", "sign")
    for name in wanted:
        if name not in ("lipschitz", "c2", "sign"):
            raise ConfigError(f"unknown bound formula {name!r}")
    if not 0.0 <= x_infnorm:
        raise ConfigError("x_infnorm must be nonnegative")

    eps = model.eps
    gamma_a = gamma(model.contaminant)
    gamma_bound = (eps**1.5 if model.mode == "additive" else eps) * gamma_a
    reasons: dict = {}
    values: dict = {"lipschitz": None, "c2": None, "sign": None}

    def skip(name, why):
        if strict:
            raise PreconditionError(name, why)
        reasons[name] = why

    if "lipschitz" in wanted:
        if getattr(link_meta, "lipschitz_const", None) is None:
            skip("lipschitz", f"link {link_meta.name!r} has no Lipschitz constant")
        elif stein_coefficient(model.contaminant) is None:
            skip(
                "lipschitz",
                f"contaminant {model.contaminant.kind!r} has no Stein coefficient",
            )
        else:
            values["lipschitz"] = (
                link_meta.lipschitz_const * eps * e_one_minus_t(model.contaminant)
            )

    if "c2" in wanted:
        if getattr(link_meta, "second_deriv_bound", None) is None:
            skip("c2", f"link {link_meta.name!r} has no bounded second derivative")
        else:
            values["c2"] = link_meta.second_deriv_bound * gamma_bound

    if "sign" in wanted:
        why = _sign_precondition_failure(model, x_infnorm, gamma_bound)
        if not getattr(link_meta, "is_sign", False):
            skip("sign", f"link {link_meta.name!r} is not the sign link")
        elif why is not None:
            skip("sign", why)
        else:
            third = model.contaminant.abs_moment(3)
            if model.mode == "additive":
                shape = (
                    math.sqrt(1.0 - eps) * _SQRT_8_OVER_PI ** (1.0 / 3.0)
                    + math.sqrt(eps) * third ** (1.0 / 3.0)
                ) ** 3
                values["sign"] = math.sqrt(10.0 * eps**1.5 * gamma_a * shape * x_infnorm)
            else:
                shape = (
                    ((1.0 - eps) * _SQRT_8_OVER_PI) ** (1.0 / 3.0)
                    + (eps * third) ** (1.0 / 3.0)
                ) ** 3
                values["sign"] = math.sqrt(10.0 * eps * gamma_a * shape * x_infnorm)

    return BoundSet(
        lipschitz=values["lipschitz"],
        c2=values["c2"],
        sign=values["sign"],
        reasons=reasons,
        gamma_contaminant=gamma_a,
        gamma_bound=gamma_bound,
    )


def _sign_precondition_failure(model, x_infnorm, gamma_bound):
    """None when the sign-link small-signal preconditions hold, else a reason.

    The cube-norm condition sum |x_i|^3 <= c1 / gamma uses the bound
    sum |x_i|^3 <= x_infnorm for unit vectors, and gamma of the contaminated
    law is replaced by its (conservative) closed-form bound.
    """
    if not model.contaminant.is_symmetric:
        return f"contaminant {model.contaminant.kind!r} is not symmetric"
    if x_infnorm > 0.5:
        return f"x_infnorm={x_infnorm} exceeds 1/2"
    if gamma_bound > 0.0 and x_infnorm > _C1 / gamma_bound:
        return "cube-norm precondition fails against the contaminated law"
    return None
