import math

import numpy as np
import pytest

from steinsense import (
    ConfigError,
    ContaminationModel,
    PreconditionError,
    contaminated_alpha_bounds,
    contaminated_gamma,
    contaminated_gamma_bound,
    contaminated_law,
    e_one_minus_t,
    gamma,
    make_distribution,
    make_link,
)

# Convolution-grid values for sqrt(1-eps) g + sqrt(eps) a with a Rademacher,
# frozen from the adaptive-quadrature gamma of the tabulated density.
ADDITIVE_RADEMACHER_GAMMA = {
    0.1: 0.0027729832144562675,
    0.5: 0.08554985256656449,
    0.9: 0.3797104018761287,
}


def _model(mode, eps, kind="rademacher", **params):
    return ContaminationModel(mode=mode, eps=eps, contaminant=make_distribution(kind, **params))


def test_mode_validation():
    with pytest.raises(ConfigError):
        _model("blend", 0.2)
    with pytest.raises(ConfigError):
        _model("mixture", -0.1)
    with pytest.raises(ConfigError):
        _model("additive", 1.5)


def test_dict_roundtrip():
    model = _model("mixture", 0.3, "laplace")
    again = ContaminationModel.from_dict(model.to_dict())
    assert again.mode == "mixture"
    assert again.eps == 0.3
    assert again.contaminant.kind == "laplace"


@pytest.mark.parametrize("mode", ["additive", "mixture"])
def test_eps_zero_is_gaussian(mode):
    law = contaminated_law(_model(mode, 0.0))
    assert law.kind == "gaussian"
    assert contaminated_gamma(_model(mode, 0.0)) <= 1e-9


@pytest.mark.parametrize("mode", ["additive", "mixture"])
def test_eps_one_is_contaminant(mode):
    model = _model(mode, 1.0, "laplace")
    np.testing.assert_allclose(
        contaminated_gamma(model), 1.0 / (2.0 * math.sqrt(2.0)), atol=1e-6
    )


@pytest.mark.parametrize("eps", [0.1, 0.5])
def test_mixture_gamma_identity(eps):
    """Mixing with the fixed point scales the transport cost linearly."""
    model = _model("mixture", eps)
    np.testing.assert_allclose(contaminated_gamma(model), eps * 0.5, atol=1e-10)


def test_mixture_kernel_discrepancy_scales():
    eps = 0.3
    law = contaminated_law(_model("mixture", eps, "laplace"))
    np.testing.assert_allclose(e_one_minus_t(law), eps * math.exp(-1.0), atol=1e-8)


@pytest.mark.parametrize("eps,value", sorted(ADDITIVE_RADEMACHER_GAMMA.items()))
def test_additive_gamma_frozen(eps, value):
    got = contaminated_gamma(_model("additive", eps))
    np.testing.assert_allclose(got, value, rtol=1e-6)


def test_additive_law_stays_standardized():
    law = contaminated_law(_model("additive", 0.35, "laplace"))
    mean, var = law.mean_var()
    np.testing.assert_allclose(mean, 0.0, atol=1e-9)
    np.testing.assert_allclose(var, 1.0, atol=1e-9)


def test_additive_density_matches_convolution_at_zero():
    # sqrt(1-e) g + sqrt(e) r has density (phi((x-c)/s) + phi((x+c)/s)) / (2s)
    eps = 0.4
    law = contaminated_law(_model("additive", eps))
    s = math.sqrt(1.0 - eps)
    c = math.sqrt(eps)
    x = np.linspace(-3.0, 3.0, 25)
    phi = lambda t: np.exp(-t * t / 2.0) / math.sqrt(2.0 * math.pi)
    want = (phi((x - c) / s) + phi((x + c) / s)) / (2.0 * s)
    # pdf lookups between tabulation nodes interpolate linearly
    np.testing.assert_allclose(law.pdf(x), want, atol=1e-5)


def test_gamma_bound_shapes():
    r = make_distribution("rademacher")
    gam = gamma(r)
    np.testing.assert_allclose(
        contaminated_gamma_bound(_model("mixture", 0.3)), 0.3 * gam, atol=1e-12
    )
    np.testing.assert_allclose(
        contaminated_gamma_bound(_model("additive", 0.3)), 0.3**1.5 * gam, atol=1e-12
    )


@pytest.mark.parametrize("mode", ["additive", "mixture"])
@pytest.mark.parametrize("eps", [0.1, 0.25, 0.5, 1.0])
def test_gamma_bound_dominates(mode, eps):
    model = _model(mode, eps)
    slack = 5e-4 if mode == "additive" else 1e-6
    assert contaminated_gamma(model) <= contaminated_gamma_bound(model) + slack


def test_alpha_bounds_smooth_link():
    model = _model("mixture", 0.25, "laplace")
    out = contaminated_alpha_bounds(model, make_link("tanh"), x_infnorm=0.3)
    assert np.isfinite(out.lipschitz)
    assert np.isfinite(out.c2)
    assert out.sign is None
    assert "sign" in out.reasons
    np.testing.assert_allclose(out.gamma_contaminant, 1.0 / (2.0 * math.sqrt(2.0)), atol=1e-9)
    np.testing.assert_allclose(out.gamma_bound, 0.25 / (2.0 * math.sqrt(2.0)), atol=1e-9)
    # Lipschitz route: E|1 - T| of the contaminated law, linear in eps here
    np.testing.assert_allclose(out.lipschitz, 0.25 * math.exp(-1.0), atol=1e-8)


def test_alpha_bounds_sign_link():
    model = _model("mixture", 1.0)
    out = contaminated_alpha_bounds(model, make_link("sign"), x_infnorm=0.25)
    np.testing.assert_allclose(out.sign, math.sqrt(10.0 * 0.5 * 1.0 * 0.25), atol=1e-9)
    assert out.lipschitz is None and out.c2 is None
    assert "lipschitz" in out.reasons and "c2" in out.reasons


def test_alpha_bounds_sign_needs_small_coordinates():
    model = _model("mixture", 0.5)
    out = contaminated_alpha_bounds(model, make_link("sign"), x_infnorm=0.8)
    assert out.sign is None
    assert "exceeds 1/2" in out.reasons["sign"]


def test_alpha_bounds_sign_needs_symmetry():
    model = _model("mixture", 0.5, "scaled_bernoulli", p=0.3)
    out = contaminated_alpha_bounds(model, make_link("sign"), x_infnorm=0.25)
    assert out.sign is None
    assert "symmetr" in out.reasons["sign"]


def test_strict_mode_raises():
    model = _model("mixture", 0.25)  # discrete: no Stein kernel anywhere
    with pytest.raises(PreconditionError) as err:
        contaminated_alpha_bounds(
            model, make_link("tanh"), x_infnorm=0.3, formulas=["lipschitz"]
        )
    assert err.value.condition == "lipschitz"


def test_strict_mode_unknown_formula():
    model = _model("mixture", 0.25)
    with pytest.raises(ConfigError):
        contaminated_alpha_bounds(
            model, make_link("tanh"), x_infnorm=0.3, formulas=["banana"]
        )


def test_eps_one_sign_bound_matches_plain_law():
    """At full contamination the propagated bound collapses to the plain one."""
    model = _model("mixture", 1.0)
    out = contaminated_alpha_bounds(model, make_link("sign"), x_infnorm=0.25)
    np.testing.assert_allclose(out.sign, 1.118033988749895, atol=1e-9)
    out2 = contaminated_alpha_bounds(_model("additive", 1.0), make_link("sign"), x_infnorm=0.25)
    np.testing.assert_allclose(out2.sign, out.sign, atol=1e-9)
