import math

import numpy as np
import pytest

from steinsense import (
    Channel,
    ConfigError,
    LinkFunction,
    PreconditionError,
    SensingModel,
    alpha_bound_c2,
    alpha_bound_lipschitz,
    alpha_bound_sign,
    alpha_of,
    build_signal,
    enumerate_population,
    lambda_of,
    link_from_dict,
    make_distribution,
    make_link,
    population_summary,
    second_deriv_bound_by_search,
    v_x_lemma_checks,
    v_x_of,
    validate_link,
)

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
TANH_CURVATURE = 4.0 / (3.0 * math.sqrt(3.0))


def _gaussian_model(link, d=16, s=4, seed=3, channel=None):
    x = build_signal({"kind": "unit_sparse", "d": d, "s": s, "seed": seed})
    return SensingModel(
        dist=make_distribution("gaussian"),
        link=link,
        x=x,
        channel=channel or Channel(kind="exact"),
    )


def test_linear_link():
    link = make_link("linear", mu=2.0)
    np.testing.assert_allclose(link(3.0), 6.0)
    assert link.lipschitz_const == 2.0
    assert link.second_deriv_bound == 0.0
    assert not link.is_sign


def test_tanh_link():
    link = make_link("tanh")
    np.testing.assert_allclose(link(0.5), math.tanh(0.5))
    assert link.lipschitz_const == 1.0
    np.testing.assert_allclose(link.second_deriv_bound, TANH_CURVATURE, atol=1e-12)


def test_sign_link():
    link = make_link("sign")
    assert link.is_sign
    np.testing.assert_array_equal(link(np.array([-0.3, 0.0, 0.7])), [-1.0, 1.0, 1.0])
    assert link.lipschitz_const is None
    assert link.second_deriv_bound is None


def test_unknown_link():
    with pytest.raises(ConfigError):
        make_link("relu")


def test_link_dict_roundtrip():
    link = make_link("linear", mu=1.5)
    again = link_from_dict(link.to_dict())
    np.testing.assert_allclose(again(2.0), 3.0)
    assert again.lipschitz_const == 1.5


def test_validate_link_accepts_honest_metadata():
    assert validate_link(make_link("tanh")) == []
    assert validate_link(make_link("sign")) == []


def test_validate_link_catches_lying_slope():
    bad = LinkFunction(
        name="linear",
        fn=lambda t: 2.0 * np.asarray(t, dtype=float),
        lipschitz_const=0.5,
        second_deriv_bound=0.0,
        params={"mu": 2.0},
    )
    problems = validate_link(bad)
    assert len(problems) >= 1


def test_second_deriv_search():
    np.testing.assert_allclose(
        second_deriv_bound_by_search(np.tanh), TANH_CURVATURE, atol=1e-6
    )
    assert second_deriv_bound_by_search(lambda t: 3.0 * t) <= 1e-6
    np.testing.assert_allclose(
        second_deriv_bound_by_search(lambda t: t * t), 2.0, atol=1e-5
    )


def test_channel_mean_scale():
    assert Channel(kind="exact").mean_scale == 1.0
    assert Channel(kind="additive_noise", sigma_z=0.7).mean_scale == 1.0
    np.testing.assert_allclose(Channel(kind="bit_flip", q=0.1).mean_scale, 0.8)


def test_channel_validation():
    with pytest.raises(ConfigError):
        Channel(kind="erase")
    with pytest.raises(ConfigError):
        Channel(kind="additive_noise", sigma_z=-1.0)
    with pytest.raises(ConfigError):
        Channel(kind="bit_flip", q=0.5)


def test_model_requires_unit_direction():
    with pytest.raises(ConfigError):
        SensingModel(
            dist=make_distribution("gaussian"),
            link=make_link("linear", mu=1.0),
            x=np.array([1.0, 1.0]),
            channel=Channel(kind="exact"),
        )


def test_bit_flip_needs_sign_link():
    x = build_signal({"kind": "unit_sparse", "d": 8, "s": 2, "seed": 1})
    with pytest.raises(ConfigError):
        SensingModel(
            dist=make_distribution("gaussian"),
            link=make_link("tanh"),
            x=x,
            channel=Channel(kind="bit_flip", q=0.1),
        )


def test_model_dict_roundtrip():
    model = _gaussian_model(make_link("tanh"))
    again = SensingModel.from_dict(model.to_dict())
    assert again.dim == model.dim
    np.testing.assert_array_equal(again.x, model.x)
    assert again.link.name == "tanh"


def test_lambda_quadrature_linear():
    est = lambda_of(_gaussian_model(make_link("linear", mu=1.5)))
    np.testing.assert_allclose(est.value, 1.5, atol=1e-9)
    assert est.method == "quadrature"


def test_lambda_quadrature_tanh():
    # E[w tanh(w)] for standard normal w, from adaptive quadrature
    est = lambda_of(_gaussian_model(make_link("tanh")))
    np.testing.assert_allclose(est.value, 0.605705509602159, atol=1e-9)


def test_lambda_quadrature_sign():
    est = lambda_of(_gaussian_model(make_link("sign")))
    np.testing.assert_allclose(est.value, SQRT_2_OVER_PI, atol=1e-9)


def test_lambda_bit_flip_scales():
    model = _gaussian_model(make_link("sign"), channel=Channel(kind="bit_flip", q=0.2))
    est = lambda_of(model)
    np.testing.assert_allclose(est.value, 0.6 * SQRT_2_OVER_PI, atol=1e-9)


def test_lambda_quadrature_needs_tractable_index():
    x = build_signal({"kind": "unit_sparse", "d": 6, "s": 3, "seed": 0})
    model = SensingModel(
        dist=make_distribution("uniform"),
        link=make_link("tanh"),
        x=x,
        channel=Channel(kind="exact"),
    )
    with pytest.raises(PreconditionError):
        lambda_of(model, method="quadrature")


def test_lambda_one_dimensional_any_law():
    model = SensingModel(
        dist=make_distribution("uniform"),
        link=make_link("linear", mu=2.0),
        x=np.array([1.0]),
        channel=Channel(kind="exact"),
    )
    np.testing.assert_allclose(lambda_of(model).value, 2.0, atol=1e-9)


def test_lambda_mc_agrees_with_quadrature():
    model = _gaussian_model(make_link("tanh"))
    quad = lambda_of(model)
    mc = lambda_of(model, method="mc", n=200_000, seed=4)
    assert mc.method == "mc"
    assert abs(mc.value - quad.value) < 4 * mc.stderr
    assert not mc.low_sample_warning
    assert lambda_of(model, method="mc", n=5000, seed=4).low_sample_warning


def test_population_summary_gaussian_linear():
    """Linear links leave no bias: v_x = mu x exactly, in expectation."""
    model = _gaussian_model(make_link("linear", mu=1.2))
    summ = population_summary(model, 200_000, seed=8)
    np.testing.assert_allclose(summ.lam, 1.2, atol=0.02)
    assert summ.alpha < 4 * math.sqrt(model.dim) / math.sqrt(200_000)
    np.testing.assert_allclose(summ.v_x, 1.2 * model.x, atol=0.02)
    d = summ.to_dict()
    assert "lambda" in d and "alpha" in d


def test_population_summary_sample_floor():
    model = _gaussian_model(make_link("linear", mu=1.0))
    with pytest.raises(PreconditionError):
        population_summary(model, 5000, seed=0)


def test_v_x_of_stderr_shrinks():
    model = _gaussian_model(make_link("tanh"))
    small = v_x_of(model, 20_000, seed=5)
    large = v_x_of(model, 180_000, seed=5)
    assert np.linalg.norm(large.stderr) < np.linalg.norm(small.stderr)
    assert small.value.shape == (model.dim,)


def test_enumeration_matches_monte_carlo():
    x = build_signal({"kind": "unit_sparse", "d": 10, "s": 5, "seed": 6})
    model = SensingModel(
        dist=make_distribution("rademacher"),
        link=make_link("sign"),
        x=x,
        channel=Channel(kind="exact"),
    )
    lam, v, alpha = enumerate_population(model)
    summ = population_summary(model, 400_000, seed=12)
    assert abs(summ.lam - lam) < 4 * summ.mc_stderr
    assert abs(summ.alpha - alpha) < 4 * summ.mc_stderr
    np.testing.assert_allclose(norm := np.linalg.norm(v), np.linalg.norm(summ.v_x), atol=0.01)
    assert norm <= 1.0 + 1e-12


def test_enumeration_needs_discrete_law():
    model = _gaussian_model(make_link("sign"))
    with pytest.raises(PreconditionError):
        enumerate_population(model)


def test_enumeration_size_guard():
    x = build_signal({"kind": "unit_sparse", "d": 40, "s": 10, "seed": 0})
    model = SensingModel(
        dist=make_distribution("rademacher"),
        link=make_link("sign"),
        x=x,
        channel=Channel(kind="exact"),
    )
    with pytest.raises(PreconditionError):
        enumerate_population(model)


def test_alpha_of_vanishes_for_gaussian():
    model = _gaussian_model(make_link("tanh"), d=8)
    assert alpha_of(model, 200_000, seed=3) < 4 * math.sqrt(8) / math.sqrt(200_000)


def test_alpha_bound_lipschitz():
    np.testing.assert_allclose(
        alpha_bound_lipschitz(make_distribution("laplace")), math.exp(-1.0), atol=1e-9
    )
    with pytest.raises(PreconditionError):
        alpha_bound_lipschitz(make_distribution("rademacher"))


def test_alpha_bound_c2():
    # ||theta''|| gamma = (4 / 3 sqrt 3)(sqrt 3 / 8) = 1/6 for tanh + uniform
    got = alpha_bound_c2(make_distribution("uniform"), make_link("tanh"))
    np.testing.assert_allclose(got, 1.0 / 6.0, atol=1e-9)
    with pytest.raises(PreconditionError):
        alpha_bound_c2(make_distribution("uniform"), make_link("sign"))


def test_alpha_bound_sign_value():
    x = build_signal({"kind": "unit_sparse", "d": 16, "s": 8, "seed": 3})
    got = alpha_bound_sign(make_distribution("rademacher"), x)
    np.testing.assert_allclose(got, math.sqrt(10.0 * 0.5 * 1.0 * np.max(np.abs(x))), atol=1e-9)


def test_alpha_bound_sign_preconditions():
    x_big = np.zeros(4)
    x_big[0] = 1.0  # a spike: max coordinate 1 > 1/2
    with pytest.raises(PreconditionError) as err:
        alpha_bound_sign(make_distribution("rademacher"), x_big)
    assert err.value.condition in ("max_coordinate", "cube_norm")
    x = build_signal({"kind": "unit_sparse", "d": 16, "s": 8, "seed": 3})
    with pytest.raises(PreconditionError) as err:
        alpha_bound_sign(make_distribution("scaled_bernoulli", p=0.3), x)
    assert err.value.condition == "symmetry"


def test_lemma_checks_rademacher_exact():
    x = build_signal({"kind": "unit_sparse", "d": 16, "s": 8, "seed": 3})
    checks = v_x_lemma_checks(make_distribution("rademacher"), x, n=10_000, seed=2)
    names = {c.name for c in checks}
    assert names == {"inner_product_pinch", "norm_upper", "norm_lower", "coordinate_bound"}
    for c in checks:
        assert c.applicable, c.reason
        assert c.passed, (c.name, c.lhs, c.rhs)


def test_lemma_checks_uniform_mc():
    x = build_signal({"kind": "unit_sparse", "d": 12, "s": 6, "seed": 9})
    checks = v_x_lemma_checks(make_distribution("uniform"), x, n=200_000, seed=7)
    for c in checks:
        if c.applicable:
            assert c.passed, (c.name, c.lhs, c.rhs)
