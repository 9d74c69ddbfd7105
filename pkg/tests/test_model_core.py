"""Parameters, scaling, interaction kernel, and config parsing."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from swarmscale import (
    EffectiveParams,
    KernelSpec,
    ModelParams,
    apply_scaling,
    kernel_eval,
    kernel_moment,
    merged_params,
    parse_config,
)


def base_params(**overrides):
    kw = dict(alpha0=0.01, beta0=0.5, gamma0=1.0, nu=0.8, R=0.02)
    kw.update(overrides)
    return ModelParams(**kw)


class TestModelParams:
    def test_defaults(self):
        p = base_params()
        assert p.mu == 1.0 and p.eta == 1.0 and p.epsilon == 1.0 and p.D == 0.0

    def test_zero_strengths_allowed(self):
        p = base_params(alpha0=0.0, beta0=0.0, gamma0=0.0, mu=0.0, eta=0.0)
        assert p.alpha0 == 0.0

    @pytest.mark.parametrize(
        "bad",
        [
            dict(alpha0=-1e-9),
            dict(beta0=-0.1),
            dict(gamma0=-2.0),
            dict(mu=-1.0),
            dict(eta=-0.5),
            dict(R=0.0),
            dict(R=-0.1),
            dict(epsilon=0.0),
            dict(epsilon=-1e-3),
            dict(D=-1e-6),
            dict(nu=0.0),
            dict(nu=-0.2),
            dict(nu=1.5),
            dict(alpha0=math.nan),
            dict(R=math.inf),
        ],
    )
    def test_invalid_rejected(self, bad):
        with pytest.raises(ValueError):
            base_params(**bad)

    def test_nu_one_warns(self):
        with pytest.warns(UserWarning):
            base_params(nu=1.0)

    def test_with_overrides(self):
        p = base_params().with_overrides(epsilon=1e-4, R=0.01)
        assert p.epsilon == 1e-4 and p.R == 0.01
        assert p.alpha0 == 0.01  # untouched fields survive

    def test_with_overrides_unknown_key(self):
        with pytest.raises(KeyError):
            base_params().with_overrides(alpha=1.0)

    def test_as_dict_round_trip(self):
        p = base_params(epsilon=1e-3, D=1e-3)
        q = ModelParams(**p.as_dict())
        assert q == p

    def test_merged_params(self):
        p = merged_params(base_params(), {"epsilon": 2e-3})
        assert p.epsilon == 2e-3


class TestScaling:
    def test_scaled_values(self):
        p = base_params(epsilon=1e-3)
        eff = apply_scaling(p)
        assert isinstance(eff, EffectiveParams)
        assert eff.alpha == pytest.approx(p.alpha0 * 1e-3, rel=1e-15)
        assert eff.beta == pytest.approx(p.beta0 * 1e-3, rel=1e-15)
        assert eff.gamma == pytest.approx(p.gamma0 * 1e-3, rel=1e-15)
        assert eff.mu_eff == pytest.approx(1e3, rel=1e-15)
        assert eff.eta_eff == pytest.approx(1e3, rel=1e-15)
        assert eff.delta == 1e-3
        assert eff.nu == p.nu and eff.R == p.R

    @pytest.mark.parametrize("eps", [1.0, 1e-2, 1e-3, 1e-4, 1e-5])
    def test_rate_strength_product_invariant(self, eps):
        # mu_eff * alpha must not drift as the scaling is refined
        p = base_params(epsilon=eps)
        eff = apply_scaling(p)
        assert eff.mu_eff * eff.alpha == pytest.approx(p.mu * p.alpha0, rel=1e-12)
        assert eff.eta_eff * eff.beta == pytest.approx(p.eta * p.beta0, rel=1e-12)

    def test_distinct_type(self):
        eff = apply_scaling(base_params())
        assert not isinstance(eff, ModelParams)


class TestKernel:
    def test_indicator_values(self):
        spec = KernelSpec(radius=0.5)
        x = np.array([0.0, 0.25, 0.5, 0.500000001, 1.0, -0.5, -0.6])
        expected = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0])
        assert np.array_equal(kernel_eval(x, spec), expected)

    def test_boundary_included(self):
        # closed ball: the kernel is 1 exactly at |x| = R
        assert kernel_eval(0.5, KernelSpec(radius=0.5)) == 1.0

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    @pytest.mark.parametrize("R", [0.25, 0.5, 1.5])
    def test_moment_1d_against_quadrature(self, k, R):
        spec = KernelSpec(radius=R)
        ref, _ = quad(lambda r: abs(r) ** k, -R, R)
        assert kernel_moment(k, spec, d=1) == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    @pytest.mark.parametrize("R", [0.25, 0.5, 1.5])
    def test_moment_2d_against_quadrature(self, k, R):
        # polar form: int B(|x|) |x|^k dx = 2 pi int_0^R r^(k+1) dr
        spec = KernelSpec(radius=R)
        ref, _ = quad(lambda r: 2.0 * math.pi * r ** (k + 1), 0.0, R)
        assert kernel_moment(k, spec, d=2) == pytest.approx(ref, rel=1e-10)

    def test_moment_rejects_bad_args(self):
        spec = KernelSpec(radius=0.5)
        with pytest.raises(ValueError):
            kernel_moment(-1, spec, d=1)
        with pytest.raises(ValueError):
            kernel_moment(0, spec, d=3)

    @given(
        x=st.floats(-2.0, 2.0, allow_nan=False),
        R=st.floats(1e-3, 1.5, allow_nan=False),
    )
    @settings(max_examples=200, deadline=None)
    def test_indicator_symmetric_and_binary(self, x, R):
        spec = KernelSpec(radius=R)
        v = kernel_eval(x, spec)
        assert v in (0.0, 1.0)
        assert v == kernel_eval(-x, spec)


class TestConfigParsing:
    def test_basic(self):
        text = "\n".join(
            [
                "# comment line",
                "alpha0 = 0.01",
                "epsilon = 1e-4  # trailing comment",
                "",
                "R=0.02",
            ]
        )
        out = parse_config(text)
        assert out == {"alpha0": 0.01, "epsilon": 1e-4, "R": 0.02}

    def test_unknown_key_named(self):
        with pytest.raises(KeyError) as exc:
            parse_config("bogus = 1.0")
        assert "bogus" in str(exc.value)

    def test_bad_value_names_line(self):
        with pytest.raises(ValueError) as exc:
            parse_config("alpha0 = 0.01\nbeta0 = fast")
        assert "2" in str(exc.value)

    def test_malformed_line(self):
        with pytest.raises(ValueError):
            parse_config("alpha0 0.01")

    def test_allowed_extension(self):
        out = parse_config("dx = 0.5", allowed=("dx",))
        assert out == {"dx": 0.5}
