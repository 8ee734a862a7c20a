import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from scatterbayes.curve import LatentField, PeriodicGrid, spectral_derivative
from scatterbayes.errors import ConfigurationError
from scatterbayes.prior import (KLPriorSpec, SEPriorSpec, TVSpec, kl_expansion, sample_kl,
                                sample_se, se_covariance, tv_seminorm)


def test_kl_zero_coefficients(grid64):
    spec = KLPriorSpec()
    r = kl_expansion(spec, grid64, 0.0, np.zeros(spec.n_modes), np.zeros(spec.n_modes))
    assert np.all(r == 0)


def test_kl_single_mode(grid64):
    spec = KLPriorSpec(s=2.0, n_modes=1)
    r = kl_expansion(spec, grid64, 0.0, [1.0], [0.0])
    np.testing.assert_allclose(r, np.cos(grid64.nodes) / math.sqrt(math.pi), atol=1e-15)


def test_kl_mode_decay():
    spec = KLPriorSpec(s=2.5, n_modes=4)
    np.testing.assert_allclose(spec.mode_std(), np.arange(1, 5) ** -4.5 / math.sqrt(math.pi))


def test_kl_pointwise_variance(grid64):
    spec = KLPriorSpec(s=2.0, n_modes=30, mean_mode_std=0.5)
    rng = np.random.default_rng(11)
    n = 100_000
    draws = np.array([sample_kl(spec, grid64, rng).values for _ in range(n)])
    expected = 0.25 + sum(k ** -8.0 for k in range(1, 31)) / math.pi
    assert spec.pointwise_variance() == pytest.approx(expected, rel=1e-14)
    se = expected * math.sqrt(2.0 / (n - 1))
    assert np.all(np.abs(draws.var(axis=0, ddof=1) - expected) < 3 * se)


def test_kl_zero_mean_without_constant_mode(grid64, rng):
    spec = KLPriorSpec(mean_mode_std=0.0)
    for _ in range(20):
        assert abs(sample_kl(spec, grid64, rng).values.mean()) < 1e-12


def test_kl_too_many_modes(grid64, rng):
    with pytest.raises(ConfigurationError):
        sample_kl(KLPriorSpec(n_modes=32), grid64, rng)


@pytest.mark.parametrize("kw", [dict(s=0.5), dict(s=0.2), dict(n_modes=0),
                                dict(mean_mode_std=-1.0)])
def test_kl_spec_validation(kw):
    with pytest.raises(ConfigurationError):
        KLPriorSpec(**kw)


def test_smoothness_increases_with_s(grid64):
    variances = []
    for s in (1.0, 2.0, 3.0):
        rng = np.random.default_rng(5)
        d = np.array([spectral_derivative(sample_kl(KLPriorSpec(s=s), grid64, rng).values)
                      for _ in range(10_000)])
        variances.append(d.var())
    assert variances[0] > variances[1] > variances[2]


def test_se_marginal_variance_and_antipodal_correlation(grid64):
    spec = SEPriorSpec(0.5)
    rng = np.random.default_rng(3)
    n = 100_000
    draws = np.array([sample_se(spec, grid64, rng).values for _ in range(n)])
    v = draws.var(axis=0, ddof=1)
    assert np.all(np.abs(v - 1.0) < 3 * math.sqrt(2.0 / (n - 1)))
    rho = math.exp(-2.0 / 0.5**2)
    corr = np.corrcoef(draws[:, 0], draws[:, 32])[0, 1]
    assert abs(corr - rho) < 3 * (1 - rho**2) / math.sqrt(n)


def test_se_sampler_square_root_is_exact(grid64):
    # the sampler is linear in its normal draws; recover the matrix column by column
    class Basis:
        def __init__(self, i):
            self.i = i

        def standard_normal(self, n):
            e = np.zeros(n)
            e[self.i] = 1.0
            return e

    spec = SEPriorSpec(0.7)
    B = np.column_stack([sample_se(spec, grid64, Basis(i)).values for i in range(64)])
    np.testing.assert_allclose(B @ B.T, se_covariance(spec, grid64), atol=1e-12)
    C = B @ B.T
    assert C[0, 63] == pytest.approx(C[0, 1], abs=1e-14)


def test_se_covariance_formula(grid64):
    C = se_covariance(SEPriorSpec(0.5), grid64)
    t = grid64.nodes
    assert C[0, 0] == 1.0
    assert C[3, 10] == pytest.approx(math.exp(-2 * math.sin((t[10] - t[3]) / 2) ** 2 / 0.25))


def test_se_length_scale_validation():
    with pytest.raises(ConfigurationError):
        SEPriorSpec(0.0)


@pytest.mark.parametrize("spec", [KLPriorSpec(), SEPriorSpec()], ids=["kl", "se"])
def test_samplers_deterministic(spec, grid64):
    a = spec.sample(grid64, np.random.default_rng(99)).values
    b = spec.sample(grid64, np.random.default_rng(99)).values
    assert a.tobytes() == b.tobytes()


def test_tv_examples(grid128):
    t = grid128.nodes
    assert tv_seminorm(LatentField(grid128, np.full(128, 3.0)), TVSpec(1.0)) == pytest.approx(0, abs=1e-12)
    assert abs(tv_seminorm(LatentField(grid128, np.cos(t)), TVSpec(1.0)) - 4.0) < 1e-10
    assert abs(tv_seminorm(LatentField(grid128, np.cos(t)), TVSpec(0.5)) - 2.0) < 1e-10
    assert tv_seminorm(LatentField(grid128, np.cos(t)), TVSpec(0.0)) == 0.0


def test_tv_validation():
    with pytest.raises(ConfigurationError):
        TVSpec(-1.0)


@settings(max_examples=60, deadline=None)
@given(arrays(float, 64, elements=st.floats(-3, 3)), st.floats(-10, 10), st.floats(0, 5))
def test_tv_positively_homogeneous(v, c, zeta):
    g = PeriodicGrid(64)
    spec = TVSpec(zeta)
    base = tv_seminorm(LatentField(g, v), spec)
    scaled = tv_seminorm(LatentField(g, c * v), spec)
    assert abs(scaled - abs(c) * base) <= 1e-10 * max(1.0, abs(c) * base)
    if np.max(np.abs(spectral_derivative(v))) > 1e-9 and zeta > 0:
        assert base > 0


def _fine_trapezoid_tv(values, upsample):
    n = len(values)
    c = np.fft.rfft(values)
    c[-1] = 0.0
    M = upsample * n
    cf = np.zeros(M // 2 + 1, complex)
    cf[: n // 2 + 1] = c
    d = np.fft.irfft(1j * np.arange(M // 2 + 1) * cf, n=M) * (M / n)
    return np.sum(np.abs(d)) * 2 * np.pi / M


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_tv_matches_refined_trapezoid(seed, grid128):
    r = SEPriorSpec(0.5).sample(grid128, np.random.default_rng(seed))
    a = _fine_trapezoid_tv(r.values, 2048)
    b = _fine_trapezoid_tv(r.values, 8192)
    oracle = (4 * b - a) / 3
    assert abs(tv_seminorm(r, TVSpec(1.0)) - oracle) < 1e-8 * oracle
