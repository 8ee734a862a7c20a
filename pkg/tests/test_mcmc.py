import math

import numpy as np
import pytest
from scipy import stats

from scatterbayes.curve import ErfMap, ExpMap, LatentField, PeriodicGrid
from scatterbayes.errors import ChainError, ConfigurationError, NumericalError
from scatterbayes.mcmc import (ChainConfig, accept_probability, pcn_propose, run_chain,
                               summarize)
from scatterbayes.prior import KLPriorSpec, SEPriorSpec


class IIDPrior:
    """Standard normal prior on every node; minimal stand-in for the chain."""

    kind = "iid"

    def sample(self, grid, rng):
        return LatentField(grid, rng.standard_normal(grid.n_points))

    def pointwise_variance(self):
        return 1.0


def batch_se(x, n_batches=50):
    b = x[: len(x) // n_batches * n_batches].reshape(n_batches, -1, *x.shape[1:]).mean(axis=1)
    return b.std(axis=0, ddof=1) / math.sqrt(n_batches)


def test_pcn_examples(grid64, rng):
    r = SEPriorSpec().sample(grid64, rng)
    xi = SEPriorSpec().sample(grid64, rng)
    np.testing.assert_array_equal(pcn_propose(r, 0.0, xi).values, r.values)
    np.testing.assert_array_equal(pcn_propose(r, 1.0, xi).values, xi.values)
    np.testing.assert_allclose(pcn_propose(r, 0.6, xi).values, 0.8 * r.values + 0.6 * xi.values)


def test_pcn_preserves_gaussian(grid64):
    rng = np.random.default_rng(4)
    prior = SEPriorSpec(0.5)
    n = 100_000
    out = np.empty((n, 64))
    for i in range(n):
        out[i] = pcn_propose(prior.sample(grid64, rng), 0.37, prior.sample(grid64, rng)).values
    se = math.sqrt(2.0 / (n - 1))
    assert np.all(np.abs(out.var(axis=0, ddof=1) - 1.0) < 3 * se)


def test_accept_probability():
    assert accept_probability(3.0, 3.0) == 1.0
    assert accept_probability(1.0, 1.0 + math.log(2)) == pytest.approx(0.5, abs=1e-15)
    assert accept_probability(100.0, -50.0) == 1.0
    assert accept_probability(0.0, math.inf) == 0.0
    assert accept_probability(math.inf, 1e9) == 1.0
    assert accept_probability(math.inf, math.inf) == 0.0
    with pytest.raises(ChainError):
        accept_probability(math.nan, 0.0)
    with pytest.raises(ChainError):
        accept_probability(0.0, math.nan)


@pytest.mark.parametrize("kw", [dict(beta=0.0), dict(beta=1.5), dict(burn_in=100, n_iters=100),
                                dict(thin=0)])
def test_chain_config_validation(kw):
    with pytest.raises(ConfigurationError):
        ChainConfig(**kw)


@pytest.mark.parametrize("n_iters,burn_in,thin", [(100, 0, 1), (1000, 105, 7), (537, 36, 10)])
def test_retained_count(grid64, n_iters, burn_in, thin):
    cfg = ChainConfig(n_iters=n_iters, burn_in=burn_in, thin=thin, prior=SEPriorSpec())
    res = run_chain(cfg, lambda r: 0.0, grid64)
    assert len(res.samples) == (n_iters - burn_in) // thin == cfg.n_retained
    assert len(res.potential_trace) == n_iters


def test_beta_one_always_accepts(grid64):
    cfg = ChainConfig(beta=1.0, n_iters=500, burn_in=0, prior=KLPriorSpec())
    assert run_chain(cfg, lambda r: 0.0, grid64).acceptance_rate == 1.0


def test_chain_deterministic(grid64):
    cfg = ChainConfig(beta=0.4, n_iters=400, burn_in=100, thin=3, seed=17, prior=SEPriorSpec())
    target = lambda r: 0.5 * float(np.sum(r.values**2))
    a = run_chain(cfg, target, grid64, summarize_result=False)
    b = run_chain(cfg, target, grid64, summarize_result=False)
    assert a.samples.tobytes() == b.samples.tobytes()
    assert a.potential_trace.tobytes() == b.potential_trace.tobytes()
    assert a.acceptance_rate == b.acceptance_rate


def test_rng_stream_order(grid64):
    """Each iteration consumes the proposal noise, then one uniform."""
    prior = SEPriorSpec()
    cfg = ChainConfig(beta=0.5, n_iters=3, burn_in=0, thin=1, seed=2, prior=prior)
    rng = np.random.default_rng(2)
    r = prior.sample(grid64, rng)
    for _ in range(3):
        xi = prior.sample(grid64, rng)
        rng.uniform()
        r = pcn_propose(r, 0.5, xi)
    res = run_chain(cfg, lambda r: 0.0, grid64, summarize_result=False)
    np.testing.assert_array_equal(res.samples[-1], r.values)


@pytest.mark.parametrize("prior", [SEPriorSpec(0.5), KLPriorSpec()], ids=["se", "kl"])
def test_prior_preservation(prior, grid64):
    cfg = ChainConfig(beta=0.3, n_iters=20_000, burn_in=0, thin=1, seed=0, prior=prior)
    res = run_chain(cfg, lambda r: 0.0, grid64, summarize_result=False)
    s = res.samples
    assert np.all(np.abs(s.mean(axis=0)) < 3 * batch_se(s))
    pv = prior.pointwise_variance()
    var = s.var(axis=0)
    assert abs(var.mean() / pv - 1) < 0.05
    assert np.all(np.abs(var - pv) < 3 * batch_se(s**2))


def test_detailed_balance_two_coordinates():
    """Quadratic potential on two nodes; compare the joint marginal with quadrature."""
    grid = PeriodicGrid(8)
    Q = np.array([[1.5, 0.8], [0.8, 2.0]])
    target = lambda r: 0.5 * float(r.values[:2] @ Q @ r.values[:2])
    cfg = ChainConfig(beta=0.6, n_iters=200_000, burn_in=1000, thin=2, seed=3, prior=IIDPrior())
    s = run_chain(cfg, target, grid, summarize_result=False).samples[:, :2]

    edges = np.linspace(-2.5, 2.5, 9)
    mids = np.linspace(-4, 4, 801)
    X, Y = np.meshgrid(mids, mids, indexing="ij")
    P = np.stack([X, Y], axis=-1)
    dens = np.exp(-0.5 * np.einsum("...i,ij,...j->...", P, Q + np.eye(2), P))
    dens /= dens.sum()

    # bins 0 and 9 collect the tails
    emp = np.zeros((10, 10))
    np.add.at(emp, (np.digitize(s[:, 0], edges), np.digitize(s[:, 1], edges)), 1.0)
    emp /= emp.sum()
    ref = np.zeros((10, 10))
    ix = np.digitize(mids, edges)
    np.add.at(ref, (ix[:, None].repeat(801, 1), ix[None, :].repeat(801, 0)), dens)
    tv = 0.5 * np.abs(emp - ref).sum()
    assert tv < 0.05


def test_acceptance_decreases_with_beta(grid64):
    target = lambda r: 2.0 * float(np.sum(r.values[:8] ** 2))
    rates = []
    for beta in (0.1, 0.4, 0.9):
        rs = [run_chain(ChainConfig(beta=beta, n_iters=2000, burn_in=0, seed=s,
                                    prior=SEPriorSpec()), target, grid64,
                        summarize_result=False).acceptance_rate for s in range(3)]
        rates.append(np.mean(rs))
    assert rates[0] >= rates[1] >= rates[2]


def test_forward_failures_count_as_rejections(grid64):
    calls = {"n": 0}

    def flaky(r):
        calls["n"] += 1
        if calls["n"] > 1 and calls["n"] % 4 == 0:
            raise NumericalError("solver blew up")
        return 0.0

    res = run_chain(ChainConfig(beta=1.0, n_iters=400, burn_in=0, prior=SEPriorSpec()),
                    flaky, grid64)
    assert res.n_failures == 100
    assert res.acceptance_rate == pytest.approx(0.75)


def test_too_many_failures_abort(grid64):
    def broken(r, _n=[0]):
        _n[0] += 1
        if _n[0] > 1:
            raise NumericalError("always")
        return 0.0

    with pytest.raises(ChainError, match="forward"):
        run_chain(ChainConfig(n_iters=1000, burn_in=0, prior=SEPriorSpec()), broken, grid64)


def test_nan_potential_is_chain_error(grid64):
    with pytest.raises(ChainError):
        run_chain(ChainConfig(n_iters=10, burn_in=0, prior=SEPriorSpec()),
                  lambda r: math.nan, grid64)


def test_progress_callback(grid64):
    seen = []
    run_chain(ChainConfig(n_iters=300, burn_in=0, prior=SEPriorSpec()), lambda r: 0.0, grid64,
              progress=lambda i, psi, acc: seen.append(i), progress_every=100)
    assert seen == [100, 200, 300]


def test_summarize_identical_samples(grid64):
    s = np.tile(0.3 * np.cos(grid64.nodes), (200, 1))
    mean, lo, hi = summarize(s, ErfMap(2, 2), grid64)
    np.testing.assert_allclose(lo, mean.q, rtol=1e-14)
    np.testing.assert_allclose(hi, mean.q, rtol=1e-14)


def test_summarize_two_levels(grid64):
    s = np.vstack([np.zeros((100, 64)), np.full((100, 64), math.log(3))])
    mean, lo, hi = summarize(s, ExpMap(), grid64)
    np.testing.assert_allclose(mean.q, 2.0, rtol=1e-14)
    assert np.all(lo <= hi)


def test_summarize_quantiles_against_normal(grid64):
    rng = np.random.default_rng(8)
    mu = 0.1 * np.sin(grid64.nodes)
    sd = 0.05 + 0.02 * np.cos(grid64.nodes) ** 2
    draws = mu + sd * rng.standard_normal((10_000, 64))
    ident = type("Identity", (), {"radius": staticmethod(lambda v: 2.0 + np.asarray(v))})()
    mean, lo, hi = summarize(draws, ident, grid64)
    np.testing.assert_allclose(lo, 2.0 + stats.norm.ppf(0.025, mu, sd), rtol=0.02)
    np.testing.assert_allclose(hi, 2.0 + stats.norm.ppf(0.975, mu, sd), rtol=0.02)


def test_summarize_needs_samples(grid64):
    with pytest.raises(ConfigurationError):
        summarize(np.zeros((99, 64)), ExpMap(), grid64)


def test_summarize_accepts_latent_list(grid64):
    fields = [LatentField(grid64, np.full(64, 0.1 * (i % 2))) for i in range(100)]
    mean, lo, hi = summarize(fields, ExpMap())
    np.testing.assert_allclose(mean.q, 0.5 * (1 + math.exp(0.1)))
