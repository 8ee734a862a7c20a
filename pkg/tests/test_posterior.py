import math

import numpy as np
import pytest

from scatterbayes.curve import ErfMap, LatentField
from scatterbayes.errors import ConfigurationError, DomainError
from scatterbayes.forward import FarFieldMap, forward_operator
from scatterbayes.posterior import (HybridPotential, PoissonObservation, hybrid_potential,
                                    poisson_potential)
from scatterbayes.prior import SEPriorSpec, TVSpec, tv_seminorm


def neg_log_poisson_product(lam, y):
    """-log prod_j lam_j^y_j e^-lam_j / y_j!, evaluated term by term."""
    total = 0.0
    for l, k in zip(lam, y):
        total -= k * math.log(l) - l - math.lgamma(k + 1)
    return total


def test_poisson_potential_examples():
    assert poisson_potential([1.0], [0]) == 1.0
    assert poisson_potential([math.e], [1]) == pytest.approx(math.e - 1, abs=1e-15)
    assert poisson_potential([0.0, 2.0], [0, 0]) == 2.0


def test_poisson_potential_infinite_when_zero_intensity_sees_counts():
    assert poisson_potential([0.0, 1.0], [3, 1]) == math.inf


def test_poisson_potential_rejects_negative():
    with pytest.raises(DomainError):
        poisson_potential([-1e-3], [0])
    with pytest.raises(ConfigurationError):
        poisson_potential([1.0, 2.0], [1])


def test_poisson_potential_matches_product_formula(rng):
    for _ in range(100):
        m = rng.integers(1, 80)
        lam = rng.uniform(0.01, 3000.0, size=m)
        y = rng.poisson(lam)
        lhs = poisson_potential(lam, y) + sum(math.lgamma(k + 1) for k in y)
        assert abs(lhs - neg_log_poisson_product(lam, y)) < 1e-10 * max(1.0, abs(lhs))


def test_poisson_potential_minimised_at_counts(rng):
    y = rng.integers(1, 500, size=10)
    base = poisson_potential(y.astype(float), y)
    for j in range(10):
        for eps in (-0.3, -1e-3, 1e-3, 0.5):
            lam = y.astype(float)
            lam[j] *= 1 + eps
            assert poisson_potential(lam, y) > base


def test_observation_validation():
    with pytest.raises(ConfigurationError):
        PoissonObservation([1, -2])
    with pytest.raises(ConfigurationError):
        PoissonObservation([1.5])
    assert PoissonObservation([1.0, 2.0]).y.dtype.kind == "i"


@pytest.fixture
def setup(grid64):
    fmap = FarFieldMap(m=16)
    truth = LatentField(grid64, 0.2 * np.cos(2 * grid64.nodes))
    lam = forward_operator(truth, fmap, ErfMap(2, 2)).values
    y = PoissonObservation(np.random.default_rng(0).poisson(lam))
    return fmap, y


def test_hybrid_potential_zeta_zero_is_likelihood(setup, grid64, rng):
    fmap, y = setup
    r = SEPriorSpec().sample(grid64, rng)
    v = hybrid_potential(r, y, fmap, ErfMap(2, 2), TVSpec(0.0))
    assert v.tv_penalty == 0.0
    assert v.total == v.log_likelihood_potential
    assert v.log_likelihood_potential == poisson_potential(v.lambda_used, y)


def test_hybrid_potential_constant_field_has_no_penalty(setup, grid64):
    fmap, y = setup
    r = LatentField(grid64, np.full(64, 0.4))
    v = hybrid_potential(r, y, fmap, ErfMap(2, 2), TVSpec(3.0))
    assert v.tv_penalty == 0.0 and v.total == v.log_likelihood_potential


def test_hybrid_potential_additive(setup, grid64, rng):
    fmap, y = setup
    for _ in range(5):
        r = SEPriorSpec().sample(grid64, rng)
        p1 = hybrid_potential(r, y, fmap, ErfMap(2, 2), TVSpec(1.0)).total
        p0 = hybrid_potential(r, y, fmap, ErfMap(2, 2), TVSpec(0.0)).total
        assert abs((p1 - p0) - tv_seminorm(r, TVSpec(1.0))) < 1e-12 * max(1.0, abs(p1))


def test_potential_deterministic(setup, grid64, rng):
    fmap, y = setup
    r = SEPriorSpec().sample(grid64, rng)
    a = hybrid_potential(r, y, fmap, ErfMap(2, 2), TVSpec(1.0)).total
    b = hybrid_potential(r, y, fmap, ErfMap(2, 2), TVSpec(1.0)).total
    assert np.float64(a).tobytes() == np.float64(b).tobytes()


def test_hybrid_potential_cache(setup, grid64, rng):
    fmap, y = setup
    pot = HybridPotential(y, fmap, ErfMap(2, 2), TVSpec(0.5), cache_size=2)
    r1, r2, r3 = (SEPriorSpec().sample(grid64, rng) for _ in range(3))
    a = pot(r1)
    assert pot(LatentField(grid64, r1.values.copy())) == a
    assert pot.n_evaluations == 1
    pot(r2), pot(r3), pot(r1)
    assert pot.n_evaluations == 4


def test_hybrid_potential_dimension_check(grid64):
    with pytest.raises(ConfigurationError):
        HybridPotential(PoissonObservation([1, 2, 3]), FarFieldMap(m=16))


def test_likelihood_bounded_under_erf_map_with_shift(grid64):
    """Lambda stays inside the interval built from the intensity extremes."""
    fmap = FarFieldMap(m=16, shift=0.5)
    rng = np.random.default_rng(7)
    y = rng.integers(0, 2000, size=16)
    prior = SEPriorSpec(0.5)
    lams, pots = [], []
    for _ in range(1000):
        lam = forward_operator(prior.sample(grid64, rng), fmap, ErfMap(2, 2)).values
        lams.append(lam)
        pots.append(poisson_potential(lam, y))
    lams = np.array(lams)
    lam_lo, lam_hi = lams.min(axis=0), lams.max(axis=0)
    assert np.all(lam_lo >= 0.5)
    # bound on the Euclidean norm of log(lambda) over the whole box [lam_lo, lam_hi]
    l_max = np.linalg.norm(np.maximum(np.abs(np.log(lam_lo)), np.abs(np.log(lam_hi))))
    ynorm = np.linalg.norm(y)
    lower = lam_lo.sum() - l_max * ynorm
    upper = lam_hi.sum() + l_max * ynorm
    assert lower <= min(pots) and max(pots) <= upper
    assert np.all(np.isfinite(pots))
