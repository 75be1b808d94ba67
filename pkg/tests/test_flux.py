"""Pointwise flux-model quantities against closed forms and grid properties."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from junctionflow import DomainError, FluxModel
from junctionflow.oracles import exact_riemann


@pytest.fixture(scope="module")
def lwr():
    return FluxModel.quadratic(4.0, 1.0)


@pytest.fixture(scope="module")
def skewed():
    # strictly concave but not symmetric: f(u) = u (1 - u^2) on [0, 1]
    return FluxModel.from_callables(lambda u: u * (1.0 - u * u),
                                    lambda u: 1.0 - 3.0 * u * u, 1.0)


def test_critical_density():
    assert FluxModel.quadratic(4.0, 1.0).theta == 0.5
    assert FluxModel.quadratic(1.0, 1.0).theta == 0.5
    assert FluxModel.quadratic(1.0, 2.0).theta == 1.0


def test_critical_density_skewed(skewed):
    assert skewed.theta == pytest.approx(1.0 / np.sqrt(3.0), abs=1e-12)
    assert skewed.fmax == pytest.approx(2.0 / (3.0 * np.sqrt(3.0)), abs=1e-12)
    skewed.validate()


def test_conjugate(lwr):
    assert lwr.conjugate(0.25) == pytest.approx(0.75, abs=1e-15)
    assert lwr.conjugate(lwr.theta) == lwr.theta
    assert lwr.conjugate(0.0) == lwr.umax
    with pytest.raises(DomainError):
        lwr.conjugate(1.5)


def test_conjugate_skewed(skewed):
    for u in np.linspace(0.0, 1.0, 41):
        v = skewed.conjugate(u)
        assert skewed.flux(v) == pytest.approx(float(skewed.flux(u)),
                                               abs=1e-12 * skewed.fmax)
        if abs(u - skewed.theta) > 1e-12:
            assert (u - skewed.theta) * (v - skewed.theta) < 0


@given(st.floats(0.0, 1.0))
def test_conjugate_involution(u):
    lwr = FluxModel.quadratic(4.0, 1.0)
    assert abs(lwr.conjugate(lwr.conjugate(u)) - u) <= 1e-10


def test_demand_supply(lwr):
    assert lwr.demand(0.25) == 0.75
    assert lwr.demand(0.75) == 1.0
    assert lwr.demand(0.0) == 0.0
    assert lwr.supply(0.75) == 0.75
    assert lwr.supply(0.25) == 1.0
    assert lwr.supply(1.0) == 0.0
    with pytest.raises(DomainError):
        lwr.demand(-0.1)
    with pytest.raises(DomainError):
        lwr.supply(1.1)


def test_interface_flux_examples(lwr):
    assert lwr.godunov_flux(1.0, 0.0) == 1.0       # fan through the crest
    assert lwr.godunov_flux(0.0, 1.0) == 0.0       # standing shock, no flow
    assert lwr.godunov_flux(0.25, 0.75) == 0.75    # zero-speed shock


def test_interface_flux_matches_riemann_sample(lwr):
    # the stationary-shock case against the exact solver
    u0 = exact_riemann(lwr, 0.25, 0.75, 0.0)
    assert float(lwr.flux(u0)) == pytest.approx(
        float(lwr.godunov_flux(0.25, 0.75)), abs=1e-14)


def test_interface_flux_consistency(lwr):
    u = np.linspace(0.0, 1.0, 101)
    np.testing.assert_allclose(lwr.godunov_flux(u, u), lwr.flux(u),
                               rtol=0, atol=1e-14)


def test_interface_flux_monotone_and_bounded(lwr):
    u = np.linspace(0.0, 1.0, 101)
    ul, ur = np.meshgrid(u, u, indexing="ij")
    g = lwr.godunov_flux(ul, ur)
    assert np.all(np.diff(g, axis=0) >= -1e-14)    # nondecreasing in u_left
    assert np.all(np.diff(g, axis=1) <= 1e-14)     # nonincreasing in u_right
    assert g.min() >= 0.0 and g.max() <= lwr.fmax
    # the unchecked kernel path agrees with the public one
    np.testing.assert_array_equal(g, lwr.interface_flux(ul, ur))


def test_strict_concavity_sampled(lwr):
    u = np.linspace(0.0, 1.0, 101)
    f = np.asarray(lwr.flux(u))
    chords = 0.5 * (f[:-2] + f[2:])
    assert np.all(f[1:-1] > chords - 1e-12)


def test_branch_inverses(lwr, skewed):
    for model in (lwr, skewed):
        q = np.linspace(0.0, model.fmax, 33)
        lo = model.free_density(q)
        hi = model.congested_density(q)
        np.testing.assert_allclose(np.asarray(model.flux(lo)), q, atol=1e-10)
        np.testing.assert_allclose(np.asarray(model.flux(hi)), q, atol=1e-10)
        assert np.all(lo <= model.theta + 1e-12)
        assert np.all(hi >= model.theta - 1e-12)
    with pytest.raises(DomainError):
        lwr.free_density(lwr.fmax * 1.1)


def test_quadratic_invariants():
    model = FluxModel.quadratic(2.0, 3.0)
    assert float(model.flux(0.0)) == 0.0
    assert float(model.flux(3.0)) == 0.0
    assert float(model.dflux(0.0)) > 0.0 > float(model.dflux(3.0))
    assert model.lipschitz == pytest.approx(6.0)
    assert float(model.flux(model.theta)) == model.fmax
    model.validate()
